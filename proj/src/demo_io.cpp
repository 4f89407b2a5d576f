#include "ildvs/demo_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ildvs {

namespace {

constexpr const char* kMagic = "# ildvs-demos";
constexpr const char* kUnits = "f:0-100,p:cm,r:rad*100";
constexpr const char* kColumns = "demo,t,f1,f2,f3,f4,p1,p2,p3,r1,r2,r3";

double parse_double(const std::string& s, long line) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'", line);
  }
  if (used != s.size()) throw ParseError("bad number '" + s + "'", line);
  return v;
}

long parse_long(const std::string& s, long line) {
  std::size_t used = 0;
  long v;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    throw ParseError("bad integer '" + s + "'", line);
  }
  if (used != s.size()) throw ParseError("bad integer '" + s + "'", line);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

void write_demos(std::ostream& out, const Demonstrations& demos) {
  demos.validate();
  char buf[64];
  out << kMagic << " task=" << demos.task;
  std::snprintf(buf, sizeof buf, "%.17g", demos.dt);
  out << " dt=" << buf << " anchor=";
  const double a[4] = {demos.anchor.w(), demos.anchor.x(), demos.anchor.y(), demos.anchor.z()};
  for (int i = 0; i < 4; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", a[i]);
    out << (i ? "," : "") << buf;
  }
  out << " units=" << kUnits << '\n' << kColumns << '\n';
  for (std::size_t n = 0; n < demos.count(); ++n) {
    const auto& s = demos.sequences[n];
    for (Eigen::Index t = 0; t < s.cols(); ++t) {
      out << n << ',' << t;
      for (int k = 0; k < kStateDim; ++k) {
        std::snprintf(buf, sizeof buf, ",%.17g", s(k, t));
        out << buf;
      }
      out << '\n';
    }
  }
}

void write_demos(const std::string& path, const Demonstrations& demos) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write demonstrations '" + path + "'");
  write_demos(out, demos);
  if (!out) throw InvalidArgument("write failed for '" + path + "'");
}

Demonstrations read_demos(std::istream& in) {
  Demonstrations d;
  std::string line;
  long lineno = 1;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0) {
    throw ParseError("missing '# ildvs-demos' header", lineno);
  }
  std::map<std::string, std::string> meta;
  {
    std::istringstream ss(line.substr(std::string(kMagic).size()));
    std::string kv;
    while (ss >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("bad header field '" + kv + "'", lineno);
      meta[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  }
  for (const char* key : {"task", "dt", "anchor", "units"}) {
    if (!meta.count(key)) throw ParseError(std::string("header lacks '") + key + "'", lineno);
  }
  if (meta["units"] != kUnits) throw ParseError("unsupported units '" + meta["units"] + "'", lineno);
  d.task = meta["task"];
  d.dt = parse_double(meta["dt"], lineno);
  const auto a = split(meta["anchor"], ',');
  if (a.size() != 4) throw ParseError("anchor needs 4 components", lineno);
  d.anchor = Quatd(parse_double(a[0], lineno), parse_double(a[1], lineno),
                   parse_double(a[2], lineno), parse_double(a[3], lineno));

  ++lineno;
  if (!std::getline(in, line) || line != kColumns) throw ParseError("bad column header", lineno);

  std::vector<std::vector<Eigen::Matrix<double, kStateDim, 1>>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2 + kStateDim) {
      throw ParseError("expected " + std::to_string(2 + kStateDim) + " fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    }
    const long n = parse_long(fields[0], lineno);
    const long t = parse_long(fields[1], lineno);
    if (n < 0 || n > static_cast<long>(rows.size())) throw ParseError("demo index out of order", lineno);
    if (n == static_cast<long>(rows.size())) rows.emplace_back();
    if (t != static_cast<long>(rows[n].size())) throw ParseError("time index out of order", lineno);
    Eigen::Matrix<double, kStateDim, 1> x;
    for (int k = 0; k < kStateDim; ++k) x[k] = parse_double(fields[2 + k], lineno);
    if (!x.allFinite()) throw ParseError("non-finite value", lineno);
    rows[n].push_back(x);
  }
  if (rows.empty()) throw ParseError("no data rows", lineno);
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) throw ParseError("demonstrations differ in length", lineno);
    Eigen::MatrixXd s(kStateDim, static_cast<Eigen::Index>(r.size()));
    for (std::size_t t = 0; t < r.size(); ++t) s.col(static_cast<Eigen::Index>(t)) = r[t];
    d.sequences.push_back(std::move(s));
  }
  return d;
}

Demonstrations read_demos(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open demonstrations '" + path + "'");
  return read_demos(in);
}

}  // namespace ildvs
