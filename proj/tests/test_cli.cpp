#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using ildvs::cli::run_cli;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ildvs_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

long count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  long n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// name -> default string as printed after the type in the help text.
std::map<std::string, std::string> help_defaults(const std::string& sub) {
  const Outcome o = cli({sub, "--help"});
  static const std::regex re(R"(--([a-z0-9-]+) [A-Z]+(?::\{[^}]*\})? \[([^\]]*)\])");
  std::map<std::string, std::string> out;
  for (std::sregex_iterator it(o.out.begin(), o.out.end(), re), end; it != end; ++it)
    out[(*it)[1]] = (*it)[2];
  return out;
}

}  // namespace

TEST_CASE("help prints the defaults of the run configuration") {
  const ildvs::RunConfig ref;
  const std::map<std::string, double> numeric{
      {"lambda", ref.gains.lambda}, {"eta0", ref.gains.eta0},       {"eta1", ref.gains.eta1},
      {"mu", ref.gains.mu},         {"z-hat", ref.gains.z_hat},     {"horizon", double(ref.horizon)},
      {"noise", ref.noise_px},      {"filter-window", double(ref.filter_window)},
      {"dt", ref.dt},               {"grid-offset", ref.grid_offset}, {"r-inner", ref.success.r_inner},
      {"r-rim", ref.success.r_rim}, {"eps-max", ref.success.eps_max}, {"trials", double(ref.trials)},
      {"seed", double(ref.seed)}};
  const auto shown = help_defaults("protocol");
  for (const auto& [name, value] : numeric) {
    CAPTURE(name);
    REQUIRE(shown.count(name) == 1);
    CHECK(std::stod(shown.at(name)) == doctest::Approx(value).epsilon(1e-5));
  }
  CHECK(shown.at("depth") == ref.depth);
  CHECK(shown.at("schemes") == "dvs,iil,ildvs");

  const auto tr = help_defaults("train");
  CHECK(std::stod(tr.at("lr")) == doctest::Approx(ref.train.learning_rate));
  CHECK(std::stol(tr.at("iters")) == ref.train.iterations);
  CHECK(std::stoi(tr.at("segment")) == ref.train.segment_length);
  CHECK(tr.at("integrator") == "euler");
  const auto dm = help_defaults("demo");
  CHECK(std::stoi(dm.at("num")) == ref.demos);
  CHECK(std::stoi(dm.at("steps")) == ref.steps);
}

TEST_CASE("help text carries units") {
  const Outcome o = cli({"run", "--help"});
  CHECK(o.code == 0);
  for (const char* unit : {"[px]", "[s]", "[m]", "[rad]", "[1/s]", "[steps]", "[frames]"}) {
    CAPTURE(unit);
    CHECK(o.out.find(unit) != std::string::npos);
  }
}

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"demo"}).code == 2);
  CHECK(cli({"demo", "--task", "plate"}).code == 2);
  CHECK(cli({"run", "--task", "mouse", "--lambda", "-1"}).code == 2);
  const Outcome o = cli({"run", "--task", "mouse", "--scheme", "ildvs"});
  CHECK(o.code == 2);
  CHECK(o.err.find("--model") != std::string::npos);
  CHECK(cli({"train"}).code == 2);
  CHECK(cli({"report"}).code == 2);
}

TEST_CASE("the installed binary reports the same exit codes") {
  const std::string bin = ILDVS_BINARY;
  const fs::path dir = scratch("bin");
  CHECK(shell(bin + " --help > /dev/null") == 0);
  CHECK(shell(bin + " demo 2> /dev/null") == 2);
  std::ofstream(dir / "bad.csv") << "# ildvs-demos task=cup dt=0.0333\nnot,a,demo\n";
  const fs::path err = dir / "err.txt";
  CHECK(shell(bin + " train --demos " + (dir / "bad.csv").string() + " 2> " + err.string()) == 2);
  CHECK(slurp(err).find("line") != std::string::npos);
}

TEST_CASE("demo, train and run end to end") {
  const fs::path dir = scratch("e2e");
  const std::string demos = (dir / "d.csv").string();
  Outcome o = cli({"demo", "--task", "cup", "--num", "1", "--steps", "50", "--out", demos});
  REQUIRE(o.code == 0);
  CHECK(count_lines(demos) == 2 + 50);
  CHECK(o.out.find("demo 0 start p=(") != std::string::npos);

  const std::string ckpt = (dir / "m.json").string();
  o = cli({"train", "--demos", demos, "--iters", "100", "--hidden", "16,16", "--segment", "20", "--out", ckpt});
  REQUIRE(o.code == 0);
  CHECK(fs::exists(ckpt));
  CHECK(count_lines(ckpt + ".loss.csv") == 1 + 100);

  const std::string results = (dir / "r.csv").string();
  o = cli({"run", "--task", "cup", "--scheme", "ildvs", "--model", ckpt, "--horizon", "10", "--out",
           results, "--series-dir", (dir / "s").string()});
  REQUIRE(o.code == 0);
  CHECK(o.out.find("cup ILDVS center trial 1") != std::string::npos);
  CHECK(fs::exists(dir / "s" / "eta_cup_ILDVS_center_t1.csv"));
  o = cli({"run", "--task", "cup", "--horizon", "10", "--out", results, "--position", "N2"});
  REQUIRE(o.code == 0);
  CHECK(count_lines(results) == 3);

  // Model trained for cup refused for mouse.
  CHECK(cli({"run", "--task", "mouse", "--scheme", "iil", "--model", ckpt}).code == 2);

  o = cli({"report", "--results", results, "--out", (dir / "rep").string()});
  REQUIRE(o.code == 0);
  CHECK(fs::exists(dir / "rep" / "summary.json"));
  CHECK(slurp(dir / "rep" / "bars.csv").rfind("task,scheme,metric,mean,ci95,n\n", 0) == 0);
}

TEST_CASE("config file values apply and flags override them") {
  const fs::path dir = scratch("cfg");
  const fs::path ini = dir / "c.ini";
  std::ofstream(ini) << "[demo]\nnum = 2\nsteps = 30\nseed = 4\n[servo]\nlambda = 0.9\n";
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  REQUIRE(cli({"demo", "--task", "mouse", "--config", ini.string(), "--out", a}).code == 0);
  CHECK(count_lines(a) == 2 + 60);
  REQUIRE(cli({"demo", "--task", "mouse", "--config", ini.string(), "--steps", "40", "--out", b}).code == 0);
  CHECK(count_lines(b) == 2 + 80);
  CHECK(cli({"demo", "--task", "mouse", "--config", (dir / "missing.ini").string()}).code == 2);
}

TEST_CASE("same seed gives identical files, a new seed does not") {
  const fs::path dir = scratch("det");
  const auto make = [&](const std::string& name, const std::string& seed) {
    const std::string p = (dir / name).string();
    REQUIRE(cli({"demo", "--task", "cup", "--num", "2", "--steps", "40", "--seed", seed, "--out", p}).code == 0);
    return slurp(p);
  };
  const std::string x = make("x.csv", "3"), y = make("y.csv", "3"), z = make("z.csv", "5");
  CHECK(x == y);
  CHECK(x != z);
}

TEST_CASE("protocol writes results, series and summaries and resumes") {
  const fs::path dir = scratch("proto");
  const std::vector<std::string> args{"protocol", "--task", "mouse", "--schemes", "dvs", "--trials", "1",
                                      "--horizon", "5", "--out", dir.string()};
  Outcome o = cli(args);
  REQUIRE(o.code == 0);
  const fs::path csv = dir / "results_mouse.csv";
  CHECK(count_lines(csv) == 1 + 5);
  CHECK(fs::exists(dir / "summary_mouse.json"));
  CHECK(fs::exists(dir / "summary_mouse.md"));
  CHECK(fs::exists(dir / "series" / "eta_mouse_DVS_N4_t1.csv"));
  const std::string first = slurp(csv);

  auto resumed = args;
  resumed.push_back("--resume");
  o = cli(resumed);
  REQUIRE(o.code == 0);
  CHECK(o.out.find("[resumed]") != std::string::npos);
  CHECK(slurp(csv) == first);
  REQUIRE(cli(args).code == 0);
  CHECK(slurp(csv) == first);
}

TEST_CASE("the frozen config restates the built-in defaults") {
  std::map<std::string, std::string> shown;
  for (const char* sub : {"demo", "train", "run", "protocol"})
    for (const auto& [k, v] : help_defaults(sub)) shown[k] = v;
  const auto kv = ildvs::read_ini(std::string(ILDVS_CONFIG_DIR) + "/default.ini");
  CHECK(kv.size() >= 25);
  for (const auto& [key, value] : kv) {
    CAPTURE(key);
    // Vector options print without their default.
    if (key == "grid-center" || key == "hidden") continue;
    REQUIRE(shown.count(key) == 1);
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (end != value.c_str() && *end == '\0')
      CHECK(std::stod(shown.at(key)) == doctest::Approx(x).epsilon(1e-5));
    else
      CHECK(shown.at(key) == value);
  }
  const ildvs::RunConfig ref;
  CHECK(ref.grid_center == std::vector<double>{0.5, 0, 0});
  CHECK(ref.train.hidden == std::vector<int>{256, 256});
}
