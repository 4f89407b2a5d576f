#include "ildvs/report.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "json.hpp"

namespace ildvs {

Stat mean_ci(const std::vector<double>& xs, double level) {
  Stat s;
  s.n = static_cast<int>(xs.size());
  if (s.n == 0) return s;
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / s.n;
  if (s.n < 2) return s;
  double ss = 0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  const double sd = std::sqrt(ss / (s.n - 1));
  const boost::math::students_t dist(s.n - 1);
  s.half_width = boost::math::quantile(dist, 0.5 + level / 2) * sd / std::sqrt(double(s.n));
  return s;
}

std::vector<SchemeSummary> summarize(const std::vector<TrialResult>& results) {
  std::vector<SchemeSummary> out;
  std::vector<std::vector<const TrialResult*>> groups;
  for (const auto& r : results) {
    std::size_t g = 0;
    while (g < out.size() && !(out[g].task == r.task && out[g].scheme == r.scheme)) ++g;
    if (g == out.size()) {
      out.push_back({});
      out.back().task = r.task;
      out.back().scheme = r.scheme;
      groups.emplace_back();
    }
    groups[g].push_back(&r);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    SchemeSummary& s = out[g];
    std::vector<double> eta, eta_tr, eta_nv, delta, eps, succ_tr, succ_nv;
    for (const TrialResult* r : groups[g]) {
      const bool trained = r->position == "center";
      eta.push_back(r->eta_final);
      (trained ? eta_tr : eta_nv).push_back(r->eta_final);
      if (r->delta) delta.push_back(*r->delta);
      eps.push_back(r->epsilon);
      if (r->success) (trained ? succ_tr : succ_nv).push_back(*r->success);
      s.workspace_violations += r->termination == "workspace_violation";
      s.targets_lost += r->termination == "target_lost";
    }
    s.trials = static_cast<int>(groups[g].size());
    s.eta_final = mean_ci(eta);
    s.eta_final_train = mean_ci(eta_tr);
    s.eta_final_novel = mean_ci(eta_nv);
    s.delta = mean_ci(delta);
    s.epsilon = mean_ci(eps);
    if (!succ_tr.empty() || !succ_nv.empty()) {
      if (!succ_tr.empty()) s.success_train = mean_ci(succ_tr).mean;
      if (!succ_nv.empty()) s.success_novel = mean_ci(succ_nv).mean;
      std::vector<double> all = succ_tr;
      all.insert(all.end(), succ_nv.begin(), succ_nv.end());
      s.success_overall = mean_ci(all).mean;
    }
  }
  return out;
}

namespace {

nlohmann::json to_json(const Stat& s) {
  return {{"mean", s.mean}, {"ci95", s.half_width}, {"n", s.n}};
}

std::string cell(const Stat& s) {
  if (s.n == 0) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g ± %.2g", s.mean, s.half_width);
  return buf;
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *v);
  return buf;
}

}  // namespace

void write_summary_json(std::ostream& out, const std::vector<SchemeSummary>& summary) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : summary) {
    nlohmann::json e = {{"task", to_string(s.task)},
                        {"scheme", to_string(s.scheme)},
                        {"trials", s.trials},
                        {"eta_final", to_json(s.eta_final)},
                        {"eta_final_train", to_json(s.eta_final_train)},
                        {"eta_final_novel", to_json(s.eta_final_novel)},
                        {"delta_m", to_json(s.delta)},
                        {"epsilon_rad", to_json(s.epsilon)},
                        {"workspace_violations", s.workspace_violations},
                        {"targets_lost", s.targets_lost}};
    if (s.success_overall) {
      e["success"] = {{"train", s.success_train ? nlohmann::json(*s.success_train) : nullptr},
                      {"novel", s.success_novel ? nlohmann::json(*s.success_novel) : nullptr},
                      {"overall", *s.success_overall}};
    }
    j.push_back(std::move(e));
  }
  out << j.dump(2) << '\n';
}

void write_summary_markdown(std::ostream& out, const std::vector<SchemeSummary>& summary) {
  out << "| task | scheme | trials | final eta | final eta (novel) | delta [m] | epsilon [rad] |\n"
      << "|---|---|---|---|---|---|---|\n";
  for (const auto& s : summary) {
    out << "| " << to_string(s.task) << " | " << to_string(s.scheme) << " | " << s.trials << " | "
        << cell(s.eta_final) << " | " << cell(s.eta_final_novel) << " | " << cell(s.delta) << " | "
        << cell(s.epsilon) << " |\n";
  }
  bool any = false;
  for (const auto& s : summary) any |= s.success_overall.has_value();
  if (!any) return;
  out << "\nSuccess rate [%]\n\n| task | scheme | train | novel | overall |\n|---|---|---|---|---|\n";
  for (const auto& s : summary) {
    if (!s.success_overall) continue;
    out << "| " << to_string(s.task) << " | " << to_string(s.scheme) << " | " << pct(s.success_train)
        << " | " << pct(s.success_novel) << " | " << pct(s.success_overall) << " |\n";
  }
}

}  // namespace ildvs
