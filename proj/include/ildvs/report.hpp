#pragma once

// Aggregation of trial results: per task and scheme means with 95% Student-t
// confidence half-widths, and the train / novel / overall success breakdown.

#include <iosfwd>
#include <optional>
#include <vector>

#include "ildvs/harness.hpp"

namespace ildvs {

struct Stat {
  double mean = 0;
  double half_width = 0;  // 0 when n < 2
  int n = 0;
};

Stat mean_ci(const std::vector<double>& xs, double level = 0.95);

struct SchemeSummary {
  Task task = Task::mouse;
  Scheme scheme = Scheme::dvs;
  int trials = 0;
  Stat eta_final;        // all positions
  Stat eta_final_train;  // trained position
  Stat eta_final_novel;  // the four novel positions
  Stat delta;            // trained position only
  Stat epsilon;
  std::optional<double> success_train, success_novel, success_overall;
  int workspace_violations = 0;
  int targets_lost = 0;
};

// One entry per (task, scheme) in order of first appearance.
std::vector<SchemeSummary> summarize(const std::vector<TrialResult>& results);

void write_summary_json(std::ostream& out, const std::vector<SchemeSummary>& summary);
void write_summary_markdown(std::ostream& out, const std::vector<SchemeSummary>& summary);

}  // namespace ildvs
