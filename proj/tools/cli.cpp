#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <tuple>

#include "ildvs/checkpoint.hpp"
#include "ildvs/demo_io.hpp"
#include "ildvs/harness.hpp"
#include "ildvs/report.hpp"

namespace ildvs::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App* sub, Cli& c) {
  sub->add_option("--config", c.config_path, "INI file supplying flag values; flags override it");
  sub->add_option("--seed", c.cfg.seed, "random seed");
}

void add_task(CLI::App* sub, Cli& c) {
  sub->add_option("--task", c.cfg.task, "task (mouse|cup)")->check(CLI::IsMember({"mouse", "cup"}));
}

void add_geometry(CLI::App* sub, Cli& c) {
  sub->add_option("--grid-center", c.cfg.grid_center, "trained object position x,y,z [m]")
      ->expected(3)
      ->delimiter(',');
  sub->add_option("--grid-offset", c.cfg.grid_offset, "novel position offset from center [m]");
}

void add_perception(CLI::App* sub, Cli& c) {
  sub->add_option("--noise", c.cfg.noise_px, "detector per-side jitter amplitude [px]");
  sub->add_option("--filter-window", c.cfg.filter_window, "moving-average window [frames]");
  sub->add_option("--dt", c.cfg.dt, "control / camera period [s]");
}

void add_servo(CLI::App* sub, Cli& c) {
  sub->add_option("--lambda", c.cfg.gains.lambda, "feedback gain [1/s]");
  sub->add_option("--eta0", c.cfg.gains.eta0, "switch band lower edge [normalized units]");
  sub->add_option("--eta1", c.cfg.gains.eta1, "switch band upper edge [normalized units]");
  sub->add_option("--mu", c.cfg.gains.mu, "pseudo-inverse damping [-]");
  sub->add_option("--z-hat", c.cfg.gains.z_hat, "interaction depth when --depth fixed [m]");
  sub->add_option("--depth", c.cfg.depth, "interaction depth (desired|fixed|ground_truth)")
      ->check(CLI::IsMember({"desired", "fixed", "ground_truth"}));
  sub->add_option("--horizon", c.cfg.horizon, "trial length [steps]");
  sub->add_option("--r-inner", c.cfg.success.r_inner, "clean-drop radius [m]");
  sub->add_option("--r-rim", c.cfg.success.r_rim, "rim-hit radius [m]");
  sub->add_option("--eps-max", c.cfg.success.eps_max, "orientation tolerance for a drop [rad]");
  sub->add_option("--model", c.cfg.checkpoint_path, "NODE checkpoint (required for iil/ildvs)");
}

void add_train(CLI::App* sub, Cli& c) {
  sub->add_option("--demos", c.cfg.demos_path, "demonstration file");
  sub->add_option("--iters", c.cfg.train.iterations, "training iterations [-]");
  sub->add_option("--lr", c.cfg.train.learning_rate, "Adam learning rate [-]");
  sub->add_option("--segment", c.cfg.train.segment_length, "segment length T_s [states]");
  sub->add_option("--integrator", c.cfg.integrator, "fixed-step integrator (euler|rk4)")
      ->check(CLI::IsMember({"euler", "rk4"}));
  sub->add_option("--hidden", c.cfg.train.hidden, "hidden layer widths [neurons]")->delimiter(',');
  sub->add_option("--out", c.cfg.out, "checkpoint path (default model_<task>.json)");
  sub->add_option("--loss-curve", c.loss_curve_path, "loss curve CSV (default <out>.loss.csv)");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string describe(const Posed& p) {
  std::ostringstream s;
  s << "p=(" << fmt(p.p.x()) << ", " << fmt(p.p.y()) << ", " << fmt(p.p.z()) << ") m q=("
    << fmt(p.q.w()) << ", " << fmt(p.q.x()) << ", " << fmt(p.q.y()) << ", " << fmt(p.q.z()) << ")";
  return s.str();
}

void require_task(const Cli& c, const CLI::App* sub) {
  if (c.cfg.task.empty()) throw UsageError("--task is required\n" + sub->help());
}

Vec3d grid_center(const RunConfig& cfg) {
  return {cfg.grid_center[0], cfg.grid_center[1], cfg.grid_center[2]};
}

NodeModel load_model_for(const RunConfig& cfg) {
  if (cfg.checkpoint_path.empty()) throw UsageError("--model is required for iil/ildvs");
  if (!fs::exists(cfg.checkpoint_path)) throw UsageError("no such checkpoint: " + cfg.checkpoint_path);
  NodeModel m = load_checkpoint(cfg.checkpoint_path);
  if (m.task != cfg.task) {
    throw UsageError("checkpoint was trained for task '" + m.task + "', not '" + cfg.task + "'");
  }
  return m;
}

int do_demo(Cli& c, std::ostream& out) {
  require_task(c, c.demo);
  const RunConfig& cfg = c.cfg;
  std::vector<Posed> starts;
  const Demonstrations d = collect_demos(parse_task(cfg.task), grid_center(cfg), cfg.demos, cfg.steps,
                                         cfg.dt, cfg.detection_config(), cfg.seed, {}, &starts);
  const std::string path = cfg.out.empty() ? "demos_" + cfg.task + ".csv" : cfg.out;
  write_demos(path, d);
  for (std::size_t n = 0; n < starts.size(); ++n) out << "demo " << n << " start " << describe(starts[n]) << '\n';
  out << "wrote " << d.count() << " x " << d.length() << " records to " << path << '\n';
  return kExitOk;
}

int do_train(Cli& c, std::ostream& out) {
  const RunConfig& cfg = c.cfg;
  if (cfg.demos_path.empty()) throw UsageError("--demos is required\n" + c.train->help());
  if (!fs::exists(cfg.demos_path)) throw UsageError("no such file: " + cfg.demos_path);
  const Demonstrations d = read_demos(cfg.demos_path);
  TrainConfig tc = cfg.train_config();
  tc.dt = d.dt;
  const TrainResult r = train(d, tc, [&](long it, double loss) {
    if ((it + 1) % 1000 == 0) out << "iteration " << it + 1 << " loss " << fmt(loss) << '\n';
  });
  const std::string ckpt = cfg.out.empty() ? "model_" + d.task + ".json" : cfg.out;
  save_checkpoint(ckpt, r.model);
  const std::string curve = c.loss_curve_path.empty() ? ckpt + ".loss.csv" : c.loss_curve_path;
  std::ofstream lc(curve);
  if (!lc) throw InvalidArgument("cannot write " + curve);
  lc << "iteration,loss\n";
  for (std::size_t i = 0; i < r.loss_curve.size(); ++i) lc << i << ',' << fmt(r.loss_curve[i]) << '\n';
  out << "final loss " << fmt(r.loss_curve.back()) << "\nwrote " << ckpt << " and " << curve << '\n';
  return kExitOk;
}

void append_row(const std::string& path, const TrialResult& r) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream f(path, std::ios::app);
  if (!f) throw InvalidArgument("cannot append to " + path);
  if (fresh) write_results_header(f);
  write_result_row(f, r);
  f.flush();
}

void write_series(const std::string& dir, const TrialResult& r) {
  fs::create_directories(dir);
  std::ofstream f(fs::path(dir) / eta_series_filename(r));
  if (!f) throw InvalidArgument("cannot write series into " + dir);
  write_eta_series(f, r);
}

std::string trial_line(const TrialResult& r) {
  std::ostringstream s;
  s << to_string(r.task) << ' ' << to_string(r.scheme) << ' ' << r.position << " trial " << r.trial
    << ": steps=" << r.steps << " eta=" << fmt(r.eta_final)
    << " delta=" << (r.delta ? fmt(*r.delta) + " m" : std::string("n/a"))
    << " epsilon=" << fmt(r.epsilon) << " rad"
    << " success=" << (r.success ? fmt(*r.success) : std::string("n/a")) << " (" << r.termination << ")";
  return s.str();
}

int do_run(Cli& c, std::ostream& out) {
  require_task(c, c.run);
  TrialConfig tc = c.cfg.trial_config();
  std::optional<NodeModel> model;
  if (tc.scheme != Scheme::dvs) {
    model = load_model_for(c.cfg);
    tc.model = &*model;
  }
  const TrialResult r = run_trial(tc);
  out << trial_line(r) << '\n';
  if (!c.cfg.out.empty()) append_row(c.cfg.out, r);
  if (!c.series_dir.empty()) write_series(c.series_dir, r);
  return kExitOk;
}

std::vector<Scheme> parse_schemes(const std::string& list) {
  std::vector<Scheme> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_scheme(item));
  if (out.empty()) throw InvalidArgument("no schemes given");
  return out;
}

void write_summaries(const std::string& dir, const std::string& stem,
                     const std::vector<TrialResult>& results, std::ostream& out) {
  const auto summary = summarize(results);
  {
    std::ofstream j(fs::path(dir) / (stem + ".json"));
    write_summary_json(j, summary);
  }
  std::ofstream m(fs::path(dir) / (stem + ".md"));
  write_summary_markdown(m, summary);
  write_summary_markdown(out, summary);
}

int do_protocol(Cli& c, std::ostream& out) {
  require_task(c, c.protocol);
  ProtocolConfig pc;
  pc.base = c.cfg.trial_config();
  pc.schemes = parse_schemes(c.schemes);
  pc.trials = c.cfg.trials;
  std::optional<NodeModel> model;
  bool learned = false;
  for (Scheme s : pc.schemes) learned |= s != Scheme::dvs;
  if (learned) {
    model = load_model_for(c.cfg);
    pc.base.model = &*model;
  }

  const std::string dir = c.cfg.out.empty() ? "results" : c.cfg.out;
  fs::create_directories(dir);
  const std::string csv = (fs::path(dir) / ("results_" + c.cfg.task + ".csv")).string();
  const std::string series = (fs::path(dir) / "series").string();

  std::map<std::tuple<int, std::string, int>, TrialResult> done;
  if (c.resume && fs::exists(csv)) {
    std::ifstream in(csv);
    for (auto& r : read_results(in)) {
      done[{static_cast<int>(r.scheme), r.position, r.trial}] = r;
    }
  } else {
    std::ofstream f(csv, std::ios::trunc);
    write_results_header(f);
  }
  pc.lookup = [&](const TrialConfig& t) -> std::optional<TrialResult> {
    auto it = done.find({static_cast<int>(t.scheme), t.position, t.trial});
    if (it == done.end()) return std::nullopt;
    return it->second;
  };
  const auto results = run_protocol(pc, [&](const TrialResult& r, bool reused) {
    out << trial_line(r) << (reused ? " [resumed]" : "") << '\n';
    if (reused) return;
    append_row(csv, r);
    write_series(series, r);
  });
  write_summaries(dir, "summary_" + c.cfg.task, results, out);
  out << "wrote " << results.size() << " trials to " << csv << '\n';
  return kExitOk;
}

int do_report(Cli& c, std::ostream& out) {
  if (c.result_files.empty()) throw UsageError("--results is required\n" + c.report->help());
  std::vector<TrialResult> all;
  for (const auto& path : c.result_files) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    auto rs = read_results(in);
    all.insert(all.end(), rs.begin(), rs.end());
  }
  const std::string dir = c.cfg.out.empty() ? "." : c.cfg.out;
  fs::create_directories(dir);
  write_summaries(dir, "summary", all, out);
  std::ofstream bars(fs::path(dir) / "bars.csv");
  bars << "task,scheme,metric,mean,ci95,n\n";
  for (const auto& s : summarize(all)) {
    const std::string key = std::string(to_string(s.task)) + ',' + to_string(s.scheme) + ',';
    const std::pair<const char*, const Stat*> stats[] = {{"eta_final", &s.eta_final},
                                                         {"eta_final_novel", &s.eta_final_novel},
                                                         {"delta", &s.delta},
                                                         {"epsilon", &s.epsilon}};
    for (const auto& [name, st] : stats) {
      if (st->n == 0) continue;
      bars << key << name << ',' << fmt(st->mean) << ',' << fmt(st->half_width) << ',' << st->n << '\n';
    }
    const std::pair<const char*, const std::optional<double>*> rates[] = {
        {"success_train", &s.success_train},
        {"success_novel", &s.success_novel},
        {"success_overall", &s.success_overall}};
    for (const auto& [name, v] : rates) {
      if (*v) bars << key << name << ',' << fmt(**v) << ",0,\n";
    }
  }
  return kExitOk;
}

// Rewrites args so flags read from --config come right after the subcommand
// name; with the take-last policy any flag repeated by the user wins.
std::vector<std::string> merge_config(Cli& c, const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  if (!fs::exists(path)) throw UsageError("no such config file: " + path);
  CLI::App* sub = nullptr;
  for (CLI::App* s : {c.demo, c.train, c.run, c.protocol, c.report})
    if (s->get_name() == args[0]) sub = s;
  if (!sub) return args;

  std::vector<std::string> merged{args[0]};
  for (const auto& [key, value] : read_ini(path)) {
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1") merged.push_back("--" + key);
      continue;
    }
    merged.push_back("--" + key);
    merged.push_back(value);
  }
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

}  // namespace

std::unique_ptr<Cli> make_cli() {
  auto c = std::make_unique<Cli>();
  CLI::App& app = c->app;
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  c->demo = app.add_subcommand("demo", "generate scripted demonstrations");
  add_common(c->demo, *c);
  add_task(c->demo, *c);
  add_geometry(c->demo, *c);
  add_perception(c->demo, *c);
  c->demo->add_option("--num", c->cfg.demos, "number of demonstrations [-]");
  c->demo->add_option("--steps", c->cfg.steps, "records per demonstration [steps]");
  c->demo->add_option("--out", c->cfg.out, "output file (default demos_<task>.csv)");

  c->train = app.add_subcommand("train", "train the NODE imitator on a demonstration file");
  add_common(c->train, *c);
  add_train(c->train, *c);

  c->run = app.add_subcommand("run", "run one trial");
  add_common(c->run, *c);
  add_task(c->run, *c);
  add_geometry(c->run, *c);
  add_perception(c->run, *c);
  add_servo(c->run, *c);
  c->run->add_option("--scheme", c->cfg.scheme, "control scheme (dvs|iil|ildvs)")
      ->check(CLI::IsMember({"dvs", "iil", "ildvs"}, CLI::ignore_case));
  c->run->add_option("--position", c->cfg.position, "object position (center|N1|N2|N3|N4)")
      ->check(CLI::IsMember({"center", "N1", "N2", "N3", "N4"}));
  c->run->add_option("--trial", c->cfg.trial, "trial index (seeds jitter and noise) [-]");
  c->run->add_option("--out", c->cfg.out, "results CSV to append to");
  c->run->add_option("--series-dir", c->series_dir, "directory for the step,eta series");

  c->protocol = app.add_subcommand("protocol", "run all schemes x positions x trials for a task");
  add_common(c->protocol, *c);
  add_task(c->protocol, *c);
  add_geometry(c->protocol, *c);
  add_perception(c->protocol, *c);
  add_servo(c->protocol, *c);
  c->protocol->add_option("--schemes", c->schemes, "comma-separated schemes");
  c->protocol->add_option("--trials", c->cfg.trials, "trials per position [-]");
  c->protocol->add_option("--out", c->cfg.out, "output directory (default results)");
  c->protocol->add_flag("--resume", c->resume, "keep finished trials of an interrupted run");

  c->report = app.add_subcommand("report", "summarize results CSV files");
  add_common(c->report, *c);
  c->report->add_option("--results", c->result_files, "results CSV file(s)");
  c->report->add_option("--out", c->cfg.out, "output directory (default .)");
  return c;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto c = make_cli();
  try {
    std::vector<std::string> merged = merge_config(*c, args);
    std::vector<const char*> argv{"ildvs"};
    for (const auto& a : merged) argv.push_back(a.c_str());
    try {
      c->app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = c->app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }
    c->cfg.validate();
    if (c->demo->parsed()) return do_demo(*c, out);
    if (c->train->parsed()) return do_train(*c, out);
    if (c->run->parsed()) return do_run(*c, out);
    if (c->protocol->parsed()) return do_protocol(*c, out);
    if (c->report->parsed()) return do_report(*c, out);
    err << c->app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnitMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalBlowup& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace ildvs::cli
