#include <unistd.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "plot.hpp"
#include "rbi/cancel.hpp"
#include "rbi/csv.hpp"
#include "rbi/experiments.hpp"
#include "rbi/mdp.hpp"
#include "rbi/solvers.hpp"

#ifndef RBI_VERSION
#define RBI_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace rbi;
using namespace rbi::cli;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

extern "C" void on_sigint(int) { cancel_flag().store(true); }

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(csv::parse_double(item));
    } catch (const std::exception&) {
      throw ConfigError(what + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw RuntimeFailure("cannot write " + path.string());
}

/// Writes `content` next to `path` and renames it into place.
void replace_file(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, content);
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------- plots from CSVs

std::vector<double> column(const csv::Table& t, const std::string& name) {
  const std::size_t c = t.column(name);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) out.push_back(csv::parse_double(r[c]));
  return out;
}

/// Groups rows by the value in `key`, keeping first-appearance order.
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by(const csv::Table& t, const std::string& key) {
  const std::size_t c = t.column(key);
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string& k = t.rows[i][c];
    auto [it, fresh] = index.emplace(k, groups.size());
    if (fresh) groups.push_back({k, {}});
    groups[it->second].second.push_back(i);
  }
  return groups;
}

Series series_of(const std::string& name, const std::vector<std::size_t>& rows, const std::vector<double>& x,
                 const std::vector<double>& y) {
  Series s{name, {}, {}, false};
  for (std::size_t i : rows) {
    s.x.push_back(x[i]);
    s.y.push_back(y[i]);
  }
  return s;
}

/// Panels split by `panel_key`, one series per `series_key` value.
std::vector<Panel> grouped_panels(const csv::Table& t, const std::string& panel_key, const std::string& panel_prefix,
                                  const std::string& series_key, const std::string& x_name, const std::string& y_name) {
  const auto x = column(t, x_name);
  const auto y = column(t, y_name);
  const std::size_t sc = t.column(series_key);
  std::vector<Panel> panels;
  for (const auto& [pk, rows] : group_by(t, panel_key)) {
    Panel p{panel_prefix + pk, x_name, y_name, {}, false, 0.0, 0.0};
    std::vector<std::pair<std::string, std::vector<std::size_t>>> by_series;
    std::map<std::string, std::size_t> index;
    for (std::size_t i : rows) {
      auto [it, fresh] = index.emplace(t.rows[i][sc], by_series.size());
      if (fresh) by_series.push_back({t.rows[i][sc], {}});
      by_series[it->second].second.push_back(i);
    }
    for (const auto& [name, idx] : by_series) p.series.push_back(series_of(name, idx, x, y));
    panels.push_back(std::move(p));
  }
  return panels;
}

void render_plots(const std::string& experiment, const fs::path& dir) {
  if (experiment == "penalty-suite") {
    const csv::Table t = csv::read((dir / "penalty_suite.csv").string());
    const auto x = column(t, "penalty_bound");
    const auto y = column(t, "realized_gap");
    Panel p{"Realized gap vs improvement penalty", "penalty_bound", "realized_gap", {}, true, -1.0, 0.0};
    for (const auto& [name, rows] : group_by(t, "constraint")) {
      Series s = series_of(name, rows, x, y);
      s.markers = true;
      p.series.push_back(std::move(s));
    }
    replace_file(dir / "penalty_suite.svg", render_svg({p}));
  } else if (experiment == "bandit-regret") {
    const csv::Table t = csv::read((dir / "bandit_regret.csv").string());
    replace_file(dir / "bandit_regret.svg",
                 render_svg(grouped_panels(t, "n_samples", "N = ", "constraint", "beta_a2", "regret_diff")));
  } else if (experiment == "bandit-learn") {
    const csv::Table t = csv::read((dir / "bandit_learn.csv").string());
    replace_file(dir / "bandit_learn.svg",
                 render_svg(grouped_panels(t, "scenario", "", "constraint", "step", "mean_regret")));
  } else if (experiment == "train") {
    const csv::Table t = csv::read((dir / "train.csv").string());
    std::vector<std::size_t> all(t.rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto env_steps = column(t, "env_steps");
    const auto batches = column(t, "batches");
    std::vector<Panel> panels{
        {"Evaluation return", "env_steps", "eval_return", {series_of("eval_return", all, env_steps, column(t, "eval_return"))}, false, 0, 0},
        {"KL loss", "batches", "kl_loss", {series_of("kl_loss", all, batches, column(t, "kl_loss"))}, false, 0, 0},
        {"Q loss", "batches", "q_loss", {series_of("q_loss", all, batches, column(t, "q_loss"))}, false, 0, 0},
    };
    replace_file(dir / "train.svg", render_svg(panels));
  }
}

// ---------------------------------------------------------------- experiments

std::string solve_csv(const ProbVector& beta, const AdvantageVector& adv, const ProbVector& pi) {
  csv::Writer w({"action", "beta", "adv", "pi"});
  for (std::size_t a = 0; a < pi.size(); ++a) w.field(a).field(beta[a]).field(adv[a]).field(pi[a]).end_row();
  return w.str();
}

struct SolveResult {
  ProbVector pi;
  double step;
  double tv;
};

SolveResult run_solve(const SolveParams& p) {
  try {
    const ProbVector beta(p.beta);
    const AdvantageVector adv(p.adv);
    const ProbVector pi = solve(p.constraint, beta, adv);
    return {pi, improvement_step(pi, beta, adv), tv_distance(pi, beta)};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string solve_summary_csv(const SolveParams& p, const SolveResult& r) {
  csv::Writer w({"constraint", "improvement_step", "tv_distance"});
  w.field(label(p.constraint)).field(r.step).field(r.tv).end_row();
  return w.str();
}

/// Runs the experiment into `dir` and returns the names of the files written.
std::vector<std::string> execute(const ExperimentConfig& config, const fs::path& dir) {
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    files.push_back(name);
  };
  if (auto* p = std::get_if<SolveParams>(&config.params)) {
    const SolveResult r = run_solve(*p);
    emit("solve.csv", solve_csv(ProbVector(p->beta), AdvantageVector(p->adv), r.pi));
    emit("solve_summary.csv", solve_summary_csv(*p, r));
  } else if (auto* p = std::get_if<experiments::PenaltySuiteConfig>(&config.params)) {
    emit("penalty_suite.csv", experiments::penalty_csv(experiments::run_penalty_suite(*p, config.seed)));
  } else if (auto* p = std::get_if<experiments::BanditRegretConfig>(&config.params)) {
    emit("bandit_regret.csv", experiments::regret_csv(experiments::run_bandit_regret(*p)));
  } else if (auto* p = std::get_if<experiments::BanditLearnExperiment>(&config.params)) {
    emit("bandit_learn.csv", experiments::curve_csv(experiments::run_bandit_learn(*p, config.seed)));
  } else if (auto* p = std::get_if<TrainParams>(&config.params)) {
    harness::TrainingOptions opt;
    if (p->write_snapshots) opt.snapshot_dir = dir / "snapshots";
    const harness::TrainingReport report = harness::run_training(p->env, p->harness, config.seed, opt);
    emit("train.csv", experiments::train_csv(report));
    const double optimum = value_iteration(p->env.to_mdp(p->harness.gamma)).v[p->env.start()];
    csv::Writer w({"env_steps", "batches", "final_eval_return", "final_greedy_return", "optimal_return"});
    w.field(report.env_steps).field(report.batches).field(report.final_eval_return);
    w.field(report.final_greedy_return).field(optimum).end_row();
    emit("train_summary.csv", w.str());
  }
  if (config.plot && config.experiment != "solve") {
    render_plots(config.experiment, dir);
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".svg") files.push_back(e.path().filename().string());
    }
  }
  return files;
}

json manifest(const ExperimentConfig& config) {
  return {{"toolkit", "rbi"}, {"version", RBI_VERSION}, {"seed", config.seed}, {"config", to_json(config)}};
}

void publish(const fs::path& tmp, const fs::path& out) {
  if (fs::exists(out)) {
    fs::path old = out;
    old += ".old-" + std::to_string(::getpid());
    fs::rename(out, old);
    fs::rename(tmp, out);
    fs::remove_all(old);
  } else {
    fs::rename(tmp, out);
  }
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> output,
            std::optional<bool> plot) {
  json doc = load_json_file(path);
  if (doc.is_object() && doc.contains("toolkit") && doc.contains("config")) doc = doc.at("config");
  ExperimentConfig config = config_from_json(doc);
  if (seed) config.seed = *seed;
  if (output) config.output_dir = *output;
  if (plot) config.plot = *plot;

  const fs::path out = fs::absolute(config.output_dir).lexically_normal();
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  fs::path tmp = out.parent_path() / ("." + out.filename().string() + ".tmp-" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    write_file(tmp / "manifest.json", manifest(config).dump(2) + "\n");
    execute(config, tmp);
    throw_if_cancelled();
    publish(tmp, out);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  std::cout << "wrote " << out.string() << '\n';
  return 0;
}

int cmd_report(const std::string& dir) {
  const json m = load_json_file((fs::path(dir) / "manifest.json").string());
  if (!m.contains("config") || !m["config"].contains("experiment")) {
    throw ConfigError(dir + "/manifest.json: missing config.experiment");
  }
  const std::string experiment = m["config"]["experiment"].get<std::string>();
  if (experiment == "solve") {
    std::cout << "solve runs have no plots\n";
    return 0;
  }
  render_plots(experiment, dir);
  std::cout << "rendered plots in " << dir << '\n';
  return 0;
}

struct SolveFlags {
  std::string config;
  std::string beta;
  std::string adv;
  std::string reroute;
  std::optional<double> tv;
  std::optional<double> ppo;
  std::optional<double> kl;
  bool greedy = false;
  std::string output;
};

int cmd_solve(const SolveFlags& f) {
  SolveParams p;
  if (!f.config.empty()) {
    ExperimentConfig c = config_from_json(load_json_file(f.config));
    auto* sp = std::get_if<SolveParams>(&c.params);
    if (!sp) throw ConfigError(f.config + ": experiment is not 'solve'");
    p = *sp;
  }
  if (!f.beta.empty()) p.beta = parse_list(f.beta, "--beta");
  if (!f.adv.empty()) p.adv = parse_list(f.adv, "--adv");
  if (p.beta.empty() || p.adv.empty()) throw ConfigError("solve: --beta and --adv are required");
  try {
    if (!f.reroute.empty()) {
      const auto box = parse_list(f.reroute, "--reroute");
      if (box.size() != 2) throw ConfigError("--reroute: expected c_min,c_max");
      p.constraint = make_reroute(box[0], box[1]);
    }
    if (f.tv) p.constraint = make_tv(*f.tv);
    if (f.ppo) p.constraint = make_ppo(*f.ppo);
    if (f.kl) p.constraint = make_forward_kl(*f.kl);
    if (f.greedy) p.constraint = make_greedy();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const SolveResult r = run_solve(p);
  const std::string table = solve_csv(ProbVector(p.beta), AdvantageVector(p.adv), r.pi);
  const std::string summary = solve_summary_csv(p, r);
  if (!f.output.empty()) {
    fs::create_directories(f.output);
    replace_file(fs::path(f.output) / "solve.csv", table);
    replace_file(fs::path(f.output) / "solve_summary.csv", summary);
  }
  std::cout << "pi = ";
  for (std::size_t a = 0; a < r.pi.size(); ++a) std::cout << (a ? "," : "") << csv::format_double(r.pi[a]);
  std::cout << "\nimprovement_step = " << csv::format_double(r.step) << "\ntv_distance = " << csv::format_double(r.tv)
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_sigint);

  CLI::App app{"Rerouted behavior improvement toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RBI_VERSION);

  SolveFlags sf;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one improvement step and print pi");
  solve_cmd->add_option("--config", sf.config, "Config file with experiment 'solve'");
  solve_cmd->add_option("--beta", sf.beta, "Behavior probabilities, comma separated");
  solve_cmd->add_option("--adv", sf.adv, "Advantages centered under beta, comma separated");
  auto* g_reroute = solve_cmd->add_option("--reroute", sf.reroute, "Reroute box c_min,c_max");
  auto* g_tv = solve_cmd->add_option("--tv", sf.tv, "Total-variation radius");
  auto* g_ppo = solve_cmd->add_option("--ppo", sf.ppo, "PPO ratio epsilon");
  auto* g_kl = solve_cmd->add_option("--kl", sf.kl, "Forward-KL lambda");
  auto* g_greedy = solve_cmd->add_flag("--greedy", sf.greedy, "Greedy step");
  g_reroute->excludes(g_tv, g_ppo, g_kl, g_greedy);
  g_tv->excludes(g_ppo, g_kl, g_greedy);
  g_ppo->excludes(g_kl, g_greedy);
  g_kl->excludes(g_greedy);
  solve_cmd->add_option("--output", sf.output, "Also write solve.csv and solve_summary.csv here");

  std::string run_config;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_output;
  bool plot_on = false, plot_off = false;
  CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment from a JSON config");
  run_cmd->add_option("config", run_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run_seed, "Override the config seed");
  run_cmd->add_option("--output", run_output, "Override the output directory");
  auto* p_on = run_cmd->add_flag("--plot", plot_on, "Write SVG plots");
  run_cmd->add_flag("--no-plot", plot_off, "Skip SVG plots")->excludes(p_on);

  std::string report_dir;
  CLI::App* report_cmd = app.add_subcommand("report", "Re-render plots from the CSVs of an earlier run");
  report_cmd->add_option("dir", report_dir, "Output directory of a run")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*solve_cmd) return cmd_solve(sf);
    if (*run_cmd) {
      std::optional<bool> plot;
      if (plot_on) plot = true;
      if (plot_off) plot = false;
      return cmd_run(run_config, run_seed, run_output, plot);
    }
    if (*report_cmd) return cmd_report(report_dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Cancelled&) {
    std::cerr << "cancelled\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
