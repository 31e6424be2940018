// Experiment runner and world debugger.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ae/env/repl.hpp"
#include "ae/harness/experiment.hpp"
#include "ae/harness/plot.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::string seeds;
  std::string out;
  std::string variant;
  std::uint64_t steps = 0;
  std::size_t trials = 0;
};

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  // "a,b,c" is an explicit list; a lone number n means seeds 1..n.
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ae::ConfigError("--seeds: '" + item + "' is not a nonnegative integer");
    }
  }
  if (out.empty()) throw ae::ConfigError("--seeds: empty list");
  if (out.size() == 1 && s.find(',') == std::string::npos) {
    const auto n = out.front();
    if (n == 0) throw ae::ConfigError("--seeds: need at least one seed");
    out.clear();
    for (std::uint64_t i = 1; i <= n; ++i) out.push_back(i);
  }
  return out;
}

int run(ae::ExperimentKind kind, const RunFlags& f) {
  ae::ExperimentConfig cfg = f.config.empty() ? ae::ExperimentConfig{} : ae::load_experiment(f.config);
  if (f.config.empty()) cfg.kind = kind;
  if (cfg.kind != kind)
    throw ae::ConfigError("kind: config describes '" + std::string(ae::to_string(cfg.kind)) + "' but the subcommand runs '" +
                          ae::to_string(kind) + "'");
  if (!f.seeds.empty()) cfg.seeds = parse_seeds(f.seeds);
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.variant.empty()) {
    const auto v = ae::parse_variant(f.variant);
    if (!v) throw ae::ConfigError("--variant: expected vanilla, ae or oracle-elim");
    cfg.variant = *v;
  }
  if (f.steps) {
    switch (kind) {
      case ae::ExperimentKind::GridworldTabular: cfg.episodes = f.steps; break;
      case ae::ExperimentKind::MinizorkDqn: cfg.agent.total_steps = f.steps; break;
      case ae::ExperimentKind::BanditSim: cfg.bandit.steps = f.steps; break;
    }
  }
  if (f.trials) cfg.trials = f.trials;
  const auto out = ae::run_experiment(cfg);
  std::cout << out.summary;
  for (const auto& p : out.files) std::cout << "wrote " << p << '\n';
  return 0;
}

int plot(const std::vector<std::string>& runs, const std::string& out_dir, std::size_t window, const std::string& metric_name) {
  namespace fs = std::filesystem;
  std::vector<ae::SmoothedSeries> series;
  std::string xlabel = "episode", ylabel = "return";
  for (const auto& run : runs) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(run)) {
      const auto name = e.path().filename().string();
      if (name.starts_with("seed_") && name.ends_with(".csv")) files.push_back(e.path().string());
    }
    if (files.empty()) throw ae::Error(run + ": no seed_*.csv files");
    std::sort(files.begin(), files.end());
    std::vector<std::vector<ae::EpisodeRecord>> per_seed;
    for (const auto& p : files) per_seed.push_back(ae::read_csv(p));
    ae::Metric metric = ae::Metric::TrainReturn;
    if (metric_name == "eval") {
      metric = ae::Metric::EvalReturn;
    } else if (metric_name == "auto") {
      const bool any_eval = !per_seed.front().empty() && per_seed.front().front().eval_return.has_value();
      metric = any_eval ? ae::Metric::EvalReturn : ae::Metric::TrainReturn;
    } else if (metric_name != "train") {
      throw ae::ConfigError("--metric: expected train, eval or auto");
    }
    if (metric == ae::Metric::EvalReturn) {
      xlabel = "step";
      ylabel = "eval return";
    }
    std::string label = fs::path(run).filename().string();
    if (label.empty()) label = fs::path(run).parent_path().filename().string();
    series.push_back(ae::smooth(ae::make_series(label, per_seed, metric), window));
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ae::Error("cannot create " + out_dir + ": " + ec.message());
  const auto svg = (fs::path(out_dir) / "plot.svg").string();
  const auto csv = (fs::path(out_dir) / "smoothed.csv").string();
  std::ofstream(svg, std::ios::binary) << ae::render_svg(series, "moving average " + std::to_string(window) + ", band = std/3", xlabel, ylabel);
  std::ofstream(csv, std::ios::binary) << ae::smoothed_csv(series);
  std::cout << "wrote " << svg << "\nwrote " << csv << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Action-elimination experiments: grid world, text adventure and bandit checks"};
  app.require_subcommand(1);

  RunFlags grid_f, zork_f, bandit_f;
  auto add_run_flags = [](CLI::App* sub, RunFlags& f) {
    sub->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seeds", f.seeds, "comma-separated seeds, or a count n for seeds 1..n");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--variant", f.variant, "vanilla | ae | oracle-elim");
    sub->add_option("--steps", f.steps, "run length (episodes for gridworld, env steps for minizork, steps per trial for bandit-sim)");
  };
  auto* grid = app.add_subcommand("gridworld", "tabular Q-learning on the K-category grid world");
  add_run_flags(grid, grid_f);
  auto* zork = app.add_subcommand("minizork", "DQN / AE-DQN on a text-adventure world");
  add_run_flags(zork, zork_f);
  auto* bandit = app.add_subcommand("bandit-sim", "Monte-Carlo check of the elimination confidence bounds");
  add_run_flags(bandit, bandit_f);
  bandit->add_option("--trials", bandit_f.trials, "number of trials");

  std::vector<std::string> plot_runs;
  std::string plot_out = "plot";
  std::size_t plot_window = 200;
  std::string plot_metric = "auto";
  auto* plt = app.add_subcommand("plot", "smooth per-seed CSVs and draw an SVG");
  plt->add_option("runs", plot_runs, "run directories (one curve each)")->required()->check(CLI::ExistingDirectory);
  plt->add_option("--out", plot_out, "output directory");
  plt->add_option("--window", plot_window, "moving-average window")->check(CLI::PositiveNumber);
  plt->add_option("--metric", plot_metric, "train | eval | auto");

  std::string play_world = "egg";
  std::uint64_t play_seed = 0;
  bool play_hazards = false;
  auto* play = app.add_subcommand("play", "interactive prompt for a world file");
  play->add_option("--world", play_world, "bundled world name or path");
  play->add_option("--seed", play_seed, "hazard RNG seed");
  play->add_flag("--hazards", play_hazards, "enable random room hazards");

  CLI11_PARSE(app, argc, argv);

  try {
    if (grid->parsed()) return run(ae::ExperimentKind::GridworldTabular, grid_f);
    if (zork->parsed()) return run(ae::ExperimentKind::MinizorkDqn, zork_f);
    if (bandit->parsed()) return run(ae::ExperimentKind::BanditSim, bandit_f);
    if (plt->parsed()) return plot(plot_runs, plot_out, plot_window, plot_metric);
    if (play->parsed()) {
      const ae::zork::Game game(ae::zork::load_world(ae::resolve_world_path(play_world)));
      ae::zork::run_repl(game, std::cin, std::cout, play_seed, play_hazards);
      return 0;
    }
  } catch (const ae::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
