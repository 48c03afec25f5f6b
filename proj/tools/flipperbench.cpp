// flipperbench command-line tool. Exit codes: 0 ok, 2 usage/config, 3 data/coverage.

#include <pthread.h>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flipperbench/bench.hpp"
#include "flipperbench/bridge.hpp"
#include "flipperbench/config.hpp"
#include "flipperbench/error.hpp"

namespace fb = flipperbench;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::optional<std::string> config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool max_clearance_windows = false;
};

fb::BenchConfig load(const Globals& g, const std::optional<std::string>& arena) {
  const auto path = fb::resolve_config_path(g.config);
  fb::BenchConfig config = path ? fb::load_config(*path) : fb::BenchConfig{};
  if (arena) config.arena = fb::load_arena(*arena);
  if (g.seed) config.seed = *g.seed;
  if (g.max_clearance_windows) config.scoring.max_clearance_windows = true;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flipper control benchmark: simulate, score and graph operator load vs traversal quality."};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "TOML config (default: $FLIPPERBENCH_CONFIG)");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Random seed for the scripted operator");
  app.add_flag("--max-clearance-windows", g.max_clearance_windows, "Use the window maximum for clearance too");

  auto* run = app.add_subcommand("run", "Run policies over the arena with the scripted operator");
  std::vector<std::string> policies;
  std::optional<std::string> run_arena;
  run->add_option("--policy", policies, "Policy name (repeatable; default: every configured method)");
  run->add_option("--arena", run_arena, "Arena TOML, replaces the configured arena");

  auto* calibrate = app.add_subcommand("calibrate", "Derive CL_min and s_max from logs");
  std::optional<std::string> cal_logs, cal_output;
  calibrate->add_option("--logs", cal_logs, "Log directory (default: --out)");
  calibrate->add_option("--output", cal_output, "Calibration file (default: <out>/calibration.toml)");

  auto* score = app.add_subcommand("score", "Score logs into per-obstacle and per-method tables");
  std::optional<std::string> score_logs, score_cal;
  score->add_option("--logs", score_logs, "Log directory (default: --out)");
  score->add_option("--calibration", score_cal, "Calibration file (default: <out>/calibration.toml)");

  auto* graph = app.add_subcommand("graph", "Quality-load scatter from scores.csv");
  std::optional<std::string> graph_scores;
  graph->add_option("--scores", graph_scores, "scores.csv (default: <out>/scores.csv)");

  auto* serve = app.add_subcommand("serve", "Serve a teleoperation session over WebSocket at /session");
  std::optional<int> port;
  std::optional<std::string> serve_arena, serve_policy, host;
  std::optional<double> time_scale;
  serve->add_option("--port", port, "TCP port (0 picks a free one)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--arena", serve_arena, "Arena TOML");
  serve->add_option("--policy", serve_policy, "Default method for sessions");
  serve->add_option("--time-scale", time_scale, "Simulated seconds per wall second");

  auto* replay = app.add_subcommand("replay", "Drive a recorded log's commands through the simulator again");
  std::string replay_log;
  std::optional<std::string> replay_cal, replay_output;
  replay->add_option("log", replay_log, "Episode log (.jsonl)")->required();
  replay->add_option("--calibration", replay_cal, "Calibration file; re-scores when given");
  replay->add_option("--output", replay_output, "Write the replayed log here");

  auto* import = app.add_subcommand("import", "Build an episode log from externally recorded CSV streams");
  std::string imp_commands, imp_trajectory, imp_mapping, imp_output;
  std::optional<std::string> imp_arena;
  import->add_option("--commands", imp_commands, "Operator command CSV")->required();
  import->add_option("--trajectory", imp_trajectory, "Robot trajectory CSV")->required();
  import->add_option("--mapping", imp_mapping, "Column mapping TOML")->required();
  import->add_option("--arena", imp_arena, "Arena TOML the run took place in");
  import->add_option("--output", imp_output, "Log to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const fs::path out = g.out;
  try {
    if (run->parsed()) {
      const auto config = load(g, run_arena);
      const auto& names = policies.empty() ? config.methods : policies;
      for (const auto& name : names) fb::cmd_run(config, name, out, std::cout);
    } else if (calibrate->parsed()) {
      load(g, std::nullopt);  // config errors still surface
      fb::cmd_calibrate(cal_logs.value_or(out.string()), cal_output.value_or((out / "calibration.toml").string()),
                        std::cout);
    } else if (score->parsed()) {
      const auto config = load(g, std::nullopt);
      fb::cmd_score(score_logs.value_or(out.string()), score_cal.value_or((out / "calibration.toml").string()), out,
                    config.scoring, std::cout);
    } else if (graph->parsed()) {
      load(g, std::nullopt);
      fb::cmd_graph(graph_scores.value_or((out / "scores.csv").string()), out / "quality_load.svg",
                    out / "quality_load.csv", std::cout);
    } else if (serve->parsed()) {
      auto config = load(g, serve_arena);
      if (port) config.bridge.port = *port;
      if (host) config.bridge.host = *host;
      if (time_scale) config.bridge.time_scale = *time_scale;
      if (serve_policy) config.bridge.method = *serve_policy;
      config.validate();
      // Server threads inherit the blocked mask; the main thread waits for the signal.
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      fb::BridgeServer server(config, out);
      const auto bound = server.listen(config.bridge.host, static_cast<unsigned short>(config.bridge.port));
      std::cout << "serving ws://" << config.bridge.host << ":" << bound << "/session, logs in " << out.string()
                << std::endl;
      server.start();
      int sig = 0;
      sigwait(&signals, &sig);
      server.stop();
    } else if (replay->parsed()) {
      const auto config = load(g, std::nullopt);
      std::optional<fs::path> cal, outlog;
      if (replay_cal) cal = *replay_cal;
      if (replay_output) outlog = *replay_output;
      const auto result = fb::cmd_replay(config, replay_log, cal, outlog, std::cout);
      if (!result.reproduced) return 3;
    } else if (import->parsed()) {
      const auto config = load(g, imp_arena);
      const auto mapping = fb::load_import_mapping(imp_mapping);
      std::ifstream commands(imp_commands), trajectory(imp_trajectory);
      if (!commands) throw fb::ConfigError("cannot read " + imp_commands);
      if (!trajectory) throw fb::ConfigError("cannot read " + imp_trajectory);
      const auto log = fb::import_external(commands, trajectory, mapping, config.arena, config.geometry);
      fb::write_log(log, fs::path(imp_output));
      std::cout << "imported " << log.ticks.size() << " ticks, status " << fb::to_string(log.footer.status)
                << " -> " << imp_output << "\n";
    }
  } catch (const fb::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fb::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
