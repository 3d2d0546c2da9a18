// mirroreyes: serve, simulate, replay, analyze, render.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

#include "mirroreyes/render_job.hpp"
#include "mirroreyes/report.hpp"
#include "mirroreyes/server.hpp"
#include "mirroreyes/simulation.hpp"

using namespace mirroreyes;

namespace {

int cmd_serve(const std::string& config_path, std::uint16_t port, const std::string& address,
              const std::string& log_path, std::int64_t auto_cue_ms, bool synthetic) {
  SessionConfig config = config_path.empty() ? SessionConfig{} : load_session_config(config_path);
  ServerOptions options;
  options.address = address;
  options.port = port;
  options.log_path = log_path;
  options.session.auto_cue_ms = auto_cue_ms;
  options.session.synthetic_scene = synthetic;
  SessionServer server(std::move(config), options);
  std::cerr << "listening on ws://" << address << ":" << server.port() << "\n";
  server.run(true);
  return 0;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  const SimulationSetup setup = config_path.empty()
                                    ? SimulationSetup::defaults(SessionConfig{})
                                    : load_simulation_setup(config_path);
  std::ofstream log(out);
  if (!log) throw std::runtime_error("cannot write " + out);
  const auto start = std::chrono::steady_clock::now();
  const SimulationSummary s = simulate(setup, seed, log);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "trials " << s.trials << ", mistake trials " << s.mistake_trials << ", records "
            << s.records << ", virtual " << s.virtual_end_ms / 1000.0 << " s, wall " << wall
            << " s\n";
  return 0;
}

ParsedLog open_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_trial_log(in);
}

int cmd_replay(const std::string& in) {
  const ReplayReport r = replay(open_log(in));
  std::cout << "events " << r.events << ", records checked " << r.records_checked << "\n";
  if (r.divergence) {
    const auto& d = *r.divergence;
    std::cout << "divergence at event line " << d.event_line << " (record line "
              << d.record_line << ")\n  expected: " << d.expected << "\n  logged:   " << d.actual
              << "\n";
    return 1;
  }
  if (r.truncated) {
    std::cout << "partial replay: log ends before the session finished\n";
  } else {
    std::cout << "replay ok\n";
  }
  return 0;
}

int cmd_analyze(const std::string& in, const std::string& ueq, const std::string& out,
                const std::string& posthoc, const std::string& key) {
  AnalysisOptions options;
  options.posthoc = parse_posthoc_method(posthoc);
  options.ueq_key = parse_ueq_key(key);
  std::vector<UeqResponse> responses;
  if (!ueq.empty()) {
    std::ifstream q(ueq);
    if (!q) throw std::runtime_error("cannot open " + ueq);
    try {
      responses = read_ueq_csv(q);
    } catch (const std::exception& e) {
      throw std::runtime_error(ueq + ": " + e.what());
    }
  }
  ParsedLog log;
  try {
    log = open_log(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(in + ": " + e.what());
  }
  const AnalysisResult result = analyze(log, responses, options);
  write_analysis(result, out);
  std::ifstream report(std::filesystem::path(out) / "report.txt");
  std::cout << report.rdbuf();
  return 0;
}

int cmd_render(const std::string& spec, const std::string& out) {
  const RenderJob job = load_render_job(spec);
  for (const auto& f : run_render_job(job, out)) std::cout << f.path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mirror-eyes gaze display engine and experiment lab"};
  app.require_subcommand(1);

  std::string config, out, in, ueq, address = "127.0.0.1", log_path;
  std::string posthoc = "tukey", key = "standard";
  std::uint16_t port = 8765;
  std::uint64_t seed = 1;
  std::int64_t auto_cue_ms = 0;
  bool synthetic = false;

  auto* serve = app.add_subcommand("serve", "Run a live session over WebSocket");
  serve->add_option("--config", config, "Session config (JSON)")->check(CLI::ExistingFile);
  serve->add_option("--port", port, "Listen port, 0 for any")->capture_default_str();
  serve->add_option("--address", address, "Listen address")->capture_default_str();
  serve->add_option("--log", log_path, "Trial log output");
  serve->add_option("--auto-cue-ms", auto_cue_ms, "Cue automatically after this delay");
  serve->add_flag("--synthetic-scene", synthetic, "Track the configured standing group");

  auto* sim = app.add_subcommand("simulate", "Run a bot session on a virtual clock");
  sim->add_option("--config", config, "Session and bot config (JSON)")->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "Seed")->capture_default_str();
  sim->add_option("--out", out, "Trial log output")->required();

  auto* rep = app.add_subcommand("replay", "Re-drive the engine from a log and compare");
  rep->add_option("--in", in, "Trial log")->required()->check(CLI::ExistingFile);

  auto* ana = app.add_subcommand("analyze", "Accuracy, RT, ANOVA and UEQ tables");
  ana->add_option("--in", in, "Trial log")->required()->check(CLI::ExistingFile);
  ana->add_option("--ueq", ueq, "Questionnaire CSV")->check(CLI::ExistingFile);
  ana->add_option("--out", out, "Output directory")->required();
  ana->add_option("--posthoc", posthoc, "tukey or bonferroni")->capture_default_str();
  ana->add_option("--ueq-key", key, "standard or as_printed")->capture_default_str();

  auto* ren = app.add_subcommand("render", "Render eye PNGs from a job file");
  ren->add_option("--spec", config, "Render job (JSON)")->required()->check(CLI::ExistingFile);
  ren->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return cmd_serve(config, port, address, log_path, auto_cue_ms, synthetic);
    if (*sim) return cmd_simulate(config, seed, out);
    if (*rep) return cmd_replay(in);
    if (*ana) return cmd_analyze(in, ueq, out, posthoc, key);
    if (*ren) return cmd_render(config, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
