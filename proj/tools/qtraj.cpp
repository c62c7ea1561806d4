// qtraj: quantum trajectory simulations, commutativity checks and SLH composition.
//
// Exit codes: 0 success, 1 usage/config/IO error, 2 negative verdict,
// 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qfilter/commute.hpp"
#include "qfilter/ensemble.hpp"
#include "qfilter/errors.hpp"
#include "qfilter/io.hpp"
#include "qfilter/network.hpp"

namespace fs = std::filesystem;
using namespace qfilter;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNegative = 2;
constexpr int kExitNumerical = 3;

int resolve_threads(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--threads must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("QTRAJ_THREADS"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (used == std::string(env).size() && n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("QTRAJ_THREADS must be a positive integer, got '") + env + "'");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

ensemble::SimulationConfig load_config(const std::string& path,
                                       const std::vector<std::string>& overrides) {
  io::json j = io::load_json_file(path);
  io::apply_overrides(j, overrides);
  return io::config_from_json(j);
}

fs::path prepare_output_dir(const std::string& dir) {
  const fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  return out;
}

struct SimulateArgs {
  std::string config;
  std::string output = ".";
  std::vector<std::string> overrides;
  std::optional<int> threads;
  bool emit_records = false;
};

int simulate(const SimulateArgs& args) {
  const auto config = load_config(args.config, args.overrides);
  const fs::path out = prepare_output_dir(args.output);

  ensemble::EnsembleSummary summary;
  if (config.mode == ensemble::RunMode::filter_from_records) {
    const auto records = io::read_records_csv(config.records_path);
    const auto traj = ensemble::filter_records(config, records);
    summary.config = config;
    summary.times = traj.times;
    summary.mean_number = traj.mean_number;
    summary.stderr_number.assign(traj.times.size(), 0.0);
    for (const double t : traj.times) {
      summary.analytic_number.push_back(ensemble::analytic_mean_number(config.n0, config.gamma, t));
    }
    summary.jump_histogram[traj.jumps] = 1;
    summary.total_jumps = traj.jumps;
    summary.coarse_steps = traj.coarse_steps;
    summary.leakage_max = traj.leakage_max;
  } else {
    summary = ensemble::run_ensemble(config, {resolve_threads(args.threads), false});
    if (args.emit_records) {
      const auto traj = ensemble::run_trajectory(config, 0, {false, true});
      io::write_text(out / "records.csv", io::records_csv(config, traj.records));
    }
  }

  const std::string csv = io::ensemble_csv(summary);
  io::write_text(out / "ensemble.csv", csv);
  io::write_text(out / "metadata.json", io::ensemble_metadata(summary, csv).dump(2) + "\n");
  if (summary.leakage_max > hilbert::kLeakageWarning) {
    std::cerr << "warning: top Fock level population reached " << summary.leakage_max
              << "; consider increasing dim\n";
  }
  std::cout << "wrote " << (out / "ensemble.csv").string() << " and "
            << (out / "metadata.json").string() << "\n";
  return kExitOk;
}

int compare_kuramochi(const SimulateArgs& args) {
  const auto config = load_config(args.config, args.overrides);
  const fs::path out = prepare_output_dir(args.output);
  const auto report = ensemble::compare_filters(config, {resolve_threads(args.threads), false});
  const std::string csv = io::comparison_csv(report);
  io::write_text(out / "comparison.csv", csv);
  io::write_text(out / "metadata.json", io::comparison_metadata(report, csv).dump(2) + "\n");
  std::cout << "max |z| corrected " << report.max_abs_z_corrected << ", kuramochi "
            << report.max_abs_z_kuramochi << "\n";
  return kExitOk;
}

int check_commute(const std::string& path, int oracle_trials) {
  const io::json input = io::load_json_file(path);
  const auto spec = io::measurement_from_json(input);
  const auto report = commute::check_self_commutative(spec);
  io::json j = io::report_to_json(report);
  j["config"] = input;
  if (oracle_trials > 0) {
    const std::uint64_t seed = input.value("seed", std::uint64_t{20141101});
    Rng rng = stream_for(seed, 0);
    commute::cross_validate(spec, oracle_trials, rng);
    j["oracle_trials"] = oracle_trials;
    j["oracle_agrees"] = true;
  }
  std::cout << j.dump(2) << "\n";
  return report.commutative ? kExitOk : kExitNegative;
}

int slh_compose(const std::string& path) {
  const io::json input = io::load_json_file(path);
  io::json j = io::slh_to_json(io::compose_from_json(input));
  j["config"] = input;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum trajectory filtering for joint homodyne and counting measurements"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a trajectory ensemble or filter a record");
  simulate_cmd->add_option("config", sim.config, "Simulation config JSON")->required();
  simulate_cmd->add_option("-o,--output", sim.output, "Output directory");
  simulate_cmd->add_option("--set", sim.overrides, "Config override key=value (repeatable)");
  simulate_cmd->add_option("--threads", sim.threads, "Worker threads (fallback: QTRAJ_THREADS)");
  simulate_cmd->add_flag("--emit-records", sim.emit_records, "Also write the record of trajectory 0");

  SimulateArgs cmp;
  auto* compare_cmd =
      app.add_subcommand("compare-kuramochi", "Compare the corrected and earlier filters");
  compare_cmd->add_option("config", cmp.config, "Simulation config JSON")->required();
  compare_cmd->add_option("-o,--output", cmp.output, "Output directory");
  compare_cmd->add_option("--set", cmp.overrides, "Config override key=value (repeatable)");
  compare_cmd->add_option("--threads", cmp.threads, "Worker threads (fallback: QTRAJ_THREADS)");

  std::string commute_path;
  int oracle_trials = 0;
  auto* commute_cmd =
      app.add_subcommand("check-commute", "Decide self-commutativity of a measurement (F, G)");
  commute_cmd->add_option("config", commute_path, "JSON with F and G")->required();
  commute_cmd->add_option("--oracle", oracle_trials, "Cross-check against the Itô table N times")
      ->check(CLI::NonNegativeNumber);

  std::string compose_path;
  auto* compose_cmd = app.add_subcommand("slh-compose", "Evaluate a series/concatenation tree");
  compose_cmd->add_option("config", compose_path, "JSON with components and expression")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (simulate_cmd->parsed()) return simulate(sim);
    if (compare_cmd->parsed()) return compare_kuramochi(cmp);
    if (commute_cmd->parsed()) return check_commute(commute_path, oracle_trials);
    if (compose_cmd->parsed()) return slh_compose(compose_path);
  } catch (const IntegrationDiverged& e) {
    std::cerr << "error: integration diverged: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
