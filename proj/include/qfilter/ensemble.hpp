#pragma once

// Monte-Carlo trajectory ensembles for a decaying cavity, L = sqrt(gamma) a,
// H = 0, started in a Fock state, plus the analytic and Lindblad oracles the
// ensembles are compared against.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qfilter/filter.hpp"

namespace qfilter::ensemble {

enum class FilterKind { corrected, kuramochi, sme };
enum class RunMode { simulate, filter_from_records };

std::string to_string(FilterKind kind);
std::string to_string(RunMode mode);
FilterKind parse_filter_kind(const std::string& s);
RunMode parse_run_mode(const std::string& s);

/// Minimum number of Fock levels kept above the initial level.
inline constexpr int kTruncationMargin = 2;

struct SimulationConfig {
  int dim = 8;
  int n0 = 5;
  double gamma = 1.0;
  double r2 = 0.5;
  double theta = 0.0;
  double dt = 1e-3;
  double t_final = 5.0;
  int n_traj = 100;
  std::uint64_t seed = 20141101;
  FilterKind filter_kind = FilterKind::corrected;
  RunMode mode = RunMode::simulate;
  std::string records_path;  ///< CSV (t, dY1, dN) for filter-from-records
  int output_points = 500;
};

/// Throws ConfigError when a field is out of range or the truncation margin
/// (n0 < dim - kTruncationMargin) is violated.
void validate(const SimulationConfig& config);

int step_count(const SimulationConfig& config);
/// Step indices at which output is recorded: 0, stride, 2 stride, ..., last.
std::vector<int> output_steps(int n_steps, int output_points);

filter::FilterSetup make_setup(const SimulationConfig& config);

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::size_t index = 0;
  std::vector<double> times;
  std::vector<double> mean_number;                ///< <N> at each output time
  std::vector<Eigen::VectorXd> populations;       ///< Fock populations at each output time
  std::vector<DensityOperator> states;            ///< only when requested
  std::vector<filter::StepRecord> records;        ///< only when requested
  int jumps = 0;
  int coarse_steps = 0;
  double leakage_max = 0.0;
};

struct TrajectoryOptions {
  bool keep_states = false;
  bool keep_records = false;
};

/// Trajectory `index` of the configured ensemble, started in Fock |n0>.
/// Deterministic in (config.seed, index).
TrajectoryRecord run_trajectory(const SimulationConfig& config, std::size_t index,
                                const TrajectoryOptions& opts = {});

/// Filters an externally supplied measurement record with the configured filter.
TrajectoryRecord filter_records(const SimulationConfig& config,
                                const std::vector<filter::Record>& records,
                                const TrajectoryOptions& opts = {});

struct RunOptions {
  int threads = 1;
  bool keep_states = false;  ///< accumulate the mean density operator per output time
};

struct EnsembleSummary {
  SimulationConfig config;
  std::vector<double> times;
  std::vector<double> mean_number;
  std::vector<double> stderr_number;  ///< sample std / sqrt(n_traj); zero for n_traj = 1
  std::vector<double> analytic_number;
  std::vector<Eigen::VectorXd> mean_populations;
  std::vector<DensityOperator> mean_states;  ///< filled when RunOptions::keep_states
  std::map<int, int> jump_histogram;         ///< jumps per trajectory -> trajectory count
  long total_jumps = 0;
  long coarse_steps = 0;
  double leakage_max = 0.0;
};

EnsembleSummary run_ensemble(const SimulationConfig& config, const RunOptions& opts = {});

/// Index of the output time closest to t.
std::size_t nearest_time_index(const std::vector<double>& times, double t);

/// Binomial decay law C(n0, N) s^N (1 - s)^(n0 - N), s = e^{-gamma t}.
double analytic_number_distribution(int n0, double gamma, double t, int N);
double analytic_mean_number(int n0, double gamma, double t);

/// Deterministic RK4 integration of the Lindblad equation with step dt,
/// sampled at the requested times (which must be non-decreasing).
std::vector<DensityOperator> lindblad_solution(const filter::FilterSetup& setup,
                                               const DensityOperator& rho0, double dt,
                                               const std::vector<double>& times);

/// 0.5 sum_N |p_N - q_N|, shorter vector padded with zeros.
double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// Times at which ensemble means are checked against the decay law.
inline constexpr std::array<double, 4> kEvaluationTimes{0.5, 1.0, 2.0, 4.0};

struct ComparisonReport {
  SimulationConfig config;
  std::vector<double> times;
  std::vector<double> mean_corrected;
  std::vector<double> stderr_corrected;
  std::vector<double> mean_kuramochi;
  std::vector<double> stderr_kuramochi;
  std::vector<double> analytic;
  std::vector<double> z_corrected;
  std::vector<double> z_kuramochi;
  /// Grid times the bias verdict is taken at (kEvaluationTimes within t_final).
  std::vector<double> evaluation_times;
  /// Max |z| over the evaluation times. Between them z is reported but not
  /// summarized: at very early times only a handful of trajectories have
  /// jumped and the normal approximation behind z does not hold.
  double max_abs_z_corrected = 0.0;
  double max_abs_z_kuramochi = 0.0;
  std::string kuramochi_jump_rate_rule;
};

/// (mean - analytic) / stderr; 0 when both the difference and stderr vanish,
/// +-infinity when only stderr vanishes.
double z_score(double mean, double stderr_value, double analytic);

/// Runs the corrected and earlier SSE filters on identical per-trajectory
/// noise streams. Requires n_traj >= 2.
ComparisonReport compare_filters(const SimulationConfig& config, const RunOptions& opts = {});

}  // namespace qfilter::ensemble
