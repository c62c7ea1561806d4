#include "qfilter/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "qfilter/errors.hpp"

namespace qfilter::ensemble {

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::corrected:
      return "corrected";
    case FilterKind::kuramochi:
      return "kuramochi";
    case FilterKind::sme:
      return "sme";
  }
  return "unknown";
}

std::string to_string(RunMode mode) {
  return mode == RunMode::simulate ? "simulate" : "filter-from-records";
}

FilterKind parse_filter_kind(const std::string& s) {
  if (s == "corrected") return FilterKind::corrected;
  if (s == "kuramochi") return FilterKind::kuramochi;
  if (s == "sme") return FilterKind::sme;
  throw ConfigError("unknown filter_kind '" + s + "' (expected corrected, kuramochi or sme)");
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "simulate") return RunMode::simulate;
  if (s == "filter-from-records") return RunMode::filter_from_records;
  throw ConfigError("unknown mode '" + s + "' (expected simulate or filter-from-records)");
}

void validate(const SimulationConfig& c) {
  if (c.dim < 2) throw ConfigError("dim must be >= 2");
  if (c.n0 < 0) throw ConfigError("n0 must be >= 0");
  if (c.n0 >= c.dim - kTruncationMargin) {
    throw ConfigError("truncation margin violated: n0 = " + std::to_string(c.n0) +
                      " must be < dim - " + std::to_string(kTruncationMargin) + " = " +
                      std::to_string(c.dim - kTruncationMargin) + "; increase dim");
  }
  if (!(c.gamma >= 0.0) || !std::isfinite(c.gamma)) throw ConfigError("gamma must be >= 0");
  if (!(c.r2 >= 0.0 && c.r2 <= 1.0)) throw ConfigError("r2 must lie in [0, 1]");
  if (!std::isfinite(c.theta)) throw ConfigError("theta must be finite");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ConfigError("dt must be > 0");
  if (!(c.t_final >= c.dt) || !std::isfinite(c.t_final)) throw ConfigError("t_final must be >= dt");
  if (c.n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (c.output_points < 1) throw ConfigError("output_points must be >= 1");
}

int step_count(const SimulationConfig& config) {
  return static_cast<int>(std::llround(config.t_final / config.dt));
}

std::vector<int> output_steps(int n_steps, int output_points) {
  const int stride = std::max(1, n_steps / std::max(1, output_points));
  std::vector<int> steps;
  for (int k = 0; k <= n_steps; k += stride) steps.push_back(k);
  if (steps.back() != n_steps) steps.push_back(n_steps);
  return steps;
}

filter::FilterSetup make_setup(const SimulationConfig& config) {
  const Operator L = std::sqrt(config.gamma) * hilbert::annihilation(config.dim);
  const Operator H = Operator::Zero(config.dim, config.dim);
  return filter::FilterSetup(L, H, std::sqrt(config.r2), config.theta);
}

namespace {

// Owns the evolving state of one trajectory for any filter kind.
class Propagator {
 public:
  Propagator(const SimulationConfig& config, const filter::FilterSetup& setup)
      : kind_(config.filter_kind), setup_(setup), dt_(config.dt) {
    const StateVector fock = hilbert::fock_state(config.dim, config.n0);
    if (kind_ == FilterKind::sme) {
      rho_ = hilbert::pure_density(fock);
    } else {
      psi_ = fock;
    }
  }

  filter::StepRecord step(const filter::StepInput& input) {
    switch (kind_) {
      case FilterKind::corrected: {
        auto s = filter::sse_step(psi_, setup_, dt_, input);
        psi_ = std::move(s.psi);
        return s.record;
      }
      case FilterKind::kuramochi: {
        auto s = filter::sse_step_kuramochi(psi_, setup_, dt_, input);
        psi_ = std::move(s.psi);
        return s.record;
      }
      case FilterKind::sme: {
        auto s = filter::sme_step(rho_, setup_, dt_, input);
        rho_ = std::move(s.rho);
        return s.record;
      }
    }
    throw ConfigError("unknown filter kind");
  }

  Eigen::VectorXd populations() const {
    if (kind_ == FilterKind::sme) return rho_.diagonal().real();
    return psi_.cwiseAbs2();
  }

  DensityOperator density() const {
    return kind_ == FilterKind::sme ? rho_ : hilbert::pure_density(psi_);
  }

 private:
  FilterKind kind_;
  const filter::FilterSetup& setup_;
  double dt_;
  StateVector psi_;
  DensityOperator rho_;
};

struct Driver {
  const SimulationConfig& config;
  const TrajectoryOptions& opts;
  TrajectoryRecord rec;
  std::vector<int> outputs;
  std::size_t next_output = 0;

  void observe(const Propagator& prop, int step) {
    if (next_output >= outputs.size() || outputs[next_output] != step) return;
    ++next_output;
    const Eigen::VectorXd pops = prop.populations();
    double n_mean = 0.0;
    for (Eigen::Index k = 0; k < pops.size(); ++k) n_mean += static_cast<double>(k) * pops(k);
    rec.times.push_back(step * config.dt);
    rec.mean_number.push_back(n_mean);
    rec.populations.push_back(pops);
    rec.leakage_max = std::max(rec.leakage_max, pops(pops.size() - 1));
    if (opts.keep_states) rec.states.push_back(prop.density());
  }

  void account(const filter::StepRecord& r) {
    rec.jumps += r.dN;
    rec.coarse_steps += r.coarse ? 1 : 0;
    if (opts.keep_records) rec.records.push_back(r);
  }
};

}  // namespace

TrajectoryRecord run_trajectory(const SimulationConfig& config, std::size_t index,
                                const TrajectoryOptions& opts) {
  validate(config);
  const filter::FilterSetup setup = make_setup(config);
  const int n_steps = step_count(config);

  Driver driver{config, opts, {}, output_steps(n_steps, config.output_points)};
  driver.rec.seed = config.seed;
  driver.rec.index = index;
  if (opts.keep_records) driver.rec.records.reserve(n_steps);

  Propagator prop(config, setup);
  filter::NoiseSource noise(stream_for(config.seed, index));
  driver.observe(prop, 0);
  for (int k = 1; k <= n_steps; ++k) {
    driver.account(prop.step(filter::StepInput{noise.next()}));
    driver.observe(prop, k);
  }
  return std::move(driver.rec);
}

TrajectoryRecord filter_records(const SimulationConfig& config,
                                const std::vector<filter::Record>& records,
                                const TrajectoryOptions& opts) {
  validate(config);
  if (records.empty()) throw ConfigError("measurement record is empty");
  const filter::FilterSetup setup = make_setup(config);
  const int n_steps = static_cast<int>(records.size());

  Driver driver{config, opts, {}, output_steps(n_steps, config.output_points)};
  driver.rec.seed = config.seed;
  Propagator prop(config, setup);
  driver.observe(prop, 0);
  for (int k = 1; k <= n_steps; ++k) {
    driver.account(prop.step(filter::StepInput{records[k - 1]}));
    driver.observe(prop, k);
  }
  return std::move(driver.rec);
}

std::size_t nearest_time_index(const std::vector<double>& times, double t) {
  if (times.empty()) throw ConfigError("no output times");
  std::size_t best = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
  }
  return best;
}

EnsembleSummary run_ensemble(const SimulationConfig& config, const RunOptions& opts) {
  validate(config);
  const int threads = std::max(1, opts.threads);
  const std::size_t n_traj = static_cast<std::size_t>(config.n_traj);
  const std::size_t batch = std::max<std::size_t>(64, 4 * static_cast<std::size_t>(threads));
  TrajectoryOptions topts;
  topts.keep_states = opts.keep_states;

  EnsembleSummary summary;
  summary.config = config;
  // Welford accumulators, updated strictly in trajectory-index order.
  std::vector<double> m2;
  std::size_t seen = 0;

  for (std::size_t start = 0; start < n_traj; start += batch) {
    const std::size_t count = std::min(batch, n_traj - start);
    std::vector<TrajectoryRecord> results(count);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    auto worker = [&](std::size_t w) {
      try {
        for (std::size_t i = next++; i < count; i = next++) {
          results[i] = run_trajectory(config, start + i, topts);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    if (threads == 1) {
      worker(0);
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < threads; ++w) pool.emplace_back(worker, static_cast<std::size_t>(w));
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    for (const auto& rec : results) {
      if (seen == 0) {
        summary.times = rec.times;
        const std::size_t nt = rec.times.size();
        summary.mean_number.assign(nt, 0.0);
        m2.assign(nt, 0.0);
        summary.mean_populations.assign(nt, Eigen::VectorXd::Zero(config.dim));
        if (opts.keep_states) {
          summary.mean_states.assign(nt, DensityOperator::Zero(config.dim, config.dim));
        }
      }
      ++seen;
      const double w = 1.0 / static_cast<double>(seen);
      for (std::size_t t = 0; t < rec.times.size(); ++t) {
        const double delta = rec.mean_number[t] - summary.mean_number[t];
        summary.mean_number[t] += delta * w;
        m2[t] += delta * (rec.mean_number[t] - summary.mean_number[t]);
        summary.mean_populations[t] += (rec.populations[t] - summary.mean_populations[t]) * w;
        if (opts.keep_states) summary.mean_states[t] += (rec.states[t] - summary.mean_states[t]) * w;
      }
      ++summary.jump_histogram[rec.jumps];
      summary.total_jumps += rec.jumps;
      summary.coarse_steps += rec.coarse_steps;
      summary.leakage_max = std::max(summary.leakage_max, rec.leakage_max);
    }
  }

  const double n = static_cast<double>(seen);
  summary.stderr_number.resize(summary.times.size());
  summary.analytic_number.resize(summary.times.size());
  for (std::size_t t = 0; t < summary.times.size(); ++t) {
    summary.stderr_number[t] = seen > 1 ? std::sqrt(m2[t] / (n - 1.0)) / std::sqrt(n) : 0.0;
    summary.analytic_number[t] = analytic_mean_number(config.n0, config.gamma, summary.times[t]);
  }
  return summary;
}

double analytic_number_distribution(int n0, double gamma, double t, int N) {
  if (n0 < 0) throw ConfigError("n0 must be >= 0");
  if (N < 0 || N > n0) {
    throw ConfigError("photon number " + std::to_string(N) + " outside 0.." + std::to_string(n0));
  }
  if (!(t >= 0.0)) throw ConfigError("time must be >= 0");
  const double s = std::exp(-gamma * t);
  double binom = 1.0;
  for (int k = 1; k <= N; ++k) binom = binom * (n0 - N + k) / k;
  return binom * std::pow(s, N) * std::pow(1.0 - s, n0 - N);
}

double analytic_mean_number(int n0, double gamma, double t) { return n0 * std::exp(-gamma * t); }

std::vector<DensityOperator> lindblad_solution(const filter::FilterSetup& setup,
                                               const DensityOperator& rho0, double dt,
                                               const std::vector<double>& times) {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  const auto& H = setup.slh().H;
  const auto& L = setup.slh().L;
  const auto rhs = [&](const DensityOperator& r) { return filter::lindblad_rhs(r, H, L); };

  std::vector<DensityOperator> out;
  out.reserve(times.size());
  DensityOperator rho = rho0;
  long done = 0;
  for (const double t : times) {
    const long target = std::lround(t / dt);
    if (target < done) throw ConfigError("lindblad_solution needs non-decreasing times");
    for (; done < target; ++done) {
      const DensityOperator k1 = rhs(rho);
      const DensityOperator k2 = rhs(rho + 0.5 * dt * k1);
      const DensityOperator k3 = rhs(rho + 0.5 * dt * k2);
      const DensityOperator k4 = rhs(rho + dt * k3);
      rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.push_back(rho);
  }
  return out;
}

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  const auto n = std::max(p.size(), q.size());
  double tv = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = i < p.size() ? p(i) : 0.0;
    const double b = i < q.size() ? q(i) : 0.0;
    tv += std::abs(a - b);
  }
  return 0.5 * tv;
}

double z_score(double mean, double stderr_value, double analytic) {
  const double diff = mean - analytic;
  if (stderr_value > 0.0) return diff / stderr_value;
  if (std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(analytic))) return 0.0;
  return diff > 0 ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
}

ComparisonReport compare_filters(const SimulationConfig& config, const RunOptions& opts) {
  validate(config);
  if (config.n_traj < 2) throw ConfigError("compare-kuramochi needs n_traj >= 2 for standard errors");

  SimulationConfig corrected = config;
  corrected.filter_kind = FilterKind::corrected;
  SimulationConfig earlier = config;
  earlier.filter_kind = FilterKind::kuramochi;
  // Both runs draw from stream_for(seed, index), so trajectory i sees the same
  // uniforms and normals under either filter.
  const EnsembleSummary a = run_ensemble(corrected, opts);
  const EnsembleSummary b = run_ensemble(earlier, opts);

  ComparisonReport rep;
  rep.config = config;
  rep.times = a.times;
  rep.mean_corrected = a.mean_number;
  rep.stderr_corrected = a.stderr_number;
  rep.mean_kuramochi = b.mean_number;
  rep.stderr_kuramochi = b.stderr_number;
  rep.analytic = a.analytic_number;
  rep.kuramochi_jump_rate_rule = "counts sampled at the physical rate r2 * <L^dag L>";
  for (std::size_t t = 0; t < rep.times.size(); ++t) {
    rep.z_corrected.push_back(z_score(rep.mean_corrected[t], rep.stderr_corrected[t], rep.analytic[t]));
    rep.z_kuramochi.push_back(z_score(rep.mean_kuramochi[t], rep.stderr_kuramochi[t], rep.analytic[t]));
  }
  for (const double t : kEvaluationTimes) {
    if (t > config.t_final + 0.5 * config.dt) continue;
    const std::size_t i = nearest_time_index(rep.times, t);
    rep.evaluation_times.push_back(rep.times[i]);
    rep.max_abs_z_corrected = std::max(rep.max_abs_z_corrected, std::abs(rep.z_corrected[i]));
    rep.max_abs_z_kuramochi = std::max(rep.max_abs_z_kuramochi, std::abs(rep.z_kuramochi[i]));
  }
  return rep;
}

}  // namespace qfilter::ensemble
