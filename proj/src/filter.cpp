#include "qfilter/filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfilter/commute.hpp"
#include "qfilter/errors.hpp"
#include "qfilter/ito.hpp"

namespace qfilter::filter {

using hilbert::expectation;

namespace {

double real_expectation(const StateVector& psi, const Operator& op) {
  return expectation(psi, op).real();
}

double real_expectation(const DensityOperator& rho, const Operator& op) {
  return expectation(rho, op).real();
}

void require_positive_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
}

void require_dim(Eigen::Index got, int want, const char* what) {
  if (got != want) {
    throw ShapeError(std::string(what) + ": state dimension " + std::to_string(got) +
                     " does not match setup dimension " + std::to_string(want));
  }
}

struct Increments {
  double dY1;
  double dW;
  int dN;
};

// Turns raw draws or a measured record into the increments of one step.
Increments resolve(const StepInput& input, double dt, double homodyne_mean, double jump_rate,
                   bool jump_enabled) {
  const double e1 = homodyne_mean * dt;
  if (const auto* draws = std::get_if<Draws>(&input)) {
    const double dW = std::sqrt(dt) * draws->normal;
    const double p = std::min(jump_rate * dt, 1.0);
    const int dN = (jump_enabled && draws->uniform < p) ? 1 : 0;
    return {e1 + dW, dW, dN};
  }
  const auto& rec = std::get<Record>(input);
  if (rec.dN != 0 && rec.dN != 1) {
    throw ConfigError("photocount increments must be 0 or 1, got " + std::to_string(rec.dN));
  }
  if (rec.dN == 1 && !jump_enabled) {
    throw ImpossibleJump("photocount recorded while the counting rate is zero");
  }
  return {rec.dY1, rec.dY1 - e1, rec.dN};
}

}  // namespace

FilterSetup::FilterSetup(Operator L, Operator H, double r, double theta)
    : L_(std::move(L)), H_(std::move(H)), r_(r), theta_(theta) {
  if (!hilbert::is_square(H_) || L_.rows() != H_.rows() || L_.cols() != H_.cols()) {
    throw ShapeError("L and H must be square operators of equal dimension");
  }
  slh_ = network::beam_splitter_network(L_, H_, r, theta);  // validates r
  transmission_ = std::sqrt(1.0 - r * r);
  LdagL_ = L_.adjoint() * L_;
  rotated_L_ = std::exp(kI * theta) * L_;

  const auto report = commute::check_self_commutative(commute::homodyne_and_count());
  if (!report.commutative) throw ConfigError("homodyne + counting layout is not self-commutative");
}

Draws NoiseSource::next() {
  Draws d;
  d.uniform = uniform_(rng_);
  d.normal = normal_(rng_);
  return d;
}

Operator lindblad_rhs(const DensityOperator& rho, const Operator& H, const std::vector<Operator>& L) {
  if (rho.rows() != H.rows() || rho.cols() != H.cols()) throw ShapeError("lindblad_rhs: dim mismatch");
  Operator out = -kI * hilbert::commutator(H, rho);
  for (const auto& l : L) {
    if (l.rows() != rho.rows()) throw ShapeError("lindblad_rhs: coupling dim mismatch");
    const Operator ldl = l.adjoint() * l;
    out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
  }
  return out;
}

MeasurementExpectations measurement_expectations(const DensityOperator& rho,
                                                 const FilterSetup& setup, double dt) {
  require_positive_dt(dt);
  require_dim(rho.rows(), setup.dim(), "measurement_expectations");
  const Operator quad = setup.rotated_L() + setup.rotated_L().adjoint();
  MeasurementExpectations m;
  m.e1 = setup.transmission() * real_expectation(rho, quad) * dt;
  m.e2 = setup.r2() * real_expectation(rho, setup.LdagL()) * dt;
  m.sigma(0, 0) = dt;
  m.sigma(1, 1) = m.e2;
  return m;
}

Gains filter_gains(const Operator& X, const DensityOperator& rho, const FilterSetup& setup) {
  require_dim(rho.rows(), setup.dim(), "filter_gains");
  const Operator& Lt = setup.rotated_L();
  const Operator& L = setup.L();
  const Operator id = Operator::Identity(X.rows(), X.cols());
  // Same reduction as the expectations below, so <I> / norm is exactly 1.
  const double norm = real_expectation(rho, id);
  // Centering X first makes the gains of X = I vanish exactly, not just to rounding.
  const double x_mean = real_expectation(rho, X) / norm;
  const Operator centered = X - x_mean * id;

  Gains g;
  g.beta1 = setup.transmission() * real_expectation(rho, centered * Lt + Lt.adjoint() * centered) / norm;
  const double rate = real_expectation(rho, setup.LdagL()) / norm;
  if (rate >= kRateEpsilon) {
    g.beta2 = real_expectation(rho, L.adjoint() * centered * L) / norm / rate;
  }
  return g;
}

std::vector<std::optional<double>> general_gains(const Operator& X, const DensityOperator& rho,
                                                 const FilterSetup& setup) {
  require_dim(rho.rows(), setup.dim(), "general_gains");
  const auto& slh = setup.slh();
  const int n = slh.channels();
  const int dim = slh.dim();
  const commute::MeasurementSpec spec = commute::homodyne_and_count();
  const ito::ItoVector dY = ito::build_dY(spec.F, spec.G, slh.S, slh.L);

  // Under the vacuum field state only the dt component has non-zero mean.
  const auto pi_dt = [&](const ito::ItoExpression& e) {
    return expectation(rho, e.dt_coefficient());
  };

  const cplx x_mean = expectation(rho, X);
  std::vector<cplx> zeta(n);
  Eigen::MatrixXcd sigma(n, n);
  for (int j = 0; j < n; ++j) {
    zeta[j] = pi_dt(X * dY[j]) - x_mean * pi_dt(dY[j]);
    for (int l = 0; l < n; ++l) {
      const auto dA = ito::ItoExpression::increment(n, dim, 0, l + 1);
      const ito::ItoExpression dA_dY = ito::ito_product(dA, dY[j]);
      for (int k = 0; k < n; ++k) {
        const Operator comm = hilbert::commutator(slh.L[k].adjoint(), X);
        zeta[j] += slh.S(k, l) * pi_dt(comm * dA_dY);
      }
    }
    for (int i = 0; i < n; ++i) sigma(i, j) = pi_dt(ito::ito_product(dY[i], dY[j]));
  }

  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && std::abs(sigma(i, j)) > 1e-10 * scale) {
        throw ConfigError("general_gains: only diagonal measurement correlations are supported");
      }
    }
  }
  std::vector<std::optional<double>> beta(n);
  for (int j = 0; j < n; ++j) {
    const double s = sigma(j, j).real();
    if (s >= kRateEpsilon) beta[j] = zeta[j].real() / s;
  }
  return beta;
}

DensityOperator sme_increment(const DensityOperator& rho, const FilterSetup& setup, double dt,
                              double dW1, int dN) {
  require_positive_dt(dt);
  require_dim(rho.rows(), setup.dim(), "sme_increment");
  const auto& slh = setup.slh();
  const Operator& L1 = slh.L[0];
  const Operator& L2 = slh.L[1];

  DensityOperator d = lindblad_rhs(rho, slh.H, slh.L) * dt;
  const double x1 = real_expectation(rho, L1 + L1.adjoint());
  d += (L1 * rho + rho * L1.adjoint() - x1 * rho) * dW1;
  const double total_rate = real_expectation(rho, setup.LdagL());
  const double rate = real_expectation(rho, L2.adjoint() * L2);
  if (total_rate >= kRateEpsilon && setup.r2() > 0.0) {
    d += (L2 * rho * L2.adjoint() / rate - rho) * (dN - rate * dt);
  } else if (dN != 0) {
    throw ImpossibleJump("photocount while the counting rate is zero");
  }
  return d;
}

SmeStep sme_step(const DensityOperator& rho, const FilterSetup& setup, double dt,
                 const StepInput& input, const hilbert::Tolerances& tol) {
  require_positive_dt(dt);
  require_dim(rho.rows(), setup.dim(), "sme_step");
  const auto& slh = setup.slh();
  const Operator& L1 = slh.L[0];
  const Operator& L2 = slh.L[1];

  const double homodyne_mean = real_expectation(rho, L1 + L1.adjoint());
  const double total_rate = real_expectation(rho, setup.LdagL());
  const bool jump_enabled = total_rate >= kRateEpsilon && setup.r2() > 0.0;
  const double rate = jump_enabled ? setup.r2() * total_rate : 0.0;
  const Increments inc = resolve(input, dt, homodyne_mean, rate, jump_enabled);

  const auto dim = setup.dim();
  const Operator M = Operator::Identity(dim, dim) - (kI * slh.H + 0.5 * setup.LdagL()) * dt +
                     L1 * inc.dY1;
  DensityOperator next = M * rho * M.adjoint();
  if (inc.dN == 1) next = (L2 * next * L2.adjoint()).eval();
  const double tr = next.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw IntegrationDiverged("density operator lost its trace (" + std::to_string(tr) + ")");
  }
  next /= tr;

  SmeStep out{hilbert::project_physical(next, tol), {}};
  out.record = {inc.dY1, inc.dN, inc.dW, rate, rate * dt > kCoarseJumpProbability};
  return out;
}

SmeStep sme_step(const DensityOperator& rho, const FilterSetup& setup, double dt, NoiseSource& noise,
                 const hilbert::Tolerances& tol) {
  return sme_step(rho, setup, dt, StepInput{noise.next()}, tol);
}

SseCoefficients corrected_sse_coefficients(const StateVector& psi, const FilterSetup& setup) {
  require_dim(psi.size(), setup.dim(), "corrected_sse_coefficients");
  const auto dim = setup.dim();
  const Operator id = Operator::Identity(dim, dim);
  const Operator& Lt = setup.rotated_L();
  const double c2 = 1.0 - setup.r2();
  const double m = real_expectation(psi, Lt + Lt.adjoint());
  const double ldl = real_expectation(psi, setup.LdagL());

  SseCoefficients k;
  k.drift = -kI * setup.H() - 0.5 * setup.LdagL() + 0.5 * c2 * m * Lt +
            (0.5 * setup.r2() * ldl - c2 * m * m / 8.0) * id;
  k.diffusion = setup.transmission() * (Lt - 0.5 * m * id);
  k.homodyne_mean = setup.transmission() * m;
  k.jump_enabled = ldl >= kRateEpsilon && setup.r2() > 0.0;
  if (k.jump_enabled) {
    k.jump = setup.L() / std::sqrt(ldl) - id;
    k.jump_rate = setup.r2() * ldl;
  } else {
    k.jump = Operator::Zero(dim, dim);
  }
  return k;
}

SseCoefficients kuramochi_sse_coefficients(const StateVector& psi, const FilterSetup& setup) {
  require_dim(psi.size(), setup.dim(), "kuramochi_sse_coefficients");
  const auto dim = setup.dim();
  const Operator id = Operator::Identity(dim, dim);
  const Operator& L = setup.L();
  const double x = real_expectation(psi, L + L.adjoint());
  const double ldl = real_expectation(psi, setup.LdagL());

  SseCoefficients k;
  k.drift = -kI * setup.H() - 0.5 * setup.LdagL() + 0.5 * x * L - (x * x / 8.0) * id;
  k.diffusion = L - 0.5 * x * id;
  k.homodyne_mean = x;
  k.jump_enabled = ldl >= kRateEpsilon && setup.r2() > 0.0;
  if (k.jump_enabled) {
    k.jump = L / std::sqrt(ldl) - id;
    k.jump_rate = setup.r2() * ldl;
  } else {
    k.jump = Operator::Zero(dim, dim);
  }
  return k;
}

SseStep sse_step_with(const StateVector& psi, const SseCoefficients& coeffs, double dt,
                      const StepInput& input) {
  require_positive_dt(dt);
  const Increments inc =
      resolve(input, dt, coeffs.homodyne_mean, coeffs.jump_rate, coeffs.jump_enabled);

  StateVector next = psi + (coeffs.drift * psi) * dt + (coeffs.diffusion * psi) * inc.dW;
  if (inc.dN == 1) next += coeffs.jump * psi;
  const double norm = next.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw IntegrationDiverged("state vector norm collapsed (" + std::to_string(norm) + ")");
  }
  SseStep out{next / norm, {}, norm};
  out.record = {inc.dY1, inc.dN, inc.dW, coeffs.jump_rate,
                coeffs.jump_rate * dt > kCoarseJumpProbability};
  return out;
}

SseStep sse_step(const StateVector& psi, const FilterSetup& setup, double dt, const StepInput& input) {
  return sse_step_with(psi, corrected_sse_coefficients(psi, setup), dt, input);
}

SseStep sse_step(const StateVector& psi, const FilterSetup& setup, double dt, NoiseSource& noise) {
  return sse_step(psi, setup, dt, StepInput{noise.next()});
}

SseStep sse_step_kuramochi(const StateVector& psi, const FilterSetup& setup, double dt,
                           const StepInput& input) {
  return sse_step_with(psi, kuramochi_sse_coefficients(psi, setup), dt, input);
}

SseStep sse_step_kuramochi(const StateVector& psi, const FilterSetup& setup, double dt,
                           NoiseSource& noise) {
  return sse_step_kuramochi(psi, setup, dt, StepInput{noise.next()});
}

StateVector apply_jump(const StateVector& psi, const Operator& L) {
  if (L.cols() != psi.size()) throw ShapeError("apply_jump: dim mismatch");
  const StateVector out = L * psi;
  const double norm = out.norm();
  if (norm * norm < kRateEpsilon) throw ImpossibleJump("jump from a state annihilated by L");
  return out / norm;
}

UnnormalizedCoefficients corrected_unnormalized_coefficients(const StateVector& psi,
                                                             const FilterSetup& setup) {
  require_dim(psi.size(), setup.dim(), "corrected_unnormalized_coefficients");
  const StateVector unit = psi / psi.norm();
  const Operator& Lt = setup.rotated_L();
  const double m = real_expectation(unit, Lt + Lt.adjoint());
  UnnormalizedCoefficients k;
  k.A = -kI * setup.H() - 0.5 * setup.LdagL() + (1.0 - setup.r2()) * m * Lt;
  k.B = setup.r() * setup.L();
  k.C = setup.transmission() * Lt;
  return k;
}

UnnormalizedCoefficients kuramochi_unnormalized_coefficients(const StateVector& psi,
                                                             const FilterSetup& setup) {
  require_dim(psi.size(), setup.dim(), "kuramochi_unnormalized_coefficients");
  const StateVector unit = psi / psi.norm();
  const Operator& L = setup.L();
  const double x = real_expectation(unit, L + L.adjoint());
  UnnormalizedCoefficients k;
  k.A = -kI * setup.H() - 0.5 * setup.LdagL() + x * L;
  k.B = L;
  k.C = L;
  return k;
}

StateVector unnormalized_step(const StateVector& psi_tilde, const UnnormalizedCoefficients& coeffs,
                              double dt, double dW, int dN) {
  require_positive_dt(dt);
  StateVector next = psi_tilde + (coeffs.A * psi_tilde) * dt + (coeffs.C * psi_tilde) * dW;
  if (dN == 1) next += coeffs.B * psi_tilde - psi_tilde;
  return next;
}

StateVector sse_step_corrected_unnormalized(const StateVector& psi_tilde, const FilterSetup& setup,
                                            double dt, double dW, int dN) {
  return unnormalized_step(psi_tilde, corrected_unnormalized_coefficients(psi_tilde, setup), dt, dW,
                           dN);
}

SseCoefficients normalize_coefficients(const UnnormalizedCoefficients& coeffs,
                                       const StateVector& psi) {
  const StateVector unit = psi / psi.norm();
  const auto dim = unit.size();
  const Operator id = Operator::Identity(dim, dim);
  const auto& [A, B, C] = coeffs;

  const double c_quad = real_expectation(unit, C + C.adjoint());
  const double a_herm = real_expectation(unit, A + A.adjoint());
  const double cdc = real_expectation(unit, C.adjoint() * C);
  const double bdb = real_expectation(unit, B.adjoint() * B);

  const double a_hat = 3.0 / 8.0 * c_quad * c_quad - 0.5 * a_herm - 0.5 * cdc;
  const double c_hat = -0.5 * c_quad;

  SseCoefficients k;
  k.drift = A + a_hat * id + c_hat * C;
  k.diffusion = C + c_hat * id;
  k.homodyne_mean = c_quad;
  k.jump_enabled = bdb >= kRateEpsilon;
  if (k.jump_enabled) {
    k.jump = B / std::sqrt(bdb) - id;
    k.jump_rate = bdb;
  } else {
    k.jump = Operator::Zero(dim, dim);
  }
  return k;
}

}  // namespace qfilter::filter
