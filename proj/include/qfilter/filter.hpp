#pragma once

// Conditional-state propagation for simultaneous homodyne detection and photon
// counting behind a beam splitter.
//
// The system (1, L, H) is concatenated with a vacuum port and fed through a
// beam splitter of reflectivity r and phase theta. Channel 1 (homodyne) sees
// the coupling sqrt(1 - r^2) e^{i theta} L, channel 2 (counting) sees
// i r e^{i theta} L, so the counting rate is r^2 <L^dag L>.

#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "qfilter/hilbert.hpp"
#include "qfilter/network.hpp"
#include "qfilter/rng.hpp"

namespace qfilter::filter {

/// Below this <L^dag L> the counting channel carries no information and is skipped.
inline constexpr double kRateEpsilon = 1e-12;
/// rate * dt above which first-order Bernoulli thinning is considered too coarse.
inline constexpr double kCoarseJumpProbability = 0.1;

class FilterSetup {
 public:
  /// Builds the beam-splitter network and checks that homodyne on channel 1
  /// plus counting on channel 2 is self-commutative.
  FilterSetup(Operator L, Operator H, double r, double theta);

  const network::SLHModel& slh() const { return slh_; }
  const Operator& L() const { return L_; }
  const Operator& H() const { return H_; }
  const Operator& LdagL() const { return LdagL_; }
  /// e^{i theta} L: the quadrature picked out by the local oscillator.
  const Operator& rotated_L() const { return rotated_L_; }
  double r() const { return r_; }
  double theta() const { return theta_; }
  double r2() const { return r_ * r_; }
  /// sqrt(1 - r^2), the homodyne arm amplitude.
  double transmission() const { return transmission_; }
  int dim() const { return static_cast<int>(H_.rows()); }

 private:
  Operator L_;
  Operator H_;
  double r_;
  double theta_;
  double transmission_;
  network::SLHModel slh_;
  Operator LdagL_;
  Operator rotated_L_;
};

/// Raw random numbers consumed by one step: exactly one uniform on [0, 1) and
/// one standard normal, in that order, whatever the filter does with them.
struct Draws {
  double uniform = 0.0;
  double normal = 0.0;
};

/// Measured increments for filtering a given record.
struct Record {
  double dY1 = 0.0;
  int dN = 0;
};

using StepInput = std::variant<Draws, Record>;

/// Per-trajectory noise stream.
class NoiseSource {
 public:
  explicit NoiseSource(Rng rng) : rng_(std::move(rng)) {}
  Draws next();

 private:
  Rng rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct StepRecord {
  double dY1 = 0.0;       ///< homodyne increment
  int dN = 0;             ///< photocount in this step
  double dW = 0.0;        ///< homodyne innovation dY1 - E[dY1]
  double jump_rate = 0.0; ///< counting rate used for this step
  bool coarse = false;    ///< jump_rate * dt exceeded kCoarseJumpProbability
};

/// -i[H, rho] + sum_k (L_k rho L_k^dag - {L_k^dag L_k, rho} / 2).
Operator lindblad_rhs(const DensityOperator& rho, const Operator& H, const std::vector<Operator>& L);

struct MeasurementExpectations {
  double e1 = 0.0;  ///< E[dY1]
  double e2 = 0.0;  ///< E[dY2] = E[dY2 dY2]
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();  ///< E[dY dY^T]
};

MeasurementExpectations measurement_expectations(const DensityOperator& rho,
                                                 const FilterSetup& setup, double dt);

/// Heisenberg-picture filter gains for observable X. beta2 is empty when
/// <L^dag L> < kRateEpsilon (the counting channel is degenerate).
struct Gains {
  double beta1 = 0.0;
  std::optional<double> beta2;
};

Gains filter_gains(const Operator& X, const DensityOperator& rho, const FilterSetup& setup);

/// Gains from the general joint-measurement construction
///   zeta^T = pi(X dY^T) - pi(X) pi(dY^T) + pi([L^dag, X] S dA dY^T),
///   Sigma  = pi(dY dY^T),  beta = Sigma^{-1} zeta,
/// evaluated with the Itô algebra for F = diag(1, 0), G = diag(0, 1).
/// Only diagonal Sigma is supported; zero-rate channels yield an empty gain.
std::vector<std::optional<double>> general_gains(const Operator& X, const DensityOperator& rho,
                                                 const FilterSetup& setup);

/// Euler-Maruyama increment of the conditional density operator:
/// lindblad_rhs dt + (L1 rho + rho L1^dag - <L1 + L1^dag> rho) dW1
///                 + (L2 rho L2^dag / <L2^dag L2> - rho) (dN - <L2^dag L2> dt).
DensityOperator sme_increment(const DensityOperator& rho, const FilterSetup& setup, double dt,
                              double dW1, int dN);

struct SmeStep {
  DensityOperator rho;
  StepRecord record;
};

/// One filter step for the density operator. The update is the Kraus form of
/// the Euler-Maruyama step,
///   rho' ∝ J^dN M rho M^dag J^dag^dN,  M = 1 - (iH + L^dag L / 2) dt + L1 dY1,  J = L2,
/// which agrees with sme_increment to first order and stays positive; the
/// result is passed through project_physical.
SmeStep sme_step(const DensityOperator& rho, const FilterSetup& setup, double dt,
                 const StepInput& input, const hilbert::Tolerances& tol = {});
SmeStep sme_step(const DensityOperator& rho, const FilterSetup& setup, double dt, NoiseSource& noise,
                 const hilbert::Tolerances& tol = {});

/// Normalized SSE in increment form:
///   d|psi> = [drift dt + diffusion dW + jump dN] |psi>.
/// homodyne_mean is E[dY1] / dt and jump_rate the counting intensity, both
/// evaluated on the current state.
struct SseCoefficients {
  Operator drift;
  Operator diffusion;
  Operator jump;
  double homodyne_mean = 0.0;
  double jump_rate = 0.0;
  bool jump_enabled = false;
};

/// Coefficients of the corrected joint filter, with m = <e^{-i theta} L^dag + e^{i theta} L>:
///   drift     = -i H - L^dag L / 2 + (1 - r^2)/2 m e^{i theta} L + r^2 <L^dag L>/2 - (1 - r^2)/8 m^2
///   diffusion = sqrt(1 - r^2) (e^{i theta} L - m / 2)
///   jump      = L / sqrt(<L^dag L>) - 1
SseCoefficients corrected_sse_coefficients(const StateVector& psi, const FilterSetup& setup);

/// The earlier simultaneous-measurement SSE (theta = 0, no beam splitter in the
/// diffusive part), with x = <L + L^dag>:
///   drift     = -i H - L^dag L / 2 + x L / 2 - x^2 / 8
///   diffusion = L - x / 2
///   jump      = L / sqrt(<L^dag L>) - 1
/// Counts are sampled at the physical rate r^2 <L^dag L>.
SseCoefficients kuramochi_sse_coefficients(const StateVector& psi, const FilterSetup& setup);

struct SseStep {
  StateVector psi;
  StepRecord record;
  double pre_norm = 1.0;  ///< norm before renormalization
};

/// Generic normalized-SSE step; resolves the increments from `input`.
SseStep sse_step_with(const StateVector& psi, const SseCoefficients& coeffs, double dt,
                      const StepInput& input);

SseStep sse_step(const StateVector& psi, const FilterSetup& setup, double dt, const StepInput& input);
SseStep sse_step(const StateVector& psi, const FilterSetup& setup, double dt, NoiseSource& noise);
SseStep sse_step_kuramochi(const StateVector& psi, const FilterSetup& setup, double dt,
                           const StepInput& input);
SseStep sse_step_kuramochi(const StateVector& psi, const FilterSetup& setup, double dt,
                           NoiseSource& noise);

/// Post-count state L psi / |L psi|.
StateVector apply_jump(const StateVector& psi, const Operator& L);

/// Linear (unnormalized) SSE: |psi~'> = [1 + A dt + (B - 1) dN + C dW] |psi~>.
struct UnnormalizedCoefficients {
  Operator A;
  Operator B;
  Operator C;
};

/// Corrected unnormalized filter, expectations taken on psi / |psi|:
///   A = -i H - L^dag L / 2 + (1 - r^2) L_theta <L_theta + L_theta^dag>,
///   B = r L,  C = sqrt(1 - r^2) L_theta,  L_theta = e^{i theta} L.
UnnormalizedCoefficients corrected_unnormalized_coefficients(const StateVector& psi,
                                                             const FilterSetup& setup);
/// A = -i H - L^dag L / 2 + L <L + L^dag>, B = C = L.
UnnormalizedCoefficients kuramochi_unnormalized_coefficients(const StateVector& psi,
                                                             const FilterSetup& setup);

StateVector unnormalized_step(const StateVector& psi_tilde, const UnnormalizedCoefficients& coeffs,
                              double dt, double dW, int dN);

StateVector sse_step_corrected_unnormalized(const StateVector& psi_tilde, const FilterSetup& setup,
                                            double dt, double dW, int dN);

/// Maps unnormalized coefficients (A, B, C) to the equivalent normalized SSE,
///   drift = A + A_hat + C C_hat,  jump = B_hat B - 1,  diffusion = C + C_hat,
///   A_hat = 3/8 <C + C^dag>^2 - <A + A^dag>/2 - <C^dag C>/2,
///   B_hat = 1 / sqrt(<B^dag B>),  C_hat = -<C + C^dag>/2.
/// The jump term is disabled when <B^dag B> is below kRateEpsilon.
SseCoefficients normalize_coefficients(const UnnormalizedCoefficients& coeffs,
                                       const StateVector& psi);

}  // namespace qfilter::filter
