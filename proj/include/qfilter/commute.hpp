#pragma once

// Closed-form self-commutativity test for a measurement vector
//
//   dY = F* dA_out^dagger + F dA_out + G diag(dLambda_out)
//
// on n output channels of an arbitrary open system.

#include <array>
#include <optional>

#include <Eigen/Dense>

#include "qfilter/rng.hpp"

namespace qfilter::commute {

struct MeasurementSpec {
  Eigen::MatrixXcd F;  ///< quadrature weights
  Eigen::MatrixXcd G;  ///< counting weights

  int channels() const { return static_cast<int>(F.rows()); }
};

/// Throws ShapeError unless F and G are square and of equal shape.
void validate(const MeasurementSpec& spec);

/// Verdict plus per-condition diagnostics.
///
/// The three condition groups are decided channel by channel. With f_a, g_a the
/// a-th columns of F and G:
///   condition_F      : F F^dagger symmetric (equivalently Re F Im F^T symmetric);
///   condition_GFstar : g_a f_a^dagger symmetric for every channel a;
///   condition_GF     : g_a f_a^T symmetric for every channel a.
/// Summed over a these become G F^dagger and G F^T. The summed forms are
/// necessary but not sufficient (F = I, G = [[0,1],[1,0]] passes them while
/// channel 1 is both homodyned and counted), so they are reported separately.
struct CommutativityReport {
  bool commutative = false;
  bool condition_F = false;
  bool condition_GFstar = false;
  bool condition_GF = false;
  /// Max-abs asymmetry per condition group (F, GF*, GF).
  std::array<double, 3> violation_norms{};

  /// G F^dagger and G F^T symmetric (the channel sums of the conditions above).
  bool summed_GFstar = false;
  bool summed_GF = false;
  /// Max-abs entries of [F F*] J [F^T; F^dag], [G F*] J [G^T; F^dag], [G F] J [G^T; F^T].
  std::array<double, 3> symplectic_norms{};

  double tolerance = 0.0;
};

/// Default tolerance 1e-10 * max(1, |F|, |G|)^2 (operator 2-norms).
double default_tolerance(const MeasurementSpec& spec);

CommutativityReport check_self_commutative(const MeasurementSpec& spec,
                                           std::optional<double> tol = std::nullopt);

/// Compares the closed-form verdict with the Itô-table symmetry oracle on
/// `trials` random (S, L) instances. Returns true when all agree; throws
/// OracleMismatch (with the offending instance) otherwise.
bool cross_validate(const MeasurementSpec& spec, int trials, Rng& rng);

/// 2x2 examples: two homodyne channels, homodyne + counting on separate
/// channels, and homodyne + counting on the same channel.
MeasurementSpec homodyne_pair();
MeasurementSpec homodyne_and_count();
MeasurementSpec same_channel_homodyne_and_count();

}  // namespace qfilter::commute
