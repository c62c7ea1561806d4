#pragma once

// Dense operator and state algebra on a truncated Fock space.

#include <complex>

#include <Eigen/Dense>

namespace qfilter {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using DensityOperator = Eigen::MatrixXcd;

inline constexpr cplx kI{0.0, 1.0};

namespace hilbert {

/// Numerical tolerances shared by the state-hygiene routines.
struct Tolerances {
  double norm = 1e-8;
  double trace = 1e-8;
  double hermiticity = 1e-8;
  double positivity = 1e-8;
  double imaginary = 1e-9;
  /// Violations above this are not repaired: the integration is declared diverged.
  double hard_fail = 1e-3;
};

/// Population of the top Fock level above which truncation is considered leaky.
inline constexpr double kLeakageWarning = 1e-6;

Operator identity(int dim);
/// Ladder operator with a(k, k+1) = sqrt(k+1). Requires dim >= 2.
Operator annihilation(int dim);
Operator creation(int dim);
/// diag(0, 1, ..., dim-1), identical to creation(dim) * annihilation(dim).
Operator number_operator(int dim);

StateVector fock_state(int dim, int n);
DensityOperator pure_density(const StateVector& psi);

cplx expectation(const StateVector& psi, const Operator& op);
cplx expectation(const DensityOperator& rho, const Operator& op);

Operator commutator(const Operator& a, const Operator& b);
Operator anticommutator(const Operator& a, const Operator& b);

bool is_square(const Operator& op);
bool is_hermitian(const Operator& op, double tol);
/// Max-abs entry of A - A^dagger.
double hermiticity_violation(const Operator& op);

struct PhysicalityReport {
  double hermiticity = 0.0;  ///< max |rho - rho^dagger|
  double trace_error = 0.0;  ///< |tr(rho) - 1|
  double min_eigenvalue = 0.0;
};

PhysicalityReport check_physical(const DensityOperator& rho);
bool is_physical(const DensityOperator& rho, const Tolerances& tol = {});

/// Hermitize, clip negative eigenvalues to zero and renormalize to unit trace.
/// Leaves an already-physical rho unchanged. Throws IntegrationDiverged when
/// any violation exceeds tol.hard_fail.
DensityOperator project_physical(const DensityOperator& rho, const Tolerances& tol = {});

/// Probability in the highest retained Fock level.
double leakage(const StateVector& psi);
double leakage(const DensityOperator& rho);

/// 0.5 * sum of |eigenvalues| of (a - b); inputs must be Hermitian.
double trace_distance(const DensityOperator& a, const DensityOperator& b);

}  // namespace hilbert
}  // namespace qfilter
