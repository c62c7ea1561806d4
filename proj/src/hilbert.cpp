#include "qfilter/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfilter/errors.hpp"

namespace qfilter::hilbert {

namespace {

void require_ladder_dim(int dim) {
  if (dim < 2) {
    throw InvalidDimension("ladder operators need dim >= 2, got " + std::to_string(dim));
  }
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
  }
}

}  // namespace

Operator identity(int dim) {
  if (dim < 1) throw InvalidDimension("dimension must be >= 1");
  return Operator::Identity(dim, dim);
}

Operator annihilation(int dim) {
  require_ladder_dim(dim);
  Operator a = Operator::Zero(dim, dim);
  for (int k = 0; k + 1 < dim; ++k) a(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
  return a;
}

Operator creation(int dim) { return annihilation(dim).adjoint(); }

Operator number_operator(int dim) {
  require_ladder_dim(dim);
  Operator n = Operator::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

StateVector fock_state(int dim, int n) {
  if (dim < 1) throw InvalidDimension("dimension must be >= 1");
  if (n < 0 || n >= dim) {
    throw InvalidDimension("Fock level " + std::to_string(n) + " outside dim " + std::to_string(dim));
  }
  StateVector psi = StateVector::Zero(dim);
  psi(n) = 1.0;
  return psi;
}

DensityOperator pure_density(const StateVector& psi) { return psi * psi.adjoint(); }

cplx expectation(const StateVector& psi, const Operator& op) {
  require_same_dim(psi.size(), op.rows(), "expectation");
  require_same_dim(op.rows(), op.cols(), "expectation");
  return psi.dot(op * psi);
}

cplx expectation(const DensityOperator& rho, const Operator& op) {
  require_same_dim(rho.rows(), op.rows(), "expectation");
  require_same_dim(rho.cols(), op.cols(), "expectation");
  // tr(rho op) without forming the product.
  return (rho.transpose().array() * op.array()).sum();
}

Operator commutator(const Operator& a, const Operator& b) {
  require_same_dim(a.rows(), b.rows(), "commutator");
  require_same_dim(a.cols(), b.cols(), "commutator");
  return a * b - b * a;
}

Operator anticommutator(const Operator& a, const Operator& b) {
  require_same_dim(a.rows(), b.rows(), "anticommutator");
  return a * b + b * a;
}

bool is_square(const Operator& op) { return op.rows() == op.cols() && op.rows() >= 1; }

double hermiticity_violation(const Operator& op) {
  if (!is_square(op)) throw ShapeError("hermiticity check on non-square operator");
  return (op - op.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const Operator& op, double tol) { return hermiticity_violation(op) <= tol; }

PhysicalityReport check_physical(const DensityOperator& rho) {
  PhysicalityReport r;
  r.hermiticity = hermiticity_violation(rho);
  r.trace_error = std::abs(rho.trace() - 1.0);
  const DensityOperator herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DensityOperator> es(herm, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

bool is_physical(const DensityOperator& rho, const Tolerances& tol) {
  const auto r = check_physical(rho);
  return r.hermiticity <= tol.hermiticity && r.trace_error <= tol.trace &&
         r.min_eigenvalue >= -tol.positivity;
}

DensityOperator project_physical(const DensityOperator& rho, const Tolerances& tol) {
  if (!is_square(rho)) throw ShapeError("density operator must be square");
  if (!rho.allFinite()) throw IntegrationDiverged("density operator has non-finite entries");

  const double herm_violation = hermiticity_violation(rho);
  DensityOperator out = 0.5 * (rho + rho.adjoint());
  const double trace = out.trace().real();
  if (herm_violation > tol.hard_fail || std::abs(trace - 1.0) > tol.hard_fail) {
    throw IntegrationDiverged("density operator off by " + std::to_string(herm_violation) +
                              " (hermiticity), " + std::to_string(trace - 1.0) + " (trace)");
  }

  Eigen::SelfAdjointEigenSolver<DensityOperator> es(out);
  const Eigen::VectorXd& evals = es.eigenvalues();
  const double min_eval = evals.minCoeff();
  if (min_eval < -tol.hard_fail) {
    throw IntegrationDiverged("density operator eigenvalue " + std::to_string(min_eval) +
                              " below hard-fail threshold");
  }
  if (min_eval < 0.0) {
    const Eigen::VectorXd clipped = evals.cwiseMax(0.0);
    out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
    out = 0.5 * (out + out.adjoint()).eval();
  }
  const double new_trace = out.trace().real();
  if (new_trace != 1.0) out /= new_trace;
  return out;
}

double leakage(const StateVector& psi) { return std::norm(psi(psi.size() - 1)); }

double leakage(const DensityOperator& rho) {
  const auto top = rho.rows() - 1;
  return rho(top, top).real();
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  require_same_dim(a.rows(), b.rows(), "trace_distance");
  const DensityOperator diff = a - b;
  Eigen::SelfAdjointEigenSolver<DensityOperator> es(0.5 * (diff + diff.adjoint()),
                                                    Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qfilter::hilbert
