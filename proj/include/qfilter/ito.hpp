#pragma once

// Quantum Itô algebra over the fundamental increments dLambda_{kl}.
//
// Index 0 is reserved for time: dLambda_{00} = dt, dLambda_{0k} = dA_k,
// dLambda_{k0} = dA_k^dagger, and dLambda_{kl} (k, l >= 1) are the gauge
// (conservation) increments. Products follow
//
//   dLambda_{kr} dLambda_{sl} = delta_hat(r, s) dLambda_{kl},
//
// with delta_hat(r, s) = 1 iff r == s >= 1. Every term carries a system
// operator coefficient; system operators commute with the field increments of
// the same time slice, so only the relative order of coefficients matters.

#include <map>
#include <utility>
#include <vector>

#include "qfilter/hilbert.hpp"
#include "qfilter/rng.hpp"

namespace qfilter::ito {

using IncrementIndex = std::pair<int, int>;

class ItoExpression {
 public:
  ItoExpression(int channels, int dim);

  /// coeff * dLambda_{kl}
  static ItoExpression increment(int channels, int k, int l, const Operator& coeff);
  static ItoExpression increment(int channels, int dim, int k, int l, cplx coeff = 1.0);

  int channels() const { return channels_; }
  int dim() const { return dim_; }
  const std::map<IncrementIndex, Operator>& terms() const { return terms_; }

  void add_term(int k, int l, const Operator& coeff);
  /// Coefficient of dLambda_{kl}; zero operator when absent.
  Operator coefficient(int k, int l) const;
  Operator dt_coefficient() const { return coefficient(0, 0); }

  bool empty() const { return terms_.empty(); }
  /// True when every coefficient has max-abs entry <= tol.
  bool is_zero(double tol = 0.0) const;
  /// Largest max-abs coefficient entry.
  double scale() const;

  ItoExpression& operator+=(const ItoExpression& other);
  ItoExpression& operator-=(const ItoExpression& other);
  ItoExpression& operator*=(cplx s);

  /// op * expr (coefficient multiplied from the left).
  friend ItoExpression operator*(const Operator& op, const ItoExpression& e);
  friend ItoExpression operator*(const ItoExpression& e, const Operator& op);

 private:
  void check_compatible(const ItoExpression& other, const char* what) const;
  void drop_exact_zeros();

  int channels_;
  int dim_;
  std::map<IncrementIndex, Operator> terms_;
};

ItoExpression operator+(ItoExpression a, const ItoExpression& b);
ItoExpression operator-(ItoExpression a, const ItoExpression& b);
ItoExpression operator*(cplx s, ItoExpression e);

/// Bilinear product under the quantum Itô table.
ItoExpression ito_product(const ItoExpression& x, const ItoExpression& y);

using ItoVector = std::vector<ItoExpression>;
using ItoTable = std::vector<std::vector<ItoExpression>>;

/// Output-field increments of an (S, L) system driven by vacuum inputs:
/// dA_out_i = sum_k S_ik dA_k + L_i dt and its adjoint.
ItoVector output_annihilation(const Eigen::MatrixXcd& S, const std::vector<Operator>& L);
ItoVector output_creation(const Eigen::MatrixXcd& S, const std::vector<Operator>& L);
/// Diagonal of the output gauge process,
/// dLambda_out_ii = sum S*_ik S_ik' dLambda_kk' + S*_ik L_i dA_k^dag + L_i^dag S_ik dA_k + L_i^dag L_i dt.
ItoVector output_counting(const Eigen::MatrixXcd& S, const std::vector<Operator>& L);

/// dY = F* dA_out^dag + F dA_out + G diag(dLambda_out).
/// Throws ConfigError for non-unitary S, ShapeError on mismatched shapes.
ItoVector build_dY(const Eigen::MatrixXcd& F, const Eigen::MatrixXcd& G,
                   const Eigen::MatrixXcd& S, const std::vector<Operator>& L);

/// Entry (i, j) = dY_i dY_j.
ItoTable product_table(const ItoVector& dY);

/// Max over pairs of the largest coefficient entry of table(i,j) - table(j,i).
double asymmetry(const ItoTable& table);
bool is_symmetric(const ItoTable& table, double tol);

/// a a^T - (a a^T)^T for a vector of increments.
ItoTable self_commutator(const ItoVector& a);
/// a a^T - (a a^T)^T for a vector of system operators.
std::vector<std::vector<Operator>> self_commutator(const std::vector<Operator>& a);

struct ProbeOptions {
  int probe_count = 8;
  int probe_dim = 4;
  double relative_tol = 1e-10;
};

/// Decides symmetry of dY dY^T for the measurement (F, G) by instantiating
/// random (S, L) systems: S Haar unitary, L_i Ginibre matrices on probe_dim.
bool probe_symmetric(const Eigen::MatrixXcd& F, const Eigen::MatrixXcd& G, Rng& rng,
                     const ProbeOptions& opts = {});

}  // namespace qfilter::ito
