#include "qfilter/ito.hpp"

#include <algorithm>
#include <string>

#include "qfilter/errors.hpp"

namespace qfilter::ito {

namespace {

constexpr double kUnitarityTol = 1e-10;

void require_index(int channels, int k, int l) {
  if (k < 0 || l < 0 || k > channels || l > channels) {
    throw ShapeError("increment index (" + std::to_string(k) + "," + std::to_string(l) +
                     ") outside 0.." + std::to_string(channels));
  }
}

}  // namespace

ItoExpression::ItoExpression(int channels, int dim) : channels_(channels), dim_(dim) {
  if (channels < 0) throw ShapeError("negative channel count");
  if (dim < 1) throw InvalidDimension("Itô coefficients need dim >= 1");
}

ItoExpression ItoExpression::increment(int channels, int k, int l, const Operator& coeff) {
  if (!hilbert::is_square(coeff)) throw ShapeError("Itô coefficient must be square");
  ItoExpression e(channels, static_cast<int>(coeff.rows()));
  e.add_term(k, l, coeff);
  return e;
}

ItoExpression ItoExpression::increment(int channels, int dim, int k, int l, cplx coeff) {
  return increment(channels, k, l, coeff * Operator::Identity(dim, dim));
}

void ItoExpression::add_term(int k, int l, const Operator& coeff) {
  require_index(channels_, k, l);
  if (coeff.rows() != dim_ || coeff.cols() != dim_) {
    throw ShapeError("Itô coefficient dimension mismatch");
  }
  auto [it, inserted] = terms_.try_emplace({k, l}, coeff);
  if (!inserted) it->second += coeff;
  if (it->second.isZero(0.0)) terms_.erase(it);
}

Operator ItoExpression::coefficient(int k, int l) const {
  require_index(channels_, k, l);
  const auto it = terms_.find({k, l});
  if (it == terms_.end()) return Operator::Zero(dim_, dim_);
  return it->second;
}

bool ItoExpression::is_zero(double tol) const {
  return std::all_of(terms_.begin(), terms_.end(), [tol](const auto& kv) {
    return kv.second.cwiseAbs().maxCoeff() <= tol;
  });
}

double ItoExpression::scale() const {
  double s = 0.0;
  for (const auto& [idx, c] : terms_) s = std::max(s, c.cwiseAbs().maxCoeff());
  return s;
}

void ItoExpression::check_compatible(const ItoExpression& other, const char* what) const {
  if (channels_ != other.channels_ || dim_ != other.dim_) {
    throw ShapeError(std::string(what) + ": incompatible Itô expressions");
  }
}

void ItoExpression::drop_exact_zeros() {
  std::erase_if(terms_, [](const auto& kv) { return kv.second.isZero(0.0); });
}

ItoExpression& ItoExpression::operator+=(const ItoExpression& other) {
  check_compatible(other, "sum");
  for (const auto& [idx, c] : other.terms_) add_term(idx.first, idx.second, c);
  return *this;
}

ItoExpression& ItoExpression::operator-=(const ItoExpression& other) {
  check_compatible(other, "difference");
  for (const auto& [idx, c] : other.terms_) add_term(idx.first, idx.second, -c);
  return *this;
}

ItoExpression& ItoExpression::operator*=(cplx s) {
  for (auto& [idx, c] : terms_) c *= s;
  drop_exact_zeros();
  return *this;
}

ItoExpression operator*(const Operator& op, const ItoExpression& e) {
  if (op.rows() != e.dim_ || op.cols() != e.dim_) throw ShapeError("operator * Itô: dim mismatch");
  ItoExpression out(e.channels_, e.dim_);
  for (const auto& [idx, c] : e.terms_) out.add_term(idx.first, idx.second, op * c);
  return out;
}

ItoExpression operator*(const ItoExpression& e, const Operator& op) {
  if (op.rows() != e.dim_ || op.cols() != e.dim_) throw ShapeError("Itô * operator: dim mismatch");
  ItoExpression out(e.channels_, e.dim_);
  for (const auto& [idx, c] : e.terms_) out.add_term(idx.first, idx.second, c * op);
  return out;
}

ItoExpression operator+(ItoExpression a, const ItoExpression& b) { return a += b; }
ItoExpression operator-(ItoExpression a, const ItoExpression& b) { return a -= b; }
ItoExpression operator*(cplx s, ItoExpression e) { return e *= s; }

ItoExpression ito_product(const ItoExpression& x, const ItoExpression& y) {
  if (x.channels() != y.channels() || x.dim() != y.dim()) {
    throw ShapeError("ito_product: incompatible Itô expressions");
  }
  ItoExpression out(x.channels(), x.dim());
  for (const auto& [xi, xc] : x.terms()) {
    const auto [k, r] = xi;
    if (r == 0) continue;
    for (const auto& [yi, yc] : y.terms()) {
      const auto [s, l] = yi;
      if (s != r) continue;
      out.add_term(k, l, xc * yc);
    }
  }
  return out;
}

namespace {

struct Shapes {
  int n;
  int dim;
};

Shapes validate_system(const Eigen::MatrixXcd& S, const std::vector<Operator>& L) {
  const auto n = static_cast<int>(L.size());
  if (n < 1) throw ShapeError("need at least one channel");
  if (S.rows() != n || S.cols() != n) {
    throw ShapeError("scattering matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  const auto dim = static_cast<int>(L.front().rows());
  for (const auto& l : L) {
    if (l.rows() != dim || l.cols() != dim) throw ShapeError("coupling operators differ in dim");
  }
  const double unit_err =
      (S * S.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (unit_err > kUnitarityTol) {
    throw ConfigError("scattering matrix is not unitary (error " + std::to_string(unit_err) + ")");
  }
  return {n, dim};
}

}  // namespace

ItoVector output_annihilation(const Eigen::MatrixXcd& S, const std::vector<Operator>& L) {
  const auto [n, dim] = validate_system(S, L);
  ItoVector out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    ItoExpression e(n, dim);
    for (int k = 0; k < n; ++k) e.add_term(0, k + 1, S(i, k) * Operator::Identity(dim, dim));
    e.add_term(0, 0, L[i]);
    out.push_back(std::move(e));
  }
  return out;
}

ItoVector output_creation(const Eigen::MatrixXcd& S, const std::vector<Operator>& L) {
  const auto [n, dim] = validate_system(S, L);
  ItoVector out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    ItoExpression e(n, dim);
    for (int k = 0; k < n; ++k) {
      e.add_term(k + 1, 0, std::conj(S(i, k)) * Operator::Identity(dim, dim));
    }
    e.add_term(0, 0, L[i].adjoint());
    out.push_back(std::move(e));
  }
  return out;
}

ItoVector output_counting(const Eigen::MatrixXcd& S, const std::vector<Operator>& L) {
  const auto [n, dim] = validate_system(S, L);
  const Operator id = Operator::Identity(dim, dim);
  ItoVector out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    ItoExpression e(n, dim);
    for (int k = 0; k < n; ++k) {
      for (int kp = 0; kp < n; ++kp) {
        e.add_term(k + 1, kp + 1, std::conj(S(i, k)) * S(i, kp) * id);
      }
      e.add_term(k + 1, 0, std::conj(S(i, k)) * L[i]);
      e.add_term(0, k + 1, S(i, k) * L[i].adjoint());
    }
    e.add_term(0, 0, L[i].adjoint() * L[i]);
    out.push_back(std::move(e));
  }
  return out;
}

ItoVector build_dY(const Eigen::MatrixXcd& F, const Eigen::MatrixXcd& G,
                   const Eigen::MatrixXcd& S, const std::vector<Operator>& L) {
  const auto n = static_cast<Eigen::Index>(L.size());
  if (F.rows() != n || F.cols() != n || G.rows() != n || G.cols() != n) {
    throw ShapeError("F and G must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  const ItoVector a_out = output_annihilation(S, L);
  const ItoVector a_out_dag = output_creation(S, L);
  const ItoVector counts = output_counting(S, L);
  const int dim = a_out.front().dim();

  ItoVector dY;
  dY.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ItoExpression y(static_cast<int>(n), dim);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (F(i, j) != 0.0) {
        y += std::conj(F(i, j)) * a_out_dag[j];
        y += F(i, j) * a_out[j];
      }
      if (G(i, j) != 0.0) y += G(i, j) * counts[j];
    }
    dY.push_back(std::move(y));
  }
  return dY;
}

ItoTable product_table(const ItoVector& dY) {
  ItoTable table;
  table.reserve(dY.size());
  for (const auto& yi : dY) {
    std::vector<ItoExpression> row;
    row.reserve(dY.size());
    for (const auto& yj : dY) row.push_back(ito_product(yi, yj));
    table.push_back(std::move(row));
  }
  return table;
}

double asymmetry(const ItoTable& table) {
  double worst = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].size() != table.size()) throw ShapeError("Itô table must be square");
    for (std::size_t j = i + 1; j < table.size(); ++j) {
      worst = std::max(worst, (table[i][j] - table[j][i]).scale());
    }
  }
  return worst;
}

bool is_symmetric(const ItoTable& table, double tol) { return asymmetry(table) <= tol; }

ItoTable self_commutator(const ItoVector& a) {
  ItoTable out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<ItoExpression> row;
    for (std::size_t j = 0; j < a.size(); ++j) {
      row.push_back(ito_product(a[i], a[j]) - ito_product(a[j], a[i]));
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<std::vector<Operator>> self_commutator(const std::vector<Operator>& a) {
  std::vector<std::vector<Operator>> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) out[i].push_back(a[i] * a[j] - a[j] * a[i]);
  }
  return out;
}

bool probe_symmetric(const Eigen::MatrixXcd& F, const Eigen::MatrixXcd& G, Rng& rng,
                     const ProbeOptions& opts) {
  if (F.rows() != F.cols() || G.rows() != G.cols() || F.rows() != G.rows()) {
    throw ShapeError("F and G must be square with equal shapes");
  }
  const auto n = static_cast<int>(F.rows());
  if (n == 0) return true;
  for (int p = 0; p < opts.probe_count; ++p) {
    const Eigen::MatrixXcd S = random_unitary(n, rng);
    std::vector<Operator> L;
    L.reserve(n);
    for (int i = 0; i < n; ++i) L.push_back(random_complex_matrix(opts.probe_dim, opts.probe_dim, rng));
    const ItoTable table = product_table(build_dY(F, G, S, L));
    double scale = 1.0;
    for (const auto& row : table) {
      for (const auto& e : row) scale = std::max(scale, e.scale());
    }
    if (!is_symmetric(table, opts.relative_tol * scale)) return false;
  }
  return true;
}

}  // namespace qfilter::ito
