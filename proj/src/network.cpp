#include "qfilter/network.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qfilter/errors.hpp"

namespace qfilter::network {

void validate(const SLHModel& model) {
  const auto n = model.channels();
  if (!hilbert::is_square(model.H)) throw ShapeError("H must be a square operator");
  if (model.S.rows() != n || model.S.cols() != n) {
    throw ShapeError("S must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  for (const auto& l : model.L) {
    if (l.rows() != model.dim() || l.cols() != model.dim()) {
      throw ShapeError("coupling operator dimension differs from H");
    }
  }
  const auto id = Eigen::MatrixXcd::Identity(n, n);
  const double unit_err = std::max((model.S * model.S.adjoint() - id).cwiseAbs().maxCoeff(),
                                   (model.S.adjoint() * model.S - id).cwiseAbs().maxCoeff());
  if (n > 0 && unit_err > kUnitarityTol) {
    throw ConfigError("scattering matrix is not unitary (error " + std::to_string(unit_err) + ")");
  }
  if (!hilbert::is_hermitian(model.H, kHermiticityTol)) throw ConfigError("H is not Hermitian");
}

SLHModel passthrough(int channels, int dim) {
  if (channels < 1) throw ShapeError("need at least one channel");
  return {Eigen::MatrixXcd::Identity(channels, channels),
          std::vector<Operator>(channels, Operator::Zero(dim, dim)), Operator::Zero(dim, dim)};
}

SLHModel single_channel(const Operator& L, const Operator& H) {
  SLHModel g{Eigen::MatrixXcd::Identity(1, 1), {L}, H};
  validate(g);
  return g;
}

SLHModel concatenate(const SLHModel& g1, const SLHModel& g2) {
  validate(g1);
  validate(g2);
  if (g1.dim() != g2.dim()) {
    throw ShapeError("concatenate: Hilbert dimensions differ (" + std::to_string(g1.dim()) +
                     " vs " + std::to_string(g2.dim()) + ")");
  }
  const int n1 = g1.channels();
  const int n2 = g2.channels();
  SLHModel out;
  out.S = Eigen::MatrixXcd::Zero(n1 + n2, n1 + n2);
  out.S.topLeftCorner(n1, n1) = g1.S;
  out.S.bottomRightCorner(n2, n2) = g2.S;
  out.L = g1.L;
  out.L.insert(out.L.end(), g2.L.begin(), g2.L.end());
  out.H = g1.H + g2.H;
  return out;
}

SLHModel series(const SLHModel& g1, const SLHModel& g2) {
  validate(g1);
  validate(g2);
  if (g1.channels() != g2.channels()) {
    throw ShapeError("series: channel counts differ (" + std::to_string(g1.channels()) + " vs " +
                     std::to_string(g2.channels()) + ")");
  }
  if (g1.dim() != g2.dim()) throw ShapeError("series: Hilbert dimensions differ");
  const int n = g1.channels();
  const int dim = g1.dim();

  SLHModel out;
  out.S = g2.S * g1.S;
  out.L.assign(n, Operator::Zero(dim, dim));
  // (S2 L1)_i = sum_k S2_ik L1_k
  for (int i = 0; i < n; ++i) {
    out.L[i] = g2.L[i];
    for (int k = 0; k < n; ++k) out.L[i] += g2.S(i, k) * g1.L[k];
  }
  // L2^dag S2 L1 = sum_{i,k} L2_i^dag S2_ik L1_k
  Operator cross = Operator::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) cross += g2.S(i, k) * (g2.L[i].adjoint() * g1.L[k]);
  }
  out.H = g1.H + g2.H + (cross - cross.adjoint()) / (2.0 * kI);
  return out;
}

SLHModel beam_splitter(double r, double theta, int dim) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw ConfigError("beam splitter reflectivity must lie in [0, 1], got " + std::to_string(r));
  }
  const double t = std::sqrt(1.0 - r * r);
  const cplx through = t * std::exp(kI * theta);
  const cplx reflect = r * std::exp(kI * (theta + std::numbers::pi / 2.0));
  SLHModel bs = passthrough(2, dim);
  bs.S << through, reflect, reflect, through;
  return bs;
}

SLHModel beam_splitter_network(const Operator& L, const Operator& H, double r, double theta) {
  const int dim = static_cast<int>(H.rows());
  const SLHModel system = single_channel(L, H);
  const SLHModel vacuum = passthrough(1, dim);
  return series(concatenate(system, vacuum), beam_splitter(r, theta, dim));
}

}  // namespace qfilter::network
