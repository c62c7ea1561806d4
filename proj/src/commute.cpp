#include "qfilter/commute.hpp"

#include <algorithm>
#include <sstream>

#include "qfilter/errors.hpp"
#include "qfilter/ito.hpp"

namespace qfilter::commute {

namespace {

double asym(const Eigen::MatrixXcd& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0);
}

Eigen::MatrixXcd symplectic_form(const Eigen::MatrixXcd& left1, const Eigen::MatrixXcd& left2,
                                 const Eigen::MatrixXcd& right1, const Eigen::MatrixXcd& right2) {
  // [left1 left2] [[0, I], [-I, 0]] [right1; right2]
  return left1 * right2 - left2 * right1;
}

}  // namespace

void validate(const MeasurementSpec& spec) {
  const auto& F = spec.F;
  const auto& G = spec.G;
  if (F.rows() != F.cols()) throw ShapeError("F must be square");
  if (G.rows() != G.cols()) throw ShapeError("G must be square");
  if (F.rows() != G.rows()) throw ShapeError("F and G must have the same shape");
}

double default_tolerance(const MeasurementSpec& spec) {
  const double scale = std::max({1.0, spectral_norm(spec.F), spectral_norm(spec.G)});
  return 1e-10 * scale * scale;
}

CommutativityReport check_self_commutative(const MeasurementSpec& spec, std::optional<double> tol) {
  validate(spec);
  CommutativityReport report;
  report.tolerance = tol.value_or(default_tolerance(spec));
  if (!(report.tolerance > 0.0)) throw ConfigError("tolerance must be positive");

  const Eigen::MatrixXcd& F = spec.F;
  const Eigen::MatrixXcd& G = spec.G;
  const auto n = F.rows();
  if (n == 0) {
    report.commutative = report.condition_F = report.condition_GFstar = report.condition_GF = true;
    report.summed_GFstar = report.summed_GF = true;
    return report;
  }

  report.violation_norms[0] = asym(F * F.adjoint());
  double gf_star = 0.0;
  double gf = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    const Eigen::VectorXcd f = F.col(a);
    const Eigen::VectorXcd g = G.col(a);
    gf_star = std::max(gf_star, asym(g * f.adjoint()));
    gf = std::max(gf, asym(g * f.transpose()));
  }
  report.violation_norms[1] = gf_star;
  report.violation_norms[2] = gf;

  report.condition_F = report.violation_norms[0] <= report.tolerance;
  report.condition_GFstar = report.violation_norms[1] <= report.tolerance;
  report.condition_GF = report.violation_norms[2] <= report.tolerance;
  report.commutative = report.condition_F && report.condition_GFstar && report.condition_GF;

  report.summed_GFstar = asym(G * F.adjoint()) <= report.tolerance;
  report.summed_GF = asym(G * F.transpose()) <= report.tolerance;

  const Eigen::MatrixXcd Fc = F.conjugate();
  report.symplectic_norms[0] =
      symplectic_form(F, Fc, F.transpose(), F.adjoint()).cwiseAbs().maxCoeff();
  report.symplectic_norms[1] =
      symplectic_form(G, Fc, G.transpose(), F.adjoint()).cwiseAbs().maxCoeff();
  report.symplectic_norms[2] =
      symplectic_form(G, F, G.transpose(), F.transpose()).cwiseAbs().maxCoeff();
  return report;
}

bool cross_validate(const MeasurementSpec& spec, int trials, Rng& rng) {
  if (trials < 1) throw ConfigError("cross_validate needs trials >= 1");
  const bool closed_form = check_self_commutative(spec).commutative;
  for (int t = 0; t < trials; ++t) {
    ito::ProbeOptions opts;
    opts.probe_count = 1;
    const bool oracle = ito::probe_symmetric(spec.F, spec.G, rng, opts);
    if (oracle != closed_form) {
      std::ostringstream msg;
      msg << "closed form says " << (closed_form ? "commutative" : "non-commutative")
          << " but the Itô table is " << (oracle ? "symmetric" : "asymmetric") << " on trial " << t
          << "\nF =\n"
          << spec.F << "\nG =\n"
          << spec.G;
      throw OracleMismatch(msg.str());
    }
  }
  return true;
}

MeasurementSpec homodyne_pair() {
  return {Eigen::MatrixXcd::Identity(2, 2), Eigen::MatrixXcd::Zero(2, 2)};
}

MeasurementSpec homodyne_and_count() {
  MeasurementSpec spec{Eigen::MatrixXcd::Zero(2, 2), Eigen::MatrixXcd::Zero(2, 2)};
  spec.F(0, 0) = 1.0;
  spec.G(1, 1) = 1.0;
  return spec;
}

MeasurementSpec same_channel_homodyne_and_count() {
  MeasurementSpec spec{Eigen::MatrixXcd::Zero(2, 2), Eigen::MatrixXcd::Zero(2, 2)};
  spec.F(1, 0) = 1.0;
  spec.G(0, 0) = 1.0;
  return spec;
}

}  // namespace qfilter::commute
