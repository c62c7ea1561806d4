#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qfilter/errors.hpp"
#include "qfilter/network.hpp"
#include "support.hpp"

using namespace qfilter;
using namespace qfilter::network;
using qtest::max_abs;

namespace {

double model_distance(const SLHModel& x, const SLHModel& y) {
  REQUIRE(x.channels() == y.channels());
  double d = std::max(max_abs(x.S - y.S), max_abs(x.H - y.H));
  for (int i = 0; i < x.channels(); ++i) d = std::max(d, max_abs(x.L[i] - y.L[i]));
  return d;
}

SLHModel random_model(int n, int dim, Rng& rng) {
  SLHModel g{random_unitary(n, rng), {}, random_hermitian(dim, rng)};
  for (int i = 0; i < n; ++i) g.L.push_back(random_complex_matrix(dim, dim, rng));
  return g;
}

}  // namespace

TEST_CASE("concatenation") {
  const Operator a = hilbert::annihilation(3);
  const Operator H = hilbert::number_operator(3);
  const SLHModel g = concatenate(single_channel(a, H), passthrough(1, 3));
  CHECK(g.channels() == 2);
  CHECK(g.S == Eigen::MatrixXcd::Identity(2, 2));
  CHECK(g.L[0] == a);
  CHECK(g.L[1] == Operator::Zero(3, 3));
  CHECK(g.H == H);

  const SLHModel trivial = concatenate(passthrough(1, 1), passthrough(1, 1));
  CHECK(trivial.S == Eigen::MatrixXcd::Identity(2, 2));
  CHECK(trivial.L[0](0, 0) == cplx(0, 0));
  CHECK(trivial.H(0, 0) == cplx(0, 0));

  Rng rng = stream_for(31, 0);
  const auto big = concatenate(random_model(2, 2, rng), random_model(3, 2, rng));
  CHECK(big.channels() == 5);
  CHECK_THROWS_AS(concatenate(passthrough(1, 2), passthrough(1, 3)), ShapeError);
}

TEST_CASE("beam splitter") {
  CHECK(max_abs(beam_splitter(0.0, 0.0).S - Eigen::MatrixXcd::Identity(2, 2)) < 1e-15);

  Eigen::MatrixXcd full(2, 2);
  full << 0, kI, kI, 0;
  CHECK(max_abs(beam_splitter(1.0, 0.0).S - full) < 1e-15);

  const auto half = beam_splitter(std::sqrt(0.5), 0.0).S;
  CHECK(max_abs(half * half.adjoint() - Eigen::MatrixXcd::Identity(2, 2)) < 1e-14);

  const auto phased = beam_splitter(0.3, 0.7, 4);
  CHECK(phased.dim() == 4);
  CHECK(std::abs(phased.S(0, 0) - std::sqrt(1 - 0.09) * std::exp(kI * 0.7)) < 1e-15);
  CHECK(std::abs(phased.S(1, 0) - 0.3 * std::exp(kI * (0.7 + std::numbers::pi / 2))) < 1e-15);
  CHECK(phased.S(0, 1) == phased.S(1, 0));

  CHECK_THROWS_AS(beam_splitter(-0.1, 0.0), ConfigError);
  CHECK_THROWS_AS(beam_splitter(1.1, 0.0), ConfigError);
}

TEST_CASE("composite beam-splitter network") {
  Rng rng = stream_for(32, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 3;
    const Operator L = random_complex_matrix(dim, dim, rng);
    const Operator H = random_hermitian(dim, rng);
    const double r = qtest::uniform(rng, 0.0, 1.0);
    const double theta = qtest::uniform(rng, -std::numbers::pi, std::numbers::pi);
    const SLHModel g = beam_splitter_network(L, H, r, theta);
    const Eigen::MatrixXcd S_bs = beam_splitter(r, theta).S;
    CHECK(max_abs(g.S - S_bs) == 0.0);
    CHECK(max_abs(g.L[0] - S_bs(0, 0) * L) < 1e-15);
    CHECK(max_abs(g.L[1] - S_bs(1, 0) * L) < 1e-15);
    CHECK(max_abs(g.H - H) == 0.0);
  }
}

TEST_CASE("series with a passthrough is the identity") {
  Rng rng = stream_for(33, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const SLHModel g = random_model(2, 3, rng);
    CHECK(model_distance(series(g, passthrough(2, 3)), g) < 1e-14);
    CHECK(model_distance(series(passthrough(2, 3), g), g) < 1e-14);
  }
}

TEST_CASE("Hamiltonian correction of the series product") {
  Rng rng = stream_for(34, 0);
  const SLHModel g1 = random_model(2, 3, rng);
  SLHModel g2 = random_model(2, 3, rng);
  for (auto& l : g2.L) l.setZero();
  CHECK(max_abs(series(g1, g2).H - (g1.H + g2.H)) < 1e-14);

  // Sign convention: (1, a) into (1, i a) gives H = (L2^dag L1 - L1^dag L2) / 2i = -a^dag a.
  const Operator a = hilbert::annihilation(4);
  const Operator zero = Operator::Zero(4, 4);
  const SLHModel cascade = series(single_channel(a, zero), single_channel(kI * a, zero));
  CHECK(max_abs(cascade.H + hilbert::number_operator(4)) < 1e-14);
  CHECK(max_abs(cascade.L[0] - (1.0 + kI) * a) < 1e-14);
}

TEST_CASE("composition preserves unitarity and hermiticity") {
  Rng rng = stream_for(35, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    const auto g1 = random_model(n, 3, rng);
    const auto g2 = random_model(n, 3, rng);
    const auto s = series(g1, g2);
    CHECK_NOTHROW(validate(s));
    CHECK(max_abs(s.S * s.S.adjoint() - Eigen::MatrixXcd::Identity(n, n)) < 1e-12);
    CHECK(hilbert::hermiticity_violation(s.H) < 1e-12);
    CHECK_NOTHROW(validate(concatenate(g1, g2)));
  }
}

TEST_CASE("series is associative and concatenation is associative") {
  Rng rng = stream_for(36, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    const auto g1 = random_model(n, 2, rng);
    const auto g2 = random_model(n, 2, rng);
    const auto g3 = random_model(n, 2, rng);
    CHECK(model_distance(series(series(g1, g2), g3), series(g1, series(g2, g3))) < 1e-12);
    const auto c1 = random_model(1, 2, rng);
    CHECK(model_distance(concatenate(concatenate(c1, g2), g3), concatenate(c1, concatenate(g2, g3))) <
          1e-14);
  }
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(series(passthrough(1, 2), passthrough(2, 2)), ShapeError);
  CHECK_THROWS_AS(series(passthrough(1, 2), passthrough(1, 3)), ShapeError);

  SLHModel bad = passthrough(2, 2);
  bad.S(0, 1) = 0.1;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  SLHModel skew = passthrough(1, 2);
  skew.H(0, 1) = 1.0;
  CHECK_THROWS_AS(validate(skew), ConfigError);

  SLHModel wrong = passthrough(1, 2);
  wrong.L[0] = Operator::Zero(3, 3);
  CHECK_THROWS_AS(validate(wrong), ShapeError);
  CHECK_THROWS_AS(passthrough(0, 2), ShapeError);
}
