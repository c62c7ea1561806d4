#include <doctest.h>

#include "qfilter/errors.hpp"
#include "qfilter/ito.hpp"
#include "support.hpp"

using namespace qfilter;
using namespace qfilter::ito;
using qtest::max_abs;

namespace {

ItoExpression dA(int n, int dim, int k) { return ItoExpression::increment(n, dim, 0, k); }
ItoExpression dAdag(int n, int dim, int k) { return ItoExpression::increment(n, dim, k, 0); }
ItoExpression dLambda(int n, int dim, int k, int l) { return ItoExpression::increment(n, dim, k, l); }
ItoExpression dt(int n, int dim) { return ItoExpression::increment(n, dim, 0, 0); }

double difference(const ItoExpression& x, const ItoExpression& y) { return (x - y).scale(); }

ItoExpression random_expression(int n, int dim, Rng& rng) {
  ItoExpression e(n, dim);
  for (int k = 0; k <= n; ++k) {
    for (int l = 0; l <= n; ++l) {
      if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) continue;
      e.add_term(k, l, random_complex_matrix(dim, dim, rng));
    }
  }
  return e;
}

std::vector<Operator> random_couplings(int n, int dim, Rng& rng) {
  std::vector<Operator> L;
  for (int i = 0; i < n; ++i) L.push_back(random_complex_matrix(dim, dim, rng));
  return L;
}

}  // namespace

TEST_CASE("Itô table on the fundamental increments") {
  const ItoExpression prod = ito_product(dA(1, 1, 1), dAdag(1, 1, 1));
  CHECK(prod.terms().size() == 1);
  CHECK(prod.dt_coefficient()(0, 0) == cplx(1, 0));

  CHECK(ito_product(dAdag(1, 1, 1), dA(1, 1, 1)).empty());
  CHECK(ito_product(dt(2, 1), dA(2, 1, 1)).empty());
  CHECK(ito_product(dA(2, 1, 2), dt(2, 1)).empty());
  CHECK(ito_product(dt(2, 1), dt(2, 1)).empty());

  // gauge increments: dLambda_kr dLambda_sl = delta(r, s) dLambda_kl
  CHECK(difference(ito_product(dLambda(2, 1, 1, 2), dLambda(2, 1, 2, 1)), dLambda(2, 1, 1, 1)) == 0.0);
  CHECK(ito_product(dLambda(2, 1, 1, 2), dLambda(2, 1, 1, 2)).empty());
  CHECK(difference(ito_product(dA(2, 1, 2), dLambda(2, 1, 2, 1)), dA(2, 1, 1)) == 0.0);
  CHECK(difference(ito_product(dLambda(2, 1, 1, 2), dAdag(2, 1, 2)), dAdag(2, 1, 1)) == 0.0);
  // channels do not mix
  CHECK(ito_product(dA(2, 1, 1), dAdag(2, 1, 2)).empty());
}

TEST_CASE("normalized form stores no zero coefficients") {
  ItoExpression e = dA(1, 2, 1) - dA(1, 2, 1);
  CHECK(e.empty());
  e.add_term(0, 0, Operator::Zero(2, 2));
  CHECK(e.empty());
  CHECK(e.coefficient(0, 1) == Operator::Zero(2, 2));
  CHECK_THROWS_AS(ItoExpression::increment(1, 2, 2, 0), ShapeError);
  CHECK_THROWS_AS(e.add_term(0, 0, Operator::Identity(3, 3)), ShapeError);
  CHECK_THROWS_AS(ito_product(dA(1, 2, 1), dA(2, 2, 1)), ShapeError);
}

TEST_CASE("coefficients multiply left to right") {
  Rng rng = stream_for(11, 0);
  const Operator X = random_complex_matrix(3, 3, rng);
  const Operator Y = random_complex_matrix(3, 3, rng);
  const ItoExpression prod = ito_product(X * dA(1, 3, 1), Y * dAdag(1, 3, 1));
  CHECK(max_abs(prod.dt_coefficient() - X * Y) < 1e-13);
}

TEST_CASE("ito_product is bilinear and associative") {
  Rng rng = stream_for(12, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    const int dim = 2;
    const auto x = random_expression(n, dim, rng);
    const auto y = random_expression(n, dim, rng);
    const auto z = random_expression(n, dim, rng);
    const cplx s{0.3, -1.2};
    CHECK(difference(ito_product(x + y, z), ito_product(x, z) + ito_product(y, z)) < 1e-11);
    CHECK(difference(ito_product(x, y + z), ito_product(x, y) + ito_product(x, z)) < 1e-11);
    CHECK(difference(ito_product(s * x, y), s * ito_product(x, y)) < 1e-11);
    CHECK(difference(ito_product(ito_product(x, y), z), ito_product(x, ito_product(y, z))) < 1e-10);
    // dt annihilates everything, including itself
    CHECK(ito_product(dt(n, dim), x).empty());
    CHECK(ito_product(x, dt(n, dim)).empty());
  }
}

TEST_CASE("build_dY single-channel reductions") {
  Rng rng = stream_for(13, 0);
  const Operator L = random_complex_matrix(3, 3, rng);
  const Eigen::MatrixXcd one = Eigen::MatrixXcd::Identity(1, 1);
  const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(1, 1);

  const auto homodyne = build_dY(one, zero, one, {L});
  const ItoExpression expected_h =
      Operator(L + L.adjoint()) * dt(1, 3) + dA(1, 3, 1) + dAdag(1, 3, 1);
  CHECK(difference(homodyne[0], expected_h) < 1e-14);

  const auto counting = build_dY(zero, one, one, {L});
  const ItoExpression expected_c = dLambda(1, 3, 1, 1) + L * dAdag(1, 3, 1) +
                                   Operator(L.adjoint()) * dA(1, 3, 1) +
                                   Operator(L.adjoint() * L) * dt(1, 3);
  CHECK(difference(counting[0], expected_c) < 1e-14);

  // counting is idempotent: dN dN = dN
  CHECK(difference(ito_product(counting[0], counting[0]), counting[0]) < 1e-12);

  const auto nothing = build_dY(Eigen::MatrixXcd::Zero(2, 2), Eigen::MatrixXcd::Zero(2, 2),
                                Eigen::MatrixXcd::Identity(2, 2), random_couplings(2, 3, rng));
  REQUIRE(nothing.size() == 2);
  CHECK(nothing[0].empty());
  CHECK(nothing[1].empty());
}

TEST_CASE("build_dY rejects bad inputs") {
  const Eigen::MatrixXcd I2 = Eigen::MatrixXcd::Identity(2, 2);
  std::vector<Operator> L(2, Operator::Identity(2, 2));
  Eigen::MatrixXcd S = I2;
  S(0, 1) = 0.5;
  CHECK_THROWS_AS(build_dY(I2, I2, S, L), ConfigError);
  CHECK_THROWS_AS(build_dY(Eigen::MatrixXcd::Identity(3, 3), I2, I2, L), ShapeError);
  CHECK_THROWS_AS(build_dY(I2, I2, I2, {Operator::Identity(2, 2)}), ShapeError);
}

TEST_CASE("homodyne pair table is dt times the identity") {
  Rng rng = stream_for(14, 0);
  const Eigen::MatrixXcd I2 = Eigen::MatrixXcd::Identity(2, 2);
  const auto table = product_table(build_dY(I2, Eigen::MatrixXcd::Zero(2, 2), I2,
                                            random_couplings(2, 3, rng)));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const ItoExpression expected = i == j ? dt(2, 3) : ItoExpression(2, 3);
      CHECK(difference(table[i][j], expected) < 1e-12);
    }
  }
  CHECK(is_symmetric(table, 1e-10));
}

TEST_CASE("off-diagonal output products vanish for unitary S") {
  Rng rng = stream_for(15, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 2;
    const auto S = random_unitary(n, rng);
    const auto L = random_couplings(n, 2, rng);
    const auto a = output_annihilation(S, L);
    const auto adag = output_creation(S, L);
    const auto lam = output_counting(S, L);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        CHECK(ito_product(a[i], adag[j]).is_zero(1e-12));
        CHECK(ito_product(lam[i], lam[j]).is_zero(1e-12));
        CHECK(ito_product(a[i], lam[j]).is_zero(1e-12));
        CHECK(ito_product(lam[i], adag[j]).is_zero(1e-12));
      }
      CHECK(difference(ito_product(a[i], adag[i]), dt(n, 2)) < 1e-12);
    }
    const auto homodyne = product_table(
        build_dY(Eigen::MatrixXcd::Identity(n, n), Eigen::MatrixXcd::Zero(n, n), S, L));
    const auto counting = product_table(
        build_dY(Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Identity(n, n), S, L));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        CHECK(homodyne[i][j].is_zero(1e-12));
        CHECK(counting[i][j].is_zero(1e-12));
      }
    }
  }
}

TEST_CASE("counting table diagonal reproduces the counting increment") {
  Rng rng = stream_for(16, 0);
  const int n = 2;
  const auto L = random_couplings(n, 3, rng);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  const auto dY = build_dY(Eigen::MatrixXcd::Zero(n, n), I, I, L);
  const auto table = product_table(dY);
  for (int i = 0; i < n; ++i) {
    CHECK(difference(table[i][i], dY[i]) < 1e-12);
    // the gauge part: dLambda_ii with unit coefficient, nothing on other gauge slots
    CHECK(table[i][i].coefficient(i + 1, i + 1) == Operator::Identity(3, 3));
    CHECK(max_abs(table[i][i].coefficient(i + 1, 0) - L[i]) < 1e-14);
  }
}

TEST_CASE("self-commutator of (dA, dA^dagger)") {
  const ItoVector a{dA(1, 1, 1), dAdag(1, 1, 1)};
  const ItoTable c = self_commutator(a);
  CHECK(c[0][0].empty());
  CHECK(c[1][1].empty());
  CHECK(difference(c[0][1], dt(1, 1)) == 0.0);
  CHECK(difference(c[1][0], -1.0 * dt(1, 1)) == 0.0);

  // truncated Fock version: [[0, [a, a^dag]], [-[a, a^dag], 0]]
  const int dim = 6;
  const auto ops = self_commutator({hilbert::annihilation(dim), hilbert::creation(dim)});
  Operator id_block = Operator::Identity(dim - 1, dim - 1);
  CHECK(max_abs(ops[0][0]) == 0.0);
  CHECK(max_abs(ops[1][1]) == 0.0);
  CHECK(max_abs(ops[0][1].topLeftCorner(dim - 1, dim - 1) - id_block) < 1e-13);
  CHECK(max_abs(ops[1][0].topLeftCorner(dim - 1, dim - 1) + id_block) < 1e-13);
}

TEST_CASE("is_symmetric on the worked examples") {
  Rng rng = stream_for(17, 0);
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(2, 2);
  F(1, 0) = 1.0;
  G(0, 0) = 1.0;
  const auto S = random_unitary(2, rng);
  const auto table = product_table(build_dY(F, G, S, random_couplings(2, 3, rng)));
  CHECK_FALSE(is_symmetric(table, 1e-10));
  CHECK_FALSE(probe_symmetric(F, G, rng));

  CHECK(probe_symmetric(Eigen::MatrixXcd::Identity(2, 2), Eigen::MatrixXcd::Zero(2, 2), rng));
  Eigen::MatrixXcd Fd = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd Gd = Eigen::MatrixXcd::Zero(2, 2);
  Fd(0, 0) = 1.0;
  Gd(1, 1) = 1.0;
  CHECK(probe_symmetric(Fd, Gd, rng));

  CHECK(is_symmetric(ItoTable{}, 0.0));
  CHECK(probe_symmetric(Eigen::MatrixXcd(0, 0), Eigen::MatrixXcd(0, 0), rng));
}
