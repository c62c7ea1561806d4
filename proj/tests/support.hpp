#pragma once

// Hand-rolled generators shared by the unit tests.

#include <array>
#include <random>

#include "qfilter/commute.hpp"
#include "qfilter/rng.hpp"

namespace qtest {

using qfilter::cplx;
using qfilter::Rng;

inline double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Entry drawn uniformly from {0, 1, -1, i, -i}.
inline cplx unit_entry(Rng& rng) {
  static const std::array<cplx, 5> values{cplx{0, 0}, cplx{1, 0}, cplx{-1, 0}, cplx{0, 1},
                                          cplx{0, -1}};
  return values[std::uniform_int_distribution<int>(0, 4)(rng)];
}

inline Eigen::MatrixXcd unit_entry_matrix(int n, Rng& rng) {
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) m(i, k) = unit_entry(rng);
  }
  return m;
}

inline qfilter::commute::MeasurementSpec random_spec(int n, Rng& rng) {
  Eigen::MatrixXcd F = unit_entry_matrix(n, rng);
  Eigen::MatrixXcd G = unit_entry_matrix(n, rng);
  return {F, G};
}

inline Eigen::MatrixXcd random_real_matrix(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) m(i, k) = normal(rng);
  }
  return m;
}

inline Eigen::MatrixXcd permutation(int n, Rng& rng) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) P(i, p[i]) = 1.0;
  return P;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace qtest
