#include "qfilter/rng.hpp"

namespace qfilter {

Rng stream_for(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x51f15eedU};
  return Rng(seq);
}

Eigen::MatrixXcd random_complex_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = cplx(re, im);
    }
  }
  return m;
}

Eigen::MatrixXcd random_unitary(int n, Rng& rng) {
  const Eigen::MatrixXcd g = random_complex_matrix(n, n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase freedom of QR so that q is Haar distributed.
  for (int j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

Operator random_hermitian(int dim, Rng& rng) {
  const Operator g = random_complex_matrix(dim, dim, rng);
  return 0.5 * (g + g.adjoint());
}

StateVector random_state(int dim, Rng& rng) {
  StateVector psi = random_complex_matrix(dim, 1, rng);
  return psi / psi.norm();
}

DensityOperator random_density(int dim, Rng& rng) {
  const Operator g = random_complex_matrix(dim, dim, rng);
  DensityOperator rho = g * g.adjoint();
  return rho / rho.trace().real();
}

}  // namespace qfilter
