#pragma once

#include <cstdint>
#include <random>

#include "qfilter/hilbert.hpp"

namespace qfilter {

using Rng = std::mt19937_64;

/// Independent generator for work item `index` of a run seeded with `seed`.
/// The stream depends only on the pair, never on scheduling order.
Rng stream_for(std::uint64_t seed, std::uint64_t index);

/// Matrix with i.i.d. standard-normal real and imaginary parts.
Eigen::MatrixXcd random_complex_matrix(int rows, int cols, Rng& rng);

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
Eigen::MatrixXcd random_unitary(int n, Rng& rng);

/// Random Hermitian matrix (G + G^dagger) / 2.
Operator random_hermitian(int dim, Rng& rng);

/// Random pure state, uniformly distributed on the unit sphere.
StateVector random_state(int dim, Rng& rng);

/// Random full-rank density operator G G^dagger / tr(G G^dagger).
DensityOperator random_density(int dim, Rng& rng);

}  // namespace qfilter
