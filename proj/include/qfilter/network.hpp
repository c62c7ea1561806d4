#pragma once

// SLH models of open quantum systems and their network composition.
//
// Conventions:
//   concatenate(G1, G2) = (diag(S1, S2), [L1; L2], H1 + H2)
//   series(G1, G2)      : output of G1 fed into G2,
//       S = S2 S1,  L = L2 + S2 L1,
//       H = H1 + H2 + (1 / 2i) (L2^dag S2 L1 - L1^dag S2^dag L2).

#include <vector>

#include "qfilter/hilbert.hpp"

namespace qfilter::network {

struct SLHModel {
  Eigen::MatrixXcd S;      ///< scattering matrix, unitary, scalar entries
  std::vector<Operator> L; ///< coupling operators, one per channel
  Operator H;              ///< Hamiltonian

  int channels() const { return static_cast<int>(L.size()); }
  int dim() const { return static_cast<int>(H.rows()); }
};

inline constexpr double kUnitarityTol = 1e-10;
inline constexpr double kHermiticityTol = 1e-8;

/// Throws ConfigError for non-unitary S or non-Hermitian H, ShapeError for
/// inconsistent shapes.
void validate(const SLHModel& model);

/// (I_n, 0, 0) on a Hilbert space of dimension dim.
SLHModel passthrough(int channels, int dim);
/// Single-channel (1, L, H).
SLHModel single_channel(const Operator& L, const Operator& H);

SLHModel concatenate(const SLHModel& g1, const SLHModel& g2);
SLHModel series(const SLHModel& g1, const SLHModel& g2);

/// Two-port beam splitter with reflectivity amplitude r in [0, 1] and phase theta:
/// S = [[t e^{i theta}, r e^{i(theta + pi/2)}], [r e^{i(theta + pi/2)}, t e^{i theta}]],
/// t = sqrt(1 - r^2). L = 0, H = 0 on a Hilbert space of dimension dim.
SLHModel beam_splitter(double r, double theta, int dim = 1);

/// (G_sys ⊞ vacuum) ▷ beam_splitter: the system's output mixed with a vacuum
/// port, homodyne arm on channel 1 and counting arm on channel 2.
SLHModel beam_splitter_network(const Operator& L, const Operator& H, double r, double theta);

}  // namespace qfilter::network
