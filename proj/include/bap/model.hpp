#pragma once

#include <Eigen/Dense>

#include "bap/graph.hpp"
#include "bap/rng.hpp"

namespace bap {

// Edge-weight matrices of a linear Gaussian SEM. B(i, j) is the weight of
// the edge j -> i (so X = B X + eps row-wise), Omega is the symmetric error
// covariance with off-diagonal support on the bidirected edges.
struct Parameters {
  Eigen::MatrixXd B;
  Eigen::MatrixXd Omega;
};

// Throws std::invalid_argument if theta does not conform to g's sparsity
// pattern or Omega is not symmetric.
void validate_parameters(const MixedGraph& g, const Parameters& theta);

// Model covariance (I - B)^{-1} Omega (I - B)^{-T}.
Eigen::MatrixXd phi(const MixedGraph& g, const Parameters& theta);

// Covariance entry by entry from trek sums (unstandardized Wright formula):
// diagonals from all self-treks plus Omega_ii, off-diagonals from simple
// treks with head-variance factors. Exponential; a small-d oracle.
Eigen::MatrixXd wright_covariance_unstandardized(const MixedGraph& g,
                                                 const Parameters& theta);

// Classic Wright path tracing for standardized parameters (unit-diagonal
// phi); flags non-unit-diagonal inputs.
Eigen::MatrixXd wright_covariance_standardized(const MixedGraph& g,
                                               const Parameters& theta);

// Total causal effects E = (I - B)^{-1}; E(i, j) is the effect of j on i.
Eigen::MatrixXd causal_effects(const MixedGraph& g, const Parameters& theta);

// Rescales theta so that phi has unit diagonal.
Parameters standardize_parameters(const MixedGraph& g, const Parameters& theta);

// Random parameters per the simulation protocol: edge labels standard
// normal, error variances = absolute row sums plus a chi^2(1) draw, Omega
// resampled while its smallest eigenvalue is below 1e-6.
Parameters sample_parameters(const MixedGraph& g, Rng& rng);

// n i.i.d. rows from N(0, phi(theta)); requires positive definite phi.
Eigen::MatrixXd sample_data(const MixedGraph& g, const Parameters& theta, int n,
                            Rng& rng);

}  // namespace bap
