#include "bap/model.hpp"

#include <cmath>
#include <stdexcept>

#include "bap/treks.hpp"

namespace bap {

namespace {

constexpr double kStandardizedTol = 1e-8;
constexpr double kOmegaMinEigenvalue = 1e-6;

Eigen::MatrixXd inverse_i_minus_b(const MixedGraph& g, const Eigen::MatrixXd& b) {
  if (!is_acyclic(g)) throw std::invalid_argument("graph must be acyclic");
  const int d = g.num_vertices();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d) - b;
  return m.partialPivLu().solve(Eigen::MatrixXd::Identity(d, d));
}

double left_product(const Eigen::MatrixXd& b, const std::vector<int>& left) {
  double p = 1.0;
  for (std::size_t k = 0; k + 1 < left.size(); ++k) p *= b(left[k], left[k + 1]);
  return p;
}

double right_product(const Eigen::MatrixXd& b, const std::vector<int>& right) {
  double p = 1.0;
  for (std::size_t k = 0; k + 1 < right.size(); ++k) p *= b(right[k + 1], right[k]);
  return p;
}

double edge_product(const Parameters& theta, const Trek& t) {
  double p = left_product(theta.B, t.left) * right_product(theta.B, t.right);
  if (t.has_bidirected) p *= theta.Omega(t.left.back(), t.right.front());
  return p;
}

}  // namespace

void validate_parameters(const MixedGraph& g, const Parameters& theta) {
  const int d = g.num_vertices();
  if (theta.B.rows() != d || theta.B.cols() != d || theta.Omega.rows() != d ||
      theta.Omega.cols() != d)
    throw std::invalid_argument("parameter matrices must be d x d");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) {
        if (theta.B(i, i) != 0.0)
          throw std::invalid_argument("B must have zero diagonal");
        continue;
      }
      if (theta.B(i, j) != 0.0 && !g.has_directed(j, i))
        throw std::invalid_argument("B has support outside the directed edges");
      if (theta.Omega(i, j) != theta.Omega(j, i))
        throw std::invalid_argument("Omega must be symmetric");
      if (theta.Omega(i, j) != 0.0 && !g.has_bidirected(i, j))
        throw std::invalid_argument("Omega has support outside the bidirected edges");
    }
}

Eigen::MatrixXd phi(const MixedGraph& g, const Parameters& theta) {
  validate_parameters(g, theta);
  const Eigen::MatrixXd inv = inverse_i_minus_b(g, theta.B);
  return inv * theta.Omega * inv.transpose();
}

Eigen::MatrixXd wright_covariance_unstandardized(const MixedGraph& g,
                                                 const Parameters& theta) {
  validate_parameters(g, theta);
  const int d = g.num_vertices();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);

  for (int i = 0; i < d; ++i) {
    double v = theta.Omega(i, i);
    for (const Trek& t : self_treks(g, i)) {
      double p = left_product(theta.B, t.left) * right_product(theta.B, t.right);
      if (t.has_bidirected)
        p *= theta.Omega(t.left.back(), t.right.front());
      else
        p *= theta.Omega(t.head, t.head);
      v += p;
    }
    sigma(i, i) = v;
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      double v = 0.0;
      for (const Trek& t : simple_treks(g, i, j)) {
        double p = left_product(theta.B, t.left) * right_product(theta.B, t.right);
        if (t.has_bidirected)
          p *= theta.Omega(t.left.back(), t.right.front());
        else
          p *= sigma(t.head, t.head);
        v += p;
      }
      sigma(i, j) = sigma(j, i) = v;
    }
  return sigma;
}

Eigen::MatrixXd wright_covariance_standardized(const MixedGraph& g,
                                               const Parameters& theta) {
  const Eigen::MatrixXd full = phi(g, theta);
  const int d = g.num_vertices();
  for (int i = 0; i < d; ++i)
    if (std::abs(full(i, i) - 1.0) > kStandardizedTol)
      throw std::invalid_argument("parameters are not standardized (phi diagonal != 1)");

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      double v = 0.0;
      for (const Trek& t : simple_treks(g, i, j)) v += edge_product(theta, t);
      sigma(i, j) = sigma(j, i) = v;
    }
  return sigma;
}

Eigen::MatrixXd causal_effects(const MixedGraph& g, const Parameters& theta) {
  validate_parameters(g, theta);
  return inverse_i_minus_b(g, theta.B);
}

Parameters standardize_parameters(const MixedGraph& g, const Parameters& theta) {
  const Eigen::MatrixXd sigma = phi(g, theta);
  const int d = g.num_vertices();
  Eigen::VectorXd s = sigma.diagonal().cwiseSqrt();
  Parameters out = theta;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (out.B(i, j) != 0.0) out.B(i, j) *= s(j) / s(i);
      out.Omega(i, j) /= s(i) * s(j);
    }
  return out;
}

Parameters sample_parameters(const MixedGraph& g, Rng& rng) {
  if (!is_bap(g)) throw std::invalid_argument("sample_parameters expects a BAP");
  const int d = g.num_vertices();
  Parameters theta;
  theta.B = Eigen::MatrixXd::Zero(d, d);
  for (auto [i, j] : g.directed_edges()) theta.B(j, i) = rng.normal();

  while (true) {
    theta.Omega = Eigen::MatrixXd::Zero(d, d);
    for (auto [i, j] : g.bidirected_edges())
      theta.Omega(i, j) = theta.Omega(j, i) = rng.normal();
    for (int i = 0; i < d; ++i) {
      double row = 0.0;
      for (int j = 0; j < d; ++j)
        if (j != i) row += std::abs(theta.Omega(i, j));
      theta.Omega(i, i) = row + rng.chi_squared_1();
    }
    if (d == 0) break;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(theta.Omega,
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() >= kOmegaMinEigenvalue) break;
  }
  return theta;
}

Eigen::MatrixXd sample_data(const MixedGraph& g, const Parameters& theta, int n,
                            Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample count must be positive");
  const Eigen::MatrixXd sigma = phi(g, theta);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("model covariance is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  const int d = g.num_vertices();
  Eigen::MatrixXd x(n, d);
  for (int s = 0; s < n; ++s) {
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z(i) = rng.normal();
    x.row(s) = (l * z).transpose();
  }
  return x;
}

}  // namespace bap
