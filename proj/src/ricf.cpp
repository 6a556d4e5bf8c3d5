#include "bap/ricf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bap {

namespace {

void check_sample_cov(const Eigen::MatrixXd& s, int d, int n) {
  if (s.rows() != d || s.cols() != d)
    throw std::invalid_argument("sample covariance has wrong dimensions");
  if (n < 2) throw std::invalid_argument("need at least two samples");
  if (d == 0) return;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("sample covariance is not positive definite");
}

std::vector<int> positions_without(int d, int skip) {
  std::vector<int> out;
  out.reserve(d - 1);
  for (int v = 0; v < d; ++v)
    if (v != skip) out.push_back(v);
  return out;
}

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  return out;
}

// District submodel: the structural equations of the district members, with
// the parents kept as source nodes.
struct DistrictModel {
  std::vector<int> vk;          // district union parents, sorted
  std::vector<char> is_member;  // per position in vk
  MixedGraph sub;
};

DistrictModel district_model(const MixedGraph& g, const std::vector<int>& district) {
  std::vector<char> in_district(g.num_vertices(), 0);
  for (int v : district) in_district[v] = 1;
  std::vector<int> vk = district;
  for (int v : district)
    for (int p : g.parents(v))
      if (!in_district[p]) vk.push_back(p);
  std::sort(vk.begin(), vk.end());
  vk.erase(std::unique(vk.begin(), vk.end()), vk.end());

  const int m = static_cast<int>(vk.size());
  DistrictModel out;
  out.vk = vk;
  out.is_member.resize(m);
  out.sub = MixedGraph(m);
  std::vector<int> local(g.num_vertices(), -1);
  for (int a = 0; a < m; ++a) {
    local[vk[a]] = a;
    out.is_member[a] = in_district[vk[a]];
  }
  for (int v : district) {
    for (int p : g.parents(v)) out.sub.add_directed(local[p], local[v]);
    for (int w : g.spouses(v))
      if (w > v) out.sub.add_bidirected(local[v], local[w]);
  }
  return out;
}

// One-variable source marginal at the saturated variance ((n-1)/n) S_vv.
double source_marginal_loglik(double svv, int n) {
  const double var = (static_cast<double>(n - 1) / n) * svv;
  return -0.5 * n * (std::log(2.0 * std::numbers::pi * var) + 1.0);
}

// Exact per-district split of the full log-likelihood at the given theta:
// submodel likelihood with saturated parent variances, minus the parent
// marginals (the split telescopes to the joint for any conforming theta).
std::vector<DistrictTerm> district_terms_from_theta(const MixedGraph& g,
                                                    const Parameters& theta,
                                                    const Eigen::MatrixXd& s, int n) {
  const double ratio = static_cast<double>(n - 1) / n;
  std::vector<DistrictTerm> out;
  for (const auto& c : districts(g)) {
    const DistrictModel dm = district_model(g, c);
    const int m = static_cast<int>(dm.vk.size());
    Parameters sub;
    sub.B = Eigen::MatrixXd::Zero(m, m);
    sub.Omega = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a) {
      if (!dm.is_member[a]) {
        sub.Omega(a, a) = ratio * s(dm.vk[a], dm.vk[a]);
        continue;
      }
      for (int b2 = 0; b2 < m; ++b2) {
        if (dm.sub.has_directed(b2, a)) sub.B(a, b2) = theta.B(dm.vk[a], dm.vk[b2]);
        if (dm.is_member[b2]) sub.Omega(a, b2) = theta.Omega(dm.vk[a], dm.vk[b2]);
      }
    }
    const Eigen::MatrixXd sigma_sub = phi(dm.sub, sub);
    const Eigen::MatrixXd s_sub = select(s, dm.vk, dm.vk);
    DistrictTerm t;
    t.vertices = c;
    t.term = log_likelihood(sigma_sub, s_sub, n);
    for (int a = 0; a < m; ++a)
      if (!dm.is_member[a]) t.term -= source_marginal_loglik(s(dm.vk[a], dm.vk[a]), n);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

double log_likelihood(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& s, int n) {
  const int d = static_cast<int>(sigma.rows());
  if (sigma.cols() != d || s.rows() != d || s.cols() != d)
    throw std::invalid_argument("covariance dimensions mismatch");
  if (n < 2) throw std::invalid_argument("need at least two samples");
  if (d == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("model covariance is singular or indefinite");
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  const double trace = llt.solve(s).trace();
  const double ratio = static_cast<double>(n - 1) / n;
  return -0.5 * n * (d * std::log(2.0 * std::numbers::pi) + logdet + ratio * trace);
}

FitResult ricf(const MixedGraph& g, const Eigen::MatrixXd& s, int n,
               const RicfOptions& opts) {
  if (!is_bap(g)) throw std::invalid_argument("ricf expects a BAP");
  const int d = g.num_vertices();
  check_sample_cov(s, d, n);

  // The likelihood depends on the data only through the MLE-scaled sample
  // covariance.
  const Eigen::MatrixXd st = (static_cast<double>(n - 1) / n) * s;

  FitResult res;
  res.theta.B = Eigen::MatrixXd::Zero(d, d);
  res.theta.Omega = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) res.theta.Omega(i, i) = st(i, i);

  Eigen::MatrixXd& b = res.theta.B;
  Eigen::MatrixXd& omega = res.theta.Omega;

  for (int sweep = 0; sweep < opts.max_iter; ++sweep) {
    double max_change = 0.0;
    for (int i = 0; i < d; ++i) {
      const std::vector<int> pa = g.parents(i);
      const std::vector<int> sp = g.spouses(i);
      const int p = static_cast<int>(pa.size());
      const int q = static_cast<int>(sp.size());

      if (q == 0) {
        // Pure regression of i on its parents; converges in one pass.
        Eigen::VectorXd coef(p);
        double resid = st(i, i);
        if (p > 0) {
          const Eigen::MatrixXd spp = select(st, pa, pa);
          const Eigen::VectorXd spi = select(st, pa, {i});
          coef = spp.ldlt().solve(spi);
          resid -= spi.dot(coef);
        }
        for (int k = 0; k < p; ++k) {
          max_change = std::max(max_change, std::abs(b(i, pa[k]) - coef(k)));
          b(i, pa[k]) = coef(k);
        }
        max_change = std::max(max_change, std::abs(omega(i, i) - resid));
        omega(i, i) = resid;
        continue;
      }

      // Joint least squares on the parents and the district pseudo-variables
      // Z = [Omega_{-i,-i}^{-1} eps_{-i}]_{sp(i)}.
      const std::vector<int> rest = positions_without(d, i);
      Eigen::MatrixXd e(d - 1, d);  // rows of (I - B) without row i
      for (int r = 0; r < d - 1; ++r) {
        e.row(r) = -b.row(rest[r]);
        e(r, rest[r]) += 1.0;
      }
      const Eigen::MatrixXd omega_rest = select(omega, rest, rest);
      const Eigen::MatrixXd m = omega_rest.ldlt().solve(
          Eigen::MatrixXd::Identity(d - 1, d - 1));

      std::vector<int> sp_pos(q);  // spouse positions in the -i indexing
      for (int k = 0; k < q; ++k)
        sp_pos[k] = static_cast<int>(
            std::lower_bound(rest.begin(), rest.end(), sp[k]) - rest.begin());

      const Eigen::MatrixXd cov_x_eps = st * e.transpose();        // d x (d-1)
      const Eigen::MatrixXd cov_eps = e * st * e.transpose();      // (d-1) x (d-1)
      const Eigen::MatrixXd cov_x_z = cov_x_eps * m;               // d x (d-1)
      const Eigen::MatrixXd cov_z = m * cov_eps * m;               // (d-1) x (d-1)

      const int w = p + q;
      Eigen::MatrixXd cww(w, w);
      Eigen::VectorXd cwy(w);
      for (int a = 0; a < p; ++a) {
        cwy(a) = st(pa[a], i);
        for (int c = 0; c < p; ++c) cww(a, c) = st(pa[a], pa[c]);
        for (int c = 0; c < q; ++c)
          cww(a, p + c) = cww(p + c, a) = cov_x_z(pa[a], sp_pos[c]);
      }
      for (int a = 0; a < q; ++a) {
        cwy(p + a) = cov_x_z(i, sp_pos[a]);
        for (int c = 0; c < q; ++c) cww(p + a, p + c) = cov_z(sp_pos[a], sp_pos[c]);
      }

      const Eigen::VectorXd coef = cww.ldlt().solve(cwy);
      const double lambda = st(i, i) - cwy.dot(coef);

      for (int k = 0; k < p; ++k) {
        max_change = std::max(max_change, std::abs(b(i, pa[k]) - coef(k)));
        b(i, pa[k]) = coef(k);
      }
      Eigen::VectorXd w_sp = coef.tail(q);
      const Eigen::MatrixXd m_sp = select(m, sp_pos, sp_pos);
      const double new_oii = lambda + w_sp.dot(m_sp * w_sp);
      for (int k = 0; k < q; ++k) {
        max_change = std::max(max_change, std::abs(omega(i, sp[k]) - w_sp(k)));
        omega(i, sp[k]) = omega(sp[k], i) = w_sp(k);
      }
      max_change = std::max(max_change, std::abs(omega(i, i) - new_oii));
      omega(i, i) = new_oii;
    }
    res.iterations = sweep + 1;
    if (max_change < opts.tol) {
      res.converged = true;
      break;
    }
  }
  if (d == 0) res.converged = true;

  const Eigen::MatrixXd sigma = phi(g, res.theta);
  res.loglik = log_likelihood(sigma, s, n);
  res.score =
      (res.loglik - (g.num_vertices() + g.num_edges()) * std::log(double(n))) / n;

  if (opts.with_district_terms)
    res.per_district = district_terms_from_theta(g, res.theta, s, n);
  return res;
}

std::string cache_key(const MixedGraph& g, const std::vector<int>& district,
                      const std::string& dataset_id) {
  std::vector<int> verts = district;
  std::sort(verts.begin(), verts.end());
  std::vector<char> in_district(g.num_vertices(), 0);
  for (int v : verts) in_district[v] = 1;

  std::string key = dataset_id;
  key += "|C:";
  for (int v : verts) {
    key += std::to_string(v);
    key += ',';
  }
  key += "|D:";
  for (int v : verts)
    for (int p : g.parents(v)) {
      key += std::to_string(p);
      key += '>';
      key += std::to_string(v);
      key += ',';
    }
  key += "|B:";
  for (int v : verts)
    for (int w : g.spouses(v))
      if (w > v && in_district[w]) {
        key += std::to_string(v);
        key += '~';
        key += std::to_string(w);
        key += ',';
      }
  return key;
}

namespace {

// Term of one district: submodel on C union pa(C) with parents as source
// nodes, likelihood minus the fitted parent marginals.
double district_term(const MixedGraph& g, const std::vector<int>& district,
                     const ScoringContext& ctx) {
  const DistrictModel dm = district_model(g, district);
  const Eigen::MatrixXd s_sub = select(ctx.S, dm.vk, dm.vk);
  RicfOptions opts = ctx.ricf_opts;
  opts.with_district_terms = false;
  const FitResult fit = ricf(dm.sub, s_sub, ctx.n, opts);

  double term = fit.loglik;
  for (std::size_t a = 0; a < dm.vk.size(); ++a)
    if (!dm.is_member[a])
      term -= source_marginal_loglik(ctx.S(dm.vk[a], dm.vk[a]), ctx.n);
  return term;
}

}  // namespace

std::pair<double, std::vector<DistrictTerm>> decomposed_loglik(
    const MixedGraph& g, const ScoringContext& ctx) {
  if (!is_bap(g)) throw std::invalid_argument("decomposed_loglik expects a BAP");
  if (ctx.n < g.num_vertices() + 1)
    throw std::invalid_argument("need n >= d + 1 samples");
  double total = 0.0;
  std::vector<DistrictTerm> terms;
  for (const auto& c : districts(g)) {
    DistrictTerm t;
    t.vertices = c;
    std::string key;
    bool hit = false;
    if (ctx.cache != nullptr) {
      key = cache_key(g, c, ctx.dataset_id);
      if (auto cached = ctx.cache->get(key)) {
        t.term = *cached;
        hit = true;
      }
    }
    if (!hit) {
      t.term = district_term(g, c, ctx);
      if (ctx.cache != nullptr) ctx.cache->put(key, t.term);
    }
    total += t.term;
    terms.push_back(std::move(t));
  }
  return {total, std::move(terms)};
}

double score(const MixedGraph& g, const ScoringContext& ctx) {
  const auto [loglik, terms] = decomposed_loglik(g, ctx);
  const double penalty = ctx.penalty_multiplier *
                         (g.num_vertices() + g.num_edges()) *
                         std::log(static_cast<double>(ctx.n));
  return (loglik - penalty) / ctx.n;
}

}  // namespace bap
