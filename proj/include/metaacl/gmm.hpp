#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <vector>

#include "metaacl/rng.hpp"
#include "metaacl/task.hpp"

namespace metaacl {

struct GaussianComponent {
  std::vector<double> mean;        // length dim; last coordinate is the LP axis
  std::vector<double> covariance;  // dim x dim, row-major, symmetric PD
  double weight = 0.0;
  double lp_utility = 0.0;         // mean LP coordinate clamped to [0,1]

  std::size_t dim() const { return mean.size(); }
};

struct WeightedGMM {
  std::vector<GaussianComponent> components;
  double fit_log_likelihood = 0.0;
  double aic = 0.0;

  std::size_t size() const { return components.size(); }
  bool empty() const { return components.empty(); }
};

struct FitConfig {
  int k_max = 10;
  int max_iters = 100;
  double rel_tol = 1e-4;          // on |delta log-likelihood|
  double cov_regularizer = 1e-6;  // added to covariance diagonals
  int restarts = 1;
};

// free parameters of a k-component full-covariance GMM in dim dimensions
inline double aic_param_count(int k, std::size_t dim) {
  const double d = static_cast<double>(dim);
  return (k - 1) + k * d + k * d * (d + 1) / 2.0;
}

inline double aic_score(double log_lik, int k, std::size_t dim) {
  return 2.0 * aic_param_count(k, dim) - 2.0 * log_lik;
}

namespace detail {

// exp to ~1e-13 relative accuracy, branch-light; hot path of the E-step.
inline double fast_exp(double x) {
  if (x > 709.0) x = 709.0;
  if (x < -700.0) return 0.0;  // covers -inf as well
  const double log2e = 1.4426950408889634074;
  const double c1 = 6.93145751953125e-1;          // ln2 high bits
  const double c2 = 1.42860682030941723212e-6;    // ln2 low bits
  const double fk = std::floor(log2e * x + 0.5);
  const double r = (x - fk * c1) - fk * c2;
  // degree-11 Taylor on |r| <= ln2/2
  double p = 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const std::int64_t k = static_cast<std::int64_t>(fk);
  std::uint64_t bits = static_cast<std::uint64_t>(k + 1023) << 52;
  double scale;
  std::memcpy(&scale, &bits, sizeof(scale));
  return p * scale;
}

// In-place lower Cholesky of a row-major symmetric matrix. Returns false if
// a pivot is not strictly positive. Upper triangle is zeroed.
inline bool cholesky(double* a, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = j; i < d; ++i) {
      double s = a[i * d + j];
      for (std::size_t t = 0; t < j; ++t) s -= a[i * d + t] * a[j * d + t];
      if (i == j) {
        if (!(s > 0.0)) return false;
        a[j * d + j] = std::sqrt(s);
      } else {
        a[i * d + j] = s / a[j * d + j];
      }
    }
    for (std::size_t t = j + 1; t < d; ++t) a[j * d + t] = 0.0;
  }
  return true;
}

// Cholesky with escalating diagonal regularization; src stays intact.
inline void cholesky_regularized(const double* src, double* dst, std::size_t d,
                                 double reg) {
  std::memcpy(dst, src, d * d * sizeof(double));
  double bump = reg;
  while (!cholesky(dst, d)) {
    std::memcpy(dst, src, d * d * sizeof(double));
    for (std::size_t i = 0; i < d; ++i) dst[i * d + i] += bump;
    bump *= 10.0;
    if (bump > 1e12)
      throw std::runtime_error("cholesky: matrix could not be regularized");
  }
}

struct EmWorkspace {
  std::size_t n = 0, d = 0;
  int k_cap = 0;
  std::vector<double> w, logw, mu, cov, chol, inv_diag, lognorm;
  std::vector<double> sw, slogw, smu, scov, schol, sinv_diag, slognorm;
  std::vector<double> resp, logp, dist2, data_mean, data_cov;

  void resize(std::size_t n_, std::size_t d_, int k_cap_) {
    n = n_;
    d = d_;
    k_cap = k_cap_;
    const std::size_t k = static_cast<std::size_t>(k_cap_);
    w.resize(k);
    logw.resize(k);
    mu.resize(k * d);
    cov.resize(k * d * d);
    chol.resize(k * d * d);
    inv_diag.resize(k * d);
    lognorm.resize(k);
    sw.resize(k);
    slogw.resize(k);
    smu.resize(k * d);
    scov.resize(k * d * d);
    schol.resize(k * d * d);
    sinv_diag.resize(k * d);
    slognorm.resize(k);
    resp.resize(n * k);
    logp.resize(k);
    dist2.resize(n);
    data_mean.resize(d);
    data_cov.resize(d * d);
  }

  void compute_data_stats(const double* data, double reg) {
    std::fill(data_mean.begin(), data_mean.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) data_mean[j] += data[i * d + j];
    for (std::size_t j = 0; j < d; ++j) data_mean[j] /= static_cast<double>(n);
    std::fill(data_cov.begin(), data_cov.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < d; ++a) {
        const double xa = data[i * d + a] - data_mean[a];
        for (std::size_t b = a; b < d; ++b)
          data_cov[a * d + b] += xa * (data[i * d + b] - data_mean[b]);
      }
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a; b < d; ++b) {
        const double v = data_cov[a * d + b] / static_cast<double>(n);
        data_cov[a * d + b] = v;
        data_cov[b * d + a] = v;
      }
    for (std::size_t a = 0; a < d; ++a) data_cov[a * d + a] += reg;
  }
};

inline void em_prepare_derived(EmWorkspace& ws, int k, double reg) {
  const std::size_t d = ws.d;
  const double half_d_log2pi =
      0.5 * static_cast<double>(d) * 1.8378770664093454836;
  for (int c = 0; c < k; ++c) {
    double* l = ws.chol.data() + static_cast<std::size_t>(c) * d * d;
    cholesky_regularized(ws.cov.data() + static_cast<std::size_t>(c) * d * d,
                         l, d, reg);
    double logdet = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      logdet += std::log(l[j * d + j]);
      ws.inv_diag[static_cast<std::size_t>(c) * d + j] = 1.0 / l[j * d + j];
    }
    ws.logw[c] = ws.w[c] > 0.0 ? std::log(ws.w[c])
                               : -std::numeric_limits<double>::infinity();
    ws.lognorm[c] = ws.logw[c] - logdet - half_d_log2pi;
  }
}

// k-means++ style seeding: first mean uniform, the rest proportional to the
// squared distance to the nearest already-chosen mean.
inline void em_seed_means(EmWorkspace& ws, const double* data, int k,
                          Rng& rng) {
  const std::size_t n = ws.n, d = ws.d;
  std::size_t first = rng.uniform_index(n);
  std::memcpy(ws.mu.data(), data + first * d, d * sizeof(double));
  std::fill(ws.dist2.begin(), ws.dist2.end(),
            std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    const double* prev = ws.mu.data() + static_cast<std::size_t>(c - 1) * d;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = data[i * d + j] - prev[j];
        s += diff * diff;
      }
      if (s < ws.dist2[i]) ws.dist2[i] = s;
      total += ws.dist2[i];
    }
    std::size_t pick;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        r -= ws.dist2[i];
        if (r <= 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(n);
    }
    std::memcpy(ws.mu.data() + static_cast<std::size_t>(c) * d,
                data + pick * d, d * sizeof(double));
  }
}

inline double em_e_step(EmWorkspace& ws, const double* data, int k) {
  const std::size_t n = ws.n, d = ws.d;
  double ll = 0.0;
  std::vector<double>& logp = ws.logp;
  double y[32];  // forward-solve scratch; dims here are tiny
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = data + i * d;
    double m = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double* mu = ws.mu.data() + static_cast<std::size_t>(c) * d;
      const double* l = ws.chol.data() + static_cast<std::size_t>(c) * d * d;
      const double* idg = ws.inv_diag.data() + static_cast<std::size_t>(c) * d;
      double q = 0.0;
      for (std::size_t r = 0; r < d; ++r) {
        double s = x[r] - mu[r];
        for (std::size_t t = 0; t < r; ++t) s -= l[r * d + t] * y[t];
        y[r] = s * idg[r];
        q += y[r] * y[r];
      }
      const double lp = ws.lognorm[c] - 0.5 * q;
      logp[c] = lp;
      if (lp > m) m = lp;
    }
    double sum = 0.0;
    double* resp = ws.resp.data() + i * static_cast<std::size_t>(k);
    for (int c = 0; c < k; ++c) {
      const double e = fast_exp(logp[c] - m);
      resp[c] = e;
      sum += e;
    }
    const double inv = 1.0 / sum;
    for (int c = 0; c < k; ++c) resp[c] *= inv;
    ll += m + std::log(sum);
  }
  return ll;
}

inline void em_m_step(EmWorkspace& ws, const double* data, int k, double reg) {
  const std::size_t n = ws.n, d = ws.d;
  for (int c = 0; c < k; ++c) {
    double* mu = ws.mu.data() + static_cast<std::size_t>(c) * d;
    double* cov = ws.cov.data() + static_cast<std::size_t>(c) * d * d;
    double nc = 0.0;
    std::fill(mu, mu + d, 0.0);
    std::fill(cov, cov + d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ws.resp[i * static_cast<std::size_t>(k) + c];
      nc += r;
      const double* x = data + i * d;
      for (std::size_t a = 0; a < d; ++a) {
        mu[a] += r * x[a];
        const double rxa = r * x[a];
        for (std::size_t b = a; b < d; ++b) cov[a * d + b] += rxa * x[b];
      }
    }
    const double inv = 1.0 / std::max(nc, 1e-12);
    for (std::size_t a = 0; a < d; ++a) mu[a] *= inv;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a; b < d; ++b) {
        const double v = cov[a * d + b] * inv - mu[a] * mu[b];
        cov[a * d + b] = v;
        cov[b * d + a] = v;
      }
    for (std::size_t a = 0; a < d; ++a) cov[a * d + a] += reg;
    ws.w[c] = nc / static_cast<double>(n);
  }
}

inline void em_save_params(EmWorkspace& ws) {
  ws.sw = ws.w;
  ws.slogw = ws.logw;
  ws.smu = ws.mu;
  ws.scov = ws.cov;
  ws.schol = ws.chol;
  ws.sinv_diag = ws.inv_diag;
  ws.slognorm = ws.lognorm;
}

inline void em_restore_params(EmWorkspace& ws) {
  ws.w = ws.sw;
  ws.logw = ws.slogw;
  ws.mu = ws.smu;
  ws.cov = ws.scov;
  ws.chol = ws.schol;
  ws.inv_diag = ws.sinv_diag;
  ws.lognorm = ws.slognorm;
}

// One EM run from a fresh seeding. Guarantees a non-decreasing trace: if an
// iteration ever lowers the log-likelihood (possible because covariances are
// re-regularized every M-step), the previous parameters are restored and the
// run stops, so the returned likelihood always matches the returned state.
inline double em_fit_once(EmWorkspace& ws, const double* data, int k,
                          const FitConfig& cfg, Rng& rng,
                          std::vector<double>* trace) {
  const std::size_t d = ws.d;
  em_seed_means(ws, data, k, rng);
  for (int c = 0; c < k; ++c) {
    std::memcpy(ws.cov.data() + static_cast<std::size_t>(c) * d * d,
                ws.data_cov.data(), d * d * sizeof(double));
    ws.w[c] = 1.0 / k;
  }
  em_prepare_derived(ws, k, cfg.cov_regularizer);

  double ll_prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0;; ++iter) {
    const double ll = em_e_step(ws, data, k);
    const double slack = 1e-12 * std::max(1.0, std::fabs(ll_prev));
    if (ll + slack < ll_prev) {
      em_restore_params(ws);
      return ll_prev;
    }
    if (trace) trace->push_back(ll);
    if (iter > 0 &&
        std::fabs(ll - ll_prev) <= cfg.rel_tol * std::max(1.0, std::fabs(ll)))
      return ll;
    if (iter == cfg.max_iters) return ll;
    em_save_params(ws);
    em_m_step(ws, data, k, cfg.cov_regularizer);
    em_prepare_derived(ws, k, cfg.cov_regularizer);
    ll_prev = ll;
  }
}

inline WeightedGMM em_extract(const EmWorkspace& ws, int k, double ll,
                              std::size_t dim) {
  WeightedGMM g;
  g.components.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    GaussianComponent& comp = g.components[static_cast<std::size_t>(c)];
    comp.mean.assign(ws.mu.begin() + static_cast<std::size_t>(c) * dim,
                     ws.mu.begin() + static_cast<std::size_t>(c + 1) * dim);
    comp.covariance.assign(
        ws.cov.begin() + static_cast<std::size_t>(c) * dim * dim,
        ws.cov.begin() + static_cast<std::size_t>(c + 1) * dim * dim);
    comp.weight = ws.w[static_cast<std::size_t>(c)];
    comp.lp_utility = clamp01(comp.mean.back());
  }
  g.fit_log_likelihood = ll;
  g.aic = aic_score(ll, k, dim);
  return g;
}

inline WeightedGMM em_fit(EmWorkspace& ws, const double* data, int k,
                          const FitConfig& cfg, Rng& rng,
                          std::vector<double>* ll_trace) {
  if (k < 1) throw std::invalid_argument("fit_em: k must be >= 1");
  double best_ll = -std::numeric_limits<double>::infinity();
  WeightedGMM best;
  std::vector<double> trace;
  const int restarts = std::max(1, cfg.restarts);
  for (int r = 0; r < restarts; ++r) {
    trace.clear();
    const double ll =
        em_fit_once(ws, data, k, cfg, rng, ll_trace ? &trace : nullptr);
    if (ll > best_ll) {
      best_ll = ll;
      best = em_extract(ws, k, ll, ws.d);
      if (ll_trace) *ll_trace = trace;
    }
  }
  return best;
}

}  // namespace detail

inline WeightedGMM fit_em(const double* data, std::size_t n, std::size_t dim,
                          int k, const FitConfig& cfg, Rng& rng,
                          std::vector<double>* ll_trace = nullptr) {
  if (n == 0) throw std::invalid_argument("fit_em: empty data");
  if (dim == 0 || dim > 32) throw std::invalid_argument("fit_em: bad dim");
  if (k < 1 || n < static_cast<std::size_t>(k))
    throw std::invalid_argument("fit_em: need at least k points");
  for (std::size_t i = 0; i < n * dim; ++i)
    if (!std::isfinite(data[i]))
      throw std::invalid_argument("fit_em: non-finite coordinate");
  detail::EmWorkspace ws;
  ws.resize(n, dim, std::max(k, 1));
  ws.compute_data_stats(data, cfg.cov_regularizer);
  return detail::em_fit(ws, data, k, cfg, rng, ll_trace);
}

inline std::vector<double> flatten(const std::vector<std::vector<double>>& v) {
  std::vector<double> flat;
  if (v.empty()) return flat;
  flat.reserve(v.size() * v[0].size());
  for (const auto& row : v) {
    if (row.size() != v[0].size())
      throw std::invalid_argument("flatten: ragged rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return flat;
}

inline WeightedGMM fit_em(const std::vector<std::vector<double>>& points,
                          int k, const FitConfig& cfg, Rng& rng,
                          std::vector<double>* ll_trace = nullptr) {
  if (points.empty()) throw std::invalid_argument("fit_em: empty data");
  const std::vector<double> flat = flatten(points);
  return fit_em(flat.data(), points.size(), points[0].size(), k, cfg, rng,
                ll_trace);
}

struct CandidateScore {
  int k = 0;
  double aic = 0.0;
  double log_likelihood = 0.0;
};

// Fit candidates k = 2..min(k_max, n) and keep the lowest AIC (ties go to the
// smaller k). With a single data point the lone candidate is k = 1.
inline WeightedGMM select_model(const double* data, std::size_t n,
                                std::size_t dim, const FitConfig& cfg,
                                Rng& rng,
                                std::vector<CandidateScore>* scores = nullptr) {
  if (n == 0) throw std::invalid_argument("select_model: empty data");
  if (dim == 0 || dim > 32)
    throw std::invalid_argument("select_model: bad dim");
  if (cfg.k_max < 1) throw std::invalid_argument("select_model: bad k_max");
  for (std::size_t i = 0; i < n * dim; ++i)
    if (!std::isfinite(data[i]))
      throw std::invalid_argument("select_model: non-finite coordinate");
  const int k_lo = static_cast<int>(std::min<std::size_t>(2, n));
  const int k_hi = std::max(
      k_lo,
      static_cast<int>(std::min(static_cast<std::size_t>(cfg.k_max), n)));
  detail::EmWorkspace ws;
  ws.resize(n, dim, k_hi);
  ws.compute_data_stats(data, cfg.cov_regularizer);
  WeightedGMM best;
  double best_aic = std::numeric_limits<double>::infinity();
  if (scores) scores->clear();
  for (int k = k_lo; k <= k_hi; ++k) {
    WeightedGMM g = detail::em_fit(ws, data, k, cfg, rng, nullptr);
    if (scores) scores->push_back({k, g.aic, g.fit_log_likelihood});
    if (g.aic < best_aic) {
      best_aic = g.aic;
      best = std::move(g);
    }
  }
  return best;
}

inline WeightedGMM select_model(const std::vector<std::vector<double>>& points,
                                const FitConfig& cfg, Rng& rng,
                                std::vector<CandidateScore>* scores = nullptr) {
  if (points.empty()) throw std::invalid_argument("select_model: empty data");
  const std::vector<double> flat = flatten(points);
  return select_model(flat.data(), points.size(), points[0].size(), cfg, rng,
                      scores);
}

struct WeightedComponentRef {
  const GaussianComponent* component = nullptr;
  double utility = 0.0;
};

// Draw a task from a utility-weighted pool of Gaussian components. The task
// marginal is the leading task_dim block; coordinates are clipped to [0,1].
// All-zero utilities degrade to a uniform choice over the pool.
inline TaskParams sample_from_mixture(
    const std::vector<WeightedComponentRef>& pool, std::size_t task_dim,
    Rng& rng, std::size_t* chosen_component = nullptr) {
  if (pool.empty())
    throw std::invalid_argument("sample_from_mixture: empty pool");
  double total = 0.0;
  for (const auto& e : pool) total += std::max(0.0, e.utility);
  std::size_t pick;
  if (total > 0.0) {
    double r = rng.uniform() * total;
    pick = pool.size() - 1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      r -= std::max(0.0, pool[i].utility);
      if (r <= 0.0) {
        pick = i;
        break;
      }
    }
  } else {
    pick = rng.uniform_index(pool.size());
  }
  const GaussianComponent& comp = *pool[pick].component;
  if (task_dim == 0 || comp.dim() < task_dim || task_dim > 32)
    throw std::invalid_argument("sample_from_mixture: bad task_dim");
  const std::size_t d = comp.dim();
  double block[32 * 32];
  for (std::size_t a = 0; a < task_dim; ++a)
    for (std::size_t b = 0; b < task_dim; ++b)
      block[a * task_dim + b] = comp.covariance[a * d + b];
  double chol[32 * 32];
  detail::cholesky_regularized(block, chol, task_dim, 1e-12);
  double z[32];
  for (std::size_t j = 0; j < task_dim; ++j) z[j] = rng.normal();
  TaskParams out;
  out.coords.resize(task_dim);
  for (std::size_t a = 0; a < task_dim; ++a) {
    double s = comp.mean[a];
    for (std::size_t b = 0; b <= a; ++b) s += chol[a * task_dim + b] * z[b];
    out.coords[a] = clamp01(s);
  }
  if (chosen_component) *chosen_component = pick;
  return out;
}

}  // namespace metaacl
