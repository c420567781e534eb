#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace metaacl {

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean_of: empty sample");
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// unbiased (n-1) sample variance
inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2)
    throw std::invalid_argument("sample_variance: need at least 2 values");
  const double m = mean_of(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double sample_std(const std::vector<double>& v) {
  return std::sqrt(sample_variance(v));
}

inline double standard_error(const std::vector<double>& v) {
  return sample_std(v) / std::sqrt(static_cast<double>(v.size()));
}

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
// freedom; two-sided p from the Student-t CDF.
inline TTestResult welch_ttest(const std::vector<double>& a,
                               const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch_ttest: need at least 2 values each");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a) / na;
  const double vb = sample_variance(b) / nb;
  if (va + vb == 0.0)
    throw std::invalid_argument("welch_ttest: both samples are constant");
  TTestResult r;
  r.t = (mean_of(a) - mean_of(b)) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) /
         (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  const boost::math::students_t dist(r.df);
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
  return r;
}

}  // namespace metaacl
