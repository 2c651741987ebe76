#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace heapforest {

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  std::size_t n = 0;
  double std_error() const;
};

MeanVar mean_var(const std::vector<double>& xs);

// Regularized upper incomplete gamma Q(a, x); series/continued fraction.
double gamma_q(double a, double x);

// Survival function of a chi-square distribution.
double chi2_pvalue(double statistic, int dof);

struct Chi2Result {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Goodness of fit of observed counts against expected counts.
// Cells with expected < min_expected are pooled into their neighbor.
Chi2Result chi2_goodness(const std::vector<double>& observed,
                         const std::vector<double>& expected,
                         double min_expected = 5.0);

// Fit of integer samples to Poisson(mean); tail cells pooled.
Chi2Result chi2_poisson_fit(const std::vector<uint64_t>& samples, double mean);

// Fit of samples (values >= 1) to Geometric(alpha).
Chi2Result chi2_geometric_fit(const std::vector<uint32_t>& samples, double alpha);

// Homogeneity of two integer samples (same distribution?).
Chi2Result chi2_two_sample(const std::vector<uint64_t>& a,
                           const std::vector<uint64_t>& b);

struct WilsonInterval {
  double lower = 0.0;
  double upper = 1.0;
};

// Wilson score interval for a binomial proportion at normal quantile z.
WilsonInterval wilson_interval(uint64_t successes, uint64_t trials, double z);

double pearson_correlation(const std::vector<double>& xs,
                           const std::vector<double>& ys);

// Ordinary least squares slope of y against x.
double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace heapforest
