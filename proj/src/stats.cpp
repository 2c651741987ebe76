#include "heapforest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace heapforest {

double MeanVar::std_error() const {
  return n > 1 ? std::sqrt(variance / static_cast<double>(n)) : 0.0;
}

MeanVar mean_var(const std::vector<double>& xs) {
  MeanVar mv;
  mv.n = xs.size();
  if (mv.n == 0) return mv;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(mv.n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  mv.mean = mean;
  mv.variance = mv.n > 1 ? ss / static_cast<double>(mv.n - 1) : 0.0;
  return mv;
}

// Series for P(a,x), Lentz continued fraction for Q(a,x).
double gamma_q(double a, double x) {
  if (x < 0 || a <= 0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    const double p = sum * std::exp(-x + a * std::log(x) - gln);
    return 1.0 - p;
  }
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

double chi2_pvalue(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  return gamma_q(dof / 2.0, statistic / 2.0);
}

Chi2Result chi2_goodness(const std::vector<double>& observed,
                         const std::vector<double>& expected,
                         double min_expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi2_goodness: size mismatch");
  // Pool low-expectation cells left to right.
  std::vector<double> obs, exp;
  double po = 0.0, pe = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    po += observed[i];
    pe += expected[i];
    if (pe >= min_expected) {
      obs.push_back(po);
      exp.push_back(pe);
      po = pe = 0.0;
    }
  }
  if (pe > 0) {
    if (!exp.empty()) {
      obs.back() += po;
      exp.back() += pe;
    } else {
      obs.push_back(po);
      exp.push_back(pe);
    }
  }
  Chi2Result r;
  r.dof = static_cast<int>(obs.size()) - 1;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double diff = obs[i] - exp[i];
    r.statistic += diff * diff / exp[i];
  }
  r.p_value = chi2_pvalue(r.statistic, r.dof);
  return r;
}

Chi2Result chi2_poisson_fit(const std::vector<uint64_t>& samples, double mean) {
  if (samples.empty()) throw std::invalid_argument("chi2_poisson_fit: empty");
  uint64_t max_v = 0;
  for (auto v : samples) max_v = std::max(max_v, v);
  const std::size_t cells = static_cast<std::size_t>(max_v) + 2;  // last = tail
  std::vector<double> obs(cells, 0.0), exp(cells, 0.0);
  for (auto v : samples) obs[v] += 1.0;
  const double n = static_cast<double>(samples.size());
  double pmf = std::exp(-mean), cum = 0.0;
  for (std::size_t k = 0; k + 1 < cells; ++k) {
    exp[k] = n * pmf;
    cum += pmf;
    pmf *= mean / static_cast<double>(k + 1);
  }
  exp[cells - 1] = n * std::max(0.0, 1.0 - cum);
  return chi2_goodness(obs, exp);
}

Chi2Result chi2_geometric_fit(const std::vector<uint32_t>& samples, double alpha) {
  if (samples.empty()) throw std::invalid_argument("chi2_geometric_fit: empty");
  uint32_t max_v = 1;
  for (auto v : samples) max_v = std::max(max_v, v);
  const std::size_t cells = static_cast<std::size_t>(max_v) + 1;  // 1..max, tail
  std::vector<double> obs(cells, 0.0), exp(cells, 0.0);
  for (auto v : samples) obs[v - 1] += 1.0;
  const double n = static_cast<double>(samples.size());
  double pmf = alpha, cum = 0.0;
  for (std::size_t k = 0; k + 1 < cells; ++k) {
    exp[k] = n * pmf;
    cum += pmf;
    pmf *= 1.0 - alpha;
  }
  exp[cells - 1] = n * std::max(0.0, 1.0 - cum);
  return chi2_goodness(obs, exp);
}

Chi2Result chi2_two_sample(const std::vector<uint64_t>& a,
                           const std::vector<uint64_t>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("chi2_two_sample: empty");
  std::map<uint64_t, std::pair<double, double>> cells;
  for (auto v : a) cells[v].first += 1.0;
  for (auto v : b) cells[v].second += 1.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  // Expected under homogeneity: row total * column total / grand total.
  std::vector<double> obs_a, obs_b, exp_a, exp_b;
  for (const auto& [v, c] : cells) {
    const double tot = c.first + c.second;
    obs_a.push_back(c.first);
    obs_b.push_back(c.second);
    exp_a.push_back(tot * na / (na + nb));
    exp_b.push_back(tot * nb / (na + nb));
  }
  // Pool cells until both expected columns clear the threshold.
  std::vector<double> oa, ob, ea, eb;
  double poa = 0, pob = 0, pea = 0, peb = 0;
  for (std::size_t i = 0; i < obs_a.size(); ++i) {
    poa += obs_a[i];
    pob += obs_b[i];
    pea += exp_a[i];
    peb += exp_b[i];
    if (pea >= 5.0 && peb >= 5.0) {
      oa.push_back(poa);
      ob.push_back(pob);
      ea.push_back(pea);
      eb.push_back(peb);
      poa = pob = pea = peb = 0;
    }
  }
  if (pea > 0 || peb > 0) {
    if (!ea.empty()) {
      oa.back() += poa;
      ob.back() += pob;
      ea.back() += pea;
      eb.back() += peb;
    }
  }
  Chi2Result r;
  if (oa.size() < 2) {
    r.dof = 0;
    r.p_value = 1.0;
    return r;
  }
  for (std::size_t i = 0; i < oa.size(); ++i) {
    r.statistic += (oa[i] - ea[i]) * (oa[i] - ea[i]) / ea[i];
    r.statistic += (ob[i] - eb[i]) * (ob[i] - eb[i]) / eb[i];
  }
  r.dof = static_cast<int>(oa.size()) - 1;
  r.p_value = chi2_pvalue(r.statistic, r.dof);
  return r;
}

WilsonInterval wilson_interval(uint64_t successes, uint64_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: no trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double pearson_correlation(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("pearson_correlation: bad input");
  const auto mx = mean_var(xs), my = mean_var(ys);
  double cov = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    cov += (xs[i] - mx.mean) * (ys[i] - my.mean);
  cov /= static_cast<double>(xs.size() - 1);
  const double sd = std::sqrt(mx.variance * my.variance);
  return sd > 0 ? cov / sd : 0.0;
}

double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("ols_slope: bad input");
  const auto mx = mean_var(xs), my = mean_var(ys);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx.mean) * (ys[i] - my.mean);
    sxx += (xs[i] - mx.mean) * (xs[i] - mx.mean);
  }
  if (sxx == 0) throw std::invalid_argument("ols_slope: degenerate abscissae");
  return sxy / sxx;
}

}  // namespace heapforest
