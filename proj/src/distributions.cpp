#include "heapforest/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace heapforest {

OffspringDistribution OffspringDistribution::dirac(uint32_t k) {
  if (k == 0) throw std::invalid_argument("dirac: mass at 0 is not allowed");
  OffspringDistribution d;
  d.kind_ = Kind::Dirac;
  d.dirac_k_ = k;
  return d;
}

OffspringDistribution OffspringDistribution::geometric(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("geometric: alpha must be in (0, 1)");
  OffspringDistribution d;
  d.kind_ = Kind::Geometric;
  d.alpha_ = alpha;
  return d;
}

OffspringDistribution OffspringDistribution::table(
    std::vector<std::pair<uint32_t, double>> entries) {
  if (entries.empty()) throw std::invalid_argument("table: empty support");
  std::sort(entries.begin(), entries.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [v, p] = entries[i];
    if (v == 0) throw std::invalid_argument("table: mass at 0 is not allowed");
    if (i > 0 && entries[i - 1].first == v)
      throw std::invalid_argument("table: duplicate value");
    if (!(p > 0.0)) throw std::invalid_argument("table: probabilities must be > 0");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("table: probabilities must sum to 1");
  OffspringDistribution d;
  d.kind_ = Kind::Table;
  d.entries_ = std::move(entries);
  double acc = 0.0;
  for (const auto& [v, p] : d.entries_) {
    acc += p;
    d.cdf_.push_back(acc);
  }
  d.cdf_.back() = 1.0;
  return d;
}

OffspringDistribution OffspringDistribution::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("distribution: expected kind:args, got '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string args = text.substr(colon + 1);
  try {
    if (kind == "dirac") {
      std::size_t pos = 0;
      const long k = std::stol(args, &pos);
      if (pos != args.size() || k <= 0)
        throw std::invalid_argument("dirac: K must be a positive integer");
      return dirac(static_cast<uint32_t>(k));
    }
    if (kind == "geom") {
      std::size_t pos = 0;
      const double a = std::stod(args, &pos);
      if (pos != args.size()) throw std::invalid_argument("geom: bad ALPHA");
      return geometric(a);
    }
    if (kind == "table") {
      std::vector<std::pair<uint32_t, double>> entries;
      std::stringstream ss(args);
      std::string item;
      double sum = 0.0;
      while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
          throw std::invalid_argument("table: expected V=P, got '" + item + "'");
        std::size_t pos = 0;
        const long v = std::stol(item.substr(0, eq), &pos);
        const double p = std::stod(item.substr(eq + 1));
        if (v < 0) throw std::invalid_argument("table: negative value");
        entries.emplace_back(static_cast<uint32_t>(v), p);
        sum += p;
      }
      if (entries.empty()) throw std::invalid_argument("table: empty");
      if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("table: probabilities must sum to 1");
      for (auto& [v, p] : entries) p /= sum;
      return table(std::move(entries));
    }
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("distribution: number out of range in '" + text + "'");
  }
  throw std::invalid_argument("distribution: unknown kind '" + kind + "'");
}

uint32_t OffspringDistribution::sample(RandomStream& rng) const {
  switch (kind_) {
    case Kind::Dirac:
      return dirac_k_;
    case Kind::Geometric:
      return rng.geometric(alpha_);
    case Kind::Table: {
      const double u = rng.next_double();
      const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
      const std::size_t idx =
          std::min(static_cast<std::size_t>(it - cdf_.begin()), entries_.size() - 1);
      return entries_[idx].first;
    }
  }
  throw std::logic_error("unreachable");
}

double OffspringDistribution::mean() const {
  switch (kind_) {
    case Kind::Dirac:
      return dirac_k_;
    case Kind::Geometric:
      return 1.0 / alpha_;
    case Kind::Table: {
      double m = 0.0;
      for (const auto& [v, p] : entries_) m += v * p;
      return m;
    }
  }
  throw std::logic_error("unreachable");
}

std::string OffspringDistribution::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Dirac:
      os << "dirac:" << dirac_k_;
      break;
    case Kind::Geometric:
      os << "geom:" << alpha_;
      break;
    case Kind::Table: {
      os << "table:";
      bool first = true;
      for (const auto& [v, p] : entries_) {
        if (!first) os << ',';
        os << v << '=' << p;
        first = false;
      }
      break;
    }
  }
  return os.str();
}

std::vector<Atom> sample_marked_ppp(double x_lo, double x_hi, double t_max,
                                    const OffspringDistribution& dist,
                                    RandomStream& rng) {
  if (x_hi < x_lo || t_max < 0)
    throw std::invalid_argument("sample_marked_ppp: inverted rectangle");
  const double area = (x_hi - x_lo) * t_max;
  std::vector<Atom> atoms;
  if (area == 0) return atoms;
  const uint64_t count = rng.poisson(area);
  atoms.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    Atom a;
    a.label = rng.uniform(x_lo, x_hi);
    a.time = rng.uniform(0.0, t_max);
    a.lives = dist.sample(rng);
    atoms.push_back(a);
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.time < b.time; });
  return atoms;
}

std::vector<double> sample_sink_process(double lambda, double alpha,
                                        double t_max, RandomStream& rng,
                                        double eps_trunc) {
  if (lambda < 0) throw std::invalid_argument("sample_sink_process: lambda < 0");
  if (!(alpha > 0) || alpha > 1)
    throw std::invalid_argument("sample_sink_process: alpha must be in (0, 1]");
  if (t_max < 0) throw std::invalid_argument("sample_sink_process: t_max < 0");
  std::vector<double> sinks;
  if (t_max == 0) return sinks;
  const double beta = 1.0 - alpha;
  if (lambda == 0 && (beta == 0 || !(eps_trunc > 0)))
    throw std::invalid_argument(
        "sample_sink_process: lambda = 0 needs alpha < 1 and eps_trunc > 0");
  // Map unit-rate arrivals through the inverse cumulative intensity.
  double y = 0.0;
  for (;;) {
    y += rng.exponential(1.0);
    double s;
    if (beta == 0) {
      s = lambda * y;
    } else if (lambda == 0) {
      s = eps_trunc * std::exp(beta * y);
    } else {
      s = lambda * std::expm1(beta * y) / beta;
    }
    if (s > t_max) break;
    sinks.push_back(s);
  }
  return sinks;
}

}  // namespace heapforest
