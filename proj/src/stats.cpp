#include "refbias/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace refbias {

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t next = std::min({row[j] + 1, row[j - 1] + 1,
                                   diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = row[j];
      row[j] = next;
    }
  }
  return row[b.size()];
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
  // Acklam's rational approximation, refined with one Halley step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double num = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0 || vb == 0) return std::nan("");
  return num / std::sqrt(va * vb);
}

}  // namespace

std::optional<double> spearman_rho(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("spearman_rho: length mismatch");
  if (a.size() < 2) return std::nullopt;
  double rho = pearson(average_ranks(a), average_ranks(b));
  if (std::isnan(rho)) return std::nullopt;
  return rho;
}

std::vector<double> poisson_binomial_pmf(const std::vector<double>& success_probs) {
  std::vector<double> pmf{1.0};
  pmf.reserve(success_probs.size() + 1);
  for (double p : success_probs) {
    if (p < 0.0 || p > 1.0)
      throw std::domain_error("poisson_binomial_pmf: probability outside [0,1]");
    pmf.push_back(0.0);
    for (std::size_t k = pmf.size() - 1; k > 0; --k)
      pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
    pmf[0] *= (1.0 - p);
  }
  return pmf;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Interval bca_from_replicates(const std::vector<double>& data, double point,
                             std::vector<double> replicates, double level) {
  Interval out;
  out.point = point;
  const std::size_t B = replicates.size();
  bool constant = true;
  for (double r : replicates)
    if (r != replicates.front()) { constant = false; break; }
  if (B == 0 || constant) {
    out.low = out.high = constant && B > 0 ? replicates.front() : point;
    if (B == 0) out.low = out.high = point;
    return out;
  }

  // Bias correction from the replicate distribution, half weight on ties.
  double below = 0;
  for (double r : replicates) {
    if (r < point) below += 1.0;
    else if (r == point) below += 0.5;
  }
  double frac = below / static_cast<double>(B);
  frac = std::min(std::max(frac, 0.5 / B), 1.0 - 0.5 / B);
  const double z0 = normal_quantile(frac);

  // Jackknife acceleration.
  double accel = 0.0;
  if (data.size() >= 2) {
    const std::size_t n = data.size();
    const double total = std::accumulate(data.begin(), data.end(), 0.0);
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i)
      loo[i] = (total - data[i]) / static_cast<double>(n - 1);
    const double loo_mean = mean(loo);
    double s2 = 0, s3 = 0;
    for (double v : loo) {
      double d = loo_mean - v;
      s2 += d * d;
      s3 += d * d * d;
    }
    if (s2 > 0) accel = s3 / (6.0 * std::pow(s2, 1.5));
  }

  const double alpha = (1.0 - level) / 2.0;
  auto adjusted = [&](double a) {
    double za = normal_quantile(a);
    double num = z0 + za;
    double adj = normal_cdf(z0 + num / (1.0 - accel * num));
    return std::min(std::max(adj, 0.0), 1.0);
  };
  std::sort(replicates.begin(), replicates.end());
  auto percentile = [&](double q) {
    double pos = q * static_cast<double>(B - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, B - 1);
    double w = pos - static_cast<double>(lo);
    return replicates[lo] * (1.0 - w) + replicates[hi] * w;
  };
  out.low = percentile(adjusted(alpha));
  out.high = percentile(adjusted(1.0 - alpha));
  if (out.low > out.high) std::swap(out.low, out.high);
  return out;
}

Interval bca_interval(const std::vector<double>& data,
                      const std::function<double(const std::vector<double>&)>& aggregator,
                      int iterations, double level, std::uint64_t seed) {
  if (data.size() < 2) throw std::invalid_argument("bca_interval: need at least 2 data points");
  const double point = aggregator(data);
  std::vector<double> replicates(static_cast<std::size_t>(iterations));
  std::vector<double> resample(data.size());
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  for (int it = 0; it < iterations; ++it) {
    auto rng = derived_rng(seed, static_cast<std::uint64_t>(it));
    for (double& v : resample) v = data[pick(rng)];
    replicates[static_cast<std::size_t>(it)] = aggregator(resample);
  }
  return bca_from_replicates(data, point, std::move(replicates), level);
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 mixing of (seed, a, b).
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  };
  return std::mt19937_64(mix(mix(mix(seed) ^ a) ^ b));
}

}  // namespace refbias
