#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace refbias {

std::size_t levenshtein(std::string_view a, std::string_view b);

double normal_cdf(double z);
double normal_quantile(double p);  // inverse of normal_cdf, p in (0,1)

// Average-rank Spearman correlation; nullopt when fewer than 2 pairs or
// either side is constant.
std::optional<double> spearman_rho(const std::vector<double>& a,
                                   const std::vector<double>& b);

// Exact pmf of a sum of independent Bernoulli(p_i), by convolution.
// Result has size N+1 and sums to 1 within 1e-12.
std::vector<double> poisson_binomial_pmf(const std::vector<double>& success_probs);

struct Interval {
  double low = 0;
  double point = 0;
  double high = 0;
};

// Bias-corrected and accelerated bootstrap interval for
// aggregator(data). Constant data yields a zero-width interval.
Interval bca_interval(const std::vector<double>& data,
                      const std::function<double(const std::vector<double>&)>& aggregator,
                      int iterations, double level, std::uint64_t seed);

// BCa endpoints computed from replicates that were produced elsewhere
// (e.g. simulation iterations). `data` is used for the jackknife
// acceleration; point is aggregator(data).
Interval bca_from_replicates(const std::vector<double>& data, double point,
                             std::vector<double> replicates, double level);

double mean(const std::vector<double>& v);

// Deterministic per-task RNG stream derived from a master seed,
// independent of scheduling order.
std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace refbias
