#include "refbias/unseenest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "json.hpp"

#include "lp.hpp"

namespace refbias {

namespace {

double poisson_pmf(double lambda, std::size_t r) {
  return std::exp(static_cast<double>(r) * std::log(lambda) - lambda -
                  std::lgamma(static_cast<double>(r) + 1.0));
}

}  // namespace

std::size_t Fingerprint::distinct() const {
  std::size_t total = 0;
  for (std::size_t r = 1; r < counts.size(); ++r) total += counts[r];
  return total;
}

Fingerprint fingerprint(const std::vector<std::string>& samples) {
  if (samples.empty()) throw std::invalid_argument("fingerprint: empty sample");
  std::map<std::string, std::size_t> occ;
  for (const std::string& s : samples) ++occ[s];
  Fingerprint fp;
  fp.sample_size = samples.size();
  for (const auto& [value, count] : occ) {
    if (count >= fp.counts.size()) fp.counts.resize(count + 1, 0);
    ++fp.counts[count];
  }
  return fp;
}

double CorrectionHistogram::total_mass() const {
  double mass = 0;
  for (const HistogramEntry& e : entries) mass += e.m * e.p;
  return mass;
}

double CorrectionHistogram::support() const {
  double s = 0;
  for (const HistogramEntry& e : entries) s += e.m;
  return s;
}

bool CorrectionHistogram::is_normalized(double tol) const {
  return std::fabs(total_mass() - 1.0) <= tol;
}

CorrectionHistogram empirical_histogram(const std::vector<std::string>& samples) {
  if (samples.empty()) throw std::invalid_argument("empirical_histogram: empty sample");
  std::map<std::string, std::size_t> occ;
  for (const std::string& s : samples) ++occ[s];
  std::map<std::size_t, HistogramEntry> by_count;
  const double n = static_cast<double>(samples.size());
  for (const auto& [value, count] : occ) {
    HistogramEntry& e = by_count[count];
    e.p = static_cast<double>(count) / n;
    e.m += 1;
    e.values.push_back(value);
  }
  CorrectionHistogram h;
  h.n = samples.size();
  for (auto& [count, entry] : by_count) h.entries.push_back(std::move(entry));
  std::sort(h.entries.begin(), h.entries.end(),
            [](const HistogramEntry& a, const HistogramEntry& b) { return a.p < b.p; });
  return h;
}

CorrectionHistogram estimate_histogram(const std::vector<std::string>& samples,
                                       const EstimateConfig& config) {
  if (samples.size() < 2)
    throw std::invalid_argument("estimate_histogram: need a sample of size >= 2");
  const std::size_t n = samples.size();
  const double nf = static_cast<double>(n);

  std::map<std::string, std::size_t> occ;
  for (const std::string& s : samples) ++occ[s];

  // Counts at or above the heavy threshold are trusted empirically; the
  // fingerprint LP covers the rest. The threshold is additionally capped
  // so the LP stays small on large samples.
  const std::size_t heavy_count = std::min<std::size_t>(
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(config.heavy_cutoff * nf))),
      51);

  CorrectionHistogram h;
  h.n = n;
  double heavy_mass = 0;
  std::vector<std::size_t> rare_counts;  // per distinct rare string
  for (const auto& [value, count] : occ) {
    if (count >= heavy_count) {
      HistogramEntry e;
      e.p = static_cast<double>(count) / nf;
      e.m = 1;
      e.values.push_back(value);
      heavy_mass += e.p;
      h.entries.push_back(std::move(e));
    } else {
      rare_counts.push_back(count);
    }
  }

  if (rare_counts.empty()) {
    // Fully heavy sample: empirical histogram, renormalized below.
    std::sort(h.entries.begin(), h.entries.end(),
              [](const HistogramEntry& a, const HistogramEntry& b) { return a.p < b.p; });
    double mass = h.total_mass();
    for (HistogramEntry& e : h.entries) e.m /= mass;
    return h;
  }

  const std::size_t r_max = heavy_count - 1;
  std::vector<double> f(r_max + 1, 0.0);
  for (std::size_t count : rare_counts) f[count] += 1;
  const double rare_distinct = static_cast<double>(rare_counts.size());
  const double rare_mass_target = 1.0 - heavy_mass;

  // Geometric mesh of candidate probability values for the rare region.
  std::vector<double> mesh;
  const double p_min = 1.0 / (config.mesh_min_scale * nf);
  const double p_max = static_cast<double>(heavy_count) / nf;
  for (double p = p_min; p < p_max; p *= config.mesh_ratio) mesh.push_back(p);
  if (mesh.empty()) mesh.push_back(p_min);

  // Variables: h_j (mesh), e_r+ / e_r- (fingerprint residuals), u (support
  // slack). Objective: weighted L1 residual of expected vs observed
  // fingerprints.
  const std::size_t J = mesh.size();
  const std::size_t num_vars = J + 2 * r_max + 1;
  const std::size_t res_plus = J;
  const std::size_t res_minus = J + r_max;
  const std::size_t slack = J + 2 * r_max;

  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (std::size_t r = 1; r <= r_max; ++r) {
    std::vector<double> row(num_vars, 0.0);
    for (std::size_t j = 0; j < J; ++j) row[j] = poisson_pmf(nf * mesh[j], r);
    row[res_plus + r - 1] = -1.0;
    row[res_minus + r - 1] = 1.0;
    a.push_back(std::move(row));
    b.push_back(f[r]);
  }
  {
    std::vector<double> row(num_vars, 0.0);
    for (std::size_t j = 0; j < J; ++j) row[j] = mesh[j];
    a.push_back(std::move(row));
    b.push_back(rare_mass_target);
  }
  {
    // Estimated support can only exceed what was observed.
    std::vector<double> row(num_vars, 0.0);
    for (std::size_t j = 0; j < J; ++j) row[j] = 1.0;
    row[slack] = -1.0;
    a.push_back(std::move(row));
    b.push_back(rare_distinct);
  }

  std::vector<double> cost(num_vars, 0.0);
  for (std::size_t r = 1; r <= r_max; ++r) {
    const double w = 1.0 / std::sqrt(f[r] + 1.0);
    cost[res_plus + r - 1] = w;
    cost[res_minus + r - 1] = w;
  }

  detail::LpResult lp = detail::solve_lp(a, b, cost);
  if (!lp.feasible) {
    CorrectionHistogram fallback = empirical_histogram(samples);
    fallback.lp_fallback = true;
    return fallback;
  }

  for (std::size_t j = 0; j < J; ++j) {
    if (lp.x[j] > 1e-9) {
      HistogramEntry e;
      e.p = mesh[j];
      e.m = lp.x[j];
      h.entries.push_back(std::move(e));
    }
  }
  std::sort(h.entries.begin(), h.entries.end(),
            [](const HistogramEntry& a_, const HistogramEntry& b_) { return a_.p < b_.p; });
  const double mass = h.total_mass();
  if (mass <= 0) {
    CorrectionHistogram fallback = empirical_histogram(samples);
    fallback.lp_fallback = true;
    return fallback;
  }
  for (HistogramEntry& e : h.entries) e.m /= mass;
  return h;
}

double earthmover(const CorrectionHistogram& h1, const CorrectionHistogram& h2) {
  if (!h1.is_normalized() || !h2.is_normalized())
    throw std::invalid_argument("earthmover: histograms must have total mass 1");
  // Merge the two mass functions over the probability-value axis, with
  // opposite signs, and integrate |CDF difference|.
  std::vector<std::pair<double, double>> points;
  for (const HistogramEntry& e : h1.entries) points.emplace_back(e.p, e.m * e.p);
  for (const HistogramEntry& e : h2.entries) points.emplace_back(e.p, -e.m * e.p);
  std::sort(points.begin(), points.end());
  double distance = 0, cdf = 0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    cdf += points[i].second;
    distance += std::fabs(cdf) * (points[i + 1].first - points[i].first);
  }
  return distance;
}

std::vector<SummaryRow> summarize(const CorrectionHistogram& h,
                                  const std::vector<double>& thresholds) {
  std::vector<SummaryRow> rows;
  for (double gamma : thresholds) {
    SummaryRow row;
    row.gamma = gamma;
    for (const HistogramEntry& e : h.entries) {
      if (e.p > gamma) {
        row.count += e.m;
        row.mass += e.m * e.p;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<CorrectionHistogram>& hists,
                                  const std::vector<double>& thresholds) {
  std::vector<SummaryRow> rows;
  for (double gamma : thresholds) rows.push_back(SummaryRow{gamma, 0, 0});
  if (hists.empty()) return rows;
  for (const CorrectionHistogram& h : hists) {
    std::vector<SummaryRow> single = summarize(h, thresholds);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i].count += single[i].count;
      rows[i].mass += single[i].mass;
    }
  }
  for (SummaryRow& row : rows) {
    row.count /= static_cast<double>(hists.size());
    row.mass /= static_cast<double>(hists.size());
  }
  return rows;
}

std::string histogram_to_json_line(const CorrectionHistogram& h) {
  nlohmann::json rec;
  rec["n"] = h.n;
  auto entries = nlohmann::json::array();
  for (const HistogramEntry& e : h.entries) {
    nlohmann::json je;
    je["p"] = e.p;
    je["m"] = e.m;
    if (!e.values.empty()) je["values"] = e.values;
    entries.push_back(std::move(je));
  }
  rec["entries"] = std::move(entries);
  if (h.lp_fallback) rec["lp_fallback"] = true;
  return rec.dump();
}

CorrectionHistogram histogram_from_json_line(const std::string& line) {
  const nlohmann::json rec = nlohmann::json::parse(line);
  CorrectionHistogram h;
  h.n = rec.at("n").get<std::size_t>();
  if (rec.contains("lp_fallback")) h.lp_fallback = rec["lp_fallback"].get<bool>();
  for (const auto& je : rec.at("entries")) {
    HistogramEntry e;
    e.p = je.at("p").get<double>();
    e.m = je.at("m").get<double>();
    if (je.contains("values"))
      for (const auto& v : je["values"]) e.values.push_back(v.get<std::string>());
    if (e.p <= 0) throw std::invalid_argument("histogram entry with non-positive probability");
    h.entries.push_back(std::move(e));
  }
  return h;
}

}  // namespace refbias
