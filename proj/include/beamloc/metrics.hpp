// Error metrics over localization estimates (mean distance error, SPL mean
// absolute error, percentage errors) and the timed side-by-side comparison
// harness that produces the CSV / text reports.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "beamloc/common.hpp"

namespace beamloc {

struct SourcePoint {
  double x = 0.0;
  double y = 0.0;
  double spl = 0.0;
};

struct EstimateRecord {
  int id = 0;
  SourcePoint truth;
  SourcePoint est;
  double time_s = 0.0;  // per-sample wall time, median over timing repeats
  bool failed = false;
};

struct EstimateSet {
  std::string method;
  std::vector<EstimateRecord> records;
};

struct MetricsReport {
  std::string method;
  double mde_m = 0.0;
  double mae_spl_db = 0.0;
  double mape_x_pct = 0.0;
  double mape_spl_pct = 0.0;
  double time_s = 0.0;  // mean per-sample time
  int n_failed = 0;
  int n_excluded_x = 0;    // |truth location| too small for a percentage
  int n_excluded_spl = 0;  // |truth SPL| too small for a percentage
};

// Location norms below this are excluded from MAPE_X rather than dividing by
// a vanishing reference.
inline constexpr double kMapeNormFloor = 1e-6;

namespace detail {

inline std::vector<const EstimateRecord*> usable(const EstimateSet& set, const char* what) {
  std::vector<const EstimateRecord*> out;
  for (const auto& r : set.records)
    if (!r.failed) out.push_back(&r);
  if (out.empty()) throw InvalidArgument(std::string(what) + ": no usable estimates");
  return out;
}

}  // namespace detail

// Mean euclidean distance between estimated and true locations, meters.
inline double mde(const EstimateSet& set) {
  const auto recs = detail::usable(set, "mde");
  double acc = 0.0;
  for (const auto* r : recs) acc += std::hypot(r->est.x - r->truth.x, r->est.y - r->truth.y);
  return acc / static_cast<double>(recs.size());
}

// Mean absolute SPL error, dB.
inline double mae_spl(const EstimateSet& set) {
  const auto recs = detail::usable(set, "mae_spl");
  double acc = 0.0;
  for (const auto* r : recs) acc += std::abs(r->est.spl - r->truth.spl);
  return acc / static_cast<double>(recs.size());
}

// Mean absolute percentage errors (location, SPL). Samples whose reference
// norm is below kMapeNormFloor are excluded and counted.
inline std::pair<double, double> mape(const EstimateSet& set, int* n_excluded_x = nullptr,
                                      int* n_excluded_spl = nullptr) {
  const auto recs = detail::usable(set, "mape");
  double acc_x = 0.0, acc_spl = 0.0;
  std::size_t used_x = 0, used_spl = 0;
  int skip_x = 0, skip_spl = 0;
  for (const auto* r : recs) {
    const double norm = std::hypot(r->truth.x, r->truth.y);
    if (norm < kMapeNormFloor) {
      ++skip_x;
    } else {
      acc_x += std::hypot(r->est.x - r->truth.x, r->est.y - r->truth.y) / norm;
      ++used_x;
    }
    if (std::abs(r->truth.spl) < kMapeNormFloor) {
      ++skip_spl;
    } else {
      acc_spl += std::abs(r->est.spl - r->truth.spl) / std::abs(r->truth.spl);
      ++used_spl;
    }
  }
  if (n_excluded_x) *n_excluded_x = skip_x;
  if (n_excluded_spl) *n_excluded_spl = skip_spl;
  return {used_x ? 100.0 * acc_x / static_cast<double>(used_x) : 0.0,
          used_spl ? 100.0 * acc_spl / static_cast<double>(used_spl) : 0.0};
}

inline MetricsReport metrics_report(const EstimateSet& set) {
  MetricsReport rep;
  rep.method = set.method;
  rep.mde_m = mde(set);
  rep.mae_spl_db = mae_spl(set);
  const auto pct = mape(set, &rep.n_excluded_x, &rep.n_excluded_spl);
  rep.mape_x_pct = pct.first;
  rep.mape_spl_pct = pct.second;
  double t = 0.0;
  std::size_t n = 0;
  for (const auto& r : set.records) {
    if (r.failed) {
      ++rep.n_failed;
      continue;
    }
    t += r.time_s;
    ++n;
  }
  rep.time_s = n ? t / static_cast<double>(n) : 0.0;
  return rep;
}

// One registered method: maps a test-sample index to an estimate. Throwing
// beamloc::Error marks that sample as failed; other exceptions propagate.
struct NamedEstimator {
  std::string name;
  std::function<SourcePoint(std::size_t)> estimate;
};

// Runs one method over the test samples, timing each estimate (median of
// `repeats` serial runs; the estimate itself comes from the first).
inline EstimateSet run_method(const NamedEstimator& method,
                              const std::vector<SourcePoint>& truth, int repeats = 3) {
  if (!method.estimate) throw InvalidArgument("run_method: estimator not set");
  if (repeats < 1) throw InvalidArgument("run_method: repeats must be >= 1");
  EstimateSet set;
  set.method = method.name;
  set.records.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    EstimateRecord rec;
    rec.id = static_cast<int>(i);
    rec.truth = truth[i];
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(repeats));
    try {
      for (int rep = 0; rep < repeats; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        const SourcePoint est = method.estimate(i);
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
        if (rep == 0) rec.est = est;
      }
      std::sort(times.begin(), times.end());
      rec.time_s = times[(times.size() - 1) / 2];
    } catch (const Error&) {
      rec.failed = true;
    }
    set.records.push_back(rec);
  }
  return set;
}

struct ComparisonResult {
  std::vector<EstimateSet> estimates;  // one per method, input order
  std::vector<MetricsReport> reports;
};

inline ComparisonResult compare(const std::vector<NamedEstimator>& methods,
                                const std::vector<SourcePoint>& truth, int repeats = 3) {
  if (methods.empty()) throw InvalidArgument("compare: no methods registered");
  if (truth.empty()) throw InvalidArgument("compare: empty test set");
  ComparisonResult out;
  for (const auto& m : methods) {
    out.estimates.push_back(run_method(m, truth, repeats));
    out.reports.push_back(metrics_report(out.estimates.back()));
  }
  return out;
}

inline void save_metrics_csv(const std::string& path, const std::vector<MetricsReport>& reports) {
  auto os = io::open_out(path, false);
  os << "method,mde_m,mae_spl_db,mape_x_pct,mape_spl_pct,time_s,n_failed\n";
  char line[256];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line), "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n", r.method.c_str(),
                  r.mde_m, r.mae_spl_db, r.mape_x_pct, r.mape_spl_pct, r.time_s, r.n_failed);
    os << line;
  }
  if (!os) throw IoError("failed writing " + path);
}

inline void save_estimates_csv(const std::string& path, const EstimateSet& set) {
  auto os = io::open_out(path, false);
  os << "id,true_x,true_y,true_spl,est_x,est_y,est_spl,time_s,failed\n";
  char line[320];
  for (const auto& r : set.records) {
    std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n", r.id,
                  r.truth.x, r.truth.y, r.truth.spl, r.est.x, r.est.y, r.est.spl, r.time_s,
                  r.failed ? 1 : 0);
    os << line;
  }
  if (!os) throw IoError("failed writing " + path);
}

// Fixed-width text table (same columns as the CSV).
inline std::string format_metrics_table(const std::vector<MetricsReport>& reports) {
  std::string out;
  char line[256];
  std::size_t name_w = 6;
  for (const auto& r : reports) name_w = std::max(name_w, r.method.size());
  std::snprintf(line, sizeof(line), "%-*s %10s %12s %11s %13s %10s %8s\n",
                static_cast<int>(name_w), "method", "mde_m", "mae_spl_db", "mape_x_pct",
                "mape_spl_pct", "time_s", "n_failed");
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line), "%-*s %10.4f %12.4f %11.4f %13.4f %10.4f %8d\n",
                  static_cast<int>(name_w), r.method.c_str(), r.mde_m, r.mae_spl_db,
                  r.mape_x_pct, r.mape_spl_pct, r.time_s, r.n_failed);
    out += line;
  }
  return out;
}

}  // namespace beamloc
