#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "beamloc/geometry.hpp"
#include "beamloc/metrics.hpp"
#include "test_helpers.hpp"

using namespace beamloc;

namespace {

EstimateSet one_sample(SourcePoint truth, SourcePoint est) {
  EstimateSet s;
  s.method = "t";
  s.records.push_back({0, truth, est, 0.0, false});
  return s;
}

EstimateSet random_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-1.4, 1.4);
  std::uniform_real_distribution<double> level(60.0, 100.0);
  std::normal_distribution<double> err(0.0, 0.1);
  EstimateSet s;
  s.method = "rand";
  for (std::size_t i = 0; i < n; ++i) {
    const SourcePoint truth{pos(rng), pos(rng), level(rng)};
    const SourcePoint est{truth.x + err(rng), truth.y + err(rng), truth.spl + err(rng)};
    s.records.push_back({static_cast<int>(i), truth, est, 0.0, false});
  }
  return s;
}

}  // namespace

TEST_CASE("perfect predictions score zero everywhere") {
  EstimateSet s = random_set(20, 1);
  for (auto& r : s.records) r.est = r.truth;
  CHECK(mde(s) == 0.0);
  CHECK(mae_spl(s) == 0.0);
  const auto pct = mape(s);
  CHECK(pct.first == 0.0);
  CHECK(pct.second == 0.0);
}

TEST_CASE("distance error of a 3-4-5 offset") {
  const EstimateSet s = one_sample({0.1, 0.2, 90.0}, {0.13, 0.24, 90.0});
  CHECK(mde(s) == Catch::Approx(0.05).margin(1e-15));
}

TEST_CASE("mean of two distance errors") {
  EstimateSet s;
  s.method = "t";
  s.records.push_back({0, {0.5, 0.5, 90.0}, {0.55, 0.5, 90.0}, 0.0, false});
  s.records.push_back({1, {-0.5, 0.5, 90.0}, {-0.5, 0.35, 90.0}, 0.0, false});
  CHECK(mde(s) == Catch::Approx(0.10).margin(1e-15));
}

TEST_CASE("spl errors average by absolute value") {
  EstimateSet s;
  s.method = "t";
  s.records.push_back({0, {0.1, 0.1, 80.0}, {0.1, 0.1, 81.0}, 0.0, false});
  s.records.push_back({1, {0.1, 0.1, 80.0}, {0.1, 0.1, 77.0}, 0.0, false});
  CHECK(mae_spl(s) == Catch::Approx(2.0).margin(1e-15));
  CHECK(mae_spl(one_sample({0.2, 0.0, 85.0}, {0.2, 0.0, 85.0 - 0.5641})) ==
        Catch::Approx(0.5641).margin(1e-12));
}

TEST_CASE("percentage errors on doubled location and 2 percent spl") {
  const EstimateSet s = one_sample({0.03, 0.04, 80.0}, {0.06, 0.08, 81.6});
  const auto pct = mape(s);
  CHECK(pct.first == Catch::Approx(100.0).margin(1e-9));
  CHECK(pct.second == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("empty or all-failed sets are rejected") {
  EstimateSet s;
  s.method = "t";
  CHECK_THROWS_AS(mde(s), InvalidArgument);
  CHECK_THROWS_AS(mae_spl(s), InvalidArgument);
  CHECK_THROWS_AS(mape(s), InvalidArgument);
  s.records.push_back({0, {0, 0, 0}, {0, 0, 0}, 0.0, true});
  CHECK_THROWS_AS(mde(s), InvalidArgument);
}

TEST_CASE("metrics are permutation-invariant") {
  const EstimateSet a = random_set(50, 7);
  EstimateSet b = a;
  std::mt19937_64 rng(8);
  std::shuffle(b.records.begin(), b.records.end(), rng);
  CHECK(mde(b) == Catch::Approx(mde(a)).margin(1e-12));
  CHECK(mae_spl(b) == Catch::Approx(mae_spl(a)).margin(1e-12));
  CHECK(mape(b).first == Catch::Approx(mape(a).first).margin(1e-12));
  CHECK(mape(b).second == Catch::Approx(mape(a).second).margin(1e-12));
}

TEST_CASE("a constant offset shows up as exactly its length") {
  EstimateSet s = random_set(30, 9);
  const double dx = 0.07, dy = -0.024;
  for (auto& r : s.records) r.est = {r.truth.x + dx, r.truth.y + dy, r.truth.spl};
  CHECK(mde(s) == Catch::Approx(std::hypot(dx, dy)).margin(1e-12));
}

TEST_CASE("near-origin truths are excluded from the location percentage") {
  EstimateSet s;
  s.method = "t";
  s.records.push_back({0, {0.0, 0.0, 90.0}, {0.05, 0.0, 90.0}, 0.0, false});
  s.records.push_back({1, {0.5, 0.0, 90.0}, {0.55, 0.0, 90.0}, 0.0, false});
  s.records.push_back({2, {0.1, 0.1, 0.0}, {0.1, 0.1, 1.0}, 0.0, false});
  int skipped_x = -1, skipped_spl = -1;
  const auto pct = mape(s, &skipped_x, &skipped_spl);
  CHECK(skipped_x == 1);
  CHECK(skipped_spl == 1);
  // mean over the two remaining samples: 10% and 0%
  CHECK(pct.first == Catch::Approx(5.0).margin(1e-9));
  // the excluded samples still count toward the distance metrics
  CHECK(mde(s) == Catch::Approx(0.05 * 2 / 3.0).margin(1e-12));

  const MetricsReport rep = metrics_report(s);
  CHECK(rep.n_excluded_x == 1);
  CHECK(rep.n_excluded_spl == 1);
  CHECK(rep.n_failed == 0);
}

TEST_CASE("an oracle method scores zero through the comparison harness") {
  std::vector<SourcePoint> truth;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(0.2, 1.2);
  for (int i = 0; i < 10; ++i) truth.push_back({pos(rng), pos(rng), 80.0 + i});

  const NamedEstimator oracle{"oracle", [&](std::size_t i) { return truth[i]; }};
  const ComparisonResult res = compare({oracle}, truth, 3);
  REQUIRE(res.reports.size() == 1);
  CHECK(res.reports[0].method == "oracle");
  CHECK(res.reports[0].mde_m == 0.0);
  CHECK(res.reports[0].mae_spl_db == 0.0);
  CHECK(res.reports[0].mape_x_pct == 0.0);
  CHECK(res.reports[0].n_failed == 0);
  CHECK(res.reports[0].time_s >= 0.0);
  for (const auto& r : res.estimates[0].records) CHECK(r.time_s >= 0.0);
}

TEST_CASE("nearest-node quantization error matches the analytic scale") {
  ScanGrid grid;  // 31x31 over [-1.5, 1.5]^2, spacing 0.1
  std::vector<SourcePoint> truth;
  std::mt19937_64 rng(20260814);
  std::uniform_real_distribution<double> pos(-1.5, 1.5);
  for (int i = 0; i < 10000; ++i) truth.push_back({pos(rng), pos(rng), 85.0});

  const NamedEstimator snap{"nearest-node", [&](std::size_t i) {
                              const std::size_t g = grid.nearest_node(truth[i].x, truth[i].y);
                              return SourcePoint{grid.node_x_of(g), grid.node_y_of(g), 85.0};
                            }};
  const ComparisonResult res = compare({snap}, truth, 1);
  const MetricsReport& rep = res.reports[0];
  INFO("MDE " << rep.mde_m << " m, MAPE_X " << rep.mape_x_pct << " %");
  CHECK(rep.mde_m == Catch::Approx(0.0383).margin(0.003));
  // expected value for uniform offsets in a square of side h
  CHECK(rep.mde_m == Catch::Approx(0.3826 * 0.1).margin(0.002));
  CHECK(rep.mape_x_pct == Catch::Approx(4.6632).margin(0.5));
  CHECK(rep.mae_spl_db == 0.0);
}

TEST_CASE("methods report in registration order") {
  const std::vector<SourcePoint> truth{{0.5, 0.5, 90.0}, {0.2, -0.4, 85.0}};
  const NamedEstimator b{"bravo", [&](std::size_t i) { return truth[i]; }};
  const NamedEstimator a{"alpha", [&](std::size_t i) { return truth[i]; }};
  const ComparisonResult res = compare({b, a}, truth, 1);
  REQUIRE(res.reports.size() == 2);
  CHECK(res.reports[0].method == "bravo");
  CHECK(res.reports[1].method == "alpha");
}

TEST_CASE("per-sample failures are counted and excluded from the means") {
  const std::vector<SourcePoint> truth{{0.5, 0.0, 90.0}, {0.6, 0.0, 91.0}, {0.7, 0.0, 92.0}};
  const NamedEstimator flaky{"flaky", [&](std::size_t i) -> SourcePoint {
                               if (i == 1) throw NoSourceError("flat map");
                               return {truth[i].x + 0.03, truth[i].y + 0.04, truth[i].spl};
                             }};
  const EstimateSet set = run_method(flaky, truth, 1);
  CHECK(set.records[1].failed);
  const MetricsReport rep = metrics_report(set);
  CHECK(rep.n_failed == 1);
  CHECK(rep.mde_m == Catch::Approx(0.05).margin(1e-12));
}

TEST_CASE("harness argument validation") {
  const std::vector<SourcePoint> truth{{0.5, 0.0, 90.0}};
  const NamedEstimator ok{"ok", [&](std::size_t i) { return truth[i]; }};
  CHECK_THROWS_AS(compare({}, truth, 1), InvalidArgument);
  CHECK_THROWS_AS(compare({ok}, {}, 1), InvalidArgument);
  CHECK_THROWS_AS(run_method(ok, truth, 0), InvalidArgument);
  CHECK_THROWS_AS(run_method({"null", nullptr}, truth, 1), InvalidArgument);
}

TEST_CASE("csv outputs are stable apart from the time columns") {
  testutil::TempDir tmp("metrics");
  EstimateSet s = random_set(5, 31);
  s.method = "das";
  const MetricsReport rep = metrics_report(s);
  save_metrics_csv(tmp.file("m1.csv"), {rep});
  save_metrics_csv(tmp.file("m2.csv"), {rep});
  save_estimates_csv(tmp.file("e1.csv"), s);

  auto slurp = [](const std::string& p) {
    std::ifstream is(p);
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  };
  CHECK(slurp(tmp.file("m1.csv")) == slurp(tmp.file("m2.csv")));

  std::ifstream is(tmp.file("m1.csv"));
  std::string header;
  std::getline(is, header);
  CHECK(header == "method,mde_m,mae_spl_db,mape_x_pct,mape_spl_pct,time_s,n_failed");
  std::string row;
  std::getline(is, row);
  CHECK(row.substr(0, 4) == "das,");

  std::ifstream es(tmp.file("e1.csv"));
  std::getline(es, header);
  CHECK(header == "id,true_x,true_y,true_spl,est_x,est_y,est_spl,time_s,failed");
  int rows = 0;
  while (std::getline(es, row))
    if (!row.empty()) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("text table lists every method with the csv columns") {
  EstimateSet s = random_set(4, 41);
  s.method = "clean-sc";
  const std::string table = format_metrics_table({metrics_report(s)});
  CHECK(table.find("method") != std::string::npos);
  CHECK(table.find("mde_m") != std::string::npos);
  CHECK(table.find("clean-sc") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 2);
}
