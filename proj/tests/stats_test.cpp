#include "abduct/errors.hpp"
#include "abduct/stats.hpp"

#include "temp_dir.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace abduct {
namespace {

const std::filesystem::path kReferenceRuns = std::filesystem::path(ABDUCT_FIXTURE_DIR) / "reference_runs.csv";

TEST(Pearson, PerfectLinear) {
  const std::vector<double> x = {1, 2, 3};
  EXPECT_NEAR(pearson(x, std::vector<double>{2, 4, 6}), 1.0, 1e-15);
  EXPECT_NEAR(pearson(x, std::vector<double>{3, 2, 1}), -1.0, 1e-15);
}

TEST(Pearson, Errors) {
  const std::vector<double> x = {1, 2, 3};
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), StatsError);
  EXPECT_THROW(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), StatsError);
  EXPECT_THROW(pearson(x, std::vector<double>{5, 5, 5}), StatsError);
  EXPECT_THROW(pearson(std::vector<double>{5, 5, 5}, x), StatsError);
}

TEST(Pearson, AffineMapGivesSign) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(10), y(10);
    for (auto& v : x) v = g(rng);
    const double a = g(rng), b = (trial % 2 ? 1.0 : -1.0) * (0.1 + std::abs(g(rng)));
    for (int i = 0; i < 10; ++i) y[i] = a + b * x[i];
    EXPECT_NEAR(pearson(x, y), b > 0 ? 1.0 : -1.0, 1e-12);
    EXPECT_EQ(pearson(x, y), pearson(y, x));
  }
}

TEST(FractionalRanks, Examples) {
  EXPECT_EQ(fractional_ranks(std::vector<double>{10, 20, 30}), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(fractional_ranks(std::vector<double>{1, 1, 2}), (std::vector<double>{1.5, 1.5, 3}));
  EXPECT_EQ(fractional_ranks(std::vector<double>{5, 5, 5, 5}), (std::vector<double>{2.5, 2.5, 2.5, 2.5}));
  EXPECT_EQ(fractional_ranks(std::vector<double>{3, 1, 3, 2}), (std::vector<double>{3.5, 1, 3.5, 2}));
  EXPECT_TRUE(fractional_ranks(std::vector<double>{}).empty());
}

// Average ranks by counting: rank = #less + (#equal + 1) / 2.
std::vector<double> counting_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

double covariance_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double c = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    c += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return c / std::sqrt(vx * vy);
}

TEST(Spearman, MonotoneIsOne) {
  const std::vector<double> x = {0.3, 1.5, -2.0, 4.0, 0.0};
  std::vector<double> y;
  for (double v : x) y.push_back(std::exp(v));
  EXPECT_NEAR(spearman(x, y), 1.0, 1e-15);
}

TEST(Spearman, MatchesBruteForceRankOracle) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> small(0, 5);  // ties are common
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(8), y(8);
    for (auto& v : x) v = small(rng);
    for (auto& v : y) v = small(rng);
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
        std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
      continue;
    }
    EXPECT_NEAR(spearman(x, y), covariance_correlation(counting_ranks(x), counting_ranks(y)), 1e-12);
  }
}

TEST(RegIncBeta, BoundariesAndClosedForms) {
  EXPECT_EQ(reg_inc_beta(2.5, 0.5, 0.0), 0.0);
  EXPECT_EQ(reg_inc_beta(2.5, 0.5, 1.0), 1.0);
  for (double x : {0.25, 0.5, 0.9}) EXPECT_NEAR(reg_inc_beta(1, 1, x), x, 1e-14);
  EXPECT_NEAR(reg_inc_beta(2, 2, 0.5), 0.5, 1e-14);
  EXPECT_THROW(reg_inc_beta(0, 1, 0.5), StatsError);
  EXPECT_THROW(reg_inc_beta(1, -1, 0.5), StatsError);
  EXPECT_THROW(reg_inc_beta(1, 1, 1.5), StatsError);
}

TEST(RegIncBeta, MatchesBoostOverTestedDomain) {
  for (double a : {0.5, 1.0, 1.5, 2.5, 7.5, 15.0, 49.0}) {
    for (double b : {0.5, 1.0, 3.0, 10.0}) {
      for (int k = 1; k < 100; ++k) {
        const double x = k / 100.0;
        EXPECT_NEAR(reg_inc_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-10) << a << " " << b << " " << x;
      }
    }
  }
}

TEST(TPValue, Examples) {
  EXPECT_NEAR(t_p_value(0.0, 17), 1.0, 1e-15);
  EXPECT_NEAR(t_p_value(0.0, 3), 1.0, 1e-15);
  EXPECT_NEAR(t_p_value(0.65, 17), 0.005, 0.001);
  EXPECT_NEAR(t_p_value(0.67, 17), 0.003, 0.001);
  EXPECT_EQ(t_p_value(1.0, 10), 0.0);
  EXPECT_EQ(t_p_value(-1.0, 10), 0.0);
  EXPECT_THROW(t_p_value(0.5, 2), StatsError);
}

TEST(TPValue, SymmetricAndDecreasing) {
  for (std::size_t n : {3u, 5u, 17u, 100u}) {
    double prev = 2.0;
    for (int k = 0; k < 100; ++k) {
      const double r = k / 100.0;
      EXPECT_EQ(t_p_value(r, n), t_p_value(-r, n));
      const double p = t_p_value(r, n);
      EXPECT_LT(p, prev);
      prev = p;
    }
  }
}

TEST(ParseDuration, Formats) {
  EXPECT_EQ(parse_duration("5.68"), 5.68);
  EXPECT_EQ(parse_duration("0:55:58"), 3358.0);
  EXPECT_EQ(parse_duration("3:32:47"), 12767.0);
  EXPECT_EQ(parse_duration("1:30"), 90.0);
  EXPECT_THROW(parse_duration("abc"), DataError);
  EXPECT_THROW(parse_duration("-1"), DataError);
}

TEST(ReferenceRuns, FixtureValuesPinnedByOracle) {
  // Expected values computed offline with exact rational arithmetic (direct covariance formula,
  // ranks by sorting) and the t-distribution tail via an independent incomplete-beta routine.
  const auto runs = read_runs_csv(kReferenceRuns);
  ASSERT_EQ(runs.size(), 17u);
  EXPECT_EQ(runs.front().model_id, "albert-base-v2");
  EXPECT_EQ(runs[10].model_id, "google/electra-large-discriminator");
  EXPECT_EQ(runs[10].sim_accuracy, 52.74);
  EXPECT_EQ(runs[10].clf_accuracy, 88.51);
  EXPECT_EQ(runs[13].clf_accuracy, 84.14);

  const CorrelationReport rep = correlate_runs(runs);
  EXPECT_EQ(rep.n, 17u);
  EXPECT_NEAR(rep.pearson_r, 0.625549365039868, 1e-12);
  EXPECT_NEAR(rep.spearman_rho, 0.6654447769226501, 1e-12);
  EXPECT_NEAR(rep.pearson_p, 0.007237770178898625, 1e-10);
  EXPECT_NEAR(rep.spearman_p, 0.003552118771008968, 1e-10);
  EXPECT_NEAR(rep.mean_speedup, 1138.1945364835756, 1e-9);

  std::vector<double> sim, clf;
  for (const auto& r : runs) {
    sim.push_back(r.sim_accuracy);
    clf.push_back(r.clf_accuracy);
  }
  EXPECT_NEAR(rep.spearman_rho, covariance_correlation(counting_ranks(sim), counting_ranks(clf)), 1e-12);
  EXPECT_NEAR(rep.pearson_r, covariance_correlation(sim, clf), 1e-12);
}

TEST(CorrelateRuns, IdenticalColumnsAndErrors) {
  std::vector<ModelRun> runs = {{"a", 50, 50, 1, 10}, {"b", 60, 60, 2, 40}, {"c", 55, 55, 1, 30}};
  const CorrelationReport rep = correlate_runs(runs);
  EXPECT_NEAR(rep.pearson_r, 1.0, 1e-15);
  EXPECT_NEAR(rep.spearman_rho, 1.0, 1e-15);
  EXPECT_EQ(rep.pearson_p, 0.0);
  EXPECT_NEAR(rep.mean_speedup, 20.0, 1e-12);

  runs.pop_back();
  EXPECT_THROW(correlate_runs(runs), StatsError);
}

TEST(CorrelateRuns, UntimedRunsReportNullSpeedup) {
  const std::vector<ModelRun> runs = {{"a", 50, 50, 0, 0}, {"b", 60, 61, 0, 0}, {"c", 55, 52, 0, 0}};
  const std::string json = report_json(correlate_runs(runs));
  EXPECT_NE(json.find("\"mean_speedup\": null"), std::string::npos) << json;
}

TEST(RunsCsv, RoundtripAndValidation) {
  testing::TempDir dir;
  const std::vector<ModelRun> runs = {{"org/a", 51.5, 74.87, 2.77, 3156}, {"b", 49.21, 58.09, 3.82, 5440}};
  testing::write_file(dir / "runs.csv", runs_csv(runs));
  const auto back = read_runs_csv(dir / "runs.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].model_id, "org/a");
  EXPECT_EQ(back[0].clf_accuracy, 74.87);
  EXPECT_EQ(back[1].clf_seconds, 5440.0);

  testing::write_file(dir / "bad.csv", "model,x\n");
  EXPECT_THROW(read_runs_csv(dir / "bad.csv"), DataError);
  testing::write_file(dir / "range.csv", "model_id,sim_accuracy,clf_accuracy,sim_seconds,clf_seconds\na,101,5,1,1\n");
  EXPECT_THROW(read_runs_csv(dir / "range.csv"), DataError);
  EXPECT_THROW(read_runs_csv(dir / "none.csv"), IoError);
}

TEST(RankedTable, SortedBySimilarity) {
  const std::vector<ModelRun> runs = {{"low", 48, 60, 1, 1}, {"high", 53, 80, 1, 1}, {"mid", 50, 70, 1, 1}};
  const std::string t = ranked_table(runs);
  EXPECT_LT(t.find("high"), t.find("mid"));
  EXPECT_LT(t.find("mid"), t.find("low"));
  EXPECT_NE(t.find("80.00"), std::string::npos);
}

}  // namespace
}  // namespace abduct
