#ifndef ABDUCT_STATS_HPP
#define ABDUCT_STATS_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace abduct {

/// One encoder's outcome. Accuracies are percentages.
struct ModelRun {
  std::string model_id;
  double sim_accuracy = 0.0;
  double clf_accuracy = 0.0;
  double sim_seconds = 0.0;
  double clf_seconds = 0.0;
};

struct CorrelationReport {
  std::size_t n = 0;
  double pearson_r = 0.0;
  double pearson_p = 1.0;
  double spearman_rho = 0.0;
  double spearman_p = 1.0;
  double mean_speedup = 0.0;
};

/// Product-moment correlation, two-pass in double. Requires n >= 3 and nonzero variances.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Ranks 1..n; tied values share the mean of the positions they occupy.
std::vector<double> fractional_ranks(std::span<const double> xs);

/// Pearson correlation of fractional ranks (tie-corrected).
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double reg_inc_beta(double a, double b, double x);

/// Two-tailed p for a correlation via Student t with n-2 degrees of freedom.
/// |r| == 1 gives 0.
double t_p_value(double r, std::size_t n);

CorrelationReport correlate_runs(std::span<const ModelRun> runs);

/// Header model_id,sim_accuracy,clf_accuracy,sim_seconds,clf_seconds. Time fields accept
/// plain seconds or H:MM:SS.
std::vector<ModelRun> read_runs_csv(const std::filesystem::path& path);
std::string runs_csv(std::span<const ModelRun> runs);

/// Parses "5.68", "0:55:58" or "55:58" into seconds.
double parse_duration(const std::string& text);

std::string report_json(const CorrelationReport& report);

/// Runs sorted by similarity accuracy (descending), with classification accuracy alongside.
std::string ranked_table(std::span<const ModelRun> runs);

}  // namespace abduct

#endif  // ABDUCT_STATS_HPP
