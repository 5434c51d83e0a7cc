#include "abduct/stats.hpp"

#include "abduct/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace abduct {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(trim(field));
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw DataError("not a number: '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(value)) throw DataError("not a number: '" + text + "'");
  return value;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Lentz's method for the continued fraction of I_x(a, b); valid for x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw StatsError("reg_inc_beta: continued fraction did not converge");
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw StatsError("correlation: length mismatch (" + std::to_string(xs.size()) + " vs " +
                     std::to_string(ys.size()) + ")");
  }
  const std::size_t n = xs.size();
  if (n < 3) throw StatsError("correlation: need at least 3 pairs, got " + std::to_string(n));

  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw StatsError("correlation: zero variance in first column");
  if (syy == 0.0) throw StatsError("correlation: zero variance in second column");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> fractional_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    // positions i..j (0-based) hold ranks i+1..j+1
    const double shared = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw StatsError("correlation: length mismatch (" + std::to_string(xs.size()) + " vs " +
                     std::to_string(ys.size()) + ")");
  }
  const auto rx = fractional_ranks(xs);
  const auto ry = fractional_ranks(ys);
  return pearson(rx, ry);
}

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw StatsError("reg_inc_beta: a and b must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) throw StatsError("reg_inc_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::clamp(front * beta_continued_fraction(a, b, x) / a, 0.0, 1.0);
  }
  return std::clamp(1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b, 0.0, 1.0);
}

double t_p_value(double r, std::size_t n) {
  if (n < 3) throw StatsError("p-value: need n >= 3, got " + std::to_string(n));
  if (!std::isfinite(r) || std::fabs(r) > 1.0) throw StatsError("p-value: correlation outside [-1, 1]");
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t2 = r2 * df / (1.0 - r2);
  return reg_inc_beta(0.5 * df, 0.5, df / (df + t2));
}

CorrelationReport correlate_runs(std::span<const ModelRun> runs) {
  if (runs.size() < 3) throw StatsError("correlation: need at least 3 runs, got " + std::to_string(runs.size()));
  std::vector<double> sim, clf;
  sim.reserve(runs.size());
  clf.reserve(runs.size());
  for (const auto& run : runs) {
    sim.push_back(run.sim_accuracy);
    clf.push_back(run.clf_accuracy);
  }

  CorrelationReport rep;
  rep.n = runs.size();
  rep.pearson_r = pearson(sim, clf);
  rep.pearson_p = t_p_value(rep.pearson_r, rep.n);
  rep.spearman_rho = spearman(sim, clf);
  rep.spearman_p = t_p_value(rep.spearman_rho, rep.n);

  double ratio_sum = 0.0;
  bool timed = true;
  for (const auto& run : runs) {
    if (!(run.sim_seconds > 0.0)) {
      timed = false;
      break;
    }
    ratio_sum += run.clf_seconds / run.sim_seconds;
  }
  rep.mean_speedup = timed ? ratio_sum / static_cast<double>(runs.size()) : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

double parse_duration(const std::string& text) {
  const std::string t = trim(text);
  if (t.find(':') == std::string::npos) {
    const double v = parse_number(t);
    if (v < 0.0) throw DataError("negative duration: '" + t + "'");
    return v;
  }
  const auto parts = split(t, ':');
  if (parts.size() < 2 || parts.size() > 3) throw DataError("bad duration: '" + t + "'");
  double seconds = 0.0;
  for (const auto& p : parts) {
    const double v = parse_number(p);
    if (v < 0.0) throw DataError("bad duration: '" + t + "'");
    seconds = seconds * 60.0 + v;
  }
  return seconds;
}

std::vector<ModelRun> read_runs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  static const std::vector<std::string> kHeader = {"model_id", "sim_accuracy", "clf_accuracy", "sim_seconds",
                                                   "clf_seconds"};
  std::vector<ModelRun> runs;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (!have_header) {
      if (fields != kHeader) {
        throw DataError("runs CSV must start with header model_id,sim_accuracy,clf_accuracy,sim_seconds,clf_seconds");
      }
      have_header = true;
      continue;
    }
    const std::string where = " at line " + std::to_string(line_no);
    if (fields.size() != kHeader.size()) throw DataError("expected 5 fields" + where);
    ModelRun run;
    try {
      run.model_id = fields[0];
      run.sim_accuracy = parse_number(fields[1]);
      run.clf_accuracy = parse_number(fields[2]);
      run.sim_seconds = parse_duration(fields[3]);
      run.clf_seconds = parse_duration(fields[4]);
    } catch (const DataError& e) {
      throw DataError(e.what() + where);
    }
    if (run.model_id.empty()) throw DataError("empty model_id" + where);
    if (run.sim_accuracy < 0.0 || run.sim_accuracy > 100.0 || run.clf_accuracy < 0.0 || run.clf_accuracy > 100.0) {
      throw DataError("accuracy outside [0, 100]" + where);
    }
    runs.push_back(std::move(run));
  }
  if (!have_header) throw DataError("runs CSV is empty");
  return runs;
}

std::string runs_csv(std::span<const ModelRun> runs) {
  std::string out = "model_id,sim_accuracy,clf_accuracy,sim_seconds,clf_seconds\n";
  for (const auto& r : runs) {
    out += r.model_id + "," + fmt_double(r.sim_accuracy) + "," + fmt_double(r.clf_accuracy) + "," +
           fmt_double(r.sim_seconds) + "," + fmt_double(r.clf_seconds) + "\n";
  }
  return out;
}

std::string report_json(const CorrelationReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["pearson_r"] = report.pearson_r;
  j["pearson_p"] = report.pearson_p;
  j["spearman_rho"] = report.spearman_rho;
  j["spearman_p"] = report.spearman_p;
  if (std::isfinite(report.mean_speedup)) {
    j["mean_speedup"] = report.mean_speedup;
  } else {
    j["mean_speedup"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string ranked_table(std::span<const ModelRun> runs) {
  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return runs[a].sim_accuracy > runs[b].sim_accuracy; });

  std::size_t width = 8;
  for (const auto& r : runs) width = std::max(width, r.model_id.size());

  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%-4s  %-*s  %8s  %8s\n", "rank", static_cast<int>(width), "model_id", "sim_acc",
                "clf_acc");
  out += buf;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& r = runs[order[k]];
    std::snprintf(buf, sizeof(buf), "%-4zu  %-*s  %8.2f  %8.2f\n", k + 1, static_cast<int>(width),
                  r.model_id.c_str(), r.sim_accuracy, r.clf_accuracy);
    out += buf;
  }
  return out;
}

}  // namespace abduct
