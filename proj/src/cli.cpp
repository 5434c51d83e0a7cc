#include "abduct/cli.hpp"

#include "abduct/classifier.hpp"
#include "abduct/dataset.hpp"
#include "abduct/errors.hpp"
#include "abduct/similarity.hpp"
#include "abduct/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace abduct::cli {

namespace fs = std::filesystem;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("ABDUCT_RANK_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw DataError(std::string("ABDUCT_RANK_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string csv_field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string file_stem_for(const std::string& model_id) {
  std::string s = model_id;
  for (char& c : s) {
    if (c == '/' || c == '\\' || c == ':') c = '_';
  }
  return s;
}

// --- predict-sim -----------------------------------------------------------

struct PredictSimArgs {
  std::string embeddings, labels, out;
  bool no_timing = false;
};

void cmd_predict_sim(const PredictSimArgs& a, std::ostream& out) {
  const EmbeddingStore store = read_embedding_store(a.embeddings);
  const auto labels = load_labels(a.labels, store.instance_count());
  TrackResult r = evaluate_sim(store, labels);
  if (a.no_timing) r.wall_seconds = 0.0;
  write_text(a.out, track_result_json(store.model_id(), "similarity", r));
  out << store.model_id() << " similarity accuracy " << fmt(100.0 * r.accuracy) << "% (" << r.correct << "/" << r.n
      << ")\n";
}

// --- train-head ------------------------------------------------------------

struct TrainHeadArgs {
  std::string train_embeddings, train_labels, dev_embeddings, dev_labels, out, result;
  TrainConfig cfg;
  bool no_timing = false;
};

void cmd_train_head(const TrainHeadArgs& a, std::ostream& out) {
  const EmbeddingStore train = read_embedding_store(a.train_embeddings);
  const auto train_labels = load_labels(a.train_labels, train.instance_count());
  const EmbeddingStore dev = read_embedding_store(a.dev_embeddings);
  const auto dev_labels = load_labels(a.dev_labels, dev.instance_count());
  if (train.dim() != dev.dim()) {
    throw DataError("train store dimension " + std::to_string(train.dim()) + " differs from dev store dimension " +
                    std::to_string(dev.dim()));
  }

  const TrainedHead trained = train_head(train, train_labels, a.cfg);
  TrackResult r = evaluate_clf(trained.head, dev, dev_labels);
  r.wall_seconds += trained.history.wall_seconds;
  if (a.no_timing) r.wall_seconds = 0.0;

  write_text(a.out, head_to_json({train.model_id(), trained.head, a.cfg, trained.history.epoch_losses}));
  fs::path result_path = a.result;
  if (result_path.empty()) {
    result_path = fs::path(a.out);
    result_path.replace_extension(".result.json");
  }
  write_text(result_path, track_result_json(train.model_id(), "classification", r));
  out << train.model_id() << " classification accuracy " << fmt(100.0 * r.accuracy) << "% (" << r.correct << "/"
      << r.n << ")\n";
}

// --- grid ------------------------------------------------------------------

struct GridPoint {
  double learning_rate = 0.0;
  int batch_size = 0;
};

struct ModelEntry {
  std::string model_id;
  fs::path train_embeddings, train_labels, dev_embeddings, dev_labels, sim_embeddings;
  std::vector<GridPoint> grid;
};

struct Manifest {
  std::vector<ModelEntry> models;
  int epochs = 3;
  double weight_decay = 0.01;
  std::uint64_t seed = 0;
  bool allow_any_learning_rate = false;
};

std::vector<GridPoint> parse_grid(const nlohmann::json& g) {
  std::vector<GridPoint> points;
  if (g.is_array()) {
    for (const auto& p : g) points.push_back({p.at("learning_rate").get<double>(), p.at("batch_size").get<int>()});
  } else {
    for (double lr : g.at("learning_rates").get<std::vector<double>>()) {
      for (int bs : g.at("batch_sizes").get<std::vector<int>>()) points.push_back({lr, bs});
    }
  }
  return points;
}

Manifest load_manifest(const fs::path& path, std::uint64_t fallback_seed) {
  const std::string text = read_text(path);
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  Manifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.epochs = j.value("epochs", 3);
    m.weight_decay = j.value("weight_decay", 0.01);
    m.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : fallback_seed;
    m.allow_any_learning_rate = j.value("allow_any_learning_rate", false);
    std::vector<GridPoint> shared;
    if (j.contains("grid")) shared = parse_grid(j.at("grid"));
    for (const auto& e : j.at("models")) {
      ModelEntry me;
      me.model_id = e.at("model_id").get<std::string>();
      me.train_embeddings = resolve(e.at("train_embeddings").get<std::string>());
      me.train_labels = resolve(e.at("train_labels").get<std::string>());
      me.dev_embeddings = resolve(e.at("dev_embeddings").get<std::string>());
      me.dev_labels = resolve(e.at("dev_labels").get<std::string>());
      me.sim_embeddings =
          e.contains("sim_embeddings") ? resolve(e.at("sim_embeddings").get<std::string>()) : me.dev_embeddings;
      me.grid = e.contains("grid") ? parse_grid(e.at("grid")) : shared;
      if (me.grid.empty()) throw DataError("manifest: empty grid for model " + me.model_id);
      m.models.push_back(std::move(me));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  if (m.models.empty()) throw DataError("manifest lists no models");
  for (const auto& me : m.models) {
    for (const auto& p : {me.train_embeddings, me.train_labels, me.dev_embeddings, me.dev_labels, me.sim_embeddings}) {
      if (!fs::exists(p)) throw IoError("manifest path does not exist: " + p.string());
    }
  }
  return m;
}

struct PointOutcome {
  GridPoint point;
  bool ok = false;
  double accuracy = 0.0;
  double seconds = 0.0;
  std::string message;
  std::optional<TrainedHead> trained;
};

/// Highest accuracy; ties go to the lower learning rate, then the smaller batch, then the earlier point.
std::optional<std::size_t> select_best(const std::vector<PointOutcome>& outcomes) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (!o.ok) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = outcomes[*best];
    if (o.accuracy > b.accuracy ||
        (o.accuracy == b.accuracy && (o.point.learning_rate < b.point.learning_rate ||
                                      (o.point.learning_rate == b.point.learning_rate &&
                                       o.point.batch_size < b.point.batch_size)))) {
      best = i;
    }
  }
  return best;
}

struct GridArgs {
  std::string manifest, out;
  bool no_timing = false;
};

int cmd_grid(const GridArgs& a, std::ostream& out, std::ostream& err) {
  const Manifest m = load_manifest(a.manifest, default_seed());
  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<ModelRun> runs;
  std::string points_csv = "model_id,learning_rate,batch_size,status,dev_accuracy,seconds,message\n";
  bool any_model_failed = false;

  for (const auto& me : m.models) {
    std::vector<PointOutcome> outcomes;
    std::optional<TrackResult> sim;
    try {
      const EmbeddingStore train = read_embedding_store(me.train_embeddings);
      const auto train_labels = load_labels(me.train_labels, train.instance_count());
      const EmbeddingStore dev = read_embedding_store(me.dev_embeddings);
      const auto dev_labels = load_labels(me.dev_labels, dev.instance_count());
      if (me.sim_embeddings == me.dev_embeddings) {
        sim = evaluate_sim(dev, dev_labels);
      } else {
        sim = evaluate_sim(read_embedding_store(me.sim_embeddings), dev_labels);
      }

      for (const auto& point : me.grid) {
        PointOutcome o;
        o.point = point;
        try {
          TrainConfig cfg;
          cfg.learning_rate = point.learning_rate;
          cfg.batch_size = point.batch_size;
          cfg.epochs = m.epochs;
          cfg.weight_decay = m.weight_decay;
          cfg.seed = m.seed;
          cfg.unrestricted_learning_rate = m.allow_any_learning_rate;
          TrainedHead trained = train_head(train, train_labels, cfg);
          const TrackResult r = evaluate_clf(trained.head, dev, dev_labels);
          o.ok = true;
          o.accuracy = r.accuracy;
          o.seconds = a.no_timing ? 0.0 : trained.history.wall_seconds + r.wall_seconds;
          o.trained = std::move(trained);
        } catch (const std::exception& e) {
          o.message = e.what();
        }
        outcomes.push_back(std::move(o));
      }
    } catch (const std::exception& e) {
      err << "model " << me.model_id << ": " << e.what() << "\n";
      points_csv += csv_field(me.model_id) + ",,,failed,,," + csv_field(e.what()) + "\n";
      any_model_failed = true;
      continue;
    }

    for (const auto& o : outcomes) {
      points_csv += csv_field(me.model_id) + "," + fmt(o.point.learning_rate) + "," + std::to_string(o.point.batch_size) +
                    "," + (o.ok ? "ok" : "failed") + "," + (o.ok ? fmt(100.0 * o.accuracy) : "") + "," +
                    (o.ok ? fmt(o.seconds) : "") + "," + csv_field(o.message) + "\n";
    }

    const auto best = select_best(outcomes);
    if (!best) {
      err << "model " << me.model_id << ": no grid point succeeded\n";
      any_model_failed = true;
      continue;
    }
    const PointOutcome& chosen = outcomes[*best];
    TrainConfig cfg;
    cfg.learning_rate = chosen.point.learning_rate;
    cfg.batch_size = chosen.point.batch_size;
    cfg.epochs = m.epochs;
    cfg.weight_decay = m.weight_decay;
    cfg.seed = m.seed;
    write_text(dir / "heads" / (file_stem_for(me.model_id) + ".json"),
               head_to_json({me.model_id, chosen.trained->head, cfg, chosen.trained->history.epoch_losses}));

    ModelRun run;
    run.model_id = me.model_id;
    run.sim_accuracy = 100.0 * sim->accuracy;
    run.clf_accuracy = 100.0 * chosen.accuracy;
    run.sim_seconds = a.no_timing ? 0.0 : sim->wall_seconds;
    run.clf_seconds = chosen.seconds;
    runs.push_back(run);
    out << me.model_id << ": best lr=" << fmt(chosen.point.learning_rate) << " batch=" << chosen.point.batch_size
        << " clf=" << fmt(run.clf_accuracy) << "% sim=" << fmt(run.sim_accuracy) << "%\n";
  }

  write_text(dir / "grid_points.csv", points_csv);
  write_text(dir / "runs.csv", runs_csv(runs));
  return any_model_failed ? kDataError : kOk;
}

// --- correlate -------------------------------------------------------------

struct CorrelateArgs {
  std::string runs, out;
};

void cmd_correlate(const CorrelateArgs& a, std::ostream& out) {
  const auto runs = read_runs_csv(a.runs);
  const CorrelationReport rep = correlate_runs(runs);
  write_text(a.out, report_json(rep));
  out << ranked_table(runs);
  out << "n=" << rep.n << " pearson r=" << fmt(rep.pearson_r) << " (p=" << fmt(rep.pearson_p)
      << ") spearman rho=" << fmt(rep.spearman_rho) << " (p=" << fmt(rep.spearman_p) << ")";
  if (std::isfinite(rep.mean_speedup)) out << " mean speedup=" << fmt(rep.mean_speedup);
  out << "\n";
}

// --- pool ------------------------------------------------------------------

struct PoolArgs {
  std::string embeddings, out;
};

void cmd_pool(const PoolArgs& a, std::ostream& out) {
  const EmbeddingStore pooled = pool_store(read_embedding_store(a.embeddings));
  write_embedding_store(pooled, a.out);
  out << "pooled " << pooled.record_count() << " records of dimension " << pooled.dim() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Predict fine-tuned abductive NLI accuracy from frozen-encoder embeddings"};
  app.require_subcommand(1);

  PredictSimArgs ps;
  auto* sub_ps = app.add_subcommand("predict-sim", "Evaluate the cosine-similarity track");
  sub_ps->add_option("--embeddings", ps.embeddings, "Pooled embedding store")->required();
  sub_ps->add_option("--labels", ps.labels, "Label file (1/2 per line)")->required();
  sub_ps->add_option("--out", ps.out, "TrackResult JSON output")->required();
  sub_ps->add_flag("--no-timing", ps.no_timing, "Record 0 for wall-clock fields");

  TrainHeadArgs th;
  th.cfg.learning_rate = 0.0;
  auto* sub_th = app.add_subcommand("train-head", "Train and evaluate the classification head");
  sub_th->add_option("--train-embeddings", th.train_embeddings)->required();
  sub_th->add_option("--train-labels", th.train_labels)->required();
  sub_th->add_option("--dev-embeddings", th.dev_embeddings)->required();
  sub_th->add_option("--dev-labels", th.dev_labels)->required();
  sub_th->add_option("--lr", th.cfg.learning_rate, "Learning rate")->required();
  sub_th->add_option("--batch-size", th.cfg.batch_size, "Mini-batch size")->required();
  sub_th->add_option("--epochs", th.cfg.epochs, "Training epochs")->capture_default_str();
  sub_th->add_option("--weight-decay", th.cfg.weight_decay, "Decoupled weight decay")->capture_default_str();
  std::optional<std::uint64_t> th_seed;
  sub_th->add_option("--seed", th_seed, "PRNG seed (default: $ABDUCT_RANK_SEED or 0)");
  sub_th->add_option("--out", th.out, "Head JSON output")->required();
  sub_th->add_option("--result", th.result, "TrackResult JSON output (default: <out>.result.json)");
  sub_th->add_flag("--allow-any-lr", th.cfg.unrestricted_learning_rate, "Accept a learning rate outside [1e-5, 9e-5]");
  sub_th->add_flag("--no-timing", th.no_timing, "Record 0 for wall-clock fields");

  GridArgs gr;
  auto* sub_gr = app.add_subcommand("grid", "Run a hyperparameter grid per model and keep the best point");
  sub_gr->add_option("--manifest", gr.manifest, "Run manifest JSON")->required();
  sub_gr->add_option("--out", gr.out, "Output directory")->required();
  sub_gr->add_flag("--no-timing", gr.no_timing, "Record 0 for wall-clock fields");

  CorrelateArgs co;
  auto* sub_co = app.add_subcommand("correlate", "Correlate similarity and classification accuracy across models");
  sub_co->add_option("--runs", co.runs, "Runs CSV")->required();
  sub_co->add_option("--out", co.out, "CorrelationReport JSON output")->required();

  PoolArgs po;
  auto* sub_po = app.add_subcommand("pool", "Mean-pool a TOKEN store into a POOLED store");
  sub_po->add_option("--embeddings", po.embeddings, "TOKEN embedding store")->required();
  sub_po->add_option("--out", po.out, "POOLED store output")->required();

  // CLI11 consumes a reversed argument list without the program name.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kDataError;
  }

  try {
    if (sub_ps->parsed()) {
      cmd_predict_sim(ps, out);
    } else if (sub_th->parsed()) {
      th.cfg.seed = th_seed ? *th_seed : default_seed();
      cmd_train_head(th, out);
    } else if (sub_gr->parsed()) {
      return cmd_grid(gr, out, err);
    } else if (sub_co->parsed()) {
      cmd_correlate(co, out);
    } else if (sub_po->parsed()) {
      cmd_pool(po, out);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const StatsError& e) {
    err << "error: " << e.what() << "\n";
    return kStatsError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}

}  // namespace abduct::cli
