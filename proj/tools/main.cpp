// acd: argument component detection toolkit
//
// Subcommands: gen, train, annotate, crossval, grid, kappa. Every run is
// driven by a flat key-value config (file + flag overrides) and writes a
// manifest that replays it bit-identically.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "acd/eval.hpp"
#include "acd/model_io.hpp"
#include "acd/run_config.hpp"

namespace fs = std::filesystem;
using acd::RunConfig;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Override {
  std::string key;
  nlohmann::json value;
};

struct CommandContext {
  std::string config_path;
  std::vector<Override> overrides;

  RunConfig resolve() const {
    RunConfig rc = config_path.empty() ? RunConfig() : RunConfig::from_file(config_path);
    for (const auto& o : overrides) rc.set(o.key, o.value);
    return rc;
  }
};

std::string fixed4(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << v;
  return out.str();
}

void ensure_out_dir(const std::string& out) {
  if (out.empty()) throw acd::ValidationError("missing required config key \"out\"");
  fs::create_directories(out);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write file: " + path.string());
  f << content;
}

void finish_run(const RunConfig& rc, const std::string& command, const std::string& out) {
  for (const auto& key : rc.unused_keys())
    std::cerr << "warning: config key \"" << key << "\" was not used by " << command
              << "\n";
  write_file(fs::path(out) / "manifest.json", rc.manifest(command) + "\n");
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size() + 1, ' ');
}

std::string metrics_table(const std::vector<std::pair<std::string, acd::AggregateMetrics>>& rows,
                          const acd::LabelSet& labels) {
  std::size_t name_width = 6;
  for (const auto& [name, agg] : rows) name_width = std::max(name_width, name.size());
  std::ostringstream out;
  out << pad("method", name_width) << pad("accuracy", 8) << pad("macro_f1", 8);
  for (const auto& name : labels.names()) out << pad(name, std::max<std::size_t>(6, name.size()));
  out << "\n";
  for (const auto& [name, agg] : rows) {
    out << pad(name, name_width) << pad(fixed4(agg.mean_accuracy), 8)
        << pad(fixed4(agg.mean_macro_f1), 8);
    for (int c = 0; c < labels.size(); ++c)
      out << pad(fixed4(agg.mean_per_class_f1[c]),
                 std::max<std::size_t>(6, labels.name(c).size()));
    out << "\n";
  }
  return out.str();
}

ordered_json fold_record(const std::string& method, int n_l, int n_c,
                         const acd::FoldMetrics& fm, const acd::LabelSet& labels) {
  ordered_json rec;
  rec["method"] = method;
  rec["n_l"] = n_l;
  rec["n_c"] = n_c;
  rec["repeat"] = fm.repeat;
  rec["fold"] = fm.fold;
  rec["accuracy"] = fm.metrics.accuracy;
  rec["macro_f1"] = fm.metrics.macro_f1;
  ordered_json per_class = ordered_json::object();
  for (int c = 0; c < labels.size(); ++c)
    per_class[labels.name(c)] = fm.metrics.per_class_f1[c];
  rec["per_class_f1"] = std::move(per_class);
  return rec;
}

int resolve_jobs(const RunConfig& rc) {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int jobs = rc.get_int("jobs", hw > 0 ? hw : 1);
  if (jobs < 1) throw acd::ValidationError("config key \"jobs\" must be >= 1");
  return jobs;
}

int cmd_gen(const CommandContext& ctx) {
  RunConfig rc = ctx.resolve();
  const std::uint64_t seed = rc.require_seed();
  const std::string out = rc.require_string("out");
  const acd::SynthConfig config = acd::synth_config_from(rc);
  ensure_out_dir(out);

  const acd::Corpus corpus = acd::generate_synthetic(config, seed);
  write_file(fs::path(out) / "corpus.jsonl", acd::serialize_corpus(corpus));
  finish_run(rc, "gen", out);

  std::vector<std::size_t> label_counts(corpus.labels.size(), 0);
  for (const auto& doc : corpus.documents) {
    for (const auto& clause : doc.clauses) ++label_counts[*clause.gold_label];
  }
  std::cout << "documents " << corpus.documents.size() << "\n"
            << "clauses " << corpus.total_clauses() << "\n";
  for (int c = 0; c < corpus.labels.size(); ++c)
    std::cout << "label " << corpus.labels.name(c) << " " << label_counts[c] << "\n";
  return 0;
}

int cmd_train(const CommandContext& ctx) {
  RunConfig rc = ctx.resolve();
  const std::uint64_t seed = rc.require_seed();
  const std::string out = rc.require_string("out");
  const std::string method = rc.get_string("method", "rl");
  const acd::Corpus corpus = acd::parse_corpus_file(rc.require_string("corpus"));
  acd::PipelineConfig pipeline = acd::pipeline_config_from(rc);
  ensure_out_dir(out);

  const fs::path model_path = fs::path(out) / "model.bin";
  if (acd::parse_method(method) == acd::Method::Rl) {
    pipeline.lspi.seed = seed;
    const acd::Policy policy = acd::train(corpus, pipeline.lspi, pipeline.features, pipeline.ha);
    acd::save_model_file(policy, model_path.string());
    std::cout << "trained rl policy: " << policy.weights.size() << " weights, "
              << corpus.labels.size() << " labels\n";
  } else {
    pipeline.baseline.seed = seed;
    const auto trained =
        acd::train_baseline(corpus, pipeline.baseline, pipeline.features, pipeline.ha);
    acd::save_model_file(trained.model, model_path.string());
    for (const auto& w : trained.info.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "trained baseline: " << trained.model.weights.size() << " weights, "
              << trained.info.epoch_loss.size() << " epochs, final loss "
              << fixed4(trained.info.epoch_loss.empty() ? 0.0
                                                        : trained.info.epoch_loss.back())
              << "\n";
  }
  finish_run(rc, "train", out);
  std::cout << "model written to " << model_path.string() << "\n";
  return 0;
}

int cmd_annotate(const CommandContext& ctx) {
  RunConfig rc = ctx.resolve();
  rc.require_seed();  // manifests always carry the seed, even for greedy inference
  const std::string out = rc.require_string("out");
  const acd::Model model = acd::load_model_file(rc.require_string("model"));
  acd::Corpus corpus = acd::parse_corpus_file(rc.require_string("corpus"));
  const int rounds = rc.get_int("rounds", 10);
  const int jobs = resolve_jobs(rc);

  // A run config that declares featurization keys must agree with the
  // model file; silently annotating with different windows would be wrong.
  const acd::FeatureConfig& fcfg = acd::model_feature_config(model);
  const acd::HAConfig& hcfg = acd::model_ha_config(model);
  auto check_declared = [&rc](const std::string& key, int actual) {
    if (rc.has(key) && rc.get_int(key, actual) != actual)
      throw acd::ValidationError("config declares " + key + "=" +
                                 std::to_string(rc.get_int(key, actual)) +
                                 " but the model was trained with " + key + "=" +
                                 std::to_string(actual));
  };
  check_declared("n_l", hcfg.n_l);
  check_declared("n_c", hcfg.n_c);
  check_declared("hash_dim", fcfg.hash_dim);
  check_declared("token_count_cap", fcfg.token_count_cap);
  const std::string actual_encoding =
      hcfg.encoding == acd::HAEncoding::OneHot ? "onehot" : "scalar";
  if (rc.get_string("ha_encoding", actual_encoding) != actual_encoding)
    throw acd::ValidationError("config declares ha_encoding=" +
                               rc.get_string("ha_encoding", actual_encoding) +
                               " but the model was trained with " + actual_encoding);
  if (!(acd::model_labels(model) == corpus.labels))
    throw acd::ValidationError("corpus label set does not match the model's label set");
  ensure_out_dir(out);

  const acd::AnnotationRule rule = acd::model_rule(model);
  const auto results = acd::annotate_corpus(rule, corpus, rounds, jobs);

  std::size_t converged = 0;
  std::ostringstream report;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    auto& doc = corpus.documents[i];
    for (std::size_t c = 0; c < doc.clauses.size(); ++c)
      doc.clauses[c].gold_label = results[i].annotations[c];
    ordered_json rec;
    rec["id"] = doc.id;
    rec["rounds_used"] = results[i].rounds_used;
    rec["converged"] = results[i].converged;
    report << rec.dump() << "\n";
    if (results[i].converged) ++converged;
  }
  write_file(fs::path(out) / "annotated.jsonl", acd::serialize_corpus(corpus));
  write_file(fs::path(out) / "report.jsonl", report.str());
  finish_run(rc, "annotate", out);
  std::cout << "annotated " << corpus.documents.size() << " documents, " << converged
            << " converged within " << rounds << " rounds\n";
  return 0;
}

int cmd_crossval(const CommandContext& ctx) {
  RunConfig rc = ctx.resolve();
  const std::uint64_t seed = rc.require_seed();
  const std::string out = rc.require_string("out");
  const acd::Method method = acd::parse_method(rc.get_string("method", "rl"));
  const acd::Corpus corpus = acd::parse_corpus_file(rc.require_string("corpus"));
  const acd::PipelineConfig pipeline = acd::pipeline_config_from(rc);
  const int k = rc.get_int("k", 10);
  const int repeats = rc.get_int("repeats", 10);
  const int jobs = resolve_jobs(rc);
  ensure_out_dir(out);

  const auto folds = acd::crossval(corpus, method, pipeline, k, repeats, seed, jobs);

  std::ostringstream records;
  for (const auto& fm : folds)
    records << fold_record(acd::method_name(method), pipeline.ha.n_l, pipeline.ha.n_c, fm,
                           corpus.labels)
                   .dump()
            << "\n";
  write_file(fs::path(out) / "folds.jsonl", records.str());

  const auto agg = acd::aggregate(folds, corpus.labels.size());
  const std::string row_name = acd::method_name(method) + " (" +
                               std::to_string(pipeline.ha.n_l) + "," +
                               std::to_string(pipeline.ha.n_c) + ")";
  const std::string table = metrics_table({{row_name, agg}}, corpus.labels);
  write_file(fs::path(out) / "summary.txt", table);
  finish_run(rc, "crossval", out);
  std::cout << table;
  std::cout << folds.size() << " folds\n";
  return 0;
}

int cmd_grid(const CommandContext& ctx) {
  RunConfig rc = ctx.resolve();
  const std::uint64_t seed = rc.require_seed();
  const std::string out = rc.require_string("out");
  const acd::Method method = acd::parse_method(rc.get_string("method", "rl"));
  const acd::Corpus corpus = acd::parse_corpus_file(rc.require_string("corpus"));
  const acd::PipelineConfig pipeline = acd::pipeline_config_from(rc);
  const int k = rc.get_int("k", 10);
  const int repeats = rc.get_int("repeats", 10);
  const double alpha = rc.get_double("alpha", 0.05);
  const acd::IntRange nl_range{rc.get_int("nl_lo", 0), rc.get_int("nl_hi", 9)};
  const acd::IntRange nc_range{rc.get_int("nc_lo", 0), rc.get_int("nc_hi", 5)};
  const int jobs = resolve_jobs(rc);
  ensure_out_dir(out);

  const auto grid = acd::ha_grid_search(corpus, nl_range, nc_range, method, pipeline, k,
                                        repeats, seed, alpha, jobs);

  std::ostringstream records;
  for (const auto& cell : grid.cells) {
    for (const auto& fm : cell.folds)
      records << fold_record(acd::method_name(method), cell.n_l, cell.n_c, fm, corpus.labels)
                     .dump()
              << "\n";
  }
  write_file(fs::path(out) / "grid.jsonl", records.str());

  std::ostringstream comparisons;
  for (const auto& cmp : grid.comparisons) {
    ordered_json rec;
    rec["cell_a"] = {cmp.cell_a.first, cmp.cell_a.second};
    rec["cell_b"] = {cmp.cell_b.first, cmp.cell_b.second};
    rec["metric"] = cmp.metric;
    rec["mean_a"] = cmp.result.mean_a;
    rec["mean_b"] = cmp.result.mean_b;
    rec["t"] = cmp.result.t_statistic;
    rec["p"] = cmp.result.p_value;
    rec["significant"] = cmp.result.significant;
    comparisons << rec.dump() << "\n";
  }
  write_file(fs::path(out) / "comparisons.jsonl", comparisons.str());

  std::vector<std::pair<std::string, acd::AggregateMetrics>> rows;
  for (const auto& cell : grid.cells)
    rows.emplace_back(acd::method_name(method) + " (" + std::to_string(cell.n_l) + "," +
                          std::to_string(cell.n_c) + ")",
                      cell.summary);
  std::ostringstream table;
  table << metrics_table(rows, corpus.labels) << "\n";
  for (const auto& cmp : grid.comparisons) {
    table << "(" << cmp.cell_a.first << "," << cmp.cell_a.second << ") vs ("
          << cmp.cell_b.first << "," << cmp.cell_b.second << ") on " << cmp.metric << ": "
          << fixed4(cmp.result.mean_a) << " vs " << fixed4(cmp.result.mean_b)
          << ", t=" << fixed4(cmp.result.t_statistic) << ", p=" << fixed4(cmp.result.p_value)
          << (cmp.result.significant ? " (significant)" : " (not significant)") << "\n";
  }
  write_file(fs::path(out) / "summary.txt", table.str());
  finish_run(rc, "grid", out);
  std::cout << grid.cells.size() << " cells, " << grid.comparisons.size()
            << " corner comparisons\n";
  return 0;
}

int cmd_kappa(const CommandContext& ctx) {
  RunConfig rc = ctx.resolve();
  rc.require_seed();  // every manifest carries the seed
  const std::string ratings_path = rc.require_string("ratings");
  std::ifstream in(ratings_path);
  if (!in) throw acd::ValidationError("cannot open ratings file: " + ratings_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw acd::ValidationError(std::string("ratings file is not valid JSON: ") + e.what());
  }
  acd::RatingMatrix ratings;
  try {
    ratings.raters_per_item = j.at("raters_per_item").get<int>();
    ratings.counts = j.at("counts").get<std::vector<std::vector<long>>>();
  } catch (const nlohmann::json::exception&) {
    throw acd::ValidationError(
        "ratings file must carry \"raters_per_item\" and a \"counts\" matrix");
  }
  const double kappa = acd::fleiss_kappa(ratings);
  std::cout << fixed4(kappa) << "\n";

  const std::string out = rc.get_string("out", "");
  if (!out.empty()) {
    ensure_out_dir(out);
    std::ostringstream full;
    full << std::setprecision(17) << kappa << "\n";
    write_file(fs::path(out) / "kappa.txt", full.str());
    finish_run(rc, "kappa", out);
  }
  return 0;
}

void add_common_flags(CLI::App* cmd, CommandContext& ctx) {
  cmd->add_option("--config", ctx.config_path, "flat key-value config file (JSON object)");
  auto push_u64 = [&ctx](const std::string& key) {
    return [&ctx, key](const std::uint64_t& v) { ctx.overrides.push_back({key, v}); };
  };
  auto push_str = [&ctx](const std::string& key) {
    return [&ctx, key](const std::string& v) { ctx.overrides.push_back({key, v}); };
  };
  auto push_int = [&ctx](const std::string& key) {
    return [&ctx, key](const int& v) { ctx.overrides.push_back({key, v}); };
  };
  cmd->add_option_function<std::uint64_t>("--seed", push_u64("seed"),
                                          "top-level random seed (required)");
  cmd->add_option_function<std::string>("--out", push_str("out"), "output directory");
  cmd->add_option_function<int>("--jobs", push_int("jobs"),
                                "worker pool size (default: logical cores)");
}

void add_int_flag(CLI::App* cmd, CommandContext& ctx, const std::string& flag,
                  const std::string& key, const std::string& help) {
  cmd->add_option_function<int>(
      flag, [&ctx, key](const int& v) { ctx.overrides.push_back({key, v}); }, help);
}

void add_double_flag(CLI::App* cmd, CommandContext& ctx, const std::string& flag,
                     const std::string& key, const std::string& help) {
  cmd->add_option_function<double>(
      flag, [&ctx, key](const double& v) { ctx.overrides.push_back({key, v}); }, help);
}

void add_string_flag(CLI::App* cmd, CommandContext& ctx, const std::string& flag,
                     const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&ctx, key](const std::string& v) { ctx.overrides.push_back({key, v}); }, help);
}

void add_string_list_flag(CLI::App* cmd, CommandContext& ctx, const std::string& flag,
                          const std::string& key, const std::string& help) {
  cmd->add_option_function<std::vector<std::string>>(
      flag,
      [&ctx, key](const std::vector<std::string>& v) { ctx.overrides.push_back({key, v}); },
      help);
}

void add_feature_flags(CLI::App* cmd, CommandContext& ctx) {
  add_int_flag(cmd, ctx, "--hash-dim", "hash_dim", "hashed lexical buckets");
  add_int_flag(cmd, ctx, "--token-count-cap", "token_count_cap", "token count cap");
  add_string_list_flag(cmd, ctx, "--markers", "markers", "discourse marker lexicon");
  add_int_flag(cmd, ctx, "--n-l", "n_l", "type-L HA window size");
  add_int_flag(cmd, ctx, "--n-c", "n_c", "type-C HA window size");
  add_string_flag(cmd, ctx, "--ha-encoding", "ha_encoding", "HA slot encoding: onehot|scalar");
}

void add_learner_flags(CLI::App* cmd, CommandContext& ctx) {
  add_double_flag(cmd, ctx, "--gamma", "gamma", "discount factor");
  add_int_flag(cmd, ctx, "--episodes", "episodes", "training episodes per document (K)");
  add_double_flag(cmd, ctx, "--ridge", "ridge", "LSTDQ regularisation");
  add_double_flag(cmd, ctx, "--policy-tolerance", "policy_tolerance",
                  "policy-iteration weight tolerance");
  add_int_flag(cmd, ctx, "--max-policy-iterations", "max_policy_iterations",
               "policy-iteration cap per episode");
  add_double_flag(cmd, ctx, "--epsilon0", "epsilon0", "initial exploration rate");
  add_double_flag(cmd, ctx, "--epsilon-decay", "epsilon_decay", "exploration decay per episode");
  add_double_flag(cmd, ctx, "--epsilon-floor", "epsilon_floor", "exploration floor");
  add_double_flag(cmd, ctx, "--learning-rate", "learning_rate", "baseline learning rate");
  add_double_flag(cmd, ctx, "--l2", "l2", "baseline L2 penalty");
  add_int_flag(cmd, ctx, "--max-epochs", "max_epochs", "baseline epoch cap");
  add_int_flag(cmd, ctx, "--patience", "patience", "baseline early-stop patience");
  add_int_flag(cmd, ctx, "--ha-rounds", "ha_rounds", "baseline teacher-forced HA rounds (K_b)");
  add_int_flag(cmd, ctx, "--batch-size", "batch_size", "baseline mini-batch size");
  add_int_flag(cmd, ctx, "--rounds", "rounds", "inference scan budget (J)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"argument component detection: RL annotator, baseline and evaluation"};
  app.require_subcommand(1);

  CommandContext ctx;
  int (*handler)(const CommandContext&) = nullptr;

  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  add_common_flags(gen, ctx);
  add_int_flag(gen, ctx, "--num-documents", "num_documents", "number of documents");
  add_int_flag(gen, ctx, "--clauses-lo", "clauses_lo", "min clauses per document");
  add_int_flag(gen, ctx, "--clauses-hi", "clauses_hi", "max clauses per document");
  add_int_flag(gen, ctx, "--tokens-lo", "tokens_lo", "min tokens per clause");
  add_int_flag(gen, ctx, "--tokens-hi", "tokens_hi", "max tokens per clause");
  add_double_flag(gen, ctx, "--lexical-ambiguity", "lexical_ambiguity",
                  "probability of a global-vocabulary token");
  add_string_list_flag(gen, ctx, "--labels", "labels", "label names");
  add_int_flag(gen, ctx, "--words-per-label", "words_per_label", "label vocabulary size");
  add_int_flag(gen, ctx, "--shared-words", "shared_words", "shared vocabulary size");
  gen->callback([&] { handler = cmd_gen; });

  auto* train = app.add_subcommand("train", "train a model on a labelled corpus");
  add_common_flags(train, ctx);
  add_string_flag(train, ctx, "--corpus", "corpus", "labelled corpus file");
  add_string_flag(train, ctx, "--method", "method", "rl|baseline");
  add_feature_flags(train, ctx);
  add_learner_flags(train, ctx);
  train->callback([&] { handler = cmd_train; });

  auto* annotate = app.add_subcommand("annotate", "annotate a corpus with a trained model");
  add_common_flags(annotate, ctx);
  add_string_flag(annotate, ctx, "--corpus", "corpus", "corpus file to annotate");
  add_string_flag(annotate, ctx, "--model", "model", "model file from train");
  add_feature_flags(annotate, ctx);
  add_int_flag(annotate, ctx, "--rounds", "rounds", "inference scan budget (J)");
  annotate->callback([&] { handler = cmd_annotate; });

  auto* crossval = app.add_subcommand("crossval", "repeated grouped k-fold cross-validation");
  add_common_flags(crossval, ctx);
  add_string_flag(crossval, ctx, "--corpus", "corpus", "labelled corpus file");
  add_string_flag(crossval, ctx, "--method", "method", "rl|baseline");
  add_int_flag(crossval, ctx, "--k", "k", "folds per repeat");
  add_int_flag(crossval, ctx, "--repeats", "repeats", "repeat count");
  add_feature_flags(crossval, ctx);
  add_learner_flags(crossval, ctx);
  crossval->callback([&] { handler = cmd_crossval; });

  auto* grid = app.add_subcommand("grid", "HA window grid search with corner tests");
  add_common_flags(grid, ctx);
  add_string_flag(grid, ctx, "--corpus", "corpus", "labelled corpus file");
  add_string_flag(grid, ctx, "--method", "method", "rl|baseline");
  add_int_flag(grid, ctx, "--k", "k", "folds per repeat");
  add_int_flag(grid, ctx, "--repeats", "repeats", "repeat count");
  add_double_flag(grid, ctx, "--alpha", "alpha", "significance level");
  add_int_flag(grid, ctx, "--nl-lo", "nl_lo", "type-L window minimum");
  add_int_flag(grid, ctx, "--nl-hi", "nl_hi", "type-L window maximum");
  add_int_flag(grid, ctx, "--nc-lo", "nc_lo", "type-C window minimum");
  add_int_flag(grid, ctx, "--nc-hi", "nc_hi", "type-C window maximum");
  add_feature_flags(grid, ctx);
  add_learner_flags(grid, ctx);
  grid->callback([&] { handler = cmd_grid; });

  auto* kappa = app.add_subcommand("kappa", "Fleiss' kappa of a rating matrix");
  add_common_flags(kappa, ctx);
  add_string_flag(kappa, ctx, "--ratings", "ratings", "rating matrix file (JSON)");
  kappa->callback([&] { handler = cmd_kappa; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return handler(ctx);
  } catch (const acd::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
