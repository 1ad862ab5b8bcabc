#include "acd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace acd {

Metrics compute_metrics(std::span<const int> gold, std::span<const int> pred,
                        const LabelSet& labels) {
  if (gold.size() != pred.size())
    throw ValidationError("compute_metrics: gold and prediction lengths differ");
  if (gold.empty()) throw ValidationError("compute_metrics: empty input");

  const int a = labels.size();
  Metrics m;
  m.confusion = Eigen::MatrixXi::Zero(a, a);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= a || pred[i] < 0 || pred[i] >= a)
      throw ValidationError("compute_metrics: label index outside label set");
    m.confusion(gold[i], pred[i]) += 1;
  }

  long correct = 0;
  for (int c = 0; c < a; ++c) correct += m.confusion(c, c);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());

  m.per_class_f1.assign(a, 0.0);
  for (int c = 0; c < a; ++c) {
    const long tp = m.confusion(c, c);
    const long gold_count = m.confusion.row(c).sum();
    const long pred_count = m.confusion.col(c).sum();
    const double precision = pred_count > 0 ? static_cast<double>(tp) / pred_count : 0.0;
    const double recall = gold_count > 0 ? static_cast<double>(tp) / gold_count : 0.0;
    m.per_class_f1[c] =
        precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    m.macro_f1 += m.per_class_f1[c];
  }
  m.macro_f1 /= a;
  return m;
}

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("incomplete_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * beta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (df <= 0.0) throw std::domain_error("student_t_cdf: df must be positive");
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t > 0 ? 1.0 - tail : tail;
}

ComparisonResult paired_t_test(std::span<const double> a, std::span<const double> b,
                               double alpha) {
  if (a.size() != b.size()) throw ValidationError("paired_t_test: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw ValidationError("paired_t_test: need at least 2 pairs");

  ComparisonResult r;
  double mean_d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.mean_a += a[i];
    r.mean_b += b[i];
    mean_d += a[i] - b[i];
  }
  r.mean_a /= n;
  r.mean_b /= n;
  mean_d /= n;

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) - mean_d;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (n - 1));

  if (sd == 0.0) {
    if (mean_d == 0.0) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_statistic = mean_d > 0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
  } else {
    r.t_statistic = mean_d / (sd / std::sqrt(static_cast<double>(n)));
    const double df = static_cast<double>(n - 1);
    r.p_value = incomplete_beta(0.5 * df, 0.5, df / (df + r.t_statistic * r.t_statistic));
  }
  r.significant = r.p_value < alpha;
  return r;
}

std::string method_name(Method method) {
  return method == Method::Rl ? "rl" : "baseline";
}

Method parse_method(std::string_view name) {
  if (name == "rl") return Method::Rl;
  if (name == "baseline") return Method::Baseline;
  throw ValidationError("unknown method: " + std::string(name) +
                        " (expected \"rl\" or \"baseline\")");
}

namespace {

Corpus select_documents(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::unordered_set<std::string_view> wanted(ids.begin(), ids.end());
  Corpus subset;
  subset.labels = corpus.labels;
  for (const auto& doc : corpus.documents) {
    if (wanted.count(doc.id)) subset.documents.push_back(doc);
  }
  return subset;
}

Metrics score_fold(const AnnotationRule& rule, const Corpus& test, int rounds_budget) {
  std::vector<int> gold, pred;
  for (const auto& doc : test.documents) {
    const auto result = annotate_document(rule, doc, rounds_budget);
    for (std::size_t i = 0; i < doc.clauses.size(); ++i) {
      gold.push_back(doc.clauses[i].gold_label.value());
      pred.push_back(result.annotations[i]);
    }
  }
  return compute_metrics(gold, pred, test.labels);
}

}  // namespace

std::vector<FoldMetrics> crossval(const Corpus& corpus, Method method,
                                  const PipelineConfig& config, int k, int repeats,
                                  std::uint64_t seed, int jobs) {
  const auto splits = grouped_kfold(corpus, k, repeats, seed);
  std::vector<FoldMetrics> folds(splits.size());

  parallel_for(splits.size(), jobs, [&](std::size_t i) {
    const auto& split = splits[i];
    const Corpus train_set = select_documents(corpus, split.train_ids);
    const Corpus test_set = select_documents(corpus, split.test_ids);
    const std::uint64_t fold_seed = derive_seed(seed, "train", i);

    FoldMetrics fm;
    fm.repeat = split.repeat;
    fm.fold = split.fold;
    try {
      if (method == Method::Rl) {
        LspiConfig lspi_cfg = config.lspi;
        lspi_cfg.seed = fold_seed;
        const Policy policy = train(train_set, lspi_cfg, config.features, config.ha);
        fm.metrics = score_fold(as_rule(policy), test_set, config.rounds_budget);
      } else {
        BaselineHyper hyper = config.baseline;
        hyper.seed = fold_seed;
        const auto trained = train_baseline(train_set, hyper, config.features, config.ha);
        fm.metrics = score_fold(as_policy(trained.model), test_set, config.rounds_budget);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("fold " + std::to_string(split.fold) + " of repeat " +
                               std::to_string(split.repeat) + " failed: " + e.what());
    }
    folds[i] = std::move(fm);
  });
  return folds;
}

AggregateMetrics aggregate(const std::vector<FoldMetrics>& folds, int num_labels) {
  AggregateMetrics agg;
  agg.mean_per_class_f1.assign(num_labels, 0.0);
  if (folds.empty()) return agg;
  for (const auto& f : folds) {
    agg.mean_accuracy += f.metrics.accuracy;
    agg.mean_macro_f1 += f.metrics.macro_f1;
    for (int c = 0; c < num_labels; ++c) agg.mean_per_class_f1[c] += f.metrics.per_class_f1[c];
  }
  const double n = static_cast<double>(folds.size());
  agg.mean_accuracy /= n;
  agg.mean_macro_f1 /= n;
  for (auto& v : agg.mean_per_class_f1) v /= n;
  return agg;
}

const GridCell* GridResult::find(int n_l, int n_c) const {
  for (const auto& cell : cells) {
    if (cell.n_l == n_l && cell.n_c == n_c) return &cell;
  }
  return nullptr;
}

GridResult ha_grid_search(const Corpus& corpus, IntRange nl_range, IntRange nc_range,
                          Method method, const PipelineConfig& config, int k,
                          int repeats, std::uint64_t seed, double alpha, int jobs) {
  if (nl_range.lo < 0 || nl_range.hi < nl_range.lo || nc_range.lo < 0 ||
      nc_range.hi < nc_range.lo)
    throw ValidationError("invalid HA grid ranges");

  GridResult result;
  for (int l = nl_range.lo; l <= nl_range.hi; ++l) {
    for (int c = nc_range.lo; c <= nc_range.hi; ++c) {
      GridCell cell;
      cell.n_l = l;
      cell.n_c = c;
      result.cells.push_back(cell);
    }
  }

  // Flatten (cell, fold) into one task list so folds of different cells
  // share the worker pool; per-fold seeds depend only on the fold index.
  const auto splits = grouped_kfold(corpus, k, repeats, seed);
  const std::size_t folds_per_cell = splits.size();
  for (auto& cell : result.cells) cell.folds.resize(folds_per_cell);

  parallel_for(result.cells.size() * folds_per_cell, jobs, [&](std::size_t task) {
    const std::size_t cell_index = task / folds_per_cell;
    const std::size_t fold_index = task % folds_per_cell;
    auto& cell = result.cells[cell_index];
    PipelineConfig cell_config = config;
    cell_config.ha.n_l = cell.n_l;
    cell_config.ha.n_c = cell.n_c;

    const auto& split = splits[fold_index];
    const Corpus train_set = select_documents(corpus, split.train_ids);
    const Corpus test_set = select_documents(corpus, split.test_ids);
    const std::uint64_t fold_seed = derive_seed(seed, "train", fold_index);

    FoldMetrics fm;
    fm.repeat = split.repeat;
    fm.fold = split.fold;
    if (method == Method::Rl) {
      LspiConfig lspi_cfg = cell_config.lspi;
      lspi_cfg.seed = fold_seed;
      const Policy policy = train(train_set, lspi_cfg, cell_config.features, cell_config.ha);
      fm.metrics = score_fold(as_rule(policy), test_set, cell_config.rounds_budget);
    } else {
      BaselineHyper hyper = cell_config.baseline;
      hyper.seed = fold_seed;
      const auto trained =
          train_baseline(train_set, hyper, cell_config.features, cell_config.ha);
      fm.metrics = score_fold(as_policy(trained.model), test_set, cell_config.rounds_budget);
    }
    cell.folds[fold_index] = std::move(fm);
  });

  for (auto& cell : result.cells) cell.summary = aggregate(cell.folds, corpus.labels.size());

  // Paired tests between the four grid corners, as in the corner analysis
  // of the window-size study.
  const std::vector<std::pair<int, int>> corners = {{nl_range.lo, nc_range.lo},
                                                    {nl_range.hi, nc_range.lo},
                                                    {nl_range.lo, nc_range.hi},
                                                    {nl_range.hi, nc_range.hi}};
  std::vector<std::pair<int, int>> unique_corners;
  for (const auto& corner : corners) {
    if (std::find(unique_corners.begin(), unique_corners.end(), corner) ==
        unique_corners.end())
      unique_corners.push_back(corner);
  }
  auto fold_values = [&](const GridCell& cell, bool accuracy) {
    std::vector<double> v;
    v.reserve(cell.folds.size());
    for (const auto& f : cell.folds)
      v.push_back(accuracy ? f.metrics.accuracy : f.metrics.macro_f1);
    return v;
  };
  for (std::size_t i = 0; i < unique_corners.size(); ++i) {
    for (std::size_t j = i + 1; j < unique_corners.size(); ++j) {
      const auto* cell_a = result.find(unique_corners[i].first, unique_corners[i].second);
      const auto* cell_b = result.find(unique_corners[j].first, unique_corners[j].second);
      for (const bool accuracy : {true, false}) {
        CornerComparison cmp;
        cmp.cell_a = unique_corners[i];
        cmp.cell_b = unique_corners[j];
        cmp.metric = accuracy ? "accuracy" : "macro_f1";
        cmp.result = paired_t_test(fold_values(*cell_a, accuracy),
                                   fold_values(*cell_b, accuracy), alpha);
        result.comparisons.push_back(std::move(cmp));
      }
    }
  }
  return result;
}

}  // namespace acd
