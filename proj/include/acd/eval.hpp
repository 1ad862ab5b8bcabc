#pragma once

#include <span>
#include <utility>

#include "acd/baseline.hpp"

namespace acd {

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> per_class_f1;  // indexed by label, absent classes score 0
  double macro_f1 = 0.0;             // unweighted mean over the whole label set
  Eigen::MatrixXi confusion;         // rows = gold, cols = predicted
};

Metrics compute_metrics(std::span<const int> gold, std::span<const int> pred,
                        const LabelSet& labels);

struct ComparisonResult {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

// Two-sided paired t-test on a - b. Degenerate conventions: all-zero
// differences give p = 1; zero variance with nonzero mean gives p = 0.
ComparisonResult paired_t_test(std::span<const double> a, std::span<const double> b,
                               double alpha);

// P(T <= t) for Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

enum class Method { Rl, Baseline };

std::string method_name(Method method);
Method parse_method(std::string_view name);

// Everything a fold needs to train and test one model.
struct PipelineConfig {
  FeatureConfig features;
  HAConfig ha;
  LspiConfig lspi;
  BaselineHyper baseline;
  int rounds_budget = 10;  // J, the inference scan budget
};

struct FoldMetrics {
  int repeat = 0;
  int fold = 0;
  Metrics metrics;
};

// Repeated grouped k-fold: trains on the train-side documents of each fold
// and scores the shared multi-round inference on the test side. Fold seeds
// derive from `seed` by fold index only, so identical folds get identical
// models regardless of which grid cell asked for them.
std::vector<FoldMetrics> crossval(const Corpus& corpus, Method method,
                                  const PipelineConfig& config, int k, int repeats,
                                  std::uint64_t seed, int jobs = 1);

struct AggregateMetrics {
  double mean_accuracy = 0.0;
  double mean_macro_f1 = 0.0;
  std::vector<double> mean_per_class_f1;
};

AggregateMetrics aggregate(const std::vector<FoldMetrics>& folds, int num_labels);

struct GridCell {
  int n_l = 0;
  int n_c = 0;
  std::vector<FoldMetrics> folds;
  AggregateMetrics summary;
};

struct CornerComparison {
  std::pair<int, int> cell_a;
  std::pair<int, int> cell_b;
  std::string metric;  // "accuracy" or "macro_f1"
  ComparisonResult result;
};

struct GridResult {
  std::vector<GridCell> cells;  // row-major over (n_l, n_c)
  std::vector<CornerComparison> comparisons;

  const GridCell* find(int n_l, int n_c) const;
};

// Sweeps the HA window grid, running the full cross-validation per cell,
// and adds paired tests between the four corner cells.
GridResult ha_grid_search(const Corpus& corpus, IntRange nl_range, IntRange nc_range,
                          Method method, const PipelineConfig& config, int k,
                          int repeats, std::uint64_t seed, double alpha, int jobs = 1);

}  // namespace acd
