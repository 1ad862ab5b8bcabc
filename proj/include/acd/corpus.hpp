#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acd/util.hpp"

namespace acd {

// One annotation unit. `tokens` is always the tokenization of `text`
// (lowercased, whitespace-split, punctuation detached as its own token).
struct Clause {
  std::string text;
  std::vector<std::string> tokens;
  std::optional<int> gold_label;
};

Clause make_clause(std::string text, std::optional<int> gold_label = std::nullopt);

std::vector<std::string> tokenize(std::string_view text);

struct Document {
  std::string id;
  std::vector<Clause> clauses;
};

// Ordered label names; the position of a name is its label index and the
// canonical tie-break order everywhere downstream.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<int> index_of(std::string_view name) const;

  bool operator==(const LabelSet& other) const = default;

 private:
  std::vector<std::string> names_;
};

struct Corpus {
  LabelSet labels;
  std::vector<Document> documents;

  std::size_t total_clauses() const;
  const Document* find_document(std::string_view id) const;
};

// Line-delimited corpus format: a header object declaring the labels,
// then one document object per line. Parse accepts any key order;
// serialization is canonical (fixed key order, no extra whitespace) so
// serialize(parse(x)) is a normal form.
Corpus parse_corpus(std::istream& in);
Corpus parse_corpus_file(const std::string& path);
void serialize_corpus(const Corpus& corpus, std::ostream& out);
std::string serialize_corpus(const Corpus& corpus);

// Fleiss' kappa input: counts[item][category] = number of raters who put
// the item in that category; every row sums to raters_per_item.
struct RatingMatrix {
  std::vector<std::vector<long>> counts;
  int raters_per_item = 0;
};

double fleiss_kappa(const RatingMatrix& ratings);

struct IntRange {
  int lo = 0;
  int hi = 0;
};

// First-order label Markov chain with per-label token distributions over a
// shared vocabulary. Stands in for corpora that cannot be redistributed.
struct SynthConfig {
  std::vector<std::string> labels;
  int num_documents = 0;
  IntRange clauses_per_doc;
  std::vector<std::vector<double>> label_transition;  // row-stochastic
  std::vector<double> initial_label_dist;
  std::vector<std::string> vocabulary;
  std::vector<std::vector<double>> vocab_per_label;  // per label, over vocabulary
  IntRange tokens_per_clause;
  double lexical_ambiguity = 0.0;  // P(token drawn from global vocabulary)

  void validate() const;
};

Corpus generate_synthetic(const SynthConfig& config, std::uint64_t seed);

struct FoldSplit {
  int repeat = 0;
  int fold = 0;
  std::vector<std::string> train_ids;  // corpus document order
  std::vector<std::string> test_ids;
};

// Document-level k-fold, repeated. Ids are shuffled with a seeded
// permutation and dealt round-robin into k buckets per repeat.
std::vector<FoldSplit> grouped_kfold(const Corpus& corpus, int k, int repeats,
                                     std::uint64_t seed);

}  // namespace acd
