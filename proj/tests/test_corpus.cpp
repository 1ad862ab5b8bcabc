#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <sstream>

#include "acd/corpus.hpp"

using namespace acd;

namespace {

SynthConfig small_synth(int num_labels = 2) {
  SynthConfig cfg;
  for (int i = 0; i < num_labels; ++i) cfg.labels.push_back("t" + std::to_string(i));
  cfg.num_documents = 5;
  cfg.clauses_per_doc = {3, 3};
  cfg.label_transition.assign(num_labels, std::vector<double>(num_labels, 1.0 / num_labels));
  cfg.initial_label_dist.assign(num_labels, 1.0 / num_labels);
  for (int i = 0; i < num_labels; ++i) {
    cfg.vocabulary.push_back("w" + std::to_string(i) + "a");
    cfg.vocabulary.push_back("w" + std::to_string(i) + "b");
  }
  cfg.vocab_per_label.assign(num_labels,
                             std::vector<double>(cfg.vocabulary.size(), 0.0));
  for (int i = 0; i < num_labels; ++i) {
    cfg.vocab_per_label[i][2 * i] = 0.5;
    cfg.vocab_per_label[i][2 * i + 1] = 0.5;
  }
  cfg.tokens_per_clause = {2, 4};
  cfg.lexical_ambiguity = 0.1;
  return cfg;
}

// Straight-line transcription of the Fleiss formula, kept independent of
// the library implementation.
double fleiss_oracle(const std::vector<std::vector<long>>& m, long n) {
  const double items = static_cast<double>(m.size());
  double p_bar = 0.0;
  for (const auto& row : m) {
    double s = 0.0;
    for (long c : row) s += static_cast<double>(c) * (static_cast<double>(c) - 1.0);
    p_bar += s / (static_cast<double>(n) * (static_cast<double>(n) - 1.0));
  }
  p_bar /= items;
  double p_e = 0.0;
  for (std::size_t j = 0; j < m[0].size(); ++j) {
    double col = 0.0;
    for (const auto& row : m) col += static_cast<double>(row[j]);
    const double pj = col / (items * static_cast<double>(n));
    p_e += pj * pj;
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

}  // namespace

TEST_CASE("tokenize lowercases, splits on whitespace and detaches punctuation") {
  CHECK(tokenize("The room, was small!") ==
        std::vector<std::string>{"the", "room", ",", "was", "small", "!"});
  CHECK(tokenize("  spaced   out  ") == std::vector<std::string>{"spaced", "out"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("don't") == std::vector<std::string>{"don", "'", "t"});
}

TEST_CASE("parse reads a labelled corpus") {
  std::istringstream in(
      R"({"labels":["claim","premise"]}
{"id":"d1","clauses":[{"text":"Great hotel!","label":"claim"},{"text":"The staff was kind.","label":"premise"}]}
)");
  const Corpus corpus = parse_corpus(in);
  CHECK(corpus.labels.size() == 2);
  REQUIRE(corpus.documents.size() == 1);
  REQUIRE(corpus.documents[0].clauses.size() == 2);
  CHECK(corpus.documents[0].clauses[0].gold_label == 0);
  CHECK(corpus.documents[0].clauses[1].gold_label == 1);
  CHECK(corpus.documents[0].clauses[0].tokens ==
        std::vector<std::string>{"great", "hotel", "!"});
}

TEST_CASE("parse rejects unknown labels, naming the label") {
  std::istringstream in(
      R"({"labels":["claim","premise"]}
{"id":"d1","clauses":[{"text":"x","label":"foo"}]}
)");
  CHECK_THROWS_WITH_AS(parse_corpus(in), doctest::Contains("foo"), ValidationError);
}

TEST_CASE("parse reports the offending line number") {
  std::istringstream in(
      R"({"labels":["a","b"]}
{"id":"d1","clauses":[{"text":"x","label":"a"}]}
{"id":"d2","clauses":)");
  CHECK_THROWS_WITH_AS(parse_corpus(in), doctest::Contains("line 3"), ValidationError);
}

TEST_CASE("parse rejects duplicate ids and empty documents") {
  std::istringstream dup(
      R"({"labels":["a"]}
{"id":"d1","clauses":[{"text":"x"}]}
{"id":"d1","clauses":[{"text":"y"}]}
)");
  CHECK_THROWS_WITH_AS(parse_corpus(dup), doctest::Contains("duplicate"), ValidationError);

  std::istringstream empty(
      R"({"labels":["a"]}
{"id":"d1","clauses":[]}
)");
  CHECK_THROWS_WITH_AS(parse_corpus(empty), doctest::Contains("no clauses"), ValidationError);
}

TEST_CASE("serialize(parse(x)) is the canonical form of x") {
  // unlabelled clause, shuffled key order, extra whitespace to normalise
  const std::string input =
      "{\"labels\": [\"claim\", \"premise\"]}\n"
      "{\"clauses\": [{\"label\": \"claim\", \"text\": \"a b\"}], \"id\": \"d1\"}\n"
      "{\"id\":\"d2\",\"clauses\":[{\"text\":\"c\"}]}\n"
      "{\"id\":\"d3\",\"clauses\":[{\"text\":\"d!\",\"label\":\"premise\"}]}\n";
  const std::string canonical =
      "{\"labels\":[\"claim\",\"premise\"]}\n"
      "{\"id\":\"d1\",\"clauses\":[{\"text\":\"a b\",\"label\":\"claim\"}]}\n"
      "{\"id\":\"d2\",\"clauses\":[{\"text\":\"c\"}]}\n"
      "{\"id\":\"d3\",\"clauses\":[{\"text\":\"d!\",\"label\":\"premise\"}]}\n";
  std::istringstream in(input);
  CHECK(serialize_corpus(parse_corpus(in)) == canonical);

  // canonical form is a fixed point of parse + serialize
  std::istringstream again(canonical);
  CHECK(serialize_corpus(parse_corpus(again)) == canonical);
}

TEST_CASE("generate_synthetic honours document and clause counts") {
  const SynthConfig cfg = small_synth();
  const Corpus corpus = generate_synthetic(cfg, 11);
  REQUIRE(corpus.documents.size() == 5);
  for (const auto& doc : corpus.documents) CHECK(doc.clauses.size() == 3);
  for (const auto& doc : corpus.documents) {
    for (const auto& clause : doc.clauses) {
      REQUIRE(clause.gold_label.has_value());
      CHECK(*clause.gold_label < corpus.labels.size());
      CHECK(clause.tokens == tokenize(clause.text));
    }
  }
}

TEST_CASE("generate_synthetic is deterministic in (config, seed)") {
  const SynthConfig cfg = small_synth(3);
  CHECK(serialize_corpus(generate_synthetic(cfg, 42)) ==
        serialize_corpus(generate_synthetic(cfg, 42)));
  CHECK(serialize_corpus(generate_synthetic(cfg, 42)) !=
        serialize_corpus(generate_synthetic(cfg, 43)));
}

TEST_CASE("identity transition keeps a single label per document") {
  SynthConfig cfg = small_synth(3);
  cfg.num_documents = 30;
  cfg.clauses_per_doc = {4, 6};
  cfg.label_transition = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const Corpus corpus = generate_synthetic(cfg, 5);
  for (const auto& doc : corpus.documents) {
    for (const auto& clause : doc.clauses)
      CHECK(*clause.gold_label == *doc.clauses[0].gold_label);
  }
}

TEST_CASE("empirical transition estimate converges to the configured matrix") {
  SynthConfig cfg = small_synth(3);
  cfg.num_documents = 700;
  cfg.clauses_per_doc = {15, 20};
  cfg.label_transition = {{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.25, 0.25, 0.5}};
  const Corpus corpus = generate_synthetic(cfg, 99);

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(3, 3);
  std::size_t transitions = 0;
  for (const auto& doc : corpus.documents) {
    for (std::size_t i = 1; i < doc.clauses.size(); ++i) {
      counts(*doc.clauses[i - 1].gold_label, *doc.clauses[i].gold_label) += 1.0;
      ++transitions;
    }
  }
  REQUIRE(transitions >= 10000);
  for (int i = 0; i < 3; ++i) {
    const double row = counts.row(i).sum();
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(counts(i, j) / row - cfg.label_transition[i][j]) < 0.05);
  }
}

TEST_CASE("fleiss_kappa is 1 under perfect agreement") {
  RatingMatrix r;
  r.raters_per_item = 4;
  r.counts = {{4, 0, 0}, {0, 4, 0}, {4, 0, 0}, {0, 0, 4}};
  CHECK(fleiss_kappa(r) == 1.0);
}

TEST_CASE("fleiss_kappa of an even two-way split is -1") {
  RatingMatrix r;
  r.raters_per_item = 2;
  r.counts = {{1, 1}, {1, 1}, {1, 1}, {1, 1}};
  CHECK(fleiss_kappa(r) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("fleiss_kappa matches the straight-line formula oracle") {
  RatingMatrix r;
  r.raters_per_item = 6;
  r.counts = {{4, 1, 1}, {2, 2, 2}, {0, 3, 3}, {6, 0, 0}};
  const double expected = fleiss_oracle(r.counts, 6);
  CHECK(expected == doctest::Approx(0.2).epsilon(1e-12));  // hand-checked value
  CHECK(fleiss_kappa(r) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fleiss_kappa is invariant under row and column permutations") {
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const int items = 3 + static_cast<int>(rng.below(5));
    const int cats = 2 + static_cast<int>(rng.below(3));
    const int n = 3 + static_cast<int>(rng.below(4));
    RatingMatrix r;
    r.raters_per_item = n;
    for (int i = 0; i < items; ++i) {
      std::vector<long> row(cats, 0);
      for (int v = 0; v < n; ++v) ++row[rng.below(cats)];
      r.counts.push_back(row);
    }
    const double base = fleiss_kappa(r);

    RatingMatrix permuted = r;
    rng.shuffle(permuted.counts);  // item rows
    std::vector<std::size_t> col_order(cats);
    for (int c = 0; c < cats; ++c) col_order[c] = c;
    rng.shuffle(col_order);
    for (auto& row : permuted.counts) {
      std::vector<long> next(cats);
      for (int c = 0; c < cats; ++c) next[c] = row[col_order[c]];
      row = next;
    }
    CHECK(fleiss_kappa(permuted) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("fleiss_kappa validates its input") {
  RatingMatrix r;
  r.raters_per_item = 3;
  r.counts = {{2, 0}, {1, 1}};
  CHECK_THROWS_WITH_AS(fleiss_kappa(r), doctest::Contains("row sum"), ValidationError);

  RatingMatrix single;
  single.raters_per_item = 2;
  single.counts = {{2, 0}};
  CHECK_THROWS_AS(fleiss_kappa(single), ValidationError);
}

TEST_CASE("grouped_kfold partitions documents") {
  SynthConfig cfg = small_synth();
  cfg.num_documents = 10;
  const Corpus corpus = generate_synthetic(cfg, 3);

  const auto folds = grouped_kfold(corpus, 10, 1, 17);
  REQUIRE(folds.size() == 10);
  for (const auto& split : folds) CHECK(split.test_ids.size() == 1);

  // within the repeat, test sets partition the documents
  std::vector<std::string> all_test;
  for (const auto& split : folds)
    all_test.insert(all_test.end(), split.test_ids.begin(), split.test_ids.end());
  std::sort(all_test.begin(), all_test.end());
  std::vector<std::string> ids;
  for (const auto& d : corpus.documents) ids.push_back(d.id);
  std::sort(ids.begin(), ids.end());
  CHECK(all_test == ids);
}

TEST_CASE("grouped_kfold with 10 repeats of 10 folds yields 100 splits") {
  SynthConfig cfg = small_synth();
  cfg.num_documents = 20;
  const Corpus corpus = generate_synthetic(cfg, 3);
  const auto folds = grouped_kfold(corpus, 10, 10, 17);
  CHECK(folds.size() == 100);

  for (const auto& split : folds) {
    std::vector<std::string> joined = split.train_ids;
    joined.insert(joined.end(), split.test_ids.begin(), split.test_ids.end());
    CHECK(joined.size() == corpus.documents.size());
    std::sort(joined.begin(), joined.end());
    CHECK(std::adjacent_find(joined.begin(), joined.end()) == joined.end());
  }
}

TEST_CASE("grouped_kfold is seed-reproducible and seed-sensitive") {
  SynthConfig cfg = small_synth();
  cfg.num_documents = 12;
  const Corpus corpus = generate_synthetic(cfg, 3);

  const auto a = grouped_kfold(corpus, 4, 2, 5);
  const auto b = grouped_kfold(corpus, 4, 2, 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].train_ids == b[i].train_ids);
    CHECK(a[i].test_ids == b[i].test_ids);
  }

  const auto c = grouped_kfold(corpus, 4, 2, 6);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].test_ids != c[i].test_ids) any_difference = true;
  }
  CHECK(any_difference);
}

TEST_CASE("grouped_kfold rejects k larger than the document count") {
  SynthConfig cfg = small_synth();
  cfg.num_documents = 3;
  const Corpus corpus = generate_synthetic(cfg, 3);
  CHECK_THROWS_AS(grouped_kfold(corpus, 4, 1, 0), ValidationError);
}

TEST_CASE("synthetic config validation rejects non-stochastic rows") {
  SynthConfig cfg = small_synth();
  cfg.label_transition[0][0] = 0.9;  // row no longer sums to 1
  CHECK_THROWS_WITH_AS(generate_synthetic(cfg, 1), doctest::Contains("sum to 1"),
                       ValidationError);
}
