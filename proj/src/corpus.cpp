#include "acd/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace acd {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_ascii_space(unsigned char c) { return c < 128 && std::isspace(c); }
bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c); }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (unsigned char c : text) {
    if (is_ascii_space(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

Clause make_clause(std::string text, std::optional<int> gold_label) {
  Clause clause;
  clause.tokens = tokenize(text);
  clause.text = std::move(text);
  clause.gold_label = gold_label;
  return clause;
}

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw ValidationError("label set must not be empty");
  std::unordered_set<std::string_view> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second)
      throw ValidationError("duplicate label name: " + n);
  }
}

std::optional<int> LabelSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::size_t Corpus::total_clauses() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.clauses.size();
  return n;
}

const Document* Corpus::find_document(std::string_view id) const {
  for (const auto& d : documents) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& msg) {
  throw ValidationError("corpus line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ValidationError("corpus input is empty");
  ++line_no;

  ordered_json header;
  try {
    header = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    parse_fail(line_no, std::string("malformed header: ") + e.what());
  }
  if (!header.is_object() || !header.contains("labels") || !header["labels"].is_array())
    parse_fail(line_no, "header must be an object declaring \"labels\"");

  std::vector<std::string> names;
  for (const auto& n : header["labels"]) {
    if (!n.is_string()) parse_fail(line_no, "label names must be strings");
    names.push_back(n.get<std::string>());
  }

  Corpus corpus;
  try {
    corpus.labels = LabelSet(std::move(names));
  } catch (const ValidationError& e) {
    parse_fail(line_no, e.what());
  }

  std::unordered_set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json doc_json;
    try {
      doc_json = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      parse_fail(line_no, std::string("malformed document: ") + e.what());
    }
    if (!doc_json.is_object() || !doc_json.contains("id") || !doc_json["id"].is_string())
      parse_fail(line_no, "document must be an object with a string \"id\"");
    if (!doc_json.contains("clauses") || !doc_json["clauses"].is_array())
      parse_fail(line_no, "document must declare a \"clauses\" array");

    Document doc;
    doc.id = doc_json["id"].get<std::string>();
    if (!seen_ids.insert(doc.id).second)
      parse_fail(line_no, "duplicate document id: " + doc.id);

    for (const auto& cj : doc_json["clauses"]) {
      if (!cj.is_object() || !cj.contains("text") || !cj["text"].is_string())
        parse_fail(line_no, "clause must be an object with a string \"text\"");
      std::optional<int> label;
      if (cj.contains("label")) {
        if (!cj["label"].is_string())
          parse_fail(line_no, "clause label must be a string");
        auto idx = corpus.labels.index_of(cj["label"].get<std::string>());
        if (!idx)
          parse_fail(line_no, "unknown label name: " + cj["label"].get<std::string>());
        label = idx;
      }
      doc.clauses.push_back(make_clause(cj["text"].get<std::string>(), label));
    }
    if (doc.clauses.empty()) parse_fail(line_no, "document " + doc.id + " has no clauses");
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus parse_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus file: " + path);
  return parse_corpus(in);
}

void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  ordered_json header;
  header["labels"] = corpus.labels.names();
  out << header.dump() << '\n';
  for (const auto& doc : corpus.documents) {
    ordered_json dj;
    dj["id"] = doc.id;
    dj["clauses"] = ordered_json::array();
    for (const auto& clause : doc.clauses) {
      ordered_json cj;
      cj["text"] = clause.text;
      if (clause.gold_label) cj["label"] = corpus.labels.name(*clause.gold_label);
      dj["clauses"].push_back(std::move(cj));
    }
    out << dj.dump() << '\n';
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  serialize_corpus(corpus, out);
  return out.str();
}

double fleiss_kappa(const RatingMatrix& ratings) {
  const auto& m = ratings.counts;
  const long n = ratings.raters_per_item;
  if (m.size() < 2) throw ValidationError("fleiss_kappa needs at least 2 items");
  if (n < 2) throw ValidationError("fleiss_kappa needs at least 2 raters per item");
  const std::size_t categories = m.front().size();
  if (categories < 2) throw ValidationError("fleiss_kappa needs at least 2 categories");

  std::vector<double> category_share(categories, 0.0);
  double mean_item_agreement = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].size() != categories)
      throw ValidationError("ragged rating matrix at item " + std::to_string(i));
    long row_sum = 0;
    double agree = 0.0;
    for (std::size_t j = 0; j < categories; ++j) {
      const long c = m[i][j];
      if (c < 0) throw ValidationError("negative rating count");
      row_sum += c;
      agree += static_cast<double>(c) * (c - 1);
      category_share[j] += static_cast<double>(c);
    }
    if (row_sum != n)
      throw ValidationError("item " + std::to_string(i) + " row sum " +
                            std::to_string(row_sum) + " != raters_per_item " +
                            std::to_string(n));
    mean_item_agreement += agree / (static_cast<double>(n) * (n - 1));
  }
  mean_item_agreement /= static_cast<double>(m.size());

  double chance_agreement = 0.0;
  const double total = static_cast<double>(m.size()) * static_cast<double>(n);
  for (double s : category_share) {
    const double p = s / total;
    chance_agreement += p * p;
  }

  // All raters agree on every item: kappa is 1 by definition, and this also
  // covers the degenerate chance_agreement == 1 case.
  if (mean_item_agreement == 1.0) return 1.0;
  return (mean_item_agreement - chance_agreement) / (1.0 - chance_agreement);
}

void SynthConfig::validate() const {
  const std::size_t a = labels.size();
  if (a < 2) throw ValidationError("synthetic config needs at least 2 labels");
  if (num_documents < 1) throw ValidationError("num_documents must be positive");
  auto check_range = [](const IntRange& r, const char* what) {
    if (r.lo < 1 || r.hi < r.lo)
      throw ValidationError(std::string(what) + " range must satisfy 1 <= lo <= hi");
  };
  check_range(clauses_per_doc, "clauses_per_doc");
  check_range(tokens_per_clause, "tokens_per_clause");
  if (lexical_ambiguity < 0.0 || lexical_ambiguity > 1.0)
    throw ValidationError("lexical_ambiguity must lie in [0, 1]");

  auto check_stochastic = [](std::span<const double> row, const std::string& what) {
    double sum = 0.0;
    for (double p : row) {
      if (p < 0.0) throw ValidationError(what + " has a negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ValidationError(what + " must sum to 1 (got " + std::to_string(sum) + ")");
  };
  if (label_transition.size() != a)
    throw ValidationError("label_transition must have one row per label");
  for (std::size_t i = 0; i < a; ++i) {
    if (label_transition[i].size() != a)
      throw ValidationError("label_transition row " + std::to_string(i) + " has wrong width");
    check_stochastic(label_transition[i], "label_transition row " + std::to_string(i));
  }
  if (initial_label_dist.size() != a)
    throw ValidationError("initial_label_dist must have one entry per label");
  check_stochastic(initial_label_dist, "initial_label_dist");

  if (vocabulary.empty()) throw ValidationError("vocabulary must not be empty");
  for (const auto& w : vocabulary) {
    if (tokenize(w) != std::vector<std::string>{w})
      throw ValidationError("vocabulary word is not a single clean token: " + w);
  }
  if (vocab_per_label.size() != a)
    throw ValidationError("vocab_per_label must have one distribution per label");
  for (std::size_t i = 0; i < a; ++i) {
    if (vocab_per_label[i].size() != vocabulary.size())
      throw ValidationError("vocab_per_label row " + std::to_string(i) +
                            " does not cover the vocabulary");
    check_stochastic(vocab_per_label[i], "vocab_per_label row " + std::to_string(i));
  }
}

Corpus generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, "synth"));

  Corpus corpus;
  corpus.labels = LabelSet(config.labels);
  corpus.documents.reserve(config.num_documents);

  int id_width = 1;
  for (int n = config.num_documents; n >= 10; n /= 10) ++id_width;

  for (int d = 0; d < config.num_documents; ++d) {
    Document doc;
    std::string num = std::to_string(d);
    doc.id = "d" + std::string(id_width - static_cast<int>(num.size()), '0') + num;

    const int num_clauses = rng.range(config.clauses_per_doc.lo, config.clauses_per_doc.hi);
    int label = static_cast<int>(rng.categorical(config.initial_label_dist));
    for (int c = 0; c < num_clauses; ++c) {
      if (c > 0) label = static_cast<int>(rng.categorical(config.label_transition[label]));
      const int num_tokens = rng.range(config.tokens_per_clause.lo, config.tokens_per_clause.hi);
      std::string text;
      for (int t = 0; t < num_tokens; ++t) {
        std::size_t word;
        if (rng.uniform() < config.lexical_ambiguity) {
          word = rng.below(config.vocabulary.size());
        } else {
          word = rng.categorical(config.vocab_per_label[label]);
        }
        if (t > 0) text.push_back(' ');
        text += config.vocabulary[word];
      }
      doc.clauses.push_back(make_clause(std::move(text), label));
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

std::vector<FoldSplit> grouped_kfold(const Corpus& corpus, int k, int repeats,
                                     std::uint64_t seed) {
  const int num_docs = static_cast<int>(corpus.documents.size());
  if (k < 2) throw ValidationError("grouped_kfold needs k >= 2");
  if (repeats < 1) throw ValidationError("grouped_kfold needs repeats >= 1");
  if (k > num_docs)
    throw ValidationError("grouped_kfold: k = " + std::to_string(k) +
                          " exceeds document count " + std::to_string(num_docs));

  std::vector<FoldSplit> splits;
  splits.reserve(static_cast<std::size_t>(k) * repeats);
  for (int r = 0; r < repeats; ++r) {
    std::vector<int> order(num_docs);
    for (int i = 0; i < num_docs; ++i) order[i] = i;
    Rng rng(derive_seed(seed, "fold-split", static_cast<std::uint64_t>(r)));
    rng.shuffle(order);

    // deal round-robin into k buckets
    std::vector<int> bucket_of(num_docs);
    for (int i = 0; i < num_docs; ++i) bucket_of[order[i]] = i % k;

    for (int fold = 0; fold < k; ++fold) {
      FoldSplit split;
      split.repeat = r;
      split.fold = fold;
      for (int i = 0; i < num_docs; ++i) {
        const auto& id = corpus.documents[i].id;
        if (bucket_of[i] == fold) {
          split.test_ids.push_back(id);
        } else {
          split.train_ids.push_back(id);
        }
      }
      splits.push_back(std::move(split));
    }
  }
  return splits;
}

}  // namespace acd
