#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "framefinder/amr.hpp"
#include "framefinder/axes.hpp"
#include "framefinder/corpus.hpp"
#include "framefinder/errors.hpp"
#include "framefinder/labels.hpp"
#include "framefinder/numeric.hpp"

namespace framefinder {

struct ProviderHealth {
  bool ok = true;
  std::string detail;
};

/// Per-document probability for every label of a label set.
class LabelProbabilityProvider {
 public:
  virtual ~LabelProbabilityProvider() = default;
  virtual std::vector<Vector> label_probabilities(std::span<const Document> docs,
                                                  const LabelSet& labels) const = 0;
  virtual ProviderHealth health() const { return {}; }
};

/// Fixed-dimension embedding per document.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<Vector> embed(std::span<const Document> docs) const = 0;
  virtual ProviderHealth health() const { return {}; }
};

/// PENMAN-serialized AMR per document.
class AmrParseProvider {
 public:
  virtual ~AmrParseProvider() = default;
  virtual std::vector<std::string> parse(std::span<const Document> docs) const = 0;
  virtual ProviderHealth health() const { return {}; }
};

struct Providers {
  std::shared_ptr<const LabelProbabilityProvider> labels;
  std::shared_ptr<const EmbeddingProvider> embeddings;
  std::shared_ptr<const AmrParseProvider> amr;
  std::string mode = "custom";
};

// -- output validation shared by every provider -----------------------------

inline void validate_probabilities(std::span<const Vector> probs, std::size_t expected_count,
                                   std::size_t label_count) {
  if (probs.size() != expected_count) {
    throw ProtocolError("expected " + std::to_string(expected_count) + " probability vectors, got " +
                        std::to_string(probs.size()));
  }
  for (std::size_t d = 0; d < probs.size(); ++d) {
    if (probs[d].size() != label_count) {
      throw ProtocolError("probability vector " + std::to_string(d) + " has " +
                          std::to_string(probs[d].size()) + " entries, expected " +
                          std::to_string(label_count));
    }
    for (double p : probs[d]) {
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw ProtocolError("probability " + std::to_string(p) + " outside [0, 1] in vector " +
                            std::to_string(d));
      }
    }
  }
}

inline void validate_embeddings(std::span<const Vector> vectors, std::size_t expected_count) {
  if (vectors.size() != expected_count) {
    throw ProtocolError("expected " + std::to_string(expected_count) + " embeddings, got " +
                        std::to_string(vectors.size()));
  }
  if (vectors.empty()) return;
  const std::size_t dim = vectors.front().size();
  if (dim < 2) throw ProtocolError("embedding dimension must be at least 2");
  for (std::size_t d = 0; d < vectors.size(); ++d) {
    if (vectors[d].size() != dim) {
      throw ProtocolError("embedding " + std::to_string(d) + " has dimension " +
                          std::to_string(vectors[d].size()) + ", expected " + std::to_string(dim));
    }
    if (!numeric::all_finite(vectors[d])) {
      throw ProtocolError("embedding " + std::to_string(d) + " has a non-finite entry");
    }
    if (!(numeric::norm(vectors[d]) > 0.0)) {
      throw ProtocolError("embedding " + std::to_string(d) + " has zero norm");
    }
  }
}

inline void validate_parses(std::span<const std::string> parses, std::size_t expected_count) {
  if (parses.size() != expected_count) {
    throw ProtocolError("expected " + std::to_string(expected_count) + " parses, got " +
                        std::to_string(parses.size()));
  }
  for (std::size_t d = 0; d < parses.size(); ++d) {
    try {
      (void)amr::parse_penman(parses[d]);
    } catch (const Error& e) {
      throw ProtocolError("parse " + std::to_string(d) + " is not valid PENMAN: " + e.what());
    }
  }
}

// -- fixtures ---------------------------------------------------------------

inline constexpr const char* kEmbeddingsFile = "embeddings.jsonl";
inline constexpr const char* kLabelProbsFile = "label_probs.jsonl";
inline constexpr const char* kParsesFile = "parses.amr";

struct FixtureLoadOptions {
  // Later records replace earlier ones with the same id (cache files are
  // append-only); otherwise a repeated id is malformed.
  bool last_record_wins = false;
};

/// Precomputed provider outputs keyed by document id. Any of the three files
/// may be absent; lookups against an absent file raise MissingFixture.
/// Immutable after load.
class FixtureStore {
 public:
  template <typename T>
  struct Record {
    T value;
    std::size_t line = 0;
    std::string text;  // optional, written by caches
  };

  FixtureStore() = default;

  static FixtureStore load(const std::filesystem::path& dir, FixtureLoadOptions opts = {}) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
      throw IoError("fixture directory '" + dir.string() + "' does not exist");
    }
    FixtureStore store;
    store.dir_ = dir;
    if (const auto p = dir / kEmbeddingsFile; std::filesystem::exists(p)) {
      store.has_embeddings_ = true;
      store.load_vectors(p, "vector", store.embeddings_, opts, /*probabilities=*/false);
    }
    if (const auto p = dir / kLabelProbsFile; std::filesystem::exists(p)) {
      store.has_label_probs_ = true;
      store.load_vectors(p, "probs", store.label_probs_, opts, /*probabilities=*/true);
    }
    if (const auto p = dir / kParsesFile; std::filesystem::exists(p)) {
      store.has_parses_ = true;
      store.load_parses(p, opts);
    }
    return store;
  }

  const std::filesystem::path& directory() const noexcept { return dir_; }
  bool has_embeddings() const noexcept { return has_embeddings_; }
  bool has_label_probs() const noexcept { return has_label_probs_; }
  bool has_parses() const noexcept { return has_parses_; }
  std::size_t embedding_count() const noexcept { return embeddings_.size(); }
  std::size_t label_prob_count() const noexcept { return label_probs_.size(); }
  std::size_t parse_count() const noexcept { return parses_.size(); }
  std::optional<std::size_t> embedding_dimension() const noexcept { return embedding_dim_; }
  std::optional<std::size_t> label_count() const noexcept { return label_width_; }

  const Record<Vector>* find_embedding(const std::string& id) const { return find(embeddings_, id); }
  const Record<Vector>* find_label_probs(const std::string& id) const { return find(label_probs_, id); }
  const Record<std::string>* find_parse(const std::string& id) const { return find(parses_, id); }

  /// Embeddings aligned with `ids`.
  std::vector<Vector> embeddings(std::span<const std::string> ids) const {
    return lookup(embeddings_, ids);
  }

  /// Label probabilities aligned with `ids`; each record must have
  /// `label_count` entries.
  std::vector<Vector> label_probs(std::span<const std::string> ids, std::size_t label_count) const {
    auto out = lookup(label_probs_, ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (out[i].size() != label_count) {
        const auto& rec = label_probs_.at(ids[i]);
        throw MalformedFixture(kLabelProbsFile, rec.line,
                               "record has " + std::to_string(out[i].size()) +
                                   " probabilities but the label set has " +
                                   std::to_string(label_count));
      }
    }
    return out;
  }

  std::vector<std::string> parses(std::span<const std::string> ids) const {
    return lookup(parses_, ids);
  }

 private:
  template <typename T>
  static const Record<T>* find(const std::unordered_map<std::string, Record<T>>& m,
                               const std::string& id) {
    const auto it = m.find(id);
    return it == m.end() ? nullptr : &it->second;
  }

  template <typename T>
  static std::vector<T> lookup(const std::unordered_map<std::string, Record<T>>& m,
                               std::span<const std::string> ids) {
    std::vector<T> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      const auto it = m.find(id);
      if (it == m.end()) throw MissingFixture(id);
      out.push_back(it->second.value);
    }
    return out;
  }

  void load_vectors(const std::filesystem::path& path, const char* field,
                    std::unordered_map<std::string, Record<Vector>>& into,
                    const FixtureLoadOptions& opts, bool probabilities) {
    const std::string file = path.filename().string();
    std::istringstream lines(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t>& width = probabilities ? label_width_ : embedding_dim_;
    while (std::getline(lines, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      nlohmann::json rec;
      try {
        rec = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw MalformedFixture(file, line_no, e.what());
      }
      if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() ||
          !rec.contains(field) || !rec[field].is_array()) {
        throw MalformedFixture(file, line_no,
                               std::string("expected {\"id\": string, \"") + field + "\": [number, ...]}");
      }
      Vector v;
      v.reserve(rec[field].size());
      for (const auto& x : rec[field]) {
        if (!x.is_number()) throw MalformedFixture(file, line_no, "non-numeric entry");
        v.push_back(x.get<double>());
      }
      if (!numeric::all_finite(v)) throw MalformedFixture(file, line_no, "non-finite entry");
      if (!width) width = v.size();
      // cache files may hold probabilities for several label sets; lookups
      // check each record against the requested set instead
      const bool mixed_widths_allowed = probabilities && opts.last_record_wins;
      if (v.size() != *width && !mixed_widths_allowed) {
        throw MalformedFixture(file, line_no,
                               "length " + std::to_string(v.size()) + " differs from first record's " +
                                   std::to_string(*width));
      }
      if (probabilities) {
        for (double p : v) {
          if (p < 0.0 || p > 1.0) throw MalformedFixture(file, line_no, "probability outside [0, 1]");
        }
        if (v.empty()) throw MalformedFixture(file, line_no, "empty probability vector");
      } else {
        if (v.size() < 2) throw MalformedFixture(file, line_no, "embedding dimension below 2");
        if (!(numeric::norm(v) > 0.0)) throw MalformedFixture(file, line_no, "zero-norm embedding");
      }
      std::string id = rec["id"].get<std::string>();
      std::string text = rec.contains("text") && rec["text"].is_string() ? rec["text"].get<std::string>() : "";
      auto [it, inserted] = into.try_emplace(id, Record<Vector>{std::move(v), line_no, std::move(text)});
      if (!inserted) {
        if (!opts.last_record_wins) throw MalformedFixture(file, line_no, "duplicate id '" + id + "'");
        it->second = Record<Vector>{std::move(v), line_no, std::move(text)};
      }
    }
  }

  void load_parses(const std::filesystem::path& path, const FixtureLoadOptions& opts) {
    const std::string file = path.filename().string();
    for (auto& block : amr::split_amr_blocks(read_file(path))) {
      if (block.id.empty()) throw MalformedFixture(file, block.line, "block without '# ::id' line");
      if (block.penman.empty()) throw MalformedFixture(file, block.line, "block without a graph");
      try {
        (void)amr::parse_penman(block.penman);
      } catch (const Error& e) {
        throw MalformedFixture(file, block.line, "'" + block.id + "': " + e.what());
      }
      std::string text;
      if (const auto it = block.metadata.find("snt"); it != block.metadata.end()) text = it->second;
      auto [it, inserted] =
          parses_.try_emplace(block.id, Record<std::string>{block.penman, block.line, text});
      if (!inserted) {
        if (!opts.last_record_wins) {
          throw MalformedFixture(file, block.line, "duplicate id '" + block.id + "'");
        }
        it->second = Record<std::string>{std::move(block.penman), block.line, std::move(text)};
      }
    }
  }

  std::filesystem::path dir_;
  bool has_embeddings_ = false;
  bool has_label_probs_ = false;
  bool has_parses_ = false;
  std::optional<std::size_t> embedding_dim_;
  std::optional<std::size_t> label_width_;
  std::unordered_map<std::string, Record<Vector>> embeddings_;
  std::unordered_map<std::string, Record<Vector>> label_probs_;
  std::unordered_map<std::string, Record<std::string>> parses_;
};

inline std::vector<std::string> document_ids(std::span<const Document> docs) {
  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const auto& d : docs) ids.push_back(d.id);
  return ids;
}

/// Serves all three provider interfaces from a loaded FixtureStore.
class FixtureProvider final : public LabelProbabilityProvider,
                              public EmbeddingProvider,
                              public AmrParseProvider {
 public:
  explicit FixtureProvider(std::shared_ptr<const FixtureStore> store) : store_(std::move(store)) {}

  std::vector<Vector> label_probabilities(std::span<const Document> docs,
                                          const LabelSet& labels) const override {
    if (!store_->has_label_probs() && !docs.empty()) throw MissingFixture(docs.front().id);
    return store_->label_probs(document_ids(docs), labels.size());
  }

  std::vector<Vector> embed(std::span<const Document> docs) const override {
    if (!store_->has_embeddings() && !docs.empty()) throw MissingFixture(docs.front().id);
    return store_->embeddings(document_ids(docs));
  }

  std::vector<std::string> parse(std::span<const Document> docs) const override {
    if (!store_->has_parses() && !docs.empty()) throw MissingFixture(docs.front().id);
    return store_->parses(document_ids(docs));
  }

  ProviderHealth health() const override { return {true, "fixtures, ok"}; }

  const FixtureStore& store() const noexcept { return *store_; }

 private:
  std::shared_ptr<const FixtureStore> store_;
};

inline Providers make_fixture_providers(const std::filesystem::path& dir) {
  auto provider =
      std::make_shared<FixtureProvider>(std::make_shared<const FixtureStore>(FixtureStore::load(dir)));
  return {provider, provider, provider, "fixtures"};
}

/// Pseudo-document id under which a pole text is looked up.
inline std::string pole_document_id(const std::string& axis_name, bool virtue,
                                    std::optional<std::size_t> keyword = std::nullopt) {
  std::string id = "pole:" + axis_name + (virtue ? ":virtue" : ":vice");
  if (keyword) id += ":" + std::to_string(*keyword);
  return id;
}

/// Pseudo-documents for every pole text (or pole keyword) of `specs`.
inline std::vector<Document> pole_documents(std::span<const AxisSpec> specs) {
  std::vector<Document> out;
  auto add = [&](const AxisSpec& s, bool virtue) {
    const auto& keywords = virtue ? s.virtue_keywords : s.vice_keywords;
    if (keywords.empty()) {
      out.push_back({pole_document_id(s.name, virtue), virtue ? s.virtue : s.vice, out.size()});
    } else {
      for (std::size_t k = 0; k < keywords.size(); ++k) {
        out.push_back({pole_document_id(s.name, virtue, k), keywords[k], out.size()});
      }
    }
  };
  for (const auto& s : specs) {
    add(s, false);
    add(s, true);
  }
  return out;
}

}  // namespace framefinder
