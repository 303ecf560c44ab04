#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "framefinder/errors.hpp"
#include "framefinder/parallel.hpp"
#include "framefinder/providers.hpp"

namespace framefinder {

inline constexpr int kWireVersion = 1;

enum class InferenceKind { labels, embeddings, amr };

inline std::string_view to_string(InferenceKind k) {
  switch (k) {
    case InferenceKind::labels: return "labels";
    case InferenceKind::embeddings: return "embeddings";
    case InferenceKind::amr: return "amr";
  }
  return "labels";
}

/// "http://host:port/prefix" split into the part httplib connects to and
/// the path prefix requests are issued under.
struct Endpoint {
  std::string scheme_host_port;
  std::string path_prefix;

  static Endpoint parse(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos || url.substr(0, scheme_end) != "http") {
      throw ConfigError("endpoint must be an http:// URL, got '" + std::string(url) + "'");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint e;
    e.scheme_host_port = std::string(url.substr(0, path_start));
    if (path_start != std::string_view::npos) e.path_prefix = std::string(url.substr(path_start));
    while (!e.path_prefix.empty() && e.path_prefix.back() == '/') e.path_prefix.pop_back();
    if (e.scheme_host_port.size() <= scheme_end + 3) throw ConfigError("endpoint has no host");
    return e;
  }

  std::string path(std::string_view kind) const { return path_prefix + "/" + std::string(kind); }
};

struct HttpClientOptions {
  std::size_t batch_size = 16;
  std::size_t jobs = 1;
  std::chrono::seconds connect_timeout{5};
  std::chrono::seconds read_timeout{120};
};

/// Client for the versioned inference wire format:
///   POST <endpoint>/<kind>  {"version": 1, "texts": [...], "config": {...}}
///   -> {"version": 1, "outputs": [...]}
/// Texts are sent in batches (possibly concurrently); outputs are
/// reassembled in input order.
class InferenceClient {
 public:
  InferenceClient(std::string url, HttpClientOptions opts = {})
      : url_(std::move(url)), endpoint_(Endpoint::parse(url_)), opts_(opts) {
    if (opts_.batch_size == 0) throw ConfigError("batch size must be positive");
  }

  const std::string& url() const noexcept { return url_; }

  nlohmann::json infer(InferenceKind kind, std::span<const std::string> texts,
                       const nlohmann::json& config) const {
    nlohmann::json outputs = nlohmann::json::array();
    if (texts.empty()) return outputs;

    const std::size_t batches = (texts.size() + opts_.batch_size - 1) / opts_.batch_size;
    std::vector<nlohmann::json> results(batches);
    parallel_for(batches, opts_.jobs, [&](std::size_t b) {
      const std::size_t begin = b * opts_.batch_size;
      const std::size_t end = std::min(texts.size(), begin + opts_.batch_size);
      results[b] = post_batch(kind, texts.subspan(begin, end - begin), config);
    });
    for (auto& r : results) {
      for (auto& o : r) outputs.push_back(std::move(o));
    }
    return outputs;
  }

  ProviderHealth health() const {
    httplib::Client client(endpoint_.scheme_host_port);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(2, 0);
    auto res = client.Get(endpoint_.path("health"));
    if (!res) return {false, "endpoint unreachable: " + httplib::to_string(res.error())};
    if (res->status != 200) return {false, "endpoint health returned HTTP " + std::to_string(res->status)};
    return {true, "endpoint, ok"};
  }

 private:
  nlohmann::json post_batch(InferenceKind kind, std::span<const std::string> texts,
                            const nlohmann::json& config) const {
    const nlohmann::json body = {{"version", kWireVersion},
                                 {"texts", std::vector<std::string>(texts.begin(), texts.end())},
                                 {"config", config}};
    httplib::Client client(endpoint_.scheme_host_port);
    client.set_connection_timeout(opts_.connect_timeout);
    client.set_read_timeout(opts_.read_timeout);
    auto res = client.Post(endpoint_.path(to_string(kind)), body.dump(), "application/json");
    if (!res) {
      throw TransportError(std::string(to_string(kind)) + " request to " + url_ +
                           " failed: " + httplib::to_string(res.error()));
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      if (res->status != 200) {
        throw RemoteError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
      }
      throw ProtocolError("response is not JSON");
    }
    if (reply.is_object() && reply.contains("error")) {
      const auto& err = reply["error"];
      throw RemoteError(err.is_string() ? err.get<std::string>() : err.dump());
    }
    if (res->status != 200) {
      throw RemoteError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    if (!reply.is_object() || reply.value("version", -1) != kWireVersion) {
      throw ProtocolError("response must be an object with \"version\": 1");
    }
    if (!reply.contains("outputs") || !reply["outputs"].is_array()) {
      throw ProtocolError("response has no \"outputs\" array");
    }
    if (reply["outputs"].size() != texts.size()) {
      throw ProtocolError("response has " + std::to_string(reply["outputs"].size()) +
                          " outputs for " + std::to_string(texts.size()) + " texts");
    }
    return std::move(reply["outputs"]);
  }

  std::string url_;
  Endpoint endpoint_;
  HttpClientOptions opts_;
};

namespace detail {

inline std::vector<std::string> texts_of(std::span<const Document> docs) {
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& d : docs) texts.push_back(d.text);
  return texts;
}

inline std::vector<Vector> to_vectors(const nlohmann::json& outputs) {
  std::vector<Vector> out;
  out.reserve(outputs.size());
  for (const auto& o : outputs) {
    if (!o.is_array()) throw ProtocolError("output is not an array of numbers");
    Vector v;
    v.reserve(o.size());
    for (const auto& x : o) {
      if (!x.is_number()) throw ProtocolError("output is not an array of numbers");
      v.push_back(x.get<double>());
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

/// Remote-backed provider for all three interfaces.
class HttpProvider final : public LabelProbabilityProvider,
                           public EmbeddingProvider,
                           public AmrParseProvider {
 public:
  explicit HttpProvider(std::string url, HttpClientOptions opts = {})
      : client_(std::move(url), opts) {}

  std::vector<Vector> label_probabilities(std::span<const Document> docs,
                                          const LabelSet& labels) const override {
    if (docs.empty()) return {};
    const auto config = label_set_to_json(labels);
    auto out = detail::to_vectors(
        client_.infer(InferenceKind::labels, detail::texts_of(docs), config));
    validate_probabilities(out, docs.size(), labels.size());
    return out;
  }

  std::vector<Vector> embed(std::span<const Document> docs) const override {
    if (docs.empty()) return {};
    auto out = detail::to_vectors(
        client_.infer(InferenceKind::embeddings, detail::texts_of(docs), nlohmann::json::object()));
    validate_embeddings(out, docs.size());
    return out;
  }

  std::vector<std::string> parse(std::span<const Document> docs) const override {
    if (docs.empty()) return {};
    const auto outputs =
        client_.infer(InferenceKind::amr, detail::texts_of(docs), nlohmann::json::object());
    std::vector<std::string> out;
    out.reserve(outputs.size());
    for (const auto& o : outputs) {
      if (!o.is_string()) throw ProtocolError("amr output is not a string");
      out.push_back(o.get<std::string>());
    }
    validate_parses(out, docs.size());
    return out;
  }

  ProviderHealth health() const override { return client_.health(); }

 private:
  InferenceClient client_;
};

/// Wraps another provider and persists its results in fixture format under
/// `dir`. A cached record is reused only when its id and stored text both
/// match the requested document.
class CachingProvider final : public LabelProbabilityProvider,
                              public EmbeddingProvider,
                              public AmrParseProvider {
 public:
  CachingProvider(Providers inner, std::filesystem::path dir)
      : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    store_ = FixtureStore::load(dir_, {.last_record_wins = true});
  }

  std::vector<Vector> label_probabilities(std::span<const Document> docs,
                                          const LabelSet& labels) const override {
    // probabilities depend on the label set, so its names are part of the text key
    const std::string label_key = "\x1f" + nlohmann::json(labels.names()).dump();
    return cached<Vector>(
        docs, [&](const std::string& id) { return store_.find_label_probs(id); },
        [&](std::span<const Document> miss) { return inner_.labels->label_probabilities(miss, labels); },
        [&](const Document& d, const Vector& v) {
          append_jsonl(kLabelProbsFile, {{"id", d.id}, {"probs", v}, {"text", d.text + label_key}});
        },
        [&](const Document& d) { return d.text + label_key; });
  }

  std::vector<Vector> embed(std::span<const Document> docs) const override {
    return cached<Vector>(
        docs, [&](const std::string& id) { return store_.find_embedding(id); },
        [&](std::span<const Document> miss) { return inner_.embeddings->embed(miss); },
        [&](const Document& d, const Vector& v) {
          append_jsonl(kEmbeddingsFile, {{"id", d.id}, {"vector", v}, {"text", d.text}});
        },
        [](const Document& d) { return d.text; });
  }

  std::vector<std::string> parse(std::span<const Document> docs) const override {
    return cached<std::string>(
        docs, [&](const std::string& id) { return store_.find_parse(id); },
        [&](std::span<const Document> miss) { return inner_.amr->parse(miss); },
        [&](const Document& d, const std::string& penman) {
          append_text(kParsesFile, "# ::id " + d.id + "\n# ::snt " + single_line(d.text) + "\n" + penman + "\n\n");
        },
        [](const Document& d) { return single_line(d.text); });
  }

  ProviderHealth health() const override {
    return inner_.embeddings ? inner_.embeddings->health() : ProviderHealth{};
  }

 private:
  static std::string single_line(std::string text) {
    for (char& c : text) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    return text;
  }

  template <typename T, typename Find, typename Compute, typename Persist, typename Key>
  std::vector<T> cached(std::span<const Document> docs, Find find, Compute compute, Persist persist,
                        Key stored_text) const {
    std::vector<T> out(docs.size());
    std::vector<Document> misses;
    std::vector<std::size_t> miss_index;
    {
      std::lock_guard lock(mutex_);
      for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto* rec = find(docs[i].id);
        if (rec && rec->text == stored_text(docs[i])) {
          out[i] = rec->value;
        } else {
          misses.push_back(docs[i]);
          miss_index.push_back(i);
        }
      }
    }
    if (misses.empty()) return out;
    auto computed = compute(misses);
    std::lock_guard lock(mutex_);
    for (std::size_t k = 0; k < misses.size(); ++k) {
      persist(misses[k], computed[k]);
      out[miss_index[k]] = std::move(computed[k]);
    }
    store_ = FixtureStore::load(dir_, {.last_record_wins = true});
    return out;
  }

  void append_jsonl(const char* file, const nlohmann::json& rec) const {
    append_text(file, rec.dump() + "\n");
  }

  void append_text(const char* file, const std::string& text) const {
    std::ofstream out(dir_ / file, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot write cache file '" + (dir_ / file).string() + "'");
    out << text;
  }

  Providers inner_;
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  mutable FixtureStore store_;
};

inline Providers make_http_providers(const std::string& url, HttpClientOptions opts = {},
                                     const std::filesystem::path& cache_dir = {}) {
  auto http = std::make_shared<HttpProvider>(url, opts);
  Providers p{http, http, http, "endpoint"};
  if (cache_dir.empty()) return p;
  auto cache = std::make_shared<CachingProvider>(p, cache_dir);
  return {cache, cache, cache, "endpoint"};
}

}  // namespace framefinder
