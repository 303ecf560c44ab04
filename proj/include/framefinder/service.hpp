#pragma once

#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "framefinder/config.hpp"
#include "framefinder/corpus.hpp"
#include "framefinder/errors.hpp"
#include "framefinder/parallel.hpp"
#include "framefinder/providers.hpp"
#include "framefinder/report.hpp"

namespace framefinder::service {

struct ServiceOptions {
  std::size_t workers = default_jobs();   // concurrent analyses
  std::size_t queue_capacity = 16;        // analyses allowed to wait for a worker
  std::size_t analysis_jobs = 1;          // threads inside one analysis
  std::size_t max_body_bytes = 8 * 1024 * 1024;
  std::size_t max_documents = 20000;
  std::size_t cache_capacity = 64;        // results kept for refiltering
  std::filesystem::path examples_dir;     // holds index.json; empty for none
  std::filesystem::path static_dir;       // UI bundle served under /
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ExampleInfo {
  std::string id;
  std::string title;
  std::size_t n_documents = 0;
};

/// Bounded least-recently-used map from result id to result.
class ResultCache {
 public:
  explicit ResultCache(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

  void put(std::shared_ptr<const AnalysisResult> r) {
    std::lock_guard lock(mutex_);
    const auto it = index_.find(r->result_id);
    if (it != index_.end()) order_.erase(it->second);
    order_.push_front(r);
    index_[r->result_id] = order_.begin();
    while (order_.size() > capacity_) {
      index_.erase(order_.back()->result_id);
      order_.pop_back();
    }
  }

  std::shared_ptr<const AnalysisResult> get(const std::string& id) {
    std::lock_guard lock(mutex_);
    const auto it = index_.find(id);
    if (it == index_.end()) return nullptr;
    order_.splice(order_.begin(), order_, it->second);
    return *it->second;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return order_.size();
  }

 private:
  using List = std::list<std::shared_ptr<const AnalysisResult>>;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  List order_;
  std::unordered_map<std::string, List::iterator> index_;
};

namespace detail {

// Admission control: at most `workers` analyses run; up to `queue` more
// wait; anything beyond is refused.
class WorkerGate {
 public:
  WorkerGate(std::size_t workers, std::size_t queue)
      : workers_(std::max<std::size_t>(workers, 1)), limit_(workers_ + queue) {}

  class Ticket {
   public:
    explicit Ticket(WorkerGate* g) : gate_(g) {}
    Ticket(Ticket&& o) noexcept : gate_(std::exchange(o.gate_, nullptr)) {}
    Ticket(const Ticket&) = delete;
    ~Ticket() {
      if (gate_) gate_->release();
    }
    explicit operator bool() const { return gate_ != nullptr; }

   private:
    WorkerGate* gate_;
  };

  Ticket try_enter() {
    std::unique_lock lock(mutex_);
    if (admitted_ >= limit_) return Ticket(nullptr);
    ++admitted_;
    cv_.wait(lock, [&] { return running_ < workers_; });
    ++running_;
    return Ticket(this);
  }

  std::size_t admitted() const {
    std::lock_guard lock(mutex_);
    return admitted_;
  }

 private:
  void release() {
    {
      std::lock_guard lock(mutex_);
      --running_;
      --admitted_;
    }
    cv_.notify_one();
  }

  std::size_t workers_;
  std::size_t limit_;
  std::size_t admitted_ = 0;
  std::size_t running_ = 0;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
};

inline Response json_response(int status, const nlohmann::json& j) {
  return {status, j.dump(2) + "\n", "application/json"};
}

inline Response error_response(int status, std::string_view kind, std::string_view message) {
  return json_response(status, {{"error", {{"kind", kind}, {"message", message}}}});
}

struct BadRequest : Error {
  explicit BadRequest(const std::string& msg) : Error(ErrorCode::config, msg) {}
};

inline void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> keys) {
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw BadRequest("unknown field '" + k + "'");
  }
}

inline std::optional<std::uint64_t> optional_count(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0)) {
    throw BadRequest(std::string("'") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace detail

/// Request handling behind the /api/v1 routes. Handlers take and return
/// plain strings so they can be exercised without a socket.
class Service {
 public:
  Service(Providers providers, AnalysisConfig base_config, ServiceOptions opts = {})
      : providers_(std::move(providers)),
        base_(std::move(base_config)),
        opts_(std::move(opts)),
        cache_(opts_.cache_capacity),
        gate_(opts_.workers, opts_.queue_capacity) {
    base_.validate();
    if (!opts_.examples_dir.empty()) load_examples(opts_.examples_dir);
  }

  const ServiceOptions& options() const noexcept { return opts_; }
  const std::vector<ExampleInfo>& example_list() const noexcept { return example_list_; }
  ResultCache& cache() noexcept { return cache_; }

  /// POST /api/v1/analyze
  Response analyze(std::string_view body) {
    if (body.size() > opts_.max_body_bytes) {
      return detail::error_response(413, "PayloadTooLarge",
                                    "request body exceeds " + std::to_string(opts_.max_body_bytes) + " bytes");
    }
    try {
      const auto req = parse_body(body);
      detail::require_known_keys(req, {"texts", "raw", "use_cached_example", "split_lines", "threshold",
                                       "node_threshold", "source_name"});
      const int sources = req.contains("texts") + req.contains("raw") + req.contains("use_cached_example");
      if (sources != 1) throw detail::BadRequest("exactly one of 'texts', 'raw', 'use_cached_example' is required");

      AnalysisConfig config = base_;
      if (req.contains("threshold")) {
        if (!req["threshold"].is_number()) throw detail::BadRequest("'threshold' must be a number");
        config.label_threshold = req["threshold"].get<double>();
      }
      if (auto t = detail::optional_count(req, "node_threshold")) config.node_threshold = *t;
      config.validate();

      if (req.contains("use_cached_example")) {
        if (!req["use_cached_example"].is_string()) throw detail::BadRequest("'use_cached_example' must be a string");
        return cached_example(req["use_cached_example"].get<std::string>(), config);
      }

      bool split = true;
      if (req.contains("split_lines")) {
        if (!req["split_lines"].is_boolean()) throw detail::BadRequest("'split_lines' must be a boolean");
        split = req["split_lines"].get<bool>();
      }
      std::string source = "request";
      if (req.contains("source_name")) {
        if (!req["source_name"].is_string()) throw detail::BadRequest("'source_name' must be a string");
        source = req["source_name"].get<std::string>();
      }

      Corpus corpus;
      if (req.contains("raw")) {
        if (!req["raw"].is_string()) throw detail::BadRequest("'raw' must be a string");
        corpus = split_into_documents(req["raw"].get<std::string>(), split, source);
      } else {
        if (!req["texts"].is_array()) throw detail::BadRequest("'texts' must be an array of strings");
        std::vector<std::string> texts;
        for (const auto& t : req["texts"]) {
          if (!t.is_string()) throw detail::BadRequest("'texts' must be an array of strings");
          texts.push_back(t.get<std::string>());
        }
        corpus = corpus_from_texts(texts, source);
      }
      if (corpus.size() > opts_.max_documents) {
        return detail::error_response(413, "TooManyDocuments",
                                      std::to_string(corpus.size()) + " documents exceed the limit of " +
                                          std::to_string(opts_.max_documents));
      }

      auto ticket = gate_.try_enter();
      if (!ticket) return detail::error_response(503, "Overloaded", "analysis queue is full, retry later");
      auto result = std::make_shared<AnalysisResult>(
          run_perspectives(corpus, providers_, config, {.jobs = opts_.analysis_jobs}));
      if (all_failed(*result)) {
        nlohmann::json detail = {{"labels", perspective_json(result->labels)},
                                 {"axes", perspective_json(result->axes)},
                                 {"structure", perspective_json(result->structure)}};
        return detail::json_response(
            502, {{"error", {{"kind", "AllPerspectivesFailed"}, {"message", "every provider call failed"}}},
                  {"perspectives", detail}});
      }
      cache_.put(result);
      return {200, serialize_result(*result), "application/json"};
    } catch (const detail::BadRequest& e) {
      return detail::error_response(400, "ValidationError", e.what());
    } catch (const Error& e) {
      return detail::error_response(400, e.name(), e.what());
    }
  }

  /// POST /api/v1/refilter
  Response refilter(std::string_view body) {
    if (body.size() > opts_.max_body_bytes) {
      return detail::error_response(413, "PayloadTooLarge", "request body too large");
    }
    try {
      const auto req = parse_body(body);
      detail::require_known_keys(req, {"result_id", "structure", "node_threshold", "filter_statistic"});
      if (req.contains("result_id") == req.contains("structure")) {
        throw detail::BadRequest("exactly one of 'result_id' and 'structure' is required");
      }
      const auto threshold = detail::optional_count(req, "node_threshold");
      if (!threshold) throw detail::BadRequest("'node_threshold' is required");

      FilterStatistic stat = base_.filter_statistic;
      std::shared_ptr<const MetaGraph> meta;
      if (req.contains("result_id")) {
        if (!req["result_id"].is_string()) throw detail::BadRequest("'result_id' must be a string");
        const auto r = cache_.get(req["result_id"].get<std::string>());
        if (!r) return detail::error_response(404, "UnknownResult", "no cached result with that id");
        if (!r->metagraph) {
          return detail::error_response(409, "NoStructure", "the structure perspective of that result failed");
        }
        meta = r->metagraph;
        stat = r->config.filter_statistic;
      } else {
        meta = std::make_shared<const MetaGraph>(from_graph_json(req["structure"]));
      }
      if (req.contains("filter_statistic")) {
        if (!req["filter_statistic"].is_string()) throw detail::BadRequest("'filter_statistic' must be a string");
        stat = filter_statistic_from_string(req["filter_statistic"].get<std::string>());
      }
      return detail::json_response(200, to_json(make_structure_perspective(*meta, *threshold, stat)));
    } catch (const detail::BadRequest& e) {
      return detail::error_response(400, "ValidationError", e.what());
    } catch (const Error& e) {
      return detail::error_response(400, e.name(), e.what());
    }
  }

  /// GET /api/v1/examples
  Response examples() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : example_list_) {
      list.push_back({{"id", e.id}, {"title", e.title}, {"n_documents", e.n_documents}});
    }
    return detail::json_response(200, {{"examples", list}});
  }

  /// GET /api/v1/health
  Response health() const {
    ProviderHealth h;
    if (providers_.embeddings) h = providers_.embeddings->health();
    return detail::json_response(200, {{"status", h.ok ? "ok" : "degraded"},
                                       {"providers", h.detail},
                                       {"mode", providers_.mode},
                                       {"version", kResultSchemaVersion},
                                       {"examples", example_list_.size()},
                                       {"cached_results", cache_.size()}});
  }

  /// Registers the routes (and the static UI bundle, if configured).
  void mount(httplib::Server& server) {
    server.set_payload_max_length(opts_.max_body_bytes + 1);
    auto send = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    server.Post("/api/v1/analyze", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, analyze(req.body));
    });
    server.Post("/api/v1/refilter", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, refilter(req.body));
    });
    server.Get("/api/v1/examples", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, examples());
    });
    server.Get("/api/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, health());
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.status == 413) {
        res.set_content(detail::error_response(413, "PayloadTooLarge", "request body too large").body,
                        "application/json");
      } else if (req.path.rfind("/api/", 0) == 0 && res.body.empty()) {
        res.set_content(detail::error_response(res.status, "NotFound", "no such endpoint").body, "application/json");
      }
    });
    if (!opts_.static_dir.empty() && std::filesystem::is_directory(opts_.static_dir)) {
      server.set_mount_point("/", opts_.static_dir.string());
    }
  }

 private:
  struct Example {
    ExampleInfo info;
    Corpus corpus;
    std::shared_ptr<const AnalysisResult> result;
  };

  static nlohmann::json parse_body(std::string_view body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw detail::BadRequest(std::string("body is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw detail::BadRequest("body must be a JSON object");
    return j;
  }

  Response cached_example(const std::string& id, const AnalysisConfig& config) {
    const auto it = examples_.find(id);
    if (it == examples_.end()) return detail::error_response(404, "UnknownExample", "no example '" + id + "'");
    const auto& ex = it->second;
    std::shared_ptr<const AnalysisResult> r = ex.result;
    if (r->result_id != content_id(ex.corpus, config)) {
      r = std::make_shared<const AnalysisResult>(rederive(*ex.result, ex.corpus, config));
    }
    cache_.put(r);
    return {200, serialize_result(*r), "application/json"};
  }

  // index.json: {"examples": [{"id", "title", "file", "split_lines"}]}
  void load_examples(const std::filesystem::path& dir) {
    nlohmann::json index;
    try {
      index = nlohmann::json::parse(read_file(dir / "index.json"));
      for (const auto& e : index.at("examples")) {
        Example ex;
        ex.info.id = e.at("id").get<std::string>();
        ex.info.title = e.value("title", ex.info.id);
        const bool split = e.value("split_lines", true);
        ex.corpus = load_corpus_file(dir / e.at("file").get<std::string>(), split);
        ex.info.n_documents = ex.corpus.size();
        auto result = std::make_shared<const AnalysisResult>(
            framefinder::analyze(ex.corpus, providers_, base_, {.jobs = opts_.analysis_jobs}));
        ex.result = result;
        cache_.put(result);
        if (examples_.contains(ex.info.id)) throw ConfigError("duplicate example id '" + ex.info.id + "'");
        example_list_.push_back(ex.info);
        examples_.emplace(ex.info.id, std::move(ex));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed examples index: " + std::string(e.what()));
    }
  }

  Providers providers_;
  AnalysisConfig base_;
  ServiceOptions opts_;
  ResultCache cache_;
  detail::WorkerGate gate_;
  std::map<std::string, Example> examples_;
  std::vector<ExampleInfo> example_list_;
};

}  // namespace framefinder::service
