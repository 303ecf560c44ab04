#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <future>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "framefinder/amr.hpp"
#include "framefinder/axes.hpp"
#include "framefinder/config.hpp"
#include "framefinder/corpus.hpp"
#include "framefinder/errors.hpp"
#include "framefinder/labels.hpp"
#include "framefinder/metagraph.hpp"
#include "framefinder/parallel.hpp"
#include "framefinder/providers.hpp"

namespace framefinder {

inline constexpr int kResultSchemaVersion = 1;

struct CorpusMeta {
  std::string source_name;
  std::size_t n_documents = 0;
  SplitMode split_mode = SplitMode::lines;

  friend bool operator==(const CorpusMeta&, const CorpusMeta&) = default;
};

struct PerspectiveError {
  std::string kind;
  std::string message;

  friend bool operator==(const PerspectiveError&, const PerspectiveError&) = default;
};

struct LabelPerspective {
  LabelReport report;
  LabelChart chart;

  friend bool operator==(const LabelPerspective&, const LabelPerspective&) = default;
};

struct AxisPerspective {
  AxisReport report;  // per-axis scores ordered by document id
  std::vector<AxisMarker> plot;

  friend bool operator==(const AxisPerspective&, const AxisPerspective&) = default;
};

struct StructureStats {
  std::uint64_t n_source_graphs = 0;
  std::uint64_t n_cyclic_sources = 0;
  std::uint64_t n_nodes = 0;
  std::uint64_t n_edges = 0;
  std::uint64_t total_node_weight = 0;
  std::uint64_t max_node_weight = 0;

  friend bool operator==(const StructureStats&, const StructureStats&) = default;
};

struct StructurePerspective {
  std::uint64_t node_threshold = kDefaultNodeThreshold;
  FilterStatistic filter_statistic = FilterStatistic::degree_weighted;
  StructureStats full;
  MetaGraph graph;  // filtered, largest weakly connected component

  friend bool operator==(const StructurePerspective&, const StructurePerspective&) = default;
};

template <typename T>
using Perspective = std::variant<T, PerspectiveError>;

template <typename T>
bool succeeded(const Perspective<T>& p) {
  return std::holds_alternative<T>(p);
}

struct AnalysisResult {
  int version = kResultSchemaVersion;
  std::string result_id;
  CorpusMeta corpus;
  Perspective<LabelPerspective> labels = PerspectiveError{"NotRun", ""};
  Perspective<AxisPerspective> axes = PerspectiveError{"NotRun", ""};
  Perspective<StructurePerspective> structure = PerspectiveError{"NotRun", ""};
  AnalysisConfig config;
  std::map<std::string, double> timings_ms;

  // Unfiltered superimposition, kept in memory for refiltering. Not serialized.
  std::shared_ptr<const MetaGraph> metagraph;
};

inline StructureStats structure_stats(const MetaGraph& meta) {
  StructureStats s;
  s.n_source_graphs = meta.n_source_graphs;
  s.n_cyclic_sources = meta.n_cyclic_sources;
  s.n_nodes = meta.nodes.size();
  s.n_edges = meta.edges.size();
  for (const auto& [k, n] : meta.nodes) {
    s.total_node_weight += n.weight;
    s.max_node_weight = std::max(s.max_node_weight, n.weight);
  }
  return s;
}

/// The structure view at a given threshold: filter first, then keep the
/// largest weakly connected component.
inline StructurePerspective make_structure_perspective(const MetaGraph& full,
                                                       std::uint64_t node_threshold,
                                                       FilterStatistic stat) {
  StructurePerspective p;
  p.node_threshold = node_threshold;
  p.filter_statistic = stat;
  p.full = structure_stats(full);
  p.graph = structure_view(full, node_threshold, stat);
  return p;
}

struct AnalyzeOptions {
  std::size_t jobs = 1;
};

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  // field separator
  h ^= 0xFF;
  h *= 1099511628211ULL;
  return h;
}

template <typename Fn>
double time_ms(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

template <typename T, typename Fn>
Perspective<T> guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return PerspectiveError{std::string(e.name()), e.what()};
  } catch (const std::exception& e) {
    return PerspectiveError{"InternalError", e.what()};
  }
}

inline Perspective<LabelPerspective> run_labels(const Corpus& corpus, const Providers& providers,
                                                const AnalysisConfig& config) {
  return guarded<LabelPerspective>([&] {
    if (!providers.labels) throw ConfigError("no label provider configured");
    const auto probs = providers.labels->label_probabilities(corpus.documents, config.labels);
    validate_probabilities(probs, corpus.size(), config.labels.size());
    const auto names = config.labels.names();
    LabelPerspective p;
    p.report = aggregate_labels(probs, config.label_threshold, names);
    p.chart = label_bar_chart_data(p.report);
    return p;
  });
}

inline std::vector<FrameAxis> build_axes(const std::vector<AxisSpec>& specs,
                                         const EmbeddingProvider& provider) {
  const auto poles = pole_documents(specs);
  const auto pole_vectors = provider.embed(poles);
  validate_embeddings(pole_vectors, poles.size());
  std::map<std::string, const Vector*> by_id;
  for (std::size_t i = 0; i < poles.size(); ++i) by_id[poles[i].id] = &pole_vectors[i];

  auto pole = [&](const AxisSpec& s, bool virtue) {
    const auto& keywords = virtue ? s.virtue_keywords : s.vice_keywords;
    if (keywords.empty()) return *by_id.at(pole_document_id(s.name, virtue));
    std::vector<Vector> parts;
    for (std::size_t k = 0; k < keywords.size(); ++k) {
      parts.push_back(*by_id.at(pole_document_id(s.name, virtue, k)));
    }
    return average_embeddings(parts);
  };

  std::vector<FrameAxis> axes;
  for (const auto& s : specs) {
    axes.push_back(build_axis(pole(s, false), pole(s, true), s.name, s.vice, s.virtue));
  }
  return axes;
}

inline Perspective<AxisPerspective> run_axes(const Corpus& corpus, const Providers& providers,
                                             const AnalysisConfig& config, std::size_t jobs) {
  return guarded<AxisPerspective>([&] {
    if (!providers.embeddings) throw ConfigError("no embedding provider configured");
    const auto axes = build_axes(config.axes, *providers.embeddings);
    const auto embeddings = providers.embeddings->embed(corpus.documents);
    validate_embeddings(embeddings, corpus.size());

    AxisPerspective p;
    p.report.axes.resize(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) {
      std::vector<double> scores(corpus.size());
      parallel_for(corpus.size(), jobs, [&](std::size_t d) {
        scores[d] = score_document(axes[a], embeddings[d]);
      });
      AxisStat& stat = p.report.axes[a];
      stat.name = axes[a].name;
      std::tie(stat.vice, stat.virtue) = pole_labels(axes[a].name);
      const auto agg = aggregate_axis(scores);
      stat.bias = agg.bias;
      stat.intensity = agg.intensity;
      for (std::size_t d = 0; d < corpus.size(); ++d) {
        stat.scores.push_back({corpus.documents[d].id, scores[d]});
      }
      std::sort(stat.scores.begin(), stat.scores.end(),
                [](const DocumentScore& x, const DocumentScore& y) { return x.id < y.id; });
    }
    p.plot = axis_plot_data(p.report);
    return p;
  });
}

inline MetaGraph parallel_superimpose(std::span<const amr::AmrGraph> graphs, EdgeWeighting w,
                                      std::size_t jobs) {
  if (graphs.empty()) throw EmptyInput("no graphs to superimpose");
  const std::size_t parts = std::max<std::size_t>(1, std::min(jobs, graphs.size()));
  std::vector<MetaGraph> partial(parts);
  parallel_for(parts, jobs, [&](std::size_t p) {
    const std::size_t begin = graphs.size() * p / parts;
    const std::size_t end = graphs.size() * (p + 1) / parts;
    for (std::size_t i = begin; i < end; ++i) accumulate(partial[p], graphs[i], w);
  });
  MetaGraph total = std::move(partial.front());
  for (std::size_t p = 1; p < parts; ++p) total = merge(std::move(total), partial[p]);
  return total;
}

inline Perspective<StructurePerspective> run_structure(const Corpus& corpus,
                                                       const Providers& providers,
                                                       const AnalysisConfig& config,
                                                       std::size_t jobs,
                                                       std::shared_ptr<const MetaGraph>& full_out) {
  return guarded<StructurePerspective>([&] {
    if (!providers.amr) throw ConfigError("no AMR provider configured");
    const auto parses = providers.amr->parse(corpus.documents);
    if (parses.size() != corpus.size()) {
      throw ProtocolError("expected " + std::to_string(corpus.size()) + " parses, got " +
                          std::to_string(parses.size()));
    }
    std::vector<amr::AmrGraph> graphs(corpus.size());
    parallel_for(corpus.size(), jobs, [&](std::size_t d) {
      graphs[d] = amr::parse_penman(parses[d], corpus.documents[d].id);
    });
    auto full = std::make_shared<const MetaGraph>(
        parallel_superimpose(graphs, config.edge_weighting, jobs));
    full_out = full;
    return make_structure_perspective(*full, config.node_threshold, config.filter_statistic);
  });
}

}  // namespace detail

/// Deterministic identifier of (documents, configuration). Independent of
/// document order.
inline std::string content_id(const Corpus& corpus, const AnalysisConfig& config) {
  std::vector<const Document*> docs;
  for (const auto& d : corpus.documents) docs.push_back(&d);
  std::sort(docs.begin(), docs.end(), [](const Document* a, const Document* b) { return a->id < b->id; });
  std::uint64_t h = 14695981039346656037ULL;
  h = detail::fnv1a(h, corpus.source_name);
  for (const Document* d : docs) {
    h = detail::fnv1a(h, d->id);
    h = detail::fnv1a(h, d->text);
  }
  h = detail::fnv1a(h, config_to_json(config).dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Runs the three perspectives. A perspective whose provider or input fails
/// is recorded as an error entry; nothing is thrown for provider failures.
inline AnalysisResult run_perspectives(const Corpus& corpus, const Providers& providers,
                                       const AnalysisConfig& config, AnalyzeOptions opts = {}) {
  config.validate();
  if (corpus.empty()) throw EmptyCorpus("corpus has no documents");

  AnalysisResult result;
  result.result_id = content_id(corpus, config);
  result.corpus = {corpus.source_name, corpus.size(), corpus.split_mode};
  result.config = config;

  const std::size_t jobs = std::max<std::size_t>(opts.jobs, 1);
  double labels_ms = 0, axes_ms = 0, structure_ms = 0;
  std::shared_ptr<const MetaGraph> full;
  auto run_l = [&] { labels_ms = detail::time_ms([&] { result.labels = detail::run_labels(corpus, providers, config); }); };
  auto run_a = [&] { axes_ms = detail::time_ms([&] { result.axes = detail::run_axes(corpus, providers, config, jobs); }); };
  auto run_s = [&] {
    structure_ms = detail::time_ms(
        [&] { result.structure = detail::run_structure(corpus, providers, config, jobs, full); });
  };

  const double total_ms = detail::time_ms([&] {
    if (jobs > 1) {
      auto fl = std::async(std::launch::async, run_l);
      auto fa = std::async(std::launch::async, run_a);
      run_s();
      fl.get();
      fa.get();
    } else {
      run_l();
      run_a();
      run_s();
    }
  });
  result.metagraph = std::move(full);
  result.timings_ms = {{"labels", labels_ms}, {"axes", axes_ms}, {"structure", structure_ms},
                       {"total", total_ms}};
  return result;
}

inline bool all_failed(const AnalysisResult& r) {
  return !succeeded(r.labels) && !succeeded(r.axes) && !succeeded(r.structure);
}

/// As run_perspectives, but throws AllPerspectivesFailed when no
/// perspective succeeded.
inline AnalysisResult analyze(const Corpus& corpus, const Providers& providers,
                              const AnalysisConfig& config, AnalyzeOptions opts = {}) {
  auto result = run_perspectives(corpus, providers, config, opts);
  if (all_failed(result)) {
    std::string msg = "all perspectives failed:";
    for (const auto* e : {&std::get<PerspectiveError>(result.labels),
                          &std::get<PerspectiveError>(result.axes),
                          &std::get<PerspectiveError>(result.structure)}) {
      msg += " [" + e->kind + ": " + e->message + "]";
    }
    throw AllPerspectivesFailed(msg);
  }
  return result;
}

/// The result `config` would produce, derived from `base` without calling
/// any provider. Only the label threshold and the structure filter may
/// differ from base.config; assignments are re-thresholded from the stored
/// means and the structure view is refiltered from the kept metagraph.
inline AnalysisResult rederive(const AnalysisResult& base, const Corpus& corpus,
                               const AnalysisConfig& config) {
  config.validate();
  if (!(config.labels == base.config.labels) || !(config.axes == base.config.axes) ||
      config.edge_weighting != base.config.edge_weighting) {
    throw ConfigError("only thresholds and the filter statistic can change without re-analysis");
  }
  AnalysisResult r = base;
  r.config = config;
  r.result_id = content_id(corpus, config);
  r.timings_ms.clear();
  if (auto* lp = std::get_if<LabelPerspective>(&r.labels)) {
    lp->report.threshold = config.label_threshold;
    for (auto& s : lp->report.labels) s.assigned = s.mean > config.label_threshold;
    lp->chart = label_bar_chart_data(lp->report);
  }
  if (succeeded(r.structure)) {
    if (!r.metagraph) throw ConfigError("result does not carry its metagraph");
    r.structure = make_structure_perspective(*r.metagraph, config.node_threshold, config.filter_statistic);
  }
  return r;
}

// -- serialization ----------------------------------------------------------

inline nlohmann::json to_json(const StructureStats& s) {
  return {{"n_source_graphs", s.n_source_graphs}, {"n_cyclic_sources", s.n_cyclic_sources},
          {"n_nodes", s.n_nodes},                 {"n_edges", s.n_edges},
          {"total_node_weight", s.total_node_weight}, {"max_node_weight", s.max_node_weight}};
}

inline nlohmann::json to_json(const StructurePerspective& p) {
  return {{"status", "ok"},
          {"node_threshold", p.node_threshold},
          {"filter_statistic", to_string(p.filter_statistic)},
          {"full", to_json(p.full)},
          {"graph", to_graph_json(p.graph)}};
}

inline nlohmann::json to_json(const LabelPerspective& p) {
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& s : p.report.labels) {
    labels.push_back({{"name", s.name},
                      {"mean", s.mean},
                      {"stderr", s.std_error},
                      {"assigned", s.assigned},
                      {"n_documents", s.n_documents}});
  }
  nlohmann::json bars = nlohmann::json::array();
  for (const auto& b : p.chart.bars) {
    bars.push_back({{"label", b.label}, {"value", b.value}, {"error", b.error}, {"color_class", b.color_class}});
  }
  return {{"status", "ok"},
          {"threshold", p.report.threshold},
          {"labels", std::move(labels)},
          {"chart", {{"threshold", p.chart.threshold}, {"bars", std::move(bars)}}}};
}

inline nlohmann::json to_json(const AxisPerspective& p) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : p.report.axes) {
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& s : a.scores) scores.push_back({{"id", s.id}, {"score", s.score}});
    axes.push_back({{"name", a.name},
                    {"vice", a.vice},
                    {"virtue", a.virtue},
                    {"bias", a.bias},
                    {"intensity", a.intensity},
                    {"scores", std::move(scores)}});
  }
  nlohmann::json plot = nlohmann::json::array();
  for (const auto& m : p.plot) {
    plot.push_back({{"axis", m.axis},
                    {"left_label", m.left_label},
                    {"right_label", m.right_label},
                    {"x_min", m.x_min},
                    {"x_max", m.x_max},
                    {"x", m.x},
                    {"intensity", m.intensity},
                    {"marker_size", m.marker_size}});
  }
  return {{"status", "ok"}, {"axes", std::move(axes)}, {"plot", std::move(plot)}};
}

inline nlohmann::json to_json(const PerspectiveError& e) {
  return {{"status", "error"}, {"error", {{"kind", e.kind}, {"message", e.message}}}};
}

template <typename T>
nlohmann::json perspective_json(const Perspective<T>& p) {
  return std::visit([](const auto& v) { return to_json(v); }, p);
}

struct SerializeOptions {
  bool include_timings = true;
};

inline nlohmann::json result_to_json(const AnalysisResult& r, SerializeOptions opts = {}) {
  nlohmann::json j = {
      {"version", r.version},
      {"result_id", r.result_id},
      {"corpus",
       {{"source_name", r.corpus.source_name},
        {"n_documents", r.corpus.n_documents},
        {"split_mode", to_string(r.corpus.split_mode)}}},
      {"labels", perspective_json(r.labels)},
      {"axes", perspective_json(r.axes)},
      {"structure", perspective_json(r.structure)},
      {"config", config_to_json(r.config)},
  };
  if (opts.include_timings) j["timings_ms"] = r.timings_ms;
  return j;
}

/// Key-sorted, indented JSON with a trailing newline. Byte-identical for
/// equal results.
inline std::string serialize_result(const AnalysisResult& r, SerializeOptions opts = {}) {
  return result_to_json(r, opts).dump(2) + "\n";
}

namespace detail {

inline std::optional<PerspectiveError> error_entry(const nlohmann::json& j) {
  if (j.at("status").get<std::string>() == "ok") return std::nullopt;
  return PerspectiveError{j.at("error").at("kind").get<std::string>(),
                          j.at("error").at("message").get<std::string>()};
}

inline StructureStats stats_from_json(const nlohmann::json& j) {
  StructureStats s;
  s.n_source_graphs = j.at("n_source_graphs").get<std::uint64_t>();
  s.n_cyclic_sources = j.at("n_cyclic_sources").get<std::uint64_t>();
  s.n_nodes = j.at("n_nodes").get<std::uint64_t>();
  s.n_edges = j.at("n_edges").get<std::uint64_t>();
  s.total_node_weight = j.at("total_node_weight").get<std::uint64_t>();
  s.max_node_weight = j.at("max_node_weight").get<std::uint64_t>();
  return s;
}

}  // namespace detail

inline StructurePerspective structure_from_json(const nlohmann::json& j) {
  StructurePerspective p;
  p.node_threshold = j.at("node_threshold").get<std::uint64_t>();
  p.filter_statistic = filter_statistic_from_string(j.at("filter_statistic").get<std::string>());
  p.full = detail::stats_from_json(j.at("full"));
  p.graph = from_graph_json(j.at("graph"));
  return p;
}

inline AnalysisResult result_from_json(const nlohmann::json& j) {
  try {
    AnalysisResult r;
    r.version = j.at("version").get<int>();
    if (r.version != kResultSchemaVersion) throw ProtocolError("unsupported result version");
    r.result_id = j.at("result_id").get<std::string>();
    const auto& c = j.at("corpus");
    r.corpus = {c.at("source_name").get<std::string>(), c.at("n_documents").get<std::size_t>(),
                split_mode_from_string(c.at("split_mode").get<std::string>())};

    const auto& lj = j.at("labels");
    if (auto err = detail::error_entry(lj)) {
      r.labels = *err;
    } else {
      LabelPerspective p;
      p.report.threshold = lj.at("threshold").get<double>();
      for (const auto& s : lj.at("labels")) {
        p.report.labels.push_back({s.at("name").get<std::string>(), s.at("mean").get<double>(),
                                   s.at("stderr").get<double>(), s.at("assigned").get<bool>(),
                                   s.at("n_documents").get<std::size_t>()});
      }
      p.chart.threshold = lj.at("chart").at("threshold").get<double>();
      for (const auto& b : lj.at("chart").at("bars")) {
        p.chart.bars.push_back({b.at("label").get<std::string>(), b.at("value").get<double>(),
                                b.at("error").get<double>(), b.at("color_class").get<std::string>()});
      }
      r.labels = std::move(p);
    }

    const auto& aj = j.at("axes");
    if (auto err = detail::error_entry(aj)) {
      r.axes = *err;
    } else {
      AxisPerspective p;
      for (const auto& a : aj.at("axes")) {
        AxisStat s;
        s.name = a.at("name").get<std::string>();
        s.vice = a.at("vice").get<std::string>();
        s.virtue = a.at("virtue").get<std::string>();
        s.bias = a.at("bias").get<double>();
        s.intensity = a.at("intensity").get<double>();
        for (const auto& d : a.at("scores")) {
          s.scores.push_back({d.at("id").get<std::string>(), d.at("score").get<double>()});
        }
        p.report.axes.push_back(std::move(s));
      }
      for (const auto& m : aj.at("plot")) {
        p.plot.push_back({m.at("axis").get<std::string>(), m.at("left_label").get<std::string>(),
                          m.at("right_label").get<std::string>(), m.at("x_min").get<double>(),
                          m.at("x_max").get<double>(), m.at("x").get<double>(),
                          m.at("intensity").get<double>(), m.at("marker_size").get<double>()});
      }
      r.axes = std::move(p);
    }

    const auto& sj = j.at("structure");
    if (auto err = detail::error_entry(sj)) {
      r.structure = *err;
    } else {
      r.structure = structure_from_json(sj);
    }

    r.config = config_from_json(j.at("config"));
    if (j.contains("timings_ms")) r.timings_ms = j.at("timings_ms").get<std::map<std::string, double>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed result document: ") + e.what());
  }
}

inline AnalysisResult parse_result(std::string_view text) {
  try {
    return result_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("result is not JSON: ") + e.what());
  }
}

}  // namespace framefinder
