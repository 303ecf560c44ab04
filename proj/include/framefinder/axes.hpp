#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "framefinder/corpus.hpp"
#include "framefinder/errors.hpp"
#include "framefinder/numeric.hpp"

namespace framefinder {

using Vector = std::vector<double>;

/// Configuration of one antagonistic dimension. Each pole is either a single
/// description text (default) or a keyword list whose embeddings are averaged.
struct AxisSpec {
  std::string name;
  std::string vice;
  std::string virtue;
  std::vector<std::string> vice_keywords;
  std::vector<std::string> virtue_keywords;

  bool keyword_averaged() const noexcept {
    return !vice_keywords.empty() || !virtue_keywords.empty();
  }

  friend bool operator==(const AxisSpec&, const AxisSpec&) = default;
};

/// Moral-foundation dimensions, vice pole first.
inline std::vector<AxisSpec> default_axis_specs() {
  return {
      {"harm/care",
       "harm: hurting, wounding, killing, violence, cruelty, and suffering inflicted on others",
       "care: caring for, protecting, nurturing, and showing compassion toward others",
       {},
       {}},
      {"cheating/fairness",
       "cheating: fraud, dishonesty, injustice, exploitation, and treating people unequally",
       "fairness: justice, honesty, reciprocity, equal rights, and treating people fairly",
       {},
       {}},
      {"betrayal/loyalty",
       "betrayal: treason, disloyalty, deserting or turning against one's group",
       "loyalty: solidarity, patriotism, allegiance, and standing with one's group",
       {},
       {}},
      {"subversion/authority",
       "subversion: rebellion, disobedience, defiance, and disrespect for legitimate authority",
       "authority: respect for order, tradition, leadership, law, and legitimate hierarchy",
       {},
       {}},
      {"degradation/sanctity",
       "degradation: contamination, impurity, depravity, and defiling what is sacred",
       "sanctity: purity, holiness, decency, and keeping the sacred untainted",
       {},
       {}},
  };
}

inline nlohmann::json axis_specs_to_json(const std::vector<AxisSpec>& specs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : specs) {
    nlohmann::json e = {{"name", s.name}, {"vice", s.vice}, {"virtue", s.virtue}};
    if (!s.vice_keywords.empty()) e["vice_keywords"] = s.vice_keywords;
    if (!s.virtue_keywords.empty()) e["virtue_keywords"] = s.virtue_keywords;
    arr.push_back(std::move(e));
  }
  return {{"axes", std::move(arr)}};
}

inline std::vector<AxisSpec> axis_specs_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("axes") || !j["axes"].is_array()) {
    throw ConfigError("axis config must be an object with an \"axes\" array");
  }
  auto keywords = [](const nlohmann::json& e, const char* key) {
    std::vector<std::string> out;
    if (!e.contains(key)) return out;
    if (!e[key].is_array()) throw ConfigError(std::string(key) + " must be an array of strings");
    for (const auto& k : e[key]) {
      if (!k.is_string()) throw ConfigError(std::string(key) + " must be an array of strings");
      out.push_back(k.get<std::string>());
    }
    return out;
  };
  std::vector<AxisSpec> specs;
  std::unordered_set<std::string> seen;
  for (const auto& e : j["axes"]) {
    if (!e.is_object() || !e.contains("name") || !e["name"].is_string()) {
      throw ConfigError("axis entry must have a string \"name\"");
    }
    AxisSpec s;
    s.name = e["name"].get<std::string>();
    if (s.name.empty()) throw ConfigError("axis with empty name");
    if (!seen.insert(s.name).second) throw ConfigError("duplicate axis '" + s.name + "'");
    if (e.contains("vice")) s.vice = e["vice"].get<std::string>();
    if (e.contains("virtue")) s.virtue = e["virtue"].get<std::string>();
    s.vice_keywords = keywords(e, "vice_keywords");
    s.virtue_keywords = keywords(e, "virtue_keywords");
    if ((s.vice.empty() && s.vice_keywords.empty()) ||
        (s.virtue.empty() && s.virtue_keywords.empty())) {
      throw ConfigError("axis '" + s.name + "' needs text or keywords for both poles");
    }
    specs.push_back(std::move(s));
  }
  if (specs.empty()) throw ConfigError("axis set is empty");
  return specs;
}

inline std::vector<AxisSpec> load_axis_specs(const std::filesystem::path& path) {
  try {
    return axis_specs_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

/// Direction virtue - vice in embedding space. Positive scores lean toward
/// the virtue pole.
struct FrameAxis {
  std::string name;
  std::string vice_pole_text;
  std::string virtue_pole_text;
  Vector axis_vector;
};

inline FrameAxis build_axis(std::span<const double> vice_embedding,
                            std::span<const double> virtue_embedding, std::string name,
                            std::string vice_text = {}, std::string virtue_text = {}) {
  if (vice_embedding.size() != virtue_embedding.size()) {
    throw ShapeMismatch("pole embeddings of axis '" + name + "' differ in dimension");
  }
  if (vice_embedding.empty()) throw DegenerateAxis("axis '" + name + "' has no dimensions");
  Vector axis(vice_embedding.size());
  for (std::size_t i = 0; i < axis.size(); ++i) axis[i] = virtue_embedding[i] - vice_embedding[i];
  const double n = numeric::norm(axis);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DegenerateAxis("axis '" + name + "' has a zero-norm pole difference");
  }
  return {std::move(name), std::move(vice_text), std::move(virtue_text), std::move(axis)};
}

/// Component-wise mean of several pole embeddings (keyword-averaged poles).
inline Vector average_embeddings(std::span<const Vector> embeddings) {
  if (embeddings.empty()) throw EmptyInput("no embeddings to average");
  const std::size_t dim = embeddings.front().size();
  Vector out(dim, 0.0);
  std::vector<double> column(embeddings.size());
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < embeddings.size(); ++k) {
      if (embeddings[k].size() != dim) throw ShapeMismatch("keyword embeddings differ in dimension");
      column[k] = embeddings[k][i];
    }
    out[i] = numeric::mean(column);
  }
  return out;
}

/// Cosine similarity between the axis direction and a document embedding.
inline double score_document(const FrameAxis& axis, std::span<const double> doc_embedding) {
  if (doc_embedding.size() != axis.axis_vector.size()) {
    throw ShapeMismatch("document embedding dimension " + std::to_string(doc_embedding.size()) +
                        " does not match axis dimension " +
                        std::to_string(axis.axis_vector.size()));
  }
  const double doc_norm = numeric::norm(doc_embedding);
  if (!(doc_norm > 0.0)) throw ZeroEmbedding("document embedding has zero norm");
  const double cosine =
      numeric::dot(axis.axis_vector, doc_embedding) / (numeric::norm(axis.axis_vector) * doc_norm);
  return std::clamp(cosine, -1.0, 1.0);
}

struct AxisAggregate {
  double bias = 0.0;
  double intensity = 0.0;
};

/// bias = mean of scores, intensity = population variance of scores.
inline AxisAggregate aggregate_axis(std::span<const double> scores) {
  if (scores.empty()) throw EmptyInput("no scores to aggregate");
  AxisAggregate out;
  out.bias = numeric::mean(scores);
  out.intensity =
      numeric::squared_deviation_sum(scores, out.bias) / static_cast<double>(scores.size());
  return out;
}

struct DocumentScore {
  std::string id;
  double score = 0.0;

  friend bool operator==(const DocumentScore&, const DocumentScore&) = default;
};

struct AxisStat {
  std::string name;
  std::string vice;
  std::string virtue;
  double bias = 0.0;
  double intensity = 0.0;
  std::vector<DocumentScore> scores;  // corpus order

  friend bool operator==(const AxisStat&, const AxisStat&) = default;
};

struct AxisReport {
  std::vector<AxisStat> axes;

  friend bool operator==(const AxisReport&, const AxisReport&) = default;
};

/// Splits an axis name of the form "vice/virtue" into its pole labels.
inline std::pair<std::string, std::string> pole_labels(const std::string& axis_name) {
  const auto slash = axis_name.find('/');
  if (slash == std::string::npos) return {axis_name + " (-)", axis_name + " (+)"};
  return {axis_name.substr(0, slash), axis_name.substr(slash + 1)};
}

inline AxisStat score_axis(const FrameAxis& axis, std::span<const Document> docs,
                           std::span<const Vector> embeddings) {
  if (docs.size() != embeddings.size()) throw ShapeMismatch("documents and embeddings misaligned");
  AxisStat stat;
  stat.name = axis.name;
  std::tie(stat.vice, stat.virtue) = pole_labels(axis.name);
  std::vector<double> values;
  values.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const double s = score_document(axis, embeddings[d]);
    values.push_back(s);
    stat.scores.push_back({docs[d].id, s});
  }
  const auto agg = aggregate_axis(values);
  stat.bias = agg.bias;
  stat.intensity = agg.intensity;
  return stat;
}

struct AxisMarker {
  std::string axis;
  std::string left_label;   // vice pole
  std::string right_label;  // virtue pole
  double x_min = -1.0;
  double x_max = 1.0;
  double x = 0.0;
  double intensity = 0.0;
  double marker_size = 0.0;

  friend bool operator==(const AxisMarker&, const AxisMarker&) = default;
};

inline constexpr double kMinMarkerSize = 4.0;
inline constexpr double kMaxMarkerSize = 24.0;

/// Marker size grows with sqrt(intensity); intensity 0 maps to the minimum.
inline double marker_size(double intensity) {
  const double t = std::sqrt(std::clamp(intensity, 0.0, 1.0));
  return kMinMarkerSize + (kMaxMarkerSize - kMinMarkerSize) * t;
}

/// One horizontal line per axis over [-1, 1] with the marker at the bias.
/// Axes keep their configured order.
inline std::vector<AxisMarker> axis_plot_data(const AxisReport& report) {
  std::vector<AxisMarker> out;
  out.reserve(report.axes.size());
  for (const auto& a : report.axes) {
    out.push_back({a.name, a.vice, a.virtue, -1.0, 1.0, a.bias, a.intensity,
                   marker_size(a.intensity)});
  }
  return out;
}

}  // namespace framefinder
