#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "framefinder/axes.hpp"
#include "framefinder/errors.hpp"
#include "framefinder/labels.hpp"
#include "framefinder/metagraph.hpp"

namespace framefinder {

inline constexpr double kDefaultLabelThreshold = 0.5;
inline constexpr std::uint64_t kDefaultNodeThreshold = 300;
inline constexpr std::uint64_t kZoomedNodeThreshold = 1000;

/// Everything that determines an analysis result. Runtime knobs that do not
/// change the result (thread count, timeouts) live elsewhere.
struct AnalysisConfig {
  LabelSet labels = default_label_set();
  std::vector<AxisSpec> axes = default_axis_specs();
  double label_threshold = kDefaultLabelThreshold;
  std::uint64_t node_threshold = kDefaultNodeThreshold;
  FilterStatistic filter_statistic = FilterStatistic::degree_weighted;
  EdgeWeighting edge_weighting = EdgeWeighting::occurrences;

  void validate() const {
    if (labels.size() == 0) throw ConfigError("label set is empty");
    if (axes.empty()) throw ConfigError("axis set is empty");
    if (!(label_threshold > 0.0 && label_threshold < 1.0)) {
      throw ConfigError("label threshold must lie in (0, 1)");
    }
  }
};

inline nlohmann::json config_to_json(const AnalysisConfig& c) {
  return {{"labels", label_set_to_json(c.labels)["labels"]},
          {"axes", axis_specs_to_json(c.axes)["axes"]},
          {"label_threshold", c.label_threshold},
          {"node_threshold", c.node_threshold},
          {"filter_statistic", to_string(c.filter_statistic)},
          {"edge_weighting", to_string(c.edge_weighting)}};
}

inline AnalysisConfig config_from_json(const nlohmann::json& j) {
  try {
    AnalysisConfig c;
    if (j.contains("labels")) c.labels = label_set_from_json({{"labels", j.at("labels")}});
    if (j.contains("axes")) c.axes = axis_specs_from_json({{"axes", j.at("axes")}});
    c.label_threshold = j.value("label_threshold", kDefaultLabelThreshold);
    c.node_threshold = j.value("node_threshold", kDefaultNodeThreshold);
    if (j.contains("filter_statistic")) {
      c.filter_statistic = filter_statistic_from_string(j.at("filter_statistic").get<std::string>());
    }
    if (j.contains("edge_weighting")) {
      c.edge_weighting = edge_weighting_from_string(j.at("edge_weighting").get<std::string>());
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
}

}  // namespace framefinder
