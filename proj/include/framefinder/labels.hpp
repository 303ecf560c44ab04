#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "framefinder/corpus.hpp"
#include "framefinder/errors.hpp"
#include "framefinder/numeric.hpp"

namespace framefinder {

struct Label {
  std::string name;
  std::string description;

  friend bool operator==(const Label&, const Label&) = default;
};

/// Ordered, uniquely named frame labels. The description is the hypothesis
/// text handed to zero-shot backends; the engine itself never reads it.
class LabelSet {
 public:
  LabelSet() = default;

  explicit LabelSet(std::vector<Label> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw ConfigError("label set is empty");
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_) {
      if (l.name.empty()) throw ConfigError("label with empty name");
      if (!seen.insert(l.name).second) throw ConfigError("duplicate label '" + l.name + "'");
    }
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const Label& operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<Label>& labels() const noexcept { return labels_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(labels_.size());
    for (const auto& l : labels_) out.push_back(l.name);
    return out;
  }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<Label> labels_;
};

/// The 14 media frames plus the unspecific "other" category.
inline LabelSet default_label_set() {
  return LabelSet({
      {"economic", "costs, benefits, money, finance, jobs, taxes, and economic consequences"},
      {"capacity and resources", "availability or lack of time, staff, funding, space, and other resources"},
      {"morality", "religious, ethical, or moral duty, values, and social responsibility"},
      {"fairness and equality", "equality, inequality, discrimination, rights, and equal treatment of groups"},
      {"legality, constitutionality and jurisprudence", "laws, courts, constitutional rights, lawsuits, and legal authority"},
      {"policy prescription and evaluation", "proposed or existing policies, regulation, and whether they work"},
      {"crime and punishment", "crime, violations, police, arrests, sentencing, and enforcement"},
      {"security and defense", "threats to safety of a nation, community, or individual, and protection from them"},
      {"health and safety", "health care, injury, illness, mental health, disease, and public safety"},
      {"quality of life", "effects on wealth, happiness, mobility, and daily life of people"},
      {"cultural identity", "traditions, customs, language, heritage, and cultural values"},
      {"public opinion", "attitudes of the public, polls, protests, and popular sentiment"},
      {"political", "politicians, parties, elections, lobbying, and partisan maneuvering"},
      {"external regulation and reputation", "international relations, foreign policy, and reputation abroad"},
      {"other", "any frame not covered by the other categories"},
  });
}

inline nlohmann::json label_set_to_json(const LabelSet& set) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& l : set.labels()) arr.push_back({{"name", l.name}, {"description", l.description}});
  return {{"labels", std::move(arr)}};
}

inline LabelSet label_set_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("labels") || !j["labels"].is_array()) {
    throw ConfigError("label config must be an object with a \"labels\" array");
  }
  std::vector<Label> labels;
  for (const auto& e : j["labels"]) {
    if (e.is_string()) {
      labels.push_back({e.get<std::string>(), {}});
      continue;
    }
    if (!e.is_object() || !e.contains("name") || !e["name"].is_string()) {
      throw ConfigError("label entry must have a string \"name\"");
    }
    std::string desc;
    if (e.contains("description")) {
      if (!e["description"].is_string()) throw ConfigError("label description must be a string");
      desc = e["description"].get<std::string>();
    }
    labels.push_back({e["name"].get<std::string>(), std::move(desc)});
  }
  return LabelSet(std::move(labels));
}

inline LabelSet load_label_set(const std::filesystem::path& path) {
  try {
    return label_set_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

struct LabelStat {
  std::string name;
  double mean = 0.0;
  double std_error = 0.0;
  bool assigned = false;
  std::size_t n_documents = 0;

  friend bool operator==(const LabelStat&, const LabelStat&) = default;
};

struct LabelReport {
  double threshold = 0.5;
  std::vector<LabelStat> labels;

  friend bool operator==(const LabelReport&, const LabelReport&) = default;
};

/// Column-wise mean and standard error of the mean over per-document
/// probability vectors. Standard error is the sample standard deviation
/// (N-1 denominator) over sqrt(N), and exactly 0 for a single document. A
/// label is assigned when its mean is strictly greater than `threshold`.
inline LabelReport aggregate_labels(std::span<const std::vector<double>> probs, double threshold,
                                    std::span<const std::string> names = {}) {
  if (probs.empty()) throw EmptyInput("no probability vectors to aggregate");
  const std::size_t width = probs.front().size();
  if (width == 0) throw ShapeMismatch("probability vectors are empty");
  for (std::size_t d = 0; d < probs.size(); ++d) {
    if (probs[d].size() != width) {
      throw ShapeMismatch("vector " + std::to_string(d) + " has length " +
                          std::to_string(probs[d].size()) + ", expected " + std::to_string(width));
    }
  }
  if (!names.empty() && names.size() != width) {
    throw ShapeMismatch("label names do not match vector length");
  }

  const std::size_t n = probs.size();
  LabelReport report;
  report.threshold = threshold;
  report.labels.reserve(width);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < width; ++j) {
    for (std::size_t d = 0; d < n; ++d) column[d] = probs[d][j];
    LabelStat stat;
    stat.name = names.empty() ? "label" + std::to_string(j + 1) : names[j];
    stat.n_documents = n;
    stat.mean = numeric::mean(column);
    if (n > 1) {
      const double variance =
          numeric::squared_deviation_sum(column, stat.mean) / static_cast<double>(n - 1);
      stat.std_error = std::sqrt(variance) / std::sqrt(static_cast<double>(n));
    }
    stat.assigned = stat.mean > threshold;
    report.labels.push_back(std::move(stat));
  }
  return report;
}

struct LabelBar {
  std::string label;
  double value = 0.0;
  double error = 0.0;
  std::string color_class;

  friend bool operator==(const LabelBar&, const LabelBar&) = default;
};

struct LabelChart {
  double threshold = 0.5;
  std::vector<LabelBar> bars;

  friend bool operator==(const LabelChart&, const LabelChart&) = default;
};

inline constexpr const char* kAssignedClass = "assigned";
inline constexpr const char* kUnassignedClass = "unassigned";

/// Bars in descending order of mean (ties by label name), error bar
/// half-width = standard error, colored by assignment.
inline LabelChart label_bar_chart_data(const LabelReport& report) {
  LabelChart chart;
  chart.threshold = report.threshold;
  for (const auto& s : report.labels) {
    chart.bars.push_back({s.name, s.mean, s.std_error, s.assigned ? kAssignedClass : kUnassignedClass});
  }
  std::stable_sort(chart.bars.begin(), chart.bars.end(), [](const LabelBar& a, const LabelBar& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.label < b.label;
  });
  return chart;
}

}  // namespace framefinder
