#pragma once

// Deterministic synthetic corpora with matching provider fixtures. Used by
// the test suites, the acceptance run and the `framefinder-synth` tool.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "framefinder/axes.hpp"
#include "framefinder/corpus.hpp"
#include "framefinder/labels.hpp"
#include "framefinder/providers.hpp"

namespace framefinder::synth {

struct Options {
  std::size_t n_documents = 100;
  std::uint64_t seed = 1;
  std::size_t dimension = 24;
  std::string source_name = "corpus.txt";  // also the corpus file name
  std::vector<AxisSpec> axes = default_axis_specs();
  std::size_t label_count = 15;
};

struct ParseRecord {
  std::string id;
  std::string text;
  std::string penman;
};

struct Data {
  Corpus corpus;
  std::vector<std::pair<std::string, Vector>> embeddings;  // documents, then poles
  std::vector<std::pair<std::string, Vector>> label_probs;
  std::vector<ParseRecord> parses;
};

namespace detail {

struct Template {
  const char* text;    // {N}, {CITY}, {STATE} are substituted
  const char* penman;  // same placeholders
  std::size_t frame;   // label index that dominates
};

inline const std::vector<Template>& templates() {
  static const std::vector<Template> t = {
      {"Gunman shoots {N} people in {CITY}",
       "(s / shoot-02 :ARG0 (p / person :ARG0-of (a / attack-01)) :ARG1 (p2 / person :quant {N}) "
       ":location (c / city :name (n / name :op1 \"{CITY}\")))",
       6},
      {"Police say young man was shot in {CITY}",
       "(s / say-01 :ARG0 (p / police) :ARG1 (s2 / shoot-02 :ARG1 (m / man :mod (y / young)) "
       ":location (c / city :name (n / name :op1 \"{CITY}\"))))",
       6},
      {"{STATE} lawmakers pass gun control bill",
       "(p / pass-01 :ARG0 (l / lawmaker :mod (s / state :name (n / name :op1 \"{STATE}\"))) "
       ":ARG1 (b / bill :topic (c / control-01 :ARG1 (g / gun))))",
       5},
      {"{CITY} community holds vigil for victims",
       "(h / hold-04 :ARG0 (c / community) :ARG1 (v / vigil :purpose (m / mourn-01 :ARG1 (v2 / victim))) "
       ":location (c2 / city :name (n / name :op1 \"{CITY}\")))",
       9},
      {"Senator calls for assault weapons ban",
       "(c / call-03 :ARG0 (p / person :ARG0-of (h / have-org-role-91 :ARG2 (s / senator))) "
       ":ARG1 (b / ban-01 :ARG1 (w / weapon :mod (a / assault-01))))",
       12},
      {"Debate over right to bear arms after {CITY} shooting",
       "(d / debate-01 :ARG1 (r / right-05 :ARG1 (b / bear-01 :ARG1 (a / arm))) "
       ":time (a2 / after :op1 (s / shoot-02 :location (c / city :name (n / name :op1 \"{CITY}\")))))",
       4},
      {"{N} killed in school shooting",
       "(k / kill-01 :ARG1 (p / person :quant {N}) :instrument (g / gun) :location (s / school))",
       8},
      {"Police arrest man with stolen gun",
       "(a / arrest-01 :ARG0 (p / police) :ARG1 (m / man :ARG0-of (p2 / possess-01 "
       ":ARG1 (g / gun :ARG1-of (s / steal-01)))))",
       6},
      {"Gun sales surge in {STATE}",
       "(s / surge-01 :ARG1 (s2 / sell-01 :ARG1 (g / gun)) :location (s3 / state :name (n / name :op1 \"{STATE}\")))",
       0},
      {"Shooter did not act alone, police say",
       "(s / say-01 :ARG0 (p / police) :ARG1 (a / act-01 :polarity - :ARG0 (p2 / person :ARG0-of (s2 / shoot-02)) "
       ":manner (a2 / alone)))",
       6},
  };
  return t;
}

inline const std::vector<std::string>& cities() {
  static const std::vector<std::string> c = {"Denver", "Orlando", "Dayton", "El Paso", "Parkland",
                                             "Las Vegas", "Boulder", "Uvalde"};
  return c;
}

inline const std::vector<std::string>& states() {
  static const std::vector<std::string> s = {"Texas", "Florida", "Ohio", "Colorado", "Nevada"};
  return s;
}

inline void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

// Uniform double in [0, 1) with the same bits on every platform.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit(rng);
  const double u2 = unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline Vector random_direction(std::mt19937_64& rng, std::size_t d) {
  Vector v(d);
  for (auto& x : v) x = gaussian(rng);
  return v;
}

}  // namespace detail

inline Data generate(const Options& opts) {
  std::mt19937_64 rng(opts.seed);
  const auto& tpl = detail::templates();
  std::vector<Vector> centroids;
  for (std::size_t t = 0; t < tpl.size(); ++t) centroids.push_back(detail::random_direction(rng, opts.dimension));

  Data data;
  data.corpus.source_name = opts.source_name;
  data.corpus.split_mode = SplitMode::lines;
  for (std::size_t i = 0; i < opts.n_documents; ++i) {
    const std::size_t t = rng() % tpl.size();
    const std::string n = std::to_string(2 + rng() % 9);
    const std::string& city = detail::cities()[rng() % detail::cities().size()];
    const std::string& state = detail::states()[rng() % detail::states().size()];
    std::string text = tpl[t].text, penman = tpl[t].penman;
    for (auto* s : {&text, &penman}) {
      detail::replace_all(*s, "{N}", n);
      detail::replace_all(*s, "{CITY}", city);
      detail::replace_all(*s, "{STATE}", state);
    }
    const std::string id = document_id(opts.source_name, i);
    data.corpus.documents.push_back({id, text, i});

    Vector e = centroids[t];
    for (auto& x : e) x += 0.35 * detail::gaussian(rng);
    data.embeddings.emplace_back(id, std::move(e));

    Vector p(opts.label_count);
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double base = j == tpl[t].frame % opts.label_count ? 0.75 : 0.12;
      p[j] = std::clamp(base + 0.2 * (detail::unit(rng) - 0.5), 0.0, 1.0);
    }
    data.label_probs.emplace_back(id, std::move(p));
    data.parses.push_back({id, text, std::move(penman)});
  }
  for (const auto& pole : pole_documents(opts.axes)) {
    data.embeddings.emplace_back(pole.id, detail::random_direction(rng, opts.dimension));
  }
  return data;
}

/// Writes embeddings.jsonl, label_probs.jsonl, parses.amr and the corpus
/// itself (one headline per line, named after the source).
inline void write_fixture_dir(const Data& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / kEmbeddingsFile, std::ios::binary);
    for (const auto& [id, v] : data.embeddings) out << nlohmann::json{{"id", id}, {"vector", v}}.dump() << '\n';
  }
  {
    std::ofstream out(dir / kLabelProbsFile, std::ios::binary);
    for (const auto& [id, v] : data.label_probs) out << nlohmann::json{{"id", id}, {"probs", v}}.dump() << '\n';
  }
  {
    std::ofstream out(dir / kParsesFile, std::ios::binary);
    for (const auto& r : data.parses) {
      out << "# ::id " << r.id << "\n# ::snt " << r.text << "\n" << r.penman << "\n\n";
    }
  }
  {
    std::ofstream out(dir / data.corpus.source_name, std::ios::binary);
    for (const auto& d : data.corpus.documents) out << d.text << '\n';
  }
}

}  // namespace framefinder::synth
