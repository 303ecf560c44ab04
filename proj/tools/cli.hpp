#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "framefinder/amr.hpp"
#include "framefinder/config.hpp"
#include "framefinder/corpus.hpp"
#include "framefinder/errors.hpp"
#include "framefinder/http_provider.hpp"
#include "framefinder/metagraph.hpp"
#include "framefinder/parallel.hpp"
#include "framefinder/providers.hpp"
#include "framefinder/report.hpp"

namespace framefinder::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AnalyzeArgs {
  std::string input;
  std::string text;
  bool split_lines = true;
  std::string labels_file;
  std::string axes_file;
  double threshold = kDefaultLabelThreshold;
  std::uint64_t node_threshold = kDefaultNodeThreshold;
  std::string filter_statistic = "degree_weighted";
  std::string edge_weighting = "occurrences";
  std::string fixtures;
  std::string endpoint;
  std::string cache_dir;
  std::string out = "-";
  std::string dot;
  std::string metagraph_out;
  std::size_t jobs = default_jobs();
  bool dry_run = false;
  bool timings = false;
};

namespace detail {

inline void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << content;
  if (!f.flush()) throw IoError("failed writing '" + path + "'");
}

inline std::string read_input(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  return read_file(path);
}

inline AnalysisConfig build_config(const AnalyzeArgs& a) {
  AnalysisConfig c;
  if (!a.labels_file.empty()) c.labels = load_label_set(a.labels_file);
  if (!a.axes_file.empty()) c.axes = load_axis_specs(a.axes_file);
  c.label_threshold = a.threshold;
  c.node_threshold = a.node_threshold;
  c.filter_statistic = filter_statistic_from_string(a.filter_statistic);
  c.edge_weighting = edge_weighting_from_string(a.edge_weighting);
  c.validate();
  return c;
}

inline Corpus build_corpus(const AnalyzeArgs& a) {
  if (!a.text.empty()) return split_into_documents(a.text, a.split_lines, "text");
  if (a.input == "-") return split_into_documents(read_input("-"), a.split_lines, "stdin");
  if (std::filesystem::path(a.input).extension() == ".jsonl") return load_jsonl_corpus(a.input);
  return load_corpus_file(a.input, a.split_lines);
}

// Checks that a fixture store covers every lookup the analysis would make.
inline std::vector<std::string> coverage_problems(const FixtureStore& store, const Corpus& corpus,
                                                  const AnalysisConfig& config) {
  std::vector<std::string> problems;
  auto missing = [&](const char* file, const std::string& id) {
    if (problems.size() < 20) problems.push_back(std::string(file) + ": no record for '" + id + "'");
  };
  for (const auto& d : corpus.documents) {
    if (const auto* r = store.find_label_probs(d.id); !r) {
      missing(kLabelProbsFile, d.id);
    } else if (r->value.size() != config.labels.size()) {
      problems.push_back(std::string(kLabelProbsFile) + ":" + std::to_string(r->line) + ": " +
                         std::to_string(r->value.size()) + " probabilities for " +
                         std::to_string(config.labels.size()) + " labels");
    }
    if (!store.find_embedding(d.id)) missing(kEmbeddingsFile, d.id);
    if (!store.find_parse(d.id)) missing(kParsesFile, d.id);
  }
  for (const auto& p : pole_documents(config.axes)) {
    if (!store.find_embedding(p.id)) missing(kEmbeddingsFile, p.id);
  }
  return problems;
}

inline Providers build_providers(const AnalyzeArgs& a) {
  if (!a.fixtures.empty()) return make_fixture_providers(a.fixtures);
  HttpClientOptions opts;
  opts.jobs = a.jobs;
  return make_http_providers(a.endpoint, opts, a.cache_dir);
}

inline int run_analyze(AnalyzeArgs a, std::ostream& out, std::ostream& err) {
  if (a.input.empty() == a.text.empty()) throw UsageError("exactly one of --input and --text is required");
  if (a.fixtures.empty() && a.endpoint.empty()) {
    if (const char* env = std::getenv("FRAMEFINDER_ENDPOINT"); env && *env) a.endpoint = env;
  }
  if (a.fixtures.empty() == a.endpoint.empty()) {
    throw UsageError("exactly one of --fixtures and --endpoint (or FRAMEFINDER_ENDPOINT) is required");
  }
  if (!a.cache_dir.empty() && a.endpoint.empty()) throw UsageError("--cache-dir requires --endpoint");
  if (a.jobs == 0) a.jobs = 1;

  const auto config = build_config(a);
  const auto corpus = build_corpus(a);

  if (a.dry_run) {
    if (!a.fixtures.empty()) {
      const auto store = FixtureStore::load(a.fixtures);
      const auto problems = coverage_problems(store, corpus, config);
      for (const auto& p : problems) err << "framefinder: " << p << '\n';
      if (!problems.empty()) return kExitRuntime;
    } else {
      Endpoint::parse(a.endpoint);
    }
    err << "framefinder: dry run ok: " << corpus.size() << " documents, " << config.labels.size() << " labels, "
        << config.axes.size() << " axes\n";
    return kExitOk;
  }

  const auto result = analyze(corpus, build_providers(a), config, {.jobs = a.jobs});
  auto warn = [&](const char* name, const auto& perspective) {
    if (const auto* e = std::get_if<PerspectiveError>(&perspective)) {
      err << "framefinder: warning: " << name << " perspective failed: " << e->kind << ": " << e->message << '\n';
    }
  };
  warn("labels", result.labels);
  warn("axes", result.axes);
  warn("structure", result.structure);

  write_output(a.out, serialize_result(result, {.include_timings = a.timings}), out);
  if (const auto* s = std::get_if<StructurePerspective>(&result.structure)) {
    if (!a.dot.empty()) write_output(a.dot, to_dot(s->graph), out);
    if (!a.metagraph_out.empty() && result.metagraph) {
      write_output(a.metagraph_out, to_graph_json(*result.metagraph).dump(2) + "\n", out);
    }
  } else if (!a.dot.empty() || !a.metagraph_out.empty()) {
    err << "framefinder: warning: no structure output written\n";
  }
  return kExitOk;
}

inline int run_parse_amr(const std::string& path, const std::string& text, bool canonical, std::ostream& out) {
  if (!path.empty() && !text.empty()) throw UsageError("give either a file or --text, not both");
  const std::string penman = text.empty() ? read_input(path.empty() ? "-" : path) : text;
  const auto blocks = amr::split_amr_blocks(penman);
  if (blocks.size() > 1) throw UsageError("expected a single PENMAN block, found " + std::to_string(blocks.size()));
  const std::string body = blocks.empty() ? penman : blocks.front().penman;
  const auto g = amr::parse_penman(body, blocks.empty() ? "" : blocks.front().id);

  nlohmann::json nodes = nlohmann::json::array(), edges = nlohmann::json::array();
  for (const auto& n : g.nodes) {
    nlohmann::json j = {{"kind", n.kind == amr::NodeKind::concept_node ? "concept" : "constant"}, {"label", n.label}};
    if (n.kind == amr::NodeKind::concept_node) j["variable"] = n.variable;
    nodes.push_back(j);
  }
  for (const auto& e : g.edges) edges.push_back({{"source", e.source}, {"role", e.role}, {"target", e.target}});
  nlohmann::json j = {{"root", g.root},      {"nodes", nodes}, {"edges", edges},
                      {"cyclic", g.cyclic},  {"penman", amr::serialize_penman(g)}};
  if (!g.doc_id.empty()) j["id"] = g.doc_id;
  if (canonical) j["canonical"] = amr::canonical_form(g);
  out << j.dump(2) << '\n';
  return kExitOk;
}

inline int run_validate_fixtures(const std::string& dir, const std::string& input, bool split_lines,
                                 const std::string& labels_file, const std::string& axes_file, std::ostream& out,
                                 std::ostream& err) {
  const auto store = FixtureStore::load(dir);
  std::vector<std::string> problems;
  if (!input.empty()) {
    AnalyzeArgs a;
    a.input = input;
    a.split_lines = split_lines;
    a.labels_file = labels_file;
    a.axes_file = axes_file;
    problems = coverage_problems(store, build_corpus(a), build_config(a));
    for (const auto& p : problems) err << "framefinder: " << p << '\n';
  }
  nlohmann::json summary = {
      {"directory", dir},
      {"embeddings", store.embedding_count()},
      {"label_probs", store.label_prob_count()},
      {"parses", store.parse_count()},
      {"ok", problems.empty()}};
  if (const auto d = store.embedding_dimension()) summary["embedding_dimension"] = *d;
  if (const auto l = store.label_count()) summary["label_count"] = *l;
  out << summary.dump(2) << '\n';
  return problems.empty() ? kExitOk : kExitRuntime;
}

}  // namespace detail

/// Entry point of the `framefinder` executable. Results go to `out` (or the
/// named files), diagnostics to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Frame analysis of short texts: media frame labels, moral framing axes and AMR structure."};
  app.name("framefinder");
  app.set_version_flag("--version", std::string("framefinder ") + FRAMEFINDER_VERSION);
  app.require_subcommand(1);

  AnalyzeArgs a;
  auto* analyze_cmd = app.add_subcommand("analyze", "Run all three perspectives over a corpus");
  auto* input = analyze_cmd->add_option("--input,-i", a.input,
                                        "Corpus file (plain text, or .jsonl with id/text records; - for stdin)");
  auto* text = analyze_cmd->add_option("--text,-t", a.text, "Inline corpus text");
  input->excludes(text);
  analyze_cmd->add_flag("--split-lines,!--no-split-lines", a.split_lines,
                        "Treat every non-blank line as one document (default on)");
  analyze_cmd->add_option("--labels-file", a.labels_file, "Label set JSON")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--axes-file", a.axes_file, "Axis set JSON")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--threshold", a.threshold, "Label assignment threshold")->capture_default_str();
  analyze_cmd->add_option("--node-threshold", a.node_threshold, "Structure filter threshold")->capture_default_str();
  analyze_cmd->add_option("--filter-statistic", a.filter_statistic, "degree_weighted or graph_count")
      ->check(CLI::IsMember({"degree_weighted", "graph_count"}))
      ->capture_default_str();
  analyze_cmd->add_option("--edge-weighting", a.edge_weighting, "occurrences or graphs")
      ->check(CLI::IsMember({"occurrences", "graphs"}))
      ->capture_default_str();
  auto* fixtures = analyze_cmd->add_option("--fixtures", a.fixtures, "Directory of precomputed provider outputs");
  auto* endpoint = analyze_cmd->add_option("--endpoint", a.endpoint, "Inference endpoint URL");
  fixtures->excludes(endpoint);
  analyze_cmd->add_option("--cache-dir", a.cache_dir, "Append endpoint outputs to this fixture directory");
  analyze_cmd->add_option("--out,-o", a.out, "Result file (- for standard output)")->capture_default_str();
  analyze_cmd->add_option("--dot", a.dot, "Write the filtered structure graph as DOT");
  analyze_cmd->add_option("--metagraph-out", a.metagraph_out, "Write the unfiltered metagraph as graph-json");
  analyze_cmd->add_option("--jobs,-j", a.jobs, "Worker threads")->capture_default_str();
  analyze_cmd->add_flag("--dry-run", a.dry_run, "Validate configuration and fixtures without computing");
  analyze_cmd->add_flag("--timings", a.timings, "Include stage timings in the result");

  std::string amr_file, amr_text;
  bool canonical = false;
  auto* parse_cmd = app.add_subcommand("parse-amr", "Parse one PENMAN block and print it as JSON");
  parse_cmd->add_option("file", amr_file, "File holding the block (default: standard input)");
  parse_cmd->add_option("--text,-t", amr_text, "PENMAN text");
  parse_cmd->add_flag("--canonical", canonical, "Also print the canonical form");

  std::string fx_dir, fx_input, fx_labels, fx_axes;
  bool fx_split = true;
  auto* validate_cmd = app.add_subcommand("validate-fixtures", "Check a fixture directory");
  validate_cmd->add_option("dir", fx_dir, "Fixture directory")->required();
  validate_cmd->add_option("--input,-i", fx_input, "Corpus whose coverage to check");
  validate_cmd->add_flag("--split-lines,!--no-split-lines", fx_split, "Corpus splitting (default on)");
  validate_cmd->add_option("--labels-file", fx_labels, "Label set JSON")->check(CLI::ExistingFile);
  validate_cmd->add_option("--axes-file", fx_axes, "Axis set JSON")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*analyze_cmd) return detail::run_analyze(a, out, err);
    if (*parse_cmd) return detail::run_parse_amr(amr_file, amr_text, canonical, out);
    if (*validate_cmd) {
      return detail::run_validate_fixtures(fx_dir, fx_input, fx_split, fx_labels, fx_axes, out, err);
    }
  } catch (const UsageError& e) {
    err << "framefinder: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "framefinder: " << e.name() << ": " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "framefinder: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace framefinder::cli
