#include <iostream>

#include <CLI11.hpp>

#include "framefinder/axes.hpp"
#include "framefinder/errors.hpp"
#include "synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a deterministic synthetic headline corpus with matching provider fixtures"};
  app.set_version_flag("--version", std::string(FRAMEFINDER_VERSION));
  framefinder::synth::Options opts;
  std::string out_dir;
  std::string axes_file;
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("-n,--documents", opts.n_documents, "Number of documents")->capture_default_str();
  app.add_option("--seed", opts.seed, "Random seed")->capture_default_str();
  app.add_option("--dimension", opts.dimension, "Embedding dimension")->capture_default_str()->check(CLI::Range(2, 4096));
  app.add_option("--source-name", opts.source_name, "Corpus file name (prefix of document ids)")->capture_default_str();
  app.add_option("--axes-file", axes_file, "Axis definitions whose poles get embeddings")->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  try {
    if (!axes_file.empty()) opts.axes = framefinder::load_axis_specs(axes_file);
    const auto data = framefinder::synth::generate(opts);
    framefinder::synth::write_fixture_dir(data, out_dir);
    std::cerr << "wrote " << data.corpus.size() << " documents to " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
