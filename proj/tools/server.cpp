#include <csignal>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "framefinder/config.hpp"
#include "framefinder/http_provider.hpp"
#include "framefinder/parallel.hpp"
#include "framefinder/providers.hpp"
#include "framefinder/service.hpp"

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  namespace ff = framefinder;
  CLI::App app{"HTTP service for the framefinder web explorer"};
  app.name("framefinder-server");
  app.set_version_flag("--version", std::string("framefinder-server ") + FRAMEFINDER_VERSION);

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string fixtures, endpoint, cache_dir, labels_file, axes_file;
  ff::service::ServiceOptions opts;
  std::string examples_dir, static_dir;
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port)->capture_default_str();
  auto* fx = app.add_option("--fixtures", fixtures, "Directory of precomputed provider outputs");
  auto* ep = app.add_option("--endpoint", endpoint, "Inference endpoint URL");
  fx->excludes(ep);
  app.add_option("--cache-dir", cache_dir, "Append endpoint outputs to this fixture directory");
  app.add_option("--labels-file", labels_file)->check(CLI::ExistingFile);
  app.add_option("--axes-file", axes_file)->check(CLI::ExistingFile);
  app.add_option("--examples", examples_dir, "Directory holding index.json and example corpora");
  app.add_option("--static", static_dir, "UI bundle served under /");
  app.add_option("--workers", opts.workers, "Concurrent analyses")->capture_default_str();
  app.add_option("--queue", opts.queue_capacity, "Analyses allowed to wait")->capture_default_str();
  app.add_option("--jobs", opts.analysis_jobs, "Threads per analysis")->capture_default_str();
  app.add_option("--max-body", opts.max_body_bytes, "Request size limit in bytes")->capture_default_str();
  app.add_option("--max-documents", opts.max_documents)->capture_default_str();
  app.add_option("--cache-capacity", opts.cache_capacity, "Results kept for refiltering")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (fixtures.empty() && endpoint.empty()) {
    if (const char* env = std::getenv("FRAMEFINDER_ENDPOINT"); env && *env) endpoint = env;
  }
  if (fixtures.empty() == endpoint.empty()) {
    std::cerr << "framefinder-server: exactly one of --fixtures and --endpoint is required\n";
    return 2;
  }

  try {
    ff::AnalysisConfig config;
    if (!labels_file.empty()) config.labels = ff::load_label_set(labels_file);
    if (!axes_file.empty()) config.axes = ff::load_axis_specs(axes_file);
    opts.examples_dir = examples_dir;
    opts.static_dir = static_dir;
    auto providers = fixtures.empty()
                         ? ff::make_http_providers(endpoint, {.jobs = opts.analysis_jobs}, cache_dir)
                         : ff::make_fixture_providers(fixtures);
    ff::service::Service service(std::move(providers), config, opts);

    httplib::Server server;
    server.new_task_queue = [n = opts.workers + opts.queue_capacity + 4] { return new httplib::ThreadPool(n); };
    service.mount(server);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    if (!server.bind_to_port(host, port)) {
      std::cerr << "framefinder-server: cannot bind " << host << ":" << port << '\n';
      return 1;
    }
    std::cerr << "framefinder-server: listening on http://" << host << ":" << port << " ("
              << service.example_list().size() << " examples)\n";
    server.listen_after_bind();
  } catch (const ff::Error& e) {
    std::cerr << "framefinder-server: " << e.name() << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
