// Command-line front end for the pipeline stages.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "webextractor/app/config.hpp"
#include "webextractor/app/pipeline.hpp"
#include "webextractor/error.hpp"

namespace {

int report(const nlohmann::json& r, bool as_json) {
  if (as_json) {
    std::cout << r.dump(2) << "\n";
  } else {
    std::cout << r.at("summary").get<std::string>();
    std::cout << "report: " << r.at("command").get<std::string>() << " -> reports/" << r.at("command").get<std::string>()
              << ".json\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"webextractor: complete knowledge graph facts from external identifier pages"};
  app.require_subcommand(1);
  std::string config_path = "webextractor.toml";
  bool as_json = false;
  app.add_option("-c,--config", config_path, "Config file")->capture_default_str();
  app.add_flag("--json", as_json, "Print the full run report as JSON");

  app.add_subcommand("select", "Rank properties per external identifier domain");
  app.add_subcommand("crawl", "Fetch and cache the pages behind the external identifiers");
  app.add_subcommand("build-dataset", "Generate distant-supervision QA examples and splits");
  app.add_subcommand("extract", "Run the extraction backend over incomplete entities");
  app.add_subcommand("train-linker", "Train a ranking model per item-valued target property");
  app.add_subcommand("link", "Link extracted spans and submit proposals to the store");

  auto* estimate = app.add_subcommand("estimate", "Estimate fact yield from a stats CSV");
  std::string stats_path;
  estimate->add_option("--stats", stats_path, "Stats CSV (defaults to estimate.stats)");

  auto* serve = app.add_subcommand("serve", "Serve the proposals review API");
  std::optional<int> port;
  serve->add_option("--port", port, "Port (defaults to service.port)");

  auto* experiment = app.add_subcommand("experiment", "Budget grid F1, Hit@1 and the domain partition");
  std::string budgets;
  experiment->add_option("--budgets", budgets, "Comma-separated budgets, e.g. 0,8,64");

  CLI11_PARSE(app, argc, argv);

  try {
    wex::app::Pipeline pipeline(wex::app::Config::load(config_path));
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "select") return report(pipeline.select(), as_json);
    if (cmd == "crawl") return report(pipeline.crawl(), as_json);
    if (cmd == "build-dataset") return report(pipeline.build_dataset(), as_json);
    if (cmd == "extract") return report(pipeline.extract(), as_json);
    if (cmd == "train-linker") return report(pipeline.train_linker(), as_json);
    if (cmd == "link") return report(pipeline.link(), as_json);
    if (cmd == "estimate") {
      return report(pipeline.estimate(stats_path.empty() ? std::nullopt : std::optional(stats_path)), as_json);
    }
    if (cmd == "experiment") {
      std::optional<wex::dataset::BudgetSpec> spec;
      if (!budgets.empty()) spec = wex::dataset::BudgetSpec::parse(budgets);
      return report(pipeline.experiment(spec), as_json);
    }
    if (cmd == "serve") {
      const auto& svc = pipeline.config().service;
      std::cerr << "serving " << svc.store_dir.string() << " on http://" << svc.host << ":" << port.value_or(svc.port)
                << "\n";
      pipeline.serve(port);
      return 0;
    }
  } catch (const wex::Error& e) {
    std::cerr << "error [" << wex::error_code_name(e.code()) << "]: " << e.what() << "\n";
    return wex::app::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
