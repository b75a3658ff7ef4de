// Command-line front end: ingest | synth | backtest | superstats | report.
// Exit code 0 on success; any failure prints one line to stderr in the form
//   error: <class>: <message>
// and exits nonzero.
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "epf/config.hpp"
#include "epf/pipeline.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

epf::Config resolve_config(const CliOverrides& cli) {
  epf::Config cfg;
  if (!cli.config_path.empty()) cfg = epf::load_config(cli.config_path);
  if (cli.seed) cfg.seed = *cli.seed;
  if (cli.jobs) cfg.jobs = *cli.jobs;
  epf::validate_config(cfg);
  return cfg;
}

void add_common(CLI::App* sub, CliOverrides& cli) {
  sub->add_option("--config", cli.config_path, "key=value configuration file");
  sub->add_option("--seed", cli.seed, "override the run seed");
  sub->add_option("--jobs", cli.jobs, "override the worker pool size");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic day-ahead electricity price forecasting"};
  app.require_subcommand(1);

  CliOverrides cli;
  CLI::App* sub_ingest = app.add_subcommand("ingest", "build the canonical feature frame");
  CLI::App* sub_synth = app.add_subcommand("synth", "generate a synthetic frame with truth sidecar");
  CLI::App* sub_backtest = app.add_subcommand("backtest", "rolling weekly retraining backtest");
  CLI::App* sub_superstats =
      app.add_subcommand("superstats", "volatility and distribution analysis of a forecast");
  CLI::App* sub_report = app.add_subcommand("report", "yearly NLL/MAE/SMAPE report");
  for (CLI::App* sub : {sub_ingest, sub_synth, sub_backtest, sub_superstats, sub_report})
    add_common(sub, cli);

  CLI11_PARSE(app, argc, argv);

  try {
    epf::Config cfg = resolve_config(cli);
    if (sub_ingest->parsed()) {
      epf::IngestSummary s = epf::run_ingest(cfg);
      std::cout << "ingest: " << s.valid_rows << "/" << s.rows << " valid hours -> "
                << s.frame_path << "\n";
    } else if (sub_synth->parsed()) {
      epf::SynthSummary s = epf::run_synth(cfg);
      std::cout << "synth: " << s.rows << " hours -> " << s.frame_path << " (+ "
                << s.truth_path << ")\n";
    } else if (sub_backtest->parsed()) {
      epf::BacktestSummary s = epf::run_backtest(cfg);
      std::size_t trained = 0;
      for (const auto& f : s.folds)
        if (f.status == "trained") ++trained;
      std::cout << "backtest: " << trained << "/" << s.folds.size() << " folds trained, "
                << s.forecast_rows << " forecast hours -> " << s.forecast_path << "\n";
    } else if (sub_superstats->parsed()) {
      epf::SuperstatsSummary s = epf::run_superstats(cfg);
      std::cout << "superstats: " << s.aligned_hours << " hours, price q=" << s.price_fit.q
                << " -> " << s.density_path << "\n";
    } else if (sub_report->parsed()) {
      epf::ReportSummary s = epf::run_report(cfg);
      std::cout << "report: " << s.rows.size() << " rows -> " << s.report_path << "\n";
    }
  } catch (const epf::Error& e) {
    std::cerr << "error: " << epf::to_string(e.error_class()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
