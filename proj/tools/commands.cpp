#include "commands.hpp"

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "hvacd/errors.hpp"
#include "hvacd/pipeline.hpp"
#include "hvacd/report.hpp"
#include "hvacd/synth.hpp"
#include "json.hpp"

namespace hvacd::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  out << text;
}

void prepare_run_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw DataError("cannot create output directory " + cfg.output_dir + ": " + ec.message());
  write_file(fs::path(cfg.output_dir) / "resolved_config.json", dump_config(cfg));
}

std::vector<CustomerRecords> read_records(const PipelineConfig& cfg, const std::vector<CustomerPaths>& customers) {
  const fs::path dir = fs::path(cfg.output_dir) / "disaggregate";
  std::vector<CustomerRecords> out;
  for (const CustomerPaths& c : customers) out.push_back(read_customer_days(dir, c.id));
  return out;
}

EvaluationResult evaluate_run(const PipelineConfig& cfg) {
  const std::vector<CustomerPaths> customers = resolve_customers(cfg);
  std::vector<DailyLoadMatrix> truth;
  for (const CustomerPaths& c : customers) truth.push_back(load_truth(c, cfg.ingestion));
  return evaluate_records(read_records(cfg, customers), truth, cfg);
}

}  // namespace

int cmd_synth(const PipelineConfig& cfg) {
  prepare_run_dir(cfg);
  const fs::path dir = cfg.corpus_path();
  fs::create_directories(dir);
  const std::vector<SyntheticCustomer> corpus = generate_corpus(cfg.synth);
  nlohmann::json customers = nlohmann::json::array();
  for (const SyntheticCustomer& c : corpus) {
    write_customer_csvs(dir, c);
    customers.push_back({{"id", c.id},
                         {"seed", c.seed},
                         {"power", c.id + "_power.csv"},
                         {"temperature", c.id + "_temperature.csv"},
                         {"truth", c.id + "_truth.csv"},
                         {"hvac_rating_kw", c.spec.hvac_rating_kw},
                         {"setpoint_c", c.spec.setpoint_c}});
  }
  const nlohmann::json manifest = {{"seed", cfg.synth.seed},
                                   {"households", cfg.synth.households},
                                   {"hot_days", cfg.synth.hot_days},
                                   {"mild_days", cfg.synth.mild_days},
                                   {"shoulder_days", cfg.synth.shoulder_days},
                                   {"start_date", format_date(cfg.synth.start_date)},
                                   {"customers", customers}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << corpus.size() << " synthetic customers to " << dir.string() << "\n";
  return kOk;
}

int cmd_disaggregate(const PipelineConfig& cfg) {
  prepare_run_dir(cfg);
  std::vector<CustomerInput> inputs;
  for (const CustomerPaths& c : resolve_customers(cfg)) inputs.push_back(load_customer(c, cfg.ingestion));
  const PipelineResult result = run_pipeline(inputs, cfg);
  write_disaggregation(fs::path(cfg.output_dir) / "disaggregate", result, cfg);
  int days = 0;
  for (const CustomerResult& c : result.customers) days += static_cast<int>(c.days.size());
  std::cout << "disaggregated " << days << " hot days for " << result.customers.size() << " customers\n";
  if (result.infeasible_days > 0) {
    std::cerr << result.infeasible_days << " hot days ended infeasible; see summary.csv\n";
    return kInfeasible;
  }
  return kOk;
}

int cmd_evaluate(const PipelineConfig& cfg) {
  prepare_run_dir(cfg);
  const EvaluationResult eval = evaluate_run(cfg);
  write_evaluation(fs::path(cfg.output_dir) / "evaluate", eval, cfg);
  std::cout << render_summary(eval);
  return kOk;
}

int cmd_report(const PipelineConfig& cfg) {
  prepare_run_dir(cfg);
  const EvaluationResult eval = evaluate_run(cfg);
  const fs::path dir = fs::path(cfg.output_dir) / "report";
  fs::create_directories(dir);
  const std::string summary = render_summary(eval);
  write_file(dir / "summary.md", summary);
  write_file(dir / "fig6_hourly.svg", hourly_boxplot_svg(eval.methods[kFineTuned]));
  write_file(dir / "fig8_hist.svg", histogram_svg(eval.methods, eval.histograms));
  std::cout << summary;
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"HVAC load disaggregation from 15-minute smart-meter data"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int workers = 0;
  std::uint64_t seed = 0;
  auto* opt_seed = app.add_option("--seed", seed, "Global seed (overrides the config)");
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "Run directory (overrides the config)");
  app.add_option("--workers", workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
  app.fallthrough();
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  auto* disagg = app.add_subcommand("disaggregate", "Run the disaggregation pipeline");
  auto* eval = app.add_subcommand("evaluate", "Score estimates against sub-metered truth");
  auto* report = app.add_subcommand("report", "Write a markdown summary and plots");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (workers > 0) cfg.workers = workers;
    if (*opt_seed) cfg.seed = seed;
    cfg.synth.seed = cfg.seed;
    cfg.validate();
    if (synth->parsed()) return cmd_synth(cfg);
    if (disagg->parsed()) return cmd_disaggregate(cfg);
    if (eval->parsed()) return cmd_evaluate(cfg);
    if (report->parsed()) return cmd_report(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> copy = args;
  copy.insert(copy.begin(), "hvacd");
  std::vector<char*> argv;
  for (std::string& s : copy) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace hvacd::cli
