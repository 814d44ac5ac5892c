#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hvacd/finetune.hpp"
#include "hvacd/ica.hpp"
#include "hvacd/ingestion.hpp"
#include "hvacd/preprocessing.hpp"
#include "hvacd/synth.hpp"

namespace hvacd {

struct IngestionOptions {
  double max_missing_fraction = 0.05;
  DuplicatePolicy duplicates = DuplicatePolicy::Reject;
};

struct EvaluationOptions {
  double rating_kw = 0.0;     // > 0 forces a nameplate rating for every customer
  double nameplate_kw = 4.0;  // used when no truth-derived rating is available
  bool svg = true;
  double hist_bin_width = 0.05;
  double hist_upper = 0.5;
};

struct CustomerPaths {
  std::string id;
  std::string power;
  std::string temperature;
  std::string truth;  // optional outside evaluation
};

struct PipelineConfig {
  std::uint64_t seed = 42;
  std::string output_dir = "run";
  int workers = 1;
  CorpusSpec synth;
  /// Explicit customers; when empty the corpus manifest under
  /// `corpus_dir` (default <output_dir>/corpus) is used.
  std::vector<CustomerPaths> customers;
  std::string corpus_dir;
  IngestionOptions ingestion;
  ClassifyParams classify;
  LiulParams liul;
  int k_use = 10;
  IcaOptions ica;
  FineTuneConfig finetune;
  EvaluationOptions evaluation;
  bool dump_sources = false;
  bool dump_traces = false;

  /// Throws ConfigError on invalid values.
  void validate() const;
  std::filesystem::path corpus_path() const;
};

/// Parses a JSON config. Missing keys keep their defaults; unknown keys are
/// rejected so that typos do not silently fall back to defaults.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Fully materialized config, every default written out.
std::string dump_config(const PipelineConfig& cfg);

const char* to_string(PdfMode m);
const char* to_string(KlSign s);

}  // namespace hvacd
