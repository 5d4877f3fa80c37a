#pragma once
// Experiment configuration: one JSON document covering every module, every
// field defaulted, unknown keys rejected. The resolved form is written back
// into each run directory so a run is reproducible from one file.

#include <filesystem>
#include <nlohmann/json.hpp>

#include "fedkgc/datagen.hpp"
#include "fedkgc/encoder.hpp"
#include "fedkgc/eval.hpp"
#include "fedkgc/federation.hpp"
#include "fedkgc/loss.hpp"

namespace fedkgc {

struct ExperimentConfig {
  std::uint64_t seed = 7;  // copied into the per-module seeds below
  EncoderConfig encoder;
  TrainConfig train;
  FedConfig federation;
  EvalConfig eval;
  GenConfig gen;
};

// Throws ConfigError on unknown keys, wrong types, or invalid values.
ExperimentConfig parse_config(const nlohmann::json& j);

// Throws DataError when the file cannot be opened, ConfigError on malformed
// JSON (with position) or invalid content.
ExperimentConfig load_config_file(const std::filesystem::path& path);

// Fully resolved round-trip form: parse_config(config_to_json(c)) == c.
nlohmann::json config_to_json(const ExperimentConfig& c);

const char* run_mode_name(RunMode m);
RunMode parse_run_mode(const std::string& name);  // accepts "data_agg" alias

}  // namespace fedkgc
