#pragma once

// JSON run configuration shared by the CLI commands. Unknown keys are
// rejected; relative paths are resolved against the config file's folder.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edr/data_io.hpp"
#include "edr/pipeline.hpp"

namespace edr {

struct DataConfig {
  std::string format = "idx";  // idx | images | eten
  std::filesystem::path images;  // idx images or eten samples
  std::filesystem::path labels;  // idx labels (optional)
  std::filesystem::path root;    // image directory
  ColorMode color = ColorMode::gray;
  std::optional<std::pair<std::size_t, std::size_t>> resize;
  std::filesystem::path manifest;  // verified before loading when set
};

struct SplitConfig {
  std::size_t train = 0;
  std::size_t test = 0;
  bool per_class = false;
};

struct OutputConfig {
  std::filesystem::path dir = ".";  // defaults to the config file's folder
  std::string csv = "sweep.csv";
  std::string svg = "sweep.svg";
  std::string model = "model.json";
  std::string embedding = "embedding.eten";
};

struct OracleConfig {
  std::vector<std::size_t> dims{5, 15, 25};
  double max_subspace_distance = 1e-6;
  double max_ir_delta = 0.0;
  std::size_t subset = 0;  // 0: all training samples
};

struct RunConfig {
  std::vector<MethodConfig> methods;
  std::vector<std::size_t> dims;
  std::vector<std::uint64_t> seeds{0};
  std::size_t threads = 1;
  bool timing = false;
  DataConfig data;
  SplitConfig split;
  OutputConfig output;
  OracleConfig oracle;
  std::string source;  // normalised JSON echo
};

/// Command-line values that replace the corresponding config keys.
struct ConfigOverrides {
  std::optional<std::string> method;
  std::optional<std::vector<std::size_t>> dims;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::filesystem::path> out;  // relative to the working directory
};

/// Parses a JSON document. Throws ConfigError on syntax errors, unknown
/// keys, wrong types or out-of-range values.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".",
                       const ConfigOverrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// "25", "5,10,15" or "5:40:5" (first:last:step).
std::vector<std::size_t> parse_dims(const std::string& text);

/// Loads the configured data set (verifying the manifest first if given).
DataSet load_data(const DataConfig& c);

}  // namespace edr
