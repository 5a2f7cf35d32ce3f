#pragma once

// Model persistence: a JSON header next to ETEN payload files. Payloads
// are named after the header (model.json -> model.p1.eten, ...), and the
// header records their FNV-1a checksums.

#include <filesystem>
#include <string>

#include "edr/pipeline.hpp"

namespace edr {

/// Writes a linear or embedding model. `config_echo` is stored verbatim
/// (as JSON when it parses, otherwise as a string). Kernel and baseline
/// fits have no reusable model and raise ConfigError.
void save_model(const std::filesystem::path& header, const FittedMethod& f, const std::string& config_echo = {});

/// Reads a model written by save_model. FormatError on corrupt headers or
/// checksum mismatches.
FittedMethod load_model(const std::filesystem::path& header);

}  // namespace edr
