#pragma once

// 1-NN recognition, dimension sweeps and their CSV/SVG output.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "edr/dataset.hpp"
#include "edr/pipeline.hpp"
#include "edr/tensor.hpp"

namespace edr {

/// Label of the nearest training column (Euclidean) for every test column;
/// ties go to the smaller training index.
std::vector<int> nn_classify(const Matrix& train, std::span<const int> train_labels, const Matrix& test);

/// 100 * correct / total.
double recognition_rate(std::span<const int> predicted, std::span<const int> truth);

/// Recognition rate of one method at one dimension (fit, embed the test
/// set, 1-NN). Errors propagate. The baseline ignores d.
double evaluate(const MethodConfig& m, const DataSet& train, const DataSet& test, std::size_t d);

struct SweepCell {
  std::size_t d = 0;
  double ir = 0.0;       // NaN when the cell failed
  double seconds = 0.0;  // wall clock of fit share + transform + classify
  std::string error;
};

struct SweepResult {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<SweepCell> cells;  // d increasing
};

struct SweepOptions {
  std::size_t threads = 1;
  bool timing = false;  // fill the seconds column
  std::uint64_t seed = 0;
};

/// For each method: fit once at the largest d, then truncate to every d,
/// embed the test set and classify. A failed fit or cell is recorded and
/// the sweep goes on. Results follow the order of `methods`.
std::vector<SweepResult> sweep(const std::vector<MethodConfig>& methods, const DataSet& train, const DataSet& test,
                               std::vector<std::size_t> dims, const SweepOptions& opt = {});

bool any_failed(const std::vector<SweepResult>& results);

/// Columns method,d,ir,seconds,seed. Seconds are left empty unless
/// `timing` is set. Values are written in shortest round-trip form.
void emit_csv(const std::vector<SweepResult>& results, const std::filesystem::path& path, bool timing = false);
std::string format_csv(const std::vector<SweepResult>& results, bool timing = false);
std::vector<SweepResult> read_csv(const std::filesystem::path& path);

/// 800x500 line chart of IR against d, one polyline per method.
void emit_svg(const std::vector<SweepResult>& results, const std::filesystem::path& path,
              const std::string& title = "Recognition rate");

/// Mean IR per (method, d) over several sweeps with the same layout.
std::vector<SweepResult> mean_over_runs(const std::vector<std::vector<SweepResult>>& runs);

}  // namespace edr
