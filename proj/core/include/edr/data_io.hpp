#pragma once

// Readers and writers for the supported data formats, plus seeded
// sampling and train/test splits.
//
// Pixel bytes are scaled by 1/255. Image directories hold one
// subdirectory per class; subdirectories and files are taken in
// lexicographic order and labels count up from 0.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "edr/dataset.hpp"
#include "edr/tensor.hpp"

namespace edr {

namespace fs = std::filesystem;

// ---- IDX (MNIST) ----

/// Images (u8, magic 0x00000803) and optional labels (magic 0x00000801).
DataSet load_idx(const fs::path& images, const std::optional<fs::path>& labels = std::nullopt);
/// Writes samples of shape (rows, cols, n) back as IDX bytes (round(v * 255)).
void write_idx(const DataSet& ds, const fs::path& images, const std::optional<fs::path>& labels = std::nullopt);

// ---- Netpbm ----

struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;  // 1 for P5, 3 for P6
  std::vector<std::uint8_t> pixels;  // row-major, channels interleaved
};

Image read_pnm(const fs::path& path);
void write_pnm(const fs::path& path, const Image& img);

/// Bilinear resampling with half-pixel centres; edges are clamped.
Matrix resize_bilinear(const Matrix& src, std::size_t height, std::size_t width);

enum class ColorMode { gray, rgb };

/// Samples of shape (h, w, n) for gray or (h, w, 3, n) for rgb. Gray mode
/// reads P5 files only and rgb mode P6 only.
DataSet load_image_dir(const fs::path& root, ColorMode mode,
                       std::optional<std::pair<std::size_t, std::size_t>> resize_to = std::nullopt);

// ---- ETEN tensor files ----

/// "ETEN", u32 order, order x u32 extents, then f64 values in storage
/// order; all little-endian.
void write_eten(const fs::path& path, const Tensor& t);
Tensor read_eten(const fs::path& path);
std::vector<std::uint8_t> encode_eten(const Tensor& t);
Tensor decode_eten(const std::vector<std::uint8_t>& bytes, const std::string& what = "ETEN data");

// ---- Sampling ----

/// Deterministic generator: std::mt19937_64 (fixed by the C++ standard)
/// with integer ranges drawn by rejection, so results do not depend on
/// the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller.
  double normal();
  double uniform();  // [0, 1)
  /// Fisher-Yates shuffle.
  void shuffle(std::vector<std::size_t>& v);

 private:
  std::mt19937_64 gen_;
};

struct SplitPlan {
  std::size_t train = 0;
  std::size_t test = 0;
  bool per_class = true;  // counts per class, otherwise over the whole set
  std::uint64_t seed = 0;
};

struct Split {
  DataSet train;
  DataSet test;
  std::vector<std::size_t> train_index;  // positions in the source set
  std::vector<std::size_t> test_index;
};

/// Sampling without replacement. Selected positions are returned in
/// ascending order.
Split split(const DataSet& ds, const SplitPlan& plan);

/// `count` positions drawn without replacement, ascending.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed);

// ---- Manifest ----

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes);
std::uint64_t fnv1a64_file(const fs::path& path);

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  std::optional<int> label;
  std::uint64_t bytes = 0;
  std::uint64_t checksum = 0;
};

struct Manifest {
  std::string name;
  std::vector<ManifestEntry> files;
};

/// Lists `files` (relative to `root`) with sizes and checksums.
Manifest build_manifest(const fs::path& root, const std::vector<std::pair<std::string, std::optional<int>>>& files,
                        std::string name = {});
void write_manifest(const fs::path& path, const Manifest& m);
Manifest read_manifest(const fs::path& path);
/// Throws FormatError naming the first file whose size or checksum differs.
void verify_manifest(const fs::path& root, const Manifest& m);

}  // namespace edr
