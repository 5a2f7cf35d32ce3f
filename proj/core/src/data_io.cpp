#include "edr/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edr/error.hpp"

namespace edr {

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
         std::uint32_t{b[at + 3]};
}

void put_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_le(std::vector<std::uint8_t>& b, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(const std::vector<std::uint8_t>& b, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{b[at + static_cast<std::size_t>(i)]} << (8 * i);
  return v;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
}

}  // namespace

// ---- IDX ----

DataSet load_idx(const fs::path& images, const std::optional<fs::path>& labels) {
  auto img = read_bytes(images);
  if (img.size() < 16 || be32(img, 0) != 0x00000803u)
    throw FormatError(images.string() + ": not an IDX image file (bad magic)");
  const std::size_t n = be32(img, 4), rows = be32(img, 8), cols = be32(img, 12);
  if (n == 0 || rows == 0 || cols == 0) throw FormatError(images.string() + ": zero image count or size");
  const std::size_t need = 16 + n * rows * cols;
  if (img.size() < need) throw FormatError(images.string() + ": truncated payload");
  if (img.size() > need) throw FormatError(images.string() + ": trailing bytes after payload");

  Tensor x(Shape{rows, cols, n});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        x[r + rows * (c + cols * s)] = img[16 + s * rows * cols + r * cols + c] / 255.0;

  std::vector<int> lab;
  if (labels) {
    auto lb = read_bytes(*labels);
    if (lb.size() < 8 || be32(lb, 0) != 0x00000801u)
      throw FormatError(labels->string() + ": not an IDX label file (bad magic)");
    const std::size_t m = be32(lb, 4);
    if (lb.size() != 8 + m) throw FormatError(labels->string() + ": truncated or oversized payload");
    if (m != n)
      throw FormatError("label count " + std::to_string(m) + " does not match image count " + std::to_string(n));
    lab.assign(lb.begin() + 8, lb.end());
  }
  return DataSet(std::move(x), std::move(lab), "idx:" + images.filename().string());
}

void write_idx(const DataSet& ds, const fs::path& images, const std::optional<fs::path>& labels) {
  const Tensor& x = ds.x();
  if (x.order() != 3) throw ShapeError("write_idx needs samples of shape (rows, cols, n)");
  const std::size_t rows = x.extent(0), cols = x.extent(1), n = x.extent(2);
  std::vector<std::uint8_t> img;
  img.reserve(16 + x.size());
  put_be32(img, 0x00000803u);
  put_be32(img, static_cast<std::uint32_t>(n));
  put_be32(img, static_cast<std::uint32_t>(rows));
  put_be32(img, static_cast<std::uint32_t>(cols));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) img.push_back(to_byte(x[r + rows * (c + cols * s)]));
  write_bytes(images, img);
  if (labels) {
    const auto& lab = ds.require_labels("write_idx");
    std::vector<std::uint8_t> lb;
    put_be32(lb, 0x00000801u);
    put_be32(lb, static_cast<std::uint32_t>(n));
    for (int l : lab) {
      if (l < 0 || l > 255) throw RangeError("IDX labels must fit in a byte");
      lb.push_back(static_cast<std::uint8_t>(l));
    }
    write_bytes(*labels, lb);
  }
}

// ---- Netpbm ----

Image read_pnm(const fs::path& path) {
  auto b = read_bytes(path);
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < b.size()) {
      if (b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
      } else if (std::isspace(b[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> std::size_t {
    skip_space();
    if (pos >= b.size() || !std::isdigit(b[pos])) throw FormatError(path.string() + ": malformed header");
    std::size_t v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) {
      v = v * 10 + static_cast<std::size_t>(b[pos++] - '0');
      if (v > 1u << 20) throw FormatError(path.string() + ": header value out of range");
    }
    return v;
  };
  if (b.size() < 2 || b[0] != 'P' || (b[1] != '5' && b[1] != '6'))
    throw FormatError(path.string() + ": not a binary PGM (P5) or PPM (P6) file");
  Image img;
  img.channels = b[1] == '5' ? 1 : 3;
  pos = 2;
  img.width = number();
  img.height = number();
  const std::size_t maxval = number();
  if (img.width == 0 || img.height == 0) throw FormatError(path.string() + ": zero image size");
  if (maxval != 255) throw FormatError(path.string() + ": only maxval 255 is supported");
  if (pos >= b.size() || !std::isspace(b[pos])) throw FormatError(path.string() + ": malformed header");
  ++pos;
  const std::size_t need = img.width * img.height * img.channels;
  if (b.size() - pos < need) throw FormatError(path.string() + ": truncated pixel data");
  img.pixels.assign(b.begin() + static_cast<std::ptrdiff_t>(pos), b.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return img;
}

void write_pnm(const fs::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw RangeError("write_pnm: channels must be 1 or 3");
  if (img.pixels.size() != img.width * img.height * img.channels) throw ShapeError("write_pnm: pixel count mismatch");
  std::ostringstream head;
  head << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
  std::string h = head.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  write_bytes(path, out);
}

Matrix resize_bilinear(const Matrix& src, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw RangeError("resize: target size must be positive");
  const auto ih = src.rows(), iw = src.cols();
  if (ih == 0 || iw == 0) throw RangeError("resize: empty source image");
  const double sy = static_cast<double>(ih) / static_cast<double>(height);
  const double sx = static_cast<double>(iw) / static_cast<double>(width);
  auto coord = [](std::size_t o, double scale, Eigen::Index in, Eigen::Index& i0, Eigen::Index& i1, double& t) {
    double p = (static_cast<double>(o) + 0.5) * scale - 0.5;
    p = std::clamp(p, 0.0, static_cast<double>(in - 1));
    i0 = static_cast<Eigen::Index>(std::floor(p));
    i1 = std::min<Eigen::Index>(i0 + 1, in - 1);
    t = p - static_cast<double>(i0);
  };
  Matrix out(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < height; ++r) {
    Eigen::Index y0, y1;
    double ty;
    coord(r, sy, ih, y0, y1, ty);
    for (std::size_t c = 0; c < width; ++c) {
      Eigen::Index x0, x1;
      double tx;
      coord(c, sx, iw, x0, x1, tx);
      const double top = (1 - tx) * src(y0, x0) + tx * src(y0, x1);
      const double bot = (1 - tx) * src(y1, x0) + tx * src(y1, x1);
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (1 - ty) * top + ty * bot;
    }
  }
  return out;
}

DataSet load_image_dir(const fs::path& root, ColorMode mode,
                       std::optional<std::pair<std::size_t, std::size_t>> resize_to) {
  if (!fs::is_directory(root)) throw FormatError(root.string() + " is not a directory");
  std::vector<fs::path> classes;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) classes.push_back(e.path());
  std::sort(classes.begin(), classes.end());
  if (classes.empty()) throw FormatError(root.string() + ": no class subdirectories");

  const std::size_t channels = mode == ColorMode::gray ? 1 : 3;
  std::vector<Matrix> planes;  // channels per sample
  std::vector<int> labels;
  std::size_t h = 0, w = 0;
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(classes[ci])) {
      auto ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
      if (e.is_regular_file() && (ext == ".pgm" || ext == ".ppm" || ext == ".pnm")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      Image img = read_pnm(f);
      if (img.channels != channels)
        throw FormatError(f.string() + ": " + (img.channels == 1 ? "grayscale" : "colour") + " image in " +
                          (mode == ColorMode::gray ? "gray" : "rgb") + " mode");
      const std::size_t oh = resize_to ? resize_to->first : img.height;
      const std::size_t ow = resize_to ? resize_to->second : img.width;
      if (h == 0) {
        h = oh;
        w = ow;
      } else if (oh != h || ow != w) {
        throw ShapeError(f.string() + ": image size differs from earlier images; set a resize target");
      }
      for (std::size_t ch = 0; ch < channels; ++ch) {
        Matrix m(static_cast<Eigen::Index>(img.height), static_cast<Eigen::Index>(img.width));
        for (std::size_t r = 0; r < img.height; ++r)
          for (std::size_t c = 0; c < img.width; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                img.pixels[(r * img.width + c) * channels + ch] / 255.0;
        planes.push_back(resize_to && (oh != img.height || ow != img.width) ? resize_bilinear(m, oh, ow) : m);
      }
      labels.push_back(static_cast<int>(ci));
    }
  }
  if (labels.empty()) throw FormatError(root.string() + ": no PGM/PPM images found");
  const std::size_t n = labels.size();
  Shape shape = mode == ColorMode::gray ? Shape{h, w, n} : Shape{h, w, 3, n};
  Tensor x(shape);
  const std::size_t plane = h * w;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < channels; ++ch)
      std::memcpy(&x[(s * channels + ch) * plane], planes[s * channels + ch].data(), plane * sizeof(double));
  return DataSet(std::move(x), std::move(labels), "images:" + root.filename().string());
}

// ---- ETEN ----

std::vector<std::uint8_t> encode_eten(const Tensor& t) {
  std::vector<std::uint8_t> b{'E', 'T', 'E', 'N'};
  b.reserve(8 + 4 * t.order() + 8 * t.size());
  put_le(b, t.order(), 4);
  for (std::size_t m = 0; m < t.order(); ++m) {
    if (t.extent(m) > 0xFFFFFFFFu) throw RangeError("ETEN extents must fit in 32 bits");
    put_le(b, t.extent(m), 4);
  }
  for (double v : t.data()) put_le(b, std::bit_cast<std::uint64_t>(v), 8);
  return b;
}

Tensor decode_eten(const std::vector<std::uint8_t>& b, const std::string& what) {
  if (b.size() < 8 || std::memcmp(b.data(), "ETEN", 4) != 0) throw FormatError(what + ": missing ETEN magic");
  const std::size_t order = get_le(b, 4, 4);
  if (order > 64) throw FormatError(what + ": implausible order " + std::to_string(order));
  if (b.size() < 8 + 4 * order) throw FormatError(what + ": truncated header");
  std::vector<std::size_t> dims(order);
  for (std::size_t m = 0; m < order; ++m) dims[m] = get_le(b, 8 + 4 * m, 4);
  Shape shape(dims);
  const std::size_t at = 8 + 4 * order;
  if (b.size() != at + 8 * shape.numel()) throw FormatError(what + ": payload size does not match the shape");
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::bit_cast<double>(get_le(b, at + 8 * i, 8));
  return t;
}

void write_eten(const fs::path& path, const Tensor& t) { write_bytes(path, encode_eten(t)); }
Tensor read_eten(const fs::path& path) { return decode_eten(read_bytes(path), path.string()); }

// ---- Sampling ----

Rng::Rng(std::uint64_t seed) : gen_(seed) {}

std::uint64_t Rng::next() { return gen_(); }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw RangeError("Rng::below needs a positive bound");
  // Values under `threshold` would bias the modulo.
  const std::uint64_t threshold = (~bound + 1) % bound;
  std::uint64_t r;
  do r = next();
  while (r < threshold);
  return r % bound;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

void Rng::shuffle(std::vector<std::size_t>& v) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (count > n) throw RangeError("cannot draw " + std::to_string(count) + " of " + std::to_string(n) + " samples");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Split split(const DataSet& ds, const SplitPlan& plan) {
  Split out;
  Rng rng(plan.seed);
  if (plan.per_class) {
    const auto& labels = ds.require_labels("per-class split");
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
    for (auto& [label, idx] : groups) {
      if (plan.train + plan.test > idx.size())
        throw RangeError("class " + std::to_string(label) + " has " + std::to_string(idx.size()) +
                         " samples, plan needs " + std::to_string(plan.train + plan.test));
      rng.shuffle(idx);
      out.train_index.insert(out.train_index.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(plan.train));
      out.test_index.insert(out.test_index.end(), idx.begin() + static_cast<std::ptrdiff_t>(plan.train),
                            idx.begin() + static_cast<std::ptrdiff_t>(plan.train + plan.test));
    }
  } else {
    const std::size_t n = ds.size();
    if (plan.train + plan.test > n)
      throw RangeError("plan needs " + std::to_string(plan.train + plan.test) + " samples, set has " + std::to_string(n));
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    out.train_index.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(plan.train));
    out.test_index.assign(idx.begin() + static_cast<std::ptrdiff_t>(plan.train),
                          idx.begin() + static_cast<std::ptrdiff_t>(plan.train + plan.test));
  }
  std::sort(out.train_index.begin(), out.train_index.end());
  std::sort(out.test_index.begin(), out.test_index.end());
  out.train = ds.subset(out.train_index);
  out.test = ds.subset(out.test_index);
  return out;
}

// ---- Manifest ----

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const fs::path& path) { return fnv1a64(read_bytes(path)); }

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

Manifest build_manifest(const fs::path& root, const std::vector<std::pair<std::string, std::optional<int>>>& files,
                        std::string name) {
  Manifest m{std::move(name), {}};
  for (const auto& [rel, label] : files) {
    auto bytes = read_bytes(root / rel);
    m.files.push_back({rel, label, bytes.size(), fnv1a64(bytes)});
  }
  return m;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  nlohmann::json j;
  j["name"] = m.name;
  j["files"] = nlohmann::json::array();
  for (const auto& f : m.files) {
    nlohmann::json e{{"path", f.path}, {"bytes", f.bytes}, {"fnv1a64", hex64(f.checksum)}};
    if (f.label) e["label"] = *f.label;
    j["files"].push_back(e);
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  Manifest m;
  try {
    auto j = nlohmann::json::parse(in);
    m.name = j.value("name", "");
    for (const auto& e : j.at("files")) {
      ManifestEntry f;
      f.path = e.at("path").get<std::string>();
      f.bytes = e.at("bytes").get<std::uint64_t>();
      f.checksum = std::stoull(e.at("fnv1a64").get<std::string>(), nullptr, 16);
      if (e.contains("label")) f.label = e.at("label").get<int>();
      m.files.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(path.string() + ": " + ex.what());
  } catch (const std::logic_error& ex) {
    throw FormatError(path.string() + ": bad checksum field");
  }
  return m;
}

void verify_manifest(const fs::path& root, const Manifest& m) {
  for (const auto& f : m.files) {
    auto bytes = read_bytes(root / f.path);
    if (bytes.size() != f.bytes) throw FormatError(f.path + ": size differs from manifest");
    if (fnv1a64(bytes) != f.checksum) throw FormatError(f.path + ": checksum differs from manifest");
  }
}

}  // namespace edr
