#include "edr/model_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edr/data_io.hpp"
#include "edr/error.hpp"

namespace edr {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kVersion = 1;

Tensor from_matrix(const Matrix& m) {
  Tensor t(Shape{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  std::copy(m.data(), m.data() + m.size(), t.data().begin());
  return t;
}

Tensor from_vector(const Vector& v) {
  Tensor t(Shape{static_cast<std::size_t>(v.size())});
  std::copy(v.data(), v.data() + v.size(), t.data().begin());
  return t;
}

Matrix to_matrix(const Tensor& t, const std::string& what) {
  if (t.order() != 2) throw FormatError(what + " must be a matrix");
  return t.matrix(1);
}

Vector to_vector(const Tensor& t, const std::string& what) {
  if (t.order() != 1) throw FormatError(what + " must be a vector");
  Vector v(static_cast<Eigen::Index>(t.size()));
  std::copy(t.data().begin(), t.data().end(), v.data());
  return v;
}

class PayloadWriter {
 public:
  explicit PayloadWriter(const fs::path& header) : header_(header) {}

  void add(json& list, const std::string& role, const Tensor& t) {
    fs::path file = header_;
    file.replace_extension("." + role + ".eten");
    auto bytes = encode_eten(t);
    std::ofstream out(file, std::ios::binary);
    if (!out) throw FormatError("cannot write " + file.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("cannot write " + file.string());
    std::ostringstream hex;
    hex << std::hex << fnv1a64(bytes);
    list[role] = {{"file", file.filename().string()}, {"checksum", hex.str()}};
  }

 private:
  fs::path header_;
};

Tensor read_payload(const fs::path& header, const json& list, const std::string& role) {
  if (!list.contains(role)) throw FormatError("model header lacks payload '" + role + "'");
  const json& e = list.at(role);
  fs::path file = header.parent_path() / e.at("file").get<std::string>();
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot open model payload " + file.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::ostringstream hex;
  hex << std::hex << fnv1a64(bytes);
  if (hex.str() != e.at("checksum").get<std::string>())
    throw FormatError("checksum mismatch in " + file.string());
  return decode_eten(bytes, file.string());
}

}  // namespace

void save_model(const fs::path& header, const FittedMethod& f, const std::string& config_echo) {
  if (std::holds_alternative<std::monostate>(f.model))
    throw ConfigError(method_id(f.config) + " has no reusable model to save");
  json h;
  h["format"] = "edr-model";
  h["version"] = kVersion;
  h["method"] = method_id(f.config);
  h["d"] = f.d;
  json echo = json::parse(config_echo, nullptr, false);
  h["config"] = echo.is_discarded() ? json(config_echo) : echo;
  json payloads = json::object();
  PayloadWriter w(header);
  if (!f.train.y.shape().dims().empty()) w.add(payloads, "train", f.train.y);

  if (const auto* p = std::get_if<ProjectionModel>(&f.model)) {
    h["kind"] = "projection";
    h["feature_shape"] = p->feature_shape.dims();
    h["multiweight"] = p->multiweight;
    h["skip_first"] = p->skip_first;
    h["slices"] = p->projections.size();
    for (std::size_t r = 0; r < p->projections.size(); ++r) {
      w.add(payloads, "p" + std::to_string(r + 1), p->projections[r]);
      if (r < p->eigenvalues.size()) w.add(payloads, "lambda" + std::to_string(r + 1), from_vector(p->eigenvalues[r]));
    }
  } else {
    const auto& m = std::get<EmbeddingModel>(f.model);
    h["kind"] = "embedding";
    h["embedding"] = m.kind == EmbeddingKind::le ? "le" : "lle";
    h["sigma"] = m.sigma;
    h["k"] = m.k;
    h["reg"] = m.reg;
    h["skip_first"] = m.skip_first;
    w.add(payloads, "y", m.y);
    if (m.y_hat.size() > 0) w.add(payloads, "yhat", from_matrix(m.y_hat));
    if (m.eigenvalues.size() > 0) w.add(payloads, "lambda", from_vector(m.eigenvalues));
    if (m.degrees.size() > 0) w.add(payloads, "degrees", from_vector(m.degrees));
    w.add(payloads, "samples", m.train);
  }
  h["payloads"] = payloads;

  std::ofstream out(header);
  if (!out) throw FormatError("cannot write " + header.string());
  out << h.dump(2) << '\n';
  if (!out) throw FormatError("cannot write " + header.string());
}

FittedMethod load_model(const fs::path& header) {
  std::ifstream in(header);
  if (!in) throw FormatError("cannot open model " + header.string());
  json h = json::parse(in, nullptr, false);
  if (h.is_discarded() || !h.is_object()) throw FormatError(header.string() + " is not a JSON model header");
  try {
    if (h.at("format") != "edr-model") throw FormatError(header.string() + " is not an edr model");
    if (h.at("version").get<int>() != kVersion) throw FormatError("unsupported model version");
    FittedMethod f;
    f.config = parse_method_id(h.at("method").get<std::string>());
    f.d = h.at("d").get<std::size_t>();
    const json& payloads = h.at("payloads");
    if (payloads.contains("train")) f.train.y = read_payload(header, payloads, "train");
    const std::string kind = h.at("kind").get<std::string>();
    if (kind == "projection") {
      ProjectionModel p;
      p.method = parse_linear_method(f.config.method);
      p.feature_shape = Shape(h.at("feature_shape").get<std::vector<std::size_t>>());
      p.multiweight = h.at("multiweight").get<bool>();
      p.skip_first = h.at("skip_first").get<bool>();
      const auto slices = h.at("slices").get<std::size_t>();
      for (std::size_t r = 1; r <= slices; ++r) {
        p.projections.push_back(read_payload(header, payloads, "p" + std::to_string(r)));
        const std::string lam = "lambda" + std::to_string(r);
        if (payloads.contains(lam)) p.eigenvalues.push_back(to_vector(read_payload(header, payloads, lam), lam));
      }
      if (p.projections.empty()) throw FormatError("model has no projections");
      f.config.skip_first = p.skip_first;
      f.model = std::move(p);
    } else if (kind == "embedding") {
      EmbeddingModel m;
      const std::string e = h.at("embedding").get<std::string>();
      if (e != "le" && e != "lle") throw FormatError("unknown embedding kind " + e);
      m.kind = e == "le" ? EmbeddingKind::le : EmbeddingKind::lle;
      m.sigma = h.at("sigma").get<double>();
      m.k = h.at("k").get<std::size_t>();
      m.reg = h.at("reg").get<double>();
      m.skip_first = h.at("skip_first").get<bool>();
      m.y = read_payload(header, payloads, "y");
      if (payloads.contains("yhat")) m.y_hat = to_matrix(read_payload(header, payloads, "yhat"), "yhat");
      if (payloads.contains("lambda")) m.eigenvalues = to_vector(read_payload(header, payloads, "lambda"), "lambda");
      if (payloads.contains("degrees")) m.degrees = to_vector(read_payload(header, payloads, "degrees"), "degrees");
      if (m.kind == EmbeddingKind::le && (m.y_hat.size() == 0 || m.degrees.size() == 0))
        throw FormatError("Laplacian eigenmap model lacks its spectral payloads");
      m.train = read_payload(header, payloads, "samples");
      f.config.skip_first = m.skip_first;
      f.model = std::move(m);
    } else {
      throw FormatError("unknown model kind " + kind);
    }
    return f;
  } catch (const json::exception& e) {
    throw FormatError(header.string() + ": malformed model header (" + e.what() + ")");
  } catch (const ConfigError& e) {
    throw FormatError(header.string() + ": " + e.what());
  }
}

}  // namespace edr
