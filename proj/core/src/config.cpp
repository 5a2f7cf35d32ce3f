#include "edr/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "edr/error.hpp"

namespace edr {

namespace {

using json = nlohmann::json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::size_t get_count(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  return v.get<std::size_t>();
}

std::uint64_t get_seed(const json& v, const std::string& where) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    throw ConfigError(where + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::optional<double> get_width(const json& v, const std::string& where) {
  if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
  if (!v.is_number() || !(v.get<double>() > 0.0)) throw ConfigError(where + " must be \"auto\" or a positive number");
  return v.get<double>();
}

void apply_graph(const json& j, GraphConfig& g, const std::string& where) {
  check_keys(j, where, {"weights", "sigma", "k", "mutual", "threshold", "supervised", "repulsion", "beta", "repulsion_k",
                       "mu", "reg"});
  if (j.contains("weights")) {
    auto w = get<std::string>(j, "weights", where);
    if (w == "gaussian") g.weights = WeightKind::gaussian;
    else if (w == "lle") g.weights = WeightKind::lle;
    else throw ConfigError(where + ".weights must be \"gaussian\" or \"lle\"");
  }
  if (j.contains("sigma")) g.sigma = get_width(j.at("sigma"), where + ".sigma");
  if (j.contains("k")) g.k = get_count(j, "k", where);
  if (j.contains("mutual")) g.mutual = get<bool>(j, "mutual", where);
  if (j.contains("threshold")) g.threshold = get<double>(j, "threshold", where);
  if (j.contains("supervised")) g.supervised = get<bool>(j, "supervised", where);
  if (j.contains("repulsion")) g.repulsion = get<bool>(j, "repulsion", where);
  if (j.contains("beta")) g.beta = get<double>(j, "beta", where);
  if (j.contains("repulsion_k")) g.repulsion_k = get_count(j, "repulsion_k", where);
  if (j.contains("mu")) g.mu = get<double>(j, "mu", where);
  if (j.contains("reg")) {
    g.reg = get<double>(j, "reg", where);
    if (!(g.reg > 0.0)) throw ConfigError(where + ".reg must be positive");
  }
}

void apply_kernel(const json& j, KernelSpec& k, const std::string& where) {
  check_keys(j, where, {"kind", "sigma", "degree", "offset", "slope"});
  if (j.contains("kind")) k.kind = parse_kernel_kind(get<std::string>(j, "kind", where));
  if (j.contains("sigma")) k.sigma = get_width(j.at("sigma"), where + ".sigma");
  if (j.contains("degree")) {
    k.degree = get<int>(j, "degree", where);
    if (k.degree < 1) throw ConfigError(where + ".degree must be at least 1");
  }
  if (j.contains("offset")) k.offset = get<double>(j, "offset", where);
  if (j.contains("slope")) k.slope = get<double>(j, "slope", where);
}

std::vector<std::size_t> get_dims(const json& v, const std::string& where) {
  std::vector<std::size_t> out;
  if (v.is_number_integer()) {
    out.push_back(v.get<std::size_t>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 1) throw ConfigError(where + " entries must be positive integers");
      out.push_back(e.get<std::size_t>());
    }
  } else {
    throw ConfigError(where + " must be an integer or a list of integers");
  }
  if (out.empty() || out.front() < 1) throw ConfigError(where + " must hold positive integers");
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base, const ConfigOverrides& ov) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (j.is_object()) {
    if (ov.method) {
      j.erase("methods");
      j["method"] = *ov.method;
    }
    if (ov.dims) {
      j.erase("d");
      j["dims"] = *ov.dims;
    }
    if (ov.seed) {
      j.erase("seeds");
      j["seed"] = *ov.seed;
    }
    if (ov.threads) j["threads"] = *ov.threads;
    if (ov.out) {
      if (!j.contains("output")) j["output"] = json::object();
      if (j["output"].is_object()) j["output"]["dir"] = std::filesystem::absolute(*ov.out).string();
    }
  }
  check_keys(j, "config", {"method", "methods", "d", "dims", "graph", "kernel", "linear", "multiweight", "skip_first", "seed",
                           "seeds", "threads", "timing", "data", "split", "output", "oracle"});
  RunConfig c;
  c.source = j.dump();
  c.output.dir = base;
  c.threads = std::max(1u, std::thread::hardware_concurrency());

  GraphConfig graph;
  KernelSpec kernel;
  LinearOptions linear;
  if (j.contains("linear")) {
    const json& l = j.at("linear");
    check_keys(l, "linear", {"restrict_tol", "ridge"});
    if (l.contains("restrict_tol")) linear.restrict_tol = get<double>(l, "restrict_tol", "linear");
    if (l.contains("ridge")) linear.ridge = get<double>(l, "ridge", "linear");
    if (!(linear.restrict_tol >= 0.0 && linear.restrict_tol < 1.0) || !(linear.ridge >= 0.0))
      throw ConfigError("linear.restrict_tol must lie in [0, 1) and linear.ridge must be non-negative");
  }
  if (j.contains("graph")) apply_graph(j.at("graph"), graph, "graph");
  if (j.contains("kernel")) apply_kernel(j.at("kernel"), kernel, "kernel");
  std::optional<bool> skip;
  if (j.contains("skip_first") && !j.at("skip_first").is_null()) skip = get<bool>(j, "skip_first", "config");
  const bool multiweight = j.contains("multiweight") && get<bool>(j, "multiweight", "config");

  if (j.contains("method") && j.contains("methods")) throw ConfigError("give either method or methods, not both");
  json list = json::array();
  if (j.contains("method")) list.push_back(j.at("method"));
  if (j.contains("methods")) {
    if (!j.at("methods").is_array()) throw ConfigError("methods must be a list");
    list = j.at("methods");
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& e = list[i];
    const std::string where = "methods[" + std::to_string(i) + "]";
    MethodConfig m;
    if (e.is_string()) {
      m = parse_method_id(e.get<std::string>());
      m.linear = linear;
      m.graph = graph;
      m.kernel = kernel;
      m.skip_first = skip;
    } else if (e.is_object()) {
      check_keys(e, where, {"id", "graph", "kernel", "skip_first", "multiweight"});
      if (!e.contains("id")) throw ConfigError(where + " needs an id");
      m = parse_method_id(get<std::string>(e, "id", where));
      m.linear = linear;
      m.graph = graph;
      m.kernel = kernel;
      m.skip_first = skip;
      if (e.contains("graph")) apply_graph(e.at("graph"), m.graph, where + ".graph");
      if (e.contains("kernel")) apply_kernel(e.at("kernel"), m.kernel, where + ".kernel");
      if (e.contains("skip_first") && !e.at("skip_first").is_null()) m.skip_first = get<bool>(e, "skip_first", where);
      if (e.contains("multiweight") && get<bool>(e, "multiweight", where)) m = [&] {
          MethodConfig mw = parse_method_id(m.method + "-mw");
          mw.graph = m.graph;
          mw.kernel = m.kernel;
          mw.linear = m.linear;
          mw.skip_first = m.skip_first;
          return mw;
        }();
    } else {
      throw ConfigError(where + " must be a method id or an object");
    }
    if (multiweight && !m.multiweight) {
      MethodConfig mw = parse_method_id(m.method + "-mw");
      mw.graph = m.graph;
      mw.kernel = m.kernel;
      mw.linear = m.linear;
      mw.skip_first = m.skip_first;
      m = mw;
    }
    c.methods.push_back(std::move(m));
  }

  if (j.contains("d") && j.contains("dims")) throw ConfigError("give either d or dims, not both");
  if (j.contains("d")) c.dims = get_dims(j.at("d"), "d");
  if (j.contains("dims")) c.dims = get_dims(j.at("dims"), "dims");

  if (j.contains("seed") && j.contains("seeds")) throw ConfigError("give either seed or seeds, not both");
  if (j.contains("seed")) c.seeds = {get_seed(j.at("seed"), "seed")};
  if (j.contains("seeds")) {
    if (!j.at("seeds").is_array() || j.at("seeds").empty()) throw ConfigError("seeds must be a non-empty list");
    c.seeds.clear();
    for (const auto& s : j.at("seeds")) c.seeds.push_back(get_seed(s, "seeds"));
  }
  if (j.contains("threads")) {
    c.threads = get_count(j, "threads", "config");
    if (c.threads == 0) throw ConfigError("threads must be at least 1");
  }
  if (j.contains("timing")) c.timing = get<bool>(j, "timing", "config");

  if (j.contains("data")) {
    const json& d = j.at("data");
    check_keys(d, "data", {"format", "images", "labels", "root", "color", "resize", "manifest"});
    if (d.contains("format")) c.data.format = get<std::string>(d, "format", "data");
    if (c.data.format != "idx" && c.data.format != "images" && c.data.format != "eten")
      throw ConfigError("data.format must be idx, images or eten");
    if (d.contains("images")) c.data.images = resolve(base, get<std::string>(d, "images", "data"));
    if (d.contains("labels")) c.data.labels = resolve(base, get<std::string>(d, "labels", "data"));
    if (d.contains("root")) c.data.root = resolve(base, get<std::string>(d, "root", "data"));
    if (d.contains("manifest")) c.data.manifest = resolve(base, get<std::string>(d, "manifest", "data"));
    if (d.contains("color")) {
      auto col = get<std::string>(d, "color", "data");
      if (col == "gray") c.data.color = ColorMode::gray;
      else if (col == "rgb") c.data.color = ColorMode::rgb;
      else throw ConfigError("data.color must be gray or rgb");
    }
    if (d.contains("resize")) {
      const json& r = d.at("resize");
      if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer() ||
          r[0].get<long long>() < 1 || r[1].get<long long>() < 1)
        throw ConfigError("data.resize must be [height, width]");
      c.data.resize = std::pair<std::size_t, std::size_t>{r[0].get<std::size_t>(), r[1].get<std::size_t>()};
    }
  }
  if (j.contains("split")) {
    const json& s = j.at("split");
    check_keys(s, "split", {"train", "test", "per_class"});
    if (s.contains("train")) c.split.train = get_count(s, "train", "split");
    if (s.contains("test")) c.split.test = get_count(s, "test", "split");
    if (s.contains("per_class")) c.split.per_class = get<bool>(s, "per_class", "split");
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "output", {"dir", "csv", "svg", "model", "embedding"});
    if (o.contains("dir")) c.output.dir = resolve(base, get<std::string>(o, "dir", "output"));
    if (o.contains("csv")) c.output.csv = get<std::string>(o, "csv", "output");
    if (o.contains("svg")) c.output.svg = get<std::string>(o, "svg", "output");
    if (o.contains("model")) c.output.model = get<std::string>(o, "model", "output");
    if (o.contains("embedding")) c.output.embedding = get<std::string>(o, "embedding", "output");
  }
  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    check_keys(o, "oracle", {"dims", "max_subspace_distance", "max_ir_delta", "subset"});
    if (o.contains("dims")) c.oracle.dims = get_dims(o.at("dims"), "oracle.dims");
    if (o.contains("max_subspace_distance")) c.oracle.max_subspace_distance = get<double>(o, "max_subspace_distance", "oracle");
    if (o.contains("max_ir_delta")) c.oracle.max_ir_delta = get<double>(o, "max_ir_delta", "oracle");
    if (o.contains("subset")) c.oracle.subset = get_count(o, "subset", "oracle");
  }
  return c;
}

std::vector<std::size_t> parse_dims(const std::string& text) {
  auto number = [&](const std::string& t) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(t, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != t.size() || v == 0 || t.front() == '-') throw ConfigError("bad dimension list '" + text + "'");
    return static_cast<std::size_t>(v);
  };
  std::vector<std::size_t> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("dimension range must be first:last:step");
    const std::size_t first = number(parts[0]), last = number(parts[1]), step = number(parts[2]);
    if (last < first) throw ConfigError("dimension range runs backwards");
    for (std::size_t d = first; d <= last; d += step) out.push_back(d);
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  if (out.empty()) throw ConfigError("empty dimension list");
  return out;
}

RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(), overrides);
}

DataSet load_data(const DataConfig& c) {
  if (!c.manifest.empty()) {
    Manifest m = read_manifest(c.manifest);
    verify_manifest(c.manifest.parent_path(), m);
  }
  if (c.format == "idx") {
    if (c.images.empty()) throw ConfigError("data.images is required for idx data");
    return load_idx(c.images, c.labels.empty() ? std::nullopt : std::optional<std::filesystem::path>(c.labels));
  }
  if (c.format == "images") {
    if (c.root.empty()) throw ConfigError("data.root is required for image directories");
    return load_image_dir(c.root, c.color, c.resize);
  }
  if (c.images.empty()) throw ConfigError("data.images is required for eten data");
  Tensor x = read_eten(c.images);
  std::vector<int> labels;
  if (!c.labels.empty()) {
    Tensor l = read_eten(c.labels);
    for (std::size_t i = 0; i < l.size(); ++i) labels.push_back(static_cast<int>(l[i]));
  }
  return DataSet(std::move(x), std::move(labels), "eten:" + c.images.filename().string());
}

}  // namespace edr
