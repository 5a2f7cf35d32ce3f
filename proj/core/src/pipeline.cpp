#include "edr/pipeline.hpp"

#include <algorithm>

#include "edr/error.hpp"

namespace edr {

namespace {

constexpr std::size_t kDefaultNeighbours = 7;

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> names{"pca", "spca", "olpp", "onpp", "lpp",   "npp",   "le",
                                              "lle", "kpca", "klpp", "konpp", "kolpp", "baseline"};
  return names;
}

bool skip_default(const std::string& method) { return method == "le" || method == "lle"; }

Tensor slice_rows(const Tensor& y, std::size_t begin, std::size_t count) {
  const std::size_t d = y.extent(0);
  Tensor out(Shape{d, count});
  out.matrix(1) = y.matrix(1).middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count));
  return out;
}

}  // namespace

bool is_linear(const std::string& m) {
  return m == "pca" || m == "spca" || m == "olpp" || m == "onpp" || m == "lpp" || m == "npp";
}
bool is_kernel(const std::string& m) { return m == "kpca" || m == "klpp" || m == "konpp" || m == "kolpp"; }
bool uses_reconstruction(const std::string& m) { return m == "onpp" || m == "npp" || m == "lle" || m == "konpp"; }

MethodConfig parse_method_id(const std::string& id) {
  MethodConfig m;
  std::string base = id;
  std::transform(base.begin(), base.end(), base.begin(), [](unsigned char c) { return std::tolower(c); });
  if (base.size() > 3 && base.ends_with("-mw")) {
    m.multiweight = true;
    base.resize(base.size() - 3);
  } else if (base.size() > 2 && base.ends_with("-e")) {
    base.resize(base.size() - 2);
  }
  if (std::find(known_methods().begin(), known_methods().end(), base) == known_methods().end())
    throw ConfigError("unknown method '" + id + "'");
  if (m.multiweight && !(is_linear(base) && base != "pca" && base != "spca"))
    throw ConfigError("multi-weight variants exist for olpp, onpp, lpp and npp only, not '" + id + "'");
  m.method = base;
  return m;
}

std::string method_id(const MethodConfig& m) {
  if (m.method == "baseline") return m.method;
  return m.method + (m.multiweight ? "-mw" : "-e");
}

WeightKind weight_kind(const MethodConfig& m) {
  return m.graph.weights.value_or(uses_reconstruction(m.method) ? WeightKind::lle : WeightKind::gaussian);
}

WeightGraph build_graph(const MethodConfig& m, const Tensor& x, const std::vector<int>& labels) {
  const GraphConfig& g = m.graph;
  if ((g.supervised || g.repulsion) && labels.empty())
    throw ConfigError("supervised and repulsion graphs need labelled training data");
  Matrix d2 = pairwise_sq_dists(x);
  if (weight_kind(m) == WeightKind::lle) {
    if (!uses_reconstruction(m.method))
      throw ConfigError("reconstruction weights only apply to onpp, npp, lle and konpp");
    if (g.repulsion) throw ConfigError("repulsion applies to Gaussian weights only");
    const std::size_t k = g.k ? g.k : kDefaultNeighbours;
    if (g.supervised) {
      Matrix sep = class_separated_sq_dists(d2, labels, g.mu);
      return lle_weights(x, k, g.reg, &sep);
    }
    return lle_weights(x, k, g.reg, &d2);
  }
  WeightGraph w = gaussian_weights(d2, g.sigma, g.threshold);
  if (g.k && g.k < x.extent(x.order() - 1)) w = knn_sparsify(w, d2, g.k, g.mutual ? KnnMode::mutual : KnnMode::union_of);
  if (g.supervised) w = supervised_weights(w, labels);
  if (g.repulsion) {
    if (g.repulsion_k) {
      NeighborLists edges = knn_lists(d2, g.repulsion_k);
      w = combine_repulsion(w, repulsion_weights(labels, &edges), g.beta);
    } else {
      w = combine_repulsion(w, repulsion_weights(labels), g.beta);
    }
  }
  if (uses_reconstruction(m.method)) w = row_normalized(w);
  return w;
}

FittedMethod fit_method(const MethodConfig& m, const DataSet& train, std::size_t d, const DataSet* extra,
                        Embedding* extra_embedding) {
  FittedMethod f;
  f.config = m;
  f.d = d;
  const Tensor& x = train.x();
  const std::vector<int>& labels = train.labels();
  const bool skip = m.skip_first.value_or(skip_default(m.method));
  LinearOptions opt = m.linear;
  opt.skip_first = skip;

  if (m.method == "baseline") {
    Tensor y(Shape{train.feature_count(), train.size()});
    y.matrix(1) = train.flat();
    f.train = {std::move(y)};
    return f;
  }

  if (is_linear(m.method)) {
    ProjectionModel pm;
    if (m.method == "pca") {
      pm = fit_pca(x, d, opt);
    } else if (m.method == "spca") {
      pm = fit_spca(x, delta_label_kernel(train.require_labels("spca")), d, opt);
    } else if (m.multiweight) {
      const std::size_t slices = x.extent(x.order() - 2);
      std::vector<WeightGraph> graphs;
      for (std::size_t r = 1; r <= slices; ++r) graphs.push_back(build_graph(m, feature_slice(x, r), labels));
      pm = fit_multiweight(x, graphs, d, parse_linear_method(m.method), opt);
    } else {
      pm = fit_graph_method(parse_linear_method(m.method), x, build_graph(m, x, labels), d, opt);
    }
    f.train = transform(pm, x);
    f.model = std::move(pm);
    return f;
  }

  if (m.method == "le" || m.method == "lle") {
    WeightGraph w = build_graph(m, x, labels);
    EmbeddingModel em;
    if (m.method == "le") {
      em = fit_le(x, w, d, skip);
    } else {
      em = fit_lle(x, w, d, m.graph.reg);
      if (em.k == 0) em.k = m.graph.k ? m.graph.k : kDefaultNeighbours;
    }
    f.train = training_embedding(em);
    f.model = std::move(em);
    return f;
  }

  if (!is_kernel(m.method)) throw ConfigError("unknown method '" + m.method + "'");
  // Kernel fits see the extra samples too; their graph cannot use labels.
  if (extra && (m.graph.supervised || m.graph.repulsion))
    throw ConfigError(m.method + ": supervised graphs would read the labels of the embedded test samples");
  DataSet all = extra ? concat(train, *extra) : train;
  const Tensor& xa = all.x();
  Gram k = gram(xa, m.kernel);
  KernelFit kf;
  if (m.method == "kpca") {
    kf = fit_kpca(k, d);
  } else if (m.method == "kolpp") {
    kf = fit_kolpp(k, d, skip);
  } else {
    WeightGraph w = build_graph(m, xa, extra ? std::vector<int>{} : labels);
    kf = m.method == "klpp" ? fit_klpp(k, w, d, skip) : fit_konpp(k, w, d, skip);
  }
  f.train = {slice_rows(kf.embedding.y, 0, train.size())};
  if (extra) {
    if (!extra_embedding) throw ConfigError("kernel fit with extra samples needs somewhere to put their embedding");
    *extra_embedding = {slice_rows(kf.embedding.y, train.size(), extra->size())};
  }
  return f;
}

Embedding embed(const FittedMethod& f, const DataSet& data) {
  if (f.config.method == "baseline") {
    Tensor y(Shape{data.feature_count(), data.size()});
    y.matrix(1) = data.flat();
    return {std::move(y)};
  }
  if (const auto* pm = std::get_if<ProjectionModel>(&f.model)) return transform(*pm, data.x());
  if (const auto* em = std::get_if<EmbeddingModel>(&f.model))
    return em->kind == EmbeddingKind::le ? transform_le(*em, data.x()) : oos_lle(*em, data.x());
  throw ConfigError(f.config.method + " embeds only the samples it was fitted with");
}

Embedding truncate(const Embedding& e, std::size_t d) {
  const Tensor& y = e.y;
  const std::size_t full = y.extent(0);
  if (d < 1 || d > full) throw RangeError("truncate: d = " + std::to_string(d) + " out of range");
  const std::size_t cols = y.size() / full;
  Shape s = y.shape().with_extent(0, d);
  Tensor out(s);
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t i = 0; i < d; ++i) out[i + d * c] = y[i + full * c];
  return {std::move(out)};
}

FittedMethod truncate(const FittedMethod& f, std::size_t d) {
  FittedMethod out;
  out.config = f.config;
  out.d = d;
  if (f.config.method == "baseline") {
    out.train = f.train;
    return out;
  }
  out.train = truncate(f.train, d);
  if (const auto* pm = std::get_if<ProjectionModel>(&f.model))
    out.model = truncate(*pm, d);
  else if (const auto* em = std::get_if<EmbeddingModel>(&f.model))
    out.model = truncate(*em, d);
  return out;
}

}  // namespace edr
