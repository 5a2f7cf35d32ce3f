#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "edr/config.hpp"
#include "edr/error.hpp"
#include "edr/model_io.hpp"
#include "oracles.hpp"

using namespace edr;
namespace fs = std::filesystem;

namespace {

DataSet clusters(const Shape& features, std::size_t classes, std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = classes * per_class;
  Tensor x = edr::testing::random_tensor(features.concat(Shape{n}), rng);
  auto a = x.matrix(features.order());
  Matrix centres = edr::testing::random_matrix(a.rows(), static_cast<Eigen::Index>(classes), rng) * 3.0;
  std::vector<int> labels(n);
  for (std::size_t j = 0; j < n; ++j) {
    labels[j] = static_cast<int>(j % classes);
    a.col(static_cast<Eigen::Index>(j)) = 0.3 * a.col(static_cast<Eigen::Index>(j)) + centres.col(labels[j]);
  }
  return DataSet(x, labels);
}

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("edr_config_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Config, FullDocument) {
  const std::string text = R"({
    "methods": ["pca-e", {"id": "olpp-mw", "graph": {"k": 5}}, "lle-e"],
    "dims": [5, 10],
    "graph": {"supervised": true, "sigma": "auto", "repulsion": true, "beta": 0.5},
    "kernel": {"kind": "polynomial", "degree": 3},
    "seeds": [1, 2, 3],
    "threads": 2,
    "timing": true,
    "data": {"format": "idx", "images": "imgs.idx", "labels": "/abs/labels.idx"},
    "split": {"train": 10, "test": 5, "per_class": true},
    "output": {"dir": "out", "csv": "r.csv"},
    "oracle": {"dims": [3], "subset": 50}
  })";
  RunConfig c = parse_config(text, "/base");
  ASSERT_EQ(c.methods.size(), 3u);
  EXPECT_EQ(method_id(c.methods[0]), "pca-e");
  EXPECT_TRUE(c.methods[1].multiweight);
  EXPECT_EQ(c.methods[1].graph.k, 5u);
  EXPECT_TRUE(c.methods[1].graph.supervised);  // inherited
  EXPECT_TRUE(c.methods[1].graph.repulsion);
  EXPECT_DOUBLE_EQ(c.methods[1].graph.beta, 0.5);
  EXPECT_FALSE(c.methods[0].graph.sigma.has_value());
  EXPECT_EQ(c.methods[2].kernel.kind, KernelKind::polynomial);
  EXPECT_EQ(c.methods[2].kernel.degree, 3);
  EXPECT_EQ(c.dims, (std::vector<std::size_t>{5, 10}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(c.threads, 2u);
  EXPECT_TRUE(c.timing);
  EXPECT_EQ(c.data.images, fs::path("/base/imgs.idx"));
  EXPECT_EQ(c.data.labels, fs::path("/abs/labels.idx"));
  EXPECT_EQ(c.split.train, 10u);
  EXPECT_TRUE(c.split.per_class);
  EXPECT_EQ(c.output.dir, fs::path("/base/out"));
  EXPECT_EQ(c.output.csv, "r.csv");
  EXPECT_EQ(c.output.svg, "sweep.svg");
  EXPECT_EQ(c.oracle.dims, (std::vector<std::size_t>{3}));
  EXPECT_EQ(c.oracle.subset, 50u);
}

TEST(Config, SingleMethodAndDefaults) {
  RunConfig c = parse_config(R"({"method": "le", "d": 4, "seed": 9, "skip_first": false})");
  ASSERT_EQ(c.methods.size(), 1u);
  EXPECT_EQ(c.methods[0].skip_first, std::optional<bool>(false));
  EXPECT_EQ(c.dims, (std::vector<std::size_t>{4}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{9}));
  EXPECT_GE(c.threads, 1u);
  EXPECT_EQ(c.methods[0].graph.k, 7u);
  EXPECT_FALSE(c.methods[0].graph.weights.has_value());
  EXPECT_FALSE(c.methods[0].graph.repulsion);
  EXPECT_DOUBLE_EQ(c.methods[0].graph.beta, 1.0);
  EXPECT_FALSE(c.timing);
}

TEST(Config, LinearOptionsReachEveryMethod) {
  RunConfig c = parse_config(R"({"methods": ["olpp", {"id": "onpp"}], "multiweight": true, "linear": {"restrict_tol": 0.1}})");
  for (const auto& m : c.methods) EXPECT_DOUBLE_EQ(m.linear.restrict_tol, 0.1);
  EXPECT_DOUBLE_EQ(parse_config(R"({"method": "lpp"})").methods[0].linear.restrict_tol, 1e-10);
}

TEST(Config, GlobalMultiweightFlag) {
  RunConfig c = parse_config(R"({"methods": ["olpp", "npp"], "multiweight": true})");
  EXPECT_EQ(method_id(c.methods[0]), "olpp-mw");
  EXPECT_EQ(method_id(c.methods[1]), "npp-mw");
  EXPECT_THROW(parse_config(R"({"methods": ["pca"], "multiweight": true})"), ConfigError);
}

TEST(Config, Rejections) {
  const char* bad[] = {
      R"({"methods": ["pca"], )",                         // malformed
      R"([1, 2])",                                        // not an object
      R"({"mehtods": ["pca"]})",                          // unknown top-level key
      R"({"graph": {"sigam": 1.0}})",                     // unknown nested key
      R"({"methods": [{"id": "pca", "extra": 1}]})",      // unknown method key
      R"({"methods": ["nope"]})",                         // unknown method
      R"({"method": "pca", "methods": ["lpp"]})",         // both forms
      R"({"d": 0})",                                      // non-positive dims
      R"({"dims": [5, -1]})",
      R"({"seed": -3})",
      R"({"threads": 0})",
      R"({"graph": {"sigma": -1}})",
      R"({"graph": {"weights": "cosine"}})",
      R"({"kernel": {"kind": "rbf2"}})",
      R"({"data": {"format": "csv"}})",
      R"({"data": {"resize": [10]}})",
      R"({"split": {"train": "ten"}})",
      R"({"timing": "yes"})",
      R"({"linear": {"restrict_tol": 2}})",
      R"({"linear": {"tol": 0.1}})",
  };
  for (const char* text : bad) EXPECT_THROW(parse_config(text), ConfigError) << text;
}

TEST(Config, LoadResolvesAgainstFileFolder) {
  fs::path dir = temp_dir("load");
  {
    std::ofstream out(dir / "run.json");
    out << R"({"method": "pca", "data": {"format": "eten", "images": "x.eten"}})";
  }
  RunConfig c = load_config(dir / "run.json");
  EXPECT_EQ(c.data.images, dir / "x.eten");
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
}

TEST(Config, EtenDataSet) {
  fs::path dir = temp_dir("eten");
  DataSet ds = clusters(Shape{3, 2}, 2, 4, 1);
  write_eten(dir / "x.eten", ds.x());
  Tensor l(Shape{ds.size()});
  for (std::size_t i = 0; i < ds.size(); ++i) l[i] = ds.labels()[i];
  write_eten(dir / "y.eten", l);
  DataConfig dc;
  dc.format = "eten";
  dc.images = dir / "x.eten";
  dc.labels = dir / "y.eten";
  DataSet back = load_data(dc);
  EXPECT_EQ(back.labels(), ds.labels());
  EXPECT_EQ(back.feature_shape(), (Shape{3, 2}));
}

TEST(ModelIo, ProjectionRoundTrip) {
  fs::path dir = temp_dir("proj");
  DataSet train = clusters(Shape{4, 3}, 3, 6, 2);
  DataSet test = clusters(Shape{4, 3}, 3, 2, 3);
  for (const char* id : {"olpp-e", "npp-mw", "pca"}) {
    MethodConfig m = parse_method_id(id);
    m.graph.supervised = true;
    FittedMethod f = fit_method(m, train, 3);
    save_model(dir / "m.json", f, R"({"method": "x"})");
    FittedMethod g = load_model(dir / "m.json");
    EXPECT_EQ(method_id(g.config), method_id(f.config));
    EXPECT_EQ(g.d, f.d);
    EXPECT_EQ(g.train.y.shape(), f.train.y.shape());
    Embedding a = embed(f, test), b = embed(g, test);
    ASSERT_EQ(a.y.shape(), b.y.shape());
    EXPECT_EQ(edr::testing::max_abs(a.flat() - b.flat()), 0.0) << id;
  }
}

TEST(ModelIo, EmbeddingRoundTrip) {
  fs::path dir = temp_dir("emb");
  DataSet train = clusters(Shape{5}, 2, 15, 4);
  DataSet test = clusters(Shape{5}, 2, 3, 5);
  for (const char* id : {"le", "lle"}) {
    MethodConfig m = parse_method_id(id);
    m.graph.k = 8;
    FittedMethod f = fit_method(m, train, 2);
    save_model(dir / "e.json", f);
    FittedMethod g = load_model(dir / "e.json");
    Embedding a = embed(f, test), b = embed(g, test);
    EXPECT_EQ(edr::testing::max_abs(a.flat() - b.flat()), 0.0) << id;
  }
}

TEST(ModelIo, CorruptionDetected) {
  fs::path dir = temp_dir("bad");
  DataSet train = clusters(Shape{4}, 2, 5, 6);
  FittedMethod f = fit_method(parse_method_id("pca"), train, 2);
  save_model(dir / "m.json", f);
  {
    std::fstream io(dir / "m.p1.eten", std::ios::in | std::ios::out | std::ios::binary);
    io.seekp(-1, std::ios::end);
    io.put('\x7f');
  }
  EXPECT_THROW(load_model(dir / "m.json"), FormatError);
  {
    std::ofstream out(dir / "m.json");
    out << "{ not json";
  }
  EXPECT_THROW(load_model(dir / "m.json"), FormatError);
  EXPECT_THROW(save_model(dir / "k.json", fit_method(parse_method_id("baseline"), train, 2)), ConfigError);
}

TEST(Config, OverridesReplaceKeys) {
  ConfigOverrides ov;
  ov.method = "lpp-e";
  ov.dims = std::vector<std::size_t>{3, 6};
  ov.seed = 42;
  ov.threads = 3;
  ov.out = "results";
  RunConfig c = parse_config(R"({"methods": ["pca", "olpp"], "d": 9, "seeds": [1, 2], "graph": {"k": 4}})", "/base", ov);
  ASSERT_EQ(c.methods.size(), 1u);
  EXPECT_EQ(method_id(c.methods[0]), "lpp-e");
  EXPECT_EQ(c.methods[0].graph.k, 4u);
  EXPECT_EQ(c.dims, (std::vector<std::size_t>{3, 6}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{42}));
  EXPECT_EQ(c.threads, 3u);
  EXPECT_EQ(c.output.dir, fs::absolute("results"));
  EXPECT_NE(c.source.find("lpp-e"), std::string::npos);
  ConfigOverrides bad;
  bad.method = "nope";
  EXPECT_THROW(parse_config("{}", ".", bad), ConfigError);
}

TEST(Config, DimensionLists) {
  EXPECT_EQ(parse_dims("25"), (std::vector<std::size_t>{25}));
  EXPECT_EQ(parse_dims("5,10,15"), (std::vector<std::size_t>{5, 10, 15}));
  EXPECT_EQ(parse_dims("5:40:5").size(), 8u);
  EXPECT_EQ(parse_dims("5:40:5").back(), 40u);
  for (const char* bad : {"", "0", "-3", "5,x", "5:4:1", "1:2", "1:5:0", "3.5"})
    EXPECT_THROW(parse_dims(bad), ConfigError) << bad;
}
