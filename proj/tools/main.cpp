// edr: fit, transform, evaluate and sweep dimension-reduction methods from a
// JSON run config.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "edr/config.hpp"
#include "edr/data_io.hpp"
#include "edr/error.hpp"
#include "edr/evaluation.hpp"
#include "edr/log.hpp"
#include "edr/model_io.hpp"
#include "edr/oracle.hpp"
#include "edr/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitBreach = 1;
constexpr int kExitCellError = 2;
constexpr int kExitConfig = 64;
constexpr int kExitData = 65;
constexpr int kExitNumerical = 70;

struct Options {
  std::string config;
  std::string out;
  std::string model;
  std::string method;
  std::string dims;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

edr::RunConfig load(const Options& o) {
  edr::ConfigOverrides ov;
  if (!o.method.empty()) ov.method = o.method;
  if (!o.dims.empty()) ov.dims = edr::parse_dims(o.dims);
  ov.seed = o.seed;
  if (o.threads && *o.threads == 0) throw edr::ConfigError("--threads must be at least 1");
  ov.threads = o.threads;
  if (!o.out.empty()) ov.out = o.out;
  return edr::load_config(o.config, ov);
}

std::size_t single_dim(const edr::RunConfig& c) {
  if (c.dims.size() != 1) throw edr::ConfigError("this command needs exactly one d (set \"d\" or pass --d)");
  return c.dims.front();
}

const edr::MethodConfig& single_method(const edr::RunConfig& c) {
  if (c.methods.size() != 1) throw edr::ConfigError("this command needs exactly one method");
  return c.methods.front();
}

edr::Split make_split(const edr::DataSet& ds, const edr::RunConfig& c, std::uint64_t seed) {
  if (c.split.train == 0 || c.split.test == 0) throw edr::ConfigError("split.train and split.test are required");
  return edr::split(ds, {c.split.train, c.split.test, c.split.per_class, seed});
}

fs::path prepare_output(const edr::RunConfig& c, const std::string& name) {
  fs::create_directories(c.output.dir);
  return c.output.dir / name;
}

// Writes through a temporary so that a failed run leaves no partial file.
template <class Writer>
void write_atomically(const fs::path& path, Writer&& write) {
  fs::path tmp = path;
  tmp += ".partial";
  try {
    write(tmp);
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

std::string fmt(double v, int precision = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

int cmd_fit(const Options& o) {
  edr::RunConfig c = load(o);
  const edr::MethodConfig& m = single_method(c);
  const std::size_t d = single_dim(c);
  edr::DataSet ds = edr::load_data(c.data);
  edr::DataSet train = c.split.train > 0 ? make_split(ds, c, c.seeds.front()).train : ds;
  edr::FittedMethod f = edr::fit_method(m, train, d);
  const fs::path path = prepare_output(c, c.output.model);
  edr::save_model(path, f, c.source);
  std::cout << "fit " << edr::method_id(m) << " d=" << d << " n=" << train.size() << " -> " << path.string() << '\n';
  return 0;
}

int cmd_transform(const Options& o) {
  if (o.model.empty()) throw edr::ConfigError("transform needs --model");
  edr::RunConfig c = load(o);
  edr::FittedMethod f = edr::load_model(o.model);
  edr::DataSet ds = edr::load_data(c.data);
  edr::Embedding e = edr::embed(f, ds);
  const fs::path path = prepare_output(c, c.output.embedding);
  write_atomically(path, [&](const fs::path& p) { edr::write_eten(p, e.y); });
  fs::path meta = path;
  meta += ".json";
  write_atomically(meta, [&](const fs::path& p) {
    std::ofstream out(p);
    out << "{\"model\": \"" << fs::absolute(o.model).generic_string() << "\", \"method\": \"" << edr::method_id(f.config)
        << "\", \"shape\": \"" << e.y.shape().str() << "\", \"config\": " << c.source << "}\n";
    if (!out) throw edr::FormatError("cannot write " + p.string());
  });
  std::cout << "transform " << edr::method_id(f.config) << " n=" << ds.size() << " -> " << path.string() << '\n';
  return 0;
}

int cmd_eval(const Options& o) {
  edr::RunConfig c = load(o);
  if (c.methods.empty() || c.dims.empty()) throw edr::ConfigError("eval needs methods and dims");
  edr::DataSet ds = edr::load_data(c.data);
  for (const auto& m : c.methods) {
    const bool baseline = m.method == "baseline";
    for (std::size_t d : c.dims) {
      double sum = 0.0;
      for (std::uint64_t seed : c.seeds) {
        edr::Split s = make_split(ds, c, seed);
        sum += edr::evaluate(m, s.train, s.test, d);
      }
      std::cout << edr::method_id(m) << " d=" << (baseline ? 0 : d) << " ir=" << fmt(sum / static_cast<double>(c.seeds.size()))
                << '\n';
      if (baseline) break;
    }
  }
  return 0;
}

int cmd_sweep(const Options& o) {
  edr::RunConfig c = load(o);
  if (c.methods.empty() || c.dims.empty()) throw edr::ConfigError("sweep needs methods and dims");
  edr::DataSet ds = edr::load_data(c.data);
  std::vector<std::vector<edr::SweepResult>> runs;
  std::vector<edr::SweepResult> rows;
  for (std::uint64_t seed : c.seeds) {
    edr::Split s = make_split(ds, c, seed);
    runs.push_back(edr::sweep(c.methods, s.train, s.test, c.dims, {c.threads, c.timing, seed}));
    rows.insert(rows.end(), runs.back().begin(), runs.back().end());
  }
  const fs::path csv = prepare_output(c, c.output.csv);
  const fs::path svg = c.output.dir / c.output.svg;
  write_atomically(csv, [&](const fs::path& p) { edr::emit_csv(rows, p, c.timing); });
  write_atomically(svg, [&](const fs::path& p) { edr::emit_svg(edr::mean_over_runs(runs), p); });
  const bool failed = edr::any_failed(rows);
  std::cout << "sweep " << c.methods.size() << " methods x " << c.dims.size() << " dims x " << c.seeds.size()
            << " seeds -> " << csv.string() << (failed ? " (some cells failed)" : "") << '\n';
  return failed ? kExitCellError : 0;
}

int cmd_oracle_check(const Options& o) {
  edr::RunConfig c = load(o);
  if (c.methods.empty()) throw edr::ConfigError("oracle-check needs methods");
  edr::DataSet ds = edr::load_data(c.data);
  edr::Split s = make_split(ds, c, c.seeds.front());
  edr::DataSet train = s.train;
  if (c.oracle.subset > 0 && c.oracle.subset < train.size()) {
    std::vector<std::size_t> first(c.oracle.subset);
    for (std::size_t i = 0; i < first.size(); ++i) first[i] = i;
    train = train.subset(first);
  }
  std::size_t breaches = 0;
  std::printf("%-10s %4s %12s %12s %9s %12s  %s\n", "method", "d", "subspace", "embedding", "ir_delta", "residual",
              "status");
  for (const auto& m : c.methods) {
    for (std::size_t d : c.oracle.dims) {
      edr::oracle::OracleReport r = edr::oracle::check_method(m, train, s.test, d);
      const bool ok = r.subspace_distance <= c.oracle.max_subspace_distance && r.ir_delta <= c.oracle.max_ir_delta;
      breaches += !ok;
      std::printf("%-10s %4zu %12.3e %12.3e %9.2f %12.3e  %s\n", r.id.c_str(), d, r.subspace_distance,
                  r.embedding_distance, r.ir_delta, r.residual, ok ? "pass" : "FAIL");
    }
  }
  std::cout << "oracle-check " << (breaches ? std::to_string(breaches) + " breaches" : std::string("all pass")) << '\n';
  return breaches ? kExitBreach : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor dimension reduction: fit, transform, evaluate and sweep methods"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("--config", o.config, "JSON run config");
    if (needs_config) cfg->required();
    sub->add_option("--out", o.out, "Output directory (overrides output.dir)");
    sub->add_option("--seed", o.seed, "Seed (overrides seed/seeds)");
    sub->add_option("--threads", o.threads, "Sweep threads");
    sub->add_option("--method", o.method, "Method id, e.g. olpp-e or npp-mw");
    sub->add_option("--d", o.dims, "Dimension: 25, 5,10,15 or 5:40:5");
  };
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"fit", "Fit one method and save the model", cmd_fit},
      {"transform", "Embed the configured data with a saved model", cmd_transform},
      {"eval", "Report recognition rates on the configured split", cmd_eval},
      {"sweep", "Recognition rate over methods and dimensions (CSV and SVG)", cmd_sweep},
      {"oracle-check", "Compare tensor methods with the matrix reference", cmd_oracle_check},
  };
  std::vector<std::pair<CLI::App*, int (*)(const Options&)>> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    add_common(sub, true);
    if (std::string(cmd.name) == "transform") sub->add_option("--model", o.model, "Model header written by fit")->required();
    subs.emplace_back(sub, cmd.run);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    for (auto& [sub, run] : subs)
      if (sub->parsed()) return run(o);
  } catch (const edr::ConfigError& e) {
    edr::log::error(e.what());
    return kExitConfig;
  } catch (const edr::NumericalError& e) {
    edr::log::error(e.what());
    return kExitNumerical;
  } catch (const edr::Error& e) {
    edr::log::error(e.what());
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    edr::log::error(e.what());
    return kExitData;
  } catch (const std::exception& e) {
    edr::log::error(e.what());
    return kExitNumerical;
  }
  return 0;
}
