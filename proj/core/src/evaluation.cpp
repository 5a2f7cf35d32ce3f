#include "edr/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "edr/error.hpp"
#include "edr/log.hpp"

namespace edr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string shortest(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& what) {
  if (s == "nan") return kNaN;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("bad " + what + " value '" + s + "'");
  return v;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SweepResult run_method(const MethodConfig& m, const DataSet& train, const DataSet& test,
                       const std::vector<std::size_t>& dims, std::uint64_t seed) {
  SweepResult r;
  r.method = method_id(m);
  r.seed = seed;
  const auto& truth = test.require_labels("sweep");
  const auto& train_labels = train.require_labels("sweep");

  if (m.method == "baseline") {
    auto t0 = std::chrono::steady_clock::now();
    SweepCell c;
    try {
      c.ir = recognition_rate(nn_classify(train.flat(), train_labels, test.flat()), truth);
    } catch (const std::exception& e) {
      c.ir = kNaN;
      c.error = e.what();
    }
    c.seconds = seconds_since(t0);
    r.cells.push_back(c);
    return r;
  }

  const std::size_t dmax = dims.back();
  auto t0 = std::chrono::steady_clock::now();
  FittedMethod full;
  Embedding test_full;
  std::string fit_error;
  try {
    full = fit_method(m, train, dmax, is_kernel(m.method) ? &test : nullptr, &test_full);
  } catch (const std::exception& e) {
    fit_error = e.what();
  }
  const double fit_seconds = seconds_since(t0) / static_cast<double>(dims.size());

  for (std::size_t d : dims) {
    SweepCell c;
    c.d = d;
    auto t1 = std::chrono::steady_clock::now();
    try {
      FittedMethod f;
      Embedding te;
      if (fit_error.empty()) {
        f = truncate(full, d);
        te = is_kernel(m.method) ? truncate(test_full, d) : Embedding{};
      } else {
        // The largest d did not fit; smaller ones may.
        f = fit_method(m, train, d, is_kernel(m.method) ? &test : nullptr, &te);
      }
      if (!is_kernel(m.method)) te = embed(f, test);
      c.ir = recognition_rate(nn_classify(f.train.flat(), train_labels, te.flat()), truth);
    } catch (const std::exception& e) {
      c.ir = kNaN;
      c.error = e.what();
    }
    c.seconds = fit_seconds + seconds_since(t1);
    if (!c.error.empty()) log::warn(r.method + " d=" + std::to_string(d) + ": " + c.error);
    r.cells.push_back(std::move(c));
  }
  return r;
}

}  // namespace

std::vector<int> nn_classify(const Matrix& train, std::span<const int> train_labels, const Matrix& test) {
  if (train.cols() == 0) throw RangeError("nn_classify: empty training set");
  if (static_cast<std::size_t>(train.cols()) != train_labels.size())
    throw ShapeError("nn_classify: training labels do not match the training samples");
  if (train.rows() != test.rows())
    throw ShapeError("nn_classify: embedding dimensions differ (" + std::to_string(train.rows()) + " vs " +
                     std::to_string(test.rows()) + ")");
  std::vector<int> out(static_cast<std::size_t>(test.cols()));
  for (Eigen::Index t = 0; t < test.cols(); ++t) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < train.cols(); ++i) {
      const double dist = (train.col(i) - test.col(t)).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = i;
      }
    }
    out[static_cast<std::size_t>(t)] = train_labels[static_cast<std::size_t>(best)];
  }
  return out;
}

double recognition_rate(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ShapeError("recognition_rate: lengths differ");
  if (truth.empty()) throw RangeError("recognition_rate: no samples");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) ok += predicted[i] == truth[i];
  return 100.0 * static_cast<double>(ok) / static_cast<double>(truth.size());
}

double evaluate(const MethodConfig& m, const DataSet& train, const DataSet& test, std::size_t d) {
  const auto& truth = test.require_labels("evaluate");
  const auto& train_labels = train.require_labels("evaluate");
  if (m.method == "baseline") return recognition_rate(nn_classify(train.flat(), train_labels, test.flat()), truth);
  Embedding te;
  FittedMethod f = fit_method(m, train, d, is_kernel(m.method) ? &test : nullptr, &te);
  if (!is_kernel(m.method)) te = embed(f, test);
  return recognition_rate(nn_classify(f.train.flat(), train_labels, te.flat()), truth);
}

std::vector<SweepResult> sweep(const std::vector<MethodConfig>& methods, const DataSet& train, const DataSet& test,
                               std::vector<std::size_t> dims, const SweepOptions& opt) {
  if (dims.empty()) throw ConfigError("sweep needs at least one dimension");
  std::sort(dims.begin(), dims.end());
  if (std::adjacent_find(dims.begin(), dims.end()) != dims.end()) throw ConfigError("sweep dimensions repeat");
  if (dims.front() < 1) throw ConfigError("sweep dimensions must be positive");
  if (test.empty()) throw ConfigError("sweep needs test samples");

  std::vector<SweepResult> results(methods.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < methods.size(); i = next++)
      results[i] = run_method(methods[i], train, test, dims, opt.seed);
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(opt.threads, methods.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return results;
}

bool any_failed(const std::vector<SweepResult>& results) {
  for (const auto& r : results)
    for (const auto& c : r.cells)
      if (!c.error.empty()) return true;
  return false;
}

std::string format_csv(const std::vector<SweepResult>& results, bool timing) {
  std::ostringstream out;
  out << "method,d,ir,seconds,seed\n";
  for (const auto& r : results)
    for (const auto& c : r.cells)
      out << r.method << ',' << c.d << ',' << shortest(c.ir) << ',' << (timing ? shortest(c.seconds) : "") << ','
          << r.seed << '\n';
  return out.str();
}

void emit_csv(const std::vector<SweepResult>& results, const std::filesystem::path& path, bool timing) {
  if (results.empty()) throw ConfigError("emit_csv: no results");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << format_csv(results, timing);
  if (!out) throw FormatError("write failed for " + path.string());
}

std::vector<SweepResult> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "method,d,ir,seconds,seed")
    throw FormatError(path.string() + ": missing method,d,ir,seconds,seed header");
  std::vector<SweepResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 5) throw FormatError(path.string() + ": expected 5 fields in '" + line + "'");
    SweepCell c;
    c.d = static_cast<std::size_t>(parse_double(f[1], "d"));
    c.ir = parse_double(f[2], "ir");
    c.seconds = f[3].empty() ? 0.0 : parse_double(f[3], "seconds");
    const auto seed = static_cast<std::uint64_t>(std::stoull(f[4]));
    if (out.empty() || out.back().method != f[0] || out.back().seed != seed) out.push_back({f[0], seed, {}});
    out.back().cells.push_back(c);
  }
  return out;
}

void emit_svg(const std::vector<SweepResult>& results, const std::filesystem::path& path, const std::string& title) {
  if (results.empty()) throw ConfigError("emit_svg: no results");
  const double W = 800, H = 500, left = 70, right = 170, top = 50, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin;
  for (const auto& r : results)
    for (const auto& c : r.cells) {
      dmin = std::min(dmin, static_cast<double>(c.d));
      dmax = std::max(dmax, static_cast<double>(c.d));
    }
  if (dmax <= dmin) {
    dmin -= 1;
    dmax += 1;
  }
  auto sx = [&](double d) { return left + (d - dmin) / (dmax - dmin) * pw; };
  auto sy = [&](double ir) { return top + (1.0 - ir / 100.0) * ph; };
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
  o << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">" << escape_xml(title)
    << "</text>\n";
  o << "<g stroke=\"black\"><line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
    << top + ph << "\"/><line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
    << "\"/></g>\n";
  o << "<g font-size=\"12\" text-anchor=\"middle\">\n";
  for (int t = 0; t <= 5; ++t) {
    const double d = dmin + (dmax - dmin) * t / 5.0;
    o << "<text x=\"" << sx(d) << "\" y=\"" << top + ph + 18 << "\">" << shortest(std::round(d * 10) / 10) << "</text>\n";
  }
  o << "</g>\n<g font-size=\"12\" text-anchor=\"end\">\n";
  for (int t = 0; t <= 5; ++t)
    o << "<text x=\"" << left - 8 << "\" y=\"" << sy(20.0 * t) + 4 << "\">" << 20 * t << "</text>\n";
  o << "</g>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"14\">"
    << "subspace dimension d</text>\n";
  o << "<text transform=\"translate(20 " << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"14\">"
    << "recognition rate (%)</text>\n";

  for (std::size_t i = 0; i < results.size(); ++i) {
    const char* colour = colours[i % std::size(colours)];
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& c : results[i].cells) {
      if (std::isnan(c.ir)) continue;
      o << (first ? "" : " ") << sx(static_cast<double>(c.d)) << ',' << sy(c.ir);
      first = false;
    }
    o << "\"/>\n";
    const double ly = top + 10 + 20.0 * static_cast<double>(i);
    o << "<line x1=\"" << W - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 40 << "\" y2=\"" << ly
      << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << W - right + 46 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
      << escape_xml(results[i].method) << "</text>\n";
  }
  o << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << o.str();
  if (!out) throw FormatError("write failed for " + path.string());
}

std::vector<SweepResult> mean_over_runs(const std::vector<std::vector<SweepResult>>& runs) {
  if (runs.empty()) return {};
  std::vector<SweepResult> mean = runs.front();
  for (std::size_t m = 0; m < mean.size(); ++m) {
    for (std::size_t c = 0; c < mean[m].cells.size(); ++c) {
      double ir = 0.0, sec = 0.0;
      for (const auto& run : runs) {
        if (run.size() != mean.size() || run[m].cells.size() != mean[m].cells.size() ||
            run[m].cells[c].d != mean[m].cells[c].d)
          throw ShapeError("mean_over_runs: sweeps have different layouts");
        ir += run[m].cells[c].ir;
        sec += run[m].cells[c].seconds;
      }
      mean[m].cells[c].ir = ir / static_cast<double>(runs.size());
      mean[m].cells[c].seconds = sec / static_cast<double>(runs.size());
    }
  }
  return mean;
}

}  // namespace edr
