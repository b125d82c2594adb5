#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "irspla/errors.hpp"
#include "irspla/eval/experiment.hpp"

namespace irspla::eval {

/// Six-decimal fixed point; NaN prints as "nan".
inline std::string fixed6(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

inline constexpr const char* kResultsHeader = "sweep,method,train_acc,test_acc,seconds,epochs";

/// results.csv body. Wall time is only written when `with_wall_time` is
/// set; otherwise the column is zero so reruns produce identical bytes.
inline std::string results_csv(const std::vector<ResultRow>& rows, bool with_wall_time) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows)
    out += fixed6(r.sweep) + "," + r.method + "," + fixed6(r.train_acc) + "," + fixed6(r.test_acc) + "," +
           fixed6(with_wall_time ? r.seconds : 0.0) + "," + std::to_string(r.epochs) + "\n";
  return out;
}

struct EmitOptions {
  std::string axis = "sweep";
  bool with_wall_time = false;
};

namespace detail {
inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + p.string() + "' for writing");
  f << body;
  f.flush();
  if (!f) throw IoError("write to '" + p.string() + "' failed");
}
}  // namespace detail

/// Writes results.csv, one plot_<method>.dat per method (sweep value and
/// test accuracy, whitespace separated), timing.csv with measured wall
/// time and epoch_timing.csv with cumulative TDGCN epoch times. Failed rows
/// are listed in errors.txt. Returns the paths written.
inline std::vector<std::filesystem::path> emit_results(const std::vector<ResultRow>& rows,
                                                       const std::filesystem::path& out_dir,
                                                       const EmitOptions& opt = {}) {
  if (rows.empty()) throw ContractError("emit_results: no rows");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw IoError("cannot create output directory '" + out_dir.string() + "'");

  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& body) {
    detail::write_file(out_dir / name, body);
    written.push_back(out_dir / name);
  };
  emit("results.csv", results_csv(rows, opt.with_wall_time));

  std::vector<std::string> methods;
  for (const auto& r : rows)
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
  for (const auto& m : methods) {
    std::string body = "# " + opt.axis + " test_acc\n";
    for (const auto& r : rows)
      if (r.method == m && r.ok()) body += fixed6(r.sweep) + " " + fixed6(r.test_acc) + "\n";
    emit("plot_" + m + ".dat", body);
  }

  std::string timing = "sweep,method,seconds,epochs\n";
  std::string epochs = "sweep,method,epoch,cumulative_seconds\n";
  std::string errors;
  for (const auto& r : rows) {
    timing += fixed6(r.sweep) + "," + r.method + "," + fixed6(r.seconds) + "," + std::to_string(r.epochs) + "\n";
    for (std::size_t e = 0; e < r.epoch_seconds.size(); ++e)
      epochs += fixed6(r.sweep) + "," + r.method + "," + std::to_string(e + 1) + "," + fixed6(r.epoch_seconds[e]) + "\n";
    if (!r.ok()) errors += fixed6(r.sweep) + "," + r.method + ": " + r.error + "\n";
  }
  emit("timing.csv", timing);
  emit("epoch_timing.csv", epochs);
  if (!errors.empty()) emit("errors.txt", errors);
  return written;
}

}  // namespace irspla::eval
