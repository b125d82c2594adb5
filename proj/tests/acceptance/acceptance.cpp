// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Experiments use configs/desk.cfg.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "irspla/channel/channel_model.hpp"
#include "irspla/config.hpp"
#include "irspla/eval/experiment.hpp"
#include "irspla/tdgcn/gin.hpp"
#include "irspla/tdgcn/train.hpp"

namespace fs = std::filesystem;
using namespace irspla;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pct(double v) { return fmt("%.3f", v); }

int run_command(const std::string& cmd) {
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path work_dir() {
  static const fs::path p = [] {
    auto d = fs::temp_directory_path() / "irspla_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

std::string desk_path() { return std::string(IRSPLA_CONFIG_DIR) + "/desk.cfg"; }

eval::ExperimentConfig desk(const std::string& overrides) {
  auto text = slurp(desk_path()) + "\n" + overrides;
  return eval::ExperimentConfig::from_config(KeyValueConfig::parse(text), false);
}

std::vector<eval::ResultRow> sweep(const eval::ExperimentConfig& cfg) {
  return eval::run_sweep(cfg, [](const eval::ResultRow& r) {
    std::cerr << "  .. " << r.method << " @ " << r.sweep << ": test " << pct(r.test_acc)
              << (r.ok() ? "" : " error: " + r.error) << "\n";
  });
}

const eval::ResultRow* find_row(const std::vector<eval::ResultRow>& rows, const std::string& method, double v) {
  for (const auto& r : rows)
    if (r.method == method && r.sweep == v) return &r;
  return nullptr;
}

double row_acc(const std::vector<eval::ResultRow>& rows, const std::string& method, double v) {
  const auto* r = find_row(rows, method, v);
  return r && r->ok() ? r->test_acc : std::nan("");
}

bool all_ok(const std::vector<eval::ResultRow>& rows, std::string& why) {
  for (const auto& r : rows)
    if (!r.ok()) {
      why = r.method + " @ " + fmt("%g", r.sweep) + " failed: " + r.error;
      return false;
    }
  return true;
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
}

// Cumulative epoch times of the convergence run, reused by the timing check.
std::vector<double> g_epoch_seconds;

Verdict unit_suite() {
  const auto log = work_dir() / "unit.log";
  const int rc = run_command(std::string(IRSPLA_UNIT_TESTS_PATH) + " --gtest_brief=1 --gtest_filter=-GradientCheck.* > '" +
                             log.string() + "' 2>&1");
  auto text = slurp(log);
  auto summary = text.find("[  PASSED  ]");
  std::string detail = summary == std::string::npos ? "see " + log.string()
                                                     : text.substr(summary, text.find('\n', summary) - summary);
  if (rc != 0) std::cerr << text;
  return {rc == 0, detail};
}

Verdict gradient_suite() {
  const auto log = work_dir() / "gradient.log";
  const int rc = run_command(std::string(IRSPLA_UNIT_TESTS_PATH) + " --gtest_brief=1 --gtest_filter=GradientCheck.* > '" +
                             log.string() + "' 2>&1");
  auto text = slurp(log);
  if (rc != 0) std::cerr << text;
  auto summary = text.find("[  PASSED  ]");
  return {rc == 0, summary == std::string::npos ? "see " + log.string()
                                                : text.substr(summary, text.find('\n', summary) - summary)};
}

Verdict channel_statistics() {
  bool pass = true;
  std::string detail = "K:";
  Rng rng = make_rng(2024, 0);
  channel::ComplexMatrix los(1, 1);
  los(0, 0) = {0.6, 0.8};
  for (double kappa : {1.0, 3.0, 4.0, 10.0}) {
    const std::size_t n = 100000;
    std::vector<std::complex<double>> xs(n);
    std::complex<double> sum{};
    for (auto& x : xs) sum += x = channel::rician_channel(los, kappa, 0.0, 0.0, rng)(0, 0);
    const auto mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (const auto& x : xs) var += std::norm(x - mean);
    const double k = std::norm(mean) / (var / static_cast<double>(n));
    pass = pass && std::abs(k / kappa - 1.0) <= 0.05;
    detail += " " + fmt("%.3f", k);
  }
  detail += "; SNR dB:";
  std::normal_distribution<double> g(0.0, 1.0);
  for (double snr : {0.0, 15.0, 30.0}) {
    std::vector<double> clean(100000);
    for (auto& v : clean) v = 0.5 + g(rng);
    const auto noisy = channel::add_awgn(clean, snr, rng);
    double ps = 0.0, pn = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      ps += clean[i] * clean[i];
      pn += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
    }
    const double est = 10.0 * std::log10(ps / pn);
    pass = pass && std::abs(est - snr) <= 0.1;
    detail += " " + fmt("%.3f", est);
  }
  return {pass, detail};
}

Verdict gin_degeneracy() {
  using nn::Tensor;
  Rng rng = make_rng(77, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  auto gauss = [&](std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
  };
  double worst_static = 0.0, worst_perm = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(u(rng) * 20), f = 1 + static_cast<std::size_t>(u(rng) * 6);
    std::vector<double> a(n * n);
    for (auto& v : a) v = u(rng) < 0.3 ? 0.0 : u(rng);
    nn::ParamStore ps;
    auto mlp = tdgcn::Mlp::create(ps, "m", f, 8, 4, rng);
    const double eps = g(rng) * 0.3;
    auto h = Tensor::constant({n, f}, gauss(n * f));
    auto st = tdgcn::make_state({h}, {Tensor::constant({n, n}, a)});
    auto dyn = tdgcn::dyn_gin_layer(st, tdgcn::DynGinParams<tdgcn::Mlp>{Tensor::scalar(eps), mlp});
    auto ref = tdgcn::gin_layer_static(st.weights[0], h, eps, mlp);
    for (std::size_t i = 0; i < ref.size(); ++i)
      worst_static = std::max(worst_static, std::abs(dyn.features[0].values()[i] - ref.values()[i]));
  }
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5, f = 3, slots = 3;
    std::vector<std::size_t> perm{0, 1, 2, 3, 4};
    std::shuffle(perm.begin(), perm.end(), rng);
    nn::ParamStore ps;
    auto mlp = tdgcn::Mlp::create(ps, "m", f, 6, 4, rng);
    std::vector<Tensor> feats, adj, pfeats, padj;
    for (std::size_t s = 0; s < slots; ++s) {
      auto h = gauss(n * f);
      std::vector<double> a(n * n);
      for (auto& v : a) v = u(rng) < 0.3 ? 0.0 : u(rng);
      std::vector<double> ph(n * f), pa(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < f; ++k) ph[i * f + k] = h[perm[i] * f + k];
        for (std::size_t j = 0; j < n; ++j) pa[i * n + j] = a[perm[i] * n + perm[j]];
      }
      feats.push_back(Tensor::constant({n, f}, h));
      adj.push_back(Tensor::constant({n, n}, a));
      pfeats.push_back(Tensor::constant({n, f}, ph));
      padj.push_back(Tensor::constant({n, n}, pa));
    }
    tdgcn::DynGinParams<tdgcn::Mlp> p{Tensor::scalar(g(rng) * 0.3), mlp};
    auto out = tdgcn::dyn_gin_layer(tdgcn::make_state(feats, adj), p);
    auto pout = tdgcn::dyn_gin_layer(tdgcn::make_state(pfeats, padj), p);
    for (std::size_t s = 0; s < slots; ++s)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < 4; ++k)
          worst_perm = std::max(worst_perm, std::abs(pout.features[s].at(i, k) - out.features[s].at(perm[i], k)));
  }
  return {worst_static <= 1e-10 && worst_perm <= 1e-10,
          "max |dyn - static| " + fmt("%.2e", worst_static) + ", max permutation error " + fmt("%.2e", worst_perm)};
}

Verdict desk_convergence() {
  auto cfg = desk("experiment.snr_db = 30\n");
  auto [train, test] = eval::build_split(cfg, 30.0);
  auto tc = cfg.train;
  tc.epochs = 50;
  tc.seed = derive_seed(cfg.seed, 3);
  tc.eval_each_epoch = true;
  std::size_t first_hit = 0;
  auto res = tdgcn::train(train, tc, cfg.model, &test, [&](const tdgcn::EpochLog& e) {
    std::cerr << "  .. epoch " << e.epoch << " loss " << fmt("%.4f", e.train_loss) << " test " << pct(e.test_acc)
              << "\n";
    if (!first_hit && e.test_acc >= 0.90) first_hit = e.epoch;
  });
  bool decreasing = res.log.size() >= 10;
  for (std::size_t i = 1; i < std::min<std::size_t>(10, res.log.size()); ++i)
    decreasing = decreasing && res.log[i].train_loss < res.log[i - 1].train_loss;
  double best = 0.0;
  for (const auto& e : res.log) {
    best = std::max(best, e.test_acc);
    g_epoch_seconds.push_back(e.seconds);
  }
  std::string detail = std::string("loss strictly decreasing over epochs 1-10: ") + (decreasing ? "yes" : "no") +
                       "; loss " + fmt("%.4f", res.log.front().train_loss) + " -> " +
                       fmt("%.4f", res.log[std::min<std::size_t>(9, res.log.size() - 1)].train_loss) +
                       " at epoch 10; best test " + pct(best) +
                       (first_hit ? ", >= 0.90 first at epoch " + std::to_string(first_hit) : "");
  return {decreasing && first_hit != 0, detail};
}

Verdict irs_ablation() {
  auto cfg = eval::ExperimentConfig::from_config(
      KeyValueConfig::parse(slurp(desk_path()) +
                            "\nexperiment.snr_db = 15\nexperiment.methods = tdgcn\nsweep.axis = irs\nsweep.values = on, off\n"),
      true);
  const auto rows = sweep(cfg);
  std::string why;
  if (!all_ok(rows, why)) return {false, why};
  const double on = row_acc(rows, "tdgcn", 1.0), off = row_acc(rows, "tdgcn", 0.0);
  return {on - off >= 0.05, "with IRS " + pct(on) + ", without " + pct(off) + ", gap " + fmt("%.1f", 100 * (on - off)) +
                                " points"};
}

std::vector<eval::ResultRow> g_snr_rows;

Verdict baseline_dominance() {
  auto cfg = eval::ExperimentConfig::from_config(
      KeyValueConfig::parse(slurp(desk_path()) + "\nsweep.axis = snr\nsweep.values = 0, 10, 15, 20, 30\n"), true);
  g_snr_rows = sweep(cfg);
  std::string why;
  if (!all_ok(g_snr_rows, why)) return {false, why};
  bool pass = true;
  std::string detail;
  for (double snr : {0.0, 10.0, 15.0}) {
    const double t = row_acc(g_snr_rows, "tdgcn", snr);
    detail += fmt("%g dB", snr) + ": tdgcn " + pct(t);
    for (const char* m : {"knn", "dt", "nb"}) {
      const double b = row_acc(g_snr_rows, m, snr);
      pass = pass && t >= b;
      detail += std::string(" ") + m + " " + pct(b);
    }
    if (snr != 15.0) detail += "; ";
  }
  return {pass, detail};
}

Verdict snr_monotonicity() {
  if (g_snr_rows.empty()) return {false, "SNR sweep did not run"};
  std::vector<double> acc;
  for (double snr : {0.0, 10.0, 20.0, 30.0}) acc.push_back(row_acc(g_snr_rows, "tdgcn", snr));
  std::size_t inversions = 0;
  double worst_drop = 0.0;
  for (std::size_t i = 1; i < acc.size(); ++i) {
    if (!(acc[i] >= acc[i - 1])) {
      ++inversions;
      worst_drop = std::max(worst_drop, acc[i - 1] - acc[i]);
    }
  }
  const bool pass = inversions == 0 || (inversions == 1 && worst_drop <= 0.02 + 1e-12);
  return {pass, "tdgcn at 0/10/20/30 dB: " + pct(acc[0]) + " " + pct(acc[1]) + " " + pct(acc[2]) + " " + pct(acc[3]) +
                    ", inversions " + std::to_string(inversions)};
}

Verdict distance_speed() {
  auto base = slurp(desk_path()) + "\nexperiment.methods = tdgcn\n";
  auto spacing_cfg =
      eval::ExperimentConfig::from_config(KeyValueConfig::parse(base + "sweep.axis = spacing\nsweep.values = 2, 1\n"));
  auto speed_cfg =
      eval::ExperimentConfig::from_config(KeyValueConfig::parse(base + "sweep.axis = speed\nsweep.values = 2, 8\n"));
  const auto spacing = sweep(spacing_cfg);
  const auto speed = sweep(speed_cfg);
  std::string why;
  if (!all_ok(spacing, why) || !all_ok(speed, why)) return {false, why};
  const double s2 = row_acc(spacing, "tdgcn", 2.0), s1 = row_acc(spacing, "tdgcn", 1.0);
  const double v2 = row_acc(speed, "tdgcn", 2.0), v8 = row_acc(speed, "tdgcn", 8.0);
  const bool pass = s1 <= s2 + 0.02 && v8 <= v2 + 0.02;
  return {pass, "spacing 2 m " + pct(s2) + " vs 1 m " + pct(s1) + "; speed 2 m/s " + pct(v2) + " vs 8 m/s " + pct(v8)};
}

Verdict determinism() {
  const auto dir = work_dir() / "determinism";
  fs::create_directories(dir);
  const auto cfg = dir / "sweep.cfg";
  std::ofstream(cfg) << slurp(desk_path())
                     << "\nexperiment.per_class = 40\ntrain.epochs = 4\nsweep.axis = snr\nsweep.values = 0, 30\n";
  std::string outs[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = dir / ("run" + std::to_string(i));
    const int rc = run_command(std::string(IRSPLA_CLI_PATH) + " sweep --quiet --config '" + cfg.string() + "' --out '" +
                               out.string() + "' > '" + (dir / "stdout.txt").string() + "' 2>&1");
    if (rc != 0) return {false, "sweep exited with " + std::to_string(rc) + ": " + slurp(dir / "stdout.txt")};
    outs[i] = out.string();
  }
  bool identical = true;
  for (const char* f : {"results.csv", "plot_tdgcn.dat", "plot_knn.dat", "plot_dt.dat", "plot_nb.dat"})
    identical = identical && slurp(fs::path(outs[0]) / f) == slurp(fs::path(outs[1]) / f) &&
                !slurp(fs::path(outs[0]) / f).empty();
  std::vector<double> epochs;
  for (std::size_t i = 0; i < g_epoch_seconds.size(); ++i) epochs.push_back(static_cast<double>(i + 1));
  if (epochs.size() < 3) return {false, "no epoch timings recorded"};
  const double r2 = r_squared(epochs, g_epoch_seconds);
  return {identical && r2 >= 0.95, std::string("results.csv and plot files byte-identical: ") + (identical ? "yes" : "no") +
                                       "; cumulative epoch time vs epoch R^2 " + fmt("%.4f", r2) + " over " +
                                       std::to_string(epochs.size()) + " epochs"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 = no runtime bound
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "oracle/unit suite", 60, unit_suite},
      {2, "gradient integrity", 120, gradient_suite},
      {3, "channel statistics", 60, channel_statistics},
      {4, "dynamic GIN degeneracy", 0, gin_degeneracy},
      {5, "desk-scale convergence", 600, desk_convergence},
      {6, "IRS ablation trend", 1200, irs_ablation},
      {7, "baseline dominance", 1800, baseline_dominance},
      {8, "SNR monotonicity", 0, snr_monotonicity},
      {9, "distance/speed trends", 0, distance_speed},
      {10, "determinism and epoch timing", 0, determinism},
  };
  int failures = 0;
  std::vector<std::string> lines;
  for (const auto& c : criteria) {
    std::cerr << "[" << c.id << "] " << c.name << " ...\n";
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.limit_s > 0 && secs >= c.limit_s) {
      v.pass = false;
      v.detail += "; exceeded " + fmt("%.0f", c.limit_s) + " s";
    }
    failures += !v.pass;
    std::string line = std::string(v.pass ? "PASS" : "FAIL") + " " + std::to_string(c.id) + " " + c.name + " (" +
                       fmt("%.1f", secs) + " s): " + v.detail;
    std::cout << line << std::endl;
    lines.push_back(line);
  }
  std::cout << "\nSummary\n";
  for (const auto& l : lines) std::cout << l.substr(0, l.find(':')) << "\n";
  std::cout << (failures ? std::to_string(failures) + " criterion(s) failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}
