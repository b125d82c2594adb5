// Command-line front end: dataset generation, training, evaluation,
// baselines and sweeps. Results go to stdout as JSON; failures print one
// JSON error line on stderr and exit with status 1.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "irspla/config.hpp"
#include "irspla/errors.hpp"
#include "irspla/eval/experiment.hpp"
#include "irspla/eval/metrics.hpp"
#include "irspla/eval/report.hpp"
#include "irspla/fingerprint/csif.hpp"
#include "irspla/nn/checkpoint.hpp"
#include "irspla/tdgcn/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace irspla;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string snr_db;
  std::string out;
};

KeyValueConfig load_kv(const Common& c) { return c.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(c.config); }

eval::ExperimentConfig experiment(const Common& c, bool require_sweep) {
  auto kv = load_kv(c);
  if (c.seed) kv.set("experiment.seed", std::to_string(*c.seed));
  if (!c.snr_db.empty()) {
    KeyValueConfig::parse_double(c.snr_db, "--snr-db");
    kv.set("experiment.snr_db", c.snr_db);
    if (!require_sweep) kv.set("sweep.values", c.snr_db);
  }
  if (!c.out.empty()) kv.set("experiment.out_dir", c.out);
  return eval::ExperimentConfig::from_config(kv, require_sweep);
}

fs::path out_dir(const Common& c, const std::string& fallback) {
  fs::path p = c.out.empty() ? fs::path(fallback) : fs::path(c.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw IoError("cannot create output directory '" + p.string() + "'");
  return p;
}

json metrics_json(const std::vector<std::size_t>& actual, const std::vector<std::size_t>& predicted, std::size_t k) {
  const auto cm = eval::confusion_matrix(actual, predicted, k);
  json rows = json::array();
  for (std::size_t i = 0; i < k; ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < k; ++j) r.push_back(cm(i, j));
    rows.push_back(r);
  }
  return {{"accuracy", eval::accuracy(actual, predicted)}, {"samples", actual.size()}, {"confusion", rows}};
}

int cmd_generate(const Common& c, bool csv) {
  const auto cfg = experiment(c, false);
  auto [train, test] = eval::build_split(cfg, cfg.values.front());
  const auto dir = out_dir(c, cfg.out_dir);
  fingerprint::write_dataset(train, (dir / "train.csif").string());
  fingerprint::write_dataset(test, (dir / "test.csif").string());
  if (csv) {
    std::ofstream(dir / "train.csv") << fingerprint::dataset_to_csv(train);
    std::ofstream(dir / "test.csv") << fingerprint::dataset_to_csv(test);
  }
  std::cout << json{{"command", "generate"},
                    {"train", (dir / "train.csif").string()},
                    {"test", (dir / "test.csif").string()},
                    {"train_sequences", train.size()},
                    {"test_sequences", test.size()},
                    {"d", train.d},
                    {"l", train.l},
                    {"snr_db", cfg.values.front()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_train(const Common& c, const std::string& data, const std::string& test_data) {
  const auto kv = load_kv(c);
  auto tc = tdgcn::TrainConfig::from_config(kv);
  if (c.seed) tc.seed = *c.seed;
  const auto arch = tdgcn::TdgcnConfig::from_config(kv, {});
  const auto train = fingerprint::read_dataset(data);
  std::optional<fingerprint::LabeledDataset> test;
  if (!test_data.empty()) test = fingerprint::read_dataset(test_data);
  tc.eval_each_epoch = test.has_value();
  const auto dir = out_dir(c, "model");
  std::string log = "epoch,train_loss,train_acc,test_acc,seconds\n";
  auto res = tdgcn::train(train, tc, arch, test ? &*test : nullptr, [&](const tdgcn::EpochLog& e) {
    log += std::to_string(e.epoch) + "," + eval::fixed6(e.train_loss) + "," + eval::fixed6(e.train_acc) + "," +
           eval::fixed6(e.test_acc) + "," + eval::fixed6(e.seconds) + "\n";
    std::cerr << "epoch " << e.epoch << " loss " << e.train_loss << " train_acc " << e.train_acc << "\n";
  });
  nn::write_checkpoint(res.model.to_checkpoint(), (dir / "model.ntb").string());
  std::ofstream(dir / "train_log.csv") << log;
  const auto& last = res.log.back();
  json out{{"command", "train"},
           {"checkpoint", (dir / "model.ntb").string()},
           {"epochs", res.log.size()},
           {"train_loss", last.train_loss},
           {"train_acc", last.train_acc}};
  if (test) out["test_acc"] = last.test_acc;
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint, const std::string& data) {
  const auto model = tdgcn::TdgcnModel::from_checkpoint(nn::read_checkpoint(checkpoint));
  const auto ds = fingerprint::read_dataset(data);
  std::vector<std::size_t> predicted;
  for (const auto& s : ds.sequences) predicted.push_back(model.predict(s));
  auto out = metrics_json(ds.labels(), predicted, ds.n_classes);
  out["command"] = "eval";
  out["method"] = "tdgcn";
  if (!c.out.empty()) std::ofstream(out_dir(c, c.out) / "metrics.json") << out.dump(2) << "\n";
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_baseline(const Common& c, const std::string& method, const std::string& data, const std::string& test_data) {
  auto cfg = experiment(c, false);
  const auto train = fingerprint::read_dataset(data);
  const auto test = fingerprint::read_dataset(test_data);
  auto row = eval::run_method(cfg, method, train, test);
  json out{{"command", "baseline"}, {"method", method}, {"train_acc", row.train_acc}, {"test_acc", row.test_acc},
           {"seconds", row.seconds}};
  if (!c.out.empty()) std::ofstream(out_dir(c, c.out) / ("metrics_" + method + ".json")) << out.dump(2) << "\n";
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_sweep(const Common& c, bool wall_time, bool quiet) {
  auto cfg = experiment(c, true);
  if (wall_time) cfg.record_wall_time = true;
  const auto rows = eval::run_sweep(cfg, [&](const eval::ResultRow& r) {
    if (quiet) return;
    json j{{"sweep", r.sweep}, {"method", r.method}, {"train_acc", r.train_acc}, {"test_acc", r.test_acc}};
    if (!r.ok()) j["error"] = r.error;
    std::cerr << j.dump() << "\n";
  });
  const auto files = eval::emit_results(rows, cfg.out_dir, {eval::axis_name(cfg.axis), cfg.record_wall_time});
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.ok();
  json out{{"command", "sweep"}, {"axis", eval::axis_name(cfg.axis)}, {"rows", rows.size()}, {"failed", failed}};
  out["files"] = json::array();
  for (const auto& f : files) out["files"].push_back(f.string());
  std::cout << out.dump() << "\n";
  return 0;
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-assisted CSI fingerprint authentication workbench"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "master seed (overrides the configuration)");
    sub->add_option("--snr-db", common.snr_db, "SNR in dB, or inf for no noise");
    sub->add_option("--out", common.out, "output directory");
  };

  bool csv = false;
  auto* gen = app.add_subcommand("generate", "synthesise train/test CSIF datasets");
  add_common(gen);
  gen->add_flag("--csv", csv, "also write CSV copies");

  std::string data, test_data, checkpoint, method = "tdgcn";
  auto* train = app.add_subcommand("train", "train TDGCN on a CSIF dataset");
  add_common(train);
  train->add_option("--data", data, "training CSIF file")->required()->check(CLI::ExistingFile);
  train->add_option("--test-data", test_data, "held-out CSIF file for per-epoch accuracy")->check(CLI::ExistingFile);

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a CSIF dataset");
  add_common(ev);
  ev->add_option("--checkpoint", checkpoint, "model checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", data, "CSIF file to classify")->required()->check(CLI::ExistingFile);

  auto* base = app.add_subcommand("baseline", "fit one method on a train set and score a test set");
  add_common(base);
  base->add_option("--method", method, "tdgcn, knn, dt or nb")
      ->check(CLI::IsMember(eval::known_methods()));
  base->add_option("--data", data, "training CSIF file")->required()->check(CLI::ExistingFile);
  base->add_option("--test-data", test_data, "test CSIF file")->required()->check(CLI::ExistingFile);

  bool wall_time = false, quiet = false;
  auto* sweep = app.add_subcommand("sweep", "run an experiment sweep and write results.csv");
  add_common(sweep);
  sweep->add_flag("--wall-time", wall_time, "write measured seconds into results.csv");
  sweep->add_flag("--quiet", quiet, "no per-row progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*gen) return cmd_generate(common, csv);
    if (*train) return cmd_train(common, data, test_data);
    if (*ev) return cmd_eval(common, checkpoint, data);
    if (*base) return cmd_baseline(common, method, data, test_data);
    if (*sweep) return cmd_sweep(common, wall_time, quiet);
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 1;
}
