#include "myo/adaptation.hpp"
#include "myo/io.hpp"
#include "myo/log.hpp"
#include "myo/scenario.hpp"
#include "myo/schema.hpp"
#include "myo/svg.hpp"
#include "myo/types.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitScenarioError = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitNonFiniteLoss = 4;

void emit_error(const std::string& message, int code) {
  json err;
  err["error"] = message;
  err["code"] = code;
  std::cerr << err.dump() << "\n";
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw myo::InvalidInput("cannot open file: " + path);
  return json::parse(in);
}

int cmd_run(const std::vector<std::string>& scenarios, const std::string& morphology,
            const std::string& out_dir, long long seed, bool seed_set,
            const std::vector<std::string>& overrides, int jobs) {
  struct Job {
    std::string path;
    std::string out;
  };
  std::vector<Job> job_list;
  for (const auto& s : scenarios) {
    Job j;
    j.path = s;
    j.out = scenarios.size() == 1 ? out_dir : (fs::path(out_dir) / fs::path(s).stem()).string();
    job_list.push_back(j);
  }

  std::mutex fail_mutex;
  std::vector<std::pair<std::string, int>> failures;
  std::atomic<size_t> next{0};

  auto worker = [&]() {
    while (true) {
      size_t idx = next.fetch_add(1);
      if (idx >= job_list.size()) return;
      const Job& job = job_list[idx];
      try {
        json config = load_json_file(job.path);
        if (!morphology.empty()) config["morphology"] = morphology;
        if (seed_set) config["seed"] = seed;
        for (const auto& ov : overrides) {
          auto eq = ov.find('=');
          if (eq == std::string::npos)
            throw myo::InvalidInput("override must be key=value: " + ov);
          myo::apply_override(config, ov.substr(0, eq), ov.substr(eq + 1));
        }
        auto result = myo::run_scenario(config, fs::path(job.path).parent_path().string(), job.out);
        myo::log::info("scenario " + job.path + " -> " + result.summary_path);
      } catch (const myo::SimDiverged& e) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        failures.emplace_back(e.what(), kExitDiverged);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        failures.emplace_back(e.what(), kExitScenarioError);
      }
    }
  };

  const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(job_list.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (!failures.empty()) {
    int code = kExitScenarioError;
    for (const auto& f : failures) code = std::max(code, f.second);
    emit_error(failures.front().first, code);
    return code;
  }
  return kExitOk;
}

// Build a static-schema dataset from a scenario run's telemetry.
myo::Dataset dataset_from_telemetry(const myo::CsvTable& t, int n, int m) {
  myo::Dataset data;
  data.x_in.resize(t.rows.rows(), n + 2 * m);
  for (int r = 0; r < t.rows.rows(); ++r) {
    int c = 0;
    for (int j = 0; j < n; ++j)
      data.x_in(r, c++) = t.rows(r, t.column("theta_" + std::to_string(j)));
    for (int i = 0; i < m; ++i) data.x_in(r, c++) = t.rows(r, t.column("f_" + std::to_string(i)));
    for (int i = 0; i < m; ++i) data.x_in(r, c++) = t.rows(r, t.column("l_" + std::to_string(i)));
  }
  data.x_out = data.x_in;
  return data;
}

int cmd_train(const std::string& dataset_path, const std::string& scenario_path,
              const std::string& out_path, const std::string& type, int n_joints, int n_muscles,
              int n_contacts, std::vector<int> hidden, int epochs, double lr, int batch,
              long long seed, double holdout, const std::string& out_dir) {
  try {
    myo::SliceLayout in_layout, out_layout;
    std::vector<myo::VecX> mask_set;
    if (type == "static") {
      in_layout = myo::static_layout(n_joints, n_muscles);
      out_layout = in_layout;
      mask_set = myo::static_mask_set();
    } else if (type == "dynamic") {
      in_layout = myo::dynamic_in_layout(n_joints, n_muscles, n_contacts);
      out_layout = myo::dynamic_out_layout(n_joints, n_muscles, n_contacts);
      mask_set = myo::dynamic_mask_set();
    } else {
      throw myo::InvalidInput("--type must be static or dynamic");
    }

    myo::Dataset data;
    if (!dataset_path.empty()) {
      data = myo::load_dataset(dataset_path, in_layout, out_layout);
    } else if (!scenario_path.empty()) {
      if (type != "static")
        throw myo::InvalidInput("generate-from-scenario supports the static schema only");
      json config = load_json_file(scenario_path);
      fs::path gen_dir = fs::path(out_dir.empty() ? "." : out_dir) / "train_rollout";
      auto result =
          myo::run_scenario(config, fs::path(scenario_path).parent_path().string(), gen_dir.string());
      auto table = myo::load_csv(result.telemetry_path);
      data = dataset_from_telemetry(table, n_joints, n_muscles);
      myo::save_dataset(data, in_layout, out_layout, (gen_dir / "dataset.csv").string());
    } else {
      throw myo::InvalidInput("train needs --dataset or --scenario");
    }
    if (data.size() < 2) throw myo::InvalidInput("dataset has fewer than two samples");

    // Held-out split from the tail.
    int held = std::max(1, static_cast<int>(data.size() * holdout));
    if (held >= data.size()) held = data.size() / 2;
    myo::Dataset train_set, held_set;
    const int keep = data.size() - held;
    train_set.x_in = data.x_in.topRows(keep);
    train_set.x_out = data.x_out.topRows(keep);
    held_set.x_in = data.x_in.bottomRows(held);
    held_set.x_out = data.x_out.bottomRows(held);

    auto net = myo::make_autoencoder(in_layout, out_layout, hidden, static_cast<uint64_t>(seed));
    net.mask_set = mask_set;

    myo::TrainHyper hyper;
    hyper.epochs = epochs;
    hyper.lr = lr;
    hyper.batch = batch;
    hyper.seed = static_cast<uint64_t>(seed);
    double train_loss = 0.0;
    if (epochs > 0) {
      train_loss = myo::train(net, train_set, hyper).final_loss;
    } else {
      // stats still needed so the serialized net is usable
      myo::TrainHyper zero = hyper;
      zero.epochs = 0;
      myo::train(net, train_set, zero);
      train_loss = myo::evaluate(net, train_set, myo::VecX::Ones(in_layout.count()));
    }
    double held_loss = myo::evaluate(net, held_set, myo::VecX::Ones(in_layout.count()));
    if (!std::isfinite(train_loss) || !std::isfinite(held_loss)) {
      emit_error("training produced a non-finite loss", kExitNonFiniteLoss);
      return kExitNonFiniteLoss;
    }

    myo::save_network(net, out_path);
    if (type == "static") {
      auto stats = myo::calibrate_residuals(net, train_set);
      myo::save_residual_stats(stats, out_path + ".stats.json");
    }
    json report;
    report["train_loss"] = train_loss;
    report["holdout_loss"] = held_loss;
    report["epochs"] = epochs;
    report["samples"] = data.size();
    std::cout << report.dump() << "\n";
    return kExitOk;
  } catch (const myo::InvalidInput& e) {
    if (std::string(e.what()).find("non-finite") != std::string::npos) {
      emit_error(e.what(), kExitNonFiniteLoss);
      return kExitNonFiniteLoss;
    }
    emit_error(e.what(), kExitScenarioError);
    return kExitScenarioError;
  } catch (const std::exception& e) {
    emit_error(e.what(), kExitScenarioError);
    return kExitScenarioError;
  }
}

void plot_group(const myo::CsvTable& t, const std::string& prefix, const std::string& title,
                const std::string& ylabel, const std::string& path,
                const std::vector<std::pair<double, std::string>>& hlines) {
  const int time_col = t.column("time");
  std::vector<double> time(t.rows.rows());
  for (int r = 0; r < t.rows.rows(); ++r) time[r] = t.rows(r, time_col);

  myo::SvgPlot plot(title, "time [s]", ylabel);
  for (size_t c = 0; c < t.columns.size(); ++c) {
    if (t.columns[c].rfind(prefix, 0) != 0) continue;
    std::vector<double> y(t.rows.rows());
    for (int r = 0; r < t.rows.rows(); ++r) y[r] = t.rows(r, static_cast<int>(c));
    plot.add_series(t.columns[c], time, y);
  }
  for (const auto& h : hlines) plot.add_hline(h.first, h.second);
  plot.write(path);
}

int cmd_report(const std::string& telemetry_dir, const std::string& out_dir) {
  try {
    fs::create_directories(out_dir);
    // A scenario output is a directory holding telemetry.csv + summary.json.
    std::vector<fs::path> scenario_dirs;
    auto has_pair = [](const fs::path& d) {
      return fs::exists(d / "summary.json");
    };
    fs::path root(telemetry_dir);
    if (!fs::exists(root)) throw myo::InvalidInput("telemetry dir not found: " + telemetry_dir);
    if (has_pair(root)) scenario_dirs.push_back(root);
    if (fs::is_directory(root))
      for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && has_pair(entry.path())) scenario_dirs.push_back(entry.path());
    std::sort(scenario_dirs.begin(), scenario_dirs.end());

    json all = json::array();
    std::string table;
    table += "scenario                      ticks   tracking_rmse     max_c1\n";
    for (const auto& dir : scenario_dirs) {
      json summary = load_json_file((dir / "summary.json").string());
      all.push_back(summary);
      char line[256];
      std::snprintf(line, sizeof(line), "%-28s %6lld %15.6g %10.4g\n",
                    summary.value("name", dir.filename().string()).c_str(),
                    static_cast<long long>(summary.value("ticks", 0)),
                    summary.value("tracking_rmse", 0.0), summary.value("max_c1", 0.0));
      table += line;

      fs::path tel = dir / "telemetry.csv";
      if (!fs::exists(tel)) continue;
      auto t = myo::load_csv(tel.string());
      if (t.rows.rows() == 0) continue;
      const std::string stem = (fs::path(out_dir) / dir.filename()).string();
      fs::create_directories(fs::path(out_dir) / dir.filename());
      plot_group(t, "theta_", "joint tracking", "angle [rad]", stem + "/theta.svg", {});
      plot_group(t, "f_", "muscle tensions", "tension [N]", stem + "/tensions.svg", {});
      plot_group(t, "c1_", "motor core temperature", "temperature [degC]", stem + "/thermal.svg",
                 {{summary.value("c1_max_param", 0.0), "c1_max"}});
      plot_group(t, "anomaly", "anomaly score", "score", stem + "/anomaly.svg", {});
    }
    std::ofstream tf(fs::path(out_dir) / "report.txt");
    tf << table;
    std::ofstream jf(fs::path(out_dir) / "report.json");
    jf << all.dump(2) << "\n";
    std::cout << table;
    return kExitOk;
  } catch (const std::exception& e) {
    emit_error(e.what(), kExitScenarioError);
    return kExitScenarioError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"musculoskeletal control stack and simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run scenario(s) and write telemetry + summary");
  std::vector<std::string> scenarios;
  std::string morphology, out_dir = "out";
  long long seed = 0;
  std::vector<std::string> overrides;
  int jobs = 1;
  run->add_option("--scenario", scenarios, "scenario JSON file (repeatable)")->required();
  run->add_option("--morphology", morphology, "override the scenario's morphology path");
  run->add_option("--out", out_dir, "output directory");
  auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--set", overrides, "dotted-key config override key=value (repeatable)");
  run->add_option("--jobs", jobs, "parallel scenario jobs")->check(CLI::PositiveNumber);

  // train
  auto* train = app.add_subcommand("train", "train a body schema network");
  std::string dataset_path, scenario_path, net_out = "net.json", type = "static";
  int n_joints = 1, n_muscles = 2, n_contacts = 1, epochs = 200, batch = 32;
  std::vector<int> hidden = {64, 64, 64};
  double lr = 1e-3, holdout = 0.2;
  long long train_seed = 1;
  std::string train_out_dir;
  train->add_option("--dataset", dataset_path, "dataset CSV");
  train->add_option("--scenario", scenario_path, "generate the dataset from a scenario run");
  train->add_option("--net", net_out, "output network path");
  train->add_option("--type", type, "static or dynamic");
  train->add_option("--joints", n_joints, "joint count");
  train->add_option("--muscles", n_muscles, "muscle count");
  train->add_option("--contacts", n_contacts, "contact channel count (dynamic)");
  train->add_option("--hidden", hidden, "hidden layer sizes");
  train->add_option("--epochs", epochs, "training epochs");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--batch", batch, "minibatch size");
  train->add_option("--seed", train_seed, "training seed");
  train->add_option("--holdout", holdout, "held-out fraction");
  train->add_option("--out", train_out_dir, "work directory for generated data");

  // report
  auto* report = app.add_subcommand("report", "summarize telemetry into tables and SVG plots");
  std::string report_dir, report_out = "report";
  report->add_option("--telemetry", report_dir, "directory with scenario outputs")->required();
  report->add_option("--out", report_out, "report output directory");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed())
    return cmd_run(scenarios, morphology, out_dir, seed, seed_opt->count() > 0, overrides, jobs);
  if (train->parsed())
    return cmd_train(dataset_path, scenario_path, net_out, type, n_joints, n_muscles, n_contacts,
                     hidden, epochs, lr, batch, train_seed, holdout, train_out_dir);
  if (report->parsed()) return cmd_report(report_dir, report_out);
  return kExitOk;
}
