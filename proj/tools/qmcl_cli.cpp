// qmcl: generate training data, train, predict, and export reports.
//
//   qmcl generate --run runs/desk --preset desk
//   qmcl train    --run runs/desk
//   qmcl predict  --run runs/desk --delta 0.5 --tag d050
//   qmcl report   --run runs/desk --tag d050

#include "qmcl/log.hpp"
#include "qmcl/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace {

using qmcl::fs::path;

// One string flag per RunConfig field, e.g. --fine-cells 480 or
// --train-deltas "[0, 1]"; values are parsed as JSON where possible.
class ConfigFlags {
 public:
  void attach(CLI::App* cmd) {
    const nlohmann::json fields = qmcl::RunConfig{}.to_json();
    for (const auto& item : fields.items()) {
      const std::string key = item.key();
      std::string flag = key;
      for (char& c : flag) {
        if (c == '_') c = '-';
      }
      cmd->add_option("--" + flag, values_[key], "override config field " + key);
    }
    cmd->add_option("--preset", preset_, "full, desk, or toy")->default_val("full");
    cmd->add_option("--config", file_, "JSON config file overlaid on the preset");
  }

  qmcl::RunConfig resolve() const {
    qmcl::RunConfig config = qmcl::RunConfig::preset(preset_);
    if (!file_.empty()) config = qmcl::RunConfig::from_json(qmcl::read_json(file_), config);
    nlohmann::json overrides = nlohmann::json::object();
    for (const auto& [key, text] : values_) {
      if (text.empty()) continue;
      auto parsed = nlohmann::json::parse(text, nullptr, false);
      overrides[key] = parsed.is_discarded() ? nlohmann::json(text) : parsed;
    }
    config = qmcl::RunConfig::from_json(overrides, config);
    config.validate();
    return config;
  }

 private:
  std::map<std::string, std::string> values_;
  std::string preset_ = "full";
  std::string file_;
};

qmcl::RunConfig run_config(const path& run) {
  return qmcl::RunConfig::from_json(qmcl::read_json(run / "config.json"));
}

std::string default_tag(double delta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "delta_%.4g", delta);
  return buf;
}

void print_summary(const qmcl::PredictionReport& report) {
  std::cout << "horizon " << report.horizon() << ", period " << report.conditioning_period
            << ", skipped conditionings " << report.skipped_conditionings << ", density resets "
            << report.density_resets << "\n";
  if (!report.truth) return;
  const auto ne = qmcl::normalized_errors(report);
  std::cout << "rmse h: qmcl " << qmcl::aggregate_rmse(report.rmse_qmcl_h) << " zero "
            << qmcl::aggregate_rmse(report.rmse_zero_h) << "\n"
            << "rmse q: qmcl " << qmcl::aggregate_rmse(report.rmse_qmcl_q) << " zero "
            << qmcl::aggregate_rmse(report.rmse_zero_q) << "\n"
            << "normalized h: qmcl " << ne.qmcl_h << " zero " << ne.zero_h << "\n"
            << "normalized q: qmcl " << ne.qmcl_q << " zero " << ne.zero_q << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-mechanical closure for coarse shallow-water dynamics"};
  app.require_subcommand(1);
  std::string run_dir;

  auto* generate = app.add_subcommand("generate", "spin up fine runs and store training data");
  generate->add_option("--run", run_dir, "run directory")->required();
  ConfigFlags flags;
  flags.attach(generate);

  auto* train = app.add_subcommand("train", "build the spectral model from stored data");
  train->add_option("--run", run_dir, "run directory")->required();

  auto* predict = app.add_subcommand("predict", "run the closure from a family member");
  predict->add_option("--run", run_dir, "run directory")->required();
  double delta = 0.5;
  std::optional<int> horizon, period;
  std::string tag;
  bool no_truth = false;
  predict->add_option("--delta", delta, "initial condition family parameter")->required();
  predict->add_option("--horizon", horizon, "coarse steps (default from config)");
  predict->add_option("--period", period, "conditioning period (default from config)");
  predict->add_option("--tag", tag, "report subdirectory name");
  predict->add_flag("--no-truth", no_truth, "skip the fine reference integration");

  auto* report = app.add_subcommand("report", "export a stored prediction as delimited tables");
  report->add_option("--run", run_dir, "run directory")->required();
  report->add_option("--tag", tag, "report subdirectory name")->required();
  char delimiter = ',';
  report->add_option("--delimiter", delimiter, "field separator")->default_val(',');

  CLI11_PARSE(app, argc, argv);
  const path run(run_dir);
  std::string stage = "setup";
  try {
    if (generate->parsed()) {
      stage = "config";
      const qmcl::RunConfig config = flags.resolve();
      qmcl::fs::create_directories(run / "data");
      qmcl::write_json(run / "config.json", config.to_json());
      stage = "generate";
      const auto data = qmcl::generate_training_data(config);
      qmcl::save_training_set(data, config, run / "data");
      std::cout << "wrote " << data.trajectories.size() << " trajectories to " << run / "data"
                << "\n";
    } else if (train->parsed()) {
      stage = "load";
      const auto config = run_config(run);
      const auto data = qmcl::load_training_set(run / "data");
      stage = "train";
      const auto model = qmcl::train(config, data);
      qmcl::fs::create_directories(run / "model");
      qmcl::save_model(model, run / "model");
      std::cout << "basis size " << model.basis.size() << ", basis epsilon "
                << model.basis_epsilon << ", conditioning epsilon " << model.conditioning.epsilon
                << ", transfer norm " << model.transfer.operator_norm << "\n";
    } else if (predict->parsed()) {
      stage = "load";
      const auto model = qmcl::load_model(run / "model");
      stage = "predict";
      const auto fine = qmcl::spun_up_fine_state(model.config, delta);
      qmcl::PredictOptions options;
      options.horizon = horizon.value_or(model.config.horizon);
      options.conditioning_period = period.value_or(model.config.conditioning_period);
      if (!no_truth) options.fine_initial = fine;
      auto result = qmcl::predict(
          model, qmcl::coarsen_state(fine, model.config.coarse_pair()), options);
      result.delta = delta;
      const path out = run / "report" / (tag.empty() ? default_tag(delta) : tag);
      qmcl::fs::create_directories(out);
      qmcl::save_report(result, out);
      print_summary(result);
    } else if (report->parsed()) {
      stage = "report";
      const path dir = run / "report" / tag;
      const auto result = qmcl::load_report(dir);
      qmcl::export_report(result, dir / "tables", delimiter);
      print_summary(result);
    }
  } catch (const qmcl::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: [" << stage << "] " << e.what() << "\n";
    return 2;
  }
  return 0;
}
