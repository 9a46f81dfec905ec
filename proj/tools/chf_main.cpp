// Command line front end for the CHF table pipeline: table ingestion and
// validation, the full experiment matrix, single-variant training, model
// evaluation and point predictions.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chf/dataset.hpp"
#include "chf/errors.hpp"
#include "chf/experiment.hpp"
#include "chf/lut.hpp"
#include "chf/metrics.hpp"
#include "chf/model_io.hpp"

namespace {

struct PublishedColumn {
  const char* name;
  double min, max, mean, sd, cv;
};

// Statistical parameters of the flattened 2006 table (8 mm, kW/m^2).
constexpr PublishedColumn kPublishedStats[] = {
    {"pressure_mpa", 0.100, 21, 8.660, 7.414, 0.856},
    {"mass_flux_kg_m2s", 0.000, 8000, 3295.238, 2642.460, 0.802},
    {"quality", -0.500, 1, 0.220, 0.403, 1.834},
    {"chf_kw_m2", 0.000, 39744, 3868.244, 5419.593, 1.401},
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

int cmd_ingest(const std::string& lut_path) {
  const chf::LutGrid grid = chf::load_lut_file(lut_path);
  const chf::Dataset ds = chf::flatten(grid);
  const auto stats = chf::compute_stats(ds);

  std::cout << "nodes: " << grid.node_count() << " ("
            << grid.pressures().size() << " x " << grid.mass_fluxes().size()
            << " x " << grid.qualities().size() << ")\n";
  const bool full_range = grid.covers_reference_ranges();
  std::cout << "axes cover the published table ranges: "
            << (full_range ? "yes" : "no") << "\n\n";

  std::vector<std::string> names = ds.feature_names();
  names.push_back("chf_kw_m2");
  std::cout << std::left << std::setw(20) << "column" << std::setw(14) << "min"
            << std::setw(14) << "max" << std::setw(14) << "mean"
            << std::setw(14) << "sd" << std::setw(14) << "cv" << "\n";
  for (std::size_t c = 0; c < stats.size(); ++c) {
    std::cout << std::setw(20) << names[c] << std::setw(14) << fmt(stats[c].min)
              << std::setw(14) << fmt(stats[c].max) << std::setw(14)
              << fmt(stats[c].mean) << std::setw(14) << fmt(stats[c].sd)
              << std::setw(14) << (stats[c].cv ? fmt(*stats[c].cv) : "-")
              << "\n";
  }

  if (full_range && stats.size() == 4) {
    std::cout << "\nmax relative deviation from the published statistics:\n";
    for (std::size_t c = 0; c < 4; ++c) {
      const PublishedColumn& ref = kPublishedStats[c];
      auto rel = [](double actual, double expected) {
        if (expected == 0.0) return std::abs(actual);
        return std::abs(actual - expected) / std::abs(expected);
      };
      double worst = std::max({rel(stats[c].min, ref.min),
                               rel(stats[c].max, ref.max),
                               rel(stats[c].mean, ref.mean),
                               rel(stats[c].sd, ref.sd),
                               stats[c].cv ? rel(*stats[c].cv, ref.cv) : 0.0});
      std::cout << "  " << std::left << std::setw(20) << ref.name
                << fmt(worst * 100.0, 3) << "%\n";
    }
  }
  return 0;
}

void print_run_summary(const chf::RunOutcome& outcome,
                       const chf::ExperimentConfig& cfg) {
  std::vector<chf::MetricsTableRow> rows;
  for (const auto& vo : outcome.variants) {
    rows.push_back({vo.display, vo.train_metrics, vo.test_metrics});
  }
  std::cout << chf::render_metrics_table(rows);
  if (outcome.variants.size() >= 2) {
    std::cout << "\n" << chf::render_comparison(chf::compare_variants(outcome));
  }
  if (!cfg.output_dir.empty()) {
    std::cout << "\nartifacts written to " << cfg.output_dir << "\n";
  }
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path) {
  const chf::ModelBundle bundle = chf::load_model(model_path);
  const chf::Dataset ds = chf::load_dataset_csv_file(data_path);
  const std::vector<double> predicted = chf::predict_dataset(bundle, ds);
  const std::vector<double> measured = ds.targets();
  const chf::MetricsReport report = chf::evaluate(measured, predicted);

  std::cout << "model: " << bundle.name << "\n"
            << "samples: " << report.n << "\n"
            << "nrmse: " << fmt(report.nrmse) << "\n"
            << "mae:   " << fmt(report.mae) << " kW/m^2\n"
            << "r2:    " << fmt(report.r2) << "\n"
            << "nse:   " << fmt(report.nse) << "\n"
            << chf::metrics_json(report) << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, double p, double g, double x,
                double d, const std::string& lut_path) {
  const chf::ModelBundle bundle = chf::load_model(model_path);
  const double model_8mm = chf::predict_point(bundle, {p, g, x});
  const double diameter_factor = std::sqrt(d / 8.0);

  std::cout << "model: " << bundle.name << "\n";
  std::cout << "model CHF (8 mm):  " << fmt(model_8mm) << " kW/m^2\n";
  if (d != 8.0) {
    std::cout << "model CHF (D=" << fmt(d) << " mm): "
              << fmt(model_8mm * diameter_factor) << " kW/m^2\n";
  }
  if (!lut_path.empty()) {
    const chf::LutGrid grid = chf::load_lut_file(lut_path);
    const double lut_8mm = chf::interpolate(grid, p, g, x);
    std::cout << "table CHF (8 mm):  " << fmt(lut_8mm) << " kW/m^2\n";
    if (d != 8.0) {
      std::cout << "table CHF (D=" << fmt(d) << " mm): "
                << fmt(chf::correct_diameter(lut_8mm, d)) << " kW/m^2\n";
    }
  }
  return 0;
}

int cmd_export(const std::string& model_path, const std::string& data_path,
               const std::string& out_path, const std::string& tag) {
  const chf::ModelBundle bundle = chf::load_model(model_path);
  const chf::Dataset ds = chf::load_dataset_csv_file(data_path);
  std::ofstream out(out_path);
  if (!out) {
    throw chf::ValidationError("cannot write " + out_path);
  }
  chf::export_predictions(bundle, ds, tag, out);
  std::cout << "wrote " << ds.size() << " rows to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CHF look-up table surrogate pipeline"};
  app.require_subcommand(1);

  // ingest
  std::string ingest_lut;
  CLI::App* ingest = app.add_subcommand(
      "ingest", "Validate a LUT CSV and print its dataset statistics");
  ingest->add_option("lut", ingest_lut, "LUT CSV file")->required();

  // shared run/train options
  std::string config_path, override_lut, override_out, override_variants;
  std::uint64_t override_seed = 0;
  double override_fraction = 0.0, override_lr = 0.0;
  std::size_t override_epochs = 0, override_batch = 0;
  bool override_std_aug = false;
  bool quiet = false;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "experiment config file")
        ->required();
    cmd->add_option("--lut", override_lut, "override: LUT CSV path");
    cmd->add_option("--seed", override_seed, "override: master seed");
    cmd->add_option("--train-fraction", override_fraction,
                    "override: training fraction");
    cmd->add_option("--epochs", override_epochs, "override: epoch count");
    cmd->add_option("--batch-size", override_batch, "override: batch size");
    cmd->add_option("--learning-rate", override_lr,
                    "override: Adam learning rate");
    cmd->add_flag("--standardize-augmented", override_std_aug,
                  "override: standardize appended code columns");
    cmd->add_option("--out", override_out, "override: output directory");
    cmd->add_flag("--quiet", quiet, "suppress training progress on stderr");
  };

  CLI::App* run = app.add_subcommand(
      "run", "Train and evaluate the configured experiment matrix");
  add_overrides(run);
  run->add_option("--variants", override_variants,
                  "override: comma list of base,a1,a2,a3");

  std::string train_variant;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train a single variant from a config");
  add_overrides(train_cmd);
  train_cmd->add_option("--variant", train_variant, "variant to train")
      ->required();

  // evaluate
  std::string eval_model, eval_data;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Evaluate a saved model on a dataset CSV");
  evaluate->add_option("model", eval_model, "model file")->required();
  evaluate->add_option("dataset", eval_data, "dataset CSV")->required();

  // predict
  std::string pred_model, pred_lut;
  double pred_p = 0.0, pred_g = 0.0, pred_x = 0.0, pred_d = 8.0;
  CLI::App* predict = app.add_subcommand(
      "predict",
      "Point prediction, optionally next to the interpolated table value");
  predict->add_option("model", pred_model, "model file")->required();
  predict->add_option("--p", pred_p, "pressure [MPa]")->required();
  predict->add_option("--g", pred_g, "mass flux [kg/m2s]")->required();
  predict->add_option("--x", pred_x, "thermodynamic quality")->required();
  predict->add_option("--d", pred_d, "tube diameter [mm], default 8");
  predict->add_option("--lut", pred_lut,
                      "LUT CSV for an interpolated comparison value");

  // export-predictions
  std::string exp_model, exp_data, exp_out = "predictions.csv", exp_tag = "all";
  CLI::App* exp = app.add_subcommand(
      "export-predictions", "Write measured/predicted CSV for a dataset");
  exp->add_option("model", exp_model, "model file")->required();
  exp->add_option("dataset", exp_data, "dataset CSV")->required();
  exp->add_option("--out", exp_out, "output CSV path");
  exp->add_option("--tag", exp_tag, "split_tag value for every row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto load_config_with_overrides = [&](CLI::App* cmd) {
    chf::ExperimentConfig cfg = chf::load_experiment_config(config_path);
    if (cmd->count("--lut")) cfg.lut_path = override_lut;
    if (cmd->count("--seed")) cfg.seed = override_seed;
    if (cmd->count("--train-fraction")) cfg.train_fraction = override_fraction;
    if (cmd->count("--epochs")) cfg.train.epochs = override_epochs;
    if (cmd->count("--batch-size")) cfg.train.batch_size = override_batch;
    if (cmd->count("--learning-rate")) cfg.train.learning_rate = override_lr;
    if (cmd->count("--standardize-augmented")) cfg.standardize_augmented = true;
    if (cmd->count("--out")) cfg.output_dir = override_out;
    cfg.log_progress = !quiet;
    if (cfg.lut_path.empty()) {
      throw chf::ValidationError("no LUT path set (config key lut or --lut)");
    }
    if (cfg.output_dir.empty()) {
      throw chf::ValidationError(
          "no output directory set (config key output_dir or --out)");
    }
    return cfg;
  };

  try {
    if (*ingest) return cmd_ingest(ingest_lut);
    if (*run) {
      chf::ExperimentConfig cfg = load_config_with_overrides(run);
      if (run->count("--variants")) {
        cfg.variants.clear();
        std::stringstream parts(override_variants);
        std::string item;
        while (std::getline(parts, item, ',')) {
          cfg.variants.push_back(chf::parse_variant(item));
        }
      }
      const chf::RunOutcome outcome = chf::run_experiment(cfg);
      print_run_summary(outcome, cfg);
      return 0;
    }
    if (*train_cmd) {
      chf::ExperimentConfig cfg = load_config_with_overrides(train_cmd);
      cfg.variants = {chf::parse_variant(train_variant)};
      const chf::RunOutcome outcome = chf::run_experiment(cfg);
      const auto& vo = outcome.variants.front();
      std::vector<chf::MetricsTableRow> rows{
          {vo.display, vo.train_metrics, vo.test_metrics}};
      std::cout << chf::render_metrics_table(rows);
      std::cout << "\nartifacts written to " << cfg.output_dir << "\n";
      return 0;
    }
    if (*evaluate) return cmd_evaluate(eval_model, eval_data);
    if (*predict) {
      return cmd_predict(pred_model, pred_p, pred_g, pred_x, pred_d, pred_lut);
    }
    if (*exp) return cmd_export(exp_model, exp_data, exp_out, exp_tag);
  } catch (const chf::TrainingDivergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const chf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
