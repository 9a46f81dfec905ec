#include "chf/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "chf/autoencoder.hpp"
#include "chf/errors.hpp"
#include "chf/lut.hpp"
#include "chf/rng.hpp"
#include "text_util.hpp"

namespace chf {

namespace {

using nlohmann::json;

// Stage seed streams derived from the master seed. The split stream is
// shared by every variant; each autoencoder and each network gets its own,
// so variants differ only in initialization, never in data membership.
constexpr std::uint64_t kSplitStream = 0;
constexpr std::uint64_t kAutoencoderStream = 1;  // + latent_dim - 1
constexpr std::uint64_t kNetworkStream = 4;      // + variant index

template <typename F>
auto with_stage(const char* stage, F&& body) {
  try {
    return body();
  } catch (const TrainingDivergence&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(stage) + ": " + e.what());
  }
}

std::vector<Variant> canonical_variants(std::vector<Variant> variants) {
  std::sort(variants.begin(), variants.end());
  variants.erase(std::unique(variants.begin(), variants.end()),
                 variants.end());
  if (variants.empty()) {
    throw ValidationError("at least one variant must be requested");
  }
  return variants;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

json report_to_json(const MetricsReport& r) {
  return json{{"n", r.n},
              {"nrmse", r.nrmse},
              {"mae", r.mae},
              {"r2", r.r2},
              {"nse", r.nse}};
}

}  // namespace

std::size_t variant_latent_dim(Variant v) {
  return static_cast<std::size_t>(v);
}

std::size_t variant_feature_count(Variant v) {
  return 3 + variant_latent_dim(v);
}

std::string variant_slug(Variant v) {
  switch (v) {
    case Variant::base: return "dcnn_3f";
    case Variant::a1: return "dcnn_3f_a1";
    case Variant::a2: return "dcnn_3f_a2";
    case Variant::a3: return "dcnn_3f_a3";
  }
  throw ValidationError("unknown variant");
}

std::string variant_display(Variant v) {
  switch (v) {
    case Variant::base: return "DCNN_3F";
    case Variant::a1: return "DCNN_3F-A1";
    case Variant::a2: return "DCNN_3F-A2";
    case Variant::a3: return "DCNN_3F-A3";
  }
  throw ValidationError("unknown variant");
}

Variant parse_variant(const std::string& text) {
  const std::string t = lower(text);
  if (t == "base" || t == "dcnn_3f") return Variant::base;
  if (t == "a1" || t == "dcnn_3f_a1" || t == "dcnn_3f-a1") return Variant::a1;
  if (t == "a2" || t == "dcnn_3f_a2" || t == "dcnn_3f-a2") return Variant::a2;
  if (t == "a3" || t == "dcnn_3f_a3" || t == "dcnn_3f-a3") return Variant::a3;
  throw ValidationError("unknown variant '" + text +
                        "' (expected base, a1, a2 or a3)");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open config file: " + path);
  }
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (auto hash = sv.find('#'); hash != std::string_view::npos) {
      sv = detail::trim(sv.substr(0, hash));
    }
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected key = value");
    }
    const std::string key{detail::trim(sv.substr(0, eq))};
    const std::string value{detail::trim(sv.substr(eq + 1))};
    if (value.empty()) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": empty value for " + key);
    }

    try {
      if (key == "lut") {
        cfg.lut_path = value;
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "train_fraction") {
        cfg.train_fraction = std::stod(value);
      } else if (key == "variants") {
        cfg.variants.clear();
        std::stringstream parts(value);
        std::string item;
        while (std::getline(parts, item, ',')) {
          cfg.variants.push_back(
              parse_variant(std::string(detail::trim(item))));
        }
      } else if (key == "epochs") {
        cfg.train.epochs = std::stoull(value);
      } else if (key == "batch_size") {
        cfg.train.batch_size = std::stoull(value);
      } else if (key == "learning_rate") {
        cfg.train.learning_rate = std::stod(value);
      } else if (key == "standardize_augmented") {
        const std::string v = lower(value);
        if (v != "true" && v != "false") {
          throw ValidationError("expected true or false");
        }
        cfg.standardize_augmented = v == "true";
      } else if (key == "output_dir") {
        cfg.output_dir = value;
      } else {
        throw ValidationError("unknown config key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": bad value for " + key);
    } catch (const std::out_of_range&) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": value out of range for " + key);
    }
  }
  return cfg;
}

namespace {

/// Standardizer over the appended code columns only (fitted on train).
Standardizer fit_augment_standardizer(const Dataset& train_aug,
                                      std::size_t base_count) {
  auto stats = compute_stats(train_aug);
  std::vector<double> means, stds;
  for (std::size_t c = base_count; c < train_aug.feature_count(); ++c) {
    if (stats[c].sd == 0.0) {
      throw ValidationError("augmented column '" +
                            train_aug.feature_names()[c] +
                            "' has zero variance");
    }
    means.push_back(stats[c].mean);
    stds.push_back(stats[c].sd);
  }
  return Standardizer(std::move(means), std::move(stds));
}

Dataset scale_augmented_columns(const Dataset& ds, const Standardizer& aug_std,
                                std::size_t base_count) {
  std::vector<Sample> samples;
  samples.reserve(ds.size());
  for (const Sample& s : ds.samples()) {
    Sample t = s;
    for (std::size_t c = base_count; c < s.features.size(); ++c) {
      t.features[c] = (s.features[c] - aug_std.means()[c - base_count]) /
                      aug_std.stds()[c - base_count];
    }
    samples.push_back(std::move(t));
  }
  return Dataset(std::move(samples), ds.feature_names());
}

}  // namespace

RunOutcome run_on_split(const SplitResult& split,
                        const ExperimentConfig& cfg) {
  const std::vector<Variant> variants = canonical_variants(cfg.variants);
  if (split.train.feature_count() != 3) {
    throw ValidationError("the experiment pipeline expects the 3 base "
                          "features (P, G, x)");
  }

  const Standardizer standardizer = with_stage(
      "fit standardizer", [&] { return Standardizer::fit(split.train); });
  const Dataset train_std = standardizer.transform(split.train);
  const Dataset test_std = standardizer.transform(split.test);

  RunOutcome outcome{cfg.seed, split.train.size() + split.test.size(), split,
                     {}};

  for (Variant v : variants) {
    const std::size_t k = variant_latent_dim(v);

    std::optional<Autoencoder> ae;
    std::optional<Standardizer> aug_std;
    Dataset train_features = train_std;
    Dataset test_features = test_std;

    if (k > 0) {
      with_stage("train autoencoder", [&] {
        const std::uint64_t ae_seed =
            derive_seed(cfg.seed, kAutoencoderStream + k - 1);
        TrainConfig ae_cfg = cfg.train;
        ae_cfg.seed = derive_seed(ae_seed, 1);
        ae.emplace(AutoencoderSpec{3, 8, k}, derive_seed(ae_seed, 0));
        train_autoencoder(*ae, train_std.feature_matrix(), ae_cfg);
      });
      with_stage("augment dataset", [&] {
        train_features = augment_dataset(train_std, *ae);
        test_features = augment_dataset(test_std, *ae);
        if (cfg.standardize_augmented) {
          aug_std = fit_augment_standardizer(train_features, 3);
          train_features = scale_augmented_columns(train_features, *aug_std, 3);
          test_features = scale_augmented_columns(test_features, *aug_std, 3);
        }
      });
    }

    const std::size_t input_length = variant_feature_count(v);
    const std::uint64_t net_seed =
        derive_seed(cfg.seed, kNetworkStream + static_cast<std::uint64_t>(v));

    NetworkModel model = build_dcnn(input_length, derive_seed(net_seed, 0));
    TrainConfig net_cfg = cfg.train;
    net_cfg.seed = derive_seed(net_seed, 1);

    const Tensor x_train = train_features.feature_sequences();
    const Tensor y_train = train_features.target_column();
    const Tensor x_test = test_features.feature_sequences();
    const Tensor y_test = test_features.target_column();

    EpochCallback progress;
    if (cfg.log_progress) {
      const std::string tag = variant_slug(v);
      const std::size_t total = cfg.train.epochs;
      std::cerr << "[" << tag << "] training " << total << " epochs on "
                << x_train.extent(0) << " samples ("
                << model.parameter_count() << " parameters)\n";
      progress = [tag, total](std::size_t epoch, double tl, double vl) {
        if (epoch % 25 == 0 || epoch == total) {
          std::cerr << "[" << tag << "] epoch " << epoch << "/" << total
                    << "  train mse " << tl << "  valid mse " << vl << "\n";
        }
      };
    }

    TrainHistory history = with_stage("train network", [&] {
      return train(model, x_train, y_train, x_test, y_test, net_cfg, progress);
    });

    auto to_vector = [](const Tensor& t) {
      return std::vector<double>(t.data(), t.data() + t.size());
    };
    const std::vector<double> pred_train = to_vector(forward(model, x_train));
    const std::vector<double> pred_test = to_vector(forward(model, x_test));
    const std::vector<double> meas_train = split.train.targets();
    const std::vector<double> meas_test = split.test.targets();

    VariantOutcome vo{
        v,
        variant_slug(v),
        variant_display(v),
        input_length,
        model.parameter_count(),
        evaluate(meas_train, pred_train),
        evaluate(meas_test, pred_test),
        std::move(history),
        ModelBundle{variant_slug(v), std::move(model), standardizer, ae,
                    aug_std, split.train.feature_names(), net_cfg},
        pred_train,
        pred_test};
    outcome.variants.push_back(std::move(vo));
  }
  return outcome;
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  const LutGrid grid =
      with_stage("load LUT", [&] { return load_lut_file(cfg.lut_path); });
  const Dataset ds = flatten(grid);
  const SplitResult sp = with_stage("split dataset", [&] {
    return split(ds, cfg.train_fraction, derive_seed(cfg.seed, kSplitStream));
  });
  RunOutcome outcome = run_on_split(sp, cfg);
  if (!cfg.output_dir.empty()) {
    with_stage("write artifacts", [&] {
      write_run_artifacts(outcome, cfg);
      return 0;
    });
  }
  return outcome;
}

std::string run_metrics_json(const RunOutcome& outcome) {
  json j;
  j["seed"] = outcome.master_seed;
  j["sample_count"] = outcome.sample_count;
  j["train_count"] = outcome.split.train.size();
  j["test_count"] = outcome.split.test.size();
  json variants = json::object();
  for (const VariantOutcome& vo : outcome.variants) {
    variants[vo.slug] = {
        {"display", vo.display},
        {"feature_count", vo.feature_count},
        {"parameter_count", vo.parameter_count},
        {"train", report_to_json(vo.train_metrics)},
        {"test", report_to_json(vo.test_metrics)},
        {"final_train_loss", vo.history.train_loss.back()},
        {"final_valid_loss", vo.history.valid_loss.back()},
    };
  }
  j["variants"] = variants;
  return j.dump(2) + "\n";
}

void write_run_artifacts(const RunOutcome& outcome,
                         const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path out_dir = cfg.output_dir;
  fs::create_directories(out_dir / "models");
  fs::create_directories(out_dir / "reports");
  fs::create_directories(out_dir / "predictions");

  json manifest;
  manifest["seed"] = outcome.master_seed;
  manifest["lut"] = cfg.lut_path;
  manifest["train_fraction"] = cfg.train_fraction;
  manifest["sample_count"] = outcome.sample_count;
  manifest["standardize_augmented"] = cfg.standardize_augmented;
  manifest["train_config"] = {{"batch_size", cfg.train.batch_size},
                              {"epochs", cfg.train.epochs},
                              {"learning_rate", cfg.train.learning_rate}};
  manifest["split"] = {{"seed", outcome.split.seed},
                       {"train_indices", outcome.split.train_indices},
                       {"test_indices", outcome.split.test_indices}};

  json variant_entries = json::object();
  std::vector<MetricsTableRow> table_rows;
  for (const VariantOutcome& vo : outcome.variants) {
    const std::string model_file = "models/" + vo.slug + ".model";
    save_model(vo.bundle, (out_dir / model_file).string());
    json entry = {{"display", vo.display},
                  {"feature_count", vo.feature_count},
                  {"parameter_count", vo.parameter_count},
                  {"model_file", model_file}};
    if (vo.bundle.autoencoder) {
      const std::string ae_file =
          "models/ae_a" +
          std::to_string(vo.bundle.autoencoder->latent_dim()) + ".model";
      save_autoencoder(*vo.bundle.autoencoder, vo.bundle.train_config,
                       (out_dir / ae_file).string());
      entry["autoencoder_file"] = ae_file;
    }
    variant_entries[vo.slug] = entry;
    table_rows.push_back(
        MetricsTableRow{vo.display, vo.train_metrics, vo.test_metrics});

    std::ofstream pred(out_dir / "predictions" / (vo.slug + ".csv"));
    pred << "measured_chf,predicted_chf,split_tag\n";
    const auto& train_targets = outcome.split.train;
    for (std::size_t i = 0; i < vo.train_predictions.size(); ++i) {
      pred << detail::format_double(train_targets[i].target) << ','
           << detail::format_double(vo.train_predictions[i]) << ",train\n";
    }
    const auto& test_targets = outcome.split.test;
    for (std::size_t i = 0; i < vo.test_predictions.size(); ++i) {
      pred << detail::format_double(test_targets[i].target) << ','
           << detail::format_double(vo.test_predictions[i]) << ",test\n";
    }

    std::ofstream hist(out_dir / "reports" / ("history_" + vo.slug + ".csv"));
    hist << "epoch,train_mse,valid_mse\n";
    for (std::size_t e = 0; e < vo.history.train_loss.size(); ++e) {
      hist << (e + 1) << ',' << detail::format_double(vo.history.train_loss[e])
           << ',' << detail::format_double(vo.history.valid_loss[e]) << '\n';
    }
  }
  manifest["variants"] = variant_entries;

  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << "\n";
  std::ofstream(out_dir / "reports" / "metrics.json")
      << run_metrics_json(outcome);
  std::ofstream(out_dir / "reports" / "metrics_table.txt")
      << render_metrics_table(table_rows);
  if (outcome.variants.size() >= 2) {
    std::ofstream(out_dir / "reports" / "comparison.txt")
        << render_comparison(compare_variants(outcome));
  }
}

std::vector<RankingEntry> compare_variants(const RunOutcome& outcome) {
  if (outcome.variants.size() < 2) {
    throw ValidationError("variant comparison needs at least 2 variants");
  }
  const VariantOutcome* base = nullptr;
  for (const VariantOutcome& vo : outcome.variants) {
    if (vo.variant == Variant::base) base = &vo;
  }

  std::vector<const VariantOutcome*> order;
  for (const VariantOutcome& vo : outcome.variants) order.push_back(&vo);
  std::stable_sort(order.begin(), order.end(),
                   [](const VariantOutcome* a, const VariantOutcome* b) {
                     if (a->test_metrics.r2 != b->test_metrics.r2) {
                       return a->test_metrics.r2 > b->test_metrics.r2;
                     }
                     return a->test_metrics.nrmse < b->test_metrics.nrmse;
                   });

  std::vector<RankingEntry> ranking;
  for (const VariantOutcome* vo : order) {
    RankingEntry entry{vo->display, vo->test_metrics, std::nullopt};
    if (base != nullptr) {
      MetricsReport delta;
      delta.nrmse = vo->test_metrics.nrmse - base->test_metrics.nrmse;
      delta.mae = vo->test_metrics.mae - base->test_metrics.mae;
      delta.r2 = vo->test_metrics.r2 - base->test_metrics.r2;
      delta.nse = vo->test_metrics.nse - base->test_metrics.nse;
      delta.n = vo->test_metrics.n;
      entry.delta_vs_base = delta;
    }
    ranking.push_back(std::move(entry));
  }
  return ranking;
}

std::string render_comparison(const std::vector<RankingEntry>& ranking) {
  std::ostringstream out;
  out << "Variants ranked by test R^2 (ties: lower test NRMSE first; "
         "remaining ties keep run order)\n";
  out << std::fixed << std::setprecision(4);
  std::size_t rank = 1;
  for (const RankingEntry& e : ranking) {
    out << rank++ << ". " << std::left << std::setw(12) << e.display
        << "  R^2 " << e.test.r2 << "  NRMSE " << e.test.nrmse << "  MAE "
        << std::setprecision(2) << e.test.mae << std::setprecision(4)
        << "  NSE " << e.test.nse;
    if (e.delta_vs_base) {
      out << "  (vs base: R^2 " << std::showpos << e.delta_vs_base->r2
          << ", NRMSE " << e.delta_vs_base->nrmse << ", MAE "
          << std::setprecision(2) << e.delta_vs_base->mae
          << std::setprecision(4) << ", NSE " << e.delta_vs_base->nse
          << std::noshowpos << ")";
    }
    out << '\n';
  }
  return out.str();
}

std::vector<double> predict_dataset(const ModelBundle& bundle,
                                    const Dataset& raw) {
  if (raw.feature_count() != bundle.base_feature_names.size()) {
    throw ValidationError(
        "dataset has " + std::to_string(raw.feature_count()) +
        " features; the model expects the " +
        std::to_string(bundle.base_feature_names.size()) + " base features");
  }
  Dataset features = bundle.standardizer.transform(raw);
  if (bundle.autoencoder) {
    features = augment_dataset(features, *bundle.autoencoder);
    if (bundle.augment_standardizer) {
      features = scale_augmented_columns(features, *bundle.augment_standardizer,
                                         bundle.base_feature_names.size());
    }
  }
  const Tensor out = forward(bundle.net, features.feature_sequences());
  return std::vector<double>(out.data(), out.data() + out.size());
}

double predict_point(const ModelBundle& bundle,
                     const std::vector<double>& raw_features) {
  Dataset one(std::vector<Sample>{Sample{raw_features, 0.0}},
              bundle.base_feature_names);
  return predict_dataset(bundle, one).front();
}

void export_predictions(const ModelBundle& bundle, const Dataset& raw,
                        const std::string& split_tag, std::ostream& out) {
  const std::vector<double> predicted = predict_dataset(bundle, raw);
  out << "measured_chf,predicted_chf,split_tag\n";
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out << detail::format_double(raw[i].target) << ','
        << detail::format_double(predicted[i]) << ',' << split_tag << '\n';
  }
}

}  // namespace chf
