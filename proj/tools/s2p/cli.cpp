#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#ifdef S2P_CLI11_SINGLE_HEADER
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>

#include "s2p/data/csv_io.hpp"
#include "s2p/data/normalization.hpp"
#include "s2p/data/transform.hpp"
#include "s2p/error.hpp"
#include "s2p/eval/experiment.hpp"
#include "s2p/eval/report.hpp"
#include "s2p/model/checkpoint.hpp"
#include "s2p/synth/site.hpp"
#include "s2p/train/trainer.hpp"
#include "s2p/util/seed.hpp"

namespace s2p::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string default_out_dir() {
  const char* env = std::getenv("S2P_OUTPUT_DIR");
  return env && *env ? env : ".";
}

/// Every option of a subcommand as resolved after parsing (command line,
/// config file or default). The output directory is left out so that the
/// same run written to two places produces identical files.
json resolved_options(const CLI::App& app) {
  json opts = json::object();
  for (const CLI::Option* o : app.get_options()) {
    if (o->get_lnames().empty()) continue;
    const std::string& name = o->get_lnames().front();
    if (name == "help" || name == "out" || name == "config") continue;
    if (o->get_expected_max() == 0) {
      opts[name] = o->count() > 0;
    } else if (o->count() > 0) {
      std::string joined;
      for (const std::string& r : o->results()) joined += (joined.empty() ? "" : ",") + r;
      opts[name] = joined;
    } else {
      // List defaults render as "[a,b]"; record them like given lists.
      std::string d = o->get_default_str();
      if (d.size() >= 2 && d.front() == '[' && d.back() == ']') d = d.substr(1, d.size() - 2);
      opts[name] = d;
    }
  }
  return opts;
}

json run_config(const CLI::App& sub, json extra = json::object()) {
  json rc{{"command", sub.get_name()}, {"tool_version", S2P_VERSION}, {"options", resolved_options(sub)}};
  for (auto& [k, v] : extra.items()) rc[k] = v;
  return rc;
}

std::vector<std::string> run_config_comment(const json& rc) { return {"run_config: " + rc.dump()}; }

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << j.dump(2) << '\n';
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

/// `key = value` site parameter file.
std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open parameter file '" + path + "'");
  std::map<std::string, std::string> out;
  try {
    for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(f)) {
      if (item.name == "++" || item.name == "--") continue;
      out[item.name] = item.inputs.empty() ? "" : item.inputs.front();
    }
  } catch (const CLI::ParseError& e) {
    throw ConfigError("parameter file '" + path + "': " + e.what());
  }
  return out;
}

std::vector<data::Household> load_households(const std::string& manifest, int interval_minutes) {
  std::vector<data::Household> hs = data::load_site(manifest);
  if (interval_minutes > 0) {
    for (auto& h : hs) {
      if (h.total.interval_minutes != interval_minutes) h = data::downsample(h, interval_minutes);
    }
  }
  return hs;
}

/// Keeps the households named under `key` in a split file written by `train`.
std::vector<data::Household> restrict_to_split(std::vector<data::Household> hs, const std::string& split_path,
                                               const std::string& key) {
  if (split_path.empty()) return hs;
  std::ifstream f(split_path);
  if (!f) throw ConfigError("cannot open split file '" + split_path + "'");
  std::set<std::string> keep;
  try {
    const json j = json::parse(f);
    for (const auto& id : j.at(key)) keep.insert(id.get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError("split file '" + split_path + "': " + e.what());
  }
  std::erase_if(hs, [&](const data::Household& h) { return !keep.contains(h.user_id); });
  if (hs.empty()) throw DataError("no household of the site is listed under '" + key + "' in '" + split_path + "'");
  return hs;
}

void require_labeled(const std::vector<data::Household>& hs, const std::string& what) {
  for (const auto& h : hs) {
    if (!h.hvac) throw DataError(what + " needs labeled data; household '" + h.user_id + "' has no hvac_kw column");
  }
}

std::string ratio_text(double r) { return data::format_fixed(r, 3); }

// ------------------------------------------------------------------ synth

struct SynthOptions {
  std::vector<std::string> presets{"hot"};
  std::string params_file;
  int users = 20;
  int days = 90;
  int interval = 15;
  std::optional<std::uint64_t> seed;
  std::string out = default_out_dir();
};

void add_synth(CLI::App& app, SynthOptions& o) {
  app.add_option("--preset", o.presets, "Site preset(s): hot, mild, cool")->capture_default_str();
  app.add_option("--params", o.params_file, "key = value file overriding preset parameters")->check(CLI::ExistingFile);
  app.add_option("--users", o.users, "Households per site")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--days", o.days, "Days per household")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--interval", o.interval, "Sampling interval in minutes")->capture_default_str();
  app.add_option("--seed", o.seed, "Site seed (default: the preset's)");
  app.add_option("--out", o.out, "Output directory ($S2P_OUTPUT_DIR)")->capture_default_str();
}

int cmd_synth(const CLI::App& sub, const SynthOptions& o, std::ostream& out) {
  const fs::path root = prepare_out_dir(o.out);
  const auto overrides = o.params_file.empty() ? std::map<std::string, std::string>{} : read_key_values(o.params_file);
  std::vector<std::pair<std::string, double>> ratios;
  for (std::size_t i = 0; i < o.presets.size(); ++i) {
    synth::SiteParams params = synth::SiteParams::preset(o.presets[i]);
    if (!overrides.empty()) params = synth::SiteParams::from_key_values(overrides, params);
    if (o.seed) params.seed = *o.seed + i;
    params.validate();

    json param_json = json::object();
    for (const auto& [k, v] : params.to_key_values()) param_json[k] = v;
    const json rc = run_config(sub, {{"site_params", param_json}, {"seeds", {{"site", params.seed}}}});

    const auto households = synth::gen_site(o.users, o.days, params, o.interval);
    const fs::path dir = prepare_out_dir((root / params.name).string());
    data::SiteManifest manifest;
    manifest.site = params.name;
    manifest.interval_minutes = o.interval;
    manifest.labeled = true;
    manifest.metadata = {{"run_config", rc}};
    for (const auto& h : households) {
      const std::string file = h.user_id + ".csv";
      data::write_household_csv(dir / file, h, run_config_comment(rc));
      manifest.users.push_back({h.user_id, file, h.p_rated_hvac});
    }
    data::write_manifest(dir / "manifest.json", manifest);
    {
      std::ofstream f(dir / "params.ini", std::ios::trunc);
      f << "# run_config: " << rc.dump() << '\n';
      for (const auto& [k, v] : params.to_key_values()) f << k << " = " << v << '\n';
    }
    const double ratio = synth::hvac_energy_ratio(households);
    ratios.emplace_back(params.name, ratio);
    out << "site " << params.name << ": " << households.size() << " households x " << o.days << " days at "
        << o.interval << " min, HVAC energy ratio " << ratio_text(ratio) << " -> " << (dir / "manifest.json").string()
        << '\n';
  }
  if (ratios.size() > 1) {
    std::sort(ratios.begin(), ratios.end(), [](auto& a, auto& b) { return a.second > b.second; });
    out << "HVAC ratio ordering:";
    for (std::size_t i = 0; i < ratios.size(); ++i) out << (i ? " > " : " ") << ratios[i].first;
    out << '\n';
  }
  return kOk;
}

// ------------------------------------------------------------------ train

struct ArchOptions {
  std::size_t layers = 5;
  std::size_t channels = 2;
  bool no_dropout = false;
  double dropout_rate = 0.4;
  std::string dropout_placement = "after_conv";
  std::size_t window_length = 33;
  double window_hours = 0.0;
  std::vector<std::size_t> filters{30, 30, 40, 50, 50};
  std::vector<std::size_t> kernel_widths{10, 8, 6, 5, 5};
  std::vector<std::size_t> strides{1, 1, 1, 1, 1};
  std::vector<std::size_t> fc_widths{1024};

  /// Filter, kernel and stride lists describe the 5-block stack and are
  /// resized to `layers` by dropping or repeating the middle block.
  model::ArchConfig resolve(int interval_minutes) const {
    model::ArchConfig a;
    a.n_conv_layers = filters.size();
    a.filters = filters;
    a.kernel_widths = kernel_widths;
    a.strides = strides;
    if (a.strides.size() == 1 && a.n_conv_layers > 1) a.strides.assign(a.n_conv_layers, a.strides.front());
    a = a.with_layers(layers);
    a.input_channels = channels;
    a.use_dropout = !no_dropout;
    a.dropout_rate = dropout_rate;
    a.dropout_placement = model::parse_dropout_placement(dropout_placement);
    a.fc_widths = fc_widths;
    a.window_length = window_hours > 0.0 ? eval::window_length_for(window_hours, interval_minutes) : window_length;
    a.validate();
    return a;
  }
};

void add_arch(CLI::App& app, ArchOptions& o) {
  app.add_option("--layers", o.layers, "Conv blocks (4, 5 or 6)")->capture_default_str();
  app.add_option("--channels", o.channels, "1 = load only, 2 = load + temperature")
      ->capture_default_str()
      ->check(CLI::IsMember({1, 2}));
  app.add_flag("--no-dropout", o.no_dropout, "Build without the dropout layer");
  app.add_option("--dropout-rate", o.dropout_rate, "Dropout rate")->capture_default_str();
  app.add_option("--dropout-placement", o.dropout_placement, "after_conv or before_output")->capture_default_str();
  app.add_option("--window-length", o.window_length, "Input window length 2K+1")->capture_default_str();
  app.add_option("--window-hours", o.window_hours, "Half window as a duration (overrides --window-length)");
  app.add_option("--filters", o.filters, "Conv filter counts")->delimiter(',')->capture_default_str();
  app.add_option("--kernel-widths", o.kernel_widths, "Conv kernel widths")->delimiter(',')->capture_default_str();
  app.add_option("--strides", o.strides, "Conv strides")->delimiter(',')->capture_default_str();
  app.add_option("--fc-widths", o.fc_widths, "Hidden dense widths")->delimiter(',')->capture_default_str();
}

struct TrainOptions {
  std::string data;
  int interval = 0;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 7;
  bool augment = false;
  int epochs = 30;
  std::size_t batch_size = 1000;
  double learning_rate = 0.005;
  std::size_t samples_per_epoch = 0;
  std::uint64_t seed = 1;
  std::string out = default_out_dir();
  ArchOptions arch;
};

void add_train(CLI::App& app, TrainOptions& o) {
  app.add_option("--data", o.data, "Labeled site manifest")->required()->check(CLI::ExistingFile);
  app.add_option("--interval", o.interval, "Downsample to this interval first (minutes)");
  app.add_option("--train-fraction", o.train_fraction, "Share of users used for training")->capture_default_str();
  app.add_option("--split-seed", o.split_seed, "Seed of the user split")->capture_default_str();
  app.add_flag("--augment", o.augment, "Train on every base-load x HVAC combination");
  app.add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
  app.add_option("--batch-size", o.batch_size, "Mini-batch size")->capture_default_str();
  app.add_option("--lr", o.learning_rate, "ADAM learning rate")->capture_default_str();
  app.add_option("--samples-per-epoch", o.samples_per_epoch, "Windows drawn per epoch (0 = all)")
      ->capture_default_str();
  app.add_option("--seed", o.seed, "Seed for initialization and shuffling")->capture_default_str();
  app.add_option("--out", o.out, "Output directory ($S2P_OUTPUT_DIR)")->capture_default_str();
  add_arch(app, o.arch);
}

int cmd_train(const CLI::App& sub, const TrainOptions& o, std::ostream& out) {
  std::vector<data::Household> site = load_households(o.data, o.interval);
  require_labeled(site, "train");
  if (site.empty()) throw DataError("site '" + o.data + "' lists no households");

  eval::ExperimentConfig cfg;
  cfg.interval_minutes = site.front().total.interval_minutes;
  cfg.arch = o.arch.resolve(cfg.interval_minutes);
  cfg.train.epochs = o.epochs;
  cfg.train.batch_size = o.batch_size;
  cfg.train.learning_rate = o.learning_rate;
  cfg.train.samples_per_epoch = o.samples_per_epoch;
  cfg.train_fraction = o.train_fraction;
  cfg.split_seed = o.split_seed;
  cfg.augment = o.augment;
  cfg.seed = o.seed;
  cfg.validate();

  std::vector<std::string> site_ids;
  for (const auto& h : site) site_ids.push_back(h.user_id);
  const eval::TrainingData data = eval::prepare_training_data(cfg, std::move(site));
  const std::uint64_t model_seed = mix_seed(o.seed, "train");
  json split{{"train_users", json::array()}, {"test_users", json::array()}};
  const json rc = run_config(sub, {{"arch", cfg.arch},
                                   {"train", cfg.train},
                                   {"seeds", {{"base", o.seed}, {"model", model_seed}, {"split", o.split_seed}}}});

  std::vector<train::EpochRecord> history;
  model::S2PModel m = eval::train_model(cfg, data, model_seed, &history);

  std::set<std::string> test_ids;
  for (const auto& h : data.test) test_ids.insert(h.user_id);
  for (const auto& id : site_ids) (test_ids.contains(id) ? split["test_users"] : split["train_users"]).push_back(id);

  m.metadata = {{"run_config", rc}, {"split", split}};
  const fs::path dir = prepare_out_dir(o.out);
  model::save_checkpoint(m, dir / "model.s2pckpt");
  train::write_run_log(dir / "train_log.csv", history, run_config_comment(rc));
  write_json(dir / "split.json", json{{"run_config", rc}, {"train_users", split["train_users"]},
                                      {"test_users", split["test_users"]}});

  out << "trained on " << data.train.size() << " households (" << split["train_users"].size() << " users"
      << (o.augment ? ", augmented" : "") << "), " << data.test.size() << " held out; p_base "
      << data::format_fixed(m.normalization.p_base, 4) << " kW\n";
  if (!history.empty()) out << "final training loss " << data::format_fixed(history.back().mean_loss, 8) << '\n';
  out << "checkpoint -> " << (dir / "model.s2pckpt").string() << '\n';
  return kOk;
}

// ----------------------------------------------------------- disaggregate

struct DisaggregateOptions {
  std::string checkpoint;
  std::string data;
  std::string split;
  double epsilon = 0.005;
  std::size_t window_length = 0;
  std::size_t channels = 0;
  std::string out = default_out_dir();
};

void add_disaggregate(CLI::App& app, DisaggregateOptions& o) {
  app.add_option("--checkpoint", o.checkpoint, "Trained model")->required()->check(CLI::ExistingFile);
  app.add_option("--data", o.data, "Site manifest (labels optional)")->required()->check(CLI::ExistingFile);
  app.add_option("--split", o.split, "Only the test users of this split file")->check(CLI::ExistingFile);
  app.add_option("--epsilon", o.epsilon, "Cut-off below which HVAC is set to 0 (p.u.)")->capture_default_str();
  app.add_option("--window-length", o.window_length, "Expected window length (checked against the checkpoint)");
  app.add_option("--channels", o.channels, "Expected input channels (checked against the checkpoint)");
  app.add_option("--out", o.out, "Output directory ($S2P_OUTPUT_DIR)")->capture_default_str();
}

void check_model_matches(const model::S2PModel& m, std::size_t window_length, std::size_t channels, int interval) {
  if (window_length != 0 && window_length != m.arch.window_length) {
    throw ConfigError("window length " + std::to_string(window_length) + " does not match the checkpoint's " +
                      std::to_string(m.arch.window_length));
  }
  if (channels != 0 && channels != m.arch.input_channels) {
    throw ConfigError("channel count " + std::to_string(channels) + " does not match the checkpoint's " +
                      std::to_string(m.arch.input_channels));
  }
  if (interval != m.interval_minutes) {
    throw ConfigError("data is sampled every " + std::to_string(interval) + " minutes but the checkpoint expects " +
                      std::to_string(m.interval_minutes));
  }
}

int cmd_disaggregate(const CLI::App& sub, const DisaggregateOptions& o, std::ostream& out) {
  const model::S2PModel m = model::load_checkpoint(o.checkpoint);
  const auto site = restrict_to_split(load_households(o.data, m.interval_minutes), o.split, "test_users");
  check_model_matches(m, o.window_length, o.channels, site.front().total.interval_minutes);
  const json rc = run_config(sub, {{"model_run_config", m.metadata.value("run_config", json())}});

  const fs::path dir = prepare_out_dir(o.out);
  json summary{{"run_config", rc}, {"users", json::array()}};
  model::ClampStats all;
  for (const auto& h : site) {
    const data::NormalizedHousehold norm = data::apply_normalization(h, m.normalization);
    model::ClampStats stats;
    const data::Profile pred = model::disaggregate_series(m, norm.household, o.epsilon, &stats);

    const fs::path path = dir / (h.user_id + "_hvac_pred.csv");
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error("cannot open '" + path.string() + "' for writing");
    f << "# run_config: " << rc.dump() << '\n';
    f << "timestamp,total_kw,hvac_pred_kw\n";
    const std::int64_t step = static_cast<std::int64_t>(h.total.interval_minutes) * 60;
    for (std::size_t t = 0; t < pred.size(); ++t) {
      const double kw = std::min(pred[t] * m.normalization.p_base, h.total[t]);
      f << data::format_timestamp(h.start_time + static_cast<std::int64_t>(t) * step) << ','
        << data::format_fixed(h.total[t], 6) << ',' << data::format_fixed(kw, 6) << '\n';
    }
    if (!f) throw Error("failed writing '" + path.string() + "'");

    summary["users"].push_back({{"user_id", h.user_id},
                                {"points", stats.points},
                                {"capped_at_total", stats.capped},
                                {"zeroed_below_epsilon", stats.zeroed},
                                {"clipped_inputs", norm.clipped}});
    all.points += stats.points;
    all.capped += stats.capped;
    all.zeroed += stats.zeroed;
  }
  write_json(dir / "disaggregate_summary.json", summary);
  out << "disaggregated " << site.size() << " households (" << all.points << " points): " << all.capped
      << " capped at the total, " << all.zeroed << " set to zero below epsilon\n";
  return kOk;
}

// --------------------------------------------------------------- finetune

struct FinetuneOptions {
  std::string checkpoint;
  std::string data;
  std::string split;
  int days = 7;
  std::string scope = "household";
  int epochs = 15;
  double learning_rate = 0.001;
  std::size_t batch_size = 1000;
  bool no_first_bn = false;
  std::string bn_statistics = "frozen";
  std::uint64_t seed = 1;
  std::string out = default_out_dir();
};

void add_finetune(CLI::App& app, FinetuneOptions& o) {
  app.add_option("--checkpoint", o.checkpoint, "Pre-trained model")->required()->check(CLI::ExistingFile);
  app.add_option("--data", o.data, "Labeled target-site manifest")->required()->check(CLI::ExistingFile);
  app.add_option("--split", o.split, "Only the test users of this split file")->check(CLI::ExistingFile);
  app.add_option("--days", o.days, "Labeled days used for fine-tuning")->capture_default_str();
  app.add_option("--scope", o.scope, "household (one model each) or site (one shared model)")
      ->capture_default_str()
      ->check(CLI::IsMember({"household", "site"}));
  app.add_option("--epochs", o.epochs, "Fine-tuning epochs")->capture_default_str();
  app.add_option("--lr", o.learning_rate, "Fine-tuning learning rate")->capture_default_str();
  app.add_option("--batch-size", o.batch_size, "Mini-batch size")->capture_default_str();
  app.add_flag("--no-first-bn", o.no_first_bn, "Keep the first batch norm frozen");
  app.add_option("--bn-statistics", o.bn_statistics, "batch, frozen_if_untrainable or frozen")->capture_default_str();
  app.add_option("--seed", o.seed, "Shuffling seed")->capture_default_str();
  app.add_option("--out", o.out, "Output directory ($S2P_OUTPUT_DIR)")->capture_default_str();
}

/// Names of parameters and buffers whose values differ between two models.
std::vector<std::string> changed_tensors(const nn::Sequential& a, const nn::Sequential& b) {
  std::vector<std::string> changed;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t p = 0; p < a.layer(i).parameters().size(); ++p) {
      if (!(a.layer(i).parameters()[p].value == b.layer(i).parameters()[p].value)) {
        changed.push_back(a.layer(i).parameters()[p].name);
      }
    }
    for (std::size_t p = 0; p < a.layer(i).buffers().size(); ++p) {
      if (!(a.layer(i).buffers()[p].value == b.layer(i).buffers()[p].value)) {
        changed.push_back(a.layer(i).buffers()[p].name);
      }
    }
  }
  return changed;
}

int cmd_finetune(const CLI::App& sub, const FinetuneOptions& o, std::ostream& out) {
  const model::S2PModel base = model::load_checkpoint(o.checkpoint);
  const auto site = restrict_to_split(load_households(o.data, base.interval_minutes), o.split, "test_users");
  require_labeled(site, "finetune");
  check_model_matches(base, 0, 0, site.front().total.interval_minutes);
  if (o.days < 1) throw ConfigError("--days must be >= 1");
  const std::size_t per_day = static_cast<std::size_t>(1440 / base.interval_minutes);
  for (const auto& h : site) {
    if (h.size() < static_cast<std::size_t>(o.days) * per_day) {
      throw DataError("household '" + h.user_id + "' has " + std::to_string(h.size() / per_day) +
                      " labeled days, fewer than the " + std::to_string(o.days) + " requested");
    }
  }

  train::TrainConfig tc;
  tc.fine_tune_epochs = o.epochs;
  tc.fine_tune_learning_rate = o.learning_rate;
  tc.batch_size = o.batch_size;
  tc.include_first_bn = !o.no_first_bn;
  tc.fine_tune_scope = train::parse_fine_tune_scope(o.scope);
  json stats_json = o.bn_statistics;
  train::TrainConfig parsed;
  train::from_json(json{{"fine_tune_statistics", stats_json}}, parsed);
  tc.fine_tune_statistics = parsed.fine_tune_statistics;

  model::S2PModel probe = base;
  train::apply_fine_tune_freeze(probe, tc.include_first_bn);
  const std::vector<std::string> tuned_names = model::trainable_parameter_names(probe.net);
  std::set<std::string> allowed(tuned_names.begin(), tuned_names.end());
  if (tc.fine_tune_statistics == nn::BatchStatistics::batch) {
    for (std::size_t i = 0; i < probe.net.size(); ++i)
      for (const auto& b : probe.net.layer(i).buffers()) allowed.insert(b.name);
  } else if (tc.fine_tune_statistics == nn::BatchStatistics::frozen_if_untrainable && tc.include_first_bn) {
    for (std::size_t i = 0; i < probe.net.size(); ++i) {
      if (probe.net.layer(i).name() == "bn1")
        for (const auto& b : probe.net.layer(i).buffers()) allowed.insert(b.name);
    }
  }

  const fs::path dir = prepare_out_dir(o.out);
  json summary{{"run_config", run_config(sub)}, {"retrained_parameters", tuned_names}, {"checkpoints", json::array()}};
  std::size_t frozen_total = 0;
  auto run_one = [&](const std::string& label, const std::vector<data::Household>& households, std::uint64_t seed) {
    data::WindowSet ws(base.half_width());
    for (const auto& h : households) {
      ws.add(data::apply_normalization(data::slice_days(h, 0, o.days), base.normalization).household);
    }
    train::TrainConfig cfg = tc;
    cfg.seed = seed;
    model::S2PModel tuned = base;
    const train::TrainResult r = train::fine_tune(tuned, ws, cfg);
    for (const auto& name : changed_tensors(base.net, tuned.net)) {
      if (!allowed.contains(name)) throw ContractError("fine-tuning changed frozen tensor '" + name + "'");
    }
    std::size_t frozen = 0;
    for (const nn::Parameter* p : tuned.net.parameters()) frozen += p->trainable ? 0 : 1;
    frozen_total += frozen;

    const json rc = run_config(sub, {{"train", cfg},
                                     {"seeds", {{"fine_tune", seed}}},
                                     {"base_run_config", base.metadata.value("run_config", json())}});
    tuned.metadata = {{"run_config", rc}, {"fine_tuned_on", label}};
    const fs::path path = dir / ("finetuned_" + label + ".s2pckpt");
    model::save_checkpoint(tuned, path);
    train::write_run_log(dir / ("finetune_log_" + label + ".csv"), r.history, run_config_comment(rc));
    summary["checkpoints"].push_back({{"label", label}, {"file", path.filename().string()}, {"seed", seed},
                                      {"frozen_parameters_unchanged", frozen}});
  };

  if (tc.fine_tune_scope == train::FineTuneScope::site) {
    run_one("site", site, mix_seed(o.seed, "site"));
  } else {
    for (const auto& h : site) run_one(h.user_id, {h}, mix_seed(o.seed, h.user_id));
  }
  write_json(dir / "finetune_summary.json", summary);
  out << "fine-tuned " << summary["checkpoints"].size() << " checkpoint(s) on " << o.days << " days; retrained "
      << tuned_names.size() << " parameters, frozen parameters bit-identical (" << frozen_total << " checked)\n";
  return kOk;
}

// ------------------------------------------------------------------- eval

struct EvalCliOptions {
  std::string checkpoint;
  std::string finetuned_dir;
  std::string data;
  std::string split;
  bool oracle = false;
  bool zero = false;
  double epsilon = 0.005;
  int from_day = 0;
  std::string nee_mode = "hourly";
  std::string out = default_out_dir();
};

void add_eval(CLI::App& app, EvalCliOptions& o) {
  app.add_option("--checkpoint", o.checkpoint, "Model to score")->check(CLI::ExistingFile);
  app.add_option("--finetuned-dir", o.finetuned_dir, "Directory of finetuned_<user>.s2pckpt files")
      ->check(CLI::ExistingDirectory);
  app.add_option("--data", o.data, "Labeled site manifest")->required()->check(CLI::ExistingFile);
  app.add_option("--split", o.split, "Only the test users of this split file")->check(CLI::ExistingFile);
  app.add_flag("--oracle", o.oracle, "Score the labels themselves (sanity check, 0% everywhere)");
  app.add_flag("--zero", o.zero, "Score the always-zero predictor");
  app.add_option("--epsilon", o.epsilon, "Cut-off below which HVAC is set to 0 (p.u.)")->capture_default_str();
  app.add_option("--from-day", o.from_day, "Skip this many leading days when scoring")->capture_default_str();
  app.add_option("--nee-mode", o.nee_mode, "hourly or whole_period")->capture_default_str();
  app.add_option("--out", o.out, "Output directory ($S2P_OUTPUT_DIR)")->capture_default_str();
}

int cmd_eval(const CLI::App& sub, const EvalCliOptions& o, std::ostream& out) {
  const int sources = (o.checkpoint.empty() ? 0 : 1) + (o.finetuned_dir.empty() ? 0 : 1) + (o.oracle ? 1 : 0) +
                      (o.zero ? 1 : 0);
  if (sources != 1) throw ConfigError("eval needs exactly one of --checkpoint, --finetuned-dir, --oracle, --zero");
  const eval::EvalOptions opts{o.epsilon, eval::parse_nee_mode(o.nee_mode), o.from_day};

  eval::EvalReport report;
  std::string predictor;
  if (!o.checkpoint.empty()) {
    const model::S2PModel m = model::load_checkpoint(o.checkpoint);
    const auto site = restrict_to_split(load_households(o.data, m.interval_minutes), o.split, "test_users");
    require_labeled(site, "eval");
    check_model_matches(m, 0, 0, site.front().total.interval_minutes);
    report = eval::evaluate_site(m, site, opts);
    predictor = "model";
  } else if (!o.finetuned_dir.empty()) {
    const auto site = restrict_to_split(load_households(o.data, 0), o.split, "test_users");
    require_labeled(site, "eval");
    std::vector<model::S2PModel> models;
    for (const auto& h : site) {
      const fs::path path = fs::path(o.finetuned_dir) / ("finetuned_" + h.user_id + ".s2pckpt");
      const fs::path shared = fs::path(o.finetuned_dir) / "finetuned_site.s2pckpt";
      if (fs::exists(path)) models.push_back(model::load_checkpoint(path));
      else if (fs::exists(shared)) models.push_back(model::load_checkpoint(shared));
      else throw DataError("no fine-tuned checkpoint for household '" + h.user_id + "' in '" + o.finetuned_dir + "'");
      check_model_matches(models.back(), 0, 0, h.total.interval_minutes);
    }
    for (std::size_t i = 1; i < models.size(); ++i) {
      if (!(models[i].normalization == models[0].normalization)) {
        throw DataError("fine-tuned checkpoints disagree on normalization");
      }
    }
    const eval::Predictor per_user = [&](std::size_t i, const data::Household& h, model::ClampStats& stats) {
      return model::disaggregate_series(models[i], h, o.epsilon, &stats);
    };
    report = eval::evaluate_predictions(site, models.front().normalization, per_user, opts);
    predictor = "finetuned";
  } else {
    const auto site = restrict_to_split(load_households(o.data, 0), o.split, "test_users");
    require_labeled(site, "eval");
    report = eval::evaluate_predictions(site, data::fit_normalization(site),
                                        o.oracle ? eval::oracle_predictor() : eval::zero_predictor(), opts);
    predictor = o.oracle ? "oracle" : "zero";
  }

  const json rc = run_config(sub);
  report.metadata = {{"run_config", rc}, {"predictor", predictor}};
  const fs::path dir = prepare_out_dir(o.out);
  eval::write_report_json(dir / "report.json", report);
  eval::write_hourly_csv(dir / "hourly_nee.csv", report, run_config_comment(rc));
  eval::write_daily_csv(dir / "daily_nmae.csv", report, run_config_comment(rc));
  out << predictor << " on " << report.users.size() << " households: nMAE " << data::format_fixed(report.nmae.mean, 3)
      << "% (std " << data::format_fixed(report.nmae.std, 3) << "), nEE " << data::format_fixed(report.nee.mean, 3)
      << "% (std " << data::format_fixed(report.nee.std, 3) << ")\n";
  return kOk;
}

// ----------------------------------------------------------------- matrix

struct MatrixOptions {
  std::string spec;
  unsigned threads = 1;
  bool quiet = false;
  std::string out = default_out_dir();
};

void add_matrix(CLI::App& app, MatrixOptions& o) {
  app.add_option("--spec", o.spec, "Experiment matrix (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--threads", o.threads, "Models trained in parallel")->capture_default_str();
  app.add_flag("--quiet", o.quiet, "No progress output");
  app.add_option("--out", o.out, "Output directory ($S2P_OUTPUT_DIR)")->capture_default_str();
}

int cmd_matrix(const CLI::App& sub, const MatrixOptions& o, std::ostream& out) {
  std::ifstream f(o.spec);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("matrix spec '" + o.spec + "': " + e.what());
  }
  const eval::MatrixSpec spec = eval::MatrixSpec::from_json(j);
  const json rc = run_config(sub, {{"matrix", spec.to_json()}});

  eval::MatrixOptions mo;
  mo.threads = o.threads;
  if (!o.quiet) mo.log = [&out](const std::string& msg) { out << msg << '\n' << std::flush; };
  const std::vector<eval::CellResult> results = eval::run_matrix(spec, mo);

  const fs::path dir = prepare_out_dir(o.out);
  const fs::path reports = prepare_out_dir((dir / "reports").string());
  for (std::size_t i = 0; i < results.size(); ++i) {
    eval::EvalReport r = results[i].report;
    r.metadata["run_config"] = rc;
    char name[32];
    std::snprintf(name, sizeof name, "cell_%03zu", i);
    eval::write_report_json(reports / (std::string(name) + ".json"), r);
    eval::write_hourly_csv(reports / (std::string(name) + "_hourly_nee.csv"), r, run_config_comment(rc));
  }
  eval::write_matrix_summary(dir / "matrix_summary.csv", results, run_config_comment(rc));
  out << results.size() << " cells -> " << (dir / "matrix_summary.csv").string() << '\n';
  return kOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const FormatError*>(&e)) return kDataError;
  if (dynamic_cast<const NumericError*>(&e)) return kNumericError;
  return kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"HVAC load disaggregation from smart-meter data", "s2p"};
  app.set_config("--config", "", "TOML/INI file; [section] names match subcommands, flags override it");
  app.require_subcommand(1);
  app.set_version_flag("--version", S2P_VERSION);

  SynthOptions synth_o;
  TrainOptions train_o;
  DisaggregateOptions disagg_o;
  FinetuneOptions finetune_o;
  EvalCliOptions eval_o;
  MatrixOptions matrix_o;
  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic labeled sites");
  CLI::App* train = app.add_subcommand("train", "Train a model on a labeled site");
  CLI::App* disagg = app.add_subcommand("disaggregate", "Estimate HVAC load with a trained model");
  CLI::App* finetune = app.add_subcommand("finetune", "Fine-tune the first and last layers on a target site");
  CLI::App* evaluate = app.add_subcommand("eval", "Score a model against labels (nMAE, nEE)");
  CLI::App* matrix = app.add_subcommand("matrix", "Train and score a grid of experiment variants");
  add_synth(*synth, synth_o);
  add_train(*train, train_o);
  add_disaggregate(*disagg, disagg_o);
  add_finetune(*finetune, finetune_o);
  add_eval(*evaluate, eval_o);
  add_matrix(*matrix, matrix_o);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (synth->parsed()) return cmd_synth(*synth, synth_o, out);
    if (train->parsed()) return cmd_train(*train, train_o, out);
    if (disagg->parsed()) return cmd_disaggregate(*disagg, disagg_o, out);
    if (finetune->parsed()) return cmd_finetune(*finetune, finetune_o, out);
    if (evaluate->parsed()) return cmd_eval(*evaluate, eval_o, out);
    if (matrix->parsed()) return cmd_matrix(*matrix, matrix_o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kFailure;
}

}  // namespace s2p::cli
