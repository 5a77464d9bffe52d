#include "s2p/eval/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "s2p/data/csv_io.hpp"
#include "s2p/data/transform.hpp"
#include "s2p/data/windows.hpp"
#include "s2p/error.hpp"
#include "s2p/synth/site.hpp"
#include "s2p/util/seed.hpp"

namespace s2p::eval {

namespace {

using nlohmann::json;

template <typename T>
T get_as(const json& value, const std::string& what) {
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

std::string value_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

model::ArchConfig effective_arch(const ExperimentConfig& cfg) {
  model::ArchConfig arch = cfg.arch;
  if (cfg.window_hours) arch.window_length = window_length_for(*cfg.window_hours, cfg.interval_minutes);
  return arch;
}

data::WindowSet normalized_windows(std::span<const data::Household> households, const data::NormalizationSpec& spec,
                                   std::size_t half_width) {
  data::WindowSet ws(half_width);
  for (const auto& h : households) ws.add(data::apply_normalization(h, spec).household);
  return ws;
}

data::Household fine_tune_slice(const data::Household& h, int days) {
  const std::size_t per_day = static_cast<std::size_t>(1440 / h.total.interval_minutes);
  if (h.size() <= static_cast<std::size_t>(days) * per_day) {
    throw DataError("household '" + h.user_id + "' has fewer than " + std::to_string(days + 1) +
                    " days; fine-tuning needs " + std::to_string(days) + " labeled days plus data to score");
  }
  return data::slice_days(h, 0, days);
}

int from_day_of(const ExperimentConfig& cfg) {
  return cfg.eval_from_day.value_or(cfg.fine_tune ? cfg.fine_tune_days : 0);
}

}  // namespace

std::string SiteSource::name() const { return manifest.empty() ? preset : manifest; }

std::vector<data::Household> SiteSource::load(int interval_minutes) const {
  if (!manifest.empty()) {
    std::vector<data::Household> out;
    for (const auto& h : data::load_site(manifest)) {
      out.push_back(h.total.interval_minutes == interval_minutes ? h : data::downsample(h, interval_minutes));
    }
    return out;
  }
  synth::SiteParams params = synth::SiteParams::preset(preset);
  if (!overrides.empty()) params = synth::SiteParams::from_key_values(overrides, params);
  return synth::gen_site(users, days, params, interval_minutes);
}

void to_json(json& j, const SiteSource& s) {
  j = json::object();
  if (s.manifest.empty()) {
    j["preset"] = s.preset;
    j["overrides"] = s.overrides;
    j["users"] = s.users;
    j["days"] = s.days;
  } else {
    j["manifest"] = s.manifest;
  }
}

void from_json(const json& j, SiteSource& s) {
  if (j.is_string()) {
    const std::string v = j.get<std::string>();
    if (v.size() > 5 && v.ends_with(".json")) {
      s.manifest = v;
    } else {
      s.preset = v;
      s.manifest.clear();
    }
    return;
  }
  if (!j.is_object()) throw ConfigError("site must be a preset name, a manifest path or an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "preset") s.preset = get_as<std::string>(value, "site.preset");
    else if (key == "manifest") s.manifest = get_as<std::string>(value, "site.manifest");
    else if (key == "users") s.users = get_as<int>(value, "site.users");
    else if (key == "days") s.days = get_as<int>(value, "site.days");
    else if (key == "overrides") {
      if (!value.is_object()) throw ConfigError("site.overrides must be an object");
      for (const auto& [k, v] : value.items()) s.overrides[k] = value_text(v);
    } else {
      throw ConfigError("site: unknown key '" + key + "'");
    }
  }
  if (s.users < 1 || s.days < 1) throw ConfigError("site: users and days must be >= 1");
}

std::size_t window_length_for(double hours, int interval_minutes) {
  if (!(hours > 0.0) || interval_minutes < 1) throw ConfigError("window_hours must be positive");
  const double k = std::round(hours * 60.0 / interval_minutes);
  if (k < 1.0) throw ConfigError("window of " + std::to_string(hours) + " h is shorter than one sample");
  return 2 * static_cast<std::size_t>(k) + 1;
}

void ExperimentConfig::validate() const {
  effective_arch(*this).validate();
  train.validate();
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ConfigError("train_fraction must lie in (0, 1]");
  if (transfer_users < 1) throw ConfigError("transfer_users must be >= 1");
  if (interval_minutes < 1 || 1440 % interval_minutes != 0) {
    throw ConfigError("interval_minutes must divide a day into whole samples");
  }
  if (fine_tune_days < 1) throw ConfigError("fine_tune_days must be >= 1");
  if (eval_from_day && *eval_from_day < 0) throw ConfigError("eval_from_day must be >= 0");
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
}

SiteSource ExperimentConfig::site(const std::string& name) const {
  if (auto it = sites.find(name); it != sites.end()) return it->second;
  if (name == train_site.name()) return train_site;
  SiteSource s;
  from_json(json(name), s);
  s.users = transfer_users;
  s.days = train_site.days;
  return s;
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{
      {"arch", c.arch},
      {"train", c.train},
      {"train_site", c.train_site},
      {"sites", c.sites},
      {"train_fraction", c.train_fraction},
      {"split_seed", c.split_seed},
      {"transfer_users", c.transfer_users},
      {"interval_minutes", c.interval_minutes},
      {"window_hours", c.window_hours ? json(*c.window_hours) : json(nullptr)},
      {"augment", c.augment},
      {"fine_tune", c.fine_tune},
      {"fine_tune_days", c.fine_tune_days},
      {"eval_from_day", c.eval_from_day ? json(*c.eval_from_day) : json(nullptr)},
      {"epsilon", c.epsilon},
      {"nee_mode", std::string(to_string(c.nee_mode))},
      {"seed", c.seed},
  };
}

void from_json(const json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ConfigError("experiment configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "arch") {
      model::from_json(value, c.arch);
    } else if (key == "train") {
      train::from_json(value, c.train);
    } else if (key == "train_site") {
      from_json(value, c.train_site);
    } else if (key == "sites") {
      if (!value.is_object()) throw ConfigError("sites must be an object of name -> site");
      for (const auto& [name, src] : value.items()) {
        SiteSource s;
        s.users = c.transfer_users;
        s.days = c.train_site.days;
        from_json(src, s);
        c.sites[name] = s;
      }
    } else if (key == "train_fraction") {
      c.train_fraction = get_as<double>(value, key);
    } else if (key == "split_seed") {
      c.split_seed = get_as<std::uint64_t>(value, key);
    } else if (key == "transfer_users") {
      c.transfer_users = get_as<int>(value, key);
    } else if (key == "interval_minutes") {
      c.interval_minutes = get_as<int>(value, key);
    } else if (key == "window_hours") {
      c.window_hours = value.is_null() ? std::nullopt : std::optional<double>(get_as<double>(value, key));
    } else if (key == "augment") {
      c.augment = get_as<bool>(value, key);
    } else if (key == "fine_tune") {
      c.fine_tune = get_as<bool>(value, key);
    } else if (key == "fine_tune_days") {
      c.fine_tune_days = get_as<int>(value, key);
    } else if (key == "eval_from_day") {
      c.eval_from_day = value.is_null() ? std::nullopt : std::optional<int>(get_as<int>(value, key));
    } else if (key == "epsilon") {
      c.epsilon = get_as<double>(value, key);
    } else if (key == "nee_mode") {
      c.nee_mode = parse_nee_mode(get_as<std::string>(value, key));
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(value, key);
    } else {
      throw ConfigError("experiment configuration: unknown key '" + key + "'");
    }
  }
}

TrainingData prepare_training_data(const ExperimentConfig& cfg) {
  return prepare_training_data(cfg, cfg.train_site.load(cfg.interval_minutes));
}

TrainingData prepare_training_data(const ExperimentConfig& cfg, std::vector<data::Household> site_households) {
  for (const auto& h : site_households) {
    if (!h.hvac) throw DataError("training household '" + h.user_id + "' has no HVAC label");
  }
  TrainingData out;
  if (cfg.train_fraction < 1.0) {
    const std::vector<double> fractions{cfg.train_fraction, 1.0 - cfg.train_fraction};
    auto groups = data::split_households(site_households, fractions, cfg.split_seed);
    out.train = std::move(groups[0]);
    out.test = std::move(groups[1]);
  } else {
    out.train = std::move(site_households);
  }
  if (cfg.augment) out.train = data::augment(out.train);
  out.normalization = data::fit_normalization(out.train);
  return out;
}

model::S2PModel train_model(const ExperimentConfig& cfg, const TrainingData& data, std::uint64_t seed,
                            std::vector<train::EpochRecord>* history) {
  cfg.validate();
  const model::ArchConfig arch = effective_arch(cfg);
  model::S2PModel m = model::S2PModel::build(arch, mix_seed(seed, "init"));
  m.normalization = data.normalization;
  m.interval_minutes = cfg.interval_minutes;
  const data::WindowSet windows = normalized_windows(data.train, data.normalization, arch.half_width());
  train::TrainConfig tc = cfg.train;
  tc.seed = mix_seed(seed, "shuffle");
  train::TrainResult r = train::train(m, windows, tc);
  if (history) *history = std::move(r.history);
  return m;
}

EvalReport evaluate_with_config(const ExperimentConfig& cfg, const model::S2PModel& model,
                                std::span<const data::Household> households) {
  EvalOptions opts{cfg.epsilon, cfg.nee_mode, from_day_of(cfg)};
  if (!cfg.fine_tune) return evaluate_site(model, households, opts);

  const std::uint64_t seed = model_seed(cfg);
  if (cfg.train.fine_tune_scope == train::FineTuneScope::site) {
    std::vector<data::Household> slices;
    for (const auto& h : households) slices.push_back(fine_tune_slice(h, cfg.fine_tune_days));
    model::S2PModel tuned = model;
    train::TrainConfig tc = cfg.train;
    tc.seed = mix_seed(seed, "fine_tune/site");
    train::fine_tune(tuned, normalized_windows(slices, model.normalization, model.half_width()), tc);
    return evaluate_site(tuned, households, opts);
  }

  for (const auto& h : households) fine_tune_slice(h, cfg.fine_tune_days);
  const Predictor per_household = [&](std::size_t, const data::Household& norm, model::ClampStats& stats) {
    model::S2PModel tuned = model;
    data::WindowSet ws(model.half_width());
    ws.add(data::slice_days(norm, 0, cfg.fine_tune_days));
    train::TrainConfig tc = cfg.train;
    tc.seed = mix_seed(seed, "fine_tune/" + norm.user_id);
    train::fine_tune(tuned, ws, tc);
    return model::disaggregate_series(tuned, norm, cfg.epsilon, &stats);
  };
  return evaluate_predictions(households, model.normalization, per_household, opts);
}

json Cell::to_json() const {
  return json{{"layers", layers},       {"dropout", dropout},     {"channels", channels},
              {"augment", augment},     {"granularity", granularity}, {"window_length", window_length},
              {"site", site},           {"fine_tune", fine_tune}, {"seed", seed}};
}

std::string Cell::label() const {
  return std::to_string(layers) + "-layer" + (dropout ? " dropout" : " no-dropout") + " " + std::to_string(channels) +
         "ch" + (augment ? " aug" : "") + " " + std::to_string(granularity) + "min L" + std::to_string(window_length) +
         " " + site + (fine_tune ? " FT" : "") + " seed" + std::to_string(seed);
}

MatrixSpec MatrixSpec::from_json(const json& j) {
  static const std::set<std::string> known{"layers",      "dropout",      "channels", "augment",   "granularity",
                                           "window_length", "window_hours", "site",     "fine_tune", "seed"};
  if (!j.is_object()) throw ConfigError("matrix spec must be a JSON object");
  MatrixSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "name") {
      spec.name = get_as<std::string>(value, "name");
    } else if (key == "base") {
      eval::from_json(value, spec.base);
    } else if (key == "axes") {
      if (!value.is_object()) throw ConfigError("matrix axes must be an object of name -> list");
      for (const auto& [axis, values] : value.items()) {
        if (!known.contains(axis)) throw ConfigError("invalid matrix axis '" + axis + "'");
        if (!values.is_array() || values.empty()) throw ConfigError("matrix axis '" + axis + "' needs a non-empty list");
        spec.axes.emplace_back(axis, std::vector<json>(values.begin(), values.end()));
      }
    } else {
      throw ConfigError("matrix spec: unknown key '" + key + "'");
    }
  }
  const bool has_len = std::any_of(spec.axes.begin(), spec.axes.end(), [](auto& a) { return a.first == "window_length"; });
  const bool has_hours = std::any_of(spec.axes.begin(), spec.axes.end(), [](auto& a) { return a.first == "window_hours"; });
  if (has_len && has_hours) throw ConfigError("matrix axes window_length and window_hours are mutually exclusive");
  spec.base.validate();
  return spec;
}

json MatrixSpec::to_json() const {
  json axes_json = json::object();
  for (const auto& [axis, values] : axes) axes_json[axis] = values;
  return json{{"name", name}, {"base", base}, {"axes", axes_json}};
}

std::vector<Cell> expand_cells(const MatrixSpec& spec) {
  const ExperimentConfig& b = spec.base;
  std::size_t total = 1;
  for (const auto& [axis, values] : spec.axes) total *= values.size();

  std::vector<Cell> cells;
  cells.reserve(total);
  std::vector<std::size_t> pos(spec.axes.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Cell c;
    c.layers = b.arch.n_conv_layers;
    c.dropout = b.arch.use_dropout;
    c.channels = b.arch.input_channels;
    c.augment = b.augment;
    c.granularity = b.interval_minutes;
    c.site = b.train_site.name();
    c.fine_tune = b.fine_tune;
    c.seed = b.seed;
    std::optional<double> hours = b.window_hours;
    std::optional<std::size_t> length;

    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      const auto& [axis, values] = spec.axes[a];
      const json& v = values[pos[a]];
      const std::string what = "matrix axis '" + axis + "' value " + v.dump();
      if (axis == "layers") {
        c.layers = get_as<std::size_t>(v, what);
        if (c.layers < 1) throw ConfigError(what + ": must be >= 1");
      } else if (axis == "dropout") {
        c.dropout = get_as<bool>(v, what);
      } else if (axis == "channels") {
        c.channels = get_as<std::size_t>(v, what);
        if (c.channels != 1 && c.channels != 2) throw ConfigError(what + ": channels must be 1 or 2");
      } else if (axis == "augment") {
        c.augment = get_as<bool>(v, what);
      } else if (axis == "granularity") {
        c.granularity = get_as<int>(v, what);
        if (c.granularity < 1 || 1440 % c.granularity != 0) throw ConfigError(what + ": must divide a day");
      } else if (axis == "window_length") {
        length = get_as<std::size_t>(v, what);
        if (*length < 3 || *length % 2 == 0) throw ConfigError(what + ": must be odd and >= 3");
      } else if (axis == "window_hours") {
        hours = get_as<double>(v, what);
        if (!(*hours > 0.0)) throw ConfigError(what + ": must be positive");
      } else if (axis == "site") {
        c.site = get_as<std::string>(v, what);
      } else if (axis == "fine_tune") {
        c.fine_tune = get_as<bool>(v, what);
      } else if (axis == "seed") {
        c.seed = get_as<std::uint64_t>(v, what);
      }
    }
    c.window_length = length ? *length : hours ? window_length_for(*hours, c.granularity) : b.arch.window_length;
    cells.push_back(c);

    for (std::size_t a = spec.axes.size(); a-- > 0;) {
      if (++pos[a] < spec.axes[a].second.size()) break;
      pos[a] = 0;
    }
  }
  return cells;
}

ExperimentConfig resolve_cell(const MatrixSpec& spec, const Cell& cell) {
  ExperimentConfig cfg = spec.base;
  cfg.arch = spec.base.arch.with_layers(cell.layers);
  cfg.arch.use_dropout = cell.dropout;
  cfg.arch.input_channels = cell.channels;
  cfg.arch.window_length = cell.window_length;
  cfg.window_hours.reset();
  cfg.augment = cell.augment;
  cfg.interval_minutes = cell.granularity;
  cfg.fine_tune = cell.fine_tune;
  cfg.seed = cell.seed;
  if (!cfg.eval_from_day) {
    bool any_fine_tune = spec.base.fine_tune;
    for (const auto& [axis, values] : spec.axes) {
      if (axis != "fine_tune") continue;
      for (const auto& v : values) any_fine_tune = any_fine_tune || (v.is_boolean() && v.get<bool>());
    }
    cfg.eval_from_day = any_fine_tune ? cfg.fine_tune_days : 0;
  }
  cfg.validate();
  return cfg;
}

std::string training_key(const ExperimentConfig& cfg) {
  train::TrainConfig tc = cfg.train;
  tc.seed = 0;
  const json key{
      {"arch", effective_arch(cfg)},   {"train", tc},
      {"train_site", cfg.train_site},  {"train_fraction", cfg.train_fraction},
      {"split_seed", cfg.split_seed},  {"interval_minutes", cfg.interval_minutes},
      {"augment", cfg.augment},        {"seed", cfg.seed},
  };
  return key.dump();
}

std::uint64_t model_seed(const ExperimentConfig& cfg) { return mix_seed(cfg.seed, training_key(cfg)); }

std::vector<CellResult> run_matrix(const MatrixSpec& spec, const MatrixOptions& options) {
  const std::vector<Cell> cells = expand_cells(spec);
  std::vector<ExperimentConfig> configs;
  configs.reserve(cells.size());
  for (const Cell& c : cells) configs.push_back(resolve_cell(spec, c));

  std::vector<std::string> group_keys;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string key = training_key(configs[i]);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) group_keys.push_back(key);
    it->second.push_back(i);
  }

  // Site data is generated up front so the parallel phase only reads it.
  std::map<std::string, std::vector<data::Household>> site_cache;
  auto cache_key = [](const SiteSource& s, int interval) { return json(s).dump() + "@" + std::to_string(interval); };
  auto ensure = [&](const SiteSource& s, int interval) {
    const std::string k = cache_key(s, interval);
    if (!site_cache.contains(k)) site_cache.emplace(k, s.load(interval));
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    ensure(configs[i].train_site, configs[i].interval_minutes);
    if (cells[i].site != configs[i].train_site.name()) ensure(configs[i].site(cells[i].site), configs[i].interval_minutes);
  }

  std::mutex log_mutex;
  auto log = [&](const std::string& msg) {
    if (!options.log) return;
    std::lock_guard lock(log_mutex);
    options.log(msg);
  };

  std::vector<CellResult> results(cells.size());
  std::vector<std::exception_ptr> errors(group_keys.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t g; (g = next.fetch_add(1)) < group_keys.size();) {
      try {
        const std::vector<std::size_t>& members = groups.at(group_keys[g]);
        const ExperimentConfig& cfg = configs[members.front()];
        const TrainingData data =
            prepare_training_data(cfg, site_cache.at(cache_key(cfg.train_site, cfg.interval_minutes)));
        const std::uint64_t seed = model_seed(cfg);
        log("training model " + std::to_string(g + 1) + "/" + std::to_string(group_keys.size()) + ": " +
            cells[members.front()].label());
        std::vector<train::EpochRecord> history;
        model::S2PModel model = train_model(cfg, data, seed, &history);
        for (std::size_t i : members) {
          const ExperimentConfig& c = configs[i];
          const bool home = cells[i].site == c.train_site.name();
          if (home && data.test.empty()) {
            throw DataError("cell '" + cells[i].label() + "' scores the training site but train_fraction leaves no test users");
          }
          const std::vector<data::Household>& households =
              home ? data.test : site_cache.at(cache_key(c.site(cells[i].site), c.interval_minutes));
          CellResult r;
          r.cell = cells[i];
          r.history = history;
          r.report = evaluate_with_config(c, model, households);
          r.report.metadata = json{{"matrix", spec.name},
                                   {"cell", cells[i].to_json()},
                                   {"variant", cells[i].label()},
                                   {"site", cells[i].site},
                                   {"granularity_minutes", c.interval_minutes},
                                   {"window_length", c.arch.window_length},
                                   {"model_seed", seed},
                                   {"config", c}};
          log("  " + cells[i].label() + ": nMAE " + data::format_fixed(r.report.nmae.mean, 3) + "%");
          results[i] = std::move(r);
        }
      } catch (...) {
        errors[g] = std::current_exception();
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(group_keys.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

void write_matrix_summary(const std::filesystem::path& path, const std::vector<CellResult>& results,
                          const std::vector<std::string>& comment_lines) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  for (const auto& line : comment_lines) f << "# " << line << '\n';
  f << "cell,layers,dropout,channels,augment,granularity_min,window_length,site,fine_tune,seed,users,"
       "nmae_mean_percent,nmae_std_percent,nee_mean_percent,nee_std_percent,final_train_loss\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const Cell& c = results[i].cell;
    const EvalReport& r = results[i].report;
    const std::string loss = results[i].history.empty() ? "" : data::format_fixed(results[i].history.back().mean_loss, 10);
    f << i << ',' << c.layers << ',' << (c.dropout ? 1 : 0) << ',' << c.channels << ',' << (c.augment ? 1 : 0) << ','
      << c.granularity << ',' << c.window_length << ',' << c.site << ',' << (c.fine_tune ? 1 : 0) << ',' << c.seed << ','
      << r.users.size() << ',' << data::format_fixed(r.nmae.mean, 6) << ',' << data::format_fixed(r.nmae.std, 6) << ','
      << data::format_fixed(r.nee.mean, 6) << ',' << data::format_fixed(r.nee.std, 6) << ',' << loss << '\n';
  }
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace s2p::eval
