#include "s2p/eval/report.hpp"

#include <fstream>

#include "s2p/data/csv_io.hpp"
#include "s2p/error.hpp"

namespace s2p::eval {

namespace {

std::span<const double> tail(const std::vector<double>& v, std::size_t skip) {
  return std::span<const double>(v).subspan(std::min(skip, v.size()));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  return f;
}

}  // namespace

EvalReport evaluate_predictions(std::span<const data::Household> households, const data::NormalizationSpec& spec,
                                const Predictor& predict, const EvalOptions& options) {
  if (households.empty()) throw DataError("evaluation needs at least one household");
  if (options.from_day < 0) throw ConfigError("from_day must be >= 0");
  if (!(options.epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  EvalReport report;
  report.epsilon = options.epsilon;
  report.from_day = options.from_day;
  report.nee_mode = options.nee_mode;
  report.interval_minutes = households.front().total.interval_minutes;

  std::vector<double> nmae, nee;
  for (std::size_t u = 0; u < households.size(); ++u) {
    const data::Household& h = households[u];
    if (!h.hvac) throw DataError("household '" + h.user_id + "' has no HVAC label to score against");
    if (h.total.interval_minutes != report.interval_minutes) {
      throw DataError("household '" + h.user_id + "' is sampled at a different interval from the rest of the site");
    }
    const data::NormalizedHousehold norm = data::apply_normalization(h, spec);
    UserReport r;
    r.user_id = h.user_id;
    r.clipped = norm.clipped;
    r.p_rated = norm.household.p_rated_hvac;
    const data::Profile pred = predict(u, norm.household, r.clamp);
    if (pred.size() != h.size()) {
      throw ShapeError("prediction for '" + h.user_id + "' has " + std::to_string(pred.size()) + " points, expected " +
                       std::to_string(h.size()));
    }
    const std::size_t per_day = static_cast<std::size_t>(1440 / report.interval_minutes);
    const std::size_t skip = static_cast<std::size_t>(options.from_day) * per_day;
    if (skip >= h.size()) {
      throw DataError("household '" + h.user_id + "' has no data after day " + std::to_string(options.from_day));
    }
    r.start_time = h.start_time + static_cast<std::int64_t>(skip) * report.interval_minutes * 60;
    const auto p = tail(pred.values, skip);
    const auto a = tail(norm.household.hvac->values, skip);
    r.nmae_percent = nmae_percent(p, a, r.p_rated);
    const NeeResult hourly = nee_percent(p, a, r.p_rated, report.interval_minutes);
    r.hourly_nee_percent = hourly.hourly;
    r.nee_percent = options.nee_mode == NeeMode::hourly ? hourly.aggregate : nee_whole_period_percent(p, a, r.p_rated);
    r.daily_nmae_percent = daily_nmae_percent(p, a, r.p_rated, report.interval_minutes);
    nmae.push_back(r.nmae_percent);
    nee.push_back(r.nee_percent);
    report.users.push_back(std::move(r));
  }
  report.nmae = summarize(nmae);
  report.nee = summarize(nee);
  return report;
}

Predictor oracle_predictor() {
  return [](std::size_t, const data::Household& h, model::ClampStats&) { return *h.hvac; };
}

Predictor zero_predictor() {
  return [](std::size_t, const data::Household& h, model::ClampStats&) {
    return data::Profile{std::vector<double>(h.size(), 0.0), h.total.interval_minutes, data::Unit::per_unit};
  };
}

Predictor model_predictor(const model::S2PModel& model, double epsilon) {
  return [&model, epsilon](std::size_t, const data::Household& h, model::ClampStats& stats) {
    return model::disaggregate_series(model, h, epsilon, &stats);
  };
}

EvalReport evaluate_site(const model::S2PModel& model, std::span<const data::Household> households,
                         const EvalOptions& options) {
  for (const auto& h : households) {
    if (h.total.interval_minutes != model.interval_minutes) {
      throw DataError("household '" + h.user_id + "' is sampled every " + std::to_string(h.total.interval_minutes) +
                      " minutes but the model was trained on " + std::to_string(model.interval_minutes));
    }
  }
  return evaluate_predictions(households, model.normalization, model_predictor(model, options.epsilon), options);
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& u : report.users) {
    users.push_back({
        {"user_id", u.user_id},
        {"start_time", data::format_timestamp(u.start_time)},
        {"p_rated_pu", u.p_rated},
        {"nmae_percent", u.nmae_percent},
        {"nee_percent", u.nee_percent},
        {"hourly_nee_percent", u.hourly_nee_percent},
        {"daily_nmae_percent", u.daily_nmae_percent},
        {"clamp", {{"points", u.clamp.points}, {"capped", u.clamp.capped}, {"zeroed", u.clamp.zeroed}}},
        {"clipped_inputs", u.clipped},
    });
  }
  return {
      {"schema", kReportSchema},
      {"version", kReportVersion},
      {"metadata", report.metadata},
      {"epsilon", report.epsilon},
      {"interval_minutes", report.interval_minutes},
      {"from_day", report.from_day},
      {"nee_mode", to_string(report.nee_mode)},
      {"user_count", report.users.size()},
      {"summary",
       {{"nmae_mean_percent", report.nmae.mean},
        {"nmae_std_percent", report.nmae.std},
        {"nee_mean_percent", report.nee.mean},
        {"nee_std_percent", report.nee.std}}},
      {"users", users},
  };
}

void write_report_json(const std::filesystem::path& path, const EvalReport& report) {
  auto f = open_out(path);
  f << report_to_json(report).dump(2) << '\n';
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

void write_hourly_csv(const std::filesystem::path& path, const EvalReport& report,
                      const std::vector<std::string>& comment_lines) {
  auto f = open_out(path);
  for (const auto& line : comment_lines) f << "# " << line << '\n';
  f << "hour_of_day,user_id,nEE_percent\n";
  for (const auto& u : report.users) {
    for (std::size_t h = 0; h < u.hourly_nee_percent.size(); ++h) {
      const std::int64_t hour = ((u.start_time / 3600 + static_cast<std::int64_t>(h)) % 24 + 24) % 24;
      f << hour << ',' << u.user_id << ',' << data::format_fixed(u.hourly_nee_percent[h], 6) << '\n';
    }
  }
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

void write_daily_csv(const std::filesystem::path& path, const EvalReport& report,
                     const std::vector<std::string>& comment_lines) {
  auto f = open_out(path);
  for (const auto& line : comment_lines) f << "# " << line << '\n';
  f << "user_id,day,nMAE_percent\n";
  for (const auto& u : report.users) {
    for (std::size_t d = 0; d < u.daily_nmae_percent.size(); ++d) {
      f << u.user_id << ',' << d + static_cast<std::size_t>(report.from_day) << ','
        << data::format_fixed(u.daily_nmae_percent[d], 6) << '\n';
    }
  }
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace s2p::eval
