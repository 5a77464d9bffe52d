#include "s2p/data/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <chrono>
#include <fstream>
#include <sstream>

#include "s2p/error.hpp"

namespace s2p::data {

namespace {

template <typename T>
bool parse_int(std::string_view s, T& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return std::string(s);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string format_fixed(double v, int digits) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  std::string s(buf, r.ptr);
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::int64_t parse_timestamp(std::string_view text) {
  std::string_view s = text;
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  // YYYY-MM-DDTHH:MM or YYYY-MM-DDTHH:MM:SS
  if ((s.size() != 16 && s.size() != 19) || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || (s.size() == 19 && s[16] != ':')) {
    throw DataError("malformed timestamp '" + std::string(text) + "'");
  }
  int y = 0;
  unsigned mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) || !parse_int(s.substr(8, 2), d) ||
      !parse_int(s.substr(11, 2), hh) || !parse_int(s.substr(14, 2), mm) ||
      (s.size() == 19 && !parse_int(s.substr(17, 2), ss))) {
    throw DataError("malformed timestamp '" + std::string(text) + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) throw DataError("invalid date/time '" + std::string(text) + "'");
  const auto days_since = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days_since) * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_timestamp(std::int64_t unix_seconds) {
  using namespace std::chrono;
  std::int64_t days_since = unix_seconds / 86400;
  std::int64_t rem = unix_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days_since;
  }
  const year_month_day ymd{sys_days{days{days_since}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                static_cast<int>((rem % 3600) / 60), static_cast<int>(rem % 60));
  return buf;
}

Household read_household_csv(const std::filesystem::path& path, std::string user_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  const std::string where = path.filename().string();

  Household h;
  h.user_id = std::move(user_id);
  h.total.unit = Unit::kilowatt;
  h.temperature.unit = Unit::celsius;

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool has_hvac = false;
  std::vector<double> hvac;
  std::int64_t prev_time = 0;
  std::int64_t spacing = 0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = split_fields(trimmed);
    if (!header_seen) {
      std::vector<std::string> names;
      for (auto f : fields) names.push_back(trim(f));
      if (names == std::vector<std::string>{"timestamp", "total_kw", "hvac_kw", "temp_c"}) {
        has_hvac = true;
      } else if (names != std::vector<std::string>{"timestamp", "total_kw", "temp_c"}) {
        throw DataError(where + ":" + std::to_string(line_no) +
                        ": expected header 'timestamp,total_kw,hvac_kw,temp_c' (hvac_kw optional)");
      }
      header_seen = true;
      continue;
    }
    const std::size_t expected = has_hvac ? 4 : 3;
    if (fields.size() != expected) {
      throw DataError(where + ":" + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                      " fields, found " + std::to_string(fields.size()));
    }
    std::int64_t ts = 0;
    try {
      ts = parse_timestamp(trim(fields[0]));
    } catch (const DataError& e) {
      throw DataError(where + ":" + std::to_string(line_no) + ": " + e.what());
    }
    double total = 0.0, hv = 0.0, temp = 0.0;
    const bool ok = parse_double(fields[1], total) && (!has_hvac || parse_double(fields[2], hv)) &&
                    parse_double(fields[has_hvac ? 3 : 2], temp);
    if (!ok) throw DataError(where + ":" + std::to_string(line_no) + ": unparseable number");
    if (!std::isfinite(total) || !std::isfinite(hv) || !std::isfinite(temp)) {
      throw DataError(where + ":" + std::to_string(line_no) + ": non-finite value");
    }
    if (total < 0.0 || hv < 0.0) throw DataError(where + ":" + std::to_string(line_no) + ": negative power");

    if (rows == 0) {
      h.start_time = ts;
    } else {
      const std::int64_t step = ts - prev_time;
      if (rows == 1) {
        if (step <= 0 || step % 60 != 0) {
          throw DataError(where + ":" + std::to_string(line_no) + ": spacing must be a positive whole number of minutes");
        }
        spacing = step;
      } else if (step != spacing) {
        throw DataError(where + ":" + std::to_string(line_no) + ": non-uniform spacing (" + std::to_string(step) +
                        " s after " + std::to_string(spacing) + " s)");
      }
    }
    prev_time = ts;
    h.total.values.push_back(quantize_power(total));
    if (has_hvac) hvac.push_back(quantize_power(hv));
    h.temperature.values.push_back(temp);
    ++rows;
  }
  if (!header_seen) throw DataError(where + ": missing header");
  if (rows < 2) throw DataError(where + ": need at least two data rows to establish the interval");
  const int interval = static_cast<int>(spacing / 60);
  h.total.interval_minutes = interval;
  h.temperature.interval_minutes = interval;
  if (has_hvac) {
    h.hvac = Profile{std::move(hvac), interval, Unit::kilowatt};
    h.p_rated_hvac = max_observed(*h.hvac);
  }
  return h;
}

void write_household_csv(const std::filesystem::path& path, const Household& h,
                         const std::vector<std::string>& comment_lines) {
  if (h.total.unit != Unit::kilowatt || h.temperature.unit != Unit::celsius) {
    throw DataError("write_household_csv: household '" + h.user_id + "' must be in kW/degC");
  }
  std::string out;
  out.reserve(h.size() * 48);
  for (const auto& c : comment_lines) out += "# " + c + "\n";
  out += h.labeled() ? "timestamp,total_kw,hvac_kw,temp_c\n" : "timestamp,total_kw,temp_c\n";
  const std::int64_t step = static_cast<std::int64_t>(h.interval_minutes()) * 60;
  for (std::size_t t = 0; t < h.size(); ++t) {
    out += format_timestamp(h.start_time + static_cast<std::int64_t>(t) * step);
    out += ',';
    out += format_fixed(h.total[t], 6);
    if (h.hvac) {
      out += ',';
      out += format_fixed((*h.hvac)[t], 6);
    }
    out += ',';
    out += format_fixed(h.temperature[t], 4);
    out += '\n';
  }
  write_file(path, out);
}

SiteManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest '" + path.string() + "': " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kManifestFormat) throw DataError("not an s2p site manifest");
    if (j.at("version").get<int>() != kManifestVersion) {
      throw DataError("unsupported manifest version " + std::to_string(j.at("version").get<int>()));
    }
    SiteManifest m;
    m.site = j.at("site").get<std::string>();
    m.interval_minutes = j.at("interval_minutes").get<int>();
    m.labeled = j.value("labeled", true);
    m.metadata = j.value("metadata", nlohmann::json::object());
    for (const auto& u : j.at("users")) {
      ManifestEntry e;
      e.user_id = u.at("user_id").get<std::string>();
      e.file = u.at("file").get<std::string>();
      if (u.contains("p_rated_kw") && !u.at("p_rated_kw").is_null()) e.p_rated_kw = u.at("p_rated_kw").get<double>();
      m.users.push_back(std::move(e));
    }
    if (m.users.empty()) throw DataError("manifest lists no users");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest '" + path.string() + "': " + e.what());
  } catch (const DataError& e) {
    throw DataError("manifest '" + path.string() + "': " + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const SiteManifest& m) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& u : m.users) {
    nlohmann::json e{{"user_id", u.user_id}, {"file", u.file}};
    if (u.p_rated_kw) e["p_rated_kw"] = *u.p_rated_kw;
    users.push_back(std::move(e));
  }
  const nlohmann::json j{{"format", kManifestFormat}, {"version", kManifestVersion},
                         {"site", m.site},            {"interval_minutes", m.interval_minutes},
                         {"labeled", m.labeled},      {"users", users},
                         {"metadata", m.metadata}};
  write_file(path, j.dump(2) + "\n");
}

std::vector<Household> load_site(const std::filesystem::path& manifest_path) {
  const SiteManifest m = read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  std::vector<Household> out;
  for (const auto& u : m.users) {
    Household h = read_household_csv(dir / u.file, u.user_id);
    if (h.interval_minutes() != m.interval_minutes) {
      throw DataError("household '" + u.user_id + "' has a " + std::to_string(h.interval_minutes()) +
                      "-minute interval; manifest says " + std::to_string(m.interval_minutes));
    }
    if (u.p_rated_kw) h.p_rated_hvac = *u.p_rated_kw;
    validate(h);
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace s2p::data
