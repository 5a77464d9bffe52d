#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2p/data/profile.hpp"

namespace s2p::data {

/// "YYYY-MM-DDTHH:MM[:SS][Z]" (UTC) -> Unix seconds. Throws DataError.
std::int64_t parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t unix_seconds);

/// Reads `timestamp,total_kw,hvac_kw,temp_c` (hvac_kw optional). Lines
/// starting with '#' are comments. Timestamps must be strictly uniform
/// with a whole-minute spacing. Malformed rows throw DataError with the
/// file name and line number. Power is snapped to the quantum grid.
Household read_household_csv(const std::filesystem::path& path, std::string user_id);

/// Writes a kW household in the same format. Each entry of
/// `comment_lines` becomes a leading "# ..." line.
void write_household_csv(const std::filesystem::path& path, const Household& h,
                         const std::vector<std::string>& comment_lines = {});

struct ManifestEntry {
  std::string user_id;
  /// Relative to the manifest's directory.
  std::string file;
  std::optional<double> p_rated_kw;
};

/// Lists the household files of one site.
struct SiteManifest {
  std::string site;
  int interval_minutes = 15;
  bool labeled = true;
  std::vector<ManifestEntry> users;
  /// Free-form site metadata (generator parameters, run configuration).
  nlohmann::json metadata = nlohmann::json::object();
};

inline constexpr std::string_view kManifestFormat = "s2p-site-manifest";
inline constexpr int kManifestVersion = 1;

SiteManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const SiteManifest& manifest);

/// Every household of a manifest, validated. Rated power comes from the
/// manifest, else the largest observed HVAC value.
std::vector<Household> load_site(const std::filesystem::path& manifest_path);

/// Text written to files by the library: std::to_chars, fixed digits.
std::string format_fixed(double v, int digits);

}  // namespace s2p::data
