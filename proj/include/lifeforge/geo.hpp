#pragma once
// Map, routing and holiday services behind one interface. The offline stub
// is backed by a fixture gazetteer and a documented speed table; the live
// client targets an AMap-style REST API and records a replayable cassette.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lifeforge/types.hpp"

namespace lifeforge::geo {

enum class TravelMode { walk, transit, drive };

std::string to_string(TravelMode m);
std::optional<TravelMode> travel_mode_from_string(const std::string& s);

struct PlaceResult {
    std::string query;
    std::vector<AnchorLocation> results;
    bool verified = false;  // verified <=> results nonempty
};

struct RouteEstimate {
    double origin_lon = 0.0, origin_lat = 0.0;
    double dest_lon = 0.0, dest_lat = 0.0;
    TravelMode mode = TravelMode::walk;
    double duration_min = 0.0;
    double distance_km = 0.0;
};

struct HolidayEntry {
    Day date = 0;
    std::string name;
    bool is_public_holiday = true;
};

struct HolidayCalendar {
    int year = 0;
    std::string region;
    std::vector<HolidayEntry> entries;

    bool covers(Day d) const {
        for (const auto& e : entries)
            if (e.date == d) return true;
        return false;
    }
};

class GeoError : public std::runtime_error {
public:
    enum class Kind { bad_input, transport, quota, missing_region };
    GeoError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    Kind kind;
};

class GeoProvider {
public:
    virtual ~GeoProvider() = default;
    virtual PlaceResult verify_place(const std::string& name, const std::string& city) = 0;
    virtual RouteEstimate estimate_route(double o_lon, double o_lat, double d_lon, double d_lat,
                                         TravelMode mode) = 0;
    virtual HolidayCalendar holidays(int year, const std::string& region) = 0;
    virtual std::string name() const = 0;
};

double haversine_km(double lon1, double lat1, double lon2, double lat2);

// Stub speed table (km/h over haversine distance x detour factor 1.3).
double stub_speed_kmh(TravelMode m);
inline constexpr double kDetourFactor = 1.3;

// Gazetteer entry: a published anchor plus stub-only metadata.
struct GazetteerEntry {
    AnchorLocation anchor;
    std::string city;
    std::string category;  // home|office|gym|mall|clinic|park|restaurant|...
    int open_min = 0;      // venue opening window, minutes of day
    int close_min = 24 * 60;
};

class StubGeoProvider final : public GeoProvider {
public:
    // data_dir holds gazetteer_<city>.json files and holidays/<region>_<year>.json.
    explicit StubGeoProvider(std::filesystem::path data_dir);

    PlaceResult verify_place(const std::string& name, const std::string& city) override;
    RouteEstimate estimate_route(double o_lon, double o_lat, double d_lon, double d_lat,
                                 TravelMode mode) override;
    HolidayCalendar holidays(int year, const std::string& region) override;
    std::string name() const override { return "stub"; }

    // Fixture access used by persona anchoring and the objective agent.
    const std::vector<GazetteerEntry>& entries(const std::string& city) const;
    std::vector<const GazetteerEntry*> by_category(const std::string& city,
                                                   const std::string& category) const;
    const GazetteerEntry* find(const std::string& city, const std::string& anchor_name) const;

private:
    std::filesystem::path data_dir_;
    mutable std::map<std::string, std::vector<GazetteerEntry>> cities_;
    mutable std::mutex mu_;

    const std::vector<GazetteerEntry>& load_city(const std::string& city) const;
};

struct LiveGeoConfig {
    std::string base_url = "https://restapi.amap.com";
    std::string key;  // env LIFEFORGE_MAP_KEY
    std::string cassette_path;
    // record: call through and append to the cassette; replay: cassette only.
    enum class CassetteMode { off, record, replay } cassette_mode = CassetteMode::off;
    std::filesystem::path holiday_dir;  // holidays stay file-based even when live
};

std::unique_ptr<GeoProvider> make_live_provider(LiveGeoConfig cfg);

GazetteerEntry gazetteer_entry_from_json(const Json& j);
Json to_json(const GazetteerEntry& e);

}  // namespace lifeforge::geo
