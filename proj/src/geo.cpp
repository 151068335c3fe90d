#include "lifeforge/geo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <httplib.h>

namespace lifeforge::geo {

namespace {

std::string normalize(const std::string& s) {
    std::string out;
    for (char ch : s) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

Json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw GeoError(GeoError::Kind::bad_input, "cannot open " + path.string());
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw GeoError(GeoError::Kind::bad_input, "malformed JSON in " + path.string());
    return j;
}

}  // namespace

std::string to_string(TravelMode m) {
    switch (m) {
        case TravelMode::walk: return "walk";
        case TravelMode::transit: return "transit";
        case TravelMode::drive: return "drive";
    }
    return "walk";
}

std::optional<TravelMode> travel_mode_from_string(const std::string& s) {
    if (s == "walk") return TravelMode::walk;
    if (s == "transit") return TravelMode::transit;
    if (s == "drive") return TravelMode::drive;
    return std::nullopt;
}

double haversine_km(double lon1, double lat1, double lon2, double lat2) {
    constexpr double kEarthRadiusKm = 6371.0;
    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    double dlat = (lat2 - lat1) * kDeg;
    double dlon = (lon2 - lon1) * kDeg;
    double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) * std::sin(dlon / 2) *
                   std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(a));
}

double stub_speed_kmh(TravelMode m) {
    switch (m) {
        case TravelMode::walk: return 5.0;
        case TravelMode::transit: return 25.0;
        case TravelMode::drive: return 40.0;
    }
    return 5.0;
}

GazetteerEntry gazetteer_entry_from_json(const Json& j) {
    GazetteerEntry e;
    e.anchor = anchor_from_json(j);
    e.city = j.value("city_name", std::string{});
    e.category = j.value("category", std::string{});
    e.open_min = j.value("open_min", 0);
    e.close_min = j.value("close_min", 24 * 60);
    return e;
}

Json to_json(const GazetteerEntry& e) {
    Json j = to_json(e.anchor);
    j["city_name"] = e.city;
    j["category"] = e.category;
    j["open_min"] = e.open_min;
    j["close_min"] = e.close_min;
    return j;
}

// --------------------------------------------------------------------- stub

StubGeoProvider::StubGeoProvider(std::filesystem::path data_dir)
    : data_dir_(std::move(data_dir)) {}

const std::vector<GazetteerEntry>& StubGeoProvider::load_city(const std::string& city) const {
    std::lock_guard lock(mu_);
    auto it = cities_.find(city);
    if (it != cities_.end()) return it->second;
    std::string slug;
    for (char ch : city)
        slug.push_back(std::isalnum(static_cast<unsigned char>(ch))
                           ? static_cast<char>(std::tolower(static_cast<unsigned char>(ch)))
                           : '_');
    auto path = data_dir_ / ("gazetteer_" + slug + ".json");
    std::vector<GazetteerEntry> entries;
    if (std::filesystem::exists(path)) {
        Json j = load_json_file(path);
        for (const auto& e : j) {
            auto entry = gazetteer_entry_from_json(e);
            if (entry.city.empty()) entry.city = city;
            entries.push_back(std::move(entry));
        }
    }
    return cities_.emplace(city, std::move(entries)).first->second;
}

const std::vector<GazetteerEntry>& StubGeoProvider::entries(const std::string& city) const {
    return load_city(city);
}

std::vector<const GazetteerEntry*> StubGeoProvider::by_category(
    const std::string& city, const std::string& category) const {
    std::vector<const GazetteerEntry*> out;
    for (const auto& e : load_city(city))
        if (e.category == category) out.push_back(&e);
    return out;
}

const GazetteerEntry* StubGeoProvider::find(const std::string& city,
                                            const std::string& anchor_name) const {
    std::string needle = normalize(anchor_name);
    if (needle.empty()) return nullptr;
    for (const auto& e : load_city(city)) {
        std::string hay = normalize(e.anchor.name);
        if (hay == needle || hay.find(needle) != std::string::npos ||
            needle.find(hay) != std::string::npos)
            return &e;
    }
    // Fall back to address fields so street-level queries resolve.
    for (const auto& e : load_city(city)) {
        if (normalize(e.anchor.formatted_address).find(needle) != std::string::npos ||
            (!e.anchor.street_name.empty() &&
             normalize(e.anchor.street_name).find(needle) != std::string::npos))
            return &e;
    }
    return nullptr;
}

PlaceResult StubGeoProvider::verify_place(const std::string& name, const std::string& city) {
    if (name.empty()) throw GeoError(GeoError::Kind::bad_input, "verify_place: empty name");
    PlaceResult r;
    r.query = name;
    std::string needle = normalize(name);
    for (const auto& e : load_city(city)) {
        std::string hay = normalize(e.anchor.name);
        if (hay == needle || hay.find(needle) != std::string::npos ||
            needle.find(hay) != std::string::npos)
            r.results.push_back(e.anchor);
    }
    if (r.results.empty()) {
        // Street-level fallback: match on the published address fields.
        for (const auto& e : load_city(city))
            if (normalize(e.anchor.formatted_address).find(needle) != std::string::npos)
                r.results.push_back(e.anchor);
    }
    r.verified = !r.results.empty();
    return r;
}

RouteEstimate StubGeoProvider::estimate_route(double o_lon, double o_lat, double d_lon,
                                              double d_lat, TravelMode mode) {
    if (o_lon < -180 || o_lon > 180 || d_lon < -180 || d_lon > 180 || o_lat < -90 ||
        o_lat > 90 || d_lat < -90 || d_lat > 90)
        throw GeoError(GeoError::Kind::bad_input, "estimate_route: coordinates out of range");
    RouteEstimate r;
    r.origin_lon = o_lon;
    r.origin_lat = o_lat;
    r.dest_lon = d_lon;
    r.dest_lat = d_lat;
    r.mode = mode;
    if (o_lon == d_lon && o_lat == d_lat) {
        r.duration_min = 0.0;
        r.distance_km = 0.0;
        return r;
    }
    r.distance_km = haversine_km(o_lon, o_lat, d_lon, d_lat) * kDetourFactor;
    r.duration_min = r.distance_km / stub_speed_kmh(mode) * 60.0;
    return r;
}

HolidayCalendar StubGeoProvider::holidays(int year, const std::string& region) {
    auto dir = data_dir_ / "holidays";
    auto path = dir / (region + "_" + std::to_string(year) + ".json");
    if (!std::filesystem::exists(path)) {
        std::string available;
        if (std::filesystem::exists(dir))
            for (const auto& f : std::filesystem::directory_iterator(dir)) {
                if (!available.empty()) available += ", ";
                available += f.path().stem().string();
            }
        throw GeoError(GeoError::Kind::missing_region,
                       "no holiday fixture for \"" + region + "\" year " +
                           std::to_string(year) + "; available: [" + available + "]");
    }
    Json j = load_json_file(path);
    HolidayCalendar cal;
    cal.year = j.value("year", year);
    cal.region = j.value("region", region);
    for (const auto& e : j["entries"]) {
        HolidayEntry h;
        h.date = parse_date(e.value("date", std::string{})).value_or(0);
        h.name = e.value("name", std::string{});
        h.is_public_holiday = e.value("is_public_holiday", true);
        cal.entries.push_back(std::move(h));
    }
    return cal;
}

// --------------------------------------------------------------------- live

namespace {

class LiveGeoProvider final : public GeoProvider {
public:
    explicit LiveGeoProvider(LiveGeoConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.cassette_mode != LiveGeoConfig::CassetteMode::off &&
            !cfg_.cassette_path.empty() && std::filesystem::exists(cfg_.cassette_path)) {
            std::ifstream in(cfg_.cassette_path);
            cassette_ = Json::parse(in, nullptr, false);
            if (cassette_.is_discarded()) cassette_ = Json::object();
        } else {
            cassette_ = Json::object();
        }
    }

    PlaceResult verify_place(const std::string& name, const std::string& city) override {
        if (name.empty()) throw GeoError(GeoError::Kind::bad_input, "verify_place: empty name");
        std::string request = "place_text?keywords=" + name + "&city=" + city;
        Json body = fetch(request, "/v3/place/text",
                          {{"keywords", name}, {"city", city}, {"offset", "5"}});
        PlaceResult r;
        r.query = name;
        if (body.contains("pois")) {
            for (const auto& poi : body["pois"]) {
                AnchorLocation a;
                a.name = poi.value("name", std::string{});
                std::string loc = poi.value("location", std::string{});
                std::sscanf(loc.c_str(), "%lf,%lf", &a.lon, &a.lat);
                a.formatted_address = poi.value("address", std::string{});
                a.district = poi.value("adname", std::string{});
                r.results.push_back(std::move(a));
            }
        }
        r.verified = !r.results.empty();
        return r;
    }

    RouteEstimate estimate_route(double o_lon, double o_lat, double d_lon, double d_lat,
                                 TravelMode mode) override {
        RouteEstimate r;
        r.origin_lon = o_lon;
        r.origin_lat = o_lat;
        r.dest_lon = d_lon;
        r.dest_lat = d_lat;
        r.mode = mode;
        if (o_lon == d_lon && o_lat == d_lat) return r;
        const char* endpoint = mode == TravelMode::walk      ? "/v3/direction/walking"
                               : mode == TravelMode::transit ? "/v3/direction/transit/integrated"
                                                             : "/v3/direction/driving";
        char origin[48], dest[48];
        std::snprintf(origin, sizeof(origin), "%.6f,%.6f", o_lon, o_lat);
        std::snprintf(dest, sizeof(dest), "%.6f,%.6f", d_lon, d_lat);
        std::string request = std::string(endpoint) + "?origin=" + origin + "&dest=" + dest;
        Json body = fetch(request, endpoint, {{"origin", origin}, {"destination", dest}});
        // AMap reports seconds and metres, as strings.
        try {
            const Json& route = body.at("route");
            const Json& leg = route.contains("paths") ? route["paths"][0] : route["transits"][0];
            r.duration_min = std::stod(leg.value("duration", std::string("0"))) / 60.0;
            r.distance_km = std::stod(leg.value("distance", std::string("0"))) / 1000.0;
        } catch (...) {
            throw GeoError(GeoError::Kind::transport, "route response missing fields");
        }
        return r;
    }

    HolidayCalendar holidays(int year, const std::string& region) override {
        StubGeoProvider file_backed(cfg_.holiday_dir);
        return file_backed.holidays(year, region);
    }

    std::string name() const override { return "live"; }

private:
    Json fetch(const std::string& cache_key, const std::string& path, httplib::Params params) {
        {
            std::lock_guard lock(mu_);
            if (auto it = cache_.find(cache_key); it != cache_.end()) return it->second;
            if (cassette_.contains(cache_key)) {
                cache_[cache_key] = cassette_[cache_key];
                return cassette_[cache_key];
            }
        }
        if (cfg_.cassette_mode == LiveGeoConfig::CassetteMode::replay)
            throw GeoError(GeoError::Kind::transport,
                           "cassette replay miss for \"" + cache_key + "\"");

        params.emplace("key", cfg_.key);
        httplib::Client client(cfg_.base_url);
        client.set_connection_timeout(20);
        client.set_read_timeout(20);
        auto res = client.Get(path, params, httplib::Headers{});
        if (!res)
            throw GeoError(GeoError::Kind::transport,
                           "map API transport failure: " + httplib::to_string(res.error()));
        Json body = Json::parse(res->body, nullptr, false);
        if (body.is_discarded())
            throw GeoError(GeoError::Kind::transport, "map API returned malformed JSON");
        if (body.value("infocode", std::string("10000")) == "10003")
            throw GeoError(GeoError::Kind::quota, "map API daily quota exhausted");

        std::lock_guard lock(mu_);
        cache_[cache_key] = body;
        if (cfg_.cassette_mode == LiveGeoConfig::CassetteMode::record &&
            !cfg_.cassette_path.empty()) {
            cassette_[cache_key] = body;
            std::ofstream out(cfg_.cassette_path);
            out << cassette_.dump(2) << "\n";
        }
        return body;
    }

    LiveGeoConfig cfg_;
    Json cassette_;
    std::map<std::string, Json> cache_;
    std::mutex mu_;
};

}  // namespace

std::unique_ptr<GeoProvider> make_live_provider(LiveGeoConfig cfg) {
    return std::make_unique<LiveGeoProvider>(std::move(cfg));
}

}  // namespace lifeforge::geo
