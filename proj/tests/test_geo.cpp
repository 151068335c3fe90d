#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lifeforge/geo.hpp"

using namespace lifeforge;
using namespace lifeforge::geo;

namespace {

StubGeoProvider make_stub() { return StubGeoProvider(LIFEFORGE_DATA_DIR); }

// Independent reference for the stub's route arithmetic.
double reference_route_minutes(double lon1, double lat1, double lon2, double lat2,
                               double speed_kmh) {
    constexpr double kR = 6371.0;
    constexpr double kDeg = M_PI / 180.0;
    double dlat = (lat2 - lat1) * kDeg, dlon = (lon2 - lon1) * kDeg;
    double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) * std::sin(dlon / 2) *
                   std::sin(dlon / 2);
    double haversine = 2.0 * kR * std::asin(std::sqrt(a));
    return haversine * 1.3 / speed_kmh * 60.0;
}

}  // namespace

TEST_CASE("fixture place verifies") {
    auto stub = make_stub();
    auto res = stub.verify_place("Kowloon City Plaza", "Hong Kong");
    CHECK(res.verified);
    REQUIRE(!res.results.empty());
    CHECK(res.results[0].name == "Kowloon City Plaza Shopping Mall");
    CHECK(res.results[0].lon == doctest::Approx(114.192980));
}

TEST_CASE("absent place does not verify") {
    auto stub = make_stub();
    auto res = stub.verify_place("Nonexistent Dragon Tower 9999", "Hong Kong");
    CHECK(!res.verified);
    CHECK(res.results.empty());
}

TEST_CASE("empty place name is an error") {
    auto stub = make_stub();
    CHECK_THROWS_AS((void)stub.verify_place("", "Hong Kong"), GeoError);
}

TEST_CASE("identical endpoints mean zero duration") {
    auto stub = make_stub();
    auto r = stub.estimate_route(114.19, 22.33, 114.19, 22.33, TravelMode::walk);
    CHECK(r.duration_min == 0.0);
    CHECK(r.distance_km == 0.0);
}

TEST_CASE("five detoured kilometres at walking speed take an hour") {
    auto stub = make_stub();
    // Equatorial pair whose haversine distance is 5 / 1.3 km, so the detoured
    // route distance is 5.0 km; at 5 km/h that is 60 minutes.
    double dlon = (5.0 / 1.3) / (6371.0 * M_PI / 180.0);
    auto r = stub.estimate_route(0.0, 0.0, dlon, 0.0, TravelMode::walk);
    CHECK(r.distance_km == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(r.duration_min == doctest::Approx(60.0).epsilon(1e-6));
    // And the general formula matches an independent recomputation.
    CHECK(r.duration_min ==
          doctest::Approx(reference_route_minutes(0.0, 0.0, dlon, 0.0, 5.0)).epsilon(1e-9));
}

TEST_CASE("walk estimates are symmetric") {
    auto stub = make_stub();
    auto ab = stub.estimate_route(114.1930, 22.3281, 114.1801, 22.2800, TravelMode::walk);
    auto ba = stub.estimate_route(114.1801, 22.2800, 114.1930, 22.3281, TravelMode::walk);
    CHECK(ab.duration_min == doctest::Approx(ba.duration_min).epsilon(1e-12));
}

TEST_CASE("mode strings parse or reject") {
    CHECK(travel_mode_from_string("walk") == TravelMode::walk);
    CHECK(travel_mode_from_string("transit") == TravelMode::transit);
    CHECK(travel_mode_from_string("drive") == TravelMode::drive);
    CHECK(travel_mode_from_string("teleport") == std::nullopt);
    CHECK(stub_speed_kmh(TravelMode::walk) == 5.0);
    CHECK(stub_speed_kmh(TravelMode::transit) == 25.0);
    CHECK(stub_speed_kmh(TravelMode::drive) == 40.0);
}

TEST_CASE("out-of-range coordinates are rejected") {
    auto stub = make_stub();
    CHECK_THROWS_AS((void)stub.estimate_route(200.0, 0.0, 0.0, 0.0, TravelMode::walk),
                    GeoError);
}

TEST_CASE("holiday calendar covers the lunar new year window") {
    auto stub = make_stub();
    auto cal = stub.holidays(2025, "hong_kong");
    CHECK(cal.year == 2025);
    bool late_january = false;
    for (const auto& e : cal.entries) {
        CivilDate c = civil_from_days(e.date);
        if (c.year == 2025 && c.month == 1 && c.day >= 28 && c.day <= 31) late_january = true;
    }
    CHECK(late_january);
    CHECK(cal.covers(days_from_civil(2025, 1, 29)));
}

TEST_CASE("holiday dates are unique and within the year") {
    auto stub = make_stub();
    auto cal = stub.holidays(2025, "hong_kong");
    std::set<Day> seen;
    for (const auto& e : cal.entries) {
        CHECK(seen.insert(e.date).second);
        CHECK(civil_from_days(e.date).year == 2025);
    }
}

TEST_CASE("unknown region error lists what exists") {
    auto stub = make_stub();
    try {
        (void)stub.holidays(2025, "atlantis");
        FAIL("expected a missing-region error");
    } catch (const GeoError& e) {
        CHECK(e.kind == GeoError::Kind::missing_region);
        CHECK(std::string(e.what()).find("hong_kong_2025") != std::string::npos);
    }
}

TEST_CASE("stub is pure across repeated queries") {
    auto stub = make_stub();
    auto a = stub.verify_place("Victoria Park", "Hong Kong");
    auto b = stub.verify_place("Victoria Park", "Hong Kong");
    REQUIRE(a.results.size() == b.results.size());
    for (size_t i = 0; i < a.results.size(); ++i) CHECK(a.results[i] == b.results[i]);
}

TEST_CASE("live client replays recorded responses") {
    LiveGeoConfig cfg;
    cfg.cassette_path = std::string(LIFEFORGE_FIXTURE_DIR) + "/cassette_sample.json";
    cfg.cassette_mode = LiveGeoConfig::CassetteMode::replay;
    cfg.holiday_dir = LIFEFORGE_DATA_DIR;
    auto live = make_live_provider(cfg);

    auto place = live->verify_place("Kowloon City Plaza Shopping Mall", "Hong Kong");
    CHECK(place.verified);
    REQUIRE(!place.results.empty());
    CHECK(place.results[0].district == "Kowloon City District");

    auto route = live->estimate_route(114.192980, 22.328095, 114.180120, 22.280040,
                                      TravelMode::transit);
    CHECK(route.duration_min == doctest::Approx(27.0));  // recorded 1620 s
    CHECK(route.distance_km == doctest::Approx(7.4));

    // A request with no recorded answer is a transport error in replay mode.
    CHECK_THROWS_AS((void)live->verify_place("Unknown Somewhere", "Hong Kong"), GeoError);
}
