#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "lifeforge/persona.hpp"
#include "lifeforge/validate.hpp"

using namespace lifeforge;
using namespace lifeforge::persona;

namespace {

struct Env {
    std::unique_ptr<gen::GenBackend> backend = gen::make_template_backend();
    PriorTables priors = PriorTables::load(std::string(LIFEFORGE_DATA_DIR) + "/priors.json");
    std::vector<std::string> denylist =
        load_denylist(std::string(LIFEFORGE_DATA_DIR) + "/denylist.txt");
    geo::StubGeoProvider geo{LIFEFORGE_DATA_DIR};

    PersonaSynthesizer make(int workers = 2) {
        SynthConfig cfg;
        cfg.epoch_year = 2025;
        cfg.workers = workers;
        return PersonaSynthesizer(*backend, priors, denylist, cfg);
    }
};

}  // namespace

TEST_CASE("base persona is deterministic per seed") {
    Env env;
    auto synth = env.make();
    Persona a = synth.sample_base_persona("user_0000", 42);
    Persona b = synth.sample_base_persona("user_0000", 42);
    CHECK(a == b);
}

TEST_CASE("different seeds vary the identity substantially") {
    Env env;
    auto synth = env.make();
    Persona a = synth.sample_base_persona("user_0000", 1);
    Persona b = synth.sample_base_persona("user_0000", 2);
    int differing = 0;
    differing += a.name != b.name;
    differing += a.job != b.job;
    differing += a.occupation != b.occupation;
    differing += a.hobbies != b.hobbies;
    differing += a.home_address.street_name != b.home_address.street_name;
    differing += a.birth != b.birth;
    CHECK(differing >= 3);
}

TEST_CASE("base persona passes validation with consistent body and age") {
    Env env;
    auto synth = env.make();
    for (uint64_t seed : {11ull, 12ull, 13ull}) {
        Persona p = synth.sample_base_persona("user_0001", seed);
        auto report = validate_persona(p, 2025);
        INFO(report.to_string());
        CHECK(report.ok());
    }
}

TEST_CASE("family strings reproduce the marriage-and-children pattern") {
    Env env;
    auto synth = env.make();
    bool saw_children_pattern = false;
    for (uint64_t seed = 0; seed < 12 && !saw_children_pattern; ++seed) {
        Persona p = synth.sample_base_persona("user_0002", seed);
        if (p.family.rfind("First marriage with spouse, has", 0) == 0)
            saw_children_pattern = true;
    }
    CHECK(saw_children_pattern);
}

TEST_CASE("social network lands in the 20-30 band with unique names") {
    Env env;
    auto synth = env.make();
    Persona p = synth.sample_base_persona("user_0003", 7);
    synth.build_social_network(p, "user_0003", 7);
    size_t n = p.all_relations().size();
    CHECK(n >= 20);
    CHECK(n <= 30);
    std::set<std::string> names;
    for (const auto* r : p.all_relations()) CHECK(names.insert(r->name).second);
    CHECK(validate_persona(p, 2025).ok());
}

TEST_CASE("married personas get a spouse in the family circle") {
    Env env;
    auto synth = env.make();
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Persona p = synth.sample_base_persona("user_0004", seed);
        if (p.family.find("spouse") == std::string::npos) continue;
        synth.build_social_network(p, "user_0004", seed);
        bool has_spouse = false;
        for (const auto* r : p.all_relations())
            has_spouse |= r->relation == "Husband" || r->relation == "Wife";
        CHECK(has_spouse);
        return;
    }
    FAIL("no married persona drawn in 20 seeds");
}

TEST_CASE("corpus mean relationship count sits near 24.4") {
    Env env;
    auto synth = env.make(4);
    double total = 0;
    const int kUsers = 40;
    for (int i = 0; i < kUsers; ++i) {
        char uid[16];
        std::snprintf(uid, sizeof(uid), "user_%04d", i);
        Persona p = synth.sample_base_persona(uid, 99);
        synth.build_social_network(p, uid, 99);
        total += static_cast<double>(p.all_relations().size());
    }
    double mean = total / kUsers;
    CHECK(mean > 22.9);
    CHECK(mean < 25.9);
}

TEST_CASE("urban anchors: coverage, verification, home identity") {
    Env env;
    auto synth = env.make();
    double total_anchors = 0;
    const int kUsers = 12;
    for (int i = 0; i < kUsers; ++i) {
        char uid[16];
        std::snprintf(uid, sizeof(uid), "user_%04d", i);
        Persona p = synth.sample_base_persona(uid, 5);
        auto result = synth.anchor_urban_landscape(p, env.geo, uid, 5);
        total_anchors += static_cast<double>(result.anchors.size());
        REQUIRE(!result.anchors.empty());
        // The home anchor carries the persona's own address.
        const AnchorLocation& home = result.anchors.front();
        CHECK(home.street_name == p.home_address.street_name);
        CHECK(home.street_number == p.home_address.street_number);
        CHECK(home.district == p.home_address.district);
        CHECK(home.formatted_address == p.home_address.formatted());
        // Every anchor verifies against the stub gazetteer.
        for (const auto& a : result.anchors)
            CHECK(env.geo.verify_place(a.name, p.home_address.city).verified);
        for (const auto& a : result.anchors) CHECK(!a.description.empty());
    }
    double mean = total_anchors / kUsers;
    CHECK(mean > 13.0);
    CHECK(mean < 16.5);
}

TEST_CASE("generated names avoid the real-person registry") {
    Env env;
    auto synth = env.make();
    std::set<std::string> listed(env.denylist.begin(), env.denylist.end());
    for (uint64_t seed = 0; seed < 25; ++seed) {
        Persona p = synth.sample_base_persona("user_0009", seed);
        CHECK(!listed.count(p.name));
    }
}

TEST_CASE("provider failure leaves a partial list and a warning") {
    Env env;
    auto synth = env.make();
    Persona p = synth.sample_base_persona("user_0010", 3);
    p.home_address.city = "Atlantis";  // no gazetteer -> nothing verifies
    auto result = synth.anchor_urban_landscape(p, env.geo, "user_0010", 3);
    CHECK(result.anchors.empty());
    CHECK(!result.warnings.empty());
}

TEST_CASE("empty prior table is an error") {
    Env env;
    PriorTables empty;
    SynthConfig cfg;
    PersonaSynthesizer synth(*env.backend, empty, {}, cfg);
    CHECK_THROWS_AS((void)synth.sample_base_persona("user_0000", 1), std::runtime_error);
}
