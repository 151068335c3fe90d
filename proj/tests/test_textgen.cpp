#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lifeforge/textgen.hpp"
#include "lifeforge/validate.hpp"

using namespace lifeforge;
using namespace lifeforge::gen;

namespace {

GenRequest persona_request(uint64_t seed) {
    GenRequest req;
    req.stage = "persona_basic";
    req.seed = seed;
    req.response_schema = "persona";
    Json sampled;
    sampled["gender"] = "Female";
    sampled["age"] = 35;
    sampled["nationality"] = "Han";
    sampled["education"] = "Bachelor's Degree";
    sampled["belief"] = "No religious belief";
    sampled["marital"] = "Married";
    sampled["sons"] = 1;
    sampled["daughters"] = 0;
    sampled["city"] = "Hong Kong";
    sampled["job"] = "Registered Nurse";
    sampled["employer"] = "Wan Chai Health Centre";
    sampled["salary"] = 360000.0;
    sampled["home_address"] = Json{{"province", "Hong Kong Special Administrative Region"},
                                   {"city", "Hong Kong"},
                                   {"district", "Kowloon City District"},
                                   {"street_name", "Carpenter Road"},
                                   {"street_number", "No. 128"}};
    sampled["work_address"] = Json{{"province", "Hong Kong Special Administrative Region"},
                                   {"city", "Hong Kong"},
                                   {"district", "Wan Chai District"},
                                   {"street_name", "Hennessy Road"},
                                   {"street_number", "No. 130"}};
    req.add_json("sampled", sampled);
    Json traits;
    traits["mbti"] = "ISFJ";
    traits["traits"] = Json::array({"Patient"});
    traits["hobbies"] = Json::array({"Marathon", "Shopping"});
    traits["favorite_foods"] = Json::array({"Wonton noodles"});
    traits["aims"] = Json::array({"Complete a half marathon"});
    req.add_json("traits", traits);
    req.add("epoch_year", "2025");
    return req;
}

GenRequest decompose_request(uint64_t seed) {
    GenRequest req;
    req.stage = "decompose";
    req.seed = seed;
    req.response_schema = "events";
    Json event;
    event["event_id"] = "7";
    event["name"] = "Quarterly budget and bills review";
    event["date"] = Json::array(
        {format_interval(make_timestamp(2025, 1, 10, 9), make_timestamp(2025, 1, 13, 18))});
    event["type"] = "finance";
    event["description"] = "Household finances get their quarterly pass.";
    event["participant"] = Json::array({Json{{"name", "Chan Wai Yin"}, {"relation", "Herself"}}});
    event["location"] = "Waterloo Road Mansions";
    req.add_json("event", event);
    req.add("tau_seconds", "86400");
    req.add("max_children", "5");
    return req;
}

}  // namespace

TEST_CASE("template backend is pure in stage+sections+seed") {
    auto backend = make_template_backend();
    Json a = backend->generate(persona_request(1234));
    Json b = backend->generate(persona_request(1234));
    CHECK(a.dump() == b.dump());  // byte-identical

    Json c = backend->generate(decompose_request(99));
    Json d = backend->generate(decompose_request(99));
    CHECK(c.dump() == d.dump());
}

TEST_CASE("different seeds give different names") {
    auto backend = make_template_backend();
    Json a = backend->generate(persona_request(1));
    Json b = backend->generate(persona_request(2));
    CHECK(a["name"] != b["name"]);
}

TEST_CASE("template output passes its own declared schema") {
    auto backend = make_template_backend();
    Json p = backend->generate(persona_request(7));
    CHECK(validate_document(p, "persona", 2025).ok());

    Json out = backend->generate(decompose_request(7));
    REQUIRE(out.contains("children"));
    for (const auto& child : out["children"]) {
        CHECK(validate_document(child, "event").ok());
        // Child ids extend the parent id.
        CHECK(child["event_id"].get<std::string>().rfind("7.", 0) == 0);
    }
}

TEST_CASE("unregistered stage raises a stage error") {
    auto backend = make_template_backend();
    GenRequest req;
    req.stage = "no_such_stage";
    CHECK_THROWS_AS((void)backend->generate(req), GenError);
}

TEST_CASE("backend call stats accumulate") {
    auto backend = make_template_backend();
    CHECK(backend->stats().calls == 0);
    (void)backend->generate(persona_request(5));
    (void)backend->generate(persona_request(6));
    auto stats = backend->stats();
    CHECK(stats.calls == 2);
    CHECK(stats.tokens_in > 0);
    CHECK(stats.tokens_out > 0);
}

TEST_CASE("latency injection slows calls down") {
    auto backend = make_template_backend();
    backend->set_latency_ms(50);
    auto t0 = std::chrono::steady_clock::now();
    (void)backend->generate(persona_request(5));
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    CHECK(ms >= 50);
}

TEST_CASE("remote backend surfaces transport failures with attempt count") {
    RemoteConfig cfg;
    cfg.url = "http://127.0.0.1:1";  // nothing listens here
    cfg.max_attempts = 2;
    cfg.timeout_s = 1;
    auto backend = make_remote_backend(cfg);
    GenRequest req;
    req.stage = "decompose";
    req.response_schema = "events";
    try {
        (void)backend->generate(req);
        FAIL("expected a transport error");
    } catch (const GenError& e) {
        CHECK(e.kind == GenError::Kind::transport);
        CHECK(e.attempts == 2);
    }
}

TEST_CASE("unconfigured remote backend fails fast") {
    auto backend = make_remote_backend(RemoteConfig{});
    GenRequest req;
    req.stage = "decompose";
    CHECK_THROWS_AS((void)backend->generate(req), GenError);
}

TEST_CASE("hash embedder self-similarity is exactly one") {
    auto embedder = make_hash_embedder();
    auto v = embedder->embed("swimming session at the public pool");
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("topic lexicon orders near-synonyms above unrelated text") {
    auto embedder = make_hash_embedder();
    auto swim = embedder->embed("swimming session");
    auto pool = embedder->embed("pool workout");
    auto tax = embedder->embed("tax filing");
    CHECK(cosine(swim, pool) > cosine(swim, tax));
}

TEST_CASE("empty text cannot be embedded") {
    auto embedder = make_hash_embedder();
    CHECK_THROWS_AS((void)embedder->embed(""), std::invalid_argument);
}

TEST_CASE("derived seeds differ by stage and entity") {
    CHECK(derive_seed(42, "decompose", "7.1") != derive_seed(42, "decompose", "7.2"));
    CHECK(derive_seed(42, "decompose", "7.1") != derive_seed(42, "propose_day", "7.1"));
    CHECK(derive_seed(42, "decompose", "7.1") == derive_seed(42, "decompose", "7.1"));
}
