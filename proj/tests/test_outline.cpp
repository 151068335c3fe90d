#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "lifeforge/outline.hpp"
#include "lifeforge/validate.hpp"

using namespace lifeforge;
using namespace lifeforge::outline;

namespace {

Persona runner_persona() {
    Persona p;
    p.name = "Yu Xiaowei";
    p.job = "Insurance Agent";
    p.home_address.city = "Hong Kong";
    p.hobbies = {"Marathon", "Yoga and fitness", "Shopping"};
    return p;
}

EventNode thematic(const std::string& id, const std::string& name, Timestamp start,
                   int64_t days, int64_t hours = 0) {
    EventNode n;
    n.event_id = id;
    n.name = name;
    n.type = "personal life";
    n.date = {{start, start + days * kSecondsPerDay + hours * 3600}};
    n.description = "A fixture event.";
    n.participant = {{"Yu Xiaowei", "Herself"}};
    n.location = "Kowloon City Plaza Shopping Mall";
    n.splittable = true;
    return n;
}

// Emits children that spill past the parent window; exercises clamping.
class SpillingBackend final : public gen::GenBackend {
public:
    Json generate(const gen::GenRequest& req) override {
        record_call(1, 1);
        Json event = Json::parse(*req.find("event"));
        auto iv = parse_interval(event["date"][0].get<std::string>());
        Timestamp s = iv->first, e = iv->second;
        Json children = Json::array();
        for (int k = 0; k < 2; ++k) {
            Json c = event;
            c["event_id"] = event["event_id"].get<std::string>() + "." + std::to_string(k + 1);
            c["name"] = event["name"].get<std::string>() + " part " + std::to_string(k + 1);
            // First child starts a day early; second ends a day late.
            Timestamp cs = k == 0 ? s - kSecondsPerDay : s + (e - s) / 2;
            Timestamp ce = k == 0 ? s + (e - s) / 2 : e + kSecondsPerDay;
            c["date"] = Json::array({format_interval(cs, ce)});
            children.push_back(c);
        }
        return Json{{"children", children}};
    }
    std::string name() const override { return "spilling"; }
};

// Fails on one specific node id.
class FlakyBackend final : public gen::GenBackend {
public:
    explicit FlakyBackend(std::string poison) : poison_(std::move(poison)) {
        inner_ = gen::make_template_backend();
    }
    Json generate(const gen::GenRequest& req) override {
        Json event = Json::parse(*req.find("event"));
        if (event["event_id"] == poison_)
            throw gen::GenError(gen::GenError::Kind::transport, "synthetic failure", 3);
        return inner_->generate(req);
    }
    std::string name() const override { return "flaky"; }

private:
    std::string poison_;
    std::unique_ptr<gen::GenBackend> inner_;
};

}  // namespace

TEST_CASE("zero-priority plots are never selected") {
    auto plotdb = load_plot_db(std::string(LIFEFORGE_DATA_DIR) + "/plots.json");
    std::vector<Plot> db = plotdb;
    db[0].priority = 0.0;
    std::string banned = db[0].topic;
    Persona p = runner_persona();
    for (uint64_t seed = 0; seed < 30; ++seed) {
        auto picked = select_plots(p, db, 10, seed);
        CHECK(picked.size() <= 10);
        for (const auto& plot : picked) CHECK(plot.topic != banned);
    }
}

TEST_CASE("selection size never exceeds the cap") {
    auto plotdb = load_plot_db(std::string(LIFEFORGE_DATA_DIR) + "/plots.json");
    Persona p = runner_persona();
    CHECK(select_plots(p, plotdb, 6, 1).size() <= 6);
    CHECK(select_plots(p, plotdb, 10, 1).size() <= 10);
}

TEST_CASE("empty plot database is an error") {
    Persona p = runner_persona();
    CHECK_THROWS_AS((void)select_plots(p, {}, 10, 1), std::runtime_error);
}

TEST_CASE("career affinity pulls in the promotion plot") {
    // Tiny database with hand-computable weights: the promotion plot mentions
    // the persona's job, so its weight is priority 1.4 x (1 + 3) = 5.6 versus
    // 1.0 for the fillers. Drawing 3 of 4 hits it unless both early draws
    // miss; across seeds the selection must contain it most of the time, and
    // with the fixed seed below, deterministically.
    std::vector<Plot> db;
    Plot promo;
    promo.topic = "The Road to Promotion";
    promo.category = "work";
    promo.priority = 1.4;
    promo.detailed_description = "A year-long campaign suited to an Insurance Agent.";
    db.push_back(promo);
    for (int i = 0; i < 3; ++i) {
        Plot filler;
        filler.topic = "Filler plot " + std::to_string(i);
        filler.category = "personal life";
        filler.priority = 1.0;
        filler.detailed_description = "Unrelated everyday storyline.";
        db.push_back(filler);
    }
    Persona p = runner_persona();
    auto picked = select_plots(p, db, 3, 42);
    bool found = false;
    for (const auto& plot : picked) found |= plot.topic == "The Road to Promotion";
    CHECK(found);
    int hits = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto sel = select_plots(p, db, 3, seed);
        for (const auto& plot : sel) hits += plot.topic == "The Road to Promotion";
    }
    CHECK(hits >= 16);  // weight 5.6 vs 3 x 1.0: misses need both draws to fail
}

TEST_CASE("same-month milestone collisions drop the lower-priority plot") {
    std::vector<Plot> db;
    for (int i = 0; i < 2; ++i) {
        Plot plot;
        plot.topic = i == 0 ? "High priority" : "Low priority";
        plot.category = "work";
        plot.priority = i == 0 ? 2.0 : 1.0;
        plot.detailed_description = "Shares a milestone.";
        plot.monthly_description = {{"April", "Crunch", "Busy", {"Ship the big thing"}}};
        db.push_back(plot);
    }
    Persona p = runner_persona();
    auto picked = select_plots(p, db, 10, 3);
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].topic == "High priority");
}

TEST_CASE("thematic events start inside the month and may span out") {
    auto backend = gen::make_template_backend();
    Persona p = runner_persona();
    geo::StubGeoProvider geo(LIFEFORGE_DATA_DIR);
    auto holidays = geo.holidays(2025, "hong_kong");
    std::vector<AnchorLocation> anchors;
    for (const auto& e : geo.entries("Hong Kong")) anchors.push_back(e.anchor);

    ThematicConfig cfg;
    cfg.year = 2025;
    cfg.target_per_month = 23;
    cfg.seed = 11;
    cfg.user_id = "user_0000";
    int ordinal = 1;
    auto events = generate_thematic_events(*backend, Json::object(), p, anchors, holidays, 1,
                                           "The year begins.", cfg, ordinal);
    REQUIRE(!events.empty());
    Day jan1 = days_from_civil(2025, 1, 1), jan31 = days_from_civil(2025, 1, 31);
    bool crosses = false;
    for (const auto& e : events) {
        Day d0 = day_of(e.span().start);
        CHECK(d0 >= jan1);
        CHECK(d0 <= jan31);
        crosses |= day_of(e.span().end) > jan31;
        CHECK(e.splittable);
    }
    CHECK(crosses);  // events naturally span across months

    // One event marks the fixture holiday window.
    bool holiday_linked = false;
    for (const auto& e : events) holiday_linked |= e.name.find("Gathering") != std::string::npos;
    CHECK(holiday_linked);

    // Autoregressive step is deterministic given identical context.
    int ordinal2 = 1;
    auto events2 = generate_thematic_events(*backend, Json::object(), p, anchors, holidays, 1,
                                            "The year begins.", cfg, ordinal2);
    CHECK(events == events2);
    CHECK(ordinal == ordinal2);
}

TEST_CASE("decomposition drives every leaf under the threshold") {
    auto backend = gen::make_template_backend();
    Persona p = runner_persona();
    std::vector<EventNode> roots = {
        thematic("1", "A three-day planning stretch", make_timestamp(2025, 1, 6, 9), 3)};
    DecompositionConfig cfg;
    cfg.max_workers = 2;
    auto report = decompose_parallel(roots, *backend, cfg, p, 42);
    CHECK(report.failed_nodes.empty());
    auto leaves = collect_atomic_events(roots);
    REQUIRE(!leaves.empty());
    for (const auto& leaf : leaves) {
        CHECK(leaf.duration() < cfg.tau_seconds);
        CHECK(!leaf.splittable);
    }
    for (const auto& r : roots) CHECK(validate_event_tree(r, cfg.tau_seconds).ok());
}

TEST_CASE("an already-atomic event passes through unchanged") {
    auto backend = gen::make_template_backend();
    Persona p = runner_persona();
    std::vector<EventNode> roots = {
        thematic("1", "Short errand", make_timestamp(2025, 1, 6, 9), 0, 5)};
    DecompositionConfig cfg;
    auto report = decompose_parallel(roots, *backend, cfg, p, 42);
    CHECK(report.decompose_calls == 0);
    CHECK(roots[0].is_leaf());
    CHECK(!roots[0].splittable);
    CHECK(roots[0].name == "Short errand");
}

TEST_CASE("output is byte-identical for 1, 4 and 16 workers") {
    Persona p = runner_persona();
    std::vector<std::string> dumps;
    for (int workers : {1, 4, 16}) {
        auto backend = gen::make_template_backend();
        std::vector<EventNode> roots;
        for (int i = 0; i < 6; ++i)
            roots.push_back(thematic(std::to_string(i + 1), "Fixture event " +
                                     std::to_string(i + 1),
                                     make_timestamp(2025, 1, 2 + i, 8), 2 + i % 3));
        DecompositionConfig cfg;
        cfg.max_workers = workers;
        (void)decompose_parallel(roots, *backend, cfg, p, 7);
        dumps.push_back(forest_to_json(roots).dump());
    }
    CHECK(dumps[0] == dumps[1]);
    CHECK(dumps[1] == dumps[2]);
}

TEST_CASE("spilling children are clamped into the parent window") {
    SpillingBackend backend;
    Persona p = runner_persona();
    std::vector<EventNode> roots = {
        thematic("1", "Spilling fixture", make_timestamp(2025, 2, 3, 8), 2)};
    DecompositionConfig cfg;
    cfg.max_depth = 2;
    (void)decompose_parallel(roots, backend, cfg, p, 1);
    for (const auto& r : roots) {
        auto report = validate_event_tree(r, 0);
        INFO(report.to_string());
        CHECK(report.ok());
    }
}

TEST_CASE("decomposition work conservation") {
    auto backend = gen::make_template_backend();
    Persona p = runner_persona();
    std::vector<EventNode> roots;
    for (int i = 0; i < 5; ++i)
        roots.push_back(thematic(std::to_string(i + 1), "Budget review cycle",
                                 make_timestamp(2025, 3, 1 + 5 * i, 8), 2 + i));
    DecompositionConfig cfg;
    cfg.max_workers = 3;
    auto report = decompose_parallel(roots, *backend, cfg, p, 3);
    CHECK(report.decompose_calls == report.nodes_marked_splittable);
}

TEST_CASE("depth bound forces atomicity instead of recursing forever") {
    SpillingBackend backend;  // always splits into 2, never reaches tau
    Persona p = runner_persona();
    std::vector<EventNode> roots = {
        thematic("1", "Pathological split", make_timestamp(2025, 4, 1, 0), 20)};
    DecompositionConfig cfg;
    cfg.max_depth = 3;
    auto report = decompose_parallel(roots, backend, cfg, p, 1);
    CHECK(report.forced_atomic > 0);
    // All leaves are either under tau or sit exactly at the depth bound.
    for (const auto* leaf : collect_leaves(roots[0])) {
        int depth = static_cast<int>(
            std::count(leaf->event_id.begin(), leaf->event_id.end(), '.'));
        CHECK((leaf->duration() < cfg.tau_seconds || depth >= cfg.max_depth));
    }
}

TEST_CASE("a failing node is reported and its subtree skipped") {
    Persona p = runner_persona();
    std::vector<EventNode> roots = {
        thematic("1", "Healthy", make_timestamp(2025, 5, 1, 8), 2),
        thematic("2", "Poisoned", make_timestamp(2025, 5, 4, 8), 2)};
    FlakyBackend backend("2");
    DecompositionConfig cfg;
    auto report = decompose_parallel(roots, backend, cfg, p, 9);
    REQUIRE(report.failed_nodes.size() == 1);
    CHECK(report.failed_nodes[0].rfind("2:", 0) == 0);
    CHECK(roots[1].is_leaf());  // subtree skipped
    CHECK(!roots[0].is_leaf());
}

TEST_CASE("context series covers every day deterministically") {
    Persona p = runner_persona();
    Day d0 = days_from_civil(2025, 1, 1), d1 = days_from_civil(2025, 1, 31);
    auto ctx = generate_context_series(p, d0, d1, 5);
    REQUIRE(ctx.size() == 31);
    for (size_t i = 0; i < ctx.size(); ++i) {
        CHECK(ctx[i].date == d0 + static_cast<Day>(i));
        CHECK(!ctx[i].weather.empty());
        CHECK(!ctx[i].mood.empty());
        CHECK(!ctx[i].stress.empty());
    }
    auto ctx2 = generate_context_series(p, d0, d1, 5);
    for (size_t i = 0; i < ctx.size(); ++i) CHECK(to_json(ctx[i]) == to_json(ctx2[i]));
}

TEST_CASE("window optimization inserts runs for a marathon persona in clear weather") {
    auto backend = gen::make_template_backend();
    Persona p = runner_persona();
    Day d0 = days_from_civil(2025, 6, 2), d1 = d0 + 13;
    std::vector<ContextFactors> ctx;
    for (Day d = d0; d <= d1; ++d)
        ctx.push_back({d, "sunny", "neutral", "low", {"Marathon"}});
    std::vector<EventNode> roots;
    int ordinal = 100;
    auto delta = optimize_atomic_window(roots, d0, d1, ctx, p, "Waterloo Road Mansions",
                                        *backend, 11, ordinal);
    int runs = 0;
    for (const auto& e : delta.insertions) {
        CHECK(e.origin == "routine");
        CHECK(e.duration() < kSecondsPerDay);
        runs += e.name.find("run") != std::string::npos;
    }
    CHECK(runs >= 2);
    CHECK(ordinal > 100);
}

TEST_CASE("no atomic events and no habits gives an empty delta") {
    auto backend = gen::make_template_backend();
    Persona p;
    p.name = "Blank Persona";
    Day d0 = days_from_civil(2025, 6, 2), d1 = d0 + 13;
    std::vector<ContextFactors> ctx;
    for (Day d = d0; d <= d1; ++d) ctx.push_back({d, "sunny", "neutral", "low", {}});
    std::vector<EventNode> roots;
    int ordinal = 1;
    auto delta = optimize_atomic_window(roots, d0, d1, ctx, p, "Home", *backend, 1, ordinal);
    CHECK(delta.insertions.empty());
    CHECK(delta.cancellations.empty());
}

TEST_CASE("rainy context cancels an outdoor routine event") {
    auto backend = gen::make_template_backend();
    Persona p = runner_persona();
    Day rainy_day = days_from_civil(2025, 6, 3);
    std::vector<ContextFactors> ctx = {{rainy_day, "rainy", "neutral", "low", {}}};
    EventNode run = thematic("55", "Morning run in the neighbourhood",
                             static_cast<Timestamp>(rainy_day) * kSecondsPerDay + 6 * 3600, 0, 1);
    run.origin = "routine";
    run.splittable = false;
    std::vector<EventNode> roots = {run};
    int ordinal = 60;
    auto delta = optimize_atomic_window(roots, rainy_day, rainy_day, ctx, p,
                                        "Waterloo Road Mansions", *backend, 2, ordinal);
    bool cancelled = false;
    for (const auto& id : delta.cancellations) cancelled |= id == "55";
    CHECK(cancelled);

    apply_window_delta(roots, delta);
    for (const auto& r : roots) CHECK(r.event_id != "55");
}
