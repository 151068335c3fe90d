#include "lifeforge/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "lifeforge/parallel.hpp"
#include "lifeforge/validate.hpp"

namespace lifeforge::pipeline {

namespace fs = std::filesystem;

namespace {

std::string user_label(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "user_%04d", i);
    return buf;
}

std::string now_string() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%d %H:%M:%S", std::localtime(&t));
    return buf;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const Json& j) {
    PipelineConfig c;
    c.users = j.value("users", c.users);
    c.seed = j.value("seed", c.seed);
    c.year = j.value("year", c.year);
    c.start_month = j.value("start_month", c.start_month);
    c.months = j.value("months", c.months);
    c.backend = j.value("backend", c.backend);
    c.geo = j.value("geo", c.geo);
    c.region = j.value("region", c.region);
    c.timezone = j.value("timezone", c.timezone);
    c.workers = j.value("workers", c.workers);
    if (j.contains("data_dir")) c.data_dir = j["data_dir"].get<std::string>();
    if (j.contains("llm")) {
        const auto& l = j["llm"];
        c.llm.url = l.value("url", c.llm.url);
        c.llm.model = l.value("model", c.llm.model);
        c.llm.temperature = l.value("temperature", c.llm.temperature);
        c.llm.latency_ms = l.value("latency_ms", c.llm.latency_ms);
    }
    if (j.contains("outline")) {
        const auto& o = j["outline"];
        c.outline.plots_file = o.value("plots_file", c.outline.plots_file);
        c.outline.tau_hours = o.value("tau_hours", c.outline.tau_hours);
        c.outline.max_children = o.value("max_children", c.outline.max_children);
        c.outline.max_depth = o.value("max_depth", c.outline.max_depth);
        c.outline.max_plots = o.value("max_plots", c.outline.max_plots);
        c.outline.thematic_per_month =
            o.value("thematic_per_month", c.outline.thematic_per_month);
    }
    if (j.contains("sim")) {
        const auto& s = j["sim"];
        c.sim.slice_days = s.value("slice_days", c.sim.slice_days);
        c.sim.refine_rounds = s.value("refine_rounds", c.sim.refine_rounds);
        c.sim.short_term_days = s.value("short_term_days", c.sim.short_term_days);
        c.sim.episodic_k = s.value("episodic_k", c.sim.episodic_k);
        c.sim.supplementary_gap_min =
            s.value("supplementary_gap_min", c.sim.supplementary_gap_min);
        c.sim.density_target = s.value("density_target", c.sim.density_target);
    }
    if (j.contains("artifacts")) {
        const auto& a = j["artifacts"];
        c.artifacts.rates_file = a.value("rates_file", c.artifacts.rates_file);
        c.artifacts.health_coeffs_file =
            a.value("health_coeffs_file", c.artifacts.health_coeffs_file);
        c.artifacts.noise_enabled = a.value("noise_enabled", c.artifacts.noise_enabled);
    }
    if (j.contains("qa")) {
        const auto& q = j["qa"];
        c.qa.mix_file = q.value("mix_file", c.qa.mix_file);
        c.qa.per_day = q.value("per_day", c.qa.per_day);
    }
    if (j.contains("bench")) {
        const auto& b = j["bench"];
        c.bench.enabled = b.value("enabled", c.bench.enabled);
        c.bench.adapter = b.value("adapter", c.bench.adapter);
        c.bench.judge = b.value("judge", c.bench.judge);
    }
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    return from_json(read_json(path));
}

Json PipelineConfig::to_json() const {
    Json j;
    j["users"] = users;
    j["seed"] = seed;
    j["year"] = year;
    j["start_month"] = start_month;
    j["months"] = months;
    j["backend"] = backend;
    j["geo"] = geo;
    j["region"] = region;
    j["timezone"] = timezone;
    j["workers"] = workers;
    j["data_dir"] = data_dir.string();
    j["llm"] = Json{{"url", llm.url},
                    {"model", llm.model},
                    {"temperature", llm.temperature},
                    {"latency_ms", llm.latency_ms}};
    j["outline"] = Json{{"plots_file", outline.plots_file},
                        {"tau_hours", outline.tau_hours},
                        {"max_children", outline.max_children},
                        {"max_depth", outline.max_depth},
                        {"max_plots", outline.max_plots},
                        {"thematic_per_month", outline.thematic_per_month}};
    j["sim"] = Json{{"slice_days", sim.slice_days},
                    {"refine_rounds", sim.refine_rounds},
                    {"short_term_days", sim.short_term_days},
                    {"episodic_k", sim.episodic_k},
                    {"supplementary_gap_min", sim.supplementary_gap_min},
                    {"density_target", sim.density_target}};
    j["artifacts"] = Json{{"rates_file", artifacts.rates_file},
                          {"health_coeffs_file", artifacts.health_coeffs_file},
                          {"noise_enabled", artifacts.noise_enabled}};
    j["qa"] = Json{{"mix_file", qa.mix_file}, {"per_day", qa.per_day}};
    j["bench"] = Json{{"enabled", bench.enabled},
                      {"adapter", bench.adapter},
                      {"judge", bench.judge}};
    return j;
}

std::vector<std::string> PipelineConfig::validate() const {
    std::vector<std::string> problems;
    if (users < 1) problems.push_back("users must be >= 1");
    if (months < 1 || months > 12) problems.push_back("months must be in [1, 12]");
    if (start_month < 1 || start_month > 12) problems.push_back("start_month out of range");
    if (workers < 1) problems.push_back("workers must be >= 1");
    if (backend != "template" && backend != "remote")
        problems.push_back("backend must be template or remote");
    if (geo != "stub" && geo != "live") problems.push_back("geo must be stub or live");
    if (outline.tau_hours <= 0) problems.push_back("outline.tau_hours must be > 0");
    if (!fs::exists(data_dir)) problems.push_back("data_dir does not exist: " + data_dir.string());
    return problems;
}

Day PipelineConfig::end_day() const {
    int m = start_month + months - 1;
    int y = year + (m - 1) / 12;
    m = (m - 1) % 12 + 1;
    return days_from_civil(y, m, days_in_month(y, m)) ;
}

Runtime Runtime::build(const PipelineConfig& cfg) {
    Runtime rt;
    if (cfg.backend == "remote") {
        gen::RemoteConfig rc = gen::remote_config_from_env();
        if (!cfg.llm.url.empty()) rc.url = cfg.llm.url;
        rc.model = cfg.llm.model;
        rc.temperature = cfg.llm.temperature;
        rt.backend = gen::make_remote_backend(rc);
    } else {
        rt.backend = gen::make_template_backend();
    }
    rt.backend->set_latency_ms(cfg.llm.latency_ms);
    rt.embedder = gen::make_hash_embedder();
    rt.venue_lookup = std::make_unique<geo::StubGeoProvider>(cfg.data_dir);
    if (cfg.geo == "live") {
        geo::LiveGeoConfig gc;
        if (const char* key = std::getenv("LIFEFORGE_MAP_KEY")) gc.key = key;
        gc.holiday_dir = cfg.data_dir;
        rt.geo_provider = geo::make_live_provider(gc);
    } else {
        rt.geo_provider = std::make_unique<geo::StubGeoProvider>(cfg.data_dir);
    }
    return rt;
}

// ------------------------------------------------------------------ helpers

uint64_t hash_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    uint64_t h = kFnvOffset;
    char buf[8192];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a(std::string_view(buf, static_cast<size_t>(in.gcount())), h);
        if (!in) break;
    }
    return h;
}

std::string hash_hex(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

void write_json(const fs::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

Json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error("malformed JSON in " + p.string());
    return j;
}

EventExport export_events(const std::vector<DailyActivity>& activities,
                          const std::vector<EventNode>& roots) {
    // Atomic id -> type, from the plan tree.
    std::map<std::string, std::string> type_of;
    for (const auto& r : roots)
        visit_events(r, [&](const EventNode& n) { type_of[n.event_id] = n.type; });

    std::vector<const DailyActivity*> ordered;
    for (const auto& a : activities) ordered.push_back(&a);
    std::sort(ordered.begin(), ordered.end(), [](const DailyActivity* a, const DailyActivity* b) {
        if (a->date != b->date) return a->date < b->date;
        if (a->start != b->start) return a->start < b->start;
        return a->activity_id < b->activity_id;
    });

    EventExport out;
    int next_id = 0;
    for (const auto* a : ordered) {
        EventNode e;
        e.event_id = std::to_string(next_id++);
        e.name = a->name;
        e.date = {{a->start, a->end}};
        if (!a->parent_event_id.empty() && type_of.count(a->parent_event_id))
            e.type = type_of[a->parent_event_id];
        else if (a->source == ActivitySource::routine)
            e.type = "Daily Routine";
        else
            e.type = "Unexpected Events";
        e.description = a->description;
        e.participant = a->participants;
        e.location = a->location;
        e.splittable = false;
        out.activity_to_event[a->activity_id] = e.event_id;
        out.events.push_back(std::move(e));
    }
    return out;
}

// -------------------------------------------------------------------- stages

namespace {

struct StageRunner {
    const PipelineConfig& cfg;
    fs::path run_dir;
    Json manifest;
    std::ostream& log;
    std::set<std::string> assume_fresh;

    StageRunner(const PipelineConfig& c, fs::path dir, std::ostream& out)
        : cfg(c), run_dir(std::move(dir)), log(out) {
        fs::create_directories(run_dir);
        auto mpath = run_dir / "manifest.json";
        if (fs::exists(mpath)) {
            manifest = read_json(mpath);
        } else {
            manifest = Json{{"stages", Json::object()}};
        }
    }

    // inputs_hash covers the stage config slice, the seed and every input file.
    std::string inputs_hash(const std::string& stage, const Json& config_slice,
                            const std::vector<fs::path>& input_files) const {
        uint64_t h = fnv1a(stage);
        h = fnv1a(config_slice.dump(), h);
        h = fnv1a_u64(cfg.seed, h);
        for (const auto& f : input_files) {
            h = fnv1a(f.string(), h);
            if (fs::exists(f)) h = fnv1a_u64(hash_file(f), h);
        }
        return hash_hex(h);
    }

    bool up_to_date(const std::string& stage, const std::string& hash) const {
        if (!manifest["stages"].contains(stage)) return false;
        const Json& st = manifest["stages"][stage];
        if (st.value("inputs_hash", std::string{}) != hash) return false;
        if (!st.value("completed", false)) return false;
        for (const auto& out : st.value("outputs", Json::array()))
            if (!fs::exists(run_dir / out.get<std::string>())) return false;
        return true;
    }

    void record(const std::string& stage, const std::string& hash,
                const std::vector<std::string>& outputs) {
        Json st;
        st["inputs_hash"] = hash;
        st["completed"] = true;
        st["outputs"] = outputs;
        st["timestamp"] = now_string();
        manifest["stages"][stage] = st;
        write_json(run_dir / "manifest.json", manifest);
    }

    // Runs `body` unless the manifest marks this stage fresh. body() returns
    // the produced file list (relative to run_dir).
    template <typename Body>
    bool stage(const std::string& name, const Json& config_slice,
               const std::vector<fs::path>& inputs, Body&& body) {
        if (assume_fresh.count(name)) {
            log << "[" << name << "] externally provided, skipped\n";
            return true;
        }
        std::string hash = inputs_hash(name, config_slice, inputs);
        if (up_to_date(name, hash)) {
            log << "[" << name << "] up to date, skipped\n";
            return true;
        }
        log << "[" << name << "] running...\n";
        try {
            std::vector<std::string> outputs = body();
            record(name, hash, outputs);
            return true;
        } catch (const std::exception& e) {
            log << "[" << name << "] FAILED: " << e.what() << "\n";
            Json st;
            st["inputs_hash"] = hash;
            st["completed"] = false;
            st["error"] = e.what();
            st["timestamp"] = now_string();
            manifest["stages"][name] = st;
            write_json(run_dir / "manifest.json", manifest);
            return false;
        }
    }
};

std::vector<PhoneArtifact> read_artifacts_dir(const fs::path& dir) {
    std::vector<PhoneArtifact> all;
    for (const char* kind : {"contacts", "calls", "sms", "calendar", "agent_chat", "photo",
                             "note", "push"}) {
        fs::path f = dir / (std::string(kind) + ".json");
        if (!fs::exists(f)) continue;
        for (const auto& aj : read_json(f)) all.push_back(artifact_from_json(aj));
    }
    return all;
}

}  // namespace

int run_pipeline(const PipelineConfig& cfg, const fs::path& run_dir, std::ostream& log,
                 const std::set<std::string>& assume_fresh, const std::string& run_until) {
    StageRunner runner(cfg, run_dir, log);
    runner.assume_fresh = assume_fresh;
    Runtime rt = Runtime::build(cfg);

    fs::path priors_path = cfg.data_dir / "priors.json";
    fs::path denylist_path = cfg.data_dir / "denylist.txt";
    fs::path plots_path = cfg.outline.plots_file.empty()
                              ? cfg.data_dir / "plots.json"
                              : fs::path(cfg.outline.plots_file);
    fs::path rates_path = cfg.artifacts.rates_file.empty()
                              ? cfg.data_dir / "rates.json"
                              : fs::path(cfg.artifacts.rates_file);
    fs::path coeffs_path = cfg.artifacts.health_coeffs_file.empty()
                               ? cfg.data_dir / "health_coeffs.json"
                               : fs::path(cfg.artifacts.health_coeffs_file);
    fs::path mix_path = cfg.qa.mix_file.empty() ? cfg.data_dir / "qa_mix.json"
                                                : fs::path(cfg.qa.mix_file);

    write_json(run_dir / "config.json", cfg.to_json());

    Day d0 = cfg.start_day();
    Day d1 = cfg.end_day();
    int64_t tau_seconds = static_cast<int64_t>(cfg.outline.tau_hours) * 3600;

    std::vector<std::string> users;
    for (int i = 0; i < cfg.users; ++i) users.push_back(user_label(i));

    // ------------------------------------------------------------- persona
    bool ok = runner.stage(
        "persona", Json{{"epoch", cfg.year}}, {priors_path, denylist_path}, [&] {
            auto priors = persona::PriorTables::load(priors_path);
            auto denylist = persona::load_denylist(denylist_path);
            persona::SynthConfig scfg;
            scfg.epoch_year = cfg.year;
            scfg.workers = cfg.workers;
            persona::PersonaSynthesizer synth(*rt.backend, priors, denylist, scfg);
            std::vector<std::string> outputs;
            for (const auto& uid : users) {
                Persona p = synth.sample_base_persona(uid, cfg.seed);
                synth.build_social_network(p, uid, cfg.seed);
                auto anchors = synth.anchor_urban_landscape(p, *rt.geo_provider, uid, cfg.seed);
                auto rep = validate_persona(p, cfg.year);
                if (!rep.ok())
                    throw std::runtime_error("persona validation failed for " + uid + ":\n" +
                                             rep.to_string());
                write_json(run_dir / "persona" / uid / "persona.json", to_json(p));
                Json aj = Json::array();
                for (const auto& a : anchors.anchors) aj.push_back(to_json(a));
                write_json(run_dir / "persona" / uid / "anchors.json", aj);
                write_json(run_dir / "persona" / uid / "persona_report.json",
                           Json{{"warnings", anchors.warnings}});
                outputs.push_back("persona/" + uid + "/persona.json");
                outputs.push_back("persona/" + uid + "/anchors.json");
            }
            return outputs;
        });
    if (!ok) return 3;
    if (run_until == "persona") return 0;

    // ---------------------------------------------------------------- plan
    std::vector<fs::path> plan_inputs = {plots_path};
    for (const auto& uid : users) {
        plan_inputs.push_back(run_dir / "persona" / uid / "persona.json");
        plan_inputs.push_back(run_dir / "persona" / uid / "anchors.json");
    }
    ok = runner.stage(
        "plan",
        Json{{"tau_hours", cfg.outline.tau_hours},
             {"max_children", cfg.outline.max_children},
             {"max_depth", cfg.outline.max_depth},
             {"max_plots", cfg.outline.max_plots},
             {"thematic_per_month", cfg.outline.thematic_per_month},
             {"months", cfg.months},
             {"start_month", cfg.start_month},
             {"year", cfg.year}},
        plan_inputs, [&] {
            auto plotdb = outline::load_plot_db(plots_path);
            std::vector<std::string> outputs;
            for (const auto& uid : users) {
                Persona p = persona_from_json(read_json(run_dir / "persona" / uid /
                                                        "persona.json"));
                std::vector<AnchorLocation> anchors;
                for (const auto& aj : read_json(run_dir / "persona" / uid / "anchors.json"))
                    anchors.push_back(anchor_from_json(aj));

                auto selected = outline::select_plots(
                    p, plotdb, static_cast<size_t>(cfg.outline.max_plots),
                    gen::derive_seed(cfg.seed, "plots", uid));
                Json outline_json = outline::merge_outline(*rt.backend, p, selected, cfg.year,
                                                           gen::derive_seed(cfg.seed, "outline",
                                                                            uid));
                geo::HolidayCalendar holidays;
                try {
                    holidays = rt.geo_provider->holidays(cfg.year, cfg.region);
                } catch (const geo::GeoError&) {
                    holidays.year = cfg.year;  // no fixture: empty calendar
                }

                // Month-by-month autoregressive thematic generation.
                std::vector<EventNode> roots;
                outline::ThematicConfig tcfg;
                tcfg.year = cfg.year;
                tcfg.target_per_month = cfg.outline.thematic_per_month;
                tcfg.seed = cfg.seed;
                tcfg.user_id = uid;
                int next_ordinal = 1;
                std::string prev_summary = "No previous month: the year begins here.";
                for (int k = 0; k < cfg.months; ++k) {
                    int m = cfg.start_month + k;
                    int y = cfg.year + (m - 1) / 12;
                    m = (m - 1) % 12 + 1;
                    tcfg.year = y;
                    auto events = outline::generate_thematic_events(
                        *rt.backend, outline_json, p, anchors, holidays, m, prev_summary,
                        tcfg, next_ordinal);
                    prev_summary = outline::summarize_month_events(events);
                    for (auto& e : events) roots.push_back(std::move(e));
                }

                outline::DecompositionConfig dcfg;
                dcfg.tau_seconds = tau_seconds;
                dcfg.max_workers = cfg.workers;
                dcfg.max_children = cfg.outline.max_children;
                dcfg.max_depth = cfg.outline.max_depth;
                auto decomp = outline::decompose_parallel(roots, *rt.backend, dcfg, p,
                                                          cfg.seed);

                auto context = outline::generate_context_series(p, d0, d1, cfg.seed);

                // Two-week optimization windows, batched in parallel.
                std::string home_anchor = anchors.empty() ? "Home" : anchors.front().name;
                std::vector<std::pair<Day, Day>> windows;
                for (Day w = d0; w <= d1; w += 14)
                    windows.emplace_back(w, std::min<Day>(d1, w + 13));
                std::vector<outline::WindowDelta> deltas(windows.size());
                std::vector<int> ordinals(windows.size());
                // Reserve id ranges per window so insertions stay deterministic.
                int base_ordinal = next_ordinal;
                for (size_t i = 0; i < windows.size(); ++i) {
                    ordinals[i] = base_ordinal + static_cast<int>(i) * 200;
                }
                parallel_for(windows.size(), cfg.workers, [&](size_t i) {
                    int ord = ordinals[i];
                    deltas[i] = outline::optimize_atomic_window(
                        roots, windows[i].first, windows[i].second, context, p, home_anchor,
                        *rt.backend, cfg.seed, ord);
                });
                for (const auto& delta : deltas) outline::apply_window_delta(roots, delta);

                write_json(run_dir / "plan" / uid / "event_tree.json",
                           outline::forest_to_json(roots));
                Json flat = Json::array();
                for (const auto& leaf : outline::collect_atomic_events(roots))
                    flat.push_back(event_flat_to_json(leaf));
                write_json(run_dir / "plan" / uid / "atomic_events.json", flat);
                Json ctxj = Json::array();
                for (const auto& c : context) ctxj.push_back(outline::to_json(c));
                write_json(run_dir / "plan" / uid / "context.json", ctxj);
                Json sel = Json::array();
                for (const auto& plot : selected) sel.push_back(to_json(plot));
                write_json(run_dir / "plan" / uid / "selected_plots.json", sel);
                write_json(run_dir / "plan" / uid / "plan_report.json",
                           Json{{"decompose_calls", decomp.decompose_calls},
                                {"nodes_marked_splittable", decomp.nodes_marked_splittable},
                                {"forced_atomic", decomp.forced_atomic},
                                {"failed_nodes", decomp.failed_nodes}});
                for (const char* f : {"event_tree.json", "atomic_events.json", "context.json",
                                      "selected_plots.json", "plan_report.json"})
                    outputs.push_back("plan/" + uid + "/" + f);
            }
            return outputs;
        });
    if (!ok) return 3;
    if (run_until == "plan") return 0;

    // ------------------------------------------------------------ simulate
    std::vector<fs::path> sim_inputs;
    for (const auto& uid : users) {
        sim_inputs.push_back(run_dir / "plan" / uid / "event_tree.json");
        sim_inputs.push_back(run_dir / "plan" / uid / "context.json");
        sim_inputs.push_back(run_dir / "persona" / uid / "persona.json");
    }
    ok = runner.stage(
        "simulate",
        Json{{"slice_days", cfg.sim.slice_days},
             {"refine_rounds", cfg.sim.refine_rounds},
             {"density_target", cfg.sim.density_target}},
        sim_inputs, [&] {
            std::vector<std::string> outputs;
            for (const auto& uid : users) {
                Persona p = persona_from_json(read_json(run_dir / "persona" / uid /
                                                        "persona.json"));
                auto roots = outline::forest_from_json(
                    read_json(run_dir / "plan" / uid / "event_tree.json"));
                std::vector<AnchorLocation> anchors;
                for (const auto& aj : read_json(run_dir / "persona" / uid / "anchors.json"))
                    anchors.push_back(anchor_from_json(aj));
                std::vector<outline::ContextFactors> context;
                for (const auto& cj : read_json(run_dir / "plan" / uid / "context.json"))
                    context.push_back(outline::context_from_json(cj));

                sim::SimConfig scfg;
                scfg.slice_days = cfg.sim.slice_days;
                scfg.refine_rounds = cfg.sim.refine_rounds;
                scfg.short_term_days = cfg.sim.short_term_days;
                scfg.episodic_k = cfg.sim.episodic_k;
                scfg.supplementary_gap_min = cfg.sim.supplementary_gap_min;
                scfg.density_target = cfg.sim.density_target;
                scfg.workers = cfg.workers;
                scfg.seed = cfg.seed;
                scfg.user_id = uid;
                scfg.city = p.home_address.city;
                scfg.home_anchor = anchors.empty() ? "Home" : anchors.front().name;
                sim::DailySimulator simulator(*rt.backend, *rt.embedder, *rt.geo_provider,
                                              rt.venue_lookup.get(), scfg);
                auto result = simulator.simulate_slices(roots, p, anchors, context, d0, d1);

                Json acts = Json::array();
                for (const auto& a : result.activities) acts.push_back(to_json(a));
                write_json(run_dir / "sim" / uid / "activities.json", acts);
                Json snaps = Json::array();
                for (const auto& s : result.memory_snapshots) snaps.push_back(s);
                write_json(run_dir / "sim" / uid / "memory_snapshots.json", snaps);
                write_json(run_dir / "sim" / uid / "sim_report.json",
                           Json{{"notes", result.report}});
                outputs.push_back("sim/" + uid + "/activities.json");
                outputs.push_back("sim/" + uid + "/memory_snapshots.json");
                outputs.push_back("sim/" + uid + "/sim_report.json");
            }
            return outputs;
        });
    if (!ok) return 3;
    if (run_until == "simulate") return 0;

    // -------------------------------------------------------------- events
    std::vector<fs::path> event_inputs;
    for (const auto& uid : users) {
        event_inputs.push_back(run_dir / "sim" / uid / "activities.json");
        event_inputs.push_back(run_dir / "plan" / uid / "event_tree.json");
    }
    ok = runner.stage("events", Json::object(), event_inputs, [&] {
        std::vector<std::string> outputs;
        for (const auto& uid : users) {
            std::vector<DailyActivity> activities;
            for (const auto& aj : read_json(run_dir / "sim" / uid / "activities.json"))
                activities.push_back(activity_from_json(aj));
            auto roots = outline::forest_from_json(
                read_json(run_dir / "plan" / uid / "event_tree.json"));
            EventExport exp = export_events(activities, roots);
            Json ev = Json::array();
            for (const auto& e : exp.events) ev.push_back(event_flat_to_json(e));
            write_json(run_dir / "events" / uid / "events.json", ev);
            Json map_json;
            for (const auto& [aid, eid] : exp.activity_to_event) map_json[aid] = eid;
            write_json(run_dir / "events" / uid / "activity_event_map.json", map_json);
            outputs.push_back("events/" + uid + "/events.json");
            outputs.push_back("events/" + uid + "/activity_event_map.json");
        }
        return outputs;
    });
    if (!ok) return 3;
    if (run_until == "events") return 0;

    // ----------------------------------------------------------- artifacts
    std::vector<fs::path> artifact_inputs = {rates_path, coeffs_path};
    for (const auto& uid : users) {
        artifact_inputs.push_back(run_dir / "sim" / uid / "activities.json");
        artifact_inputs.push_back(run_dir / "events" / uid / "activity_event_map.json");
    }
    ok = runner.stage(
        "artifacts", Json{{"noise_enabled", cfg.artifacts.noise_enabled}}, artifact_inputs,
        [&] {
            auto rates = artifacts::RateTable::load(rates_path);
            auto coeffs = artifacts::HealthCoeffs::load(coeffs_path);
            std::vector<std::string> outputs;
            for (const auto& uid : users) {
                Persona p = persona_from_json(read_json(run_dir / "persona" / uid /
                                                        "persona.json"));
                std::vector<DailyActivity> activities;
                for (const auto& aj : read_json(run_dir / "sim" / uid / "activities.json"))
                    activities.push_back(activity_from_json(aj));
                Json map_json = read_json(run_dir / "events" / uid /
                                          "activity_event_map.json");
                // Artifacts link the published (exported) event ids.
                for (auto& a : activities)
                    if (map_json.contains(a.activity_id))
                        a.parent_event_id = map_json[a.activity_id].get<std::string>();
                std::vector<outline::ContextFactors> context;
                for (const auto& cj : read_json(run_dir / "plan" / uid / "context.json"))
                    context.push_back(outline::context_from_json(cj));

                artifacts::ArtifactConfig acfg;
                acfg.seed = cfg.seed;
                acfg.user_id = uid;
                acfg.workers = cfg.workers;
                acfg.noise_enabled = cfg.artifacts.noise_enabled;
                artifacts::ArtifactGenerator generator(*rt.backend, rates, coeffs, acfg);

                std::map<Day, std::vector<DailyActivity>> by_day;
                for (const auto& a : activities) by_day[a.date].push_back(a);
                std::vector<Day> days;
                for (Day d = d0; d <= d1; ++d) days.push_back(d);

                std::vector<std::vector<PhoneArtifact>> day_art(days.size());
                std::vector<HealthRecord> health(days.size());
                parallel_for(days.size(), cfg.workers, [&](size_t i) {
                    Day d = days[i];
                    outline::ContextFactors ctx;
                    for (const auto& c : context)
                        if (c.date == d) ctx = c;
                    static const std::vector<DailyActivity> kEmpty;
                    const auto& acts = by_day.count(d) ? by_day.at(d) : kEmpty;
                    day_art[i] = generator.generate_phone_day(acts, p, ctx, d);
                    auto noise = generator.generate_noise_day(p, ctx, d);
                    day_art[i].insert(day_art[i].end(), noise.begin(), noise.end());
                    health[i] = generator.generate_health_day(acts, p, ctx, d);
                });

                std::vector<PhoneArtifact> all;
                for (const auto& c : generator.generate_contacts(p)) all.push_back(c);
                for (auto& da : day_art) all.insert(all.end(), da.begin(), da.end());
                artifacts::assign_phone_ids(all);
                artifacts::assign_health_ids(health);

                // Monthly summaries: one per simulated month.
                std::vector<MonthlySummary> summaries;
                for (int k = 0; k < cfg.months; ++k) {
                    int m = cfg.start_month + k;
                    int y = cfg.year + (m - 1) / 12;
                    m = (m - 1) % 12 + 1;
                    summaries.push_back(
                        generator.summarize_month(uid, y, m, activities, health));
                }

                std::map<std::string, Json> by_kind;
                for (const char* kind : {"contacts", "calls", "sms", "calendar", "agent_chat",
                                         "photo", "note", "push"})
                    by_kind[kind] = Json::array();
                for (const auto& a : all) {
                    std::string kind = artifact_kind(a);
                    std::string file = kind == "contact" ? "contacts"
                                       : kind == "call"  ? "calls"
                                                         : kind;
                    by_kind[file].push_back(to_json(a));
                }
                for (const auto& [file, arr] : by_kind) {
                    write_json(run_dir / "artifacts" / uid / (file + ".json"), arr);
                    outputs.push_back("artifacts/" + uid + "/" + file + ".json");
                }
                Json hj = Json::array();
                for (const auto& h : health) hj.push_back(to_json(h));
                write_json(run_dir / "artifacts" / uid / "health.json", hj);
                Json sj = Json::array();
                for (const auto& s : summaries) sj.push_back(to_json(s));
                write_json(run_dir / "artifacts" / uid / "summaries.json", sj);
                outputs.push_back("artifacts/" + uid + "/health.json");
                outputs.push_back("artifacts/" + uid + "/summaries.json");
            }
            return outputs;
        });
    if (!ok) return 3;
    if (run_until == "artifacts") return 0;

    // ------------------------------------------------------------------ qa
    std::vector<fs::path> qa_inputs = {mix_path};
    for (const auto& uid : users) {
        qa_inputs.push_back(run_dir / "events" / uid / "events.json");
        qa_inputs.push_back(run_dir / "artifacts" / uid / "note.json");
    }
    ok = runner.stage("qa", Json{{"per_day", cfg.qa.per_day}}, qa_inputs, [&] {
        auto mix = qa::CategoryMix::load(mix_path);
        std::vector<std::string> outputs;
        for (const auto& uid : users) {
            Persona p =
                persona_from_json(read_json(run_dir / "persona" / uid / "persona.json"));
            std::vector<EventNode> events;
            for (const auto& ej : read_json(run_dir / "events" / uid / "events.json"))
                events.push_back(event_flat_from_json(ej));
            std::vector<DailyActivity> activities;
            for (const auto& aj : read_json(run_dir / "sim" / uid / "activities.json"))
                activities.push_back(activity_from_json(aj));
            auto all_artifacts = read_artifacts_dir(run_dir / "artifacts" / uid);
            size_t base_count = all_artifacts.size();

            qa::QaConfig qcfg;
            qcfg.seed = cfg.seed;
            qcfg.user_id = uid;
            qcfg.user_name = p.name;
            qcfg.workers = cfg.workers;
            qa::QaGenerator generator(*rt.backend, qcfg);
            auto schedule = qa::build_schedule(d0, d1, mix, cfg.qa.per_day, cfg.seed, uid);
            qa::CorpusView corpus{&p, &events, &activities, &all_artifacts};
            std::vector<std::string> qa_log;
            auto drafts = generator.propose_questions(schedule, corpus, &qa_log);

            std::vector<QAItem> supplemented;
            for (auto& q : drafts) {
                int added = generator.supplement_evidence(q, all_artifacts);
                if (added >= 0) supplemented.push_back(q);
                else qa_log.push_back("dropped (cannot supplement): " + q.question);
            }
            Json worksheet;
            auto kept = generator.filter_questions(supplemented, all_artifacts, &worksheet);

            Json qj = Json::array();
            for (const auto& q : kept) qj.push_back(to_json(q));
            write_json(run_dir / "qa" / uid / "qa.json", qj);
            write_json(run_dir / "qa" / uid / "qa_worksheet.json", worksheet);
            Json supp = Json::array();
            for (size_t i = base_count; i < all_artifacts.size(); ++i)
                supp.push_back(to_json(all_artifacts[i]));
            write_json(run_dir / "qa" / uid / "artifacts_supplement.json", supp);
            write_json(run_dir / "qa" / uid / "qa_report.json", Json{{"notes", qa_log}});
            for (const char* f :
                 {"qa.json", "qa_worksheet.json", "artifacts_supplement.json",
                  "qa_report.json"})
                outputs.push_back("qa/" + uid + "/" + std::string(f));
        }
        return outputs;
    });
    if (!ok) return 3;
    if (run_until == "qa") return 0;

    // ------------------------------------------------------------- quality
    std::vector<fs::path> quality_inputs;
    for (const auto& uid : users)
        quality_inputs.push_back(run_dir / "events" / uid / "events.json");
    ok = runner.stage("quality", Json{{"geo", cfg.geo}}, quality_inputs, [&] {
        Json all_reports;
        for (const auto& uid : users) {
            Persona p =
                persona_from_json(read_json(run_dir / "persona" / uid / "persona.json"));
            std::vector<EventNode> events;
            for (const auto& ej : read_json(run_dir / "events" / uid / "events.json"))
                events.push_back(event_flat_from_json(ej));
            auto rep = quality::evaluate(events, p, *rt.geo_provider, p.home_address.city);
            all_reports[uid] = rep.to_json();
        }
        write_json(run_dir / "quality" / "report.json", all_reports);
        return std::vector<std::string>{"quality/report.json"};
    });
    if (!ok) return 3;
    if (run_until == "quality") return 0;

    // ------------------------------------------------------------ sessions
    std::vector<fs::path> session_inputs;
    for (const auto& uid : users) {
        session_inputs.push_back(run_dir / "qa" / uid / "qa.json");
        session_inputs.push_back(run_dir / "artifacts" / uid / "health.json");
    }
    ok = runner.stage("sessions", Json::object(), session_inputs, [&] {
        std::vector<std::string> outputs;
        for (const auto& uid : users) {
            auto all_artifacts = read_artifacts_dir(run_dir / "artifacts" / uid);
            for (const auto& aj :
                 read_json(run_dir / "qa" / uid / "artifacts_supplement.json"))
                all_artifacts.push_back(artifact_from_json(aj));
            std::vector<HealthRecord> health;
            for (const auto& hj : read_json(run_dir / "artifacts" / uid / "health.json"))
                health.push_back(health_from_json(hj));
            std::vector<QAItem> questions;
            for (const auto& qj : read_json(run_dir / "qa" / uid / "qa.json"))
                questions.push_back(qa_from_json(qj));
            auto session = bench::build_session(uid, all_artifacts, health, questions);
            write_json(run_dir / "sessions" / uid / "session.json",
                       bench::session_to_json(session));
            outputs.push_back("sessions/" + uid + "/session.json");
        }
        return outputs;
    });
    if (!ok) return 3;
    if (run_until == "sessions") return 0;

    // --------------------------------------------------------------- bench
    if (cfg.bench.enabled) {
        std::vector<fs::path> bench_inputs;
        for (const auto& uid : users)
            bench_inputs.push_back(run_dir / "sessions" / uid / "session.json");
        ok = runner.stage(
            "bench", Json{{"adapter", cfg.bench.adapter}, {"judge", cfg.bench.judge}},
            bench_inputs, [&] {
                Json results;
                for (const auto& uid : users) {
                    auto session = bench::session_from_json(
                        read_json(run_dir / "sessions" / uid / "session.json"));
                    std::unique_ptr<bench::Adapter> adapter;
                    if (cfg.bench.adapter == "fullcontext")
                        adapter = bench::make_fullcontext_adapter(*rt.backend);
                    else if (cfg.bench.adapter == "echo_not_in_memory")
                        adapter = bench::make_echo_adapter();
                    else if (cfg.bench.adapter == "mute")
                        adapter = bench::make_mute_adapter();
                    else if (cfg.bench.adapter.rfind("http://", 0) == 0 ||
                             cfg.bench.adapter.rfind("https://", 0) == 0)
                        adapter = bench::make_http_adapter(cfg.bench.adapter);
                    else
                        adapter = bench::make_command_adapter(cfg.bench.adapter);
                    bench::RunConfig rcfg;
                    rcfg.metered_backend = rt.backend.get();
                    auto run = bench::run_adapter(session, *adapter, rcfg);
                    auto score = bench::judge_offline(session, run);
                    results[uid] = Json{{"adapter", adapter->name()},
                                        {"score", score.to_json()},
                                        {"cost", run.ledger.to_json()}};
                }
                write_json(run_dir / "bench" / "results.json", results);
                return std::vector<std::string>{"bench/results.json"};
            });
        if (!ok) return 3;
    }

    log << "pipeline complete: " << run_dir.string() << "\n";
    return 0;
}

std::string report(const fs::path& run_dir) {
    std::ostringstream os;
    os << "Run summary: " << run_dir.string() << "\n";
    if (!fs::exists(run_dir / "config.json")) {
        os << "  (no config.json found)\n";
        return os.str();
    }
    Json cfg = read_json(run_dir / "config.json");
    os << "  users: " << cfg.value("users", 0) << ", window: " << cfg.value("year", 0) << "-"
       << std::setw(2) << std::setfill('0') << cfg.value("start_month", 1) << " x "
       << cfg.value("months", 0) << " month(s), backend: "
       << cfg.value("backend", std::string{}) << "\n";

    int users = cfg.value("users", 0);
    for (int i = 0; i < users; ++i) {
        std::string uid = user_label(i);
        os << "  [" << uid << "]\n";
        fs::path events_file = run_dir / "events" / uid / "events.json";
        if (fs::exists(events_file)) {
            Json events = read_json(events_file);
            std::map<Day, int> per_day;
            for (const auto& e : events) {
                auto iv = parse_interval(e["date"][0].get<std::string>());
                if (iv) ++per_day[day_of(iv->first)];
            }
            std::vector<int> counts;
            for (const auto& [d, n] : per_day) counts.push_back(n);
            std::sort(counts.begin(), counts.end());
            double mean = 0;
            for (int n : counts) mean += n;
            if (!counts.empty()) mean /= counts.size();
            os << "    events: " << events.size() << " (per day: mean " << std::fixed
               << std::setprecision(1) << mean << ", median "
               << (counts.empty() ? 0 : counts[counts.size() / 2]) << ")\n";
        } else {
            os << "    events: stage not run\n";
        }
        fs::path art_dir = run_dir / "artifacts" / uid;
        if (fs::exists(art_dir)) {
            os << "    artifacts:";
            for (const char* kind : {"contacts", "calls", "sms", "calendar", "agent_chat",
                                     "photo", "note", "push"}) {
                fs::path f = art_dir / (std::string(kind) + ".json");
                os << " " << kind << " " << (fs::exists(f) ? read_json(f).size() : 0);
            }
            fs::path hf = art_dir / "health.json";
            os << ", health " << (fs::exists(hf) ? read_json(hf).size() : 0);
            fs::path sf = art_dir / "summaries.json";
            os << ", summaries " << (fs::exists(sf) ? read_json(sf).size() : 0) << "\n";
        } else {
            os << "    artifacts: stage not run\n";
        }
        fs::path qa_file = run_dir / "qa" / uid / "qa.json";
        if (fs::exists(qa_file)) {
            Json qa_items = read_json(qa_file);
            std::map<std::string, int> by_cat;
            for (const auto& q : qa_items) ++by_cat[q.value("question_type", std::string{})];
            os << "    qa: " << qa_items.size() << " (";
            bool first = true;
            for (const auto& [cat, n] : by_cat) {
                if (!first) os << ", ";
                os << cat << " " << n;
                first = false;
            }
            os << ")\n";
        } else {
            os << "    qa: stage not run\n";
        }
    }
    fs::path qf = run_dir / "quality" / "report.json";
    if (fs::exists(qf)) {
        Json q = read_json(qf);
        for (auto it = q.begin(); it != q.end(); ++it) {
            const Json& r = it.value();
            os << "  quality[" << it.key() << "]: acc_person " << std::setprecision(3)
               << r.value("acc_person", 0.0) << ", acc_location "
               << r.value("acc_location", 0.0) << ", acc_trip " << r.value("acc_trip", 0.0)
               << ", h_norm " << r.value("h_norm", 0.0) << ", simpson "
               << r.value("simpson", 0.0) << "\n";
        }
    } else {
        os << "  quality: stage not run\n";
    }
    fs::path bf = run_dir / "bench" / "results.json";
    if (fs::exists(bf)) {
        Json b = read_json(bf);
        for (auto it = b.begin(); it != b.end(); ++it)
            os << "  bench[" << it.key() << "]: adapter "
               << it.value().value("adapter", std::string{}) << ", overall "
               << it.value()["score"].value("overall", 0.0) << "\n";
    }
    return os.str();
}

}  // namespace lifeforge::pipeline
