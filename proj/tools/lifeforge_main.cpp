// lifeforge CLI: persona | plan | simulate | artifacts | qa | quality |
// export | bench | run | report. Stage subcommands operate on a run
// directory and resume the pipeline up to their stage; `run` executes the
// whole thing. Exit codes: 0 success, 2 validation failure, 3 stage failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "lifeforge/pipeline.hpp"
#include "lifeforge/validate.hpp"

namespace fs = std::filesystem;
using namespace lifeforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitStage = 3;

int guarded(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
}

pipeline::PipelineConfig load_or_default(const fs::path& run_dir) {
    if (fs::exists(run_dir / "config.json"))
        return pipeline::PipelineConfig::from_json(pipeline::read_json(run_dir / "config.json"));
    return {};
}

int resume_until(pipeline::PipelineConfig cfg, const fs::path& run_dir,
                 const std::set<std::string>& fresh, const std::string& until) {
    auto problems = cfg.validate();
    if (!problems.empty()) {
        for (const auto& p : problems) std::cerr << "config: " << p << "\n";
        return kExitValidation;
    }
    return pipeline::run_pipeline(cfg, run_dir, std::cout, fresh, until) == 0 ? kExitOk
                                                                              : kExitStage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lifeforge: synthetic life-trajectory generation and benchmarking"};
    app.require_subcommand(1);

    uint64_t seed = 42;
    int workers = 4;
    std::string backend = "template", geo = "stub", data_dir = "data";
    bool seed_set = false, workers_set = false;
    app.add_option_function<uint64_t>(
           "--seed", [&](uint64_t v) { seed = v; seed_set = true; }, "Global seed")
        ->default_str("42");
    app.add_option_function<int>(
           "--workers", [&](int v) { workers = v; workers_set = true; }, "Worker threads")
        ->default_str("4");
    app.add_option("--backend", backend, "template|remote")->capture_default_str();
    app.add_option("--geo", geo, "stub|live")->capture_default_str();
    app.add_option("--data-dir", data_dir, "Fixture data directory")->capture_default_str();

    auto apply_globals = [&](pipeline::PipelineConfig& cfg, bool fresh_config) {
        if (seed_set || fresh_config) cfg.seed = seed;
        if (workers_set || fresh_config) cfg.workers = workers;
        if (fresh_config) {
            cfg.backend = backend;
            cfg.geo = geo;
            cfg.data_dir = data_dir;
        }
    };

    // ------------------------------------------------------------- persona
    auto* persona_cmd = app.add_subcommand("persona", "Generate personas");
    int persona_count = 1;
    std::string priors_file, persona_out;
    persona_cmd->add_option("--count", persona_count, "Number of personas");
    persona_cmd->add_option("--priors", priors_file, "Prior tables JSON");
    persona_cmd->add_option("--out", persona_out, "Output directory")->required();

    // ---------------------------------------------------------------- plan
    auto* plan_cmd = app.add_subcommand("plan", "Hierarchical outline planning");
    std::string plan_persona, plan_plots, plan_out;
    int plan_year = 2025, plan_months = 1, plan_start_month = 1;
    plan_cmd->add_option("--persona", plan_persona,
                         "Directory with persona.json and anchors.json (from `persona`)");
    plan_cmd->add_option("--plots", plan_plots, "Plot database JSON");
    plan_cmd->add_option("--year", plan_year, "Simulation year");
    plan_cmd->add_option("--months", plan_months, "Months to plan");
    plan_cmd->add_option("--start-month", plan_start_month, "First month (1-12)");
    plan_cmd->add_option("--out", plan_out, "Run directory")->required();

    // ------------------------------------------------------------ simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Dual-agent daily simulation");
    std::string sim_plan;
    sim_cmd->add_option("--plan", sim_plan, "Run directory containing plan/ outputs")
        ->required();

    // ----------------------------------------------------------- artifacts
    auto* art_cmd = app.add_subcommand("artifacts", "Phone/health artifact generation");
    std::string art_sim, art_rates;
    art_cmd->add_option("--sim", art_sim, "Run directory containing sim/ outputs")->required();
    art_cmd->add_option("--rates", art_rates, "Rate table JSON");

    // ------------------------------------------------------------------ qa
    auto* qa_cmd = app.add_subcommand("qa", "QA generation");
    std::string qa_run, qa_mix;
    qa_cmd->add_option("--sim", qa_run, "Run directory containing artifacts/ outputs")
        ->required();
    qa_cmd->add_option("--mix", qa_mix, "Category mix JSON");

    // ------------------------------------------------------------- quality
    auto* quality_cmd = app.add_subcommand("quality", "Data-quality evaluation");
    std::string quality_data, quality_out = "report.json";
    quality_cmd->add_option("--data", quality_data, "Run directory")->required();
    quality_cmd->add_option("--out", quality_out, "Report copy destination");

    // -------------------------------------------------------------- export
    auto* export_cmd = app.add_subcommand("export", "Conversational session export");
    std::string export_run, export_out;
    export_cmd->add_option("--run", export_run, "Run directory")->required();
    export_cmd->add_option("--out", export_out, "Copy sessions to this directory");

    // --------------------------------------------------------------- bench
    auto* bench_cmd = app.add_subcommand("bench", "Memory-system benchmark");
    std::string bench_sessions, bench_adapter = "fullcontext", bench_judge = "offline";
    std::string bench_out = "results.json";
    bench_cmd->add_option("--sessions", bench_sessions, "Sessions directory")->required();
    bench_cmd->add_option("--adapter", bench_adapter,
                          "fullcontext|echo_not_in_memory|mute|CMD|URL");
    bench_cmd->add_option("--judge", bench_judge, "offline|URL");
    bench_cmd->add_option("--out", bench_out, "Results path");

    // ----------------------------------------------------------------- run
    auto* run_cmd = app.add_subcommand("run", "Full pipeline with manifests");
    std::string run_config, run_out;
    run_cmd->add_option("--config", run_config, "Pipeline config JSON");
    run_cmd->add_option("--out", run_out, "Run directory")->required();
    int run_users = -1, run_months = -1;
    run_cmd->add_option("--users", run_users, "Override user count");
    run_cmd->add_option("--months", run_months, "Override month count");
    bool run_bench = false;
    run_cmd->add_flag("--with-bench", run_bench, "Enable the bench stage");

    // -------------------------------------------------------------- report
    auto* report_cmd = app.add_subcommand("report", "Summarize a run directory");
    std::string report_dir;
    report_cmd->add_option("dir", report_dir, "Run directory")->required();

    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    if (*persona_cmd) {
        return guarded([&] {
            pipeline::PipelineConfig cfg;
            apply_globals(cfg, true);
            persona::PriorTables priors = persona::PriorTables::load(
                priors_file.empty() ? cfg.data_dir / "priors.json" : fs::path(priors_file));
            auto denylist = persona::load_denylist(cfg.data_dir / "denylist.txt");
            auto rt = pipeline::Runtime::build(cfg);
            persona::SynthConfig scfg;
            scfg.epoch_year = cfg.year;
            scfg.workers = cfg.workers;
            persona::PersonaSynthesizer synth(*rt.backend, priors, denylist, scfg);
            for (int i = 0; i < persona_count; ++i) {
                char uid[16];
                std::snprintf(uid, sizeof(uid), "user_%04d", i);
                Persona p = synth.sample_base_persona(uid, cfg.seed);
                synth.build_social_network(p, uid, cfg.seed);
                auto anchors = synth.anchor_urban_landscape(p, *rt.geo_provider, uid, cfg.seed);
                pipeline::write_json(fs::path(persona_out) / uid / "persona.json", to_json(p));
                Json aj = Json::array();
                for (const auto& a : anchors.anchors) aj.push_back(to_json(a));
                pipeline::write_json(fs::path(persona_out) / uid / "anchors.json", aj);
                std::cout << uid << ": " << p.name << ", " << p.job << ", "
                          << p.all_relations().size() << " relations, "
                          << anchors.anchors.size() << " anchors\n";
            }
            return kExitOk;
        });
    }

    if (*plan_cmd) {
        return guarded([&] {
            pipeline::PipelineConfig cfg = load_or_default(plan_out);
            apply_globals(cfg, !fs::exists(fs::path(plan_out) / "config.json"));
            cfg.year = plan_year;
            cfg.months = plan_months;
            cfg.start_month = plan_start_month;
            if (!plan_plots.empty()) cfg.outline.plots_file = plan_plots;
            std::set<std::string> fresh;
            if (!plan_persona.empty()) {
                fs::create_directories(fs::path(plan_out) / "persona" / "user_0000");
                for (const char* f : {"persona.json", "anchors.json"})
                    fs::copy_file(fs::path(plan_persona) / f,
                                  fs::path(plan_out) / "persona" / "user_0000" / f,
                                  fs::copy_options::overwrite_existing);
                fresh.insert("persona");
            }
            return resume_until(cfg, plan_out, fresh, "plan");
        });
    }

    if (*sim_cmd)
        return guarded([&] {
            auto cfg = load_or_default(sim_plan);
            apply_globals(cfg, false);
            return resume_until(cfg, sim_plan, {}, "simulate");
        });

    if (*art_cmd)
        return guarded([&] {
            auto cfg = load_or_default(art_sim);
            apply_globals(cfg, false);
            if (!art_rates.empty()) cfg.artifacts.rates_file = art_rates;
            return resume_until(cfg, art_sim, {}, "artifacts");
        });

    if (*qa_cmd)
        return guarded([&] {
            auto cfg = load_or_default(qa_run);
            apply_globals(cfg, false);
            if (!qa_mix.empty()) cfg.qa.mix_file = qa_mix;
            return resume_until(cfg, qa_run, {}, "qa");
        });

    if (*quality_cmd)
        return guarded([&] {
            auto cfg = load_or_default(quality_data);
            apply_globals(cfg, false);
            int rc = resume_until(cfg, quality_data, {}, "quality");
            if (rc != kExitOk) return rc;
            if (!quality_out.empty()) {
                fs::copy_file(fs::path(quality_data) / "quality" / "report.json", quality_out,
                              fs::copy_options::overwrite_existing);
                std::cout << "quality report written to " << quality_out << "\n";
            }
            return kExitOk;
        });

    if (*export_cmd)
        return guarded([&] {
            auto cfg = load_or_default(export_run);
            apply_globals(cfg, false);
            int rc = resume_until(cfg, export_run, {}, "sessions");
            if (rc != kExitOk) return rc;
            if (!export_out.empty()) {
                fs::create_directories(export_out);
                for (const auto& entry :
                     fs::directory_iterator(fs::path(export_run) / "sessions")) {
                    fs::create_directories(fs::path(export_out) / entry.path().filename());
                    fs::copy_file(
                        entry.path() / "session.json",
                        fs::path(export_out) / entry.path().filename() / "session.json",
                        fs::copy_options::overwrite_existing);
                }
                std::cout << "sessions exported to " << export_out << "\n";
            }
            return kExitOk;
        });

    if (*bench_cmd) {
        return guarded([&] {
            pipeline::PipelineConfig cfg;
            apply_globals(cfg, true);
            auto rt = pipeline::Runtime::build(cfg);
            auto make_adapter = [&]() -> std::unique_ptr<bench::Adapter> {
                if (bench_adapter == "fullcontext")
                    return bench::make_fullcontext_adapter(*rt.backend);
                if (bench_adapter == "echo_not_in_memory") return bench::make_echo_adapter();
                if (bench_adapter == "mute") return bench::make_mute_adapter();
                if (bench_adapter.rfind("http://", 0) == 0 ||
                    bench_adapter.rfind("https://", 0) == 0)
                    return bench::make_http_adapter(bench_adapter);
                return bench::make_command_adapter(bench_adapter);
            };
            Json results;
            for (const auto& entry : fs::directory_iterator(bench_sessions)) {
                fs::path sf =
                    entry.is_directory() ? entry.path() / "session.json" : entry.path();
                if (!fs::exists(sf) || sf.extension() != ".json") continue;
                auto session = bench::session_from_json(pipeline::read_json(sf));
                auto adapter = make_adapter();
                bench::RunConfig rcfg;
                rcfg.metered_backend = rt.backend.get();
                auto run = bench::run_adapter(session, *adapter, rcfg);
                bench::BenchScore score;
                if (bench_judge == "offline") {
                    score = bench::judge_offline(session, run);
                } else {
                    gen::RemoteConfig jc = gen::remote_config_from_env();
                    jc.url = bench_judge;
                    auto judge_backend = gen::make_remote_backend(jc);
                    score = bench::judge_remote(session, run, *judge_backend);
                }
                results[session.user_id] = Json{{"adapter", adapter->name()},
                                                {"score", score.to_json()},
                                                {"cost", run.ledger.to_json()}};
                std::cout << session.user_id << ": overall " << score.overall << " over "
                          << score.verdicts.size() << " questions\n";
            }
            pipeline::write_json(bench_out, results);
            return kExitOk;
        });
    }

    if (*run_cmd) {
        return guarded([&] {
            pipeline::PipelineConfig cfg;
            if (!run_config.empty()) {
                cfg = pipeline::PipelineConfig::load(run_config);
                apply_globals(cfg, false);
            } else {
                cfg = load_or_default(run_out);
                apply_globals(cfg, !fs::exists(fs::path(run_out) / "config.json"));
            }
            if (run_users > 0) cfg.users = run_users;
            if (run_months > 0) cfg.months = run_months;
            if (run_bench) cfg.bench.enabled = true;
            return resume_until(cfg, run_out, {}, "");
        });
    }

    if (*report_cmd)
        return guarded([&] {
            std::cout << pipeline::report(report_dir);
            return kExitOk;
        });

    return kExitOk;
}
