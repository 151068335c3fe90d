#pragma once
// End-to-end orchestration: persona -> plan -> simulate -> artifacts -> qa ->
// quality -> sessions (-> bench), with per-stage manifests and resumability.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "lifeforge/artifacts.hpp"
#include "lifeforge/bench.hpp"
#include "lifeforge/dailysim.hpp"
#include "lifeforge/geo.hpp"
#include "lifeforge/outline.hpp"
#include "lifeforge/persona.hpp"
#include "lifeforge/qagen.hpp"
#include "lifeforge/quality.hpp"
#include "lifeforge/textgen.hpp"

namespace lifeforge::pipeline {

struct PipelineConfig {
    int users = 1;
    uint64_t seed = 42;
    int year = 2025;
    int start_month = 1;
    int months = 1;
    std::string backend = "template";  // template | remote
    std::string geo = "stub";          // stub | live
    std::string region = "hong_kong";
    std::string timezone = "Asia/Hong_Kong";  // holiday lookup only
    int workers = 4;
    std::filesystem::path data_dir = "data";

    struct Llm {
        std::string url;
        std::string model = "deepseek-r1";
        double temperature = 0.7;
        int latency_ms = 0;  // synthetic per-call latency
    } llm;

    struct Outline {
        std::string plots_file;  // default: <data_dir>/plots.json
        int tau_hours = 24;
        int max_children = 5;
        int max_depth = 6;
        int max_plots = 10;
        int thematic_per_month = 23;
    } outline;

    struct Sim {
        int slice_days = 14;
        int refine_rounds = 3;
        int short_term_days = 7;
        int episodic_k = 3;
        int supplementary_gap_min = 120;
        int density_target = 14;
    } sim;

    struct Artifacts {
        std::string rates_file;          // default: <data_dir>/rates.json
        std::string health_coeffs_file;  // default: <data_dir>/health_coeffs.json
        bool noise_enabled = true;
    } artifacts;

    struct Qa {
        std::string mix_file;  // default: <data_dir>/qa_mix.json
        double per_day = 2.0;
    } qa;

    struct Bench {
        bool enabled = false;
        std::string adapter = "fullcontext";  // builtin name, cmd:..., or http://...
        std::string judge = "offline";
    } bench;

    static PipelineConfig from_json(const Json& j);
    static PipelineConfig load(const std::filesystem::path& path);
    Json to_json() const;
    // Nonempty = human-readable validation problems.
    std::vector<std::string> validate() const;

    Day start_day() const { return days_from_civil(year, start_month, 1); }
    Day end_day() const;
};

// Shared service bundle built once from config.
struct Runtime {
    std::unique_ptr<gen::GenBackend> backend;
    std::unique_ptr<gen::Embedder> embedder;
    std::unique_ptr<geo::GeoProvider> geo_provider;
    std::unique_ptr<geo::StubGeoProvider> venue_lookup;  // fixture metadata (stub mode)

    static Runtime build(const PipelineConfig& cfg);
};

// Flat event export: one published event per daily activity, globally
// numbered in chronological order.
struct EventExport {
    std::vector<EventNode> events;
    std::map<std::string, std::string> activity_to_event;  // activity_id -> event_id
};
EventExport export_events(const std::vector<DailyActivity>& activities,
                          const std::vector<EventNode>& roots);

uint64_t hash_file(const std::filesystem::path& p);
std::string hash_hex(uint64_t h);
void write_text(const std::filesystem::path& p, const std::string& text);
void write_json(const std::filesystem::path& p, const Json& j);
Json read_json(const std::filesystem::path& p);

// Returns 0 on success, 3 on stage failure. Stage boundaries and manifests
// land in run_dir/manifest.json; unchanged stages are skipped on resume.
// assume_fresh marks stages whose outputs were supplied externally;
// run_until stops after the named stage (empty = run everything).
int run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& run_dir,
                 std::ostream& log, const std::set<std::string>& assume_fresh = {},
                 const std::string& run_until = {});

// Human-readable run summary (counts, quality, bench when present).
std::string report(const std::filesystem::path& run_dir);

}  // namespace lifeforge::pipeline
