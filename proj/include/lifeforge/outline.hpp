#pragma once
// Hierarchical outline planning: plot selection, month-by-month thematic
// event generation, work-stack parallel decomposition down to atomic events,
// and two-week-window atomic optimization.

#include <cstdint>
#include <string>
#include <vector>

#include "lifeforge/geo.hpp"
#include "lifeforge/textgen.hpp"
#include "lifeforge/types.hpp"

namespace lifeforge::outline {

struct DecompositionConfig {
    int64_t tau_seconds = kSecondsPerDay;  // atomic threshold: < 1 day
    int max_workers = 1;
    int max_children = 5;
    int max_depth = 6;  // deeper nodes are forced atomic
};

struct ContextFactors {
    Day date = 0;
    std::string weather;  // sunny | cloudy | rainy
    std::string mood;     // low | neutral | high
    std::string stress;   // low | medium | high
    std::vector<std::string> habits_active;
};

Json to_json(const ContextFactors& c);
ContextFactors context_from_json(const Json& j);

// Seeded per-user Markov chain over calendar days; generated once up front so
// slice-parallel stages read identical context regardless of scheduling.
std::vector<ContextFactors> generate_context_series(const Persona& p, Day start, Day end,
                                                    uint64_t seed);

std::vector<Plot> load_plot_db(const std::filesystem::path& path);

// Priority-and-affinity weighted sampling without replacement, at most
// max_plots; zero-priority plots are never drawn. Same-month core-event
// collisions between selected plots drop the lower-priority plot.
std::vector<Plot> select_plots(const Persona& p, const std::vector<Plot>& plotdb,
                               size_t max_plots, uint64_t seed);

// Chronological year outline merged from the selected plots.
Json merge_outline(gen::GenBackend& backend, const Persona& p, const std::vector<Plot>& plots,
                   int year, uint64_t seed);

struct ThematicConfig {
    int year = 2025;
    int target_per_month = 23;
    uint64_t seed = 0;
    std::string user_id;
};

// Autoregressive month step: consumes the outline month, the previous month's
// summary and the month's holidays. next_ordinal numbers events globally.
std::vector<EventNode> generate_thematic_events(gen::GenBackend& backend, const Json& outline,
                                                const Persona& p,
                                                const std::vector<AnchorLocation>& anchors,
                                                const geo::HolidayCalendar& holidays, int month,
                                                const std::string& prev_summary,
                                                const ThematicConfig& cfg, int& next_ordinal);

std::string summarize_month_events(const std::vector<EventNode>& events);

struct DecompReport {
    std::vector<std::string> failed_nodes;
    int forced_atomic = 0;
    int decompose_calls = 0;
    int nodes_marked_splittable = 0;
};

// Work-stack decomposition: every batch is the full stack snapshot, node
// seeds derive from event ids, so output is identical for any worker count.
DecompReport decompose_parallel(std::vector<EventNode>& roots, gen::GenBackend& backend,
                                const DecompositionConfig& cfg, const Persona& p,
                                uint64_t seed);

struct WindowDelta {
    std::vector<EventNode> insertions;        // routine atomics, new roots
    std::vector<std::string> cancellations;   // event ids removed
};

WindowDelta optimize_atomic_window(const std::vector<EventNode>& roots, Day window_start,
                                   Day window_end,
                                   const std::vector<ContextFactors>& context,
                                   const Persona& p, const std::string& home_anchor,
                                   gen::GenBackend& backend, uint64_t seed,
                                   int& next_ordinal);

void apply_window_delta(std::vector<EventNode>& roots, const WindowDelta& delta);

// All leaves, sorted by (start, event_id).
std::vector<EventNode> collect_atomic_events(const std::vector<EventNode>& roots);

Json forest_to_json(const std::vector<EventNode>& roots);
std::vector<EventNode> forest_from_json(const Json& j);

}  // namespace lifeforge::outline
