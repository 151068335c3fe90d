#pragma once
// Dual-agent daily simulation: a subjective agent proposes day plans from
// atomic events + three-part memory; an objective agent enforces physical,
// temporal and factual constraints; slices of days run in parallel.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lifeforge/geo.hpp"
#include "lifeforge/outline.hpp"
#include "lifeforge/textgen.hpp"
#include "lifeforge/types.hpp"

namespace lifeforge::sim {

struct AgentMemory {
    std::vector<std::string> long_term;       // prev + running current month summaries
    std::vector<DailyActivity> short_term;    // trailing 7 simulated days within the slice
    std::vector<std::string> episodic;        // top-3 retrieved activity texts
    std::vector<std::string> atomic_supplement;  // slice-start stand-in for history
};

enum class FindingKind {
    time_conflict,
    travel_infeasible,
    venue_unavailable,
    fact_inconsistent,
    supplementary_slot
};

std::string to_string(FindingKind k);

struct ObjectiveFinding {
    FindingKind kind;
    std::string detail;
    int slot_ref = -1;  // index into DayPlan.slots
    std::optional<geo::RouteEstimate> route;  // set for travel_infeasible
    Json extra;  // finding-specific payload consumed by the refiner
};

struct DayPlan {
    Day date = 0;
    std::vector<DailyActivity> slots;
    std::vector<ObjectiveFinding> feedback;
    int revision = 0;
};

// Append-only (entity, attribute) -> value store. Seeded from the persona's
// relation dictionary, extended from observed activities within a slice.
class FactIndex {
public:
    void seed_from(const Persona& p);
    void observe(const DailyActivity& a);
    std::optional<std::string> get(const std::string& entity,
                                   const std::string& attribute) const;

private:
    std::map<std::pair<std::string, std::string>, std::string> facts_;
};

struct SimConfig {
    int slice_days = 14;
    int refine_rounds = 3;
    int short_term_days = 7;
    int episodic_k = 3;
    int supplementary_gap_min = 120;
    int density_target = 14;  // supplementary findings stop at this per-day count
    int workers = 1;
    uint64_t seed = 0;
    std::string user_id = "user_0000";
    std::string city = "Hong Kong";  // gazetteer scope for venue/travel lookups
    std::string home_anchor = "Home";  // location for supplementary fills
};

struct SimResult {
    std::vector<DailyActivity> activities;       // sorted by (date, start)
    std::vector<Json> memory_snapshots;          // one per simulated day
    std::vector<std::string> report;             // drops, warnings, slice failures
};

// Pure retrieval helper (argmax-k by cosine; ties -> most recent index wins).
std::vector<size_t> retrieve_episodic(gen::Embedder& embedder, const std::string& query,
                                      const std::vector<std::string>& texts, size_t k);

class DailySimulator {
public:
    DailySimulator(gen::GenBackend& backend, gen::Embedder& embedder, geo::GeoProvider& geo,
                   const geo::StubGeoProvider* venue_lookup, SimConfig cfg);

    DayPlan propose_day(const std::vector<EventNode>& day_atomics, const Persona& p,
                        const AgentMemory& mem, const outline::ContextFactors& ctx, Day date);

    std::vector<ObjectiveFinding> review_day(const DayPlan& plan, const FactIndex& facts,
                                             std::vector<std::string>* warnings = nullptr);

    DayPlan refine_day(const DayPlan& plan, const std::vector<ObjectiveFinding>& findings,
                       const Persona& p, const AgentMemory& mem);

    // Two-week time slices in parallel, day-by-day autoregression inside.
    SimResult simulate_slices(const std::vector<EventNode>& roots, const Persona& p,
                              const std::vector<AnchorLocation>& anchors,
                              const std::vector<outline::ContextFactors>& context, Day start,
                              Day end);

private:
    gen::GenBackend& backend_;
    gen::Embedder& embedder_;
    geo::GeoProvider& geo_;
    const geo::StubGeoProvider* venues_;
    SimConfig cfg_;

    std::optional<std::pair<double, double>> lonlat_of(const std::string& place,
                                                       const std::string& city);
};

}  // namespace lifeforge::sim
