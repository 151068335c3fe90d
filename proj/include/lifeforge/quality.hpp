#pragma once
// Automated data-quality metrics: relation consistency, location and trip
// authenticity, and event diversity, with a time-indexed issue log.

#include <string>
#include <vector>

#include "lifeforge/geo.hpp"
#include "lifeforge/types.hpp"

namespace lifeforge::quality {

struct MetricCount {
    int evaluated = 0;
    int passed = 0;
    int unevaluated = 0;  // provider failures, excluded from the denominator
};

struct IssueEntry {
    std::string time;  // timestamp of the offending event
    std::string metric;
    std::string detail;
};

struct QualityReport {
    double acc_person = 0.0;
    double acc_location = 0.0;
    double acc_trip = 0.0;
    double h_norm = 0.0;
    double simpson = 0.0;
    MetricCount person, location, trip;
    std::vector<IssueEntry> issues;

    Json to_json() const;
};

// ---------------------------------------------------------------- diversity

struct DiversityResult {
    double h_norm = 0.0;
    double simpson = 0.0;
    int k = 0;
};

// Shannon entropy (any log base; the ratio H/log K cancels it) and Simpson
// index from category counts. K = 1 and the uniform case are exact.
DiversityResult diversity_from_counts(const std::vector<int64_t>& counts);

// ------------------------------------------------------------------ metrics

double relation_consistency(const std::vector<EventNode>& events, const Persona& persona,
                            MetricCount& count, std::vector<IssueEntry>& issues);

double location_authenticity(const std::vector<EventNode>& events, geo::GeoProvider& geo,
                             const std::string& city, MetricCount& count,
                             std::vector<IssueEntry>& issues);

// The bare tolerance rule: authentic iff |syn - ref| <= max(0.2*ref, 30 min),
// or the narrative carries a recognized explanation.
bool trip_authentic(double t_syn_min, double t_ref_min, bool has_explanation);
bool has_trip_explanation(const std::string& narrative);

double trip_authenticity(const std::vector<EventNode>& events, geo::GeoProvider& geo,
                         const std::string& city, MetricCount& count,
                         std::vector<IssueEntry>& issues);

DiversityResult diversity(const std::vector<EventNode>& events);

QualityReport evaluate(const std::vector<EventNode>& events, const Persona& persona,
                       geo::GeoProvider& geo, const std::string& city);

}  // namespace lifeforge::quality
