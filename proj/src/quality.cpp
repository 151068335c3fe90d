#include "lifeforge/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace lifeforge::quality {

namespace {

std::string to_lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// "Study at Home, Kowloon City Plaza, ..." -> "Study at Home"
std::string location_head(const std::string& location) {
    auto comma = location.find(',');
    return comma == std::string::npos ? location : location.substr(0, comma);
}

}  // namespace

Json QualityReport::to_json() const {
    auto count_json = [](const MetricCount& c) {
        return Json{{"evaluated", c.evaluated},
                    {"passed", c.passed},
                    {"unevaluated", c.unevaluated}};
    };
    auto incl_unevaluated = [](const MetricCount& c) {
        int denom = c.evaluated + c.unevaluated;
        return denom > 0 ? static_cast<double>(c.passed) / denom : 0.0;
    };
    Json j;
    j["acc_person"] = acc_person;
    j["acc_location"] = acc_location;
    j["acc_trip"] = acc_trip;
    j["h_norm"] = h_norm;
    j["simpson"] = simpson;
    j["counts"] = Json{{"person", count_json(person)},
                       {"location", count_json(location)},
                       {"trip", count_json(trip)}};
    // Alternative basis: unevaluated entries folded into the denominator.
    j["acc_incl_unevaluated"] = Json{{"person", incl_unevaluated(person)},
                                     {"location", incl_unevaluated(location)},
                                     {"trip", incl_unevaluated(trip)}};
    Json issue_arr = Json::array();
    for (const auto& i : issues)
        issue_arr.push_back(Json{{"time", i.time}, {"metric", i.metric}, {"detail", i.detail}});
    j["issues"] = issue_arr;
    return j;
}

DiversityResult diversity_from_counts(const std::vector<int64_t>& counts) {
    DiversityResult r;
    std::vector<int64_t> positive;
    for (int64_t c : counts)
        if (c > 0) positive.push_back(c);
    r.k = static_cast<int>(positive.size());
    if (r.k == 0) return r;
    if (r.k == 1) {
        // log K = 0 is guarded: a single category has zero diversity.
        r.h_norm = 0.0;
        r.simpson = 0.0;
        return r;
    }
    int64_t total = 0, sum_sq = 0;
    bool uniform = true;
    for (int64_t c : positive) {
        total += c;
        sum_sq += c * c;
        uniform &= c == positive.front();
    }
    // Simpson via the exact integer ratio; the uniform case lands on 1 - 1/K
    // to the last bit.
    r.simpson = 1.0 - static_cast<double>(sum_sq) /
                          (static_cast<double>(total) * static_cast<double>(total));
    if (uniform) {
        r.h_norm = 1.0;
        return r;
    }
    double h = 0.0;
    for (int64_t c : positive) {
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    r.h_norm = h / std::log(static_cast<double>(r.k));
    return r;
}

double relation_consistency(const std::vector<EventNode>& events, const Persona& persona,
                            MetricCount& count, std::vector<IssueEntry>& issues) {
    std::set<std::string> known{persona.name};
    for (const auto* r : persona.all_relations()) known.insert(r->name);

    for (const auto& e : events) {
        for (const auto& part : e.participant) {
            if (part.name.empty()) continue;
            ++count.evaluated;
            if (known.count(part.name)) {
                ++count.passed;
            } else {
                issues.push_back({e.date.empty() ? "" : format_timestamp(e.span().start),
                                  "relation_consistency",
                                  "\"" + part.name + "\" in \"" + e.name +
                                      "\" is not in the relation dictionary"});
            }
        }
    }
    return count.evaluated > 0 ? static_cast<double>(count.passed) / count.evaluated : 1.0;
}

double location_authenticity(const std::vector<EventNode>& events, geo::GeoProvider& geo,
                             const std::string& city, MetricCount& count,
                             std::vector<IssueEntry>& issues) {
    for (const auto& e : events) {
        std::string head = location_head(e.location);
        if (head.empty()) continue;
        try {
            auto res = geo.verify_place(head, city);
            ++count.evaluated;
            if (res.verified) {
                ++count.passed;
            } else {
                issues.push_back({e.date.empty() ? "" : format_timestamp(e.span().start),
                                  "location_authenticity",
                                  "\"" + head + "\" could not be verified"});
            }
        } catch (const geo::GeoError& err) {
            ++count.unevaluated;
            issues.push_back({e.date.empty() ? "" : format_timestamp(e.span().start),
                              "location_authenticity",
                              std::string("unevaluated: ") + err.what()});
        }
    }
    return count.evaluated > 0 ? static_cast<double>(count.passed) / count.evaluated : 1.0;
}

bool has_trip_explanation(const std::string& narrative) {
    static const char* kTags[] = {"traffic congestion", "weather delay", "detour", "waiting"};
    std::string low = to_lower(narrative);
    for (const char* tag : kTags)
        if (low.find(tag) != std::string::npos) return true;
    return false;
}

bool trip_authentic(double t_syn_min, double t_ref_min, bool has_explanation) {
    if (std::abs(t_syn_min - t_ref_min) <= std::max(0.2 * t_ref_min, 30.0)) return true;
    return has_explanation;
}

double trip_authenticity(const std::vector<EventNode>& events, geo::GeoProvider& geo,
                         const std::string& city, MetricCount& count,
                         std::vector<IssueEntry>& issues) {
    // Trips are explicit travel events; origin is the previous located event.
    std::vector<const EventNode*> ordered;
    for (const auto& e : events)
        if (!e.date.empty()) ordered.push_back(&e);
    std::sort(ordered.begin(), ordered.end(), [](const EventNode* a, const EventNode* b) {
        return a->span().start < b->span().start;
    });

    std::string prev_location;
    for (const auto* e : ordered) {
        std::string head = location_head(e->location);
        if (e->name.rfind("Travel to", 0) != 0) {
            if (!head.empty()) prev_location = head;
            continue;
        }
        std::string dest = head;
        if (prev_location.empty() || dest.empty() || prev_location == dest) continue;
        double t_syn = static_cast<double>(e->duration()) / 60.0;
        try {
            auto from = geo.verify_place(prev_location, city);
            auto to = geo.verify_place(dest, city);
            if (!from.verified || !to.verified) {
                ++count.unevaluated;
                issues.push_back({format_timestamp(e->span().start), "trip_authenticity",
                                  "unroutable pair " + prev_location + " -> " + dest});
                continue;
            }
            auto route = geo.estimate_route(from.results[0].lon, from.results[0].lat,
                                            to.results[0].lon, to.results[0].lat,
                                            geo::TravelMode::transit);
            ++count.evaluated;
            bool explained = has_trip_explanation(e->description);
            if (trip_authentic(t_syn, route.duration_min, explained)) {
                ++count.passed;
            } else {
                issues.push_back({format_timestamp(e->span().start), "trip_authenticity",
                                  "narrated " + std::to_string(t_syn) + " min vs reference " +
                                      std::to_string(route.duration_min) + " min"});
            }
        } catch (const geo::GeoError& err) {
            ++count.unevaluated;
            issues.push_back({format_timestamp(e->span().start), "trip_authenticity",
                              std::string("unevaluated: ") + err.what()});
        }
        prev_location = dest;
    }
    return count.evaluated > 0 ? static_cast<double>(count.passed) / count.evaluated : 1.0;
}

DiversityResult diversity(const std::vector<EventNode>& events) {
    std::map<std::string, int64_t> by_type;
    for (const auto& e : events) ++by_type[e.type.empty() ? "(untyped)" : e.type];
    std::vector<int64_t> counts;
    for (const auto& [k, v] : by_type) counts.push_back(v);
    return diversity_from_counts(counts);
}

QualityReport evaluate(const std::vector<EventNode>& events, const Persona& persona,
                       geo::GeoProvider& geo, const std::string& city) {
    QualityReport rep;
    rep.acc_person = relation_consistency(events, persona, rep.person, rep.issues);
    rep.acc_location = location_authenticity(events, geo, city, rep.location, rep.issues);
    rep.acc_trip = trip_authenticity(events, geo, city, rep.trip, rep.issues);
    auto d = diversity(events);
    rep.h_norm = d.h_norm;
    rep.simpson = d.simpson;
    return rep;
}

}  // namespace lifeforge::quality
