#include "lifeforge/dailysim.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "lifeforge/parallel.hpp"

namespace lifeforge::sim {

namespace {

constexpr int kDayStartMin = 8 * 60;   // supplementary-gap scan window
constexpr int kDayEndMin = 22 * 60;

Json slot_to_json(const DailyActivity& a) {
    Json j;
    j["name"] = a.name;
    j["description"] = a.description;
    j["start"] = format_timestamp(a.start);
    j["end"] = format_timestamp(a.end);
    j["location"] = a.location;
    Json parts = Json::array();
    for (const auto& p : a.participants)
        parts.push_back(Json{{"name", p.name}, {"relation", p.relation}});
    j["participants"] = parts;
    j["parent_event_id"] = a.parent_event_id.empty() ? Json(nullptr) : Json(a.parent_event_id);
    j["source"] = to_string(a.source);
    if (!a.link_id.empty()) j["link_id"] = a.link_id;
    j["requested_start"] = format_timestamp(a.requested ? a.requested : a.start);
    return j;
}

DailyActivity slot_from_json(const Json& j, Day date) {
    DailyActivity a;
    a.date = date;
    a.start = parse_timestamp(j.value("start", std::string{})).value_or(0);
    a.end = parse_timestamp(j.value("end", std::string{})).value_or(0);
    a.name = j.value("name", std::string{});
    a.description = j.value("description", std::string{});
    if (j.contains("participants"))
        for (const auto& p : j["participants"])
            a.participants.push_back(
                {p.value("name", std::string{}), p.value("relation", std::string{})});
    a.location = j.value("location", std::string{});
    if (j.contains("parent_event_id") && !j["parent_event_id"].is_null())
        a.parent_event_id = j["parent_event_id"].get<std::string>();
    a.source = activity_source_from_string(j.value("source", std::string{}))
                   .value_or(ActivitySource::scheduled_atomic);
    a.link_id = j.value("link_id", std::string{});
    a.requested = parse_timestamp(j.value("requested_start", std::string{})).value_or(a.start);
    return a;
}

std::string activity_text(const DailyActivity& a) {
    return a.name + ". " + a.description + " (" + format_date(a.date) + " at " + a.location +
           ")";
}

// Drop priority when a day cannot be fully reconciled: supplementary first,
// then routine, then the shorter scheduled slot.
int slot_priority(const DailyActivity& a) {
    switch (a.source) {
        case ActivitySource::supplementary: return 0;
        case ActivitySource::routine: return 1;
        case ActivitySource::scheduled_atomic: return 2;
    }
    return 2;
}

}  // namespace

std::string to_string(FindingKind k) {
    switch (k) {
        case FindingKind::time_conflict: return "time_conflict";
        case FindingKind::travel_infeasible: return "travel_infeasible";
        case FindingKind::venue_unavailable: return "venue_unavailable";
        case FindingKind::fact_inconsistent: return "fact_inconsistent";
        case FindingKind::supplementary_slot: return "supplementary_slot";
    }
    return "time_conflict";
}

void FactIndex::seed_from(const Persona& p) {
    for (const auto* r : p.all_relations()) facts_[{r->name, "relation"}] = r->relation;
    facts_[{p.name, "relation"}] = "Herself";
}

void FactIndex::observe(const DailyActivity& a) {
    for (const auto& part : a.participants) {
        auto key = std::make_pair(part.name, std::string("relation"));
        if (!facts_.count(key) && !part.name.empty() && !part.relation.empty())
            facts_[key] = part.relation;
    }
}

std::optional<std::string> FactIndex::get(const std::string& entity,
                                          const std::string& attribute) const {
    auto it = facts_.find({entity, attribute});
    if (it == facts_.end()) return std::nullopt;
    return it->second;
}

std::vector<size_t> retrieve_episodic(gen::Embedder& embedder, const std::string& query,
                                      const std::vector<std::string>& texts, size_t k) {
    if (texts.empty() || query.empty()) return {};
    auto q = embedder.embed(query);
    std::vector<std::pair<double, size_t>> scored;
    for (size_t i = 0; i < texts.size(); ++i) {
        double s = texts[i].empty() ? 0.0 : gen::cosine(q, embedder.embed(texts[i]));
        scored.emplace_back(s, i);
    }
    // Ties break toward recency: later index wins, so sort by (score desc, index desc).
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    });
    std::vector<size_t> out;
    for (size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second);
    return out;
}

DailySimulator::DailySimulator(gen::GenBackend& backend, gen::Embedder& embedder,
                               geo::GeoProvider& geo, const geo::StubGeoProvider* venue_lookup,
                               SimConfig cfg)
    : backend_(backend), embedder_(embedder), geo_(geo), venues_(venue_lookup), cfg_(cfg) {}

std::optional<std::pair<double, double>> DailySimulator::lonlat_of(const std::string& place,
                                                                   const std::string& city) {
    if (place.empty()) return std::nullopt;
    auto res = geo_.verify_place(place, city);
    if (!res.verified) return std::nullopt;
    return std::make_pair(res.results[0].lon, res.results[0].lat);
}

DayPlan DailySimulator::propose_day(const std::vector<EventNode>& day_atomics, const Persona& p,
                                    const AgentMemory& mem, const outline::ContextFactors& ctx,
                                    Day date) {
    DayPlan plan;
    plan.date = date;
    if (day_atomics.empty()) return plan;

    Json atomics = Json::array();
    for (const auto& a : day_atomics) {
        Json j = event_flat_to_json(a);
        j["origin"] = a.origin;
        atomics.push_back(j);
    }
    Json memory;
    memory["long_term"] = mem.long_term;
    Json st = Json::array();
    for (const auto& a : mem.short_term) st.push_back(activity_text(a));
    for (const auto& s : mem.atomic_supplement) st.push_back(s);
    memory["short_term"] = st;
    memory["episodic"] = mem.episodic;

    Json mini;
    mini["name"] = p.name;
    mini["hobbies"] = p.hobbies;
    mini["city"] = p.home_address.city;

    gen::GenRequest req;
    req.stage = "propose_day";
    req.seed = gen::derive_seed(cfg_.seed, "propose_day",
                                cfg_.user_id + "/" + format_date(date));
    req.response_schema = "plan";
    req.add_json("atomics", atomics);
    req.add_json("persona", mini);
    req.add_json("memory", memory);
    req.add_json("context", outline::to_json(ctx));

    Json out = backend_.generate(req);
    for (const auto& sj : out.value("slots", Json::array())) {
        DailyActivity a = slot_from_json(sj, date);
        // Midnight-crossing drafts are split; the halves share a link id.
        if (a.end > (static_cast<Timestamp>(date) + 1) * kSecondsPerDay) {
            a.link_id = a.parent_event_id.empty() ? a.name : a.parent_event_id + "#split";
            a.end = (static_cast<Timestamp>(date) + 1) * kSecondsPerDay;
        }
        if (a.start < static_cast<Timestamp>(date) * kSecondsPerDay) {
            a.link_id = a.parent_event_id.empty() ? a.name : a.parent_event_id + "#split";
            a.start = static_cast<Timestamp>(date) * kSecondsPerDay;
        }
        if (a.start < a.end) plan.slots.push_back(std::move(a));
    }
    std::stable_sort(plan.slots.begin(), plan.slots.end(),
                     [](const DailyActivity& a, const DailyActivity& b) {
                         return a.start < b.start;
                     });
    return plan;
}

std::vector<ObjectiveFinding> DailySimulator::review_day(const DayPlan& plan,
                                                         const FactIndex& facts,
                                                         std::vector<std::string>* warnings) {
    std::vector<ObjectiveFinding> findings;
    const auto& slots = plan.slots;

    auto identify = [](ObjectiveFinding& f, const DailyActivity& slot) {
        f.extra["slot_name"] = slot.name;
        f.extra["slot_start"] = format_timestamp(slot.start);
    };
    auto is_travel = [](const DailyActivity& s) {
        return s.name.rfind("Travel to", 0) == 0 ||
               s.name.find("commute") != std::string::npos ||
               s.name.find("Commute") != std::string::npos;
    };

    // Pairwise overlaps between consecutive (sorted) slots.
    for (size_t i = 1; i < slots.size(); ++i) {
        if (slots[i].start < slots[i - 1].end) {
            ObjectiveFinding f;
            f.kind = FindingKind::time_conflict;
            f.slot_ref = static_cast<int>(i);
            f.detail = "\"" + slots[i].name + "\" overlaps \"" + slots[i - 1].name + "\"";
            identify(f, slots[i]);
            findings.push_back(std::move(f));
        }
    }

    // Travel feasibility between consecutive located slots; transit blocks
    // themselves are exempt.
    for (size_t i = 1; i < slots.size(); ++i) {
        if (is_travel(slots[i]) || is_travel(slots[i - 1])) continue;
        if (slots[i].location.empty() || slots[i - 1].location.empty()) continue;
        if (slots[i].location == slots[i - 1].location) continue;
        if (slots[i].start < slots[i - 1].end) continue;  // overlap already reported
        try {
            auto a = lonlat_of(slots[i - 1].location, cfg_.city);
            auto b = lonlat_of(slots[i].location, cfg_.city);
            if (!a || !b) continue;
            auto route = geo_.estimate_route(a->first, a->second, b->first, b->second,
                                             geo::TravelMode::transit);
            double gap_min = static_cast<double>(slots[i].start - slots[i - 1].end) / 60.0;
            if (gap_min + 1e-9 < route.duration_min) {
                ObjectiveFinding f;
                f.kind = FindingKind::travel_infeasible;
                f.slot_ref = static_cast<int>(i);
                f.route = route;
                std::ostringstream os;
                os << "gap " << gap_min << " min < travel " << route.duration_min << " min to "
                   << slots[i].location;
                f.detail = os.str();
                f.extra["travel_minutes"] = static_cast<int>(route.duration_min + 0.5);
                identify(f, slots[i]);
                findings.push_back(std::move(f));
            }
        } catch (const geo::GeoError& e) {
            if (warnings)
                warnings->push_back("travel check skipped (" + std::string(e.what()) + ")");
        }
    }

    // Venue opening hours, when fixture metadata is available.
    if (venues_) {
        for (size_t i = 0; i < slots.size(); ++i) {
            if (is_travel(slots[i])) continue;
            if (slots[i].anchor_name.empty() && slots[i].location.empty()) continue;
            const auto* entry = venues_->find(
                cfg_.city,
                slots[i].anchor_name.empty() ? slots[i].location : slots[i].anchor_name);
            if (!entry) continue;
            if (entry->open_min == 0 && entry->close_min == 24 * 60) continue;
            int start_min = second_of_day(slots[i].start) / 60;
            int end_min = second_of_day(slots[i].end) / 60;
            if (end_min == 0) end_min = 24 * 60;
            if (start_min < entry->open_min || end_min > entry->close_min) {
                ObjectiveFinding f;
                f.kind = FindingKind::venue_unavailable;
                f.slot_ref = static_cast<int>(i);
                f.detail = entry->anchor.name + " open " + std::to_string(entry->open_min / 60) +
                           ":00-" + std::to_string(entry->close_min / 60) + ":00";
                f.extra["open_minute"] = entry->open_min;
                f.extra["venue_category"] = entry->category;
                identify(f, slots[i]);
                findings.push_back(std::move(f));
            }
        }
    }

    // Consistency with established facts (participant relations).
    for (size_t i = 0; i < slots.size(); ++i) {
        for (const auto& part : slots[i].participants) {
            auto known = facts.get(part.name, "relation");
            if (known && !part.relation.empty() && *known != part.relation) {
                ObjectiveFinding f;
                f.kind = FindingKind::fact_inconsistent;
                f.slot_ref = static_cast<int>(i);
                f.detail = part.name + " is recorded as \"" + *known + "\", plan says \"" +
                           part.relation + "\"";
                f.extra["entity"] = part.name;
                f.extra["expected"] = *known;
                identify(f, slots[i]);
                findings.push_back(std::move(f));
            }
        }
    }

    // Sparse gaps invite supplementary events until the density target is met.
    if (static_cast<int>(slots.size()) < cfg_.density_target) {
        Timestamp day0 = static_cast<Timestamp>(plan.date) * kSecondsPerDay;
        Timestamp cursor = day0 + kDayStartMin * 60;
        Timestamp day_end = day0 + kDayEndMin * 60;
        auto emit_gap = [&](Timestamp gs, Timestamp ge) {
            if ((ge - gs) / 60 < cfg_.supplementary_gap_min) return;
            ObjectiveFinding f;
            f.kind = FindingKind::supplementary_slot;
            f.detail = "free stretch " + format_timestamp(gs) + " - " + format_timestamp(ge);
            f.extra["gap_start"] = format_timestamp(gs);
            f.extra["gap_end"] = format_timestamp(ge);
            f.extra["location"] = cfg_.home_anchor;
            findings.push_back(std::move(f));
        };
        for (const auto& s : slots) {
            if (s.start > cursor) emit_gap(cursor, std::min(s.start, day_end));
            cursor = std::max(cursor, s.end);
        }
        if (cursor < day_end) emit_gap(cursor, day_end);
    }
    return findings;
}

namespace {

bool finding_blocks(const ObjectiveFinding& f) {
    switch (f.kind) {
        case FindingKind::time_conflict:
        case FindingKind::travel_infeasible:
        case FindingKind::fact_inconsistent:
            return true;
        case FindingKind::venue_unavailable: {
            // Blocks only venue-typed activities (fixture category present).
            return !f.extra.value("venue_category", std::string{}).empty();
        }
        case FindingKind::supplementary_slot:
            return false;
    }
    return false;
}

}  // namespace

DayPlan DailySimulator::refine_day(const DayPlan& plan,
                                   const std::vector<ObjectiveFinding>& findings,
                                   const Persona& p, const AgentMemory& mem) {
    if (findings.empty()) {
        DayPlan out = plan;
        out.revision = std::max(1, plan.revision);
        return out;
    }
    Json slots = Json::array();
    for (const auto& s : plan.slots) slots.push_back(slot_to_json(s));
    Json fjson = Json::array();
    for (const auto& f : findings) {
        Json j = f.extra;
        j["kind"] = to_string(f.kind);
        j["detail"] = f.detail;
        j["slot_ref"] = f.slot_ref;
        fjson.push_back(j);
    }
    Json mini;
    mini["name"] = p.name;
    mini["hobbies"] = p.hobbies;

    gen::GenRequest req;
    req.stage = "refine_day";
    req.seed = gen::derive_seed(cfg_.seed, "refine_day",
                                cfg_.user_id + "/" + format_date(plan.date) + "/r" +
                                    std::to_string(plan.revision + 1));
    req.response_schema = "plan";
    req.add_json("plan", Json{{"slots", slots}});
    req.add_json("findings", fjson);
    req.add_json("persona", mini);

    Json out = backend_.generate(req);
    DayPlan revised;
    revised.date = plan.date;
    revised.revision = plan.revision + 1;
    for (const auto& sj : out.value("slots", Json::array())) {
        DailyActivity a = slot_from_json(sj, plan.date);
        if (a.start < a.end) revised.slots.push_back(std::move(a));
    }
    std::stable_sort(revised.slots.begin(), revised.slots.end(),
                     [](const DailyActivity& a, const DailyActivity& b) {
                         return a.start < b.start;
                     });
    (void)mem;
    return revised;
}

SimResult DailySimulator::simulate_slices(const std::vector<EventNode>& roots,
                                          const Persona& p,
                                          const std::vector<AnchorLocation>& anchors,
                                          const std::vector<outline::ContextFactors>& context,
                                          Day start, Day end) {
    (void)anchors;
    SimResult result;
    if (end < start) return result;

    std::vector<EventNode> atomics = outline::collect_atomic_events(roots);
    // Per-day schedule: the owning day gets the clipped window; a midnight
    // crossing also books the remainder on the next day, and both halves of
    // the resulting activities share a link id.
    std::map<Day, std::vector<EventNode>> schedule;
    std::set<std::string> split_ids;
    for (const auto& a : atomics) {
        Day d = day_of(a.span().start);
        Timestamp midnight = (static_cast<Timestamp>(d) + 1) * kSecondsPerDay;
        EventNode first = a;
        first.date.front().end = std::min(a.span().end, midnight);
        schedule[d].push_back(first);
        if (a.span().end > midnight && day_of(a.span().end - 1) <= end) {
            EventNode rest = a;
            rest.date.front().start = midnight;
            schedule[d + 1].push_back(rest);
            split_ids.insert(a.event_id);
        }
    }

    auto ctx_of = [&](Day d) -> outline::ContextFactors {
        for (const auto& c : context)
            if (c.date == d) return c;
        outline::ContextFactors c;
        c.date = d;
        c.weather = "sunny";
        c.mood = "neutral";
        c.stress = "low";
        return c;
    };

    // Month plan texts come from atomics alone, so any slice can rebuild them.
    auto month_plan_text = [&](int year, int month) {
        int count = 0;
        std::string names;
        for (const auto& a : atomics) {
            CivilDate c = civil_from_days(day_of(a.span().start));
            if (c.year != year || c.month != month) continue;
            ++count;
            if (count <= 5) names += (count == 1 ? ": " : "; ") + a.name;
        }
        return "Plan for " + format_month(year, month) + " holds " + std::to_string(count) +
               " scheduled events" + names + ".";
    };

    int n_slices = static_cast<int>((end - start) / cfg_.slice_days) + 1;
    std::vector<SimResult> slices(n_slices);

    parallel_for(static_cast<size_t>(n_slices), cfg_.workers, [&](size_t si) {
        Day s0 = start + static_cast<Day>(si) * cfg_.slice_days;
        Day s1 = std::min<Day>(end, s0 + cfg_.slice_days - 1);
        SimResult& local = slices[si];
        try {
            FactIndex facts;
            facts.seed_from(p);
            std::vector<DailyActivity> history;  // slice-local

            for (Day d = s0; d <= s1; ++d) {
                // --- memory assembly -------------------------------------
                AgentMemory mem;
                CivilDate cd = civil_from_days(d);
                int prev_m = cd.month == 1 ? 12 : cd.month - 1;
                int prev_y = cd.month == 1 ? cd.year - 1 : cd.year;
                mem.long_term.push_back(month_plan_text(prev_y, prev_m));
                mem.long_term.push_back(month_plan_text(cd.year, cd.month));

                for (const auto& a : history)
                    if (a.date >= d - cfg_.short_term_days && a.date < d)
                        mem.short_term.push_back(a);
                // Days the slice cannot see get the atomic-event supplement.
                for (Day back = std::max(start, d - cfg_.short_term_days); back < d; ++back) {
                    if (back >= s0) continue;
                    auto it = schedule.find(back);
                    if (it == schedule.end()) continue;
                    for (const auto& a : it->second)
                        mem.atomic_supplement.push_back("Scheduled on " + format_date(back) +
                                                        ": " + a.name + " at " + a.location);
                }

                std::vector<EventNode> today =
                    schedule.count(d) ? schedule[d] : std::vector<EventNode>{};
                std::string query;
                for (const auto& a : today) query += a.name + ". ";
                std::vector<std::string> store;
                for (const auto& a : history) store.push_back(activity_text(a));
                for (const auto& s : mem.atomic_supplement) store.push_back(s);
                if (!query.empty())
                    for (size_t idx : retrieve_episodic(embedder_, query, store,
                                                        static_cast<size_t>(cfg_.episodic_k)))
                        mem.episodic.push_back(store[idx]);

                // --- propose / review / refine ----------------------------
                outline::ContextFactors ctx = ctx_of(d);
                DayPlan plan = propose_day(today, p, mem, ctx, d);
                plan.revision = 0;
                std::vector<ObjectiveFinding> findings =
                    review_day(plan, facts, &local.report);
                int rounds = 0;
                while (rounds < cfg_.refine_rounds) {
                    bool blocking = false;
                    for (const auto& f : findings) blocking |= finding_blocks(f);
                    bool fill = !findings.empty();
                    if (!blocking && !fill) break;
                    plan = refine_day(plan, findings, p, mem);
                    ++rounds;
                    findings = review_day(plan, facts, &local.report);
                    // Supplementary-only findings get one fill round, no more.
                    bool still_blocking = false;
                    for (const auto& f : findings) still_blocking |= finding_blocks(f);
                    if (!still_blocking) break;
                }
                // Fallback after exhausted rounds: fix facts in place, drop the
                // lowest-priority slot of any remaining blocking finding.
                for (;;) {
                    const ObjectiveFinding* block = nullptr;
                    for (const auto& f : findings)
                        if (finding_blocks(f)) {
                            block = &f;
                            break;
                        }
                    if (!block) break;
                    if (block->kind == FindingKind::fact_inconsistent &&
                        block->slot_ref >= 0) {
                        auto& slot = plan.slots[block->slot_ref];
                        for (auto& part : slot.participants)
                            if (part.name == block->extra.value("entity", std::string{}))
                                part.relation = block->extra.value("expected", std::string{});
                    } else {
                        size_t victim = static_cast<size_t>(std::max(0, block->slot_ref));
                        if (block->kind == FindingKind::time_conflict && block->slot_ref >= 1) {
                            size_t i = static_cast<size_t>(block->slot_ref);
                            victim = slot_priority(plan.slots[i]) <=
                                             slot_priority(plan.slots[i - 1])
                                         ? i
                                         : i - 1;
                        }
                        if (victim >= plan.slots.size()) break;
                        local.report.push_back("dropped \"" + plan.slots[victim].name +
                                               "\" on " + format_date(d) +
                                               " (unresolved " + to_string(block->kind) + ")");
                        plan.slots.erase(plan.slots.begin() + victim);
                    }
                    findings = review_day(plan, facts, &local.report);
                }
                if (plan.revision == 0) plan.revision = 1;

                // --- finalize ---------------------------------------------
                int k = 0;
                for (auto& a : plan.slots) {
                    a.activity_id = cfg_.user_id + "/" + format_date(d) + "/" +
                                    std::to_string(k++);
                    if (a.link_id.empty() && split_ids.count(a.parent_event_id))
                        a.link_id = a.parent_event_id + "#split";
                    facts.observe(a);
                    history.push_back(a);
                    local.activities.push_back(a);
                }
                // Coverage check: every scheduled atomic maps to >= 1 slot.
                for (const auto& a : today) {
                    bool covered = false;
                    for (const auto& s : plan.slots) covered |= s.parent_event_id == a.event_id;
                    if (!covered)
                        local.report.push_back("atomic " + a.event_id + " (" + a.name +
                                               ") dropped on " + format_date(d));
                }
                Json snap;
                snap["date"] = format_date(d);
                snap["long_term"] = mem.long_term;
                snap["short_term_count"] = mem.short_term.size();
                snap["atomic_supplement_count"] = mem.atomic_supplement.size();
                snap["episodic"] = mem.episodic;
                snap["revision"] = plan.revision;
                local.memory_snapshots.push_back(std::move(snap));
            }
        } catch (const std::exception& e) {
            local.report.push_back("slice " + format_date(s0) + ".." + format_date(s1) +
                                   " failed: " + e.what());
        }
    });

    for (auto& s : slices) {
        result.activities.insert(result.activities.end(), s.activities.begin(),
                                 s.activities.end());
        result.memory_snapshots.insert(result.memory_snapshots.end(),
                                       s.memory_snapshots.begin(), s.memory_snapshots.end());
        result.report.insert(result.report.end(), s.report.begin(), s.report.end());
    }
    std::sort(result.activities.begin(), result.activities.end(),
              [](const DailyActivity& a, const DailyActivity& b) {
                  if (a.date != b.date) return a.date < b.date;
                  if (a.start != b.start) return a.start < b.start;
                  return a.activity_id < b.activity_id;
              });
    return result;
}

}  // namespace lifeforge::sim
