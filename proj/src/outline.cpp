#include "lifeforge/outline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include "lifeforge/parallel.hpp"

namespace lifeforge::outline {

namespace {

std::string to_lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool contains_word(const std::string& haystack, const std::string& needle) {
    return !needle.empty() && to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

Json persona_mini(const Persona& p, const std::vector<AnchorLocation>& anchors) {
    Json j;
    j["name"] = p.name;
    j["job"] = p.job;
    j["city"] = p.home_address.city;
    j["hobbies"] = p.hobbies;
    Json anchor_names = Json::array();
    for (const auto& a : anchors) anchor_names.push_back(a.name);
    j["anchors"] = anchor_names;
    if (!anchors.empty()) j["home_anchor"] = anchors.front().name;
    if (anchors.size() > 1) j["work_anchor"] = anchors[1].name;
    Json rel = Json::array();
    for (const auto* r : p.all_relations()) rel.push_back(r->name);
    j["relations"] = rel;
    return j;
}

}  // namespace

Json to_json(const ContextFactors& c) {
    Json j;
    j["date"] = format_date(c.date);
    j["weather"] = c.weather;
    j["mood"] = c.mood;
    j["stress"] = c.stress;
    j["habits_active"] = c.habits_active;
    return j;
}

ContextFactors context_from_json(const Json& j) {
    ContextFactors c;
    c.date = parse_date(j.value("date", std::string{})).value_or(0);
    c.weather = j.value("weather", std::string("sunny"));
    c.mood = j.value("mood", std::string("neutral"));
    c.stress = j.value("stress", std::string("low"));
    if (j.contains("habits_active"))
        for (const auto& h : j["habits_active"]) c.habits_active.push_back(h.get<std::string>());
    return c;
}

std::vector<ContextFactors> generate_context_series(const Persona& p, Day start, Day end,
                                                    uint64_t seed) {
    // Documented transition tables; rows sum to 1.
    static const char* kWeather[] = {"sunny", "cloudy", "rainy"};
    static const double kWeatherT[3][3] = {
        {0.60, 0.30, 0.10}, {0.35, 0.40, 0.25}, {0.30, 0.40, 0.30}};
    static const char* kMood[] = {"low", "neutral", "high"};
    static const double kMoodT[3][3] = {
        {0.30, 0.55, 0.15}, {0.15, 0.55, 0.30}, {0.10, 0.45, 0.45}};
    static const char* kStress[] = {"low", "medium", "high"};
    static const double kStressT[3][3] = {
        {0.60, 0.30, 0.10}, {0.35, 0.45, 0.20}, {0.25, 0.45, 0.30}};

    Rng rng(seed, "context_factors", p.name);
    int w = 0, m = 1, s = 0;
    std::vector<ContextFactors> out;
    auto step = [&](const double t[3][3], int cur) {
        double x = rng.next_double();
        double acc = 0.0;
        for (int k = 0; k < 3; ++k) {
            acc += t[cur][k];
            if (x < acc) return k;
        }
        return 2;
    };
    for (Day d = start; d <= end; ++d) {
        w = step(kWeatherT, w);
        m = step(kMoodT, m);
        s = step(kStressT, s);
        ContextFactors c;
        c.date = d;
        c.weather = kWeather[w];
        c.mood = kMood[m];
        c.stress = kStress[s];
        int wd = weekday_of(d);
        for (const auto& h : p.hobbies) {
            // Weekday cadence: sporty habits are active Tue/Thu/Sat/Sun.
            std::string low = to_lower(h);
            bool sporty = low.find("run") != std::string::npos ||
                          low.find("marathon") != std::string::npos ||
                          low.find("yoga") != std::string::npos ||
                          low.find("fitness") != std::string::npos ||
                          low.find("swim") != std::string::npos;
            if (!sporty || wd == 1 || wd == 3 || wd == 5 || wd == 6) c.habits_active.push_back(h);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Plot> load_plot_db(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open plot database: " + path.string());
    Json j = Json::parse(in);
    std::vector<Plot> plots;
    for (const auto& pj : j) plots.push_back(plot_from_json(pj));
    return plots;
}

std::vector<Plot> select_plots(const Persona& p, const std::vector<Plot>& plotdb,
                               size_t max_plots, uint64_t seed) {
    if (plotdb.empty()) throw std::runtime_error("select_plots: empty plot database");
    Rng rng(seed, "select_plots", p.name);

    // Affinity: persona job and hobby words boost matching plots.
    auto affinity = [&](const Plot& plot) {
        double a = 1.0;
        if (contains_word(plot.topic + " " + plot.detailed_description, p.job)) a += 3.0;
        for (const auto& h : p.hobbies) {
            // match on the head word of the hobby phrase
            std::string head = h.substr(0, h.find(' '));
            if (head.size() >= 4 &&
                contains_word(plot.topic + " " + plot.detailed_description, head))
                a += 1.5;
        }
        return a;
    };

    std::vector<size_t> pool;
    std::vector<double> weights;
    for (size_t i = 0; i < plotdb.size(); ++i) {
        double w = plotdb[i].priority * affinity(plotdb[i]);
        if (w > 0.0) {
            pool.push_back(i);
            weights.push_back(w);
        }
    }

    std::vector<Plot> selected;
    while (selected.size() < max_plots && !pool.empty()) {
        size_t k = rng.pick_weighted(weights);
        selected.push_back(plotdb[pool[k]]);
        pool.erase(pool.begin() + k);
        weights.erase(weights.begin() + k);
    }

    // Same-month milestones from different plots must stay disjoint; on a
    // collision the lower-priority plot is dropped.
    std::stable_sort(selected.begin(), selected.end(), [](const Plot& a, const Plot& b) {
        if (a.priority != b.priority) return a.priority > b.priority;
        return a.topic < b.topic;
    });
    std::map<std::string, std::set<std::string>> claimed;  // month -> milestones
    std::vector<Plot> kept;
    for (const auto& plot : selected) {
        bool clash = false;
        for (const auto& m : plot.monthly_description)
            for (const auto& ce : m.core_events)
                if (claimed[m.month].count(ce)) clash = true;
        if (clash) continue;
        for (const auto& m : plot.monthly_description)
            for (const auto& ce : m.core_events) claimed[m.month].insert(ce);
        kept.push_back(plot);
    }
    return kept;
}

Json merge_outline(gen::GenBackend& backend, const Persona& p, const std::vector<Plot>& plots,
                   int year, uint64_t seed) {
    gen::GenRequest req;
    req.stage = "plot_outline";
    req.seed = gen::derive_seed(seed, "plot_outline", p.name);
    req.response_schema = "outline";
    Json plots_json = Json::array();
    for (const auto& plot : plots) plots_json.push_back(to_json(plot));
    req.add_json("persona", Json{{"name", p.name}, {"job", p.job}});
    req.add_json("plots", plots_json);
    req.add("year", std::to_string(year));
    return backend.generate(req);
}

std::vector<EventNode> generate_thematic_events(gen::GenBackend& backend, const Json& outline,
                                                const Persona& p,
                                                const std::vector<AnchorLocation>& anchors,
                                                const geo::HolidayCalendar& holidays, int month,
                                                const std::string& prev_summary,
                                                const ThematicConfig& cfg, int& next_ordinal) {
    Json outline_month;
    std::string label = format_month(cfg.year, month);
    for (const auto& m : outline.value("months", Json::array()))
        if (m.value("month", std::string{}) == label) outline_month = m;

    Json month_holidays = Json::array();
    for (const auto& h : holidays.entries) {
        CivilDate c = civil_from_days(h.date);
        if (c.year == cfg.year && c.month == month)
            month_holidays.push_back(Json{{"date", format_date(h.date)}, {"name", h.name}});
    }

    gen::GenRequest req;
    req.stage = "thematic_month";
    req.seed = gen::derive_seed(cfg.seed, "thematic_month", cfg.user_id + "/" + label);
    req.response_schema = "events";
    req.add_json("persona", persona_mini(p, anchors));
    req.add_json("outline_month", outline_month.is_null() ? Json::object() : outline_month);
    req.add("prev_summary", prev_summary);
    req.add_json("holidays", month_holidays);
    req.add("month", label);
    req.add("target_count", std::to_string(cfg.target_per_month));

    Json out = backend.generate(req);
    std::vector<EventNode> events;
    Day month_start = days_from_civil(cfg.year, month, 1);
    Day month_end = month_start + days_in_month(cfg.year, month) - 1;
    for (const auto& ej : out.value("events", Json::array())) {
        EventNode n = event_flat_from_json(ej);
        if (n.date.empty()) continue;
        // Assignment rule: the start date decides the month; clamp strays.
        Day d0 = day_of(n.date.front().start);
        if (d0 < month_start || d0 > month_end) {
            int64_t dur = n.date.front().duration();
            Timestamp ns = static_cast<Timestamp>(month_start) * kSecondsPerDay +
                           second_of_day(n.date.front().start);
            n.date.front() = {ns, ns + dur};
        }
        n.event_id = std::to_string(next_ordinal++);
        n.splittable = true;
        n.origin = "planned";
        events.push_back(std::move(n));
    }
    std::stable_sort(events.begin(), events.end(), [](const EventNode& a, const EventNode& b) {
        return a.span().start < b.span().start;
    });
    return events;
}

std::string summarize_month_events(const std::vector<EventNode>& events) {
    std::string s = "Previous month covered " + std::to_string(events.size()) + " events";
    size_t listed = 0;
    for (const auto& e : events) {
        if (listed >= 6) break;
        s += (listed == 0 ? ": " : "; ") + e.name;
        ++listed;
    }
    s += ".";
    return s;
}

// ------------------------------------------------------- parallel decomposition

namespace {

// Children are clamped into the parent window; a child list that spills
// outside gets mapped linearly onto the parent span first.
void clamp_children(const Interval& parent, std::vector<EventNode>& children) {
    if (children.empty()) return;
    Timestamp lo = children.front().span().start, hi = children.front().span().end;
    for (const auto& c : children) {
        lo = std::min(lo, c.span().start);
        hi = std::max(hi, c.span().end);
    }
    if (lo < parent.start || hi > parent.end) {
        double scale = hi > lo ? static_cast<double>(parent.duration()) /
                                     static_cast<double>(hi - lo)
                               : 1.0;
        if (scale < 1.0) {
            for (auto& c : children) {
                Timestamp ns = parent.start +
                               static_cast<Timestamp>((c.span().start - lo) * scale);
                Timestamp ne = parent.start +
                               static_cast<Timestamp>((c.span().end - lo) * scale);
                ns -= ns % 60;
                ne -= ne % 60;
                c.date.front() = {ns, std::max(ne, ns + 60)};
            }
        }
        for (auto& c : children) {
            Timestamp ns = std::clamp(c.span().start, parent.start, parent.end);
            Timestamp ne = std::clamp(c.span().end, parent.start, parent.end);
            c.date.front() = {ns, ne};
        }
    }
    // Drop empties; keep siblings ordered and non-overlapping.
    std::erase_if(children, [](const EventNode& c) { return c.duration() <= 0; });
    std::stable_sort(children.begin(), children.end(),
                     [](const EventNode& a, const EventNode& b) {
                         return a.span().start < b.span().start;
                     });
    for (size_t i = 1; i < children.size(); ++i) {
        if (children[i].span().start < children[i - 1].span().end) {
            Interval prev = children[i - 1].span();
            children[i - 1].date.front() = {prev.start, children[i].span().start};
        }
    }
    std::erase_if(children, [](const EventNode& c) { return c.duration() <= 0; });
}

int depth_of(const std::string& event_id) {
    return static_cast<int>(std::count(event_id.begin(), event_id.end(), '.'));
}

}  // namespace

DecompReport decompose_parallel(std::vector<EventNode>& roots, gen::GenBackend& backend,
                                const DecompositionConfig& cfg, const Persona& p,
                                uint64_t seed) {
    DecompReport report;
    std::vector<EventNode*> stack;
    for (auto& r : roots) {
        if (!r.is_leaf()) continue;
        if (r.duration() >= cfg.tau_seconds) {
            r.splittable = true;
            ++report.nodes_marked_splittable;
            stack.push_back(&r);
        } else {
            r.splittable = false;
        }
    }

    while (!stack.empty()) {
        std::vector<EventNode*> batch = std::move(stack);
        stack.clear();
        std::vector<std::vector<EventNode>> results(batch.size());
        std::vector<std::string> failures(batch.size());

        parallel_for(batch.size(), cfg.max_workers, [&](size_t i) {
            EventNode* node = batch[i];
            gen::GenRequest req;
            req.stage = "decompose";
            req.seed = gen::derive_seed(seed, "decompose", node->event_id);
            req.response_schema = "events";
            req.add_json("event", event_flat_to_json(*node));
            req.add("tau_seconds", std::to_string(cfg.tau_seconds));
            req.add("max_children", std::to_string(cfg.max_children));
            try {
                Json out = backend.generate(req);
                std::vector<EventNode> children;
                for (const auto& cj : out.value("children", Json::array())) {
                    EventNode c = event_flat_from_json(cj);
                    if (c.date.empty()) continue;
                    c.origin = node->origin;
                    children.push_back(std::move(c));
                }
                results[i] = std::move(children);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        });

        // One backend call per batched node, success or not.
        report.decompose_calls += static_cast<int>(batch.size());

        // Deterministic attach in batch order.
        for (size_t i = 0; i < batch.size(); ++i) {
            EventNode* node = batch[i];
            if (!failures[i].empty()) {
                report.failed_nodes.push_back(node->event_id + ": " + failures[i]);
                continue;  // subtree skipped; node stays a splittable leaf
            }
            clamp_children(node->span(), results[i]);
            // Re-issue hierarchical ids after clamping may have dropped some.
            for (size_t k = 0; k < results[i].size(); ++k)
                results[i][k].event_id = node->event_id + "." + std::to_string(k + 1);
            node->subevents = std::move(results[i]);
            for (auto& child : node->subevents) {
                if (child.duration() < cfg.tau_seconds) {
                    child.splittable = false;
                } else if (depth_of(child.event_id) >= cfg.max_depth) {
                    child.splittable = false;  // forced atomic at the depth bound
                    ++report.forced_atomic;
                } else {
                    child.splittable = true;
                    ++report.nodes_marked_splittable;
                    stack.push_back(&child);
                }
            }
        }
    }
    (void)p;
    return report;
}

// ------------------------------------------------------------- optimization

WindowDelta optimize_atomic_window(const std::vector<EventNode>& roots, Day window_start,
                                   Day window_end,
                                   const std::vector<ContextFactors>& context,
                                   const Persona& p, const std::string& home_anchor,
                                   gen::GenBackend& backend, uint64_t seed,
                                   int& next_ordinal) {
    Json atomics = Json::array();
    for (const auto& root : roots)
        visit_events(root, [&](const EventNode& n) {
            if (!n.is_leaf()) return;
            Day d = day_of(n.span().start);
            if (d < window_start || d > window_end) return;
            Json j = event_flat_to_json(n);
            j["origin"] = n.origin;
            atomics.push_back(j);
        });

    Json ctx = Json::array();
    for (const auto& c : context)
        if (c.date >= window_start && c.date <= window_end) ctx.push_back(to_json(c));

    Json mini;
    mini["name"] = p.name;
    mini["hobbies"] = p.hobbies;
    mini["home_anchor"] = home_anchor;

    gen::GenRequest req;
    req.stage = "optimize_window";
    req.seed = gen::derive_seed(seed, "optimize_window",
                                p.name + "/" + format_date(window_start));
    req.response_schema = "delta";
    req.add_json("persona", mini);
    req.add_json("window", Json{{"start", format_date(window_start)},
                                {"end", format_date(window_end)}});
    req.add_json("context", ctx);
    req.add_json("atomics", atomics);

    Json out = backend.generate(req);
    WindowDelta delta;
    for (const auto& ej : out.value("insertions", Json::array())) {
        EventNode n = event_flat_from_json(ej);
        if (n.date.empty()) continue;
        n.event_id = std::to_string(next_ordinal++);
        n.splittable = false;
        n.origin = "routine";
        delta.insertions.push_back(std::move(n));
    }
    for (const auto& id : out.value("cancellations", Json::array()))
        delta.cancellations.push_back(id.get<std::string>());
    return delta;
}

namespace {

bool erase_by_id(std::vector<EventNode>& nodes, const std::string& id) {
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].event_id == id) {
            nodes.erase(nodes.begin() + i);
            return true;
        }
        if (id.rfind(nodes[i].event_id + ".", 0) == 0)
            return erase_by_id(nodes[i].subevents, id);
    }
    return false;
}

}  // namespace

void apply_window_delta(std::vector<EventNode>& roots, const WindowDelta& delta) {
    for (const auto& id : delta.cancellations) erase_by_id(roots, id);
    for (const auto& n : delta.insertions) roots.push_back(n);
}

std::vector<EventNode> collect_atomic_events(const std::vector<EventNode>& roots) {
    std::vector<EventNode> leaves;
    for (const auto& r : roots)
        visit_events(r, [&](const EventNode& n) {
            if (!n.is_leaf()) return;
            EventNode leaf = n;
            leaf.subevents.clear();
            leaves.push_back(std::move(leaf));
        });
    std::sort(leaves.begin(), leaves.end(), [](const EventNode& a, const EventNode& b) {
        if (a.span().start != b.span().start) return a.span().start < b.span().start;
        return a.event_id < b.event_id;
    });
    return leaves;
}

Json forest_to_json(const std::vector<EventNode>& roots) {
    Json arr = Json::array();
    for (const auto& r : roots) arr.push_back(event_tree_to_json(r));
    return arr;
}

std::vector<EventNode> forest_from_json(const Json& j) {
    std::vector<EventNode> roots;
    for (const auto& rj : j) roots.push_back(event_tree_from_json(rj));
    return roots;
}

}  // namespace lifeforge::outline
