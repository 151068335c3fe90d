#include "lifeforge/validate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace lifeforge {

namespace {

const char* kMonthNames[] = {"January", "February", "March",     "April",   "May",
                             "June",    "July",     "August",    "September", "October",
                             "November", "December"};

// "May - August" -> 5; unknown -> -1.
int plot_month_start(const std::string& label) {
    for (int i = 0; i < 12; ++i)
        if (label.rfind(kMonthNames[i], 0) == 0) return i + 1;
    return -1;
}

void check_anchor(const Json& j, ValidationReport& rep, const std::string& base) {
    double lon = 0.0, lat = 0.0;
    if (j.contains("location") && j["location"].is_string())
        std::sscanf(j["location"].get<std::string>().c_str(), "%lf,%lf", &lon, &lat);
    if (lon < -180.0 || lon > 180.0) rep.add(base + "/location", "longitude out of [-180,180]");
    if (lat < -90.0 || lat > 90.0) rep.add(base + "/location", "latitude out of [-90,90]");
    if (!j.contains("name") || j["name"].get<std::string>().empty())
        rep.add(base + "/name", "anchor name empty");
}

void check_datetime_field(const Json& j, const char* key, ValidationReport& rep) {
    if (!j.contains(key)) return;
    if (!j[key].is_string() || !parse_timestamp(j[key].get<std::string>()))
        rep.add(std::string("/") + key, "not a \"YYYY-MM-DD HH:MM:SS\" timestamp");
}

void check_event_node(const EventNode& n, int64_t tau, const std::string& path,
                      ValidationReport& rep) {
    if (n.date.empty()) {
        rep.add(path + "/date", "event has no interval");
        return;
    }
    for (const auto& iv : n.date)
        if (iv.start > iv.end) rep.add(path + "/date", "interval start after end");
    if (!n.splittable && n.is_leaf() && tau > 0 && n.duration() >= tau)
        rep.add(path, "non-splittable leaf at or above duration threshold");
    // Sibling leaves must not overlap; overlap across branches is allowed.
    std::vector<const EventNode*> leaf_children;
    for (const auto& c : n.subevents)
        if (c.is_leaf()) leaf_children.push_back(&c);
    std::sort(leaf_children.begin(), leaf_children.end(),
              [](const EventNode* a, const EventNode* b) {
                  return a->span().start < b->span().start;
              });
    for (size_t i = 1; i < leaf_children.size(); ++i) {
        if (leaf_children[i]->span().start < leaf_children[i - 1]->span().end)
            rep.add(path + "/subevents", "sibling leaves \"" + leaf_children[i - 1]->name +
                                             "\" and \"" + leaf_children[i]->name + "\" overlap");
    }
    for (size_t i = 0; i < n.subevents.size(); ++i) {
        const auto& c = n.subevents[i];
        std::string cpath = path + "/subevents/" + std::to_string(i);
        bool contained = false;
        for (const auto& parent_iv : n.date) {
            for (const auto& child_iv : c.date)
                if (parent_iv.contains(child_iv)) contained = true;
        }
        if (!c.date.empty() && !contained)
            rep.add(cpath + "/date", "child interval not contained in any parent interval");
        if (c.event_id.rfind(n.event_id + ".", 0) != 0)
            rep.add(cpath + "/event_id", "child id lacks parent prefix");
        check_event_node(c, tau, cpath, rep);
    }
}

}  // namespace

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) os << v.path << ": " << v.message << "\n";
    return os.str();
}

ValidationReport validate_persona(const Persona& p, int epoch_year) {
    ValidationReport rep;
    if (p.name.empty()) rep.add("/name", "name empty");
    if (p.height_cm > 0) {
        double h = p.height_cm / 100.0;
        double expected = p.weight_kg / (h * h);
        if (std::abs(expected - p.bmi) > 0.05) {
            std::ostringstream msg;
            msg << "BMI " << p.bmi << " differs from weight/height^2 = " << expected;
            rep.add("/body/BMI", msg.str());
        }
    } else {
        rep.add("/body/height", "height must be positive");
    }
    if (epoch_year > 0) {
        int birth_year = 0;
        std::sscanf(p.birth.c_str(), "%d", &birth_year);
        int expected = epoch_year - birth_year;
        if (std::abs(expected - p.age) > 1)
            rep.add("/age", "age inconsistent with birth date for epoch " +
                                std::to_string(epoch_year));
    }
    std::set<std::string> names;
    size_t ci = 0;
    for (const auto& circle : p.relation) {
        size_t ri = 0;
        for (const auto& r : circle) {
            std::string base =
                "/relation/" + std::to_string(ci) + "/" + std::to_string(ri);
            if (r.name.empty()) rep.add(base + "/name", "relation name empty");
            if (r.relation.empty()) rep.add(base + "/relation", "relation label empty");
            if (!names.insert(r.name).second)
                rep.add(base + "/name", "duplicate relation name \"" + r.name + "\"");
            ++ri;
        }
        ++ci;
    }
    return rep;
}

ValidationReport validate_event_tree(const EventNode& root, int64_t tau_seconds) {
    ValidationReport rep;
    check_event_node(root, tau_seconds, "", rep);
    return rep;
}

ValidationReport validate_activity(const DailyActivity& a) {
    ValidationReport rep;
    if (a.start >= a.end) rep.add("/start", "start not before end");
    if (day_of(a.start) != a.date) rep.add("/start", "start outside stated day");
    // end may touch the next midnight exactly
    if (day_of(a.end) != a.date &&
        !(day_of(a.end) == a.date + 1 && second_of_day(a.end) == 0))
        rep.add("/end", "end outside stated day");
    if (a.name.empty()) rep.add("/name", "activity name empty");
    return rep;
}

ValidationReport validate_health(const HealthRecord& h) {
    ValidationReport rep;
    const auto& s = h.sleep;
    if (s.light_min + s.deep_min + s.rem_min > s.total_min + s.awake_min)
        rep.add("/Sleep", "stage durations exceed total sleep + awake duration");
    auto nonneg = [&](int v, const char* path) {
        if (v < 0) rep.add(path, "negative count");
    };
    nonneg(h.steps, "/Daily Activities/Steps");
    nonneg(h.distance_hm, "/Daily Activities/Distance");
    nonneg(h.calories, "/Daily Activities/Calories Burned");
    nonneg(h.exercise_min, "/Daily Activities/Exercise Duration");
    nonneg(h.running.distance_hm, "/Running/Distance");
    nonneg(h.cycling.distance_hm, "/Cycling/Distance");
    nonneg(h.walking.distance_hm, "/Walking/Distance");
    nonneg(s.total_min, "/Sleep/Total Sleep Duration");
    return rep;
}

ValidationReport validate_qa(const QAItem& q) {
    ValidationReport rep;
    if (q.question.empty()) rep.add("/question", "question empty");
    if (q.format == QaFormat::multiple_choice) {
        if (q.options.size() != 4)
            rep.add("/options", "multiple_choice requires exactly 4 options, got " +
                                    std::to_string(q.options.size()));
        std::set<std::string> letters, contents;
        bool answer_found = q.answer == kNotInMemory;
        for (const auto& o : q.options) {
            if (!letters.insert(o.option).second)
                rep.add("/options", "duplicate option letter " + o.option);
            if (!contents.insert(o.content).second)
                rep.add("/options", "duplicate option content");
            if (o.option == q.answer) answer_found = true;
        }
        if (!answer_found)
            rep.add("/answer", "answer is neither an option letter nor the sentinel");
    } else {
        if (q.answer.empty()) rep.add("/answer", "answer empty");
        if (q.answer != kNotInMemory) {
            int total = 0;
            for (const auto& p : q.score_points) total += p.score;
            if (total <= 0) rep.add("/score_points", "score points must sum > 0");
        }
    }
    if (q.question_type.empty()) rep.add("/question_type", "question_type empty");
    if (q.ask_time.empty() || !parse_month(q.ask_time))
        rep.add("/ask_time", "ask_time not a \"YYYY-MM\" label");
    for (const auto& d : q.required_events_date)
        if (!parse_date(d)) rep.add("/required_events_date", "bad date \"" + d + "\"");
    return rep;
}

ValidationReport validate_plot(const Plot& p) {
    ValidationReport rep;
    if (p.topic.empty()) rep.add("/topic", "topic empty");
    if (std::find(kPlotCategories.begin(), kPlotCategories.end(), p.category) ==
        kPlotCategories.end())
        rep.add("/category", "category \"" + p.category + "\" not in the seven-element set");
    if (p.priority < 0.0) rep.add("/priority", "priority must be >= 0");
    int prev = 0;
    for (size_t i = 0; i < p.monthly_description.size(); ++i) {
        int m = plot_month_start(p.monthly_description[i].month);
        if (m < 0) {
            rep.add("/monthly_description/" + std::to_string(i) + "/month",
                    "unparseable month label");
            continue;
        }
        if (m < prev)
            rep.add("/monthly_description/" + std::to_string(i) + "/month",
                    "monthly entries out of chronological order");
        prev = m;
    }
    return rep;
}

ValidationReport validate_document(const Json& doc, const std::string& kind, int epoch_year) {
    ValidationReport rep;
    try {
        if (kind == "persona") {
            return validate_persona(persona_from_json(doc), epoch_year);
        } else if (kind == "event" ) {
            EventNode n = event_flat_from_json(doc);
            if (n.date.empty()) rep.add("/date", "event has no interval");
            for (const auto& iv : n.date)
                if (iv.start > iv.end) rep.add("/date", "interval start after end");
        } else if (kind == "event_tree") {
            return validate_event_tree(event_tree_from_json(doc), 0);
        } else if (kind == "activity") {
            return validate_activity(activity_from_json(doc));
        } else if (kind == "artifact") {
            auto art = artifact_from_json(doc);
            std::string declared = doc.contains("type") ? doc["type"].get<std::string>()
                                                        : std::string("contact");
            if (artifact_kind(art) != declared)
                rep.add("/type", "type discriminator does not match populated fields");
            for (const char* key : {"datetime", "datetime_end", "start_time", "end_time"})
                check_datetime_field(doc, key, rep);
        } else if (kind == "health") {
            return validate_health(health_from_json(doc));
        } else if (kind == "summary") {
            MonthlySummary m = summary_from_json(doc);
            if (m.word_count <= 0) rep.add("/word_count", "word_count must be > 0");
            if (!parse_month(m.month)) rep.add("/month", "month not a \"YYYY-MM\" label");
        } else if (kind == "qa") {
            return validate_qa(qa_from_json(doc));
        } else if (kind == "plot") {
            return validate_plot(plot_from_json(doc));
        } else if (kind == "anchor") {
            check_anchor(doc, rep, "");
        } else {
            rep.add("", "unknown document kind \"" + kind + "\"");
        }
    } catch (const std::exception& e) {
        rep.add("", std::string("document does not fit schema: ") + e.what());
    }
    return rep;
}

ValidationReport validate_text(const std::string& text, const std::string& kind,
                               int epoch_year) {
    Json doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        // Re-parse with exceptions to recover the byte offset.
        ValidationReport rep;
        try {
            Json reparse = Json::parse(text);
            (void)reparse;
        } catch (const Json::parse_error& e) {
            rep.add("", "parse error at byte " + std::to_string(e.byte) + ": " + e.what());
            return rep;
        }
        rep.add("", "parse error");
        return rep;
    }
    return validate_document(doc, kind, epoch_year);
}

}  // namespace lifeforge
