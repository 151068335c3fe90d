#include "lifeforge/artifacts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace lifeforge::artifacts {

namespace {

std::string to_lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool matches_keyword(const std::string& name_lower, const std::vector<std::string>& keywords) {
    for (const auto& k : keywords)
        if (name_lower.find(k) != std::string::npos) return true;
    return false;
}

Json persona_mini(const Persona& p) {
    Json j;
    j["name"] = p.name;
    j["city"] = p.home_address.city;
    j["province"] = p.home_address.province;
    j["district"] = p.home_address.district;
    return j;
}

Json activity_payload(const DailyActivity& a) {
    Json j;
    j["name"] = a.name;
    j["description"] = a.description;
    j["date"] = format_date(a.date);
    j["start"] = format_timestamp(a.start);
    j["end"] = format_timestamp(a.end);
    j["location"] = a.location;
    Json parts = Json::array();
    for (const auto& part : a.participants)
        parts.push_back(Json{{"name", part.name}, {"relation", part.relation}});
    j["participants"] = parts;
    return j;
}

}  // namespace

RateTable RateTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open rate table: " + path.string());
    Json j = Json::parse(in);
    RateTable t;
    for (auto it = j["base"].begin(); it != j["base"].end(); ++it)
        t.base[it.key()] = it.value().get<double>();
    for (const auto& cj : j.value("categories", Json::array())) {
        Category c;
        c.name = cj.value("name", std::string{});
        for (const auto& k : cj.value("keywords", Json::array()))
            c.keywords.push_back(k.get<std::string>());
        if (cj.contains("multipliers"))
            for (auto it = cj["multipliers"].begin(); it != cj["multipliers"].end(); ++it)
                c.multipliers[it.key()] = it.value().get<double>();
        if (cj.contains("forced"))
            for (auto it = cj["forced"].begin(); it != cj["forced"].end(); ++it)
                c.forced[it.key()] = it.value().get<double>();
        t.categories.push_back(std::move(c));
    }
    if (j.contains("noise_per_day"))
        for (auto it = j["noise_per_day"].begin(); it != j["noise_per_day"].end(); ++it)
            t.noise_per_day[it.key()] = it.value().get<double>();
    t.topic_sms_per_day = j.value("topic_sms_per_day", 1.0);
    for (const auto& sj : j.value("subscriptions", Json::array())) {
        Subscription s;
        s.source = sj.value("source", std::string{});
        s.title = sj.value("title", std::string{});
        s.hour = sj.value("hour", 8);
        t.subscriptions.push_back(std::move(s));
    }
    return t;
}

const RateTable::Category* RateTable::classify(const std::string& activity_name) const {
    std::string low = to_lower(activity_name);
    for (const auto& c : categories)
        if (matches_keyword(low, c.keywords)) return &c;
    return nullptr;
}

double RateTable::rate(const std::string& activity_name, const std::string& kind) const {
    const Category* c = classify(activity_name);
    if (c) {
        auto f = c->forced.find(kind);
        if (f != c->forced.end()) return f->second;
    }
    auto b = base.find(kind);
    double r = b == base.end() ? 0.0 : b->second;
    if (c) {
        auto m = c->multipliers.find(kind);
        if (m != c->multipliers.end()) r *= m->second;
    }
    return std::min(r, 1.0);
}

HealthCoeffs HealthCoeffs::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open health coefficients: " + path.string());
    Json j = Json::parse(in);
    HealthCoeffs t;
    t.base_steps = j.value("base_steps", 3000);
    t.base_dist_hm = j.value("base_dist_hm", 20);
    t.base_kcal = j.value("base_kcal", 160);
    for (const auto& cj : j.value("categories", Json::array())) {
        Category c;
        c.name = cj.value("name", std::string{});
        for (const auto& k : cj.value("keywords", Json::array()))
            c.keywords.push_back(k.get<std::string>());
        c.steps_per_hour = cj.value("steps_per_hour", 0);
        c.dist_hm_per_hour = cj.value("dist_hm_per_hour", 0);
        c.kcal_per_hour = cj.value("kcal_per_hour", 0);
        c.exercise = cj.value("exercise", false);
        c.sport = cj.value("sport", std::string{});
        t.categories.push_back(std::move(c));
    }
    return t;
}

const HealthCoeffs::Category* HealthCoeffs::classify(const std::string& activity_name) const {
    std::string low = to_lower(activity_name);
    for (const auto& c : categories)
        if (matches_keyword(low, c.keywords)) return &c;
    return nullptr;
}

DayAggregates aggregate_day(const HealthCoeffs& coeffs,
                            const std::vector<DailyActivity>& day) {
    DayAggregates agg;
    agg.steps = coeffs.base_steps;
    agg.distance_hm = coeffs.base_dist_hm;
    agg.calories = coeffs.base_kcal;
    std::set<int64_t> hours;
    for (const auto& a : day) {
        int minutes = static_cast<int>((a.end - a.start) / 60);
        for (Timestamp h = a.start / 3600; h <= (a.end - 1) / 3600; ++h) hours.insert(h);
        const auto* c = coeffs.classify(a.name);
        if (!c) continue;
        agg.steps += c->steps_per_hour * minutes / 60;
        agg.distance_hm += c->dist_hm_per_hour * minutes / 60;
        agg.calories += c->kcal_per_hour * minutes / 60;
        if (c->exercise) agg.exercise_min += minutes;
    }
    agg.active_hours = static_cast<int>(hours.size());
    return agg;
}

ArtifactGenerator::ArtifactGenerator(gen::GenBackend& backend, RateTable rates,
                                     HealthCoeffs coeffs, ArtifactConfig cfg)
    : backend_(backend), rates_(std::move(rates)), coeffs_(std::move(coeffs)), cfg_(cfg) {}

std::vector<Contact> ArtifactGenerator::generate_contacts(const Persona& p) const {
    std::vector<Contact> contacts;
    int i = 0;
    for (const auto* r : p.all_relations()) {
        Rng rng(cfg_.seed, "contact", cfg_.user_id + "/" + r->name);
        Contact c;
        c.name = r->name;
        c.relation = r->relation;
        c.gender = r->gender;
        c.nickname = r->nickname;
        std::string num = "852";
        for (int k = 0; k < 8; ++k) num.push_back(static_cast<char>('0' + rng.next_below(10)));
        c.phone_number = num;
        std::string slug;
        for (char ch : r->name)
            if (std::isalnum(static_cast<unsigned char>(ch)))
                slug.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        c.personal_email = slug + "_hk@mailhaven.com";
        c.work_email = slug + "@" + (r->organization.empty() ? "workmail" : "corpmail") + ".com";
        std::string birth_digits;
        for (char ch : r->birth_date)
            if (std::isdigit(static_cast<unsigned char>(ch))) birth_digits.push_back(ch);
        c.id_number = "8101" + birth_digits;
        for (int k = 0; k < 4; ++k)
            c.id_number.push_back(static_cast<char>('0' + rng.next_below(10)));
        c.phone_id = std::to_string(i++);
        contacts.push_back(std::move(c));
    }
    return contacts;
}

std::vector<PhoneArtifact> ArtifactGenerator::generate_phone_day(
    const std::vector<DailyActivity>& day, const Persona& p,
    const outline::ContextFactors& ctx, Day date) const {
    std::vector<PhoneArtifact> out;
    Json mini = persona_mini(p);
    std::string date_s = format_date(date);
    (void)ctx;

    static const char* kKinds[] = {"call", "sms",  "calendar", "agent_chat",
                                   "photo", "note", "push"};

    auto contact_for = [&](const DailyActivity& a, Rng& rng) -> Json {
        // Prefer a participant who is a known relation.
        for (const auto& part : a.participants) {
            if (part.name == p.name) continue;
            if (const RelationEntry* r = p.find_relation(part.name)) {
                Rng crng(cfg_.seed, "contact", cfg_.user_id + "/" + r->name);
                std::string num = "852";
                for (int k = 0; k < 8; ++k)
                    num.push_back(static_cast<char>('0' + crng.next_below(10)));
                return Json{{"name", r->name}, {"phoneNumber", num}};
            }
        }
        auto rels = p.all_relations();
        if (rels.empty()) return Json::object();
        const auto* r = rels[rng.next_below(rels.size())];
        Rng crng(cfg_.seed, "contact", cfg_.user_id + "/" + r->name);
        std::string num = "852";
        for (int k = 0; k < 8; ++k) num.push_back(static_cast<char>('0' + crng.next_below(10)));
        return Json{{"name", r->name}, {"phoneNumber", num}};
    };

    for (const auto& a : day) {
        std::string entity = cfg_.user_id + "/" + a.activity_id;
        Rng rng(cfg_.seed, "artifact_sample", entity);
        for (const char* kind : kKinds) {
            if (!rng.chance(rates_.rate(a.name, kind))) continue;
            gen::GenRequest req;
            req.stage = "artifact";
            req.seed = gen::derive_seed(cfg_.seed, std::string("artifact/") + kind, entity);
            req.response_schema = "artifact";
            req.add("kind", kind);
            req.add_json("activity", activity_payload(a));
            req.add_json("persona", mini);
            req.add_json("contact", contact_for(a, rng));
            std::string event_ref =
                a.parent_event_id.empty() ? a.activity_id : a.parent_event_id;
            req.add("event_id", event_ref);
            // Malformed output gets two regeneration attempts before giving up.
            for (int attempt = 0; attempt < 3; ++attempt) {
                try {
                    Json doc = backend_.generate(req);
                    out.push_back(artifact_from_json(doc));
                    break;
                } catch (const std::exception&) {
                    if (attempt == 2) break;
                    req.seed = gen::derive_seed(req.seed, "retry", entity);
                }
            }
        }
    }

    // Topic SMS unrelated to personal events.
    Rng topic_rng(cfg_.seed, "topic_sms", cfg_.user_id + "/" + date_s);
    int n_topic = topic_rng.next_poisson(rates_.topic_sms_per_day);
    for (int i = 0; i < n_topic; ++i) {
        DailyActivity anchor_act;
        anchor_act.date = date;
        anchor_act.start = static_cast<Timestamp>(date) * kSecondsPerDay +
                           topic_rng.next_int(9, 21) * 3600;
        anchor_act.end = anchor_act.start + 600;
        gen::GenRequest req;
        req.stage = "artifact";
        req.seed = gen::derive_seed(cfg_.seed, "topic_sms",
                                    cfg_.user_id + "/" + date_s + "/" + std::to_string(i));
        req.response_schema = "artifact";
        req.add("kind", "sms_topic");
        req.add_json("activity", activity_payload(anchor_act));
        req.add_json("persona", mini);
        Rng crng(cfg_.seed, "topic_contact", date_s + std::to_string(i));
        req.add_json("contact", contact_for(anchor_act, crng));
        req.add("event_id", "");
        out.push_back(artifact_from_json(backend_.generate(req)));
    }

    // Scheduled subscription pushes fire every day.
    for (size_t i = 0; i < rates_.subscriptions.size(); ++i) {
        const auto& sub = rates_.subscriptions[i];
        Rng rng(cfg_.seed, "subscription", cfg_.user_id + "/" + date_s + "/" + sub.source);
        Push push;
        push.event_id = std::nullopt;
        push.title = sub.source + ": " + sub.title;
        push.content = "[" + sub.source + "] " + sub.title + ".";
        push.datetime = static_cast<Timestamp>(date) * kSecondsPerDay + sub.hour * 3600 +
                        rng.next_int(0, 29) * 60;
        push.source = sub.source;
        push.push_status = rng.chance(0.6) ? "Unread" : "Read";
        push.jump_path = sub.source + " to Home";
        push.summarized_info =
            "I received the daily update from " + sub.source + ": " + sub.title + ".";
        out.push_back(push);
    }
    return out;
}

std::vector<PhoneArtifact> ArtifactGenerator::generate_noise_day(
    const Persona& p, const outline::ContextFactors& ctx, Day date) const {
    std::vector<PhoneArtifact> out;
    if (!cfg_.noise_enabled) return out;
    (void)ctx;
    Json mini = persona_mini(p);
    std::string date_s = format_date(date);
    for (const auto& [kind, mean] : rates_.noise_per_day) {
        Rng rng(cfg_.seed, "noise_count", cfg_.user_id + "/" + date_s + "/" + kind);
        int n = rng.next_poisson(mean);
        for (int i = 0; i < n; ++i) {
            gen::GenRequest req;
            req.stage = "noise";
            req.seed = gen::derive_seed(
                cfg_.seed, "noise", cfg_.user_id + "/" + date_s + "/" + kind + "/" +
                                        std::to_string(i));
            req.response_schema = "artifact";
            req.add("kind", kind);
            req.add_json("persona", mini);
            req.add("date", date_s);
            out.push_back(artifact_from_json(backend_.generate(req)));
        }
    }
    return out;
}

HealthRecord ArtifactGenerator::generate_health_day(const std::vector<DailyActivity>& day,
                                                    const Persona& p,
                                                    const outline::ContextFactors& ctx,
                                                    Day date) const {
    Rng rng(cfg_.seed, "health", cfg_.user_id + "/" + format_date(date));
    HealthRecord h;
    h.date = date;
    h.city = p.home_address.city;

    DayAggregates agg = aggregate_day(coeffs_, day);
    h.steps = agg.steps;
    h.distance_hm = agg.distance_hm;
    h.calories = agg.calories;
    h.exercise_min = agg.exercise_min;
    h.active_hours = agg.active_hours;

    std::string weather = ctx.weather.empty() ? "Sunny" : ctx.weather;
    weather[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(weather[0])));

    // Sport blocks: populated only when a matching activity exists; all
    // contributions share the coefficient table with the aggregates.
    for (const auto& a : day) {
        const auto* c = coeffs_.classify(a.name);
        if (!c || c->sport.empty()) continue;
        int minutes = static_cast<int>((a.end - a.start) / 60);
        int dist = c->dist_hm_per_hour * minutes / 60;
        int kcal = c->kcal_per_hour * minutes / 60;
        int steps = c->steps_per_hour * minutes / 60;
        if (c->sport == "running") {
            auto& b = h.running;
            if (!b.present) {
                b.present = true;
                b.window = {a.start, a.end};
                b.sport_type = weather == "Rainy" ? "Indoor Running" : "Outdoor Running";
                b.weather = weather;
                b.avg_heart_rate = 128 + rng.next_int(0, 14);
                b.avg_cadence = 160 + rng.next_int(0, 10);
                b.avg_pace_s = 360;
                b.best_pace_s = 345 - rng.next_int(0, 15);
            }
            b.window.end = std::max(b.window.end, a.end);
            b.distance_hm += dist;
            b.calories += kcal;
            b.total_steps += steps;
        } else if (c->sport == "cycling") {
            auto& b = h.cycling;
            if (!b.present) {
                b.present = true;
                b.window = {a.start, a.end};
                b.weather = weather;
                b.avg_speed_kmh = 16;
                b.avg_heart_rate = 118 + rng.next_int(0, 12);
                b.avg_cadence = 75 + rng.next_int(0, 10);
                b.avg_power_w = 120 + rng.next_int(0, 40);
                b.best_speed_kmh = 24 + rng.next_int(0, 8);
                b.max_cadence = 95 + rng.next_int(0, 10);
            }
            b.window.end = std::max(b.window.end, a.end);
            b.distance_hm += dist;
            b.calories += kcal;
        } else if (c->sport == "walking") {
            auto& b = h.walking;
            if (!b.present) {
                b.present = true;
                b.window = {a.start, a.end};
                b.weather = weather;
                b.avg_heart_rate = 92 + rng.next_int(0, 10);
                b.avg_cadence = 105 + rng.next_int(0, 10);
                b.avg_pace_s = 750;
                b.best_pace_s = 660;
            }
            b.window.end = std::max(b.window.end, a.end);
            b.distance_hm += dist;
            b.calories += kcal;
            b.total_steps += steps;
        }
    }

    // Sleep window hugs the day's first and last activity.
    Timestamp day0 = static_cast<Timestamp>(date) * kSecondsPerDay;
    int wake_min = 7 * 60;
    int bed_min = 22 * 60 + 45;
    if (!day.empty()) {
        int first_min = second_of_day(day.front().start) / 60;
        int last_min = second_of_day(day.back().end) / 60;
        if (last_min == 0) last_min = 24 * 60 - 30;
        wake_min = std::clamp(first_min - 45, 5 * 60, 9 * 60);
        bed_min = std::clamp(last_min + 30, 21 * 60, 24 * 60 - 5);
    }
    auto& s = h.sleep;
    s.bedtime_s = bed_min * 60;
    s.wake_s = wake_min * 60;
    s.awake_min = 10 + rng.next_int(0, 25);
    int window_min = (24 * 60 - bed_min) + wake_min;
    s.total_min = window_min - s.awake_min;
    s.deep_min = s.total_min * 30 / 100;
    s.rem_min = s.total_min * 20 / 100;
    s.light_min = s.total_min - s.deep_min - s.rem_min;
    s.awakenings = rng.next_int(0, 3);
    s.deep_continuity_score = 75 + rng.next_int(0, 20);
    s.sleep_score = 78 + rng.next_int(0, 17);
    s.nap_min = weekday_of(date) >= 5 ? rng.next_int(0, 40) : 0;

    h.avg_heart_rate = 72 + rng.next_int(0, 12);
    h.resting_heart_rate = 58 + rng.next_int(0, 8);
    h.hrv_ms = 38 + rng.next_int(0, 18);
    h.body_temp_dc = 362 + rng.next_int(0, 6);
    h.glucose_dmmol = 48 + rng.next_int(0, 9);
    h.weight_hg = static_cast<int>(p.weight_kg * 10 + 0.5) + rng.next_int(-3, 3);
    h.stress_score = ctx.stress == "high" ? 65 + rng.next_int(0, 15)
                     : ctx.stress == "medium" ? 40 + rng.next_int(0, 15)
                                              : 20 + rng.next_int(0, 12);
    h.diet_kcal = 1500 + rng.next_int(0, 600);

    for (const auto& a : day) {
        const auto* c = coeffs_.classify(a.name);
        if (c && c->exercise)
            h.interactions.push_back(
                {a.start, "Started recording " + a.name + " with the smart watch"});
    }
    h.interactions.push_back(
        {day0 + 21 * 3600 + 30 * 60, "Checked the summary of today's steps and calorie burn"});

    // summarized_info via the generation backend.
    Json stats;
    stats["steps"] = h.steps;
    stats["distance_km"] = format_km(h.distance_hm);
    stats["calories"] = h.calories;
    stats["running_km"] = format_km(h.running.distance_hm);
    stats["sleep_score"] = s.sleep_score;
    stats["sleep_minutes"] = s.total_min;
    stats["stress"] = h.stress_score;
    Json mains = Json::array();
    for (size_t i = 0; i < day.size() && i < 3; ++i) mains.push_back(day[i].name);
    stats["main_activities"] = mains;

    gen::GenRequest req;
    req.stage = "health_summary";
    req.seed = gen::derive_seed(cfg_.seed, "health_summary",
                                cfg_.user_id + "/" + format_date(date));
    req.response_schema = "text";
    req.add_json("stats", stats);
    req.add_json("persona", persona_mini(p));
    req.add("date", format_date(date));
    h.summarized_info = backend_.generate(req).value("text", "");
    return h;
}

MonthlySummary ArtifactGenerator::summarize_month(const std::string& user_id, int year,
                                                  int month,
                                                  const std::vector<DailyActivity>& activities,
                                                  const std::vector<HealthRecord>& health) const {
    Day m0 = days_from_civil(year, month, 1);
    Day m1 = m0 + days_in_month(year, month) - 1;

    int running = 0, yoga = 0, walking = 0, exercise_sessions = 0, activity_count = 0;
    int running_hm = 0;
    for (const auto& a : activities) {
        if (a.date < m0 || a.date > m1) continue;
        ++activity_count;
        const auto* c = coeffs_.classify(a.name);
        if (!c) continue;
        int minutes = static_cast<int>((a.end - a.start) / 60);
        if (c->sport == "running") {
            ++running;
            running_hm += c->dist_hm_per_hour * minutes / 60;
        } else if (c->sport == "walking" && c->exercise) {
            ++walking;
        } else if (to_lower(a.name).find("yoga") != std::string::npos) {
            ++yoga;
        }
        if (c->exercise) ++exercise_sessions;
    }
    int64_t steps_total = 0;
    int sleep_total = 0, sleep_days = 0, irregular = 0;
    for (const auto& hr : health) {
        if (hr.date < m0 || hr.date > m1) continue;
        steps_total += hr.steps;
        sleep_total += hr.sleep.total_min;
        ++sleep_days;
        if (hr.sleep.bedtime_s > (23 * 60 + 30) * 60) ++irregular;
    }

    Json stats;
    stats["running_sessions"] = running;
    stats["running_distance_km"] = format_km(running_hm);
    stats["yoga_sessions"] = yoga;
    stats["walking_sessions"] = walking;
    stats["exercise_sessions"] = exercise_sessions;
    stats["activity_count"] = activity_count;
    stats["steps_total"] = steps_total;
    stats["sleep_avg_min"] = sleep_days ? sleep_total / sleep_days : 0;
    stats["irregular_days"] = irregular;
    stats["abnormal"] = Json::array();

    gen::GenRequest req;
    req.stage = "monthly_summary";
    req.seed = gen::derive_seed(cfg_.seed, "monthly_summary",
                                user_id + "/" + format_month(year, month));
    req.response_schema = "summary_sections";
    req.add_json("stats", stats);
    req.add("user", user_id);
    req.add("month", format_month(year, month));
    Json out = backend_.generate(req);

    MonthlySummary m;
    m.user_id = user_id;
    m.month = format_month(year, month);
    for (auto it = out["sections"].begin(); it != out["sections"].end(); ++it)
        m.sections.emplace_back(it.key(), it.value().get<std::string>());
    int words = 0;
    for (const auto& [k, v] : m.sections) words += static_cast<int>(gen::approx_tokens(v));
    m.word_count = words;
    return m;
}

void assign_phone_ids(std::vector<PhoneArtifact>& artifacts) {
    std::stable_sort(artifacts.begin(), artifacts.end(),
                     [](const PhoneArtifact& a, const PhoneArtifact& b) {
                         Timestamp ta = artifact_time(a), tb = artifact_time(b);
                         if (ta != tb) return ta < tb;
                         std::string ka = artifact_kind(a), kb = artifact_kind(b);
                         if (ka != kb) return ka < kb;
                         return to_json(a).dump() < to_json(b).dump();
                     });
    std::map<std::string, int64_t> counters;
    for (auto& a : artifacts) {
        int64_t id = counters[artifact_kind(a)]++;
        std::visit(
            [&](auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Contact>) v.phone_id = std::to_string(id);
                else v.phone_id = id;
            },
            a);
    }
}

void assign_health_ids(std::vector<HealthRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const HealthRecord& a, const HealthRecord& b) { return a.date < b.date; });
    for (size_t i = 0; i < records.size(); ++i) records[i].phone_id = static_cast<int64_t>(i);
}

}  // namespace lifeforge::artifacts
