#include "lifeforge/types.hpp"

#include <cstdio>
#include <sstream>

namespace lifeforge {

namespace {

std::string get_str(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
}

int64_t get_int(const Json& j, const char* key, int64_t fallback = 0) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (it->is_number()) return it->get<int64_t>();
    if (it->is_string()) {
        try {
            return std::stoll(it->get<std::string>());
        } catch (...) {
            return fallback;
        }
    }
    return fallback;
}

double get_num(const Json& j, const char* key, double fallback = 0.0) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) return fallback;
    return it->get<double>();
}

std::vector<std::string> get_str_list(const Json& j, const char* key) {
    std::vector<std::string> out;
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) return out;
    for (const auto& v : *it)
        if (v.is_string()) out.push_back(v.get<std::string>());
    return out;
}

Timestamp get_ts(const Json& j, const char* key) {
    auto t = parse_timestamp(get_str(j, key));
    return t ? *t : 0;
}

std::optional<std::string> get_event_id(const Json& j) {
    auto it = j.find("event_id");
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<int64_t>());
    return std::nullopt;
}

Json event_id_json(const std::optional<std::string>& id) {
    if (!id) return nullptr;
    return *id;
}

// Leading count formatted with a unit suffix, e.g. "8560 steps".
std::string with_unit(int64_t v, const char* unit) {
    return std::to_string(v) + " " + unit;
}

int parse_count(const Json& j, const char* key) {
    auto s = get_str(j, key);
    try {
        return std::stoi(s);
    } catch (...) {
        return 0;
    }
}

int parse_hm(const Json& j, const char* key) {  // "6.2 km" -> 62
    auto s = get_str(j, key);
    double km = 0.0;
    if (std::sscanf(s.c_str(), "%lf", &km) != 1) return 0;
    return static_cast<int>(km * 10.0 + 0.5);
}

int parse_pace(const Json& j, const char* key) {  // "06:00 min/km" -> 360
    auto s = get_str(j, key);
    int m = 0, sec = 0;
    if (std::sscanf(s.c_str(), "%d:%d", &m, &sec) != 2) return 0;
    return m * 60 + sec;
}

SportWindow parse_sport_window(const Json& j, const char* key) {
    auto s = get_str(j, key);
    int y0, mo0, d0, h0, mi0, s0, y1, mo1, d1, h1, mi1, s1;
    if (std::sscanf(s.c_str(), "%d/%d/%d/%d:%d:%d-%d/%d/%d/%d:%d:%d", &y0, &mo0, &d0, &h0,
                    &mi0, &s0, &y1, &mo1, &d1, &h1, &mi1, &s1) != 12)
        return {};
    return {make_timestamp(y0, mo0, d0, h0, mi0, s0), make_timestamp(y1, mo1, d1, h1, mi1, s1)};
}

std::string sport_window_str(const SportWindow& w, Day record_day, bool present) {
    if (!present) {
        std::string z = format_slash_time(static_cast<Timestamp>(record_day) * kSecondsPerDay);
        return z + "-" + z;
    }
    return format_slash_time(w.start) + "-" + format_slash_time(w.end);
}

int parse_clock_s(const Json& j, const char* key) {  // "22:45:00" -> seconds of day
    auto s = get_str(j, key);
    int h = 0, m = 0, sec = 0;
    if (std::sscanf(s.c_str(), "%d:%d:%d", &h, &m, &sec) < 2) return 0;
    return h * 3600 + m * 60 + sec;
}

}  // namespace

// ---------------------------------------------------------------- addresses

std::string StructuredAddress::formatted() const {
    // "No. 128 Carpenter Road, Kowloon City District, Hong Kong SAR" ordering.
    std::string out = street_number.empty() ? street_name
                      : street_name.empty() ? street_number
                                            : street_number + " " + street_name;
    for (const auto* part : {&district, &province}) {
        if (part->empty()) continue;
        if (!out.empty()) out += ", ";
        out += *part;
    }
    return out;
}

Json to_json(const StructuredAddress& a) {
    Json j;
    j["province"] = a.province;
    j["city"] = a.city;
    j["district"] = a.district;
    if (!a.street_name.empty()) j["street_name"] = a.street_name;
    if (!a.street_number.empty()) j["street_number"] = a.street_number;
    return j;
}

StructuredAddress address_from_json(const Json& j) {
    StructuredAddress a;
    a.province = get_str(j, "province");
    a.city = get_str(j, "city");
    a.district = get_str(j, "district");
    a.street_name = get_str(j, "street_name");
    a.street_number = get_str(j, "street_number");
    return a;
}

Json to_json(const AnchorLocation& a) {
    Json j;
    j["name"] = a.name;
    j["location"] = format_lonlat(a.lon, a.lat);
    j["formatted_address"] = a.formatted_address;
    j["city"] = Json::array();
    j["district"] = a.district;
    j["streetName"] = a.street_name;
    j["streetNumber"] = a.street_number;
    j["description"] = a.description;
    return j;
}

AnchorLocation anchor_from_json(const Json& j) {
    AnchorLocation a;
    a.name = get_str(j, "name");
    auto loc = get_str(j, "location");
    std::sscanf(loc.c_str(), "%lf,%lf", &a.lon, &a.lat);
    a.formatted_address = get_str(j, "formatted_address");
    a.district = get_str(j, "district");
    a.street_name = get_str(j, "streetName");
    a.street_number = get_str(j, "streetNumber");
    a.description = get_str(j, "description");
    return a;
}

// ------------------------------------------------------------------ persona

Json to_json(const RelationEntry& r) {
    Json j;
    j["name"] = r.name;
    j["relation"] = r.relation;
    j["social circle"] = r.social_circle;
    j["gender"] = r.gender;
    j["age"] = r.age;
    j["birth_date"] = r.birth_date;
    j["home_address"] = to_json(r.home_address);
    j["birth_place"] = to_json(r.birth_place);
    j["personality"] = r.personality;
    j["economic_level"] = r.economic_level;
    j["occupation"] = r.occupation;
    j["organization"] = r.organization;
    j["nickname"] = r.nickname;
    j["relation_description"] = r.relation_description;
    return j;
}

RelationEntry relation_from_json(const Json& j) {
    RelationEntry r;
    r.name = get_str(j, "name");
    r.relation = get_str(j, "relation");
    r.social_circle = get_str(j, "social circle");
    r.gender = get_str(j, "gender");
    r.age = static_cast<int>(get_int(j, "age"));
    r.birth_date = get_str(j, "birth_date");
    if (j.contains("home_address")) r.home_address = address_from_json(j["home_address"]);
    if (j.contains("birth_place")) r.birth_place = address_from_json(j["birth_place"]);
    r.personality = get_str(j, "personality");
    r.economic_level = get_str(j, "economic_level");
    r.occupation = get_str(j, "occupation");
    r.organization = get_str(j, "organization");
    r.nickname = get_str(j, "nickname");
    r.relation_description = get_str(j, "relation_description");
    return r;
}

std::vector<const RelationEntry*> Persona::all_relations() const {
    std::vector<const RelationEntry*> out;
    for (const auto& circle : relation)
        for (const auto& r : circle) out.push_back(&r);
    return out;
}

const RelationEntry* Persona::find_relation(const std::string& who) const {
    for (const auto& circle : relation)
        for (const auto& r : circle)
            if (r.name == who) return &r;
    return nullptr;
}

Json to_json(const Persona& p) {
    Json j;
    j["name"] = p.name;
    j["birth"] = p.birth;
    j["age"] = p.age;
    j["nationality"] = p.nationality;
    j["home_address"] = to_json(p.home_address);
    j["birth_place"] = to_json(p.birth_place);
    j["gender"] = p.gender;
    j["education"] = p.education;
    j["job"] = p.job;
    j["occupation"] = p.occupation;
    j["workplace"] = to_json(p.workplace);
    j["belief"] = p.belief;
    j["salary"] = p.salary;
    j["body"] = Json{{"height", p.height_cm}, {"weight", p.weight_kg}, {"BMI", p.bmi}};
    j["family"] = p.family;
    j["personality"] = Json{{"mbti", p.mbti}, {"traits", p.traits}};
    j["hobbies"] = p.hobbies;
    j["favorite_foods"] = p.favorite_foods;
    j["memory_date"] = p.memory_date;
    j["aim"] = p.aim;
    j["healthy_desc"] = p.healthy_desc;
    j["lifestyle_desc"] = p.lifestyle_desc;
    j["economic_desc"] = p.economic_desc;
    j["work_desc"] = p.work_desc;
    j["experience_desc"] = p.experience_desc;
    j["description"] = p.description;
    Json circles = Json::array();
    for (const auto& circle : p.relation) {
        Json arr = Json::array();
        for (const auto& r : circle) arr.push_back(to_json(r));
        circles.push_back(arr);
    }
    j["relation"] = circles;
    return j;
}

Persona persona_from_json(const Json& j) {
    Persona p;
    p.name = get_str(j, "name");
    p.birth = get_str(j, "birth");
    p.age = static_cast<int>(get_int(j, "age"));
    p.nationality = get_str(j, "nationality");
    if (j.contains("home_address")) p.home_address = address_from_json(j["home_address"]);
    if (j.contains("birth_place")) p.birth_place = address_from_json(j["birth_place"]);
    p.gender = get_str(j, "gender");
    p.education = get_str(j, "education");
    p.job = get_str(j, "job");
    p.occupation = get_str(j, "occupation");
    if (j.contains("workplace")) p.workplace = address_from_json(j["workplace"]);
    p.belief = get_str(j, "belief");
    p.salary = get_num(j, "salary");
    if (j.contains("body")) {
        const auto& b = j["body"];
        p.height_cm = static_cast<int>(get_int(b, "height"));
        p.weight_kg = get_num(b, "weight");
        p.bmi = get_num(b, "BMI");
    }
    p.family = get_str(j, "family");
    if (j.contains("personality")) {
        p.mbti = get_str(j["personality"], "mbti");
        p.traits = get_str_list(j["personality"], "traits");
    }
    p.hobbies = get_str_list(j, "hobbies");
    p.favorite_foods = get_str_list(j, "favorite_foods");
    p.memory_date = get_str_list(j, "memory_date");
    p.aim = get_str_list(j, "aim");
    p.healthy_desc = get_str(j, "healthy_desc");
    p.lifestyle_desc = get_str(j, "lifestyle_desc");
    p.economic_desc = get_str(j, "economic_desc");
    p.work_desc = get_str(j, "work_desc");
    p.experience_desc = get_str(j, "experience_desc");
    p.description = get_str(j, "description");
    if (j.contains("relation") && j["relation"].is_array()) {
        for (const auto& circle : j["relation"]) {
            if (!circle.is_array()) continue;
            std::vector<RelationEntry> group;
            for (const auto& r : circle) group.push_back(relation_from_json(r));
            p.relation.push_back(std::move(group));
        }
    }
    return p;
}

// -------------------------------------------------------------------- plots

const std::vector<std::string> kPlotCategories = {
    "work", "health", "finance", "relationship", "family", "education", "personal life"};

Json to_json(const Plot& p) {
    Json j;
    j["topic"] = p.topic;
    j["category"] = p.category;
    j["priority"] = p.priority;
    j["detailed_description"] = p.detailed_description;
    Json months = Json::array();
    for (const auto& m : p.monthly_description) {
        Json mj;
        mj["month"] = m.month;
        mj["content"] = m.content;
        mj["impact"] = m.impact;
        mj["core_events"] = m.core_events;
        months.push_back(mj);
    }
    j["monthly_description"] = months;
    return j;
}

Plot plot_from_json(const Json& j) {
    Plot p;
    p.topic = get_str(j, "topic");
    p.category = get_str(j, "category");
    p.priority = get_num(j, "priority", 1.0);
    p.detailed_description = get_str(j, "detailed_description");
    if (j.contains("monthly_description")) {
        for (const auto& mj : j["monthly_description"]) {
            PlotMonth m;
            m.month = get_str(mj, "month");
            m.content = get_str(mj, "content");
            m.impact = get_str(mj, "impact");
            m.core_events = get_str_list(mj, "core_events");
            p.monthly_description.push_back(std::move(m));
        }
    }
    return p;
}

// ------------------------------------------------------------------- events

namespace {

Json participants_json(const std::vector<Participant>& ps) {
    Json arr = Json::array();
    for (const auto& p : ps) arr.push_back(Json{{"name", p.name}, {"relation", p.relation}});
    return arr;
}

std::vector<Participant> participants_from_json(const Json& j) {
    std::vector<Participant> out;
    if (!j.is_array()) return out;
    for (const auto& p : j) out.push_back({get_str(p, "name"), get_str(p, "relation")});
    return out;
}

Json intervals_json(const std::vector<Interval>& ds) {
    Json arr = Json::array();
    for (const auto& d : ds) arr.push_back(format_interval(d.start, d.end));
    return arr;
}

std::vector<Interval> intervals_from_json(const Json& j) {
    std::vector<Interval> out;
    if (!j.is_array()) return out;
    for (const auto& s : j) {
        if (!s.is_string()) continue;
        if (auto iv = parse_interval(s.get<std::string>())) out.push_back({iv->first, iv->second});
    }
    return out;
}

void event_common_to_json(const EventNode& n, Json& j) {
    j["event_id"] = n.event_id;
    j["name"] = n.name;
    j["date"] = intervals_json(n.date);
    j["type"] = n.type;
    j["description"] = n.description;
    j["participant"] = participants_json(n.participant);
    j["location"] = n.location;
}

void event_common_from_json(const Json& j, EventNode& n) {
    n.event_id = get_event_id(j).value_or("");
    n.name = get_str(j, "name");
    if (j.contains("date")) n.date = intervals_from_json(j["date"]);
    n.type = get_str(j, "type");
    n.description = get_str(j, "description");
    if (j.contains("participant")) n.participant = participants_from_json(j["participant"]);
    n.location = get_str(j, "location");
}

}  // namespace

Json event_tree_to_json(const EventNode& n) {
    Json j;
    event_common_to_json(n, j);
    j["splittable"] = n.splittable;
    j["origin"] = n.origin;
    Json subs = Json::array();
    for (const auto& c : n.subevents) subs.push_back(event_tree_to_json(c));
    j["subevents"] = subs;
    return j;
}

EventNode event_tree_from_json(const Json& j) {
    EventNode n;
    event_common_from_json(j, n);
    n.splittable = j.value("splittable", false);
    n.origin = j.contains("origin") ? get_str(j, "origin") : "planned";
    if (j.contains("subevents"))
        for (const auto& c : j["subevents"]) n.subevents.push_back(event_tree_from_json(c));
    return n;
}

Json event_flat_to_json(const EventNode& n) {
    Json j;
    j["event_id"] = n.event_id;
    j["name"] = n.name;
    j["date"] = intervals_json(n.date);
    j["type"] = n.type;
    j["description"] = n.description;
    j["participant"] = participants_json(n.participant);
    j["location"] = n.location;
    return j;
}

EventNode event_flat_from_json(const Json& j) {
    EventNode n;
    event_common_from_json(j, n);
    n.splittable = false;
    return n;
}

void visit_events(const EventNode& root, const std::function<void(const EventNode&)>& fn) {
    fn(root);
    for (const auto& c : root.subevents) visit_events(c, fn);
}

std::vector<const EventNode*> collect_leaves(const EventNode& root) {
    std::vector<const EventNode*> out;
    visit_events(root, [&](const EventNode& n) {
        if (n.is_leaf()) out.push_back(&n);
    });
    return out;
}

// --------------------------------------------------------------- activities

std::string to_string(ActivitySource s) {
    switch (s) {
        case ActivitySource::scheduled_atomic: return "scheduled_atomic";
        case ActivitySource::supplementary: return "supplementary";
        case ActivitySource::routine: return "routine";
    }
    return "scheduled_atomic";
}

std::optional<ActivitySource> activity_source_from_string(const std::string& s) {
    if (s == "scheduled_atomic") return ActivitySource::scheduled_atomic;
    if (s == "supplementary") return ActivitySource::supplementary;
    if (s == "routine") return ActivitySource::routine;
    return std::nullopt;
}

Json to_json(const DailyActivity& a) {
    Json j;
    j["activity_id"] = a.activity_id;
    j["date"] = format_date(a.date);
    j["start"] = format_timestamp(a.start);
    j["end"] = format_timestamp(a.end);
    j["name"] = a.name;
    j["description"] = a.description;
    j["participants"] = participants_json(a.participants);
    j["location"] = a.location;
    if (!a.anchor_name.empty()) j["anchor_name"] = a.anchor_name;
    j["source"] = to_string(a.source);
    j["parent_event_id"] = a.parent_event_id.empty() ? Json(nullptr) : Json(a.parent_event_id);
    if (!a.link_id.empty()) j["link_id"] = a.link_id;
    return j;
}

DailyActivity activity_from_json(const Json& j) {
    DailyActivity a;
    a.activity_id = get_str(j, "activity_id");
    a.date = parse_date(get_str(j, "date")).value_or(0);
    a.start = get_ts(j, "start");
    a.end = get_ts(j, "end");
    a.name = get_str(j, "name");
    a.description = get_str(j, "description");
    if (j.contains("participants")) a.participants = participants_from_json(j["participants"]);
    a.location = get_str(j, "location");
    a.anchor_name = get_str(j, "anchor_name");
    a.source = activity_source_from_string(get_str(j, "source"))
                   .value_or(ActivitySource::scheduled_atomic);
    if (j.contains("parent_event_id") && !j["parent_event_id"].is_null())
        a.parent_event_id = get_str(j, "parent_event_id");
    a.link_id = get_str(j, "link_id");
    return a;
}

// ------------------------------------------------------------ phone artifacts

std::string artifact_kind(const PhoneArtifact& a) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Contact>) return "contact";
            else if constexpr (std::is_same_v<T, Call>) return "call";
            else if constexpr (std::is_same_v<T, Sms>) return "sms";
            else if constexpr (std::is_same_v<T, CalendarEntry>) return "calendar";
            else if constexpr (std::is_same_v<T, AgentChat>) return "agent_chat";
            else if constexpr (std::is_same_v<T, Photo>) return "photo";
            else if constexpr (std::is_same_v<T, Note>) return "note";
            else return "push";
        },
        a);
}

std::optional<std::string> artifact_event_id(const PhoneArtifact& a) {
    return std::visit(
        [](const auto& v) -> std::optional<std::string> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Contact>) return std::nullopt;
            else return v.event_id;
        },
        a);
}

Timestamp artifact_time(const PhoneArtifact& a) {
    return std::visit(
        [](const auto& v) -> Timestamp {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Contact>) return 0;
            else if constexpr (std::is_same_v<T, AgentChat>)
                return static_cast<Timestamp>(v.date) * kSecondsPerDay + 12 * 3600;
            else if constexpr (std::is_same_v<T, CalendarEntry>) return v.datetime;
            else return v.datetime;
        },
        a);
}

int64_t artifact_phone_id(const PhoneArtifact& a) {
    return std::visit(
        [](const auto& v) -> int64_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Contact>) {
                try {
                    return std::stoll(v.phone_id);
                } catch (...) {
                    return 0;
                }
            } else {
                return v.phone_id;
            }
        },
        a);
}

std::string artifact_text(const PhoneArtifact& a) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Contact>) {
                return "Contact " + v.name + " (" + v.relation + "), nickname " + v.nickname +
                       ", phone " + v.phone_number;
            } else if constexpr (std::is_same_v<T, Call>) {
                std::string dir = v.direction == 1 ? "Outgoing" : "Incoming";
                return dir + " call with " + v.contact_name + " at " +
                       format_timestamp(v.datetime) + ", " + v.call_result;
            } else if constexpr (std::is_same_v<T, Sms>) {
                return "SMS (" + v.message_type + ") with " + v.contact_name + " at " +
                       format_timestamp(v.datetime) + ": " + v.message_content;
            } else if constexpr (std::is_same_v<T, CalendarEntry>) {
                return v.summarized_info;
            } else if constexpr (std::is_same_v<T, AgentChat>) {
                std::string out = "Agent chat on " + format_date(v.date) + ".";
                for (const auto& t : v.turns) {
                    out += " User: " + t.user_content + " Assistant: " + t.assistant_content;
                }
                return out;
            } else if constexpr (std::is_same_v<T, Photo>) {
                return v.summarized_info;
            } else if constexpr (std::is_same_v<T, Note>) {
                return v.summarized_info;
            } else {
                return v.summarized_info;
            }
        },
        a);
}

Json to_json(const PhoneArtifact& a) {
    return std::visit(
        [](const auto& v) -> Json {
            using T = std::decay_t<decltype(v)>;
            Json j;
            if constexpr (std::is_same_v<T, Contact>) {
                j["name"] = v.name;
                j["relation"] = v.relation;
                j["gender"] = v.gender;
                j["nickname"] = v.nickname;
                j["phoneNumber"] = v.phone_number;
                j["personalEmail"] = v.personal_email;
                j["workEmail"] = v.work_email;
                j["idNumber"] = v.id_number;
                j["phone_id"] = v.phone_id;
            } else if constexpr (std::is_same_v<T, Call>) {
                j["type"] = "call";
                j["event_id"] = event_id_json(v.event_id);
                j["phoneNumber"] = v.phone_number;
                j["contactName"] = v.contact_name;
                j["datetime"] = format_timestamp(v.datetime);
                j["datetime_end"] = format_timestamp(v.datetime_end);
                j["direction"] = v.direction;
                j["call_result"] = v.call_result;
                j["phone_id"] = v.phone_id;
            } else if constexpr (std::is_same_v<T, Sms>) {
                j["type"] = "sms";
                j["event_id"] = event_id_json(v.event_id);
                j["message_content"] = v.message_content;
                j["contactName"] = v.contact_name;
                j["phoneNumber"] = v.phone_number;
                j["datetime"] = format_timestamp(v.datetime);
                j["message_type"] = v.message_type;
                j["phone_id"] = v.phone_id;
            } else if constexpr (std::is_same_v<T, CalendarEntry>) {
                j["type"] = "calendar";
                j["event_id"] = event_id_json(v.event_id);
                j["title"] = v.title;
                j["description"] = v.description;
                j["start_time"] = format_timestamp(v.start_time);
                j["end_time"] = format_timestamp(v.end_time);
                j["datetime"] = format_timestamp(v.datetime);
                j["summarized_info"] = v.summarized_info;
                j["phone_id"] = v.phone_id;
            } else if constexpr (std::is_same_v<T, AgentChat>) {
                j["event_id"] = event_id_json(v.event_id);
                j["date"] = format_date(v.date);
                j["type"] = "agent_chat";
                Json conv;
                for (size_t i = 0; i < v.turns.size(); ++i) {
                    const auto& t = v.turns[i];
                    Json turn;
                    turn["user"] = Json{{"action", t.user_action}, {"content", t.user_content}};
                    turn["assistant"] =
                        Json{{"action", t.assistant_action}, {"content", t.assistant_content}};
                    conv["turn " + std::to_string(i + 1)] = turn;
                }
                j["conversation"] = conv;
                j["phone_id"] = v.phone_id;
            } else if constexpr (std::is_same_v<T, Photo>) {
                j["event_id"] = event_id_json(v.event_id);
                j["type"] = "photo";
                j["caption"] = v.caption;
                j["title"] = v.title;
                j["datetime"] = format_timestamp(v.datetime);
                Json loc;
                loc["province"] = v.location.province;
                loc["city"] = v.location.city;
                loc["district"] = v.location.district;
                loc["streetName"] = v.location.street_name;
                loc["streetNumber"] = v.location.street_number;
                loc["poi"] = v.location.poi;
                j["location"] = loc;
                j["faceRecognition"] = v.face_recognition;
                j["imageTag"] = v.image_tags;
                j["ocrText"] = v.ocr_text;
                j["shoot_mode"] = v.shoot_mode;
                j["image_size"] = v.image_size;
                j["summarized_info"] = v.summarized_info;
                j["phone_id"] = v.phone_id;
            } else if constexpr (std::is_same_v<T, Note>) {
                j["type"] = "note";
                j["event_id"] = event_id_json(v.event_id);
                j["title"] = v.title;
                j["content"] = v.content;
                j["datetime"] = format_timestamp(v.datetime);
                j["summarized_info"] = v.summarized_info;
                j["phone_id"] = v.phone_id;
            } else {
                j["type"] = "push";
                j["event_id"] = event_id_json(v.event_id);
                j["title"] = v.title;
                j["content"] = v.content;
                j["datetime"] = format_timestamp(v.datetime);
                j["source"] = v.source;
                j["push_status"] = v.push_status;
                j["jump_path"] = v.jump_path;
                j["summarized_info"] = v.summarized_info;
                j["phone_id"] = v.phone_id;
            }
            return j;
        },
        a);
}

PhoneArtifact artifact_from_json(const Json& j) {
    std::string type = get_str(j, "type");
    if (type.empty() && j.contains("phoneNumber") && j.contains("idNumber")) type = "contact";
    if (type == "contact" || (type.empty() && j.contains("idNumber"))) {
        Contact c;
        c.name = get_str(j, "name");
        c.relation = get_str(j, "relation");
        c.gender = get_str(j, "gender");
        c.nickname = get_str(j, "nickname");
        c.phone_number = get_str(j, "phoneNumber");
        c.personal_email = get_str(j, "personalEmail");
        c.work_email = get_str(j, "workEmail");
        c.id_number = get_str(j, "idNumber");
        auto it = j.find("phone_id");
        c.phone_id = (it != j.end() && it->is_string()) ? it->get<std::string>()
                                                        : std::to_string(get_int(j, "phone_id"));
        return c;
    }
    if (type == "call") {
        Call c;
        c.event_id = get_event_id(j);
        c.phone_number = get_str(j, "phoneNumber");
        c.contact_name = get_str(j, "contactName");
        c.datetime = get_ts(j, "datetime");
        c.datetime_end = get_ts(j, "datetime_end");
        c.direction = static_cast<int>(get_int(j, "direction"));
        c.call_result = get_str(j, "call_result");
        c.phone_id = get_int(j, "phone_id");
        return c;
    }
    if (type == "sms") {
        Sms s;
        s.event_id = get_event_id(j);
        s.message_content = get_str(j, "message_content");
        s.contact_name = get_str(j, "contactName");
        s.phone_number = get_str(j, "phoneNumber");
        s.datetime = get_ts(j, "datetime");
        s.message_type = get_str(j, "message_type");
        s.phone_id = get_int(j, "phone_id");
        return s;
    }
    if (type == "calendar") {
        CalendarEntry c;
        c.event_id = get_event_id(j);
        c.title = get_str(j, "title");
        c.description = get_str(j, "description");
        c.start_time = get_ts(j, "start_time");
        c.end_time = get_ts(j, "end_time");
        c.datetime = get_ts(j, "datetime");
        c.summarized_info = get_str(j, "summarized_info");
        c.phone_id = get_int(j, "phone_id");
        return c;
    }
    if (type == "agent_chat") {
        AgentChat c;
        c.event_id = get_event_id(j);
        c.date = parse_date(get_str(j, "date")).value_or(0);
        if (j.contains("conversation")) {
            const auto& conv = j["conversation"];
            for (size_t i = 1;; ++i) {
                auto key = "turn " + std::to_string(i);
                if (!conv.contains(key)) break;
                const auto& t = conv[key];
                ChatTurn turn;
                if (t.contains("user")) {
                    turn.user_action = get_str(t["user"], "action");
                    turn.user_content = get_str(t["user"], "content");
                }
                if (t.contains("assistant")) {
                    turn.assistant_action = get_str(t["assistant"], "action");
                    turn.assistant_content = get_str(t["assistant"], "content");
                }
                c.turns.push_back(std::move(turn));
            }
        }
        c.phone_id = get_int(j, "phone_id");
        return c;
    }
    if (type == "photo") {
        Photo p;
        p.event_id = get_event_id(j);
        p.caption = get_str(j, "caption");
        p.title = get_str(j, "title");
        p.datetime = get_ts(j, "datetime");
        if (j.contains("location")) {
            const auto& l = j["location"];
            p.location.province = get_str(l, "province");
            p.location.city = get_str(l, "city");
            p.location.district = get_str(l, "district");
            p.location.street_name = get_str(l, "streetName");
            p.location.street_number = get_str(l, "streetNumber");
            p.location.poi = get_str(l, "poi");
        }
        p.face_recognition = get_str_list(j, "faceRecognition");
        p.image_tags = get_str_list(j, "imageTag");
        p.ocr_text = get_str(j, "ocrText");
        p.shoot_mode = get_str(j, "shoot_mode");
        p.image_size = get_str(j, "image_size");
        p.summarized_info = get_str(j, "summarized_info");
        p.phone_id = get_int(j, "phone_id");
        return p;
    }
    if (type == "note") {
        Note n;
        n.event_id = get_event_id(j);
        n.title = get_str(j, "title");
        n.content = get_str(j, "content");
        n.datetime = get_ts(j, "datetime");
        n.summarized_info = get_str(j, "summarized_info");
        n.phone_id = get_int(j, "phone_id");
        return n;
    }
    Push p;
    p.event_id = get_event_id(j);
    p.title = get_str(j, "title");
    p.content = get_str(j, "content");
    p.datetime = get_ts(j, "datetime");
    p.source = get_str(j, "source");
    p.push_status = get_str(j, "push_status");
    p.jump_path = get_str(j, "jump_path");
    p.summarized_info = get_str(j, "summarized_info");
    p.phone_id = get_int(j, "phone_id");
    return p;
}

// ------------------------------------------------------------ health records

Json to_json(const HealthRecord& h) {
    Json j;
    j["Date"] = format_date(h.date);
    j["City"] = h.city;
    j["Daily Activities"] = Json{{"Steps", with_unit(h.steps, "steps")},
                                 {"Distance", format_km(h.distance_hm)},
                                 {"Calories Burned", with_unit(h.calories, "kcal")},
                                 {"Exercise Duration", with_unit(h.exercise_min, "minutes")},
                                 {"Active Hours", with_unit(h.active_hours, "hours")}};
    {
        const auto& r = h.running;
        Json b;
        b["Sport Type"] = r.sport_type;
        b["Sport Time"] = sport_window_str(r.window, h.date, r.present);
        b["Weather"] = r.weather;
        b["Distance"] = format_km(r.distance_hm);
        b["Average Heart Rate"] = with_unit(r.avg_heart_rate, "bpm");
        b["Average Cadence"] = with_unit(r.avg_cadence, "spm");
        b["Elevation Gain"] = with_unit(r.elevation_gain_m, "m");
        b["Elevation Loss"] = with_unit(r.elevation_loss_m, "m");
        b["Average Pace"] = format_pace(r.avg_pace_s);
        b["Best Pace"] = format_pace(r.best_pace_s);
        b["Total Steps"] = with_unit(r.total_steps, "steps");
        b["Calories Burned"] = with_unit(r.calories, "kcal");
        j["Running"] = b;
    }
    {
        const auto& c = h.cycling;
        Json b;
        b["Sport Type"] = c.sport_type;
        b["Sport Time"] = sport_window_str(c.window, h.date, c.present);
        b["Weather"] = c.weather;
        b["Distance"] = format_km(c.distance_hm);
        b["Average Speed"] = with_unit(c.avg_speed_kmh, "km/h");
        b["Average Heart Rate"] = with_unit(c.avg_heart_rate, "bpm");
        b["Average Cadence"] = with_unit(c.avg_cadence, "rpm");
        b["Average Power"] = with_unit(c.avg_power_w, "W");
        b["Best Speed"] = with_unit(c.best_speed_kmh, "km/h");
        b["Max Cadence"] = with_unit(c.max_cadence, "rpm");
        b["Calories Burned"] = with_unit(c.calories, "kcal");
        j["Cycling"] = b;
    }
    {
        const auto& w = h.walking;
        Json b;
        b["Sport Type"] = w.sport_type;
        b["Sport Time"] = sport_window_str(w.window, h.date, w.present);
        b["Weather"] = w.weather;
        b["Distance"] = format_km(w.distance_hm);
        b["Average Heart Rate"] = with_unit(w.avg_heart_rate, "bpm");
        b["Average Cadence"] = with_unit(w.avg_cadence, "spm");
        b["Total Steps"] = with_unit(w.total_steps, "steps");
        b["Average Pace"] = format_pace(w.avg_pace_s);
        b["Best Pace"] = format_pace(w.best_pace_s);
        b["Calories Burned"] = with_unit(w.calories, "kcal");
        j["Walking"] = b;
    }
    {
        const auto& s = h.sleep;
        Json b;
        b["Bedtime"] = format_clock(s.bedtime_s);
        b["Wake-up Time"] = format_clock(s.wake_s);
        b["Total Sleep Duration"] = with_unit(s.total_min, "minutes");
        b["Light Sleep Duration"] = with_unit(s.light_min, "minutes");
        b["Deep Sleep Duration"] = with_unit(s.deep_min, "minutes");
        b["REM Sleep Duration"] = with_unit(s.rem_min, "minutes");
        b["Awake Duration"] = with_unit(s.awake_min, "minutes");
        b["Number of Awakenings"] = with_unit(s.awakenings, "times");
        b["Deep Sleep Continuity Score"] = with_unit(s.deep_continuity_score, "points");
        b["Sleep Score"] = with_unit(s.sleep_score, "points");
        b["Nap Duration"] = with_unit(s.nap_min, "minutes");
        j["Sleep"] = b;
    }
    j["Heart Rate Statistics"] =
        Json{{"Average Heart Rate", with_unit(h.avg_heart_rate, "bpm")},
             {"Average Resting Heart Rate", with_unit(h.resting_heart_rate, "bpm")},
             {"Heart Rate Variability", with_unit(h.hrv_ms, "ms")}};
    char temp[16];
    std::snprintf(temp, sizeof(temp), "%d.%d", h.body_temp_dc / 10, h.body_temp_dc % 10);
    j["Body Temperature Statistics"] = Json{{"Average Body Temperature", temp}};
    char glu[24];
    std::snprintf(glu, sizeof(glu), "%d.%d mmol/L", h.glucose_dmmol / 10, h.glucose_dmmol % 10);
    j["Blood Glucose Statistics"] = Json{{"Average Blood Glucose Level", glu}};
    char wt[24];
    std::snprintf(wt, sizeof(wt), "%d.%d kg", h.weight_hg / 10, h.weight_hg % 10);
    j["Body Weight"] = Json{{"Weight", wt}};
    j["Stress"] = Json{{"Stress Score", with_unit(h.stress_score, "points")}};
    j["Diet Record"] = Json{{"Calories Consumed", with_unit(h.diet_kcal, "kcal")}};
    Json evts = Json::array();
    for (const auto& e : h.interactions)
        evts.push_back(Json{{"Time", format_slash_minute(e.time)}, {"Description", e.description}});
    j["User Interaction Events"] = evts;
    j["summarized_info"] = h.summarized_info;
    j["phone_id"] = h.phone_id;
    return j;
}

HealthRecord health_from_json(const Json& j) {
    HealthRecord h;
    h.date = parse_date(get_str(j, "Date")).value_or(0);
    h.city = get_str(j, "City");
    if (j.contains("Daily Activities")) {
        const auto& d = j["Daily Activities"];
        h.steps = parse_count(d, "Steps");
        h.distance_hm = parse_hm(d, "Distance");
        h.calories = parse_count(d, "Calories Burned");
        h.exercise_min = parse_count(d, "Exercise Duration");
        h.active_hours = parse_count(d, "Active Hours");
    }
    if (j.contains("Running")) {
        const auto& b = j["Running"];
        auto& r = h.running;
        r.sport_type = get_str(b, "Sport Type");
        r.window = parse_sport_window(b, "Sport Time");
        r.weather = get_str(b, "Weather");
        r.distance_hm = parse_hm(b, "Distance");
        r.avg_heart_rate = parse_count(b, "Average Heart Rate");
        r.avg_cadence = parse_count(b, "Average Cadence");
        r.elevation_gain_m = parse_count(b, "Elevation Gain");
        r.elevation_loss_m = parse_count(b, "Elevation Loss");
        r.avg_pace_s = parse_pace(b, "Average Pace");
        r.best_pace_s = parse_pace(b, "Best Pace");
        r.total_steps = parse_count(b, "Total Steps");
        r.calories = parse_count(b, "Calories Burned");
        r.present = r.distance_hm > 0 || r.calories > 0;
    }
    if (j.contains("Cycling")) {
        const auto& b = j["Cycling"];
        auto& c = h.cycling;
        c.sport_type = get_str(b, "Sport Type");
        c.window = parse_sport_window(b, "Sport Time");
        c.weather = get_str(b, "Weather");
        c.distance_hm = parse_hm(b, "Distance");
        c.avg_speed_kmh = parse_count(b, "Average Speed");
        c.avg_heart_rate = parse_count(b, "Average Heart Rate");
        c.avg_cadence = parse_count(b, "Average Cadence");
        c.avg_power_w = parse_count(b, "Average Power");
        c.best_speed_kmh = parse_count(b, "Best Speed");
        c.max_cadence = parse_count(b, "Max Cadence");
        c.calories = parse_count(b, "Calories Burned");
        c.present = c.distance_hm > 0 || c.calories > 0;
    }
    if (j.contains("Walking")) {
        const auto& b = j["Walking"];
        auto& w = h.walking;
        w.sport_type = get_str(b, "Sport Type");
        w.window = parse_sport_window(b, "Sport Time");
        w.weather = get_str(b, "Weather");
        w.distance_hm = parse_hm(b, "Distance");
        w.avg_heart_rate = parse_count(b, "Average Heart Rate");
        w.avg_cadence = parse_count(b, "Average Cadence");
        w.total_steps = parse_count(b, "Total Steps");
        w.avg_pace_s = parse_pace(b, "Average Pace");
        w.best_pace_s = parse_pace(b, "Best Pace");
        w.calories = parse_count(b, "Calories Burned");
        w.present = w.distance_hm > 0 || w.calories > 0;
    }
    if (j.contains("Sleep")) {
        const auto& b = j["Sleep"];
        auto& s = h.sleep;
        s.bedtime_s = parse_clock_s(b, "Bedtime");
        s.wake_s = parse_clock_s(b, "Wake-up Time");
        s.total_min = parse_count(b, "Total Sleep Duration");
        s.light_min = parse_count(b, "Light Sleep Duration");
        s.deep_min = parse_count(b, "Deep Sleep Duration");
        s.rem_min = parse_count(b, "REM Sleep Duration");
        s.awake_min = parse_count(b, "Awake Duration");
        s.awakenings = parse_count(b, "Number of Awakenings");
        s.deep_continuity_score = parse_count(b, "Deep Sleep Continuity Score");
        s.sleep_score = parse_count(b, "Sleep Score");
        s.nap_min = parse_count(b, "Nap Duration");
    }
    if (j.contains("Heart Rate Statistics")) {
        const auto& b = j["Heart Rate Statistics"];
        h.avg_heart_rate = parse_count(b, "Average Heart Rate");
        h.resting_heart_rate = parse_count(b, "Average Resting Heart Rate");
        h.hrv_ms = parse_count(b, "Heart Rate Variability");
    }
    if (j.contains("Body Temperature Statistics")) {
        double t = 36.5;
        std::sscanf(get_str(j["Body Temperature Statistics"], "Average Body Temperature").c_str(),
                    "%lf", &t);
        h.body_temp_dc = static_cast<int>(t * 10 + 0.5);
    }
    if (j.contains("Blood Glucose Statistics")) {
        double g = 5.2;
        std::sscanf(get_str(j["Blood Glucose Statistics"], "Average Blood Glucose Level").c_str(),
                    "%lf", &g);
        h.glucose_dmmol = static_cast<int>(g * 10 + 0.5);
    }
    if (j.contains("Body Weight")) {
        double w = 0.0;
        std::sscanf(get_str(j["Body Weight"], "Weight").c_str(), "%lf", &w);
        h.weight_hg = static_cast<int>(w * 10 + 0.5);
    }
    if (j.contains("Stress")) h.stress_score = parse_count(j["Stress"], "Stress Score");
    if (j.contains("Diet Record")) h.diet_kcal = parse_count(j["Diet Record"], "Calories Consumed");
    if (j.contains("User Interaction Events")) {
        for (const auto& e : j["User Interaction Events"]) {
            InteractionEvent ev;
            int y, mo, d, hh, mi;
            auto s = get_str(e, "Time");
            if (std::sscanf(s.c_str(), "%d/%d/%d %d:%d", &y, &mo, &d, &hh, &mi) == 5)
                ev.time = make_timestamp(y, mo, d, hh, mi, 0);
            ev.description = get_str(e, "Description");
            h.interactions.push_back(std::move(ev));
        }
    }
    h.summarized_info = get_str(j, "summarized_info");
    h.phone_id = get_int(j, "phone_id");
    return h;
}

// ---------------------------------------------------------- monthly summary

Json to_json(const MonthlySummary& m) {
    Json j;
    j["user_id"] = m.user_id;
    j["month"] = m.month;
    Json sections;
    for (const auto& [k, v] : m.sections) sections[k] = v;
    j["sections"] = sections;
    j["word_count"] = m.word_count;
    return j;
}

MonthlySummary summary_from_json(const Json& j) {
    MonthlySummary m;
    m.user_id = get_str(j, "user_id");
    m.month = get_str(j, "month");
    if (j.contains("sections"))
        for (auto it = j["sections"].begin(); it != j["sections"].end(); ++it)
            m.sections.emplace_back(it.key(), it.value().get<std::string>());
    m.word_count = static_cast<int>(get_int(j, "word_count"));
    return m;
}

// ----------------------------------------------------------------------- QA

std::string to_string(QaFormat f) {
    return f == QaFormat::multiple_choice ? "multiple_choice" : "short_answer";
}

Json to_json(const QAItem& q) {
    Json j;
    j["question"] = q.question;
    j["format"] = to_string(q.format);
    if (q.format == QaFormat::multiple_choice) {
        Json opts = Json::array();
        for (const auto& o : q.options)
            opts.push_back(Json{{"option", o.option}, {"content", o.content}});
        j["options"] = opts;
    }
    j["answer"] = q.answer;
    if (q.format == QaFormat::short_answer) {
        Json pts = Json::array();
        for (const auto& p : q.score_points)
            pts.push_back(Json{{"description", p.description}, {"score", p.score}});
        j["score_points"] = pts;
    }
    j["required_events_id"] = q.required_events_id;
    j["required_events_date"] = q.required_events_date;
    j["ask_time"] = q.ask_time;
    j["question_type"] = q.question_type;
    Json ev = Json::array();
    for (const auto& e : q.evidence) ev.push_back(Json{{"type", e.type}, {"id", e.id}});
    j["evidence"] = ev;
    if (!q.pair_id.empty()) j["pair_id"] = q.pair_id;
    return j;
}

QAItem qa_from_json(const Json& j) {
    QAItem q;
    q.question = get_str(j, "question");
    bool has_options = j.contains("options") && j["options"].is_array();
    std::string fmt = get_str(j, "format");
    q.format = fmt == "multiple_choice" || (fmt.empty() && has_options)
                   ? QaFormat::multiple_choice
                   : QaFormat::short_answer;
    if (has_options)
        for (const auto& o : j["options"])
            q.options.push_back({get_str(o, "option"), get_str(o, "content")});
    q.answer = get_str(j, "answer");
    if (j.contains("score_points"))
        for (const auto& p : j["score_points"])
            q.score_points.push_back(
                {get_str(p, "description"), static_cast<int>(get_int(p, "score"))});
    if (j.contains("required_events_id"))
        for (const auto& id : j["required_events_id"])
            q.required_events_id.push_back(id.is_string() ? id.get<std::string>()
                                                          : std::to_string(id.get<int64_t>()));
    q.required_events_date = get_str_list(j, "required_events_date");
    q.ask_time = get_str(j, "ask_time");
    q.question_type = get_str(j, "question_type");
    if (j.contains("evidence"))
        for (const auto& e : j["evidence"])
            q.evidence.push_back({get_str(e, "type"), get_int(e, "id")});
    q.pair_id = get_str(j, "pair_id");
    return q;
}

// --------------------------------------------------------------- formatting

std::string format_km(int hectometres) {
    if (hectometres == 0) return "0 km";
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%d.%d km", hectometres / 10, hectometres % 10);
    return buf;
}

std::string format_pace(int seconds_per_km) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%02d:%02d min/km", seconds_per_km / 60, seconds_per_km % 60);
    return buf;
}

std::string format_lonlat(double lon, double lat) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", lon, lat);
    return buf;
}

}  // namespace lifeforge
