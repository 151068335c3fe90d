#pragma once
// Shared domain types and their JSON wire forms. Field names and ordering
// follow the published dataset schemas exactly, including spaced keys such
// as "social circle" and "Daily Activities".

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lifeforge/timeutil.hpp"

namespace lifeforge {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------- addresses

struct StructuredAddress {
    std::string province;
    std::string city;
    std::string district;
    std::string street_name;   // key "street_name"; omitted when empty
    std::string street_number; // key "street_number"; omitted when empty

    std::string formatted() const;
    bool operator==(const StructuredAddress&) const = default;
};

Json to_json(const StructuredAddress& a);
StructuredAddress address_from_json(const Json& j);

struct AnchorLocation {
    std::string name;
    double lon = 0.0;
    double lat = 0.0;
    std::string formatted_address;
    std::string district;
    std::string street_name;   // key "streetName"
    std::string street_number; // key "streetNumber"
    std::string description;

    bool operator==(const AnchorLocation&) const = default;
};

Json to_json(const AnchorLocation& a);
AnchorLocation anchor_from_json(const Json& j);

// ------------------------------------------------------------------ persona

struct RelationEntry {
    std::string name;
    std::string relation;
    std::string social_circle;  // key "social circle"
    std::string gender;
    int age = 0;
    std::string birth_date;
    StructuredAddress home_address;
    StructuredAddress birth_place;
    std::string personality;  // mbti code
    std::string economic_level;
    std::string occupation;
    std::string organization;
    std::string nickname;
    std::string relation_description;

    bool operator==(const RelationEntry&) const = default;
};

struct Persona {
    std::string name;
    std::string birth;  // "YYYY-MM-DD"
    int age = 0;
    std::string nationality;
    StructuredAddress home_address;
    StructuredAddress birth_place;
    std::string gender;
    std::string education;
    std::string job;
    std::string occupation;  // employer, as in the published samples
    StructuredAddress workplace;
    std::string belief;
    double salary = 0.0;
    int height_cm = 0;
    double weight_kg = 0.0;
    double bmi = 0.0;
    std::string family;
    std::string mbti;
    std::vector<std::string> traits;
    std::vector<std::string> hobbies;
    std::vector<std::string> favorite_foods;
    std::vector<std::string> memory_date;
    std::vector<std::string> aim;
    std::string healthy_desc;
    std::string lifestyle_desc;
    std::string economic_desc;
    std::string work_desc;
    std::string experience_desc;
    std::string description;
    std::vector<std::vector<RelationEntry>> relation;  // grouped by circle

    std::vector<const RelationEntry*> all_relations() const;
    const RelationEntry* find_relation(const std::string& who) const;
    bool operator==(const Persona&) const = default;
};

Json to_json(const RelationEntry& r);
RelationEntry relation_from_json(const Json& j);
Json to_json(const Persona& p);
Persona persona_from_json(const Json& j);

// -------------------------------------------------------------------- plots

struct PlotMonth {
    std::string month;  // "April" or "May - August"
    std::string content;
    std::string impact;
    std::vector<std::string> core_events;

    bool operator==(const PlotMonth&) const = default;
};

struct Plot {
    std::string topic;
    std::string category;  // work|health|finance|relationship|family|education|personal life
    double priority = 1.0;
    std::string detailed_description;
    std::vector<PlotMonth> monthly_description;

    bool operator==(const Plot&) const = default;
};

Json to_json(const Plot& p);
Plot plot_from_json(const Json& j);

extern const std::vector<std::string> kPlotCategories;

// ------------------------------------------------------------------- events

struct Interval {
    Timestamp start = 0;
    Timestamp end = 0;

    int64_t duration() const { return end - start; }
    bool contains(const Interval& inner) const {
        return inner.start >= start && inner.end <= end;
    }
    bool operator==(const Interval&) const = default;
};

struct Participant {
    std::string name;
    std::string relation;
    bool operator==(const Participant&) const = default;
};

struct EventNode {
    std::string event_id;  // hierarchical: "7", "7.2", "7.2.1"
    std::string name;
    std::string type;
    std::vector<Interval> date;
    std::string description;
    std::vector<Participant> participant;
    std::string location;
    bool splittable = false;
    std::string origin = "planned";  // planned | routine
    std::vector<EventNode> subevents;

    const Interval& span() const { return date.front(); }
    int64_t duration() const { return date.empty() ? 0 : date.front().duration(); }
    bool is_leaf() const { return subevents.empty(); }
    bool operator==(const EventNode&) const = default;
};

// Internal tree form (keeps splittable/origin/subevents).
Json event_tree_to_json(const EventNode& n);
EventNode event_tree_from_json(const Json& j);
// Published flat form: event_id, name, date, type, description, participant, location.
Json event_flat_to_json(const EventNode& n);
EventNode event_flat_from_json(const Json& j);

// Walk helpers.
void visit_events(const EventNode& root, const std::function<void(const EventNode&)>& fn);
std::vector<const EventNode*> collect_leaves(const EventNode& root);

// --------------------------------------------------------------- activities

enum class ActivitySource { scheduled_atomic, supplementary, routine };

std::string to_string(ActivitySource s);
std::optional<ActivitySource> activity_source_from_string(const std::string& s);

struct DailyActivity {
    std::string activity_id;
    Day date = 0;
    Timestamp start = 0;
    Timestamp end = 0;
    std::string name;
    std::string description;
    std::vector<Participant> participants;
    std::string location;
    std::string anchor_name;  // empty when not tied to a gazetteer anchor
    ActivitySource source = ActivitySource::scheduled_atomic;
    std::string parent_event_id;  // empty for supplementary activities
    std::string link_id;          // shared by the two halves of a midnight split
    Timestamp requested = 0;      // original slot time, intra-day scheduling only

    bool operator==(const DailyActivity&) const = default;
};

Json to_json(const DailyActivity& a);
DailyActivity activity_from_json(const Json& j);

// ------------------------------------------------------------ phone artifacts

struct Contact {
    std::string name;
    std::string relation;
    std::string gender;
    std::string nickname;
    std::string phone_number;
    std::string personal_email;
    std::string work_email;
    std::string id_number;
    std::string phone_id;  // string in the published sample

    bool operator==(const Contact&) const = default;
};

struct Call {
    std::optional<std::string> event_id;
    std::string phone_number;
    std::string contact_name;
    Timestamp datetime = 0;
    Timestamp datetime_end = 0;
    int direction = 0;  // 0 incoming, 1 outgoing
    std::string call_result;
    int64_t phone_id = 0;

    bool operator==(const Call&) const = default;
};

struct Sms {
    std::optional<std::string> event_id;
    std::string message_content;
    std::string contact_name;
    std::string phone_number;
    Timestamp datetime = 0;
    std::string message_type;  // Sent | Received
    int64_t phone_id = 0;

    bool operator==(const Sms&) const = default;
};

struct CalendarEntry {
    std::optional<std::string> event_id;
    std::string title;
    std::string description;
    Timestamp start_time = 0;
    Timestamp end_time = 0;
    Timestamp datetime = 0;  // creation time
    std::string summarized_info;
    int64_t phone_id = 0;

    bool operator==(const CalendarEntry&) const = default;
};

struct ChatTurn {
    std::string user_action;
    std::string user_content;
    std::string assistant_action;
    std::string assistant_content;

    bool operator==(const ChatTurn&) const = default;
};

struct AgentChat {
    std::optional<std::string> event_id;
    Day date = 0;
    std::vector<ChatTurn> turns;
    int64_t phone_id = 0;

    bool operator==(const AgentChat&) const = default;
};

struct PhotoLocation {
    std::string province;
    std::string city;
    std::string district;
    std::string street_name;   // key "streetName"
    std::string street_number; // key "streetNumber"
    std::string poi;

    bool operator==(const PhotoLocation&) const = default;
};

struct Photo {
    std::optional<std::string> event_id;
    std::string caption;
    std::string title;
    Timestamp datetime = 0;
    PhotoLocation location;
    std::vector<std::string> face_recognition;
    std::vector<std::string> image_tags;
    std::string ocr_text;
    std::string shoot_mode;
    std::string image_size;
    std::string summarized_info;
    int64_t phone_id = 0;

    bool operator==(const Photo&) const = default;
};

struct Note {
    std::optional<std::string> event_id;
    std::string title;
    std::string content;
    Timestamp datetime = 0;
    std::string summarized_info;
    int64_t phone_id = 0;

    bool operator==(const Note&) const = default;
};

struct Push {
    std::optional<std::string> event_id;
    std::string title;
    std::string content;
    Timestamp datetime = 0;
    std::string source;
    std::string push_status;
    std::string jump_path;
    std::string summarized_info;
    int64_t phone_id = 0;

    bool operator==(const Push&) const = default;
};

using PhoneArtifact =
    std::variant<Contact, Call, Sms, CalendarEntry, AgentChat, Photo, Note, Push>;

// Discriminator values: contact, call, sms, calendar, agent_chat, photo, note, push.
std::string artifact_kind(const PhoneArtifact& a);
std::optional<std::string> artifact_event_id(const PhoneArtifact& a);
Timestamp artifact_time(const PhoneArtifact& a);
int64_t artifact_phone_id(const PhoneArtifact& a);
// Text form used by session export and by entailment checks.
std::string artifact_text(const PhoneArtifact& a);

Json to_json(const PhoneArtifact& a);
PhoneArtifact artifact_from_json(const Json& j);

// ------------------------------------------------------------ health records

struct SportWindow {
    Timestamp start = 0;
    Timestamp end = 0;
};

struct RunningBlock {
    bool present = false;
    std::string sport_type = "Indoor Running";
    SportWindow window;
    std::string weather = "Sunny";
    int distance_hm = 0;  // hectometres, "X.Y km"
    int avg_heart_rate = 0;
    int avg_cadence = 0;
    int elevation_gain_m = 0;
    int elevation_loss_m = 0;
    int avg_pace_s = 0;  // seconds per km
    int best_pace_s = 0;
    int total_steps = 0;
    int calories = 0;

    bool operator==(const RunningBlock&) const = default;
};

struct CyclingBlock {
    bool present = false;
    std::string sport_type = "Outdoor Cycling";
    SportWindow window;
    std::string weather = "Sunny";
    int distance_hm = 0;
    int avg_speed_kmh = 0;
    int avg_heart_rate = 0;
    int avg_cadence = 0;
    int avg_power_w = 0;
    int best_speed_kmh = 0;
    int max_cadence = 0;
    int calories = 0;

    bool operator==(const CyclingBlock&) const = default;
};

struct WalkingBlock {
    bool present = false;
    std::string sport_type = "Outdoor Walking";
    SportWindow window;
    std::string weather = "Sunny";
    int distance_hm = 0;
    int avg_heart_rate = 0;
    int avg_cadence = 0;
    int total_steps = 0;
    int avg_pace_s = 0;
    int best_pace_s = 0;
    int calories = 0;

    bool operator==(const WalkingBlock&) const = default;
};

struct SleepBlock {
    int bedtime_s = 0;  // second of day
    int wake_s = 0;
    int total_min = 0;
    int light_min = 0;
    int deep_min = 0;
    int rem_min = 0;
    int awake_min = 0;
    int awakenings = 0;
    int deep_continuity_score = 0;
    int sleep_score = 0;
    int nap_min = 0;

    bool operator==(const SleepBlock&) const = default;
};

struct InteractionEvent {
    Timestamp time = 0;
    std::string description;

    bool operator==(const InteractionEvent&) const = default;
};

struct HealthRecord {
    Day date = 0;
    std::string city;
    int steps = 0;
    int distance_hm = 0;
    int calories = 0;
    int exercise_min = 0;
    int active_hours = 0;
    RunningBlock running;
    CyclingBlock cycling;
    WalkingBlock walking;
    SleepBlock sleep;
    int avg_heart_rate = 0;
    int resting_heart_rate = 0;
    int hrv_ms = 0;
    int body_temp_dc = 365;   // deci-celsius: "36.5"
    int glucose_dmmol = 52;   // deci-mmol/L: "5.2 mmol/L"
    int weight_hg = 0;        // hectograms: "55.0 kg"
    int stress_score = 0;
    int diet_kcal = 0;
    std::vector<InteractionEvent> interactions;
    std::string summarized_info;
    int64_t phone_id = 0;

    bool operator==(const HealthRecord&) const = default;
};

Json to_json(const HealthRecord& h);
HealthRecord health_from_json(const Json& j);

// ---------------------------------------------------------- monthly summary

struct MonthlySummary {
    std::string user_id;
    std::string month;  // "2025-01"
    std::vector<std::pair<std::string, std::string>> sections;  // ordered
    int word_count = 0;

    bool operator==(const MonthlySummary&) const = default;
};

Json to_json(const MonthlySummary& m);
MonthlySummary summary_from_json(const Json& j);

// ----------------------------------------------------------------------- QA

inline constexpr const char* kNotInMemory = "not in memory";

enum class QaFormat { multiple_choice, short_answer };

std::string to_string(QaFormat f);

struct QaOption {
    std::string option;  // "A".."D"
    std::string content;
    bool operator==(const QaOption&) const = default;
};

struct ScorePoint {
    std::string description;
    int score = 0;
    bool operator==(const ScorePoint&) const = default;
};

struct EvidenceRef {
    std::string type;  // artifact kind
    int64_t id = 0;    // phone_id within that kind
    bool operator==(const EvidenceRef&) const = default;
};

struct QAItem {
    std::string question;
    QaFormat format = QaFormat::short_answer;
    std::vector<QaOption> options;       // multiple_choice only
    std::string answer;                  // letter, text, or kNotInMemory
    std::vector<ScorePoint> score_points;  // short_answer only
    std::vector<std::string> required_events_id;
    std::vector<std::string> required_events_date;
    std::string ask_time;       // "YYYY-MM"
    std::string question_type;  // information extraction | mutihop reasoning | temporal | nondeclarative | unanswerable
    std::vector<EvidenceRef> evidence;
    std::string pair_id;  // shared by recall/recognition variants; empty if unpaired

    bool operator==(const QAItem&) const = default;
};

Json to_json(const QAItem& q);
QAItem qa_from_json(const Json& j);

// --------------------------------------------------------------- formatting

std::string format_km(int hectometres);       // 62 -> "6.2 km"
std::string format_pace(int seconds_per_km);  // 360 -> "06:00 min/km"
std::string format_lonlat(double lon, double lat);  // 6 decimals, "lon,lat"

}  // namespace lifeforge
