#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "lifeforge/types.hpp"
#include "lifeforge/validate.hpp"

using namespace lifeforge;

namespace {

Json load_fixture(const std::string& name) {
    std::ifstream in(std::string(LIFEFORGE_FIXTURE_DIR) + "/" + name);
    REQUIRE(in.good());
    return Json::parse(in);
}

Persona make_test_persona() {
    Persona p;
    p.name = "Chan Wai Yin";
    p.birth = "1990-06-02";
    p.age = 35;
    p.nationality = "Han";
    p.home_address = {"Hong Kong Special Administrative Region", "Hong Kong",
                      "Kowloon City District", "Carpenter Road", "No. 128"};
    p.birth_place = {"Hong Kong Special Administrative Region", "Hong Kong",
                     "Kowloon City District", "", ""};
    p.gender = "Female";
    p.education = "Bachelor's Degree";
    p.job = "Registered Nurse";
    p.occupation = "Wan Chai Health Centre";
    p.workplace = {"Hong Kong Special Administrative Region", "Hong Kong",
                   "Wan Chai District", "Hennessy Road", "No. 130"};
    p.belief = "No religious belief";
    p.salary = 360000.0;
    p.height_cm = 160;
    p.weight_kg = 52.5;
    p.bmi = 20.51;
    p.family = "First marriage with spouse, has 1 child (one daughter)";
    p.mbti = "ISFJ";
    p.traits = {"Patient", "Detail-minded"};
    p.hobbies = {"Marathon", "Reading detective novels"};
    p.favorite_foods = {"Wonton noodles"};
    p.memory_date = {"2015-03-01: Wedding Anniversary"};
    p.aim = {"Complete a half marathon"};
    p.healthy_desc = "Good overall health.";
    p.lifestyle_desc = "Steady weekday rhythm.";
    p.economic_desc = "Stable household finances.";
    p.work_desc = "Day shifts at the clinic.";
    p.experience_desc = "Local upbringing and training.";
    p.description = "A nurse who runs marathons.";
    RelationEntry r;
    r.name = "Chan Ka Ming";
    r.relation = "Husband";
    r.social_circle = "Family Circle";
    r.gender = "Male";
    r.age = 37;
    r.birth_date = "1988-01-20";
    r.home_address = p.home_address;
    r.birth_place = p.birth_place;
    r.personality = "ISTJ";
    r.economic_level = "Comfortable Living";
    r.occupation = "Bus Driver";
    r.organization = "Kowloon Transit Services";
    r.nickname = "Ka Ming";
    r.relation_description = "Husband; they commute together on Fridays.";
    p.relation = {{r}};
    return p;
}

}  // namespace

TEST_CASE("timestamp formats") {
    auto t = make_timestamp(2025, 11, 4, 20, 40, 0);
    CHECK(format_timestamp(t) == "2025-11-04 20:40:00");
    CHECK(parse_timestamp("2025-11-04 20:40:00") == t);
    CHECK(format_interval(t, t + 3600) == "2025-11-04 20:40:00 to 2025-11-04 21:40:00");
    CHECK(format_slash_time(t) == "2025/11/04/20:40:00");
    CHECK(format_slash_minute(t) == "2025/11/04 20:40");
    CHECK(parse_date("2025-02-30") == std::nullopt);
    CHECK(weekday_of(days_from_civil(2025, 1, 6)) == 0);  // a Monday
    CHECK(days_in_month(2024, 2) == 29);
}

TEST_CASE("reference persona sample validates clean") {
    Json doc = load_fixture("sample_persona.json");
    auto report = validate_document(doc, "persona");
    CHECK(report.ok());
    CHECK(report.violations.empty());

    // BMI identity: 55 / 1.55^2 = 22.89 within 0.05.
    Persona p = persona_from_json(doc);
    CHECK(p.height_cm == 155);
    CHECK(p.weight_kg == doctest::Approx(55.0));
    CHECK(p.bmi == doctest::Approx(22.89));

    // Spaced key is preserved bit-exactly on the wire.
    Json round = to_json(p);
    CHECK(round["relation"][0][0].contains("social circle"));
    CHECK(round["body"].contains("BMI"));
}

TEST_CASE("BMI violation is reported with a pointer path") {
    Json doc = load_fixture("sample_persona.json");
    doc["body"]["BMI"] = 30.0;
    auto report = validate_document(doc, "persona");
    REQUIRE(!report.ok());
    CHECK(report.violations[0].path == "/body/BMI");
}

TEST_CASE("duplicate relation names are violations") {
    Persona p = make_test_persona();
    p.relation[0].push_back(p.relation[0][0]);
    auto report = validate_persona(p);
    REQUIRE(!report.ok());
    CHECK(report.violations[0].message.find("duplicate") != std::string::npos);
}

TEST_CASE("event child interval containment") {
    EventNode parent;
    parent.event_id = "3";
    parent.name = "Parent";
    parent.date = {{make_timestamp(2025, 1, 1, 8), make_timestamp(2025, 1, 3, 18)}};
    EventNode child;
    child.event_id = "3.1";
    child.name = "Child";
    child.date = {{make_timestamp(2025, 1, 2, 8), make_timestamp(2025, 1, 4, 18)}};  // spills
    parent.subevents.push_back(child);

    auto report = validate_event_tree(parent, kSecondsPerDay);
    int containment = 0;
    for (const auto& v : report.violations)
        containment += v.message.find("not contained") != std::string::npos;
    CHECK(containment == 1);

    parent.subevents[0].date = {{make_timestamp(2025, 1, 2, 8), make_timestamp(2025, 1, 2, 18)}};
    CHECK(validate_event_tree(parent, kSecondsPerDay).ok());
}

TEST_CASE("hierarchical id prefix is enforced") {
    EventNode parent;
    parent.event_id = "3";
    parent.date = {{0, kSecondsPerDay * 2}};
    EventNode child;
    child.event_id = "4.1";  // wrong parent
    child.date = {{0, 3600}};
    parent.subevents.push_back(child);
    auto report = validate_event_tree(parent, 0);
    bool found = false;
    for (const auto& v : report.violations)
        found |= v.message.find("prefix") != std::string::npos;
    CHECK(found);
}

TEST_CASE("sibling leaves may not overlap") {
    EventNode parent;
    parent.event_id = "1";
    parent.date = {{make_timestamp(2025, 1, 1, 8), make_timestamp(2025, 1, 1, 20)}};
    for (int i = 0; i < 2; ++i) {
        EventNode c;
        c.event_id = "1." + std::to_string(i + 1);
        c.name = "leaf " + std::to_string(i);
        c.date = {{make_timestamp(2025, 1, 1, 9), make_timestamp(2025, 1, 1, 11)}};
        parent.subevents.push_back(c);
    }
    auto report = validate_event_tree(parent, kSecondsPerDay);
    bool found = false;
    for (const auto& v : report.violations)
        found |= v.message.find("overlap") != std::string::npos;
    CHECK(found);
}

TEST_CASE("malformed JSON reports a byte offset") {
    auto report = validate_text("{\"name\": \"x\", }", "persona");
    REQUIRE(!report.ok());
    CHECK(report.violations[0].message.find("byte") != std::string::npos);
}

TEST_CASE("reference event samples parse and round-trip") {
    Json docs = load_fixture("sample_events.json");
    for (const auto& doc : docs) {
        CHECK(validate_document(doc, "event").ok());
        EventNode n = event_flat_from_json(doc);
        CHECK(event_flat_to_json(n) == doc);
    }
    EventNode first = event_flat_from_json(docs[0]);
    CHECK(first.span().start == make_timestamp(2025, 11, 4, 20, 40, 0));
    CHECK(first.duration() == 3600);
}

TEST_CASE("serialization round trip: persona") {
    Persona p = make_test_persona();
    Json j1 = to_json(p);
    Persona q = persona_from_json(j1);
    CHECK(p == q);
    CHECK(to_json(q) == j1);
}

TEST_CASE("serialization round trip: activities and artifacts") {
    DailyActivity a;
    a.activity_id = "user_0000/2025-01-05/3";
    a.date = days_from_civil(2025, 1, 5);
    a.start = make_timestamp(2025, 1, 5, 9, 30, 0);
    a.end = make_timestamp(2025, 1, 5, 11, 0, 0);
    a.name = "Morning run";
    a.description = "Training run along the waterfront.";
    a.participants = {{"Chan Wai Yin", "Herself"}};
    a.location = "Victoria Park";
    a.anchor_name = "Victoria Park";
    a.source = ActivitySource::routine;
    a.parent_event_id = "12";
    DailyActivity b = activity_from_json(to_json(a));
    CHECK(to_json(b) == to_json(a));

    Call call;
    call.event_id = "4284";
    call.phone_number = "85291234573";
    call.contact_name = "Lin Jiaxin";
    call.datetime = make_timestamp(2025, 1, 1, 8, 35, 0);
    call.datetime_end = make_timestamp(2025, 1, 1, 8, 42, 30);
    call.direction = 1;
    call.call_result = "Connected";
    call.phone_id = 7;
    PhoneArtifact pa = call;
    Json cj = to_json(pa);
    CHECK(cj["type"] == "call");
    CHECK(cj["datetime"] == "2025-01-01 08:35:00");
    CHECK(to_json(artifact_from_json(cj)) == cj);

    Photo photo;
    photo.event_id = "3";
    photo.caption = "A selfie at lunch";
    photo.title = "IMG_20231001_121045";
    photo.datetime = make_timestamp(2023, 10, 1, 12, 10, 45);
    photo.location = {"Hong Kong Special Administrative Region", "Hong Kong",
                      "Wan Chai District", "Lockhart Road", "No. 41",
                      "Kam Fung Cha Chaan Teng"};
    photo.face_recognition = {"Yu Xiaowei", "Su Lishan"};
    photo.image_tags = {"Selfie", "Lunch Break"};
    photo.ocr_text = "None";
    photo.shoot_mode = "Portrait";
    photo.image_size = "3024x4032";
    photo.summarized_info = "A lunch-break selfie with a colleague.";
    photo.phone_id = 4;
    Json pj = to_json(PhoneArtifact(photo));
    CHECK(pj["location"].contains("streetName"));
    CHECK(pj["faceRecognition"].size() == 2);
    CHECK(to_json(artifact_from_json(pj)) == pj);

    AgentChat chat;
    chat.event_id = "0";
    chat.date = days_from_civil(2025, 1, 1);
    chat.turns = {{"topic query", "Hello there", "need inference", "Tell me more"},
                  {"solution feedback", "Great, thanks", "talk", "Any time"}};
    chat.phone_id = 0;
    Json aj = to_json(PhoneArtifact(chat));
    CHECK(aj["conversation"].contains("turn 1"));
    CHECK(aj["conversation"].contains("turn 2"));
    CHECK(to_json(artifact_from_json(aj)) == aj);

    Contact contact;
    contact.name = "Chen Meiling";
    contact.relation = "Mother";
    contact.gender = "Female";
    contact.nickname = "Ma Ma";
    contact.phone_number = "85291234567";
    contact.personal_email = "chenmeiling_hk@mailhaven.com";
    contact.work_email = "chenmeiling@corpmail.com";
    contact.id_number = "810101196208224028";
    contact.phone_id = "1";
    Json oj = to_json(PhoneArtifact(contact));
    CHECK(oj["phone_id"].is_string());  // contacts carry a string id
    CHECK(to_json(artifact_from_json(oj)) == oj);
}

TEST_CASE("health record wire format") {
    HealthRecord h;
    h.date = days_from_civil(2025, 1, 1);
    h.city = "Hong Kong";
    h.steps = 8560;
    h.distance_hm = 62;
    h.calories = 420;
    h.exercise_min = 45;
    h.active_hours = 8;
    h.running.present = true;
    h.running.window = {make_timestamp(2025, 1, 1, 7, 30, 0), make_timestamp(2025, 1, 1, 7, 45, 0)};
    h.running.distance_hm = 25;
    h.running.avg_heart_rate = 135;
    h.running.avg_cadence = 165;
    h.running.avg_pace_s = 360;
    h.running.best_pace_s = 345;
    h.running.total_steps = 3125;
    h.running.calories = 150;
    h.sleep = {22 * 3600 + 45 * 60, 8 * 3600 + 30 * 60, 585, 280, 180, 125, 25, 3, 85, 88, 0};
    h.weight_hg = 550;
    h.stress_score = 25;
    h.diet_kcal = 1850;
    h.summarized_info = "A steady new-year day with a short morning run.";

    Json j = to_json(h);
    CHECK(j["Daily Activities"]["Steps"] == "8560 steps");
    CHECK(j["Daily Activities"]["Distance"] == "6.2 km");
    CHECK(j["Running"]["Distance"] == "2.5 km");
    CHECK(j["Running"]["Sport Time"] == "2025/01/01/07:30:00-2025/01/01/07:45:00");
    CHECK(j["Running"]["Average Pace"] == "06:00 min/km");
    CHECK(j["Cycling"]["Distance"] == "0 km");  // absent block reads all-zero
    CHECK(j["Sleep"]["Bedtime"] == "22:45:00");
    CHECK(j["Body Weight"]["Weight"] == "55.0 kg");
    CHECK(validate_document(j, "health").ok());

    HealthRecord back = health_from_json(j);
    CHECK(to_json(back) == j);

    // Sleep stages beyond total + awake violate the invariant.
    h.sleep.deep_min = 600;
    CHECK(!validate_health(h).ok());
}

TEST_CASE("qa item validation") {
    Json mc = load_fixture("sample_qa_mc.json");
    CHECK(validate_document(mc, "qa").ok());
    QAItem q = qa_from_json(mc);
    CHECK(q.format == QaFormat::multiple_choice);
    CHECK(q.options.size() == 4);
    CHECK(q.answer == "C");
    CHECK(q.evidence.size() == 2);

    Json sa = load_fixture("sample_qa_sa.json");
    CHECK(validate_document(sa, "qa").ok());
    QAItem s = qa_from_json(sa);
    CHECK(s.format == QaFormat::short_answer);
    CHECK(s.score_points.size() == 2);

    // Bad answers and malformed option sets are flagged.
    QAItem broken = q;
    broken.answer = "Z";
    CHECK(!validate_qa(broken).ok());
    broken = q;
    broken.options.pop_back();
    CHECK(!validate_qa(broken).ok());
    // The sentinel answer is always admissible.
    broken = q;
    broken.answer = kNotInMemory;
    CHECK(validate_qa(broken).ok());
}

TEST_CASE("plot schema and ordering") {
    Plot p;
    p.topic = "A steady year";
    p.category = "work";
    p.priority = 1.0;
    p.detailed_description = "Twelve months of plans.";
    p.monthly_description = {{"April", "Spring push", "Better breaks", {"Finish the audit"}},
                             {"May - August", "Long middle", "Routine holds", {}},
                             {"December", "Wrap up", "Rest", {"Close the year"}}};
    CHECK(validate_plot(p).ok());
    Json j = to_json(p);
    CHECK(plot_from_json(j) == p);

    std::swap(p.monthly_description[0], p.monthly_description[2]);
    CHECK(!validate_plot(p).ok());
    p.monthly_description.clear();
    p.category = "space travel";
    CHECK(!validate_plot(p).ok());
}

TEST_CASE("monthly summary wire format") {
    MonthlySummary m;
    m.user_id = "user_0000";
    m.month = "2025-01";
    m.sections = {{"overview", "Running: 11 sessions this month."},
                  {"sports review", "Details follow."}};
    m.word_count = 9;
    Json j = to_json(m);
    CHECK(summary_from_json(j) == m);
    CHECK(validate_document(j, "summary").ok());
    m.word_count = 0;
    CHECK(!validate_document(to_json(m), "summary").ok());
}

TEST_CASE("anchor location bounds") {
    AnchorLocation a;
    a.name = "Victoria Park";
    a.lon = 114.1888;
    a.lat = 22.2823;
    Json j = to_json(a);
    CHECK(j["city"].is_array());
    CHECK(validate_document(j, "anchor").ok());
    a.lat = 95.0;
    CHECK(!validate_document(to_json(a), "anchor").ok());
}

TEST_CASE("activity day bounds and midnight touch") {
    DailyActivity a;
    a.date = days_from_civil(2025, 3, 10);
    a.start = make_timestamp(2025, 3, 10, 23, 0, 0);
    a.end = make_timestamp(2025, 3, 11, 0, 0, 0);  // exactly midnight is fine
    a.name = "Late reading";
    CHECK(validate_activity(a).ok());
    a.end = make_timestamp(2025, 3, 11, 0, 30, 0);
    CHECK(!validate_activity(a).ok());
}
