#include "lifeforge/persona.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "lifeforge/parallel.hpp"

namespace lifeforge::persona {

namespace {

// Circle layout: per-circle member ranges sum to [20, 29] with mean ~24.5.
struct CircleSpec {
    const char* circle;
    int lo, hi;
    std::vector<const char*> roles;
};

const std::vector<CircleSpec> kCircles = {
    {"Family Circle", 5, 7, {"Mother", "Father", "Sister", "Brother", "Aunt", "Uncle", "Cousin"}},
    {"Work Circle", 5, 7, {"Colleague", "Supervisor", "Colleague", "Client", "Mentee", "Colleague", "Client"}},
    {"Friends Circle", 4, 6, {"Best Friend", "Old Classmate", "Friend", "Friend", "Old Classmate", "Friend"}},
    {"Hobby Circle", 3, 4, {"Hobby Partner", "Hobby Partner", "Coach", "Hobby Partner"}},
    {"Neighborhood Circle", 2, 3, {"Neighbor", "Neighbor", "Neighbor"}},
    {"Service Circle", 1, 2, {"Family Doctor", "Property Manager"}},
};

std::string persona_mini(const Persona& p, Json& out) {
    out["name"] = p.name;
    out["age"] = p.age;
    out["gender"] = p.gender;
    out["job"] = p.job;
    out["employer"] = p.occupation;
    out["city"] = p.home_address.city;
    out["province"] = p.home_address.province;
    out["district"] = p.home_address.district;
    out["home_address"] = to_json(p.home_address);
    auto space = p.name.find(' ');
    out["surname"] = space == std::string::npos ? p.name : p.name.substr(0, space);
    out["hobbies"] = p.hobbies;
    return out.dump();
}

}  // namespace

PriorTables PriorTables::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open prior tables: " + path.string());
    Json j = Json::parse(in);
    PriorTables t;
    for (auto it = j["fields"].begin(); it != j["fields"].end(); ++it) {
        std::vector<WeightedValue> vals;
        for (const auto& entry : it.value())
            vals.push_back({entry.value("value", Json{}), entry.value("weight", 1.0)});
        t.fields[it.key()] = std::move(vals);
    }
    if (j.contains("trait_bank"))
        for (auto it = j["trait_bank"].begin(); it != j["trait_bank"].end(); ++it) {
            std::vector<std::string> vals;
            for (const auto& v : it.value()) vals.push_back(v.get<std::string>());
            t.trait_bank[it.key()] = std::move(vals);
        }
    return t;
}

const Json& PriorTables::sample(const std::string& field, Rng& rng) const {
    auto it = fields.find(field);
    if (it == fields.end() || it->second.empty())
        throw std::runtime_error("prior table has no field \"" + field + "\"");
    std::vector<double> weights;
    weights.reserve(it->second.size());
    for (const auto& wv : it->second) weights.push_back(wv.weight);
    return it->second[rng.pick_weighted(weights)].value;
}

std::vector<std::string> PriorTables::sample_traits(const std::string& bank, size_t count,
                                                    Rng& rng) const {
    std::vector<std::string> out;
    auto it = trait_bank.find(bank);
    if (it == trait_bank.end()) return out;
    std::vector<std::string> pool = it->second;
    while (out.size() < count && !pool.empty()) {
        size_t i = rng.next_below(pool.size());
        out.push_back(pool[i]);
        pool.erase(pool.begin() + i);
    }
    return out;
}

std::vector<std::string> load_denylist(const std::filesystem::path& path) {
    std::vector<std::string> names;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') names.push_back(line);
    }
    return names;
}

PersonaSynthesizer::PersonaSynthesizer(gen::GenBackend& backend, PriorTables priors,
                                       std::vector<std::string> denylist, SynthConfig cfg)
    : backend_(backend),
      priors_(std::move(priors)),
      denylist_(std::move(denylist)),
      cfg_(cfg) {}

Persona PersonaSynthesizer::sample_base_persona(const std::string& user_id,
                                                uint64_t seed) const {
    Rng rng(seed, "persona_sample", user_id);

    Json sampled;
    sampled["gender"] = priors_.sample("gender", rng);
    const Json& age_range = priors_.sample("age", rng);
    sampled["age"] = rng.next_int(age_range.value("min", 25), age_range.value("max", 60));
    sampled["nationality"] = priors_.sample("nationality", rng);
    sampled["education"] = priors_.sample("education", rng);
    sampled["belief"] = priors_.sample("belief", rng);
    sampled["marital"] = priors_.sample("marital", rng);
    if (sampled["marital"].get<std::string>() != "Single") {
        const Json& kids = priors_.sample("children", rng);
        sampled["sons"] = kids.value("sons", 0);
        sampled["daughters"] = kids.value("daughters", 0);
    } else {
        sampled["sons"] = 0;
        sampled["daughters"] = 0;
    }
    const Json& city = priors_.sample("city", rng);
    sampled["city"] = city.value("city", "Hong Kong");
    const Json& job = priors_.sample("job", rng);
    sampled["job"] = job.value("job", "Office Clerk");
    sampled["employer"] = job.value("employer", "Harbour View Trading Ltd.");
    double lo = job.value("salary_min", 180000.0), hi = job.value("salary_max", 360000.0);
    sampled["salary"] = std::round((lo + rng.next_double() * (hi - lo)) / 1000.0) * 1000.0;
    const Json& home = priors_.sample("home", rng);
    Json home_addr;
    home_addr["province"] = city.value("province", "");
    home_addr["city"] = city.value("city", "");
    home_addr["district"] = home.value("district", "");
    home_addr["street_name"] = home.value("street_name", "");
    home_addr["street_number"] = home.value("street_number", "");
    sampled["home_address"] = home_addr;
    sampled["home_building"] = home.value("building", "");
    Json work_addr;
    work_addr["province"] = city.value("province", "");
    work_addr["city"] = city.value("city", "");
    work_addr["district"] = job.value("district", "");
    work_addr["street_name"] = job.value("street_name", "");
    work_addr["street_number"] = job.value("street_number", "");
    sampled["work_address"] = work_addr;
    sampled["work_building"] = job.value("building", "");

    Json traits;
    traits["mbti"] = priors_.sample_traits("mbti", 1, rng).front();
    traits["traits"] = priors_.sample_traits("traits", 3, rng);
    traits["hobbies"] = priors_.sample_traits("hobbies", 4 + rng.next_below(3), rng);
    traits["favorite_foods"] = priors_.sample_traits("favorite_foods", 3 + rng.next_below(2), rng);
    traits["aims"] = priors_.sample_traits("aims", 3, rng);

    // Fictionality guard: redraw the generated identity while it collides
    // with the real-name registry.
    for (int salt = 0;; ++salt) {
        gen::GenRequest req;
        req.stage = "persona_basic";
        req.seed = gen::derive_seed(seed, "persona_basic",
                                    user_id + (salt ? "#" + std::to_string(salt) : ""));
        req.response_schema = "persona";
        req.add_json("sampled", sampled);
        req.add_json("traits", traits);
        req.add("epoch_year", std::to_string(cfg_.epoch_year));
        Json doc = backend_.generate(req);
        Persona p = persona_from_json(doc);
        bool listed = std::find(denylist_.begin(), denylist_.end(), p.name) != denylist_.end();
        if (!listed || salt >= 20) return p;
    }
}

void PersonaSynthesizer::build_social_network(Persona& p, const std::string& user_id,
                                              uint64_t seed) const {
    Rng rng(seed, "social_network", user_id);

    struct Slot {
        std::string circle;
        std::string role;
        size_t circle_index;
    };
    std::vector<Slot> slots;
    std::vector<std::string> circle_names;
    bool married = p.family.find("marriage") != std::string::npos ||
                   p.family.find("Married") != std::string::npos ||
                   p.family.find("spouse") != std::string::npos;
    for (const auto& spec : kCircles) {
        size_t circle_index = circle_names.size();
        circle_names.push_back(spec.circle);
        int n = rng.next_int(spec.lo, spec.hi);
        int emitted = 0;
        if (std::string(spec.circle) == "Family Circle" && married) {
            slots.push_back({spec.circle, p.gender == "Male" ? "Wife" : "Husband", circle_index});
            ++emitted;
        }
        for (int i = 0; emitted < n; ++i, ++emitted)
            slots.push_back({spec.circle, spec.roles[i % spec.roles.size()], circle_index});
    }

    std::set<std::string> taken{p.name};
    Json persona_json;
    persona_mini(p, persona_json);
    std::vector<RelationEntry> entries(slots.size());
    std::vector<std::string> salts(slots.size());
    for (size_t i = 0; i < slots.size(); ++i) salts[i] = user_id + "/" + std::to_string(i);

    // First pass in parallel, then a sequential uniqueness sweep that re-rolls
    // collisions with salted seeds (deterministic: order is slot order).
    Json used = Json::array();
    std::string persona_section = persona_json.dump();
    auto gen_one = [&](size_t i, int salt) {
        gen::GenRequest req;
        req.stage = "relation_profile";
        req.seed = gen::derive_seed(seed, "relation_profile",
                                    salts[i] + (salt ? "#" + std::to_string(salt) : ""));
        req.response_schema = "relation";
        req.add("persona", persona_section);
        req.add("circle", slots[i].circle);
        req.add("role", slots[i].role);
        req.add_json("used_names", used);
        req.add("epoch_year", std::to_string(cfg_.epoch_year));
        return relation_from_json(backend_.generate(req));
    };
    parallel_for(slots.size(), cfg_.workers, [&](size_t i) { entries[i] = gen_one(i, 0); });
    for (size_t i = 0; i < entries.size(); ++i) {
        int salt = 0;
        while (taken.count(entries[i].name) && salt < 30) entries[i] = gen_one(i, ++salt);
        taken.insert(entries[i].name);
    }

    p.relation.assign(circle_names.size(), {});
    for (size_t i = 0; i < slots.size(); ++i)
        p.relation[slots[i].circle_index].push_back(entries[i]);
}

AnchorResult PersonaSynthesizer::anchor_urban_landscape(const Persona& p,
                                                        geo::GeoProvider& geo,
                                                        const std::string& user_id,
                                                        uint64_t seed) const {
    AnchorResult out;
    Json persona_json;
    std::string persona_section = persona_mini(p, persona_json);
    const std::string& city = p.home_address.city;

    struct Want {
        std::string kind;
        std::string query;
    };
    std::vector<Want> wants;
    wants.push_back({"home", p.home_address.street_name});
    wants.push_back({"workplace", p.workplace.street_name});
    std::vector<std::string> categories = {"gym",        "mall",   "clinic", "park",
                                           "restaurant", "market", "library", "cafe",
                                           "cinema",     "station", "pool",  "school",
                                           "community centre"};
    Rng rng(seed, "anchors", user_id);
    size_t extra = cfg_.anchor_target > 2 ? static_cast<size_t>(cfg_.anchor_target - 2)
                                          : categories.size();
    for (size_t i = 0; i < extra && i < categories.size(); ++i)
        wants.push_back({categories[i], categories[i]});

    for (const auto& want : wants) {
        AnchorLocation anchor;
        try {
            geo::PlaceResult res = geo.verify_place(want.query, city);
            if (!res.verified) {
                out.warnings.push_back("no verified place for \"" + want.query + "\"");
                continue;
            }
            anchor = res.results[rng.next_below(res.results.size())];
        } catch (const geo::GeoError& e) {
            out.warnings.push_back("provider failure for \"" + want.query + "\": " + e.what());
            continue;
        }
        if (want.kind == "home") {
            anchor.street_name = p.home_address.street_name;
            anchor.street_number = p.home_address.street_number;
            anchor.district = p.home_address.district;
            anchor.formatted_address = p.home_address.formatted();
        }
        gen::GenRequest req;
        req.stage = "anchor_description";
        req.seed = gen::derive_seed(seed, "anchor_description", user_id + "/" + want.kind);
        req.response_schema = "text";
        req.add("persona", persona_section);
        req.add_json("anchor", to_json(anchor));
        req.add("kind", want.kind);
        anchor.description = backend_.generate(req).value("description", "");
        out.anchors.push_back(std::move(anchor));
    }
    return out;
}

}  // namespace lifeforge::persona
