#pragma once
// Three-step persona synthesis: prior-table sampling + generator rewriting,
// social network construction, and urban anchor assignment.

#include <filesystem>
#include <string>
#include <vector>

#include "lifeforge/geo.hpp"
#include "lifeforge/textgen.hpp"
#include "lifeforge/types.hpp"

namespace lifeforge::persona {

// Weighted categorical priors plus a free-text trait bank. Substitutes for
// survey microdata that cannot be redistributed; format documented in README.
struct PriorTables {
    struct WeightedValue {
        Json value;
        double weight = 1.0;
    };
    std::map<std::string, std::vector<WeightedValue>> fields;
    std::map<std::string, std::vector<std::string>> trait_bank;

    static PriorTables load(const std::filesystem::path& path);
    bool has(const std::string& field) const {
        auto it = fields.find(field);
        return it != fields.end() && !it->second.empty();
    }
    const Json& sample(const std::string& field, Rng& rng) const;
    // Weighted sampling without replacement from the trait bank.
    std::vector<std::string> sample_traits(const std::string& bank, size_t count,
                                           Rng& rng) const;
};

std::vector<std::string> load_denylist(const std::filesystem::path& path);

struct AnchorResult {
    std::vector<AnchorLocation> anchors;
    std::vector<std::string> warnings;  // provider failures leave a partial list
};

struct SynthConfig {
    int epoch_year = 2025;
    int workers = 1;
    int anchor_target = 15;
};

class PersonaSynthesizer {
public:
    PersonaSynthesizer(gen::GenBackend& backend, PriorTables priors,
                       std::vector<std::string> denylist, SynthConfig cfg);

    // Demographics and lifestyle from priors; sensitive fields are fictional.
    Persona sample_base_persona(const std::string& user_id, uint64_t seed) const;

    // Fills persona.relation with 20-30 profiled contacts across circles.
    void build_social_network(Persona& p, const std::string& user_id, uint64_t seed) const;

    // ~15 verified anchors (home, workplace, recurring venues).
    AnchorResult anchor_urban_landscape(const Persona& p, geo::GeoProvider& geo,
                                        const std::string& user_id, uint64_t seed) const;

private:
    gen::GenBackend& backend_;
    PriorTables priors_;
    std::vector<std::string> denylist_;
    SynthConfig cfg_;
};

}  // namespace lifeforge::persona
