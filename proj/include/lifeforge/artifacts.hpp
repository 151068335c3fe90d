#pragma once
// Phone artifact, noise, health-record and monthly-summary generation.
// Everything is per-day independent; phone ids are assigned in a final
// deterministic pass so day processing order never shows in the output.

#include <filesystem>
#include <string>
#include <vector>

#include "lifeforge/outline.hpp"
#include "lifeforge/textgen.hpp"
#include "lifeforge/types.hpp"

namespace lifeforge::artifacts {

// Activity-category x artifact-kind likelihood table, persona-modulated.
struct RateTable {
    struct Category {
        std::string name;
        std::vector<std::string> keywords;
        std::map<std::string, double> multipliers;  // kind -> factor
        std::map<std::string, double> forced;       // kind -> absolute rate
    };
    std::map<std::string, double> base;  // kind -> per-activity probability
    std::vector<Category> categories;
    std::map<std::string, double> noise_per_day;  // noise kind -> daily mean
    double topic_sms_per_day = 1.0;
    struct Subscription {
        std::string source;
        std::string title;
        int hour = 8;
    };
    std::vector<Subscription> subscriptions;

    static RateTable load(const std::filesystem::path& path);
    const Category* classify(const std::string& activity_name) const;
    // Effective probability for (activity, kind).
    double rate(const std::string& activity_name, const std::string& kind) const;
};

// Integer coefficient table driving every health aggregate; aggregates are
// exactly recomputable from this table plus the day's activities.
struct HealthCoeffs {
    struct Category {
        std::string name;
        std::vector<std::string> keywords;
        int steps_per_hour = 0;
        int dist_hm_per_hour = 0;
        int kcal_per_hour = 0;
        bool exercise = false;
        std::string sport;  // "", "running", "cycling", "walking"
    };
    int base_steps = 3000;
    int base_dist_hm = 20;
    int base_kcal = 160;
    std::vector<Category> categories;

    static HealthCoeffs load(const std::filesystem::path& path);
    const Category* classify(const std::string& activity_name) const;
};

struct DayAggregates {
    int steps = 0;
    int distance_hm = 0;
    int calories = 0;
    int exercise_min = 0;
    int active_hours = 0;
};

// The pure aggregation rule shared with the acceptance oracle: truncating
// integer math, minutes * rate / 60, plus distinct-clock-hours for activity.
DayAggregates aggregate_day(const HealthCoeffs& coeffs,
                            const std::vector<DailyActivity>& day);

struct ArtifactConfig {
    uint64_t seed = 0;
    std::string user_id = "user_0000";
    int workers = 1;
    bool noise_enabled = true;
};

class ArtifactGenerator {
public:
    ArtifactGenerator(gen::GenBackend& backend, RateTable rates, HealthCoeffs coeffs,
                      ArtifactConfig cfg);

    std::vector<Contact> generate_contacts(const Persona& p) const;

    // Event-linked artifacts + scheduled subscription pushes for one day.
    std::vector<PhoneArtifact> generate_phone_day(const std::vector<DailyActivity>& day,
                                                  const Persona& p,
                                                  const outline::ContextFactors& ctx,
                                                  Day date) const;

    // Background artifacts with null event ids.
    std::vector<PhoneArtifact> generate_noise_day(const Persona& p,
                                                  const outline::ContextFactors& ctx,
                                                  Day date) const;

    HealthRecord generate_health_day(const std::vector<DailyActivity>& day, const Persona& p,
                                     const outline::ContextFactors& ctx, Day date) const;

    MonthlySummary summarize_month(const std::string& user_id, int year, int month,
                                   const std::vector<DailyActivity>& activities,
                                   const std::vector<HealthRecord>& health) const;

    const RateTable& rates() const { return rates_; }
    const HealthCoeffs& coeffs() const { return coeffs_; }

private:
    gen::GenBackend& backend_;
    RateTable rates_;
    HealthCoeffs coeffs_;
    ArtifactConfig cfg_;
};

// Orders artifacts by (time, kind, payload) and assigns per-kind sequence
// numbers; health records are numbered by date.
void assign_phone_ids(std::vector<PhoneArtifact>& artifacts);
void assign_health_ids(std::vector<HealthRecord>& records);

}  // namespace lifeforge::artifacts
