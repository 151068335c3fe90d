#pragma once
// Invariant checking for every core document type. Violations carry
// JSON-pointer paths so callers can point at the offending field.

#include <string>
#include <vector>

#include "lifeforge/types.hpp"

namespace lifeforge {

struct Violation {
    std::string path;  // JSON pointer, e.g. "/body/BMI"
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    void add(std::string path, std::string message) {
        violations.push_back({std::move(path), std::move(message)});
    }
    std::string to_string() const;
};

// Known document kinds for validate_document.
// persona | event | event_tree | activity | artifact | health | summary | qa | plot | anchor
ValidationReport validate_document(const Json& doc, const std::string& kind,
                                   int epoch_year = 0);

// Parse + validate in one step; malformed JSON yields a single violation
// whose message carries the byte offset reported by the parser.
ValidationReport validate_text(const std::string& text, const std::string& kind,
                               int epoch_year = 0);

// Typed checks used by the generators themselves.
ValidationReport validate_persona(const Persona& p, int epoch_year = 0);
ValidationReport validate_event_tree(const EventNode& root, int64_t tau_seconds);
ValidationReport validate_activity(const DailyActivity& a);
ValidationReport validate_health(const HealthRecord& h);
ValidationReport validate_qa(const QAItem& q);
ValidationReport validate_plot(const Plot& p);

}  // namespace lifeforge
