#pragma once
// In-progress QA generation: five categories x two formats with paired
// recall/recognition variants, evidence linking against the artifact
// corpus, phone-data supplementation, and an automated filter pass.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lifeforge/textgen.hpp"
#include "lifeforge/types.hpp"

namespace lifeforge::qa {

// Target proportions; defaults mirror the corpus mix shipped in data/.
struct CategoryMix {
    std::map<std::string, double> category = {
        {"IE", 0.3585}, {"MR", 0.2981}, {"TKU", 0.1143}, {"ND", 0.2142}, {"UA", 0.0150}};
    double mc_fraction = 0.2581;
    double pair_rate = 0.18;  // fraction of items that get a paired twin

    static CategoryMix load(const std::filesystem::path& path);
};

struct QaSlot {
    Day day = 0;
    std::string category;
    QaFormat format = QaFormat::short_answer;
    std::string pair_id;  // set on both halves of a recall/recognition pair
};

// Deterministic corpus-level schedule: largest-remainder apportionment keeps
// realized proportions within one item of the mix.
std::vector<QaSlot> build_schedule(Day start, Day end, const CategoryMix& mix,
                                   double per_day, uint64_t seed,
                                   const std::string& user_id);

struct CorpusView {
    const Persona* persona = nullptr;
    const std::vector<EventNode>* events = nullptr;         // exported flat, global ids
    const std::vector<DailyActivity>* activities = nullptr;
    const std::vector<PhoneArtifact>* artifacts = nullptr;  // phone ids assigned
};

struct QaConfig {
    uint64_t seed = 0;
    std::string user_id = "user_0000";
    std::string user_name;  // persona display name for filler artifacts
    int workers = 1;
};

class QaGenerator {
public:
    QaGenerator(gen::GenBackend& backend, QaConfig cfg);

    // Drafts for the whole schedule; parallel across slots. Failed slots are
    // skipped and logged.
    std::vector<QAItem> propose_questions(const std::vector<QaSlot>& schedule,
                                          const CorpusView& corpus,
                                          std::vector<std::string>* log = nullptr) const;

    // Links evidence; generates filler artifacts until the sufficiency oracle
    // passes. Returns the number of artifacts added; -1 when the question
    // must be dropped.
    int supplement_evidence(QAItem& q, std::vector<PhoneArtifact>& artifacts) const;

    // Screens self-contained and malformed items; emits a review worksheet.
    std::vector<QAItem> filter_questions(const std::vector<QAItem>& drafts,
                                         const std::vector<PhoneArtifact>& artifacts,
                                         Json* worksheet = nullptr) const;

    // Keyword-entailment sufficiency oracle (conservative offline proxy).
    static bool evidence_sufficient(const QAItem& q,
                                    const std::vector<PhoneArtifact>& artifacts);

private:
    gen::GenBackend& backend_;
    QaConfig cfg_;
};

// True when the (normalized) needle tokens all occur in the haystack.
bool keyword_entailed(const std::string& needle, const std::string& haystack);

}  // namespace lifeforge::qa
