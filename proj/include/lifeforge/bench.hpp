#pragma once
// Benchmark harness: conversational session export with summarized-info
// conversion, a newline-delimited-JSON adapter protocol for external memory
// systems, offline/remote judging, and time/cost accounting.

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lifeforge/textgen.hpp"
#include "lifeforge/types.hpp"

namespace lifeforge::bench {

struct StreamItem {
    Timestamp time = 0;
    std::string type;   // artifact kind or "health"
    int64_t source_id = 0;
    std::string text;   // summarized/textual form
};

struct BenchSession {
    std::string user_id;
    std::vector<Contact> contacts;   // static directory, exported once
    std::vector<StreamItem> stream;  // time-ordered
    std::vector<QAItem> questions;   // served at ask_time boundaries
};

// Throws std::runtime_error naming the artifact when a structured item lacks
// its summarized_info text.
BenchSession build_session(const std::string& user_id,
                           const std::vector<PhoneArtifact>& artifacts,
                           const std::vector<HealthRecord>& health,
                           const std::vector<QAItem>& questions);

Json session_to_json(const BenchSession& s);
BenchSession session_from_json(const Json& j);

// True when every evidence artifact of every question is streamed before the
// question would be served.
bool temporal_integrity(const BenchSession& s);

// ----------------------------------------------------------------- adapters

struct ServedQuestion {
    std::string question_id;
    std::string question;
    std::vector<QaOption> options;  // empty for short answers
    std::string ask_time;
};

class Adapter {
public:
    virtual ~Adapter() = default;
    virtual void ingest(const StreamItem& item) = 0;
    // nullopt = unanswered (timeout / refusal to reply).
    virtual std::optional<std::string> answer(const ServedQuestion& q) = 0;
    virtual std::string name() const = 0;
};

// Reference baseline: keeps the full stream and answers extractively through
// the generation backend. Sees everything; a sanity ceiling, not a system.
std::unique_ptr<Adapter> make_fullcontext_adapter(gen::GenBackend& backend);
// Always answers the unanswerable sentinel.
std::unique_ptr<Adapter> make_echo_adapter();
// Never answers; models a timed-out system.
std::unique_ptr<Adapter> make_mute_adapter();
// NDJSON over stdio to a subprocess: {"type":"ingest"|"question"|"answer",...}.
std::unique_ptr<Adapter> make_command_adapter(const std::string& command,
                                              int timeout_ms = 30000);
// Same messages POSTed to an HTTP endpoint.
std::unique_ptr<Adapter> make_http_adapter(const std::string& url, int timeout_ms = 30000);

// -------------------------------------------------------------------- runs

struct CostLedger {
    double wall_time_s = 0.0;
    int64_t llm_calls = 0;
    int64_t tokens_in = 0;
    int64_t tokens_out = 0;
    double est_cost = 0.0;

    Json to_json() const;
};

struct AdapterAnswer {
    std::string question_id;
    std::optional<std::string> answer;
    double latency_s = 0.0;
};

struct RunResult {
    std::vector<AdapterAnswer> answers;
    CostLedger ledger;
};

struct RunConfig {
    double cost_per_1k_tokens_in = 0.0005;
    double cost_per_1k_tokens_out = 0.0015;
    const gen::GenBackend* metered_backend = nullptr;  // token source, if any
};

// Streams items in order, serving each question once the stream has crossed
// into its ask_time month.
RunResult run_adapter(const BenchSession& session, Adapter& adapter,
                      const RunConfig& cfg = {});

// ------------------------------------------------------------------ judging

struct JudgeVerdict {
    std::string question_id;
    std::string model_answer;
    bool correct = false;
    std::string judge_raw;
};

struct BenchScore {
    std::vector<JudgeVerdict> verdicts;
    std::map<std::string, std::pair<int, int>> category_counts;  // correct, total
    double overall = 0.0;

    double category_accuracy(const std::string& cat) const {
        auto it = category_counts.find(cat);
        if (it == category_counts.end() || it->second.second == 0) return 0.0;
        return static_cast<double>(it->second.first) / it->second.second;
    }
    Json to_json() const;
};

// Offline judge: letter equality for multiple choice (including the
// sentinel), normalized-string + score-point keyword matching for short
// answers. A weaker proxy than a judge model; pure and deterministic.
BenchScore judge_offline(const BenchSession& session, const RunResult& run);

// Remote judge through a generation backend using a fixed evaluation prompt;
// multiple choice is still scored by letter equality.
BenchScore judge_remote(const BenchSession& session, const RunResult& run,
                        gen::GenBackend& judge_backend);

std::string question_id_of(const std::string& user_id, size_t index);

}  // namespace lifeforge::bench
