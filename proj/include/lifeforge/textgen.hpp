#pragma once
// Pluggable text generation and embedding.
//
// Two providers sit behind one interface: a deterministic template backend
// (grammar-driven filler over phrase banks, pure in stage+sections+seed)
// and a remote OpenAI-compatible chat-completions client. Callers never
// branch on which one is active.

#include <atomic>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lifeforge/rng.hpp"
#include "lifeforge/types.hpp"

namespace lifeforge::gen {

struct GenRequest {
    std::string stage;  // pipeline stage name, e.g. "decompose"
    std::vector<std::pair<std::string, std::string>> sections;  // ordered named blocks
    uint64_t seed = 0;
    std::string response_schema;  // core type name or "text"

    void add(std::string name, std::string text) {
        sections.emplace_back(std::move(name), std::move(text));
    }
    void add_json(std::string name, const Json& j) { add(std::move(name), j.dump()); }
    const std::string* find(const std::string& name) const {
        for (const auto& [k, v] : sections)
            if (k == name) return &v;
        return nullptr;
    }
};

class GenError : public std::runtime_error {
public:
    enum class Kind { transport, schema, stage };

    GenError(Kind k, const std::string& msg, int attempts_made = 0, std::string raw_text = {})
        : std::runtime_error(msg), kind(k), attempts(attempts_made), raw(std::move(raw_text)) {}

    Kind kind;
    int attempts;     // for transport errors: how many tries were made
    std::string raw;  // for schema errors: the unparseable model output
};

struct CallStats {
    int64_t calls = 0;
    int64_t tokens_in = 0;
    int64_t tokens_out = 0;
};

class GenBackend {
public:
    virtual ~GenBackend() = default;

    // Returns a document matching req.response_schema; free text comes back
    // as {"text": "..."}. Thread-safe.
    virtual Json generate(const GenRequest& req) = 0;
    virtual std::string name() const = 0;

    // Synthetic per-call latency, used by the scalability harness.
    void set_latency_ms(int ms) { latency_ms_ = ms; }
    int latency_ms() const { return latency_ms_; }

    CallStats stats() const {
        return {calls_.load(), tokens_in_.load(), tokens_out_.load()};
    }

protected:
    void record_call(int64_t tk_in, int64_t tk_out) {
        calls_.fetch_add(1);
        tokens_in_.fetch_add(tk_in);
        tokens_out_.fetch_add(tk_out);
    }
    void apply_latency() const;

private:
    int latency_ms_ = 0;
    std::atomic<int64_t> calls_{0};
    std::atomic<int64_t> tokens_in_{0};
    std::atomic<int64_t> tokens_out_{0};
};

// Seed for a nested generation step: stable across machines and schedules.
inline uint64_t derive_seed(uint64_t global_seed, std::string_view stage,
                            std::string_view entity) {
    return fnv1a(entity, fnv1a(stage, fnv1a_u64(global_seed)));
}

int64_t approx_tokens(const std::string& text);

// ----------------------------------------------------------------- template

// Fully deterministic offline provider. See template_backend.cpp for the
// per-stage grammars.
std::unique_ptr<GenBackend> make_template_backend();

// ------------------------------------------------------------------- remote

struct RemoteConfig {
    std::string url;    // e.g. "http://host:8000"; env LIFEFORGE_LLM_URL
    std::string key;    // env LIFEFORGE_LLM_KEY
    std::string model = "deepseek-r1";
    double temperature = 0.7;  // decoding parameters are not pinned anywhere; config only
    int max_attempts = 3;
    int max_repairs = 2;
    int timeout_s = 120;
};

RemoteConfig remote_config_from_env();
std::unique_ptr<GenBackend> make_remote_backend(RemoteConfig cfg);

// ---------------------------------------------------------------- embedding

struct EmbeddingVector {
    std::vector<float> values;
    std::string model_tag;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    // Throws std::invalid_argument on empty text.
    virtual EmbeddingVector embed(const std::string& text) = 0;
};

// Token-overlap hashing with a small topic lexicon so near-synonyms
// ("pool workout" vs "swimming session") land in shared dimensions.
std::unique_ptr<Embedder> make_hash_embedder(size_t dim = 128);

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace lifeforge::gen
