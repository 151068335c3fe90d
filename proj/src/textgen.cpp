#include "lifeforge/textgen.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <thread>

namespace lifeforge::gen {

void GenBackend::apply_latency() const {
    if (latency_ms_ > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(latency_ms_));
}

int64_t approx_tokens(const std::string& text) {
    int64_t n = 0;
    bool in_word = false;
    for (char c : text) {
        bool sep = std::isspace(static_cast<unsigned char>(c));
        if (!sep && !in_word) ++n;
        in_word = !sep;
    }
    return n;
}

namespace {

// Lowercased alphanumeric tokens.
std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Maps activity vocabulary onto shared topic tokens so retrieval has a
// similarity signal beyond exact word overlap.
const std::pair<const char*, const char*> kTopicLexicon[] = {
    {"swim", "sport"},      {"swimming", "sport"},  {"pool", "sport"},
    {"run", "sport"},       {"running", "sport"},   {"jog", "sport"},
    {"marathon", "sport"},  {"workout", "sport"},   {"gym", "sport"},
    {"yoga", "sport"},      {"fitness", "sport"},   {"cycling", "sport"},
    {"hike", "sport"},      {"exercise", "sport"},  {"training", "sport"},
    {"tax", "finance"},     {"filing", "finance"},  {"invoice", "finance"},
    {"budget", "finance"},  {"salary", "finance"},  {"insurance", "finance"},
    {"invest", "finance"},  {"banking", "finance"},
    {"dinner", "meal"},     {"lunch", "meal"},      {"breakfast", "meal"},
    {"restaurant", "meal"}, {"tea", "meal"},        {"cooking", "meal"},
    {"meeting", "work"},    {"client", "work"},     {"office", "work"},
    {"report", "work"},     {"presentation", "work"},
    {"doctor", "medical"},  {"clinic", "medical"},  {"hospital", "medical"},
    {"checkup", "medical"}, {"examination", "medical"},
    {"family", "social"},   {"friend", "social"},   {"gathering", "social"},
    {"party", "social"},    {"wedding", "social"},
};

class HashEmbedder final : public Embedder {
public:
    explicit HashEmbedder(size_t dim) : dim_(dim) {}

    EmbeddingVector embed(const std::string& text) override {
        if (text.empty()) throw std::invalid_argument("embed: empty text");
        std::vector<float> v(dim_, 0.0f);
        auto bump = [&](const std::string& token, float w) {
            uint64_t h = fnv1a(token);
            v[h % dim_] += w;
            v[(h >> 17) % dim_] += w * 0.5f;
        };
        for (const auto& tok : tokenize(text)) {
            bump(tok, 1.0f);
            for (const auto& [word, topic] : kTopicLexicon)
                if (tok == word) bump(topic, 1.0f);
        }
        double norm = 0.0;
        for (float x : v) norm += static_cast<double>(x) * x;
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (float& x : v) x = static_cast<float>(x / norm);
        return {std::move(v), "hash-overlap-128"};
    }

private:
    size_t dim_;
};

}  // namespace

std::unique_ptr<Embedder> make_hash_embedder(size_t dim) {
    return std::make_unique<HashEmbedder>(dim);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.values.size() != b.values.size() || a.values.empty()) return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        dot += static_cast<double>(a.values[i]) * b.values[i];
        na += static_cast<double>(a.values[i]) * a.values[i];
        nb += static_cast<double>(b.values[i]) * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

}  // namespace lifeforge::gen
