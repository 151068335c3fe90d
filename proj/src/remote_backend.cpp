// Remote provider speaking an OpenAI-compatible chat-completions API.
// Transport failures retry up to max_attempts; unparseable JSON output goes
// through a bounded repair loop before surfacing a schema error.

#include <cstdlib>

#include <httplib.h>

#include "lifeforge/textgen.hpp"

namespace lifeforge::gen {

namespace {

std::string render_prompt(const GenRequest& req) {
    std::string prompt;
    prompt += "Stage: " + req.stage + "\n";
    prompt += "Respond with a single JSON document matching the \"" + req.response_schema +
              "\" schema. No prose outside the JSON.\n\n";
    for (const auto& [name, text] : req.sections) {
        prompt += "## " + name + "\n" + text + "\n\n";
    }
    return prompt;
}

// Strips markdown fences that chat models like to wrap JSON in.
std::string strip_fences(std::string s) {
    auto start = s.find("```");
    if (start != std::string::npos) {
        auto nl = s.find('\n', start);
        auto end = s.rfind("```");
        if (nl != std::string::npos && end != std::string::npos && end > nl)
            s = s.substr(nl + 1, end - nl - 1);
    }
    return s;
}

class RemoteBackend final : public GenBackend {
public:
    explicit RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {}

    Json generate(const GenRequest& req) override {
        apply_latency();
        if (cfg_.url.empty())
            throw GenError(GenError::Kind::transport,
                           "remote backend not configured: set LIFEFORGE_LLM_URL", 0);
        std::string prompt = render_prompt(req);
        std::string raw = chat(prompt);
        for (int repair = 0;; ++repair) {
            Json parsed = Json::parse(strip_fences(raw), nullptr, false);
            if (!parsed.is_discarded()) {
                record_call(approx_tokens(prompt), approx_tokens(raw));
                return parsed;
            }
            if (repair >= cfg_.max_repairs)
                throw GenError(GenError::Kind::schema,
                               "stage " + req.stage + ": output is not valid JSON after " +
                                   std::to_string(cfg_.max_repairs) + " repairs",
                               0, raw);
            raw = chat("The following was supposed to be a single valid JSON document but is "
                       "not. Return the corrected JSON only.\n\n" + raw);
        }
    }

    std::string name() const override { return "remote"; }

private:
    std::string chat(const std::string& user_prompt) {
        Json body;
        body["model"] = cfg_.model;
        body["temperature"] = cfg_.temperature;
        body["messages"] = Json::array(
            {Json{{"role", "system"},
                  {"content", "You produce strictly valid JSON documents for a personal "
                              "life-simulation pipeline. Follow the requested schema exactly."}},
             Json{{"role", "user"}, {"content", user_prompt}}});

        std::string last_error;
        for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
            httplib::Client client(cfg_.url);
            client.set_connection_timeout(cfg_.timeout_s);
            client.set_read_timeout(cfg_.timeout_s);
            httplib::Headers headers;
            if (!cfg_.key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.key);
            auto res = client.Post("/v1/chat/completions", headers, body.dump(),
                                   "application/json");
            if (!res) {
                last_error = "transport failure: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status != 200) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            Json reply = Json::parse(res->body, nullptr, false);
            if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
                last_error = "malformed completion payload";
                continue;
            }
            return reply["choices"][0]["message"]["content"].get<std::string>();
        }
        throw GenError(GenError::Kind::transport, last_error, cfg_.max_attempts);
    }

    RemoteConfig cfg_;
};

}  // namespace

RemoteConfig remote_config_from_env() {
    RemoteConfig cfg;
    if (const char* url = std::getenv("LIFEFORGE_LLM_URL")) cfg.url = url;
    if (const char* key = std::getenv("LIFEFORGE_LLM_KEY")) cfg.key = key;
    if (const char* model = std::getenv("LIFEFORGE_LLM_MODEL")) cfg.model = model;
    return cfg;
}

std::unique_ptr<GenBackend> make_remote_backend(RemoteConfig cfg) {
    return std::make_unique<RemoteBackend>(std::move(cfg));
}

}  // namespace lifeforge::gen
