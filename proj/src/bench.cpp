#include "lifeforge/bench.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

#include "lifeforge/qagen.hpp"

namespace lifeforge::bench {

namespace {

std::string normalize(const std::string& s) {
    std::string out;
    for (char ch : s) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
        else if (!out.empty() && out.back() != ' ') out.push_back(' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

Day ask_month_start(const std::string& ask_time) {
    auto ym = parse_month(ask_time);
    if (!ym) return 0;
    return days_from_civil(ym->first, ym->second, 1);
}

}  // namespace

std::string question_id_of(const std::string& user_id, size_t index) {
    return user_id + "/q" + std::to_string(index);
}

BenchSession build_session(const std::string& user_id,
                           const std::vector<PhoneArtifact>& artifacts,
                           const std::vector<HealthRecord>& health,
                           const std::vector<QAItem>& questions) {
    BenchSession s;
    s.user_id = user_id;
    for (const auto& a : artifacts) {
        std::string kind = artifact_kind(a);
        if (kind == "contact") {
            s.contacts.push_back(std::get<Contact>(a));
            continue;
        }
        std::string text = artifact_text(a);
        bool needs_summary = kind == "calendar" || kind == "photo" || kind == "note" ||
                             kind == "push";
        if (needs_summary && text.empty())
            throw std::runtime_error("export: " + kind + " artifact phone_id " +
                                     std::to_string(artifact_phone_id(a)) +
                                     " has no summarized_info");
        s.stream.push_back({artifact_time(a), kind, artifact_phone_id(a), text});
    }
    for (const auto& h : health) {
        if (h.summarized_info.empty())
            throw std::runtime_error("export: health record " + format_date(h.date) +
                                     " has no summarized_info");
        s.stream.push_back({static_cast<Timestamp>(h.date) * kSecondsPerDay + 23 * 3600,
                            "health", h.phone_id, h.summarized_info});
    }
    std::sort(s.stream.begin(), s.stream.end(), [](const StreamItem& a, const StreamItem& b) {
        if (a.time != b.time) return a.time < b.time;
        if (a.type != b.type) return a.type < b.type;
        return a.source_id < b.source_id;
    });
    s.questions = questions;
    std::stable_sort(s.questions.begin(), s.questions.end(),
                     [](const QAItem& a, const QAItem& b) { return a.ask_time < b.ask_time; });
    return s;
}

Json session_to_json(const BenchSession& s) {
    Json j;
    j["user_id"] = s.user_id;
    Json contacts = Json::array();
    for (const auto& c : s.contacts) contacts.push_back(to_json(PhoneArtifact(c)));
    j["contacts"] = contacts;
    // Items grouped into dated sessions, one per calendar day.
    Json sessions = Json::array();
    Json current_items = Json::array();
    Day current_day = 0;
    bool have_day = false;
    auto flush = [&]() {
        if (!have_day) return;
        Json sess;
        sess["date_time"] = format_date(current_day);
        sess["items"] = current_items;
        sessions.push_back(sess);
        current_items = Json::array();
    };
    for (const auto& item : s.stream) {
        Day d = day_of(item.time);
        if (!have_day || d != current_day) {
            flush();
            current_day = d;
            have_day = true;
        }
        Json it;
        it["time"] = format_timestamp(item.time);
        it["type"] = item.type;
        it["id"] = item.source_id;
        it["text"] = item.text;
        current_items.push_back(it);
    }
    flush();
    j["sessions"] = sessions;
    Json qa = Json::array();
    for (size_t i = 0; i < s.questions.size(); ++i) {
        Json q = to_json(s.questions[i]);
        q["question_id"] = question_id_of(s.user_id, i);
        qa.push_back(q);
    }
    j["qa"] = qa;
    return j;
}

BenchSession session_from_json(const Json& j) {
    BenchSession s;
    s.user_id = j.value("user_id", std::string{});
    for (const auto& cj : j.value("contacts", Json::array()))
        s.contacts.push_back(std::get<Contact>(artifact_from_json(cj)));
    for (const auto& sess : j.value("sessions", Json::array()))
        for (const auto& it : sess.value("items", Json::array())) {
            StreamItem item;
            item.time = parse_timestamp(it.value("time", std::string{})).value_or(0);
            item.type = it.value("type", std::string{});
            item.source_id = it.value("id", static_cast<int64_t>(0));
            item.text = it.value("text", std::string{});
            s.stream.push_back(std::move(item));
        }
    for (const auto& qj : j.value("qa", Json::array())) s.questions.push_back(qa_from_json(qj));
    return s;
}

bool temporal_integrity(const BenchSession& s) {
    // Track when each artifact is streamed, then check each question's
    // serving position against its evidence.
    std::map<std::pair<std::string, int64_t>, size_t> streamed_at;
    for (size_t i = 0; i < s.stream.size(); ++i)
        streamed_at[{s.stream[i].type, s.stream[i].source_id}] = i;

    for (const auto& q : s.questions) {
        Day serve_day = ask_month_start(q.ask_time);
        // Serving position: first stream index at or beyond the ask month.
        size_t pos = s.stream.size();
        for (size_t i = 0; i < s.stream.size(); ++i) {
            if (day_of(s.stream[i].time) >= serve_day) {
                pos = i;
                break;
            }
        }
        for (const auto& ev : q.evidence) {
            auto it = streamed_at.find({ev.type, ev.id});
            if (it == streamed_at.end()) return false;
            if (it->second >= pos) return false;
        }
    }
    return true;
}

// --------------------------------------------------------------- adapters

namespace {

class FullContextAdapter final : public Adapter {
public:
    explicit FullContextAdapter(gen::GenBackend& backend) : backend_(backend) {}

    void ingest(const StreamItem& item) override {
        context_ += format_timestamp(item.time) + " [" + item.type + "] " + item.text + "\n";
    }

    std::optional<std::string> answer(const ServedQuestion& q) override {
        gen::GenRequest req;
        req.stage = "answer";
        req.seed = gen::derive_seed(0x5eed, "answer", q.question_id);
        req.response_schema = "text";
        req.add("context", context_);
        req.add("question", q.question);
        if (!q.options.empty()) {
            Json opts = Json::array();
            for (const auto& o : q.options)
                opts.push_back(Json{{"option", o.option}, {"content", o.content}});
            req.add_json("options", opts);
        }
        try {
            return backend_.generate(req).value("text", std::string{});
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }

    std::string name() const override { return "fullcontext"; }

private:
    gen::GenBackend& backend_;
    std::string context_;
};

class EchoAdapter final : public Adapter {
public:
    void ingest(const StreamItem&) override {}
    std::optional<std::string> answer(const ServedQuestion&) override {
        return std::string(kNotInMemory);
    }
    std::string name() const override { return "echo_not_in_memory"; }
};

class MuteAdapter final : public Adapter {
public:
    void ingest(const StreamItem&) override {}
    std::optional<std::string> answer(const ServedQuestion&) override { return std::nullopt; }
    std::string name() const override { return "mute"; }
};

Json served_to_json(const ServedQuestion& q) {
    Json j;
    j["question_id"] = q.question_id;
    j["question"] = q.question;
    if (!q.options.empty()) {
        Json opts = Json::array();
        for (const auto& o : q.options)
            opts.push_back(Json{{"option", o.option}, {"content", o.content}});
        // The sentinel choice is presented at serving time.
        opts.push_back(Json{{"option", "E"}, {"content", kNotInMemory}});
        j["options"] = opts;
    }
    j["ask_time"] = q.ask_time;
    return j;
}

// NDJSON over bidirectional pipes to a subprocess.
class CommandAdapter final : public Adapter {
public:
    CommandAdapter(std::string command, int timeout_ms)
        : command_(std::move(command)), timeout_ms_(timeout_ms) {
        start();
    }

    ~CommandAdapter() override {
        if (in_fd_ >= 0) close(in_fd_);
        if (out_fd_ >= 0) close(out_fd_);
        if (pid_ > 0) {
            kill(pid_, SIGTERM);
            int status = 0;
            waitpid(pid_, &status, 0);
        }
    }

    void ingest(const StreamItem& item) override {
        Json msg;
        msg["type"] = "ingest";
        msg["payload"] = Json{{"time", format_timestamp(item.time)},
                              {"kind", item.type},
                              {"id", item.source_id},
                              {"text", item.text}};
        send(msg);
    }

    std::optional<std::string> answer(const ServedQuestion& q) override {
        Json msg;
        msg["type"] = "question";
        msg["payload"] = served_to_json(q);
        if (!send(msg)) return std::nullopt;
        auto reply = read_line(timeout_ms_);
        if (!reply) return std::nullopt;
        Json r = Json::parse(*reply, nullptr, false);
        if (r.is_discarded() || r.value("type", std::string{}) != "answer")
            return std::nullopt;
        return r["payload"].value("answer", std::string{});
    }

    std::string name() const override { return "command:" + command_; }

private:
    void start() {
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw std::runtime_error("adapter: pipe failed");
        pid_ = fork();
        if (pid_ < 0) throw std::runtime_error("adapter: fork failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        in_fd_ = to_child[1];
        out_fd_ = from_child[0];
    }

    bool send(const Json& msg) {
        std::string line = msg.dump() + "\n";
        ssize_t n = write(in_fd_, line.data(), line.size());
        return n == static_cast<ssize_t>(line.size());
    }

    std::optional<std::string> read_line(int timeout_ms) {
        auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(timeout_ms);
        for (;;) {
            auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            int remaining = static_cast<int>(
                std::chrono::duration_cast<std::chrono::milliseconds>(
                    deadline - std::chrono::steady_clock::now())
                    .count());
            if (remaining <= 0) return std::nullopt;
            pollfd pfd{out_fd_, POLLIN, 0};
            int rc = poll(&pfd, 1, remaining);
            if (rc <= 0) return std::nullopt;
            char chunk[4096];
            ssize_t n = read(out_fd_, chunk, sizeof(chunk));
            if (n <= 0) return std::nullopt;
            buffer_.append(chunk, static_cast<size_t>(n));
        }
    }

    std::string command_;
    int timeout_ms_;
    pid_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    std::string buffer_;
};

class HttpAdapter final : public Adapter {
public:
    HttpAdapter(std::string url, int timeout_ms) : url_(std::move(url)), timeout_ms_(timeout_ms) {}

    void ingest(const StreamItem& item) override {
        Json msg;
        msg["type"] = "ingest";
        msg["payload"] = Json{{"time", format_timestamp(item.time)},
                              {"kind", item.type},
                              {"id", item.source_id},
                              {"text", item.text}};
        post(msg);
    }

    std::optional<std::string> answer(const ServedQuestion& q) override {
        Json msg;
        msg["type"] = "question";
        msg["payload"] = served_to_json(q);
        auto body = post(msg);
        if (!body) return std::nullopt;
        Json r = Json::parse(*body, nullptr, false);
        if (r.is_discarded()) return std::nullopt;
        if (r.contains("payload")) return r["payload"].value("answer", std::string{});
        return r.value("answer", std::string{});
    }

    std::string name() const override { return "http:" + url_; }

private:
    std::optional<std::string> post(const Json& msg) {
        httplib::Client client(url_);
        client.set_connection_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
        client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
        auto res = client.Post("/", msg.dump(), "application/json");
        if (!res || res->status != 200) return std::nullopt;
        return res->body;
    }

    std::string url_;
    int timeout_ms_;
};

}  // namespace

std::unique_ptr<Adapter> make_fullcontext_adapter(gen::GenBackend& backend) {
    return std::make_unique<FullContextAdapter>(backend);
}
std::unique_ptr<Adapter> make_echo_adapter() { return std::make_unique<EchoAdapter>(); }
std::unique_ptr<Adapter> make_mute_adapter() { return std::make_unique<MuteAdapter>(); }
std::unique_ptr<Adapter> make_command_adapter(const std::string& command, int timeout_ms) {
    return std::make_unique<CommandAdapter>(command, timeout_ms);
}
std::unique_ptr<Adapter> make_http_adapter(const std::string& url, int timeout_ms) {
    return std::make_unique<HttpAdapter>(url, timeout_ms);
}

// -------------------------------------------------------------------- runs

Json CostLedger::to_json() const {
    return Json{{"wall_time_s", wall_time_s},
                {"llm_calls", llm_calls},
                {"tokens_in", tokens_in},
                {"tokens_out", tokens_out},
                {"est_cost", est_cost}};
}

RunResult run_adapter(const BenchSession& session, Adapter& adapter, const RunConfig& cfg) {
    RunResult result;
    auto t0 = std::chrono::steady_clock::now();
    gen::CallStats stats0 =
        cfg.metered_backend ? cfg.metered_backend->stats() : gen::CallStats{};

    // Questions sorted by serving day.
    std::vector<std::pair<Day, size_t>> pending;
    for (size_t i = 0; i < session.questions.size(); ++i)
        pending.emplace_back(ask_month_start(session.questions[i].ask_time), i);
    std::stable_sort(pending.begin(), pending.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    size_t next_q = 0;

    auto serve = [&](size_t qi) {
        const QAItem& q = session.questions[qi];
        ServedQuestion served;
        served.question_id = question_id_of(session.user_id, qi);
        served.question = q.question;
        served.options = q.options;
        served.ask_time = q.ask_time;
        auto q0 = std::chrono::steady_clock::now();
        auto ans = adapter.answer(served);
        auto q1 = std::chrono::steady_clock::now();
        result.answers.push_back(
            {served.question_id, ans,
             std::chrono::duration<double>(q1 - q0).count()});
    };

    for (const auto& item : session.stream) {
        while (next_q < pending.size() && pending[next_q].first <= day_of(item.time)) {
            serve(pending[next_q].second);
            ++next_q;
        }
        adapter.ingest(item);
    }
    while (next_q < pending.size()) serve(pending[next_q++].second);

    auto t1 = std::chrono::steady_clock::now();
    result.ledger.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    if (cfg.metered_backend) {
        gen::CallStats stats1 = cfg.metered_backend->stats();
        result.ledger.llm_calls = stats1.calls - stats0.calls;
        result.ledger.tokens_in = stats1.tokens_in - stats0.tokens_in;
        result.ledger.tokens_out = stats1.tokens_out - stats0.tokens_out;
        result.ledger.est_cost =
            result.ledger.tokens_in / 1000.0 * cfg.cost_per_1k_tokens_in +
            result.ledger.tokens_out / 1000.0 * cfg.cost_per_1k_tokens_out;
    }
    return result;
}

// ------------------------------------------------------------------ judging

namespace {

bool judge_one_offline(const QAItem& q, const std::string& answer, std::string& rationale) {
    std::string norm = normalize(answer);
    if (q.format == QaFormat::multiple_choice) {
        std::string gold = normalize(q.answer);
        if (norm == gold) {
            rationale = "letter match";
            return true;
        }
        // A bare sentinel answer matches an unanswerable gold letter-by-text.
        if (gold == normalize(kNotInMemory) &&
            norm.find(normalize(kNotInMemory)) != std::string::npos) {
            rationale = "sentinel match";
            return true;
        }
        rationale = "letter mismatch";
        return false;
    }
    if (q.answer == kNotInMemory) {
        bool refused = norm.find(normalize(kNotInMemory)) != std::string::npos ||
                       norm.find("unanswerable") != std::string::npos ||
                       norm.find("cannot answer") != std::string::npos;
        rationale = refused ? "refusal detected" : "expected a refusal";
        return refused;
    }
    if (norm.empty()) {
        rationale = "empty answer";
        return false;
    }
    if (norm.find(normalize(q.answer)) != std::string::npos) {
        rationale = "normalized answer contained";
        return true;
    }
    int total = 0, matched = 0;
    for (const auto& sp : q.score_points) {
        total += sp.score;
        if (qa::keyword_entailed(sp.description, answer)) matched += sp.score;
    }
    if (total > 0 && matched * 2 >= total) {
        rationale = "score points matched " + std::to_string(matched) + "/" +
                    std::to_string(total);
        return true;
    }
    rationale = "insufficient score-point coverage";
    return false;
}

BenchScore score_runs(const BenchSession& session, const RunResult& run,
                      const std::function<bool(const QAItem&, const std::string&,
                                               std::string&)>& judge_fn) {
    BenchScore score;
    std::map<std::string, size_t> by_id;
    for (size_t i = 0; i < session.questions.size(); ++i)
        by_id[question_id_of(session.user_id, i)] = i;

    int correct_total = 0;
    for (const auto& aa : run.answers) {
        auto it = by_id.find(aa.question_id);
        if (it == by_id.end()) continue;
        const QAItem& q = session.questions[it->second];
        JudgeVerdict v;
        v.question_id = aa.question_id;
        v.model_answer = aa.answer.value_or("");
        if (!aa.answer) {
            v.correct = false;
            v.judge_raw = "unanswered";
        } else {
            v.correct = judge_fn(q, *aa.answer, v.judge_raw);
        }
        auto& cat = score.category_counts[q.question_type];
        cat.second += 1;
        cat.first += v.correct ? 1 : 0;
        correct_total += v.correct ? 1 : 0;
        score.verdicts.push_back(std::move(v));
    }
    score.overall = score.verdicts.empty()
                        ? 0.0
                        : static_cast<double>(correct_total) / score.verdicts.size();
    return score;
}

}  // namespace

BenchScore judge_offline(const BenchSession& session, const RunResult& run) {
    return score_runs(session, run, judge_one_offline);
}

BenchScore judge_remote(const BenchSession& session, const RunResult& run,
                        gen::GenBackend& judge_backend) {
    return score_runs(session, run,
                      [&](const QAItem& q, const std::string& answer, std::string& rationale) {
                          if (q.format == QaFormat::multiple_choice)
                              return judge_one_offline(q, answer, rationale);
                          gen::GenRequest req;
                          req.stage = "judge";
                          req.seed = gen::derive_seed(0x1ead, "judge", q.question);
                          req.response_schema = "verdict";
                          req.add("instructions",
                                  "Decide whether the model answer matches the gold answer. "
                                  "Reply with a JSON object {\"correct\": true|false}.");
                          req.add("question", q.question);
                          req.add("gold", q.answer);
                          req.add("model_answer", answer);
                          try {
                              Json out = judge_backend.generate(req);
                              rationale = out.dump();
                              return out.value("correct", false);
                          } catch (const std::exception& e) {
                              rationale = std::string("judge unavailable: ") + e.what();
                              return false;
                          }
                      });
}

Json BenchScore::to_json() const {
    Json j;
    j["overall"] = overall;
    Json cats;
    for (const auto& [cat, counts] : category_counts) {
        cats[cat] = Json{{"correct", counts.first},
                         {"total", counts.second},
                         {"accuracy", counts.second
                                          ? static_cast<double>(counts.first) / counts.second
                                          : 0.0}};
    }
    j["categories"] = cats;
    Json vs = Json::array();
    for (const auto& v : verdicts)
        vs.push_back(Json{{"question_id", v.question_id},
                          {"model_answer", v.model_answer},
                          {"correct", v.correct},
                          {"judge_raw", v.judge_raw}});
    j["verdicts"] = vs;
    return j;
}

}  // namespace lifeforge::bench
