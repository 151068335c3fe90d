#include "lifeforge/qagen.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "lifeforge/parallel.hpp"
#include "lifeforge/validate.hpp"

namespace lifeforge::qa {

namespace {

std::vector<std::string> tokens_of(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
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

const std::set<std::string> kStopwords = {
    "the", "and", "for", "with", "that", "this", "was", "were", "are", "has",
    "had", "did", "does", "not", "you", "her", "his", "she", "they", "their",
    "from", "into", "onto", "over", "under", "about", "a", "an", "of", "in",
    "on", "at", "to", "is", "it", "its", "as", "by", "or"};

std::vector<std::string> content_tokens(const std::string& s) {
    std::vector<std::string> out;
    for (auto& t : tokens_of(s))
        if (t.size() > 2 && !kStopwords.count(t)) out.push_back(t);
    return out;
}

bool is_count_answer(const QAItem& q) {
    if (q.question_type != "mutihop reasoning" && q.question_type != "temporal") return false;
    std::string target = q.answer;
    if (q.format == QaFormat::multiple_choice) {
        for (const auto& o : q.options)
            if (o.option == q.answer) target = o.content;
    }
    return !target.empty() &&
           std::all_of(target.begin(), target.end(),
                       [](unsigned char c) { return std::isdigit(c); });
}

// Sport/habit patterns for counting questions.
struct Pattern {
    const char* label;
    const char* phrase;
    std::vector<const char*> keywords;
};
const std::vector<Pattern> kPatterns = {
    {"running", "running training", {"run", "jog", "marathon"}},
    {"yoga", "yoga practice", {"yoga"}},
    {"grocery", "grocery shopping", {"grocery", "market"}},
    {"family dinner", "family dinners", {"family dinner"}},
};

bool matches_pattern(const std::string& name, const Pattern& p) {
    std::string low;
    for (char c : name) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (const char* k : p.keywords)
        if (low.find(k) != std::string::npos) return true;
    return false;
}

std::string next_month_label(Day d) {
    CivilDate c = civil_from_days(d);
    int m = c.month == 12 ? 1 : c.month + 1;
    int y = c.month == 12 ? c.year + 1 : c.year;
    return format_month(y, m);
}

}  // namespace

bool keyword_entailed(const std::string& needle, const std::string& haystack) {
    auto need = content_tokens(needle);
    if (need.empty()) need = tokens_of(needle);
    if (need.empty()) return false;
    std::set<std::string> have;
    for (auto& t : tokens_of(haystack)) have.insert(t);
    for (const auto& t : need)
        if (!have.count(t)) return false;
    return true;
}

namespace {

// Self-containment screen: every token counts, including numerics, so date
// or clock answers are only "contained" when literally present.
bool strictly_contained(const std::string& needle, const std::string& haystack) {
    auto need = tokens_of(needle);
    std::vector<std::string> filtered;
    for (auto& t : need)
        if (!kStopwords.count(t)) filtered.push_back(t);
    if (filtered.empty()) return false;
    std::set<std::string> have;
    for (auto& t : tokens_of(haystack)) have.insert(t);
    for (const auto& t : filtered)
        if (!have.count(t)) return false;
    return true;
}

}  // namespace

CategoryMix CategoryMix::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open QA mix file: " + path.string());
    Json j = Json::parse(in);
    CategoryMix m;
    if (j.contains("category")) {
        m.category.clear();
        for (auto it = j["category"].begin(); it != j["category"].end(); ++it)
            m.category[it.key()] = it.value().get<double>();
    }
    m.mc_fraction = j.value("mc_fraction", m.mc_fraction);
    m.pair_rate = j.value("pair_rate", m.pair_rate);
    return m;
}

std::vector<QaSlot> build_schedule(Day start, Day end, const CategoryMix& mix, double per_day,
                                   uint64_t seed, const std::string& user_id) {
    std::vector<QaSlot> slots;
    if (end < start) return slots;

    // Per-day base counts.
    std::vector<int> counts;
    int base_total = 0;
    for (Day d = start; d <= end; ++d) {
        Rng rng(seed, "qa_count", user_id + "/" + format_date(d));
        int n = rng.next_poisson(per_day);
        counts.push_back(n);
        base_total += n;
    }
    if (base_total == 0) return slots;

    int n_pairs = static_cast<int>(base_total * mix.pair_rate + 0.5);
    int total = base_total + n_pairs;

    // Largest-remainder category apportionment over the final item count.
    std::vector<std::pair<std::string, double>> shares(mix.category.begin(),
                                                       mix.category.end());
    std::sort(shares.begin(), shares.end());
    std::vector<int> quota(shares.size(), 0);
    {
        std::vector<double> frac(shares.size());
        int assigned = 0;
        for (size_t i = 0; i < shares.size(); ++i) {
            double exact = shares[i].second * total;
            quota[i] = static_cast<int>(exact);
            frac[i] = exact - quota[i];
            assigned += quota[i];
        }
        while (assigned < total) {
            size_t best = 0;
            for (size_t i = 1; i < frac.size(); ++i)
                if (frac[i] > frac[best]) best = i;
            ++quota[best];
            frac[best] = -1;
            ++assigned;
        }
    }
    int mc_total = static_cast<int>(total * mix.mc_fraction + 0.5);
    mc_total = std::max(mc_total, n_pairs);  // each pair consumes one MC slot
    // Pairs take one MC each; the remainder spreads over unpaired slots.
    int unpaired_total = total - 2 * n_pairs;
    double mc_share_unpaired =
        unpaired_total > 0
            ? static_cast<double>(mc_total - n_pairs) / static_cast<double>(unpaired_total)
            : 0.0;

    // Emit slots day by day; pairs spread evenly across eligible items.
    std::vector<int> remaining = quota;
    int emitted = 0, pairs_made = 0, pair_seq = 0;
    int unpaired_emitted = 0, mc_unpaired_made = 0;
    size_t day_idx = 0;
    int pair_stride = n_pairs > 0 ? std::max(1, base_total / n_pairs) : 0;
    for (Day d = start; d <= end; ++d, ++day_idx) {
        for (int k = 0; k < counts[day_idx]; ++k) {
            // Category with the largest deficit against its target share.
            size_t best = 0;
            double best_deficit = -1e18;
            for (size_t i = 0; i < shares.size(); ++i) {
                if (remaining[i] <= 0) continue;
                double deficit = static_cast<double>(remaining[i]) / shares[i].second;
                if (deficit > best_deficit) {
                    best_deficit = deficit;
                    best = i;
                }
            }
            QaSlot slot;
            slot.day = d;
            slot.category = shares[best].first;
            --remaining[best];
            bool pairable = slot.category != "UA" && pairs_made < n_pairs &&
                            pair_stride > 0 && emitted % pair_stride == 0 &&
                            remaining[best] > 0;
            if (pairable) {
                // Recognition (MC) half + recall (SA) twin on the same fact.
                slot.format = QaFormat::multiple_choice;
                slot.pair_id = user_id + "/pair/" + std::to_string(pair_seq++);
                slots.push_back(slot);
                QaSlot twin = slot;
                twin.format = QaFormat::short_answer;
                slots.push_back(twin);
                --remaining[best];
                ++pairs_made;
            } else {
                // Even spread of the unpaired MC budget.
                bool mc = static_cast<int>(mc_share_unpaired * (unpaired_emitted + 1)) >
                          mc_unpaired_made;
                slot.format = mc ? QaFormat::multiple_choice : QaFormat::short_answer;
                if (mc) ++mc_unpaired_made;
                ++unpaired_emitted;
                slots.push_back(slot);
            }
            ++emitted;
        }
    }
    return slots;
}

QaGenerator::QaGenerator(gen::GenBackend& backend, QaConfig cfg)
    : backend_(backend), cfg_(cfg) {}

namespace {

// Fact assembly: everything the rendering stage needs, computed from the
// corpus so that answers are correct by construction.
Json build_fact(const QaSlot& slot, const CorpusView& corpus, Rng& rng, bool& ok) {
    ok = true;
    const auto& events = *corpus.events;
    Json fact;

    auto events_on_day = [&](Day d) {
        std::vector<const EventNode*> out;
        for (const auto& e : events)
            if (!e.date.empty() && day_of(e.span().start) == d) out.push_back(&e);
        return out;
    };

    if (slot.category == "IE") {
        auto today = events_on_day(slot.day);
        for (Day back = slot.day - 1; today.empty() && back >= slot.day - 14; --back)
            today = events_on_day(back);
        if (today.empty()) {
            ok = false;
            return fact;
        }
        const EventNode* ev = today[rng.next_below(today.size())];
        // A location question about "Travel to X" would carry its own answer.
        bool about_location = rng.chance(0.6) && !ev->location.empty() &&
                              !keyword_entailed(ev->location, ev->name);
        fact["aspect"] = about_location ? "location" : "time";
        fact["name"] = ev->name;
        fact["date"] = format_date(day_of(ev->span().start));
        fact["location"] = ev->location;
        fact["start_clock"] = format_clock(second_of_day(ev->span().start));
        fact["event_ids"] = Json::array({ev->event_id});
        fact["dates"] = Json::array({format_date(day_of(ev->span().start))});
        // Distractors: other locations / shifted times seen in the corpus.
        Json distractors = Json::array();
        if (about_location) {
            std::set<std::string> seen{ev->location};
            for (const auto& e : events) {
                if (distractors.size() >= 3) break;
                if (!e.location.empty() && !seen.count(e.location)) {
                    distractors.push_back(e.location);
                    seen.insert(e.location);
                }
            }
            while (distractors.size() < 3)
                distractors.push_back("Somewhere in the city centre (option " +
                                      std::to_string(distractors.size() + 1) + ")");
        } else {
            for (int shift : {-150, 90, 200}) {
                int sod = second_of_day(ev->span().start) + shift * 60;
                sod = ((sod % 86400) + 86400) % 86400;
                distractors.push_back(format_clock(sod));
            }
        }
        fact["distractors"] = distractors;
    } else if (slot.category == "MR" || slot.category == "TKU") {
        CivilDate cd = civil_from_days(slot.day);
        Day lo = slot.category == "MR" ? days_from_civil(cd.year, cd.month, 1)
                                       : days_from_civil(cd.year, 1, 1);
        // Try patterns starting from a seeded offset until one has matches.
        size_t first = rng.next_below(kPatterns.size());
        const Pattern* chosen = nullptr;
        int count = 0;
        Json ids = Json::array(), dates = Json::array();
        for (size_t k = 0; k < kPatterns.size() && !chosen; ++k) {
            const Pattern& pat = kPatterns[(first + k) % kPatterns.size()];
            int n = 0;
            Json pid = Json::array(), pdates = Json::array();
            for (const auto& e : events) {
                if (e.date.empty()) continue;
                Day d = day_of(e.span().start);
                if (d < lo || d > slot.day) continue;
                if (!matches_pattern(e.name, pat)) continue;
                ++n;
                if (pid.size() < 12) {
                    pid.push_back(e.event_id);
                    pdates.push_back(format_date(d));
                }
            }
            if (n > 0) {
                chosen = &pat;
                count = n;
                ids = pid;
                dates = pdates;
            }
        }
        if (!chosen) {
            ok = false;
            return fact;
        }
        const Pattern& pat = *chosen;
        fact["pattern"] = pat.phrase;
        fact["count"] = count;
        fact["event_ids"] = ids;
        fact["dates"] = dates;
        if (slot.category == "MR") {
            fact["period"] = format_month(cd.year, cd.month) + " up to " +
                             format_date(slot.day);
        } else {
            fact["as_of"] = format_date(slot.day);
            fact["since"] = format_date(lo);
        }
        Json distractors = Json::array();
        for (int delta : {1, 2, 3})
            distractors.push_back(std::to_string(std::max(0, count + (delta == 2 ? -1 : delta))));
        fact["distractors"] = distractors;
    } else if (slot.category == "ND") {
        // Habit = the most frequent routine event name so far; early in the
        // horizon, any repeated activity stands in.
        std::map<std::string, int> freq;
        Json ids = Json::array(), dates = Json::array();
        for (const auto& a : *corpus.activities)
            if (a.source == ActivitySource::routine && a.date <= slot.day) ++freq[a.name];
        if (freq.empty())
            for (const auto& a : *corpus.activities)
                if (a.date <= slot.day) ++freq[a.name];
        if (freq.empty()) {
            ok = false;
            return fact;
        }
        auto best = std::max_element(freq.begin(), freq.end(),
                                     [](const auto& a, const auto& b) {
                                         if (a.second != b.second) return a.second < b.second;
                                         return a.first > b.first;
                                     });
        int listed = 0;
        for (const auto& e : events) {
            if (e.name != best->first || day_of(e.span().start) > slot.day) continue;
            if (++listed > 6) break;
            ids.push_back(e.event_id);
            dates.push_back(format_date(day_of(e.span().start)));
        }
        if (ids.empty()) {
            ok = false;
            return fact;
        }
        fact["aspect"] = "regular routine";
        fact["habit"] = best->first;
        fact["event_ids"] = ids;
        fact["dates"] = dates;
        Json distractors = Json::array();
        for (const auto& [name, n] : freq) {
            if (distractors.size() >= 3) break;
            if (name != best->first) distractors.push_back(name);
        }
        while (distractors.size() < 3)
            distractors.push_back("Late-night gaming sessions (no record " +
                                  std::to_string(distractors.size() + 1) + ")");
        fact["distractors"] = distractors;
    } else {  // UA
        fact["date"] = format_date(slot.day);
        fact["absent_person"] = "Wei Zhanpeng";
        Json distractors = Json::array();
        for (int i = 1; i <= 4; ++i)
            distractors.push_back("Candidate " + std::to_string(i) +
                                  " (not supported by any record)");
        fact["distractors"] = distractors;
        fact["event_ids"] = Json::array();
        fact["dates"] = Json::array();
    }
    return fact;
}

}  // namespace

std::vector<QAItem> QaGenerator::propose_questions(const std::vector<QaSlot>& schedule,
                                                   const CorpusView& corpus,
                                                   std::vector<std::string>* log) const {
    std::vector<QAItem> drafts(schedule.size());
    std::vector<char> valid(schedule.size(), 0);
    std::vector<std::string> errors(schedule.size());

    // Paired twins reuse the primary's fact; precompute facts sequentially
    // (cheap, no backend calls), then render in parallel.
    std::vector<Json> facts(schedule.size());
    for (size_t i = 0; i < schedule.size(); ++i) {
        bool ok = true;
        Rng rng(cfg_.seed, "qa_fact", cfg_.user_id + "/" + std::to_string(i));
        if (!schedule[i].pair_id.empty() && i > 0 &&
            schedule[i - 1].pair_id == schedule[i].pair_id) {
            facts[i] = facts[i - 1];
            ok = !facts[i].is_null();
        } else {
            facts[i] = build_fact(schedule[i], corpus, rng, ok);
            if (!ok) facts[i] = Json();
        }
        valid[i] = ok ? 1 : 0;
    }

    parallel_for(schedule.size(), cfg_.workers, [&](size_t i) {
        if (!valid[i]) return;
        const QaSlot& slot = schedule[i];
        gen::GenRequest req;
        req.stage = "qa";
        req.seed = gen::derive_seed(cfg_.seed, "qa",
                                    cfg_.user_id + "/" + std::to_string(i));
        req.response_schema = "qa";
        req.add("category", slot.category);
        req.add("format", to_string(slot.format));
        req.add_json("fact", facts[i]);
        Json dates = facts[i].value("dates", Json::array());
        Day last = slot.day;
        for (const auto& ds : dates)
            if (auto d = parse_date(ds.get<std::string>())) last = std::max(last, *d);
        req.add("ask_time", next_month_label(last));
        try {
            QAItem q = qa_from_json(backend_.generate(req));
            q.pair_id = slot.pair_id;
            drafts[i] = std::move(q);
        } catch (const std::exception& e) {
            valid[i] = 0;
            errors[i] = e.what();
        }
    });

    std::vector<QAItem> out;
    for (size_t i = 0; i < drafts.size(); ++i) {
        if (valid[i]) {
            out.push_back(std::move(drafts[i]));
        } else if (log) {
            log->push_back("slot " + std::to_string(i) + " (" + schedule[i].category +
                           ") skipped" + (errors[i].empty() ? "" : ": " + errors[i]));
        }
    }
    return out;
}

bool QaGenerator::evidence_sufficient(const QAItem& q,
                                      const std::vector<PhoneArtifact>& artifacts) {
    if (q.answer == kNotInMemory) return q.evidence.empty();
    if (q.evidence.empty()) return false;

    std::map<std::pair<std::string, int64_t>, const PhoneArtifact*> lookup;
    for (const auto& a : artifacts) lookup[{artifact_kind(a), artifact_phone_id(a)}] = &a;

    std::vector<std::string> texts;
    std::set<std::string> linked_event_ids;
    for (const auto& ev : q.evidence) {
        auto it = lookup.find({ev.type, ev.id});
        if (it == lookup.end()) return false;  // dangling reference
        texts.push_back(artifact_text(*it->second));
        if (auto eid = artifact_event_id(*it->second)) linked_event_ids.insert(*eid);
    }

    if (is_count_answer(q)) {
        // Counts are derivable when every required event has linked evidence.
        for (const auto& id : q.required_events_id)
            if (!linked_event_ids.count(id)) return false;
        return true;
    }

    auto entailed_somewhere = [&](const std::string& phrase) {
        for (const auto& t : texts)
            if (keyword_entailed(phrase, t)) return true;
        return false;
    };
    if (q.format == QaFormat::multiple_choice) {
        for (const auto& o : q.options)
            if (o.option == q.answer) return entailed_somewhere(o.content);
        return false;
    }
    for (const auto& sp : q.score_points)
        if (!entailed_somewhere(sp.description)) return false;
    return !q.score_points.empty();
}

int QaGenerator::supplement_evidence(QAItem& q, std::vector<PhoneArtifact>& artifacts) const {
    if (q.answer == kNotInMemory) {
        q.evidence.clear();
        return 0;
    }
    // Link existing event-tied artifacts first.
    std::set<std::string> wanted(q.required_events_id.begin(), q.required_events_id.end());
    std::set<std::pair<std::string, int64_t>> already;
    for (const auto& ev : q.evidence) already.insert({ev.type, ev.id});
    for (const auto& a : artifacts) {
        auto eid = artifact_event_id(a);
        if (!eid || !wanted.count(*eid)) continue;
        auto key = std::make_pair(artifact_kind(a), artifact_phone_id(a));
        if (already.insert(key).second) q.evidence.push_back({key.first, key.second});
    }
    if (evidence_sufficient(q, artifacts)) return 0;

    int added = 0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        // Generate a filler note carrying whatever is still missing.
        Json missing = Json::array();
        if (q.format == QaFormat::multiple_choice) {
            for (const auto& o : q.options)
                if (o.option == q.answer) missing.push_back(o.content);
        } else {
            for (const auto& sp : q.score_points) missing.push_back(sp.description);
        }
        if (is_count_answer(q))
            missing.push_back("completed sessions recorded: " + q.answer);

        Json event;
        event["event_id"] = q.required_events_id.empty() ? Json(nullptr)
                                                         : Json(q.required_events_id.front());
        event["date"] = q.required_events_date.empty() ? format_date(0)
                                                       : q.required_events_date.front();
        event["name"] = "the referenced activity";

        gen::GenRequest req;
        req.stage = "qa_supplement";
        req.seed = gen::derive_seed(cfg_.seed, "qa_supplement",
                                    cfg_.user_id + "/" + q.question + "/" +
                                        std::to_string(attempt));
        req.response_schema = "artifact";
        req.add_json("question", to_json(q));
        req.add_json("missing", missing);
        req.add_json("event", event);
        req.add("user", cfg_.user_name.empty() ? cfg_.user_id : cfg_.user_name);
        PhoneArtifact filler = artifact_from_json(backend_.generate(req));
        // Next free note id keeps previously assigned ids stable.
        int64_t next_id = 0;
        for (const auto& a : artifacts)
            if (artifact_kind(a) == artifact_kind(filler))
                next_id = std::max(next_id, artifact_phone_id(a) + 1);
        std::visit(
            [&](auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Contact>) v.phone_id = std::to_string(next_id);
                else v.phone_id = next_id;
            },
            filler);
        // Count questions need one filler per uncovered event.
        if (is_count_answer(q)) {
            std::set<std::string> linked;
            std::map<std::pair<std::string, int64_t>, const PhoneArtifact*> lookup;
            for (const auto& a : artifacts)
                lookup[{artifact_kind(a), artifact_phone_id(a)}] = &a;
            for (const auto& ev : q.evidence) {
                auto it = lookup.find({ev.type, ev.id});
                if (it != lookup.end())
                    if (auto eid = artifact_event_id(*it->second)) linked.insert(*eid);
            }
            bool any = false;
            for (const auto& id : q.required_events_id) {
                if (linked.count(id)) continue;
                PhoneArtifact extra = filler;
                std::visit(
                    [&](auto& v) {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (!std::is_same_v<T, Contact>) {
                            v.event_id = id;
                            v.phone_id = next_id++;
                        }
                    },
                    extra);
                artifacts.push_back(extra);
                q.evidence.push_back({artifact_kind(extra), artifact_phone_id(extra)});
                ++added;
                any = true;
            }
            if (!any) break;
        } else {
            artifacts.push_back(filler);
            q.evidence.push_back({artifact_kind(filler), artifact_phone_id(filler)});
            ++added;
        }
        if (evidence_sufficient(q, artifacts)) return added;
    }
    return evidence_sufficient(q, artifacts) ? added : -1;
}

std::vector<QAItem> QaGenerator::filter_questions(const std::vector<QAItem>& drafts,
                                                  const std::vector<PhoneArtifact>& artifacts,
                                                  Json* worksheet) const {
    std::vector<QAItem> kept;
    Json rows = Json::array();
    for (const auto& q : drafts) {
        std::string verdict = "kept";
        std::string target = q.answer;
        if (q.format == QaFormat::multiple_choice)
            for (const auto& o : q.options)
                if (o.option == q.answer) target = o.content;

        if (q.answer != kNotInMemory && strictly_contained(target, q.question)) {
            verdict = "dropped: answer inferable from the question itself";
        } else if (!validate_qa(q).ok()) {
            verdict = "dropped: schema violation";
        } else if (q.answer != kNotInMemory && !evidence_sufficient(q, artifacts)) {
            verdict = "dropped: evidence insufficient";
        }
        if (verdict == "kept") kept.push_back(q);
        rows.push_back(Json{{"question", q.question},
                            {"answer", q.answer},
                            {"category", q.question_type},
                            {"verdict", verdict}});
    }
    if (worksheet) *worksheet = rows;
    return kept;
}

}  // namespace lifeforge::qa
