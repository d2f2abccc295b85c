#include "lta/generation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "lta/errors.hpp"
#include "lta/rng.hpp"

namespace lta {

using nlohmann::json;

std::string prompt_digest(std::string_view prompt) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(prompt)));
    return buf;
}

// ---------------------------------------------------------------------------
// Mock backend

namespace {

struct ParsedDefinition {
    std::string code;
    std::string description;
};

// Pull "- CODE: description" lines back out of a rendered prompt. Only lines
// whose code part parses as a valid code count, so narrative dashes and cue
// lines are skipped.
std::vector<ParsedDefinition> parse_definitions(const std::string& prompt) {
    std::vector<ParsedDefinition> defs;
    std::set<std::string> seen;
    std::size_t start = 0;
    while (start < prompt.size()) {
        std::size_t end = prompt.find('\n', start);
        if (end == std::string::npos) end = prompt.size();
        std::string_view line(prompt.data() + start, end - start);
        start = end + 1;
        if (line.size() < 4 || line[0] != '-' || line[1] != ' ') continue;
        std::size_t colon = line.find(": ");
        if (colon == std::string_view::npos) continue;
        std::string code_part(line.substr(2, colon - 2));
        std::string desc_part(line.substr(colon + 2));
        try {
            CodeId code = CodeId::parse(code_part);
            if (desc_part.empty() || desc_part == "(no description on file)") continue;
            if (!seen.insert(code.norm()).second) continue;
            defs.push_back({code.display(), desc_part});
        } catch (const InvalidCodeError&) {
            continue;
        }
    }
    return defs;
}

const char* kCourseTemplates[] = {
    "Treatment was directed at %s with good effect.",
    "The team managed %s throughout the stay.",
    "Serial assessments confirmed %s, addressed per protocol.",
    "Consultants assisted with management of %s.",
};

const char* kHpiConnectors[] = {
    "Workup on arrival was notable for",
    "Initial evaluation additionally demonstrated",
    "Review of systems and testing further revealed",
};

std::string format_with(const char* tmpl, const std::string& arg) {
    std::string out;
    for (const char* p = tmpl; *p; ++p) {
        if (p[0] == '%' && p[1] == 's') {
            out += arg;
            ++p;
        } else {
            out += *p;
        }
    }
    return out;
}

std::string lowercase_first(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return s;
}

}  // namespace

std::string mock_generate(const std::string& prompt, std::uint64_t seed) {
    auto defs = parse_definitions(prompt);
    if (defs.empty()) {
        // No definitions to ground the note in; emit a generic stub. The
        // alignment gate downstream scores this 0 and triggers regeneration.
        return "Patient admitted for evaluation and discharged in stable condition. "
               "No structured diagnosis definitions were available for this note.";
    }

    Rng rng(derive_seed(seed, prompt));
    std::string out;
    out += "History of Present Illness:\n";
    out += "The patient presented with " + lowercase_first(defs[0].description) + ".";
    for (std::size_t i = 1; i < defs.size(); ++i) {
        const char* connector = kHpiConnectors[rng.uniform_index(std::size(kHpiConnectors))];
        out += " " + std::string(connector) + " " + lowercase_first(defs[i].description) + ".";
    }
    out += "\n\nHospital Course:\n";
    for (const auto& d : defs) {
        out += format_with(kCourseTemplates[rng.uniform_index(std::size(kCourseTemplates))],
                           lowercase_first(d.description));
        out += ' ';
    }
    out += "The patient remained hemodynamically stable and was discharged with follow-up arranged.";
    out += "\n\nDischarge Diagnoses:\n";
    for (std::size_t i = 0; i < defs.size(); ++i) {
        out += std::to_string(i + 1) + ". " + defs[i].description + " [" + defs[i].code + "]\n";
    }
    return out;
}

std::string MockBackend::generate(const std::string& prompt, const DecodeParams&) {
    return mock_generate(prompt, seed_);
}

// ---------------------------------------------------------------------------
// Alignment

namespace {

// Function words that carry no diagnostic signal; words shorter than 4
// characters are dropped before this list applies.
const std::set<std::string>& stopwords() {
    static const std::set<std::string> kStop = {
        "with", "without", "from", "this", "that", "these", "those", "into", "onto", "upon",
        "over", "under", "than", "then", "them", "they", "their", "there", "have", "been",
        "being", "were", "also", "each", "other", "some", "such", "only", "after", "before",
        "during", "unspecified"};
    return kStop;
}

std::vector<std::string> content_words(std::string_view phrase) {
    std::vector<std::string> words;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 4 && !stopwords().count(cur)) words.push_back(cur);
        cur.clear();
    };
    for (char ch : phrase) {
        if (std::isalnum(static_cast<unsigned char>(ch)))
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        else
            flush();
    }
    flush();
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    return words;
}

std::set<std::string> text_words(std::string_view text) {
    std::set<std::string> words;
    std::string cur;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        } else if (!cur.empty()) {
            words.insert(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.insert(cur);
    return words;
}

bool phrase_matches(const std::set<std::string>& text, std::string_view phrase) {
    auto words = content_words(phrase);
    if (words.empty()) return false;
    std::size_t hit = 0;
    for (const std::string& w : words) hit += text.count(w);
    return static_cast<double>(hit) >= 0.6 * static_cast<double>(words.size());
}

}  // namespace

double validate_alignment(const std::string& text, const AnchoredCodeSet& cs,
                          const Taxonomy& taxonomy) {
    if (cs.codes.empty()) return 0.0;
    const auto words = text_words(text);
    std::size_t covered = 0;
    for (const CodeId& code : cs.codes) {
        if (!taxonomy.contains(code)) continue;
        const KnowledgeCard& card = knowledge_of(taxonomy, code);
        bool hit = phrase_matches(words, card.description);
        for (auto it = card.synonyms.begin(); !hit && it != card.synonyms.end(); ++it)
            hit = phrase_matches(words, *it);
        covered += hit ? 1 : 0;
    }
    return static_cast<double>(covered) / static_cast<double>(cs.codes.size());
}

// ---------------------------------------------------------------------------
// Single generation with transport retry + alignment gate

namespace {

std::string call_with_retries(GeneratorBackend& backend, const std::string& prompt,
                              const DecodeParams& params, const RetryPolicy& retry,
                              const CodeId& anchor, int& calls_made, Rng& jitter) {
    for (int attempt = 0;; ++attempt) {
        try {
            ++calls_made;
            return backend.generate(prompt, params);
        } catch (const TransportError& e) {
            if (!e.transient() || attempt >= retry.max_retries)
                throw GenerationFailedError("generation failed for anchor " + anchor.display() +
                                                ": " + e.what(),
                                            anchor.display(), calls_made);
            auto delay = retry.base_delay * (1ll << std::min(attempt, 20));
            delay = std::min<std::chrono::milliseconds>(delay, retry.max_delay);
            delay += std::chrono::milliseconds(
                static_cast<long>(jitter.uniform01() * static_cast<double>(delay.count() / 2 + 1)));
            std::this_thread::sleep_for(delay);
        }
    }
}

}  // namespace

SyntheticNote generate_one(const std::string& prompt, const AnchoredCodeSet& cs,
                           GeneratorBackend& backend, const DecodeParams& params,
                           const AlignmentGate& gate, const RetryPolicy& retry,
                           const Taxonomy& taxonomy) {
    if (prompt.empty()) throw Error("refusing to generate from an empty prompt");

    // Jitter timing only; does not influence any produced byte.
    Rng jitter(derive_seed(fnv1a64(prompt), cs.anchor.norm()));

    int calls_made = 0;
    std::string best_text;
    double best_alignment = -1.0;
    for (int regen = 0; regen <= gate.max_regen; ++regen) {
        std::string text =
            call_with_retries(backend, prompt, params, retry, cs.anchor, calls_made, jitter);
        const double alignment = text.empty() ? 0.0 : validate_alignment(text, cs, taxonomy);
        if (alignment > best_alignment) {
            best_alignment = alignment;
            best_text = std::move(text);
        }
        if (best_alignment >= gate.min_alignment) break;
    }

    SyntheticNote out;
    out.note.id = "syn-" + cs.anchor.display() + "-" + std::to_string(cs.replicate);
    out.note.text = std::move(best_text);
    out.note.codes = cs.codes;
    out.note.origin = Origin::synthetic;
    out.note.anchor = cs.anchor;
    out.prompt_hash = prompt_digest(prompt);
    out.backend = backend.id();
    out.attempt = calls_made;
    out.alignment = best_alignment;
    return out;
}

// ---------------------------------------------------------------------------
// Batch runner

BatchResult run_batch(const std::vector<std::string>& prompts,
                      const std::vector<AnchoredCodeSet>& codesets, GeneratorBackend& backend,
                      const ConcurrencyConfig& cc, const AlignmentGate& gate,
                      const DecodeParams& params, const Taxonomy& taxonomy) {
    if (prompts.size() != codesets.size())
        throw Error("prompt batch and code set batch differ in length (" +
                    std::to_string(prompts.size()) + " vs " + std::to_string(codesets.size()) + ")");
    if (cc.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");

    const std::size_t n = prompts.size();
    std::vector<std::optional<SyntheticNote>> slots(n);
    std::vector<std::optional<GenerationFailure>> failed(n);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr fatal;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                slots[i] = generate_one(prompts[i], codesets[i], backend, params, gate, cc.retry,
                                        taxonomy);
            } catch (const GenerationFailedError& e) {
                failed[i] = GenerationFailure{codesets[i].anchor, codesets[i].replicate, e.what(),
                                              e.attempts()};
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!fatal) fatal = std::current_exception();
                return;
            }
        }
    };

    const std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(cc.max_in_flight), std::max<std::size_t>(n, 1));
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (fatal) std::rethrow_exception(fatal);

    BatchResult result;
    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i]) result.notes.push_back(std::move(*slots[i]));
        if (failed[i]) result.failures.push_back(std::move(*failed[i]));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Serialization

std::string synthetic_notes_to_jsonl(const std::vector<SyntheticNote>& notes) {
    std::string out;
    for (const SyntheticNote& sn : notes) {
        json codes = json::array();
        for (const CodeId& c : sn.note.codes) codes.push_back(c.display());
        json obj{{"id", sn.note.id},
                 {"text", sn.note.text},
                 {"codes", std::move(codes)},
                 {"origin", "synthetic"},
                 {"anchor", sn.note.anchor ? sn.note.anchor->display() : ""},
                 {"prompt_hash", sn.prompt_hash},
                 {"backend", sn.backend},
                 {"attempt", sn.attempt},
                 {"alignment", sn.alignment}};
        out += obj.dump();
        out += '\n';
    }
    return out;
}

std::vector<SyntheticNote> synthetic_notes_from_jsonl(std::string_view text) {
    std::vector<SyntheticNote> notes;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        try {
            SyntheticNote sn;
            sn.note.id = obj.at("id").get<std::string>();
            sn.note.text = obj.at("text").get<std::string>();
            for (const auto& c : obj.at("codes")) sn.note.codes.insert(CodeId::parse(c.get<std::string>()));
            sn.note.origin = Origin::synthetic;
            sn.note.anchor = CodeId::parse(obj.at("anchor").get<std::string>());
            sn.prompt_hash = obj.value("prompt_hash", "");
            sn.backend = obj.value("backend", "");
            sn.attempt = obj.value("attempt", 1);
            sn.alignment = obj.value("alignment", 0.0);
            if (!sn.note.codes.count(*sn.note.anchor))
                throw ParseError("anchor " + sn.note.anchor->display() + " missing from codes", lineno);
            notes.push_back(std::move(sn));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad synthetic note: ") + e.what(), lineno);
        } catch (const InvalidCodeError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return notes;
}

std::string failures_to_jsonl(const std::vector<GenerationFailure>& failures) {
    std::string out;
    for (const GenerationFailure& f : failures) {
        json obj{{"anchor", f.anchor.display()},
                 {"replicate", f.replicate},
                 {"reason", f.reason},
                 {"attempts", f.attempts}};
        out += obj.dump();
        out += '\n';
    }
    return out;
}

}  // namespace lta
