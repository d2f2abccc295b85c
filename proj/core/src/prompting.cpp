#include "lta/prompting.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "lta/errors.hpp"

namespace lta {

using nlohmann::json;

const std::string& default_instructions() {
    static const std::string kInstructions =
        "Write a realistic, fully de-identified hospital discharge summary of roughly 300-500 "
        "words. Use the standard sections: History of Present Illness, Hospital Course, and "
        "Discharge Diagnoses. Every listed diagnosis must be explicitly documented in the "
        "narrative using its clinical name; do not invent diagnoses beyond the list, and do not "
        "include names, dates, or identifiers.";
    return kInstructions;
}

const std::string& default_template() {
    static const std::string kTemplate =
        "You are an experienced attending physician writing a de-identified discharge summary "
        "for a teaching hospital record system.\n"
        "\n"
        "{{definitions}}\n"
        "{{synonyms}}\n"
        "{{hierarchy}}\n"
        "{{comorbidities}}\n"
        "{{examples}}\n"
        "The discharge summary must document every one of these codes: {{codes}}.\n"
        "\n"
        "{{instructions}}\n";
    return kTemplate;
}

namespace {

double jaccard(const std::set<CodeId>& a, const std::set<CodeId>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const CodeId& c : a) inter += b.count(c);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

PromptBundle build_prompt(const AnchoredCodeSet& cs, const Taxonomy& taxonomy,
                          const Corpus& corpus, const PromptConfig& cfg) {
    PromptBundle b;
    b.codeset = cs;
    b.instructions = cfg.instructions.empty() ? default_instructions() : cfg.instructions;

    for (const CodeId& code : cs.codes) {
        if (taxonomy.contains(code)) {
            const KnowledgeCard& card = knowledge_of(taxonomy, code);
            b.definitions.emplace_back(code, card.description);
            if (!card.synonyms.empty()) b.synonyms.emplace_back(code, card.synonyms);
        } else {
            b.definitions.emplace_back(code, std::string{});
        }
    }

    // Hierarchy cues cover the anchor only: parent, then up to 3 siblings.
    if (taxonomy.contains(cs.anchor)) {
        const KnowledgeCard& card = knowledge_of(taxonomy, cs.anchor);
        if (card.parent) {
            std::string cue = cs.anchor.display() + " falls under the parent category " +
                              card.parent->display();
            if (taxonomy.contains(*card.parent))
                cue += " (" + knowledge_of(taxonomy, *card.parent).description + ")";
            b.hierarchy_cues.push_back(cue + ".");
        }
        std::size_t shown = 0;
        std::string sibs;
        for (const CodeId& s : card.siblings) {
            if (shown == 3) break;
            if (shown) sibs += ", ";
            sibs += s.display();
            if (taxonomy.contains(s)) sibs += " (" + knowledge_of(taxonomy, s).description + ")";
            ++shown;
        }
        if (shown)
            b.hierarchy_cues.push_back("Sibling codes of " + cs.anchor.display() + ": " + sibs + ".");
        b.hierarchy_cues.push_back(cs.anchor.display() + " belongs to chapter " + card.chapter + ".");
    }

    for (const auto& [code, count] : cooccurrence_top(corpus, cs.anchor, 5)) {
        std::string cue = cs.anchor.display() + " is frequently documented together with " +
                          code.display();
        if (taxonomy.contains(code)) cue += " (" + knowledge_of(taxonomy, code).description + ")";
        cue += ", seen " + std::to_string(count) + " times.";
        b.comorbidity_cues.push_back(std::move(cue));
    }

    // Excerpts: real notes sharing the most codes with the set (Jaccard).
    std::set<std::string> candidate_ids;
    for (const CodeId& code : cs.codes)
        for (const std::string& id : notes_containing(corpus, code)) candidate_ids.insert(id);
    std::vector<std::pair<double, const Note*>> scored;
    for (const std::string& id : candidate_ids) {
        const Note* note = corpus.find(id);
        if (!note || note->origin != Origin::real) continue;
        if (cfg.exclude_source && id == cs.source_note) continue;
        double j = jaccard(note->codes, cs.codes);
        if (j > 0.0) scored.emplace_back(j, note);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->id < b.second->id;
    });
    for (std::size_t i = 0; i < scored.size() && b.example_excerpts.size() < cfg.max_excerpts; ++i) {
        std::string text = scored[i].second->text;
        if (text.size() > cfg.excerpt_chars) text.resize(cfg.excerpt_chars);
        b.example_excerpts.emplace_back(scored[i].second->id, std::move(text));
    }

    return b;
}

namespace {

const std::set<std::string>& known_placeholders() {
    static const std::set<std::string> kNames = {"definitions", "synonyms",   "hierarchy",
                                                 "comorbidities", "examples", "codes",
                                                 "instructions"};
    return kNames;
}

std::string render_definitions(const PromptBundle& b) {
    std::string out = "Target diagnoses and their definitions:\n";
    for (const auto& [code, desc] : b.definitions) {
        out += "- " + code.display() + ": ";
        out += desc.empty() ? "(no description on file)" : desc;
        out += '\n';
    }
    return out;
}

std::string render_synonyms(const PromptBundle& b) {
    if (b.synonyms.empty()) return {};
    std::string out = "Synonyms used interchangeably in clinical text:\n";
    for (const auto& [code, syns] : b.synonyms) {
        out += "- " + code.display() + ": ";
        for (std::size_t i = 0; i < syns.size(); ++i) {
            if (i) out += "; ";
            out += syns[i];
        }
        out += '\n';
    }
    return out;
}

std::string render_cues(const std::vector<std::string>& cues, const std::string& title) {
    if (cues.empty()) return {};
    std::string out = title + "\n";
    for (const std::string& cue : cues) out += "- " + cue + "\n";
    return out;
}

std::string render_examples(const std::vector<std::pair<std::string, std::string>>& excerpts) {
    if (excerpts.empty()) return {};
    std::string out;
    for (const auto& [id, text] : excerpts) {
        out += "Example excerpt from a real de-identified note [" + id + "]:\n";
        out += text;
        out += "\n";
    }
    return out;
}

std::string render_codes(const PromptBundle& b) {
    std::string out;
    for (const auto& [code, desc] : b.definitions) {
        if (!out.empty()) out += ", ";
        out += code.display();
    }
    return out;
}

std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    bool codes_seen = false;
    while (pos < tmpl.size()) {
        std::size_t open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        out.append(tmpl.substr(pos, open - pos));
        std::size_t close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos)
            throw TemplateError("unterminated placeholder near offset " + std::to_string(open));
        std::string name(tmpl.substr(open + 2, close - open - 2));
        auto b = name.find_first_not_of(" \t");
        auto e = name.find_last_not_of(" \t");
        name = b == std::string::npos ? std::string{} : name.substr(b, e - b + 1);
        if (!known_placeholders().count(name))
            throw TemplateError("unknown placeholder {{" + name + "}}");
        if (name == "codes") codes_seen = true;
        out.append(values.at(name));
        pos = close + 2;
    }
    if (!codes_seen) throw TemplateError("template missing required placeholder {{codes}}");
    return out;
}

std::string render_with(const PromptBundle& b, std::string_view tmpl) {
    std::map<std::string, std::string> values{
        {"definitions", render_definitions(b)},
        {"synonyms", render_synonyms(b)},
        {"hierarchy", render_cues(b.hierarchy_cues, "Coding-hierarchy context:")},
        {"comorbidities", render_cues(b.comorbidity_cues, "Documented comorbidity patterns:")},
        {"examples", render_examples(b.example_excerpts)},
        {"codes", render_codes(b)},
        {"instructions", b.instructions},
    };
    return substitute(tmpl, values);
}

}  // namespace

std::string render_prompt(const PromptBundle& bundle, std::string_view template_text,
                          const PromptConfig& cfg) {
    std::string out = render_with(bundle, template_text);
    if (out.size() <= cfg.max_prompt_chars) return out;

    // Over budget: shrink excerpts first, then drop optional knowledge
    // sections, never the definitions/codes/instructions.
    PromptBundle trimmed = bundle;
    while (out.size() > cfg.max_prompt_chars && !trimmed.example_excerpts.empty()) {
        const std::size_t excess = out.size() - cfg.max_prompt_chars;
        std::string& last = trimmed.example_excerpts.back().second;
        if (last.size() > excess + 200) {
            last.resize(last.size() - excess);
        } else {
            trimmed.example_excerpts.pop_back();
        }
        out = render_with(trimmed, template_text);
    }
    for (auto* section : {&trimmed.comorbidity_cues, &trimmed.hierarchy_cues}) {
        if (out.size() <= cfg.max_prompt_chars) break;
        section->clear();
        out = render_with(trimmed, template_text);
    }
    if (out.size() > cfg.max_prompt_chars) {
        trimmed.synonyms.clear();
        out = render_with(trimmed, template_text);
    }
    if (out.size() > cfg.max_prompt_chars)
        throw Error("prompt exceeds max_prompt_chars=" + std::to_string(cfg.max_prompt_chars) +
                    " even with excerpts and optional sections removed; raise the budget");
    return out;
}

std::string prompts_to_jsonl(const std::vector<PromptRow>& rows) {
    std::string out = json{{"schema_version", 1}, {"kind", "prompts"}}.dump() + "\n";
    for (const PromptRow& r : rows) {
        json codes = json::array();
        for (const CodeId& c : r.codes) codes.push_back(c.display());
        json obj{{"anchor", r.anchor.display()},
                 {"codes", std::move(codes)},
                 {"prompt", r.prompt},
                 {"template_id", r.template_id}};
        out += obj.dump();
        out += '\n';
    }
    return out;
}

std::vector<PromptRow> prompts_from_jsonl(std::string_view text) {
    std::vector<PromptRow> rows;
    std::size_t lineno = 0;
    bool header_seen = false;
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
        if (!header_seen) {
            if (!obj.contains("schema_version") || obj.value("kind", "") != "prompts")
                throw SchemaError("prompts file lacks its schema header line");
            if (obj["schema_version"].get<int>() != 1)
                throw SchemaError("unsupported prompts schema_version " + obj["schema_version"].dump());
            header_seen = true;
            continue;
        }
        try {
            PromptRow r;
            r.anchor = CodeId::parse(obj.at("anchor").get<std::string>());
            for (const auto& c : obj.at("codes")) r.codes.push_back(CodeId::parse(c.get<std::string>()));
            r.prompt = obj.at("prompt").get<std::string>();
            r.template_id = obj.at("template_id").get<std::string>();
            rows.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad prompt object: ") + e.what(), lineno);
        } catch (const InvalidCodeError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (!header_seen) throw SchemaError("prompts file lacks its schema header line");
    return rows;
}

}  // namespace lta
