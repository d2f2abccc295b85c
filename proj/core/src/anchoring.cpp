#include "lta/anchoring.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "lta/errors.hpp"

namespace lta {

using nlohmann::json;

namespace {

const Note& note_or_throw(const Corpus& corpus, const std::string& id) {
    const Note* n = corpus.find(id);
    if (!n) throw NotFoundError("note " + id + " not found in corpus");
    return *n;
}

/// Donor candidates for one fallback tier, sorted so the rng index pick is
/// deterministic.
std::vector<CodeId> observed_sorted(std::vector<CodeId> candidates, const Corpus& corpus,
                                    const CodeId& exclude) {
    std::vector<CodeId> out;
    for (CodeId& c : candidates)
        if (c != exclude && corpus.freq(c) >= 1) out.push_back(std::move(c));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::optional<CodeId> grandparent_of(const Taxonomy& taxonomy, const CodeId& anchor) {
    std::optional<CodeId> parent = knowledge_of(taxonomy, anchor).parent;
    if (!parent) return std::nullopt;
    // The parent may be a virtual category without a card of its own; fall
    // back to the truncation rule for it.
    if (taxonomy.contains(*parent)) return knowledge_of(taxonomy, *parent).parent;
    return derived_parent(*parent);
}

}  // namespace

AnchoredCodeSet clone_codeset(const Corpus& corpus, const Taxonomy& taxonomy,
                              const CodeId& anchor, Rng& rng) {
    (void)taxonomy;  // chapter preference needs only the code shape
    const auto& sources = notes_containing(corpus, anchor);
    if (sources.empty())
        throw WrongStrategyError("code " + anchor.display() +
                                 " has no real occurrences; use sibling substitution");

    const std::string chapter = chapter_of_code(anchor);
    std::vector<const std::string*> preferred;
    for (const std::string& id : sources) {
        const Note& note = note_or_throw(corpus, id);
        for (const CodeId& other : note.codes) {
            if (other != anchor && chapter_of_code(other) == chapter) {
                preferred.push_back(&id);
                break;
            }
        }
    }

    const std::string* chosen = nullptr;
    if (!preferred.empty()) {
        chosen = preferred[rng.uniform_index(preferred.size())];
    } else {
        chosen = &sources[rng.uniform_index(sources.size())];
    }

    AnchoredCodeSet cs;
    cs.anchor = anchor;
    cs.codes = note_or_throw(corpus, *chosen).codes;
    cs.strategy = Strategy::clone;
    cs.source_note = *chosen;
    return cs;
}

AnchoredCodeSet substitute_codeset(const Corpus& corpus, const Taxonomy& taxonomy,
                                   const CodeId& anchor, Rng& rng) {
    if (corpus.freq(anchor) != 0)
        throw WrongStrategyError("code " + anchor.display() +
                                 " has real occurrences; clone its code set instead");
    if (!taxonomy.contains(anchor))
        throw NotFoundError("code " + anchor.display() + " not found in taxonomy");

    // Tier 1: observed siblings.
    std::vector<CodeId> donors = observed_sorted(siblings_of(taxonomy, anchor), corpus, anchor);

    // Tier 2: other observed descendants of the grandparent (uncles, cousins,
    // the parent itself when coded directly).
    if (donors.empty()) {
        if (auto gp = grandparent_of(taxonomy, anchor))
            donors = observed_sorted(taxonomy.descendants_of(*gp), corpus, anchor);
    }

    // Tier 3: any observed code from the anchor's chapter, taxonomy-known or not.
    if (donors.empty()) {
        const std::string chapter = chapter_of_code(anchor);
        std::vector<CodeId> same_chapter;
        for (const auto& [code, n] : corpus.freq_index())
            if (chapter_of_code(code) == chapter) same_chapter.push_back(code);
        donors = observed_sorted(std::move(same_chapter), corpus, anchor);
    }

    if (donors.empty())
        throw NoDonorError("no observed donor for zero-shot code " + anchor.display() +
                           " in any fallback tier (sibling, family, chapter)");

    const CodeId donor = donors[rng.uniform_index(donors.size())];
    const auto& donor_notes = notes_containing(corpus, donor);
    const std::string& source = donor_notes[rng.uniform_index(donor_notes.size())];

    AnchoredCodeSet cs;
    cs.anchor = anchor;
    cs.codes = note_or_throw(corpus, source).codes;
    cs.codes.erase(donor);
    cs.codes.insert(anchor);
    cs.strategy = Strategy::substitute;
    cs.source_note = source;
    cs.replaced_sibling = donor;
    return cs;
}

CodesetBatch build_codesets(const AllocationPlan& plan, const Corpus& corpus,
                            const Taxonomy& taxonomy, std::uint64_t seed) {
    CodesetBatch batch;
    for (const PlanEntry& entry : plan.entries) {
        if (entry.n_synthetic <= 0) continue;
        Rng rng(derive_seed(seed, entry.code.norm()));
        try {
            for (int r = 0; r < entry.n_synthetic; ++r) {
                AnchoredCodeSet cs = entry.strategy == Strategy::clone
                                         ? clone_codeset(corpus, taxonomy, entry.code, rng)
                                         : substitute_codeset(corpus, taxonomy, entry.code, rng);
                cs.replicate = r;
                batch.codesets.push_back(std::move(cs));
            }
        } catch (const NoDonorError& e) {
            batch.skipped.push_back({entry.code, e.what()});
        }
    }
    return batch;
}

std::string codesets_to_jsonl(const CodesetBatch& batch) {
    std::string out = json{{"schema_version", 1}, {"kind", "codesets"}}.dump() + "\n";
    for (const AnchoredCodeSet& cs : batch.codesets) {
        json codes = json::array();
        for (const CodeId& c : cs.codes) codes.push_back(c.display());
        json obj{{"anchor", cs.anchor.display()},
                 {"codes", std::move(codes)},
                 {"strategy", std::string(to_string(cs.strategy))},
                 {"source_note", cs.source_note},
                 {"replicate", cs.replicate}};
        if (cs.replaced_sibling) obj["replaced_sibling"] = cs.replaced_sibling->display();
        out += obj.dump();
        out += '\n';
    }
    return out;
}

CodesetBatch codesets_from_jsonl(std::string_view text) {
    CodesetBatch batch;
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
            if (!obj.contains("schema_version") || obj.value("kind", "") != "codesets")
                throw SchemaError("codesets file lacks its schema header line");
            if (obj["schema_version"].get<int>() != 1)
                throw SchemaError("unsupported codesets schema_version " + obj["schema_version"].dump());
            header_seen = true;
            continue;
        }
        try {
            AnchoredCodeSet cs;
            cs.anchor = CodeId::parse(obj.at("anchor").get<std::string>());
            for (const auto& c : obj.at("codes")) cs.codes.insert(CodeId::parse(c.get<std::string>()));
            cs.strategy = strategy_from_string(obj.at("strategy").get<std::string>());
            cs.source_note = obj.at("source_note").get<std::string>();
            cs.replicate = obj.at("replicate").get<int>();
            if (obj.contains("replaced_sibling"))
                cs.replaced_sibling = CodeId::parse(obj.at("replaced_sibling").get<std::string>());
            if (!cs.codes.count(cs.anchor))
                throw ParseError("anchor " + cs.anchor.display() + " missing from its code set", lineno);
            batch.codesets.push_back(std::move(cs));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad code set object: ") + e.what(), lineno);
        } catch (const InvalidCodeError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (!header_seen) throw SchemaError("codesets file lacks its schema header line");
    return batch;
}

std::string skipped_to_json(const std::vector<SkippedCode>& skipped) {
    json arr = json::array();
    for (const SkippedCode& s : skipped)
        arr.push_back({{"code", s.code.display()}, {"reason", s.reason}});
    json doc{{"schema_version", 1}, {"skipped", std::move(arr)}};
    return doc.dump(2) + "\n";
}

}  // namespace lta
