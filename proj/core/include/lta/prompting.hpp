#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lta/anchoring.hpp"
#include "lta/corpus.hpp"
#include "lta/taxonomy.hpp"

namespace lta {

struct PromptConfig {
    std::size_t max_excerpts = 2;
    std::size_t excerpt_chars = 1500;
    std::size_t max_prompt_chars = 8000;
    bool exclude_source = false;  // drop the clone/substitution source note from excerpts
    std::string instructions;     // empty -> default_instructions()
};

const std::string& default_instructions();
const std::string& default_template();

/// Structured prompt sections assembled from the taxonomy knowledge forms,
/// corpus co-occurrence and retrieved excerpts.
struct PromptBundle {
    AnchoredCodeSet codeset;
    std::vector<std::pair<CodeId, std::string>> definitions;  // one per code, sorted
    std::vector<std::pair<CodeId, std::vector<std::string>>> synonyms;  // non-empty lists only
    std::vector<std::string> hierarchy_cues;    // anchor parent/sibling/chapter statements
    std::vector<std::string> comorbidity_cues;  // from co-occurrence ranking
    std::vector<std::pair<std::string, std::string>> example_excerpts;  // (note id, text)
    std::string instructions;
};

/// Assemble prompt sections for a code set. Codes missing from the taxonomy
/// degrade to an empty definition instead of failing. Excerpts come from real
/// notes with the highest Jaccard overlap against the code set (ties by note
/// id); synthetic notes are never selected.
PromptBundle build_prompt(const AnchoredCodeSet& cs, const Taxonomy& taxonomy,
                          const Corpus& corpus, const PromptConfig& cfg = {});

/// Substitute `{{definitions}} {{synonyms}} {{hierarchy}} {{comorbidities}}
/// {{examples}} {{codes}} {{instructions}}` placeholders. `{{codes}}` is
/// required; an unrecognized placeholder raises TemplateError naming it.
/// Output is capped at cfg.max_prompt_chars by trimming excerpts first, then
/// the optional knowledge sections.
std::string render_prompt(const PromptBundle& bundle, std::string_view template_text,
                          const PromptConfig& cfg = {});

struct PromptRow {
    CodeId anchor;
    std::vector<CodeId> codes;
    std::string prompt;
    std::string template_id;
};

/// JSONL with a {"schema_version":1,"kind":"prompts"} header line.
std::string prompts_to_jsonl(const std::vector<PromptRow>& rows);
std::vector<PromptRow> prompts_from_jsonl(std::string_view text);

}  // namespace lta
