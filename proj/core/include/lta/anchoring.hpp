#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lta/code_id.hpp"
#include "lta/corpus.hpp"
#include "lta/planner.hpp"
#include "lta/rng.hpp"
#include "lta/taxonomy.hpp"

namespace lta {

/// The multi-label code set a synthetic note will be generated for, with the
/// provenance of how it was constructed.
struct AnchoredCodeSet {
    CodeId anchor;
    std::set<CodeId> codes;  // anchor always included
    Strategy strategy = Strategy::clone;
    std::string source_note;
    std::optional<CodeId> replaced_sibling;  // substitute only
    int replicate = 0;
};

/// Clone the complete code set of a real note containing `anchor`. Notes
/// whose other codes share the anchor's chapter are preferred; the pick among
/// the preferred set is uniform via `rng`. Requires freq(anchor) >= 1, else
/// WrongStrategyError.
AnchoredCodeSet clone_codeset(const Corpus& corpus, const Taxonomy& taxonomy,
                              const CodeId& anchor, Rng& rng);

/// Build a code set for a zero-shot `anchor` by sibling substitution. Donor
/// candidates are searched in fallback order: observed siblings, then other
/// observed descendants of the anchor's grandparent, then any observed
/// same-chapter code. The donor and one of its notes are picked uniformly via
/// `rng`; the result is (note codes \ {donor}) ∪ {anchor}. Requires
/// freq(anchor) == 0 (else WrongStrategyError) and anchor in taxonomy.
/// Throws NoDonorError when every tier is empty.
AnchoredCodeSet substitute_codeset(const Corpus& corpus, const Taxonomy& taxonomy,
                                   const CodeId& anchor, Rng& rng);

struct SkippedCode {
    CodeId code;
    std::string reason;
};

struct CodesetBatch {
    std::vector<AnchoredCodeSet> codesets;  // ordered (code, replicate)
    std::vector<SkippedCode> skipped;       // codes that found no donor
};

/// Expand a plan into one anchored code set per budgeted replicate. Source
/// notes are drawn with replacement when the budget exceeds the distinct
/// sources. Each code draws from its own seed stream derived from `seed`, so
/// the output is reproducible and independent of per-code execution order.
CodesetBatch build_codesets(const AllocationPlan& plan, const Corpus& corpus,
                            const Taxonomy& taxonomy, std::uint64_t seed);

/// JSONL with a {"schema_version":1,"kind":"codesets"} header line, then one
/// object per code set.
std::string codesets_to_jsonl(const CodesetBatch& batch);
CodesetBatch codesets_from_jsonl(std::string_view text);

std::string skipped_to_json(const std::vector<SkippedCode>& skipped);

}  // namespace lta
