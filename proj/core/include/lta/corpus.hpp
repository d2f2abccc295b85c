#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lta/code_id.hpp"

namespace lta {

enum class Origin { real, synthetic };

std::string_view to_string(Origin o);
Origin origin_from_string(std::string_view s);

struct Note {
    std::string id;
    std::string text;
    std::set<CodeId> codes;
    Origin origin = Origin::real;
    std::optional<CodeId> anchor;  // synthetic notes only; always a member of codes
};

/// Immutable note collection with frequency, inverted and co-occurrence
/// indexes. Indexes are rebuilt from scratch at construction, so they stay
/// consistent by definition. Safe for concurrent reads.
class Corpus {
public:
    Corpus() = default;

    /// Validate note invariants (unique ids, non-empty code sets, synthetic
    /// anchor membership) and build all indexes.
    static Corpus build(std::vector<Note> notes);

    const std::vector<Note>& notes() const { return notes_; }
    const Note* find(const std::string& id) const;

    /// Occurrence count; 0 for unseen codes.
    std::uint32_t freq(const CodeId& code) const;
    const std::map<CodeId, std::uint32_t>& freq_index() const { return freq_; }

    /// Joint count of two distinct codes; symmetric, 0 when never co-coded.
    std::uint32_t cooc(const CodeId& a, const CodeId& b) const;
    const std::map<CodeId, std::map<CodeId, std::uint32_t>>& cooc_index() const { return cooc_; }

    std::size_t size() const { return notes_.size(); }

private:
    friend const std::vector<std::string>& notes_containing(const Corpus&, const CodeId&);

    std::vector<Note> notes_;
    std::map<std::string, std::size_t> by_id_;
    std::map<CodeId, std::uint32_t> freq_;
    std::map<CodeId, std::vector<std::string>> inverted_;  // note ids in insertion order
    std::map<CodeId, std::map<CodeId, std::uint32_t>> cooc_;
};

/// Load a notes JSONL file: per line {"id", "text", "codes": [..],
/// "origin": "real"|"synthetic", "anchor"?}. Unknown fields are ignored.
/// Duplicate codes within one note collapse with a warning appended to
/// `warnings` when given.
Corpus load_corpus(std::string_view jsonl, std::vector<std::string>* warnings = nullptr);

/// Note ids containing `code`, in file (insertion) order. Empty for unseen codes.
const std::vector<std::string>& notes_containing(const Corpus& c, const CodeId& code);

/// Top-k co-occurring codes by joint count, ties broken lexicographically.
std::vector<std::pair<CodeId, std::uint32_t>> cooccurrence_top(const Corpus& c,
                                                               const CodeId& code,
                                                               std::size_t k);

/// Extend a real corpus with synthetic notes; all indexes recomputed.
/// Synthetic ids must not collide with existing ones.
Corpus merge_corpus(const Corpus& real, const std::vector<Note>& synthetic);

/// Serialize notes in the corpus JSONL schema (codes in dotted display form,
/// sorted). The exact byte layout is stable for fixed input.
std::string notes_to_jsonl(const std::vector<Note>& notes);

}  // namespace lta
