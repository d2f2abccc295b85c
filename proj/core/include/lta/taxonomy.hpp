#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lta/code_id.hpp"

namespace lta {

/// The three knowledge forms attached to one code, plus its hierarchy slots.
struct KnowledgeCard {
    CodeId code;
    std::string description;
    std::vector<std::string> synonyms;
    std::optional<CodeId> parent;     // explicit from file, else derived
    std::vector<CodeId> siblings;     // sorted; never contains `code`
    std::string chapter;
};

/// Immutable registry of ICD codes with derived parent/sibling/chapter
/// structure. Safe for concurrent reads once parsed.
class Taxonomy {
public:
    bool contains(const CodeId& code) const { return cards_.count(code) > 0; }
    std::size_t size() const { return cards_.size(); }

    const std::map<CodeId, KnowledgeCard>& cards() const { return cards_; }
    const std::map<std::string, std::set<CodeId>>& chapters() const { return chapters_; }

    /// Parents referenced through the truncation rule that have no row of
    /// their own (virtual category nodes).
    const std::set<CodeId>& virtual_categories() const { return virtual_; }

    /// All file codes whose ancestor chain passes through `node`, sorted.
    /// `node` itself is excluded; it may be a virtual category.
    std::vector<CodeId> descendants_of(const CodeId& node) const;

private:
    friend Taxonomy parse_taxonomy(std::string_view tsv);

    std::map<CodeId, KnowledgeCard> cards_;
    std::map<std::string, std::set<CodeId>> chapters_;
    std::set<CodeId> virtual_;
    std::map<CodeId, std::set<CodeId>> children_;  // includes virtual nodes on both sides
};

/// Parse a taxonomy TSV: header `code\tdescription\tsynonyms\tparent`,
/// synonyms pipe-separated, empty parent cell means "derive by truncation".
/// Lines starting with '#' are comments.
Taxonomy parse_taxonomy(std::string_view tsv);

/// Explicit parent if the file provided one, else the truncation-rule parent;
/// none for 3-character category roots. Throws NotFoundError for codes absent
/// from the taxonomy.
std::optional<CodeId> parent_of(const Taxonomy& t, const CodeId& c);

/// All codes sharing c's parent, excluding c, sorted. Codes without a parent
/// have no siblings.
std::vector<CodeId> siblings_of(const Taxonomy& t, const CodeId& c);

const KnowledgeCard& knowledge_of(const Taxonomy& t, const CodeId& c);

std::string chapter_of(const Taxonomy& t, const CodeId& c);

}  // namespace lta
