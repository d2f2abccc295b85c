#include "lta/taxonomy.hpp"

#include <algorithm>

#include "lta/errors.hpp"

namespace lta {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

constexpr std::string_view kHeader[4] = {"code", "description", "synonyms", "parent"};
constexpr std::size_t kMaxParentDepth = 5;

}  // namespace

std::vector<CodeId> Taxonomy::descendants_of(const CodeId& node) const {
    std::vector<CodeId> out;
    std::vector<CodeId> stack{node};
    std::set<CodeId> seen;
    while (!stack.empty()) {
        CodeId cur = stack.back();
        stack.pop_back();
        auto it = children_.find(cur);
        if (it == children_.end()) continue;
        for (const CodeId& child : it->second) {
            if (!seen.insert(child).second) continue;
            if (contains(child)) out.push_back(child);
            stack.push_back(child);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Taxonomy parse_taxonomy(std::string_view tsv) {
    Taxonomy t;
    auto lines = split(tsv, '\n');

    bool header_seen = false;
    std::size_t rows = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        std::string_view line = lines[i];
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;

        auto cols = split(line, '\t');
        if (!header_seen) {
            if (cols.size() != 4 || trim(cols[0]) != kHeader[0] || trim(cols[1]) != kHeader[1] ||
                trim(cols[2]) != kHeader[2] || trim(cols[3]) != kHeader[3])
                throw ParseError("expected header 'code\\tdescription\\tsynonyms\\tparent'", lineno);
            header_seen = true;
            continue;
        }
        if (cols.size() != 4)
            throw ParseError("expected 4 tab-separated columns, got " + std::to_string(cols.size()), lineno);

        ++rows;
        KnowledgeCard card;
        try {
            card.code = CodeId::parse(cols[0]);
        } catch (const InvalidCodeError& e) {
            throw ParseError(e.what(), lineno);
        }
        card.description = trim(cols[1]);
        if (card.description.empty())
            throw ParseError("code " + card.code.display() + " has an empty description", lineno);
        for (const auto& syn : split(cols[2], '|')) {
            std::string s = trim(syn);
            if (!s.empty()) card.synonyms.push_back(std::move(s));
        }
        std::string parent_cell = trim(cols[3]);
        if (!parent_cell.empty()) {
            try {
                card.parent = CodeId::parse(parent_cell);
            } catch (const InvalidCodeError& e) {
                throw ParseError(e.what(), lineno);
            }
            if (chapter_of_code(*card.parent) != chapter_of_code(card.code))
                throw ParseError("code " + card.code.display() + " declares parent " +
                                     card.parent->display() + " from a different chapter",
                                 lineno);
        } else {
            card.parent = derived_parent(card.code);
        }
        card.chapter = chapter_of_code(card.code);

        if (!t.cards_.emplace(card.code, card).second)
            throw DuplicateError("duplicate definition of code " + card.code.display());
    }

    if (rows == 0) throw EmptyInputError("taxonomy file contains no code rows");

    // Hierarchy indexes. Parents without a row become virtual category nodes,
    // chained upward so descendant walks can pass through them.
    for (auto& [code, card] : t.cards_) {
        t.chapters_[card.chapter].insert(code);
        std::optional<CodeId> parent = card.parent;
        CodeId child = code;
        std::size_t depth = 0;
        while (parent) {
            if (++depth > kMaxParentDepth)
                throw Error("parent chain for " + code.display() + " exceeds " +
                            std::to_string(kMaxParentDepth) + " steps (cycle or malformed parents)");
            t.children_[*parent].insert(child);
            if (t.cards_.count(*parent)) {
                // Continue only through the direct ancestry of `code`; the
                // parent card's own chain is walked on its own iteration.
                break;
            }
            t.virtual_.insert(*parent);
            child = *parent;
            parent = derived_parent(child);
        }
    }

    // Sibling lists: cards grouped by parent.
    std::map<CodeId, std::vector<CodeId>> by_parent;
    for (const auto& [code, card] : t.cards_)
        if (card.parent) by_parent[*card.parent].push_back(code);
    for (auto& [code, card] : t.cards_) {
        if (!card.parent) continue;
        for (const CodeId& peer : by_parent[*card.parent])
            if (peer != code) card.siblings.push_back(peer);
        std::sort(card.siblings.begin(), card.siblings.end());
    }

    // Reject cycles introduced through explicit parents.
    for (const auto& [code, card] : t.cards_) {
        std::set<CodeId> seen{code};
        std::optional<CodeId> cur = card.parent;
        std::size_t steps = 0;
        while (cur) {
            if (!seen.insert(*cur).second)
                throw Error("parent cycle detected at code " + code.display());
            if (++steps > kMaxParentDepth)
                throw Error("parent chain for " + code.display() + " exceeds " +
                            std::to_string(kMaxParentDepth) + " steps");
            auto it = t.cards_.find(*cur);
            cur = (it != t.cards_.end()) ? it->second.parent : derived_parent(*cur);
        }
    }

    return t;
}

namespace {
const KnowledgeCard& card_or_throw(const Taxonomy& t, const CodeId& c) {
    auto it = t.cards().find(c);
    if (it == t.cards().end())
        throw NotFoundError("code " + c.display() + " not found in taxonomy");
    return it->second;
}
}  // namespace

std::optional<CodeId> parent_of(const Taxonomy& t, const CodeId& c) {
    return card_or_throw(t, c).parent;
}

std::vector<CodeId> siblings_of(const Taxonomy& t, const CodeId& c) {
    return card_or_throw(t, c).siblings;
}

const KnowledgeCard& knowledge_of(const Taxonomy& t, const CodeId& c) {
    return card_or_throw(t, c);
}

std::string chapter_of(const Taxonomy& t, const CodeId& c) {
    return card_or_throw(t, c).chapter;
}

}  // namespace lta
