#include "lta/corpus.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "lta/errors.hpp"

namespace lta {

using nlohmann::json;

std::string_view to_string(Origin o) {
    return o == Origin::real ? "real" : "synthetic";
}

Origin origin_from_string(std::string_view s) {
    if (s == "real") return Origin::real;
    if (s == "synthetic") return Origin::synthetic;
    throw ParseError("unknown origin '" + std::string(s) + "' (expected real|synthetic)");
}

Corpus Corpus::build(std::vector<Note> notes) {
    Corpus c;
    c.notes_ = std::move(notes);
    for (std::size_t i = 0; i < c.notes_.size(); ++i) {
        const Note& n = c.notes_[i];
        if (n.id.empty()) throw Error("note at index " + std::to_string(i) + " has an empty id");
        if (n.codes.empty()) throw Error("note " + n.id + " has an empty code set");
        if (n.origin == Origin::synthetic) {
            if (!n.anchor) throw Error("synthetic note " + n.id + " lacks an anchor");
            if (!n.codes.count(*n.anchor))
                throw Error("synthetic note " + n.id + " anchor " + n.anchor->display() +
                            " is not in its code set");
        }
        if (!c.by_id_.emplace(n.id, i).second)
            throw DuplicateError("duplicate note id " + n.id);

        for (const CodeId& code : n.codes) {
            c.freq_[code] += 1;
            c.inverted_[code].push_back(n.id);
        }
        for (auto a = n.codes.begin(); a != n.codes.end(); ++a) {
            auto b = a;
            for (++b; b != n.codes.end(); ++b) {
                c.cooc_[*a][*b] += 1;
                c.cooc_[*b][*a] += 1;
            }
        }
    }
    return c;
}

const Note* Corpus::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &notes_[it->second];
}

std::uint32_t Corpus::freq(const CodeId& code) const {
    auto it = freq_.find(code);
    return it == freq_.end() ? 0u : it->second;
}

std::uint32_t Corpus::cooc(const CodeId& a, const CodeId& b) const {
    auto it = cooc_.find(a);
    if (it == cooc_.end()) return 0;
    auto jt = it->second.find(b);
    return jt == it->second.end() ? 0u : jt->second;
}

Corpus load_corpus(std::string_view jsonl, std::vector<std::string>* warnings) {
    std::vector<Note> notes;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= jsonl.size()) {
        std::size_t end = jsonl.find('\n', start);
        if (end == std::string_view::npos) end = jsonl.size();
        std::string_view line = jsonl.substr(start, end - start);
        start = end + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) {
            if (start > jsonl.size()) break;
            continue;
        }

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        if (!obj.is_object()) throw ParseError("expected a JSON object", lineno);

        Note note;
        try {
            note.id = obj.at("id").get<std::string>();
            note.text = obj.at("text").get<std::string>();
            const auto& codes = obj.at("codes");
            if (!codes.is_array()) throw ParseError("'codes' must be an array", lineno);
            for (const auto& raw : codes) {
                CodeId code = CodeId::parse(raw.get<std::string>());
                if (!note.codes.insert(code).second && warnings)
                    warnings->push_back("line " + std::to_string(lineno) + ": note " + note.id +
                                        ": duplicate code " + code.display() + " collapsed");
            }
            if (obj.contains("origin"))
                note.origin = origin_from_string(obj.at("origin").get<std::string>());
            if (obj.contains("anchor") && !obj.at("anchor").is_null())
                note.anchor = CodeId::parse(obj.at("anchor").get<std::string>());
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad note object: ") + e.what(), lineno);
        } catch (const InvalidCodeError& e) {
            throw ParseError(e.what(), lineno);
        }

        if (note.codes.empty())
            throw ParseError("note " + note.id + " has an empty code list", lineno);
        if (note.origin == Origin::synthetic && !note.anchor)
            throw ParseError("synthetic note " + note.id + " lacks an anchor", lineno);
        if (note.origin == Origin::real && note.anchor)
            throw ParseError("real note " + note.id + " must not carry an anchor", lineno);
        if (note.anchor && !note.codes.count(*note.anchor))
            throw ParseError("note " + note.id + " anchor " + note.anchor->display() +
                                 " is not in its code set",
                             lineno);
        notes.push_back(std::move(note));
    }
    return Corpus::build(std::move(notes));
}

const std::vector<std::string>& notes_containing(const Corpus& c, const CodeId& code) {
    static const std::vector<std::string> kEmpty;
    auto it = c.inverted_.find(code);
    return it == c.inverted_.end() ? kEmpty : it->second;
}

std::vector<std::pair<CodeId, std::uint32_t>> cooccurrence_top(const Corpus& c,
                                                               const CodeId& code,
                                                               std::size_t k) {
    if (k == 0) throw Error("cooccurrence_top requires k >= 1");
    auto it = c.cooc_index().find(code);
    if (it == c.cooc_index().end()) return {};
    std::vector<std::pair<CodeId, std::uint32_t>> partners(it->second.begin(), it->second.end());
    std::sort(partners.begin(), partners.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (partners.size() > k) partners.resize(k);
    return partners;
}

Corpus merge_corpus(const Corpus& real, const std::vector<Note>& synthetic) {
    std::vector<Note> all = real.notes();
    for (const Note& n : synthetic) {
        if (real.find(n.id)) throw DuplicateError("synthetic note id " + n.id + " collides with an existing note");
        all.push_back(n);
    }
    return Corpus::build(std::move(all));
}

std::string notes_to_jsonl(const std::vector<Note>& notes) {
    std::string out;
    for (const Note& n : notes) {
        json obj;
        obj["id"] = n.id;
        obj["text"] = n.text;
        json codes = json::array();
        for (const CodeId& c : n.codes) codes.push_back(c.display());
        obj["codes"] = std::move(codes);
        obj["origin"] = std::string(to_string(n.origin));
        if (n.anchor) obj["anchor"] = n.anchor->display();
        out += obj.dump();
        out += '\n';
    }
    return out;
}

}  // namespace lta
