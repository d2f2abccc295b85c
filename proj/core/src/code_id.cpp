#include "lta/code_id.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "lta/errors.hpp"

namespace lta {

namespace {

bool is_alnum_upper(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool icd10_like(std::string_view s) {
    if (s.size() < 3 || s.size() > 7) return false;
    if (s[0] < 'A' || s[0] > 'Z') return false;
    return std::all_of(s.begin() + 1, s.end(), is_alnum_upper);
}

bool icd9_numeric(std::string_view s) {
    if (s.size() < 3 || s.size() > 5) return false;
    return std::all_of(s.begin(), s.end(), is_digit);
}

std::string trimmed(std::string_view raw) {
    auto b = raw.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = raw.find_last_not_of(" \t\r\n");
    return std::string(raw.substr(b, e - b + 1));
}

// ICD-9 chapter ranges from the public chapter list, keyed by the leading
// 3-digit category.
struct ChapterRange {
    int lo;
    int hi;
    const char* label;
};

constexpr std::array<ChapterRange, 17> kIcd9Chapters = {{
    {1, 139, "001-139"},
    {140, 239, "140-239"},
    {240, 279, "240-279"},
    {280, 289, "280-289"},
    {290, 319, "290-319"},
    {320, 389, "320-389"},
    {390, 459, "390-459"},
    {460, 519, "460-519"},
    {520, 579, "520-579"},
    {580, 629, "580-629"},
    {630, 679, "630-679"},
    {680, 709, "680-709"},
    {710, 739, "710-739"},
    {740, 759, "740-759"},
    {760, 779, "760-779"},
    {780, 799, "780-799"},
    {800, 999, "800-999"},
}};

}  // namespace

CodeId CodeId::parse(std::string_view raw) {
    std::string disp = trimmed(raw);
    std::transform(disp.begin(), disp.end(), disp.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (disp.empty()) throw InvalidCodeError("empty code");

    std::string norm;
    norm.reserve(disp.size());
    std::size_t dot_pos = std::string::npos;
    for (std::size_t i = 0; i < disp.size(); ++i) {
        if (disp[i] == '.') {
            if (dot_pos != std::string::npos)
                throw InvalidCodeError("code '" + disp + "' contains more than one dot");
            dot_pos = i;
        } else {
            norm.push_back(disp[i]);
        }
    }
    // A dot, when present, sits after the 3rd or 4th character (428.0,
    // N18.23, E800.1) and must not be terminal.
    if (dot_pos != std::string::npos) {
        if ((dot_pos != 3 && dot_pos != 4) || dot_pos + 1 == disp.size())
            throw InvalidCodeError("code '" + disp + "' has a misplaced dot");
    }

    if (!icd10_like(norm) && !icd9_numeric(norm))
        throw InvalidCodeError("code '" + disp + "' matches neither the ICD-10-like nor the ICD-9-like shape");

    CodeId id;
    id.norm_ = std::move(norm);
    if (dot_pos != std::string::npos) {
        id.display_ = std::move(disp);  // preserve the dotted form as given
    } else if (id.norm_.size() > 3) {
        id.display_ = id.norm_.substr(0, 3) + "." + id.norm_.substr(3);
    } else {
        id.display_ = id.norm_;
    }
    return id;
}

std::string chapter_of_code(const CodeId& code) {
    const std::string& n = code.norm();
    if (n.empty()) throw InvalidCodeError("chapter of empty code");
    if (!code.is_icd9_numeric()) return std::string(1, n[0]);

    const int category = (n[0] - '0') * 100 + (n[1] - '0') * 10 + (n[2] - '0');
    for (const auto& r : kIcd9Chapters) {
        if (category >= r.lo && category <= r.hi) return r.label;
    }
    // Only category 000 falls through; treat it like the first chapter.
    return kIcd9Chapters.front().label;
}

std::optional<CodeId> derived_parent(const CodeId& code) {
    if (code.is_category_root()) return std::nullopt;
    return CodeId::parse(code.norm().substr(0, code.norm().size() - 1));
}

}  // namespace lta
