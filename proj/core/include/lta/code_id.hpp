#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace lta {

/// An ICD code identifier. Identity (comparison, map keys, hashing) uses the
/// normalized form: uppercase with the dot removed. The dotted form of the
/// input is kept for display; when a code arrives undotted the display form is
/// derived by inserting a dot after the third character.
///
/// Accepted shapes, checked per code so mixed ICD-9/ICD-10 files work:
///   - ICD-10-like: letter + 2 alphanumerics + up to 4 more (N18, J9611)
///   - ICD-9-like numeric: 3 digits + up to 2 more (428, 4280)
///   - ICD-9-like V/E prefixed (V85, E8001) — these also satisfy the
///     ICD-10-like shape and are treated as letter-leading codes throughout.
class CodeId {
public:
    CodeId() = default;

    /// Parse and validate a raw code string ("n18.23", "N1823", "428.0", ...).
    /// Throws InvalidCodeError when the shape matches neither family.
    static CodeId parse(std::string_view raw);

    /// Normalization is idempotent: parse(x.norm()) and parse(x.display())
    /// both reproduce x.
    const std::string& norm() const noexcept { return norm_; }
    const std::string& display() const noexcept { return display_; }

    bool empty() const noexcept { return norm_.empty(); }

    /// 3-character codes are category roots (no derivable parent).
    bool is_category_root() const noexcept { return norm_.size() == 3; }

    /// Digit-leading codes. Letter-leading codes, including the ICD-9 V/E
    /// shapes, are handled with the ICD-10-like rules.
    bool is_icd9_numeric() const noexcept {
        return !norm_.empty() && norm_[0] >= '0' && norm_[0] <= '9';
    }

    friend bool operator==(const CodeId& a, const CodeId& b) noexcept {
        return a.norm_ == b.norm_;
    }
    friend std::strong_ordering operator<=>(const CodeId& a, const CodeId& b) noexcept {
        return a.norm_ <=> b.norm_;
    }

private:
    std::string norm_;
    std::string display_;
};

/// Top-level grouping label used as the organ-system proxy: the leading letter
/// for letter-leading codes, the standard 3-digit chapter range (e.g. 428 ->
/// "390-459") for ICD-9-like numeric codes.
std::string chapter_of_code(const CodeId& code);

/// Truncation-rule parent: drop one trailing character of the normalized form.
/// Category roots (3 characters) have no derived parent.
std::optional<CodeId> derived_parent(const CodeId& code);

}  // namespace lta
