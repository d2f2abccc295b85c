#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lta/code_id.hpp"
#include "lta/corpus.hpp"
#include "lta/taxonomy.hpp"

namespace lta {

/// Frequency tiers: Head >=1000, Medium 100-999, Tail 10-99, UltraTail <10
/// (zero-shot included).
enum class Tier { head, medium, tail, ultra_tail };

std::string_view to_string(Tier t);
Tier tier_from_string(std::string_view s);

Tier stratify(std::uint32_t n_real);

enum class LogBase { natural, base10 };
enum class Rounding { ceil, floor, nearest };

std::string_view to_string(LogBase b);
LogBase log_base_from_string(std::string_view s);
std::string_view to_string(Rounding r);
Rounding rounding_from_string(std::string_view s);

struct AllocationParams {
    double alpha = 0.5;
    int max_per_code = 50;
    LogBase log_base = LogBase::natural;
    Rounding rounding = Rounding::ceil;

    void validate() const;  // alpha > 0, max_per_code >= 1
};

/// Per-code synthetic budget: max_per_code for zero-shot codes, otherwise
/// round(min(alpha * max_per_code / log(n_real + 5), max_per_code)).
int allocate(std::uint32_t n_real, const AllocationParams& p);

/// Raw (unrounded, unclamped) formula value for n_real >= 1. Exposed so the
/// clamp-redundancy property can be checked directly.
double allocation_raw(std::uint32_t n_real, const AllocationParams& p);

enum class Strategy { clone, substitute, none };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

struct PlanEntry {
    CodeId code;
    Tier tier = Tier::ultra_tail;
    std::uint32_t n_real = 0;
    int n_synthetic = 0;
    Strategy strategy = Strategy::none;
};

struct AllocationPlan {
    AllocationParams params;
    std::vector<PlanEntry> entries;  // sorted by code

    /// Codes with a non-zero budget.
    std::size_t covered_codes() const;
    /// Sum of all budgets.
    std::int64_t total_notes() const;
};

/// Build the augmentation plan. Without explicit targets the universe is every
/// taxonomy code with n_real < 100 (zero-shot codes included). Explicit
/// targets may also name corpus-only codes; targets absent from both corpus
/// and taxonomy raise NotFoundError listing the offenders.
AllocationPlan build_plan(const Corpus& corpus, const Taxonomy& taxonomy,
                          const AllocationParams& params,
                          const std::optional<std::set<CodeId>>& target_codes = std::nullopt);

std::string plan_to_json(const AllocationPlan& plan);
AllocationPlan plan_from_json(std::string_view text);

struct BinningSpec {
    /// Counts below the cap get one linear bin each; the rest collapse into a
    /// single overflow bin labelled "<cap>+".
    std::uint32_t linear_cap = 64;
};

struct DistributionRow {
    std::string bin;
    std::uint32_t real_count = 0;      // codes with that many samples in the real corpus
    std::uint32_t extended_count = 0;  // same in the extended corpus
    std::string scale;                 // "linear" | "log"
};

/// Histogram of per-code sample counts before/after augmentation, over the
/// union of codes seen in either corpus, in linear bins and power-of-two bins.
std::vector<DistributionRow> emit_distribution(const Corpus& real, const Corpus& extended,
                                               const BinningSpec& bins = {});

/// CSV with header `bin,real_count,extended_count,scale`, preceded by a
/// `# schema_version=1` comment line.
std::string distribution_to_csv(const std::vector<DistributionRow>& rows);

}  // namespace lta
