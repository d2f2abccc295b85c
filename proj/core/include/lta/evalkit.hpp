#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lta/code_id.hpp"
#include "lta/planner.hpp"

namespace lta {

struct GoldMatrix {
    std::vector<std::pair<std::string, std::set<CodeId>>> samples;  // (id, gold codes)
    std::vector<CodeId> label_space;                                // sorted, unique
};

/// Validate sample id uniqueness, sort/deduplicate the label space and check
/// every gold code is in it.
GoldMatrix make_gold_matrix(std::vector<std::pair<std::string, std::set<CodeId>>> samples,
                            std::vector<CodeId> label_space);

struct ScoreSample {
    std::string id;
    std::map<CodeId, double> scores;  // absent codes score 0
};

struct ScoreMatrix {
    std::vector<ScoreSample> samples;
    double threshold = 0.5;  // decision cutoff for F1 binarization, in (0,1)
};

enum class MacroMode {
    full_label_space,  // average over every label; absent labels contribute F1=0
    gold_present       // average only over labels with at least one gold positive
};

std::string_view to_string(MacroMode m);
MacroMode macro_mode_from_string(std::string_view s);

/// Micro/macro F1 after binarizing scores at the threshold. Sample ids must
/// match the gold matrix 1:1; scores for codes outside the label space are
/// rejected.
std::pair<double, double> f1_scores(const GoldMatrix& g, const ScoreMatrix& s,
                                    MacroMode mode = MacroMode::full_label_space);

struct AucResult {
    double micro = 0.0;
    double macro = 0.0;
    std::vector<CodeId> skipped;  // labels with no positive or no negative instance
};

/// Rank-statistic AUC (ties contribute 1/2). Macro averages over labels that
/// have both a positive and a negative instance; micro pools every
/// (sample, label) pair.
AucResult auc_scores(const GoldMatrix& g, const ScoreMatrix& s);

/// Mean over samples of |top-k ∩ gold| / k, ranking by descending score with
/// lexicographic tie-breaking. The denominator stays k even when fewer labels
/// exist.
double precision_at_k(const GoldMatrix& g, const ScoreMatrix& s, std::size_t k);

struct TierMetrics {
    double auc_micro = 0.0;
    double auc_macro = 0.0;
    double f1_micro = 0.0;
    double f1_macro = 0.0;
    std::size_t labels = 0;
    std::vector<CodeId> skipped;
};

struct MetricReport {
    double auc_micro = 0.0;
    double auc_macro = 0.0;
    double f1_micro = 0.0;
    double f1_macro = 0.0;
    std::map<std::size_t, double> p_at_k;
    std::map<Tier, TierMetrics> per_tier;  // only tiers present in the label space
    std::vector<CodeId> skipped_labels;
    MacroMode macro_mode = MacroMode::full_label_space;
    double threshold = 0.5;
};

/// Full report with per-tier breakdowns (metrics restricted to each tier's
/// label subset; P@K stays sample-level and global). `tiers` must cover the
/// label space.
MetricReport evaluate(const GoldMatrix& g, const ScoreMatrix& s,
                      const std::map<CodeId, Tier>& tiers,
                      const std::vector<std::size_t>& ks = {8, 15},
                      MacroMode mode = MacroMode::full_label_space);

/// Loaders for the JSONL interfaces {"id","gold":[..]} and
/// {"id","scores":{code: float}}. Score samples are matched to gold samples
/// by id; both directions must cover the same ids.
std::vector<std::pair<std::string, std::set<CodeId>>> gold_from_jsonl(std::string_view text);
std::vector<ScoreSample> score_samples_from_jsonl(std::string_view text);
ScoreMatrix make_score_matrix(std::vector<ScoreSample> samples, const GoldMatrix& gold,
                              double threshold = 0.5);

/// Report JSON; metric values are rounded to 4 decimals at serialization only.
std::string report_to_json(const MetricReport& report);

}  // namespace lta
