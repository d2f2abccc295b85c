#include "lta/evalkit.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lta/errors.hpp"

namespace lta {

using nlohmann::json;

std::string_view to_string(MacroMode m) {
    return m == MacroMode::full_label_space ? "full_label_space" : "gold_present";
}

MacroMode macro_mode_from_string(std::string_view s) {
    if (s == "full_label_space" || s == "full") return MacroMode::full_label_space;
    if (s == "gold_present") return MacroMode::gold_present;
    throw ConfigError("unknown macro mode '" + std::string(s) + "'");
}

GoldMatrix make_gold_matrix(std::vector<std::pair<std::string, std::set<CodeId>>> samples,
                            std::vector<CodeId> label_space) {
    std::sort(label_space.begin(), label_space.end());
    label_space.erase(std::unique(label_space.begin(), label_space.end()), label_space.end());
    std::set<CodeId> space(label_space.begin(), label_space.end());

    std::set<std::string> ids;
    for (const auto& [id, gold] : samples) {
        if (!ids.insert(id).second) throw DuplicateError("duplicate sample id " + id);
        for (const CodeId& c : gold)
            if (!space.count(c))
                throw Error("gold code " + c.display() + " of sample " + id +
                            " is outside the label space");
    }
    return GoldMatrix{std::move(samples), std::move(label_space)};
}

namespace {

struct Aligned {
    const GoldMatrix* gold;
    const ScoreMatrix* scores;
    std::vector<const ScoreSample*> by_gold_order;  // scores aligned to gold sample order

    double score(std::size_t sample, const CodeId& code) const {
        const auto& m = by_gold_order[sample]->scores;
        auto it = m.find(code);
        return it == m.end() ? 0.0 : it->second;
    }
    bool is_gold(std::size_t sample, const CodeId& code) const {
        return gold->samples[sample].second.count(code) > 0;
    }
};

Aligned align(const GoldMatrix& g, const ScoreMatrix& s) {
    if (g.samples.empty()) throw EmptyInputError("no samples to evaluate");
    if (!(s.threshold > 0.0 && s.threshold < 1.0))
        throw ConfigError("score threshold must lie in (0,1)");

    std::map<std::string, const ScoreSample*> by_id;
    for (const ScoreSample& sample : s.samples) {
        if (!by_id.emplace(sample.id, &sample).second)
            throw DuplicateError("duplicate score sample id " + sample.id);
    }
    if (by_id.size() != g.samples.size())
        throw Error("gold and score matrices differ in sample count (" +
                    std::to_string(g.samples.size()) + " vs " + std::to_string(by_id.size()) + ")");

    std::set<CodeId> space(g.label_space.begin(), g.label_space.end());
    Aligned a{&g, &s, {}};
    a.by_gold_order.reserve(g.samples.size());
    for (const auto& [id, gold] : g.samples) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw Error("sample " + id + " has gold labels but no scores");
        for (const auto& [code, value] : it->second->scores) {
            if (!space.count(code))
                throw Error("score for code " + code.display() + " of sample " + id +
                            " is outside the label space");
            if (!(value >= 0.0 && value <= 1.0))
                throw Error("score for code " + code.display() + " of sample " + id +
                            " is outside [0,1]");
        }
        a.by_gold_order.push_back(it->second);
    }
    return a;
}

struct Confusion {
    std::int64_t tp = 0, fp = 0, fn = 0;
    bool any_gold() const { return tp + fn > 0; }
    bool any_pred() const { return tp + fp > 0; }
    double f1() const {
        const std::int64_t denom = 2 * tp + fp + fn;
        return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    }
};

/// AUC by the rank statistic with average ranks for ties. Pairs are
/// (score, is_positive).
double rank_auc(std::vector<std::pair<double, bool>>& pairs, std::size_t positives,
                std::size_t negatives) {
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < pairs.size()) {
        std::size_t j = i;
        while (j < pairs.size() && pairs[j].first == pairs[i].first) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k)
            if (pairs[k].second) pos_rank_sum += avg_rank;
        i = j;
    }
    const double np = static_cast<double>(positives);
    const double nn = static_cast<double>(negatives);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::pair<double, double> f1_over_labels(const Aligned& a, const std::vector<CodeId>& labels,
                                         MacroMode mode) {
    Confusion pooled;
    double macro_sum = 0.0;
    std::size_t macro_n = 0;
    for (const CodeId& label : labels) {
        Confusion c;
        for (std::size_t s = 0; s < a.gold->samples.size(); ++s) {
            const bool gold = a.is_gold(s, label);
            const bool pred = a.score(s, label) >= a.scores->threshold;
            if (gold && pred) ++c.tp;
            else if (!gold && pred) ++c.fp;
            else if (gold && !pred) ++c.fn;
        }
        pooled.tp += c.tp;
        pooled.fp += c.fp;
        pooled.fn += c.fn;
        if (mode == MacroMode::full_label_space || c.any_gold()) {
            macro_sum += c.f1();  // labels with no gold and no predictions contribute 0
            ++macro_n;
        }
    }
    const double macro = macro_n == 0 ? 0.0 : macro_sum / static_cast<double>(macro_n);
    return {pooled.f1(), macro};
}

struct AucOverLabels {
    double micro = 0.0;
    double macro = 0.0;
    std::vector<CodeId> skipped;
};

AucOverLabels auc_over_labels(const Aligned& a, const std::vector<CodeId>& labels) {
    AucOverLabels out;
    std::vector<std::pair<double, bool>> pooled;
    pooled.reserve(labels.size() * a.gold->samples.size());
    double macro_sum = 0.0;
    std::size_t macro_n = 0;
    std::size_t pooled_pos = 0;
    for (const CodeId& label : labels) {
        std::vector<std::pair<double, bool>> pairs;
        pairs.reserve(a.gold->samples.size());
        std::size_t pos = 0;
        for (std::size_t s = 0; s < a.gold->samples.size(); ++s) {
            const bool gold = a.is_gold(s, label);
            pairs.emplace_back(a.score(s, label), gold);
            pos += gold ? 1 : 0;
        }
        pooled.insert(pooled.end(), pairs.begin(), pairs.end());
        pooled_pos += pos;
        const std::size_t neg = pairs.size() - pos;
        if (pos == 0 || neg == 0) {
            out.skipped.push_back(label);
            continue;
        }
        macro_sum += rank_auc(pairs, pos, neg);
        ++macro_n;
    }
    out.macro = macro_n == 0 ? 0.0 : macro_sum / static_cast<double>(macro_n);
    const std::size_t pooled_neg = pooled.size() - pooled_pos;
    out.micro = (pooled_pos == 0 || pooled_neg == 0) ? 0.0
                                                     : rank_auc(pooled, pooled_pos, pooled_neg);
    return out;
}

}  // namespace

std::pair<double, double> f1_scores(const GoldMatrix& g, const ScoreMatrix& s, MacroMode mode) {
    return f1_over_labels(align(g, s), g.label_space, mode);
}

AucResult auc_scores(const GoldMatrix& g, const ScoreMatrix& s) {
    auto r = auc_over_labels(align(g, s), g.label_space);
    return AucResult{r.micro, r.macro, std::move(r.skipped)};
}

double precision_at_k(const GoldMatrix& g, const ScoreMatrix& s, std::size_t k) {
    if (k == 0) throw Error("precision_at_k requires k >= 1");
    const Aligned a = align(g, s);

    double sum = 0.0;
    std::vector<std::pair<double, const CodeId*>> ranked;
    ranked.reserve(g.label_space.size());
    for (std::size_t i = 0; i < g.samples.size(); ++i) {
        ranked.clear();
        for (const CodeId& label : g.label_space) ranked.emplace_back(a.score(i, label), &label);
        std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return *x.second < *y.second;  // deterministic lexicographic tie-break
        });
        const std::size_t take = std::min(k, ranked.size());
        std::size_t hits = 0;
        for (std::size_t j = 0; j < take; ++j)
            if (a.is_gold(i, *ranked[j].second)) ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(k);
    }
    return sum / static_cast<double>(g.samples.size());
}

MetricReport evaluate(const GoldMatrix& g, const ScoreMatrix& s,
                      const std::map<CodeId, Tier>& tiers, const std::vector<std::size_t>& ks,
                      MacroMode mode) {
    const Aligned a = align(g, s);

    std::vector<CodeId> missing;
    for (const CodeId& label : g.label_space)
        if (!tiers.count(label)) missing.push_back(label);
    if (!missing.empty()) {
        std::string msg = "tier map does not cover label(s):";
        for (const CodeId& c : missing) msg += " " + c.display();
        throw Error(msg);
    }

    MetricReport report;
    report.macro_mode = mode;
    report.threshold = s.threshold;
    std::tie(report.f1_micro, report.f1_macro) = f1_over_labels(a, g.label_space, mode);
    auto auc = auc_over_labels(a, g.label_space);
    report.auc_micro = auc.micro;
    report.auc_macro = auc.macro;
    report.skipped_labels = std::move(auc.skipped);
    for (std::size_t k : ks) report.p_at_k[k] = precision_at_k(g, s, k);

    std::map<Tier, std::vector<CodeId>> by_tier;
    for (const CodeId& label : g.label_space) by_tier[tiers.at(label)].push_back(label);
    for (const auto& [tier, labels] : by_tier) {
        TierMetrics tm;
        tm.labels = labels.size();
        std::tie(tm.f1_micro, tm.f1_macro) = f1_over_labels(a, labels, mode);
        auto tier_auc = auc_over_labels(a, labels);
        tm.auc_micro = tier_auc.micro;
        tm.auc_macro = tier_auc.macro;
        tm.skipped = std::move(tier_auc.skipped);
        report.per_tier.emplace(tier, std::move(tm));
    }
    return report;
}

std::vector<std::pair<std::string, std::set<CodeId>>> gold_from_jsonl(std::string_view text) {
    std::vector<std::pair<std::string, std::set<CodeId>>> samples;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        try {
            json obj = json::parse(line);
            std::set<CodeId> gold;
            for (const auto& c : obj.at("gold")) gold.insert(CodeId::parse(c.get<std::string>()));
            samples.emplace_back(obj.at("id").get<std::string>(), std::move(gold));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad gold line: ") + e.what(), lineno);
        } catch (const InvalidCodeError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return samples;
}

std::vector<ScoreSample> score_samples_from_jsonl(std::string_view text) {
    std::vector<ScoreSample> samples;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        try {
            json obj = json::parse(line);
            ScoreSample s;
            s.id = obj.at("id").get<std::string>();
            for (const auto& [code, value] : obj.at("scores").items())
                s.scores.emplace(CodeId::parse(code), value.get<double>());
            samples.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad scores line: ") + e.what(), lineno);
        } catch (const InvalidCodeError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return samples;
}

ScoreMatrix make_score_matrix(std::vector<ScoreSample> samples, const GoldMatrix& gold,
                              double threshold) {
    ScoreMatrix s{std::move(samples), threshold};
    align(gold, s);  // validates ids, ranges and the label space
    return s;
}

namespace {

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

json tier_block(const TierMetrics& tm) {
    json skipped = json::array();
    for (const CodeId& c : tm.skipped) skipped.push_back(c.display());
    return json{{"auc_micro", round4(tm.auc_micro)}, {"auc_macro", round4(tm.auc_macro)},
                {"f1_micro", round4(tm.f1_micro)},   {"f1_macro", round4(tm.f1_macro)},
                {"labels", tm.labels},               {"skipped_labels", std::move(skipped)}};
}

}  // namespace

std::string report_to_json(const MetricReport& report) {
    json p_at_k = json::object();
    for (const auto& [k, v] : report.p_at_k) p_at_k[std::to_string(k)] = round4(v);
    json per_tier = json::object();
    for (const auto& [tier, tm] : report.per_tier)
        per_tier[std::string(to_string(tier))] = tier_block(tm);
    json skipped = json::array();
    for (const CodeId& c : report.skipped_labels) skipped.push_back(c.display());

    json doc{{"schema_version", 1},
             {"macro_mode", std::string(to_string(report.macro_mode))},
             {"threshold", report.threshold},
             {"auc_micro", round4(report.auc_micro)},
             {"auc_macro", round4(report.auc_macro)},
             {"f1_micro", round4(report.f1_micro)},
             {"f1_macro", round4(report.f1_macro)},
             {"p_at_k", std::move(p_at_k)},
             {"per_tier", std::move(per_tier)},
             {"skipped_labels", std::move(skipped)}};
    return doc.dump(2) + "\n";
}

}  // namespace lta
