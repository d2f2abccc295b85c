#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lta/errors.hpp"
#include "lta/evalkit.hpp"

using namespace lta;

namespace {

CodeId code(const char* c) { return CodeId::parse(c); }

GoldMatrix gold2x3() {
    // 3 samples, labels A/B: A gold [1,0,1], B gold [0,1,1]
    std::vector<std::pair<std::string, std::set<CodeId>>> samples{
        {"s1", {code("A01")}},
        {"s2", {code("B02")}},
        {"s3", {code("A01"), code("B02")}},
    };
    return make_gold_matrix(std::move(samples), {code("A01"), code("B02")});
}

ScoreMatrix scores2x3() {
    // A pred [1,1,0], B pred [0,1,1] at threshold 0.5
    ScoreMatrix s;
    s.samples = {
        {"s1", {{code("A01"), 0.9}, {code("B02"), 0.1}}},
        {"s2", {{code("A01"), 0.8}, {code("B02"), 0.7}}},
        {"s3", {{code("A01"), 0.2}, {code("B02"), 0.6}}},
    };
    return s;
}

// ---------------------------------------------------------------------------
// From-definition oracles, written as plainly as possible and kept free of
// any shared code with the implementation.

struct Instance {
    std::vector<std::string> labels;                      // label names
    std::vector<std::vector<int>> gold;                   // [sample][label] 0/1
    std::vector<std::vector<double>> score;               // [sample][label]
};

double oracle_f1_micro(const Instance& in, double thr) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t s = 0; s < in.gold.size(); ++s)
        for (std::size_t l = 0; l < in.labels.size(); ++l) {
            const bool g = in.gold[s][l] == 1;
            const bool p = in.score[s][l] >= thr;
            if (g && p) ++tp;
            if (!g && p) ++fp;
            if (g && !p) ++fn;
        }
    const double denom = 2.0 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * tp / denom;
}

double oracle_f1_macro(const Instance& in, double thr) {
    double sum = 0;
    for (std::size_t l = 0; l < in.labels.size(); ++l) {
        long tp = 0, fp = 0, fn = 0;
        for (std::size_t s = 0; s < in.gold.size(); ++s) {
            const bool g = in.gold[s][l] == 1;
            const bool p = in.score[s][l] >= thr;
            if (g && p) ++tp;
            if (!g && p) ++fp;
            if (g && !p) ++fn;
        }
        const double denom = 2.0 * tp + fp + fn;
        sum += denom == 0 ? 0.0 : 2.0 * tp / denom;
    }
    return sum / static_cast<double>(in.labels.size());
}

/// AUC by brute-force pair counting: correctly ordered pairs get 1, ties 1/2.
double oracle_pair_auc(const std::vector<double>& scores, const std::vector<int>& gold) {
    double wins = 0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (gold[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (gold[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return pairs == 0 ? -1.0 : wins / static_cast<double>(pairs);
}

double oracle_auc_macro(const Instance& in, std::size_t* skipped_out = nullptr) {
    double sum = 0;
    std::size_t used = 0, skipped = 0;
    for (std::size_t l = 0; l < in.labels.size(); ++l) {
        std::vector<double> s;
        std::vector<int> g;
        for (std::size_t i = 0; i < in.gold.size(); ++i) {
            s.push_back(in.score[i][l]);
            g.push_back(in.gold[i][l]);
        }
        const double auc = oracle_pair_auc(s, g);
        if (auc < 0) {
            ++skipped;
            continue;
        }
        sum += auc;
        ++used;
    }
    if (skipped_out) *skipped_out = skipped;
    return used == 0 ? 0.0 : sum / static_cast<double>(used);
}

double oracle_auc_micro(const Instance& in) {
    std::vector<double> s;
    std::vector<int> g;
    for (std::size_t i = 0; i < in.gold.size(); ++i)
        for (std::size_t l = 0; l < in.labels.size(); ++l) {
            s.push_back(in.score[i][l]);
            g.push_back(in.gold[i][l]);
        }
    const double auc = oracle_pair_auc(s, g);
    return auc < 0 ? 0.0 : auc;
}

double oracle_p_at_k(const Instance& in, std::size_t k) {
    double total = 0;
    for (std::size_t s = 0; s < in.gold.size(); ++s) {
        // repeatedly pick the max (score, then lexicographically smallest label)
        std::vector<bool> taken(in.labels.size(), false);
        std::size_t hits = 0;
        for (std::size_t round = 0; round < k && round < in.labels.size(); ++round) {
            std::size_t best = in.labels.size();
            for (std::size_t l = 0; l < in.labels.size(); ++l) {
                if (taken[l]) continue;
                if (best == in.labels.size() || in.score[s][l] > in.score[s][best] ||
                    (in.score[s][l] == in.score[s][best] && in.labels[l] < in.labels[best]))
                    best = l;
            }
            taken[best] = true;
            if (in.gold[s][best] == 1) ++hits;
        }
        total += static_cast<double>(hits) / static_cast<double>(k);
    }
    return total / static_cast<double>(in.gold.size());
}

/// Normalized Mann-Whitney U, computed from the U statistic directly.
double oracle_mann_whitney(const std::vector<double>& scores, const std::vector<int>& gold) {
    double u = 0;
    long np = 0, nn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) (gold[i] ? np : nn) += 1;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!gold[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (gold[j]) continue;
            u += scores[i] > scores[j] ? 1.0 : (scores[i] == scores[j] ? 0.5 : 0.0);
        }
    }
    return u / (static_cast<double>(np) * static_cast<double>(nn));
}

Instance to_instance(const GoldMatrix& g, const ScoreMatrix& s) {
    Instance in;
    for (const CodeId& c : g.label_space) in.labels.push_back(c.norm());
    for (std::size_t i = 0; i < g.samples.size(); ++i) {
        std::vector<int> gold_row;
        std::vector<double> score_row;
        for (const CodeId& c : g.label_space) {
            gold_row.push_back(g.samples[i].second.count(c) ? 1 : 0);
            auto it = s.samples[i].scores.find(c);
            score_row.push_back(it == s.samples[i].scores.end() ? 0.0 : it->second);
        }
        in.gold.push_back(std::move(gold_row));
        in.score.push_back(std::move(score_row));
    }
    return in;
}

}  // namespace

TEST_CASE("evalkit: worked F1 fixture — macro 0.75, micro 0.75") {
    auto [micro, macro] = f1_scores(gold2x3(), scores2x3());
    CHECK(micro == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(macro == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("evalkit: perfect and empty predictions") {
    ScoreMatrix perfect;
    perfect.samples = {
        {"s1", {{code("A01"), 1.0}}},
        {"s2", {{code("B02"), 1.0}}},
        {"s3", {{code("A01"), 1.0}, {code("B02"), 1.0}}},
    };
    auto [micro, macro] = f1_scores(gold2x3(), perfect);
    CHECK(micro == 1.0);
    CHECK(macro == 1.0);

    ScoreMatrix empty;
    empty.samples = {{"s1", {}}, {"s2", {}}, {"s3", {}}};
    auto [micro0, macro0] = f1_scores(gold2x3(), empty);
    CHECK(micro0 == 0.0);
    CHECK(macro0 == 0.0);
}

TEST_CASE("evalkit: macro respects the averaging mode") {
    // an extra label C03 never appears in gold or predictions
    std::vector<std::pair<std::string, std::set<CodeId>>> samples{
        {"s1", {code("A01")}},
    };
    const GoldMatrix g = make_gold_matrix(std::move(samples), {code("A01"), code("C03")});
    ScoreMatrix s;
    s.samples = {{"s1", {{code("A01"), 0.9}}}};

    auto [micro_full, macro_full] = f1_scores(g, s, MacroMode::full_label_space);
    CHECK(macro_full == doctest::Approx(0.5));  // (1.0 + 0.0) / 2
    auto [micro_gold, macro_gold] = f1_scores(g, s, MacroMode::gold_present);
    CHECK(macro_gold == doctest::Approx(1.0));
    CHECK(micro_full == micro_gold);
}

TEST_CASE("evalkit: AUC fixture — separable scores give 1.0, ties give 0.5") {
    std::vector<std::pair<std::string, std::set<CodeId>>> samples;
    ScoreMatrix s;
    const double pos_scores[] = {0.9, 0.8};
    const double neg_scores[] = {0.7, 0.1};
    for (int i = 0; i < 2; ++i) {
        samples.push_back({"p" + std::to_string(i), {code("A01")}});
        s.samples.push_back({"p" + std::to_string(i), {{code("A01"), pos_scores[i]}}});
    }
    for (int i = 0; i < 2; ++i) {
        samples.push_back({"n" + std::to_string(i), {}});
        s.samples.push_back({"n" + std::to_string(i), {{code("A01"), neg_scores[i]}}});
    }
    const GoldMatrix g = make_gold_matrix(std::move(samples), {code("A01")});
    const AucResult r = auc_scores(g, s);
    CHECK(r.micro == doctest::Approx(1.0));
    CHECK(r.macro == doctest::Approx(1.0));
    CHECK(r.skipped.empty());

    ScoreMatrix flat;
    for (const auto& [id, gold] : g.samples) flat.samples.push_back({id, {{code("A01"), 0.4}}});
    const AucResult tied = auc_scores(g, flat);
    CHECK(tied.micro == doctest::Approx(0.5));
    CHECK(tied.macro == doctest::Approx(0.5));
}

TEST_CASE("evalkit: degenerate labels are skipped in macro AUC") {
    std::vector<std::pair<std::string, std::set<CodeId>>> samples{
        {"s1", {code("A01"), code("B02")}},
        {"s2", {code("B02")}},
    };
    const GoldMatrix g = make_gold_matrix(std::move(samples), {code("A01"), code("B02")});
    ScoreMatrix s;
    s.samples = {{"s1", {{code("A01"), 0.9}}}, {"s2", {{code("A01"), 0.3}}}};
    const AucResult r = auc_scores(g, s);  // B02 is all-positive
    REQUIRE(r.skipped.size() == 1);
    CHECK(r.skipped[0] == code("B02"));
}

TEST_CASE("evalkit: worked P@K fixture — top-2 of four labels") {
    std::vector<std::pair<std::string, std::set<CodeId>>> samples{
        {"s1", {code("A01"), code("C03")}},
    };
    const GoldMatrix g = make_gold_matrix(
        std::move(samples), {code("A01"), code("B02"), code("C03"), code("D04")});
    ScoreMatrix s;
    s.samples = {{"s1",
                  {{code("A01"), 0.9}, {code("B02"), 0.8}, {code("C03"), 0.7}, {code("D04"), 0.1}}}};
    CHECK(precision_at_k(g, s, 2) == doctest::Approx(0.5));  // top-2 {A01,B02}, one hit
    // gold ⊇ top-k
    CHECK(precision_at_k(g, s, 1) == doctest::Approx(1.0));
    // k beyond the label space keeps the denominator at k
    CHECK(precision_at_k(g, s, 8) == doctest::Approx(2.0 / 8.0));
}

TEST_CASE("evalkit: alignment and validation errors") {
    ScoreMatrix bad_id;
    bad_id.samples = {{"sX", {}}, {"s2", {}}, {"s3", {}}};
    CHECK_THROWS_AS(f1_scores(gold2x3(), bad_id), Error);

    ScoreMatrix short_list;
    short_list.samples = {{"s1", {}}};
    CHECK_THROWS_AS(f1_scores(gold2x3(), short_list), Error);

    ScoreMatrix out_of_space = scores2x3();
    out_of_space.samples[0].scores[code("Z99")] = 0.5;
    CHECK_THROWS_AS(f1_scores(gold2x3(), out_of_space), Error);

    ScoreMatrix out_of_range = scores2x3();
    out_of_range.samples[0].scores[code("A01")] = 1.5;
    CHECK_THROWS_AS(f1_scores(gold2x3(), out_of_range), Error);

    const GoldMatrix empty_gold = make_gold_matrix({}, {code("A01")});
    ScoreMatrix none;
    CHECK_THROWS_AS(f1_scores(empty_gold, none), EmptyInputError);

    CHECK_THROWS_AS(precision_at_k(gold2x3(), scores2x3(), 0), Error);

    // gold outside the label space
    CHECK_THROWS_AS(make_gold_matrix({{"s1", {code("A01")}}}, {code("B02")}), Error);
}

TEST_CASE("evalkit: metrics match the brute-force oracles on random instances") {
    std::mt19937_64 rng(20240817);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    const char* label_pool[] = {"A01", "B02", "C03", "D04", "E05", "F06", "G07", "H08", "J09", "K10"};

    int checked = 0;
    for (int round = 0; round < 140; ++round) {
        const std::size_t n_labels = 2 + rng() % 9;   // up to 10 labels
        const std::size_t n_samples = 1 + rng() % 20;  // up to 20 samples
        std::vector<CodeId> labels;
        for (std::size_t l = 0; l < n_labels; ++l) labels.push_back(code(label_pool[l]));

        std::vector<std::pair<std::string, std::set<CodeId>>> gold_samples;
        ScoreMatrix s;
        for (std::size_t i = 0; i < n_samples; ++i) {
            std::set<CodeId> gold;
            ScoreSample sample;
            sample.id = "s" + std::to_string(i);
            for (const CodeId& l : labels) {
                if (rng() % 3 == 0) gold.insert(l);
                // quantized scores force plenty of ties; some scores missing
                if (rng() % 5 != 0) sample.scores[l] = std::round(uniform(0, 1) * 8.0) / 8.0;
            }
            gold_samples.push_back({sample.id, std::move(gold)});
            s.samples.push_back(std::move(sample));
        }
        const GoldMatrix g = make_gold_matrix(std::move(gold_samples), labels);
        const Instance in = to_instance(g, s);

        auto [micro, macro] = f1_scores(g, s);
        CHECK(micro == doctest::Approx(oracle_f1_micro(in, s.threshold)).epsilon(1e-9));
        CHECK(macro == doctest::Approx(oracle_f1_macro(in, s.threshold)).epsilon(1e-9));

        const AucResult auc = auc_scores(g, s);
        std::size_t skipped = 0;
        CHECK(auc.macro == doctest::Approx(oracle_auc_macro(in, &skipped)).epsilon(1e-9));
        CHECK(auc.micro == doctest::Approx(oracle_auc_micro(in)).epsilon(1e-9));
        CHECK(auc.skipped.size() == skipped);

        for (std::size_t k : {std::size_t(1), std::size_t(3), std::size_t(8), std::size_t(15)}) {
            CHECK(precision_at_k(g, s, k) == doctest::Approx(oracle_p_at_k(in, k)).epsilon(1e-9));
        }

        // per-label AUC equals the normalized Mann-Whitney statistic
        for (std::size_t l = 0; l < in.labels.size(); ++l) {
            std::vector<double> col;
            std::vector<int> gcol;
            for (std::size_t i = 0; i < in.gold.size(); ++i) {
                col.push_back(in.score[i][l]);
                gcol.push_back(in.gold[i][l]);
            }
            const long np = std::count(gcol.begin(), gcol.end(), 1);
            if (np == 0 || np == static_cast<long>(gcol.size())) continue;
            CHECK(oracle_pair_auc(col, gcol) ==
                  doctest::Approx(oracle_mann_whitney(col, gcol)).epsilon(1e-12));
        }

        // permutation invariances
        {
            // micro-F1 invariant under label permutation: relabel by reversing
            GoldMatrix rg = g;
            std::reverse(rg.label_space.begin(), rg.label_space.end());
            auto [rmicro, rmacro] = f1_scores(rg, s);
            CHECK(rmicro == doctest::Approx(micro).epsilon(1e-12));
            CHECK(rmacro == doctest::Approx(macro).epsilon(1e-12));

            // macro-F1 invariant under sample permutation
            GoldMatrix sg = g;
            ScoreMatrix ss = s;
            std::reverse(sg.samples.begin(), sg.samples.end());
            std::reverse(ss.samples.begin(), ss.samples.end());
            auto [pmicro, pmacro] = f1_scores(sg, ss);
            CHECK(pmacro == doctest::Approx(macro).epsilon(1e-12));
            CHECK(pmicro == doctest::Approx(micro).epsilon(1e-12));
        }

        // hit-count monotonicity: k1*P@k1 <= k2*P@k2 for k1 <= k2
        const double p3 = precision_at_k(g, s, 3);
        const double p8 = precision_at_k(g, s, 8);
        CHECK(3.0 * p3 <= 8.0 * p8 + 1e-12);

        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("evalkit: evaluate produces per-tier blocks and a stable report") {
    const GoldMatrix g = gold2x3();
    const ScoreMatrix s = scores2x3();
    std::map<CodeId, Tier> tiers{{code("A01"), Tier::head}, {code("B02"), Tier::ultra_tail}};

    const MetricReport report = evaluate(g, s, tiers, {8, 15});
    REQUIRE(report.p_at_k.count(8) == 1);
    REQUIRE(report.p_at_k.count(15) == 1);
    REQUIRE(report.per_tier.count(Tier::head) == 1);
    REQUIRE(report.per_tier.count(Tier::ultra_tail) == 1);
    CHECK(report.per_tier.at(Tier::head).labels == 1);

    // single-tier space: per-tier block equals the global block
    std::map<CodeId, Tier> flat{{code("A01"), Tier::tail}, {code("B02"), Tier::tail}};
    const MetricReport single = evaluate(g, s, flat, {8});
    CHECK(single.per_tier.at(Tier::tail).f1_micro == doctest::Approx(single.f1_micro));
    CHECK(single.per_tier.at(Tier::tail).f1_macro == doctest::Approx(single.f1_macro));
    CHECK(single.per_tier.at(Tier::tail).auc_micro == doctest::Approx(single.auc_micro));
    CHECK(single.per_tier.at(Tier::tail).auc_macro == doctest::Approx(single.auc_macro));

    // serialization is deterministic
    CHECK(report_to_json(report) == report_to_json(report));
    CHECK(report_to_json(report).find("\"8\"") != std::string::npos);

    // incomplete tier map
    std::map<CodeId, Tier> partial{{code("A01"), Tier::head}};
    CHECK_THROWS_WITH_AS(evaluate(g, s, partial, {8}), doctest::Contains("B02"), Error);
}

TEST_CASE("evalkit: gold and score jsonl loaders") {
    const auto gold = gold_from_jsonl(
        R"({"id":"s1","gold":["N18.23","I10"]})" "\n"
        R"({"id":"s2","gold":[]})" "\n");
    REQUIRE(gold.size() == 2);
    CHECK(gold[0].second.count(code("N18.23")) == 1);

    const auto scores = score_samples_from_jsonl(
        R"({"id":"s1","scores":{"N18.23":0.75,"I10":0.5}})" "\n"
        R"({"id":"s2","scores":{}})" "\n");
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].scores.at(code("N18.23")) == doctest::Approx(0.75));

    const GoldMatrix g = make_gold_matrix(gold, {code("N18.23"), code("I10")});
    const ScoreMatrix s = make_score_matrix(scores, g);
    CHECK(s.threshold == 0.5);

    CHECK_THROWS_AS(gold_from_jsonl("{\"id\":\"s1\"}\n"), ParseError);
    CHECK_THROWS_AS(score_samples_from_jsonl("{\"id\":\"s1\",\"scores\":{\"bad code\":1}}\n"),
                    ParseError);
}
