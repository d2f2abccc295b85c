#include "lta/planner.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lta/errors.hpp"

namespace lta {

using nlohmann::json;

std::string_view to_string(Tier t) {
    switch (t) {
        case Tier::head: return "head";
        case Tier::medium: return "medium";
        case Tier::tail: return "tail";
        case Tier::ultra_tail: return "ultra_tail";
    }
    return "ultra_tail";
}

Tier tier_from_string(std::string_view s) {
    if (s == "head") return Tier::head;
    if (s == "medium") return Tier::medium;
    if (s == "tail") return Tier::tail;
    if (s == "ultra_tail") return Tier::ultra_tail;
    throw SchemaError("unknown tier '" + std::string(s) + "'");
}

Tier stratify(std::uint32_t n_real) {
    if (n_real >= 1000) return Tier::head;
    if (n_real >= 100) return Tier::medium;
    if (n_real >= 10) return Tier::tail;
    return Tier::ultra_tail;
}

std::string_view to_string(LogBase b) { return b == LogBase::natural ? "natural" : "base10"; }

LogBase log_base_from_string(std::string_view s) {
    if (s == "natural") return LogBase::natural;
    if (s == "base10") return LogBase::base10;
    throw SchemaError("unknown log base '" + std::string(s) + "' (expected natural|base10)");
}

std::string_view to_string(Rounding r) {
    switch (r) {
        case Rounding::ceil: return "ceil";
        case Rounding::floor: return "floor";
        case Rounding::nearest: return "nearest";
    }
    return "ceil";
}

Rounding rounding_from_string(std::string_view s) {
    if (s == "ceil") return Rounding::ceil;
    if (s == "floor") return Rounding::floor;
    if (s == "nearest") return Rounding::nearest;
    throw SchemaError("unknown rounding '" + std::string(s) + "' (expected ceil|floor|nearest)");
}

void AllocationParams::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("allocation alpha must be > 0");
    if (max_per_code < 1) throw ConfigError("allocation max_per_code must be >= 1");
}

double allocation_raw(std::uint32_t n_real, const AllocationParams& p) {
    const double shifted = static_cast<double>(n_real) + 5.0;
    const double lg = p.log_base == LogBase::natural ? std::log(shifted) : std::log10(shifted);
    return p.alpha * static_cast<double>(p.max_per_code) / lg;
}

int allocate(std::uint32_t n_real, const AllocationParams& p) {
    p.validate();
    if (n_real == 0) return p.max_per_code;  // zero-shot codes get the maximum
    const double clamped = std::min(allocation_raw(n_real, p), static_cast<double>(p.max_per_code));
    double rounded = 0.0;
    switch (p.rounding) {
        case Rounding::ceil: rounded = std::ceil(clamped); break;
        case Rounding::floor: rounded = std::floor(clamped); break;
        case Rounding::nearest: rounded = std::floor(clamped + 0.5); break;
    }
    return static_cast<int>(rounded);
}

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::clone: return "clone";
        case Strategy::substitute: return "substitute";
        case Strategy::none: return "none";
    }
    return "none";
}

Strategy strategy_from_string(std::string_view s) {
    if (s == "clone") return Strategy::clone;
    if (s == "substitute") return Strategy::substitute;
    if (s == "none") return Strategy::none;
    throw SchemaError("unknown strategy '" + std::string(s) + "'");
}

std::size_t AllocationPlan::covered_codes() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const PlanEntry& e) { return e.n_synthetic > 0; }));
}

std::int64_t AllocationPlan::total_notes() const {
    std::int64_t sum = 0;
    for (const PlanEntry& e : entries) sum += e.n_synthetic;
    return sum;
}

AllocationPlan build_plan(const Corpus& corpus, const Taxonomy& taxonomy,
                          const AllocationParams& params,
                          const std::optional<std::set<CodeId>>& target_codes) {
    params.validate();

    std::set<CodeId> targets;
    if (target_codes) {
        std::vector<std::string> unknown;
        for (const CodeId& c : *target_codes)
            if (!taxonomy.contains(c) && corpus.freq(c) == 0) unknown.push_back(c.display());
        if (!unknown.empty()) {
            std::string msg = "target codes absent from both corpus and taxonomy:";
            for (const auto& u : unknown) msg += " " + u;
            throw NotFoundError(msg);
        }
        targets = *target_codes;
    } else {
        for (const auto& [code, card] : taxonomy.cards())
            if (corpus.freq(code) < 100) targets.insert(code);
    }

    AllocationPlan plan;
    plan.params = params;
    plan.entries.reserve(targets.size());
    for (const CodeId& code : targets) {
        PlanEntry e;
        e.code = code;
        e.n_real = corpus.freq(code);
        e.tier = stratify(e.n_real);
        if (e.n_real >= 100) {
            e.strategy = Strategy::none;
            e.n_synthetic = 0;
        } else {
            e.strategy = e.n_real == 0 ? Strategy::substitute : Strategy::clone;
            e.n_synthetic = allocate(e.n_real, params);
        }
        plan.entries.push_back(std::move(e));
    }
    return plan;  // std::set iteration keeps entries sorted by code
}

std::string plan_to_json(const AllocationPlan& plan) {
    json entries = json::array();
    for (const PlanEntry& e : plan.entries) {
        entries.push_back({{"code", e.code.display()},
                           {"tier", std::string(to_string(e.tier))},
                           {"n_real", e.n_real},
                           {"n_synthetic", e.n_synthetic},
                           {"strategy", std::string(to_string(e.strategy))}});
    }
    json doc{{"schema_version", 1},
             {"params",
              {{"alpha", plan.params.alpha},
               {"max_per_code", plan.params.max_per_code},
               {"log_base", std::string(to_string(plan.params.log_base))},
               {"rounding", std::string(to_string(plan.params.rounding))}}},
             {"entries", std::move(entries)},
             {"totals", {{"codes", plan.covered_codes()}, {"notes", plan.total_notes()}}}};
    return doc.dump(2) + "\n";
}

AllocationPlan plan_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid plan JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("schema_version"))
        throw SchemaError("plan file lacks a schema_version field");
    if (doc["schema_version"].get<int>() != 1)
        throw SchemaError("unsupported plan schema_version " + doc["schema_version"].dump());

    AllocationPlan plan;
    try {
        const auto& p = doc.at("params");
        plan.params.alpha = p.at("alpha").get<double>();
        plan.params.max_per_code = p.at("max_per_code").get<int>();
        plan.params.log_base = log_base_from_string(p.at("log_base").get<std::string>());
        plan.params.rounding = rounding_from_string(p.at("rounding").get<std::string>());
        for (const auto& obj : doc.at("entries")) {
            PlanEntry e;
            e.code = CodeId::parse(obj.at("code").get<std::string>());
            e.tier = tier_from_string(obj.at("tier").get<std::string>());
            e.n_real = obj.at("n_real").get<std::uint32_t>();
            e.n_synthetic = obj.at("n_synthetic").get<int>();
            e.strategy = strategy_from_string(obj.at("strategy").get<std::string>());
            plan.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad plan structure: ") + e.what());
    }
    std::sort(plan.entries.begin(), plan.entries.end(),
              [](const PlanEntry& a, const PlanEntry& b) { return a.code < b.code; });
    return plan;
}

namespace {

std::uint32_t count_or_zero(const Corpus& c, const CodeId& code) { return c.freq(code); }

std::string log_bin_label(std::uint32_t bucket) {
    // bucket 0 -> "0"; bucket i >= 1 covers [2^(i-1), 2^i - 1]
    if (bucket == 0) return "0";
    const std::uint64_t lo = 1ull << (bucket - 1);
    const std::uint64_t hi = (1ull << bucket) - 1;
    if (lo == hi) return std::to_string(lo);
    return std::to_string(lo) + "-" + std::to_string(hi);
}

std::uint32_t log_bucket(std::uint32_t v) {
    if (v == 0) return 0;
    std::uint32_t b = 1;
    while ((1ull << b) <= v) ++b;
    return b;  // v in [2^(b-1), 2^b - 1]
}

}  // namespace

std::vector<DistributionRow> emit_distribution(const Corpus& real, const Corpus& extended,
                                               const BinningSpec& bins) {
    std::set<CodeId> universe;
    for (const auto& [code, n] : real.freq_index()) universe.insert(code);
    for (const auto& [code, n] : extended.freq_index()) universe.insert(code);

    std::uint32_t max_count = 0;
    for (const CodeId& c : universe)
        max_count = std::max({max_count, count_or_zero(real, c), count_or_zero(extended, c)});

    std::vector<DistributionRow> rows;

    // Linear bins: one per count in [0, cap), then a single overflow bin.
    const std::uint32_t cap = std::max<std::uint32_t>(bins.linear_cap, 1);
    const std::uint32_t linear_top = std::min(max_count, cap - 1);
    std::vector<std::uint32_t> lin_real(linear_top + 2, 0), lin_ext(linear_top + 2, 0);
    for (const CodeId& c : universe) {
        auto slot = [&](std::uint32_t v) { return v < cap ? std::min(v, linear_top) : linear_top + 1; };
        lin_real[slot(count_or_zero(real, c))] += 1;
        lin_ext[slot(count_or_zero(extended, c))] += 1;
    }
    for (std::uint32_t v = 0; v <= linear_top; ++v)
        rows.push_back({std::to_string(v), lin_real[v], lin_ext[v], "linear"});
    if (max_count >= cap)
        rows.push_back({std::to_string(cap) + "+", lin_real[linear_top + 1], lin_ext[linear_top + 1], "linear"});

    // Log bins: "0", then power-of-two ranges up to the observed maximum.
    const std::uint32_t top_bucket = log_bucket(std::max<std::uint32_t>(max_count, 1));
    std::vector<std::uint32_t> log_real(top_bucket + 1, 0), log_ext(top_bucket + 1, 0);
    for (const CodeId& c : universe) {
        log_real[log_bucket(count_or_zero(real, c))] += 1;
        log_ext[log_bucket(count_or_zero(extended, c))] += 1;
    }
    for (std::uint32_t b = 0; b <= top_bucket; ++b)
        rows.push_back({log_bin_label(b), log_real[b], log_ext[b], "log"});

    return rows;
}

std::string distribution_to_csv(const std::vector<DistributionRow>& rows) {
    std::string out = "# schema_version=1\nbin,real_count,extended_count,scale\n";
    for (const DistributionRow& r : rows) {
        out += r.bin;
        out += ',';
        out += std::to_string(r.real_count);
        out += ',';
        out += std::to_string(r.extended_count);
        out += ',';
        out += r.scale;
        out += '\n';
    }
    return out;
}

}  // namespace lta
