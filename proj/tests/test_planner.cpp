#include <doctest.h>

#include <algorithm>

#include "lta/errors.hpp"
#include "lta/planner.hpp"

using namespace lta;

namespace {
CodeId code(const char* c) { return CodeId::parse(c); }
constexpr const char* kHeader = "code\tdescription\tsynonyms\tparent\n";
}  // namespace

TEST_CASE("planner: tier boundaries") {
    CHECK(stratify(0) == Tier::ultra_tail);
    CHECK(stratify(9) == Tier::ultra_tail);
    CHECK(stratify(10) == Tier::tail);
    CHECK(stratify(99) == Tier::tail);
    CHECK(stratify(100) == Tier::medium);
    CHECK(stratify(999) == Tier::medium);
    CHECK(stratify(1000) == Tier::head);
    CHECK(stratify(250000) == Tier::head);
}

TEST_CASE("planner: allocation formula matches the precomputed oracle") {
    const AllocationParams defaults;

    // zero-shot override
    CHECK(allocate(0, defaults) == 50);

    // ceil(25 / ln(15)) = ceil(9.23173...) = 10
    CHECK(allocate(10, defaults) == 10);
    // ceil(25 / ln(100)) = ceil(5.42868...) = 6
    CHECK(allocate(95, defaults) == 6);
    // more frozen oracle points (natural log, ceil)
    CHECK(allocate(1, defaults) == 14);   // 13.95277
    CHECK(allocate(2, defaults) == 13);   // 12.84746
    CHECK(allocate(5, defaults) == 11);   // 10.85736
    CHECK(allocate(9, defaults) == 10);   // 9.47308
    CHECK(allocate(50, defaults) == 7);   // 6.23856
    CHECK(allocate(99, defaults) == 6);   // 5.38284

    AllocationParams floored = defaults;
    floored.rounding = Rounding::floor;
    CHECK(allocate(10, floored) == 9);
    AllocationParams nearest = defaults;
    nearest.rounding = Rounding::nearest;
    CHECK(allocate(10, nearest) == 9);   // 9.23173 rounds down
    CHECK(allocate(9, nearest) == 9);    // 9.47308 rounds down
    CHECK(allocate(1, nearest) == 14);   // 13.95277 rounds up

    AllocationParams base10 = defaults;
    base10.log_base = LogBase::base10;
    CHECK(allocate(10, base10) == 22);   // ceil(25 / log10(15)) = ceil(21.25685)
    CHECK(allocate(0, base10) == 50);
}

TEST_CASE("planner: allocation is monotone and the clamp is redundant") {
    const AllocationParams defaults;
    int prev = allocate(0, defaults);
    for (std::uint32_t n = 1; n <= 10000; ++n) {
        const int cur = allocate(n, defaults);
        CHECK(cur <= prev);
        prev = cur;
    }

    for (LogBase base : {LogBase::natural, LogBase::base10}) {
        AllocationParams p;
        p.log_base = base;
        for (std::uint32_t n = 1; n <= 10000; ++n) {
            CHECK(allocation_raw(n, p) < p.max_per_code);
        }
    }
}

TEST_CASE("planner: allocation respects the cap for aggressive alpha") {
    AllocationParams p;
    p.alpha = 10.0;  // raw value far above the cap
    CHECK(allocate(1, p) == 50);
    CHECK(allocate(10000, p) <= 50);
    p.alpha = -1.0;
    CHECK_THROWS_AS(allocate(1, p), ConfigError);
    p.alpha = 0.5;
    p.max_per_code = 0;
    CHECK_THROWS_AS(allocate(1, p), ConfigError);
}

namespace {

Corpus corpus_with_freq(const std::vector<std::pair<const char*, int>>& freqs) {
    std::vector<Note> notes;
    int id = 0;
    for (const auto& [c, n] : freqs) {
        for (int i = 0; i < n; ++i) {
            Note note;
            note.id = "n" + std::to_string(id++);
            note.codes.insert(code(c));
            notes.push_back(std::move(note));
        }
    }
    return Corpus::build(std::move(notes));
}

}  // namespace

TEST_CASE("planner: build_plan assigns strategies by frequency") {
    const Taxonomy t = parse_taxonomy(std::string(kHeader) +
                                      "A01.1\ta\t\t\n"
                                      "A01.2\tb\t\t\n"
                                      "A01.3\tc\t\t\n"
                                      "A01.4\td\t\t\n");
    const Corpus c = corpus_with_freq({{"A01.1", 7}, {"A01.2", 500}, {"A01.3", 42}});

    const AllocationParams defaults;
    const AllocationPlan plan = build_plan(c, t, defaults);

    // A01.2 is medium so the default target set excludes it
    REQUIRE(plan.entries.size() == 3);
    auto find = [&](const char* cd) {
        auto it = std::find_if(plan.entries.begin(), plan.entries.end(),
                               [&](const PlanEntry& e) { return e.code == code(cd); });
        REQUIRE(it != plan.entries.end());
        return *it;
    };

    const PlanEntry few = find("A01.1");
    CHECK(few.tier == Tier::ultra_tail);
    CHECK(few.strategy == Strategy::clone);
    CHECK(few.n_synthetic == allocate(7, defaults));

    const PlanEntry zero = find("A01.4");
    CHECK(zero.tier == Tier::ultra_tail);
    CHECK(zero.strategy == Strategy::substitute);
    CHECK(zero.n_synthetic == 50);

    const PlanEntry tail = find("A01.3");
    CHECK(tail.tier == Tier::tail);
    CHECK(tail.strategy == Strategy::clone);

    for (const PlanEntry& e : plan.entries) CHECK(e.tier == stratify(e.n_real));
}

TEST_CASE("planner: explicit targets include medium codes with zero budget") {
    const Taxonomy t = parse_taxonomy(std::string(kHeader) + "A01.1\ta\t\t\nA01.2\tb\t\t\n");
    const Corpus c = corpus_with_freq({{"A01.2", 500}});

    std::set<CodeId> targets{code("A01.1"), code("A01.2")};
    const AllocationPlan plan = build_plan(c, t, {}, targets);
    REQUIRE(plan.entries.size() == 2);
    CHECK(plan.entries[1].strategy == Strategy::none);
    CHECK(plan.entries[1].tier == Tier::medium);
    CHECK(plan.entries[1].n_synthetic == 0);
    CHECK(plan.covered_codes() == 1);

    // unknown target -> error naming it
    std::set<CodeId> bad{code("Z99.9")};
    CHECK_THROWS_WITH_AS(build_plan(c, t, {}, bad),
                         doctest::Contains("Z99.9"), NotFoundError);
}

TEST_CASE("planner: plan serialization round-trips and is byte-stable") {
    const Taxonomy t = parse_taxonomy(std::string(kHeader) + "A01.1\ta\t\t\nA01.2\tb\t\t\n");
    const Corpus c = corpus_with_freq({{"A01.1", 3}});
    const AllocationPlan plan = build_plan(c, t, {});

    const std::string once = plan_to_json(plan);
    const std::string twice = plan_to_json(plan_from_json(once));
    CHECK(once == twice);
    CHECK(once.find("\"schema_version\": 1") != std::string::npos);

    CHECK_THROWS_AS(plan_from_json("{}"), SchemaError);
    CHECK_THROWS_AS(plan_from_json(R"({"schema_version": 99})"), SchemaError);
    CHECK_THROWS_AS(plan_from_json("not json"), ParseError);
}

TEST_CASE("planner: distribution counts codes per sample-count bin") {
    const Corpus real = corpus_with_freq({{"A01.1", 2}, {"A01.2", 5}});
    // extended: A01.1 stays at 2, A01.2 grows to 6, zero-shot Z90 appears 50 times
    std::vector<Note> synthetic;
    for (int i = 0; i < 50; ++i) {
        Note s;
        s.id = "z" + std::to_string(i);
        s.origin = Origin::synthetic;
        s.anchor = code("Z90");
        s.codes = {code("Z90")};
        if (i == 0) s.codes.insert(code("A01.2"));
        synthetic.push_back(std::move(s));
    }
    const Corpus extended = merge_corpus(real, synthetic);

    const auto rows = emit_distribution(real, extended, BinningSpec{64});
    auto row = [&](const std::string& bin, const std::string& scale) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const DistributionRow& r) {
            return r.bin == bin && r.scale == scale;
        });
        REQUIRE(it != rows.end());
        return *it;
    };

    CHECK(row("0", "linear").real_count == 1);       // Z90 had no real samples
    CHECK(row("0", "linear").extended_count == 0);
    CHECK(row("50", "linear").extended_count == 1);  // Z90 after augmentation
    CHECK(row("2", "linear").real_count == 1);
    CHECK(row("2", "linear").extended_count == 1);
    CHECK(row("5", "linear").real_count == 1);
    CHECK(row("6", "linear").extended_count == 1);

    CHECK(row("0", "log").real_count == 1);
    CHECK(row("32-63", "log").extended_count == 1);
    CHECK(row("2-3", "log").real_count == 1);
    CHECK(row("4-7", "log").real_count == 1);
    CHECK(row("4-7", "log").extended_count == 1);

    // identical corpora -> identical columns
    for (const auto& r : emit_distribution(real, real, BinningSpec{}))
        CHECK(r.real_count == r.extended_count);

    const std::string csv = distribution_to_csv(rows);
    CHECK(csv.rfind("# schema_version=1\nbin,real_count,extended_count,scale\n", 0) == 0);
}
