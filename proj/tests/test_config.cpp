#include <doctest.h>

#include "lta/config.hpp"
#include "lta/errors.hpp"

using namespace lta;

TEST_CASE("config: toml subset parsing") {
    const TomlTable t = TomlTable::parse(
        "# top comment\n"
        "seed = 42\n"
        "name = \"desk corpus\"  # trailing comment\n"
        "ratio = 0.5\n"
        "negative = -3\n"
        "flag = true\n"
        "\n"
        "[paths]\n"
        "taxonomy = \"data/tax.tsv\"\n"
        "escaped = \"tab\\there\"\n"
        "\n"
        "[evaluate]\n"
        "ks = [8, 15]\n");

    CHECK(t.get_int("seed") == 42);
    CHECK(t.get_string("name") == "desk corpus");
    CHECK(t.get_double("ratio") == doctest::Approx(0.5));
    CHECK(t.get_int("negative") == -3);
    CHECK(t.get_bool("flag") == true);
    CHECK(t.get_string("paths.taxonomy") == "data/tax.tsv");
    CHECK(t.get_string("paths.escaped") == "tab\there");
    CHECK(t.get_int_array("evaluate.ks") == std::vector<std::int64_t>{8, 15});
    CHECK(!t.has("missing"));
    CHECK(!t.get_string("missing").has_value());
    // integers coerce to double but not the reverse
    CHECK(t.get_double("seed") == 42.0);
    CHECK_THROWS_AS(t.get_int("ratio"), ConfigError);
    CHECK_THROWS_AS(t.get_string("seed"), ConfigError);
}

TEST_CASE("config: toml parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(TomlTable::parse("key value\n"), doctest::Contains("line 1"),
                         ConfigError);
    CHECK_THROWS_AS(TomlTable::parse("[unclosed\n"), ConfigError);
    CHECK_THROWS_AS(TomlTable::parse("s = \"unterminated\n"), ConfigError);
    CHECK_THROWS_AS(TomlTable::parse("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(TomlTable::parse("a = [1, \"mixed\"\n"), ConfigError);
    CHECK_THROWS_AS(TomlTable::parse("a = 12x\n"), ConfigError);
}

TEST_CASE("config: pipeline config maps sections onto stage settings") {
    const TomlTable t = TomlTable::parse(
        "seed = 7\n"
        "[paths]\n"
        "taxonomy = \"tax.tsv\"\n"
        "corpus = \"notes.jsonl\"\n"
        "out_dir = \"out\"\n"
        "[allocation]\n"
        "alpha = 0.25\n"
        "max_per_code = 20\n"
        "log_base = \"base10\"\n"
        "rounding = \"floor\"\n"
        "[prompt]\n"
        "max_excerpts = 1\n"
        "exclude_source = true\n"
        "[generation]\n"
        "backend = \"mock\"\n"
        "max_in_flight = 9\n"
        "min_alignment = 0.75\n"
        "[evaluate]\n"
        "ks = [5]\n"
        "macro_mode = \"gold_present\"\n");

    const PipelineConfig cfg = PipelineConfig::from_toml(t, "/base");
    CHECK(cfg.seed == 7);
    CHECK(cfg.taxonomy_path == std::filesystem::path("/base/tax.tsv"));
    CHECK(cfg.out_dir == std::filesystem::path("/base/out"));
    CHECK(cfg.allocation.alpha == doctest::Approx(0.25));
    CHECK(cfg.allocation.max_per_code == 20);
    CHECK(cfg.allocation.log_base == LogBase::base10);
    CHECK(cfg.allocation.rounding == Rounding::floor);
    CHECK(cfg.prompt.max_excerpts == 1);
    CHECK(cfg.prompt.exclude_source == true);
    CHECK(cfg.concurrency.max_in_flight == 9);
    CHECK(cfg.gate.min_alignment == doctest::Approx(0.75));
    CHECK(cfg.ks == std::vector<std::size_t>{5});
    CHECK(cfg.macro_mode == MacroMode::gold_present);
    CHECK(cfg.require_seed() == 7);
}

TEST_CASE("config: invalid settings are rejected") {
    CHECK_THROWS_AS(PipelineConfig::from_toml(
                        TomlTable::parse("[allocation]\nalpha = -0.5\n"), "/"),
                    ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_toml(
                        TomlTable::parse("[generation]\nbackend = \"carrier-pigeon\"\n"), "/"),
                    ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_toml(TomlTable::parse("seed = -1\n"), "/"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_toml(
                        TomlTable::parse("[evaluate]\nks = [0]\n"), "/"),
                    ConfigError);

    const PipelineConfig no_seed = PipelineConfig::from_toml(TomlTable::parse(""), "/");
    CHECK_THROWS_AS(no_seed.require_seed(), ConfigError);
}
