#include <doctest.h>

#include "lta/code_id.hpp"
#include "lta/errors.hpp"

using namespace lta;

TEST_CASE("code_id: normalization and display") {
    CodeId n = CodeId::parse("n18.23");
    CHECK(n.norm() == "N1823");
    CHECK(n.display() == "N18.23");

    CodeId undotted = CodeId::parse("N1823");
    CHECK(undotted == n);
    CHECK(undotted.display() == "N18.23");

    CHECK(CodeId::parse("428.0").norm() == "4280");
    CHECK(CodeId::parse("4280").display() == "428.0");
    CHECK(CodeId::parse("I10").display() == "I10");  // category roots stay undotted
}

TEST_CASE("code_id: normalization is idempotent") {
    for (const char* raw : {"N18.23", "n1823", "J96.11", "428.0", "E800.1", "V85", "I10"}) {
        CodeId once = CodeId::parse(raw);
        CodeId twice = CodeId::parse(once.norm());
        CHECK(once == twice);
        CHECK(CodeId::parse(once.display()) == once);
        // display(normalize(x)) reproduces the dotted input form
        CHECK(CodeId::parse(raw).display() == CodeId::parse(CodeId::parse(raw).display()).display());
    }
}

TEST_CASE("code_id: accepted and rejected shapes") {
    CHECK_NOTHROW(CodeId::parse("A00"));
    CHECK_NOTHROW(CodeId::parse("Z99.999"));   // 7-char ICD-10-like
    CHECK_NOTHROW(CodeId::parse("V85.44"));    // V-prefixed ICD-9 shape
    CHECK_NOTHROW(CodeId::parse("E800.1"));    // E-prefixed ICD-9 shape
    CHECK_NOTHROW(CodeId::parse("001"));
    CHECK_NOTHROW(CodeId::parse("99912"));

    CHECK_THROWS_AS(CodeId::parse(""), InvalidCodeError);
    CHECK_THROWS_AS(CodeId::parse("  "), InvalidCodeError);
    CHECK_THROWS_AS(CodeId::parse("N1"), InvalidCodeError);        // too short
    CHECK_THROWS_AS(CodeId::parse("N1234567"), InvalidCodeError);  // too long
    CHECK_THROWS_AS(CodeId::parse("12"), InvalidCodeError);
    CHECK_THROWS_AS(CodeId::parse("123456"), InvalidCodeError);    // 6-digit numeric
    CHECK_THROWS_AS(CodeId::parse("N18.2.3"), InvalidCodeError);   // two dots
    CHECK_THROWS_AS(CodeId::parse("N1.823"), InvalidCodeError);    // misplaced dot
    CHECK_THROWS_AS(CodeId::parse("N18."), InvalidCodeError);      // terminal dot
    CHECK_THROWS_AS(CodeId::parse("-N18"), InvalidCodeError);
}

TEST_CASE("code_id: chapters") {
    CHECK(chapter_of_code(CodeId::parse("J96.11")) == "J");
    CHECK(chapter_of_code(CodeId::parse("I50.23")) == "I");
    CHECK(chapter_of_code(CodeId::parse("428.0")) == "390-459");
    CHECK(chapter_of_code(CodeId::parse("001")) == "001-139");
    CHECK(chapter_of_code(CodeId::parse("800.1")) == "800-999");
    CHECK(chapter_of_code(CodeId::parse("V85")) == "V");
    CHECK(chapter_of_code(CodeId::parse("E800.1")) == "E");
}

TEST_CASE("code_id: derived parents") {
    CHECK(derived_parent(CodeId::parse("N18.23"))->display() == "N18.2");
    CHECK(derived_parent(CodeId::parse("N18.2"))->display() == "N18");
    CHECK(!derived_parent(CodeId::parse("N18")).has_value());
    CHECK(derived_parent(CodeId::parse("428.0"))->display() == "428");
    CHECK(!derived_parent(CodeId::parse("428")).has_value());
}
