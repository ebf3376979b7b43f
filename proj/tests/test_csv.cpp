#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bargainlab/csv.hpp"
#include "bargainlab/errors.hpp"

using namespace bargainlab;
namespace fs = std::filesystem;

namespace {
fs::path tmp_dir() {
    const auto p = fs::path("bargainlab_test_tmp");
    fs::create_directories(p);
    return p;
}
} // namespace

TEST_CASE("table write-read roundtrip preserves fields and missing cells") {
    csv::Table t;
    t.header = {"a", "b", "c"};
    t.rows = {{"1", "", "x"}, {"2.5", "-3e-4", ""}};
    const auto path = (tmp_dir() / "roundtrip.csv").string();
    csv::write_csv(path, t);
    const auto back = csv::read_csv(path);
    CHECK(back.header == t.header);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0] == t.rows[0]);
    CHECK(back.rows[1] == t.rows[1]);
    CHECK(back.column("b") == 1);
    CHECK(back.column("missing") == -1);
}

TEST_CASE("rows with the wrong field count are rejected with a line number") {
    const auto path = (tmp_dir() / "ragged.csv").string();
    std::ofstream(path) << "a,b\n1,2\n3\n";
    try {
        csv::read_csv(path);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
}

TEST_CASE("double formatting round-trips through parsing") {
    for (double v : {1.0, -0.1, 3.141592653589793, 1e-17, 98.0 / 7.0}) {
        const auto s = csv::format_double(v);
        CHECK(*csv::parse_double(s) == v);
    }
    CHECK(!csv::parse_double("").has_value());
    CHECK_THROWS_AS(csv::parse_double("12x"), ValidationError);
    CHECK_THROWS_AS(csv::parse_double_strict("", "field"), ValidationError);
}

TEST_CASE("missing file raises an io error") {
    CHECK_THROWS_AS(csv::read_csv("no/such/file.csv"), IoError);
}
