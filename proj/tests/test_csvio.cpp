#include <cstdio>
#include <sstream>

#include "doctest.h"
#include "floc/csvio.hpp"
#include "floc/errors.hpp"

using namespace floc;

TEST_SUITE("csvio") {

TEST_CASE("reads the long format") {
    std::istringstream in("subject,t,y\n1,0.25,1.5\n1,0.75,2.5\n2,0.5,-3\n");
    const auto rows = read_long_csv(in);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].subject == 1);
    CHECK(rows[0].t == 0.25);
    CHECK(rows[0].y == 1.5);
    CHECK(rows[2].subject == 2);
    CHECK(rows[2].y == -3.0);
}

TEST_CASE("tolerates a UTF-8 BOM and blank lines") {
    std::istringstream in("\xEF\xBB\xBFsubject,t,y\n\n1,0.5,1\n\n");
    const auto rows = read_long_csv(in);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].t == 0.5);
}

TEST_CASE("rejects a wrong header") {
    std::istringstream in("t,y,subject\n1,0.5,1\n");
    CHECK_THROWS_AS(read_long_csv(in), ParseError);
}

TEST_CASE("reports the 1-based line of a malformed row") {
    // header is line 1; the sixth data row sits on line 7
    std::istringstream in(
        "subject,t,y\n"
        "1,0.1,1\n1,0.2,2\n1,0.3,3\n1,0.4,4\n1,0.5,5\n"
        "1,0.6,abc\n");
    try {
        read_long_csv(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 7);
        CHECK(std::string(e.what()).find("line 7") != std::string::npos);
    }
}

TEST_CASE("rejects short and long rows with the offending line") {
    std::istringstream shorter("subject,t,y\n1,0.5\n");
    CHECK_THROWS_AS(read_long_csv(shorter), ParseError);
    std::istringstream longer("subject,t,y\n1,0.5,1,9\n");
    CHECK_THROWS_AS(read_long_csv(longer), ParseError);
}

TEST_CASE("header-only input is empty input") {
    std::istringstream in("subject,t,y\n");
    CHECK_THROWS_AS(read_long_csv(in), EmptyInput);
}

TEST_CASE("missing file raises a config error") {
    CHECK_THROWS_AS(read_long_csv_file("/nonexistent/nope.csv"), ConfigError);
}

TEST_CASE("fmt17 round-trips doubles bit-exactly") {
    const double values[] = {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 3.14159265358979,
                             0.0, 1e17 + 1.0};
    for (double v : values) {
        const std::string s = fmt17(v);
        double back = 0.0;
        CHECK(std::sscanf(s.c_str(), "%lf", &back) == 1);
        CHECK(back == v);
    }
}

TEST_CASE("write-read cycle through a stream preserves values") {
    std::ostringstream out;
    out << "subject,t,y\n";
    const double ts[] = {1.0 / 3.0, 0.123456789012345678, 0.75};
    const double ys[] = {-1.0 / 7.0, 2.5e-13, 3.0};
    for (int i = 0; i < 3; ++i)
        out << (i + 1) << ',' << fmt17(ts[i]) << ',' << fmt17(ys[i]) << '\n';
    std::istringstream in(out.str());
    const auto rows = read_long_csv(in);
    REQUIRE(rows.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(rows[static_cast<std::size_t>(i)].t == ts[i]);
        CHECK(rows[static_cast<std::size_t>(i)].y == ys[i]);
    }
}

}  // TEST_SUITE
