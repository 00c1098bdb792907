#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "klim/error.hpp"
#include "klim/path_bundle.hpp"

using namespace klim;

namespace {

PathBundle small_bundle() {
    PathBundle b(TimeGrid::from_nodes({1.0, 1.5, 2.25}), 2);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
            b.v_at(i, k) = 0.1 * static_cast<double>(i + 1) * static_cast<double>(k) + 1.0;
            b.x_at(i, k) = -0.5 * static_cast<double>(k);
        }
    }
    b.exploded[1] = 1;
    b.explosion_index[1] = 2;
    b.v_at(1, 2) = std::numeric_limits<double>::quiet_NaN();
    b.x_at(1, 2) = std::numeric_limits<double>::quiet_NaN();
    return b;
}

}  // namespace

TEST_CASE("shortest round-trip formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    const double x = 0.1 + 0.2;
    CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("CSV layout") {
    std::ostringstream out;
    write_csv(small_bundle(), out);
    const std::string csv = out.str();
    CHECK(csv.rfind("path_id,t,v,x,exploded\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.find("0,1.5,1.1,-0.5,0\n") != std::string::npos);
    CHECK(csv.find("1,2.25,nan,nan,1\n") != std::string::npos);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 7);
}

TEST_CASE("valid entries and columns skip exploded tails") {
    const auto b = small_bundle();
    CHECK(b.valid(1, 1));
    CHECK_FALSE(b.valid(1, 2));
    CHECK(b.v_column(2).size() == 1);
    CHECK(b.exploded_count() == 1);
    CHECK(b.exploded_fraction() == 0.5);
}

TEST_CASE("binary round trip") {
    const auto b = small_bundle();
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    write_binary(b, buf);
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 4) == "KLIM");
    CHECK(bytes.size() == 4 + 4 + 8 + 8 + 8 * 3 + 2 * 8 * 6 + 8 * 2);
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // version, little-endian
    const auto back = read_binary(buf);
    CHECK(back.n_paths == 2);
    CHECK(back.grid[2] == 2.25);
    CHECK(back.v_at(0, 2) == b.v_at(0, 2));
    CHECK(std::isnan(back.v_at(1, 2)));
    CHECK(back.explosion_index[1] == 2);
    CHECK(back.exploded[1] == 1);
    CHECK(back.explosion_index[0] == -1);

    std::stringstream junk("NOPE0000000000000000000000");
    CHECK_THROWS_AS(read_binary(junk), Error);
}
