#include "catch_amalgamated.hpp"

#include "effumap/datagen.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace effumap;

TEST_CASE("gen_ring radii lie in the annulus") {
    auto data = gen_ring(1000, 4.0, 0.25, 3);
    REQUIRE(data.size() == 1000);
    REQUIRE(data.dim() == 2);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = std::hypot(data.points(i, 0), data.points(i, 1));
        REQUIRE(r >= 3.75 - 1e-12);
        REQUIRE(r <= 4.25 + 1e-12);
    }
}

TEST_CASE("gen_ring samples uniformly by area") {
    // Under area-uniform sampling, P(r < r_mid) = (r_mid^2 - r_in^2) / (r_out^2 - r_in^2) = 0.46875
    // for the annulus [3.75, 4.25]; uniform-in-radius sampling would give 0.5.
    auto data = gen_ring(20000, 4.0, 0.25, 1);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        inside += std::hypot(data.points(i, 0), data.points(i, 1)) < 4.0;
    }
    const double frac = static_cast<double>(inside) / 20000.0;
    const double se = std::sqrt(0.46875 * 0.53125 / 20000.0);
    REQUIRE(std::abs(frac - 0.46875) < 4 * se);
}

TEST_CASE("gen_ring with zero width puts points on the circle") {
    auto data = gen_ring(2, 1.0, 0.0, 42);
    for (std::size_t i = 0; i < 2; ++i) {
        REQUIRE(std::hypot(data.points(i, 0), data.points(i, 1)) == Catch::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("gen_ring is a pure function of its arguments") {
    REQUIRE(gen_ring(100, 4.0, 0.25, 9).points == gen_ring(100, 4.0, 0.25, 9).points);
    REQUIRE(gen_ring(100, 4.0, 0.25, 9).points != gen_ring(100, 4.0, 0.25, 10).points);
}

TEST_CASE("gen_ring rejects invalid geometry") {
    REQUIRE_THROWS_AS(gen_ring(10, 1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(gen_ring(10, 1.0, -0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(gen_ring(1), std::invalid_argument);
}

TEST_CASE("gen_uniform_square stays in the unit square with mean near 1/2") {
    auto data = gen_uniform_square(1000, 0);
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        REQUIRE(data.points(i, 0) >= 0);
        REQUIRE(data.points(i, 0) <= 1);
        REQUIRE(data.points(i, 1) >= 0);
        REQUIRE(data.points(i, 1) <= 1);
        sx += data.points(i, 0);
        sy += data.points(i, 1);
    }
    REQUIRE(std::abs(sx / 1000 - 0.5) < 0.05);
    REQUIRE(std::abs(sy / 1000 - 0.5) < 0.05);
    REQUIRE(gen_uniform_square(1000, 0).points == data.points);
}

TEST_CASE("CSV round trip is exact") {
    Dataset data{ Matrix(3, 2) };
    data.points.data() = { 0.1, -2.5, 1.0 / 3.0, 1e-300, 123456789.123456789, -0.0 };
    std::stringstream buffer;
    write_csv(data.points, buffer);
    auto back = read_csv(buffer);
    REQUIRE(back.points == data.points);

    const auto path = (std::filesystem::temp_directory_path() / "effumap_roundtrip.csv").string();
    save_csv(data, path);
    REQUIRE(load_csv(path).points == data.points);
    std::filesystem::remove(path);
}

TEST_CASE("CSV header is detected") {
    std::stringstream in("x,y\n1,2\n3,4\n");
    auto data = read_csv(in);
    REQUIRE(data.size() == 2);
    REQUIRE(data.points(1, 1) == 4);
}

TEST_CASE("CSV errors name the problem") {
    SECTION("duplicate rows") {
        std::stringstream in("1,2\n3,4\n1,2\n");
        REQUIRE_THROWS_WITH(read_csv(in), Catch::Matchers::ContainsSubstring("rows 1 and 3"));
    }
    SECTION("single row") {
        std::stringstream in("1,2\n");
        REQUIRE_THROWS_WITH(read_csv(in), Catch::Matchers::ContainsSubstring("need at least 2"));
    }
    SECTION("ragged row") {
        std::stringstream in("1,2\n3,4,5\n");
        REQUIRE_THROWS_WITH(read_csv(in), Catch::Matchers::ContainsSubstring("line 2"));
    }
    SECTION("non-numeric cell after the header") {
        std::stringstream in("a,b\n1,2\n3,x\n");
        REQUIRE_THROWS_WITH(read_csv(in), Catch::Matchers::ContainsSubstring("line 3"));
    }
}
