#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "slowfast/io.hpp"
#include "slowfast/rng.hpp"

using namespace slowfast;

TEST_CASE("config round-trips through emit and parse", "[io]") {
    Config c;
    c.model = "network";
    c.network.omegas = {-4.0, -3.4, 1.0 / 3.0};
    c.trials = 123456;
    c.seed = 42;
    c.mu_lo = -7.25;
    c.eps_list = {0.05, 0.1};
    c.rotator.alpha = kPi / 4;
    const Config back = parse_config_text(emit_config(c));
    REQUIRE(emit_config(back) == emit_config(c));
    REQUIRE(back.network.omegas == c.network.omegas);
    REQUIRE(back.trials == c.trials);
    REQUIRE(back.mu_lo == c.mu_lo);
    REQUIRE(back.rotator.alpha == c.rotator.alpha);
}

TEST_CASE("unknown keys and sections are rejected", "[io]") {
    REQUIRE_THROWS_AS(parse_config_text("[run]\nbogus = 3\n"), UsageError);
    REQUIRE_THROWS_AS(parse_config_text("[nope]\na = 3\n"), UsageError);
    REQUIRE_THROWS_AS(parse_config_text("[pitchfork]\nomega = 3\n"),
                      UsageError);
    REQUIRE_THROWS_AS(parse_config_text("just text\n"), UsageError);
    REQUIRE_THROWS_AS(parse_config_text("[pitchfork]\na = zebra\n"),
                      UsageError);
}

TEST_CASE("invalid parameter values fail validation", "[io]") {
    Config c = parse_config_text("[pitchfork]\na = -1\n");
    REQUIRE_THROWS_WITH(c.validate(), Catch::Matchers::ContainsSubstring(
                                          "a must be > 0"));
    Config c2 = parse_config_text("[run]\nmodel = volcano\n");
    REQUIRE_THROWS_AS(c2.validate(), UsageError);
}

TEST_CASE("comments and blank lines are tolerated", "[io]") {
    const Config c = parse_config_text(
        "# comment\n\n[rotator]\n; another\n  omega = -3.5  \n");
    REQUIRE(c.rotator.omega == -3.5);
}

TEST_CASE("csv round-trips at full precision", "[io]") {
    const auto path =
        std::filesystem::temp_directory_path() / "slowfast_io_test.csv";
    CsvTable t;
    t.header = {"a", "b", "c"};
    Philox rng(9, 0);
    for (int i = 0; i < 50; ++i)
        t.rows.push_back({rng.uniform(-1e8, 1e8), rng.next_double(),
                          rng.uniform(-1e-8, 1e-8)});
    write_csv(path, t, {"meta comment"});
    const CsvTable back = read_csv(path);
    REQUIRE(back.header == t.header);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < 3; ++j)
            REQUIRE(back.rows[i][j] == t.rows[i][j]);  // bit-exact at %.17g
    std::filesystem::remove(path);
}

TEST_CASE("file hash is stable and content-sensitive", "[io]") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto p1 = dir / "slowfast_hash_a.txt";
    const auto p2 = dir / "slowfast_hash_b.txt";
    {
        std::ofstream(p1) << "hello\n";
        std::ofstream(p2) << "hello\n";
    }
    REQUIRE(file_content_hash(p1) == file_content_hash(p2));
    {
        std::ofstream(p2) << "hello!\n";
    }
    REQUIRE(file_content_hash(p1) != file_content_hash(p2));
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}
