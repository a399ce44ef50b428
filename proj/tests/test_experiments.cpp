#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "slowfast/experiments.hpp"

using namespace slowfast;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    const auto p = fs::temp_directory_path() / "slowfast_experiments_test";
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("unknown presets are rejected before any I/O", "[experiments]") {
    REQUIRE_THROWS_AS(run_preset("fig9z", 1, scratch()), UnknownPreset);
    REQUIRE(preset_names().size() == 14);
}

TEST_CASE("fig1b emits the double-well potential table", "[experiments]") {
    const auto out = scratch();
    const RunRecord rec = run_preset("fig1b", 1, out);
    REQUIRE(rec.preset == "fig1b");
    const CsvTable t = read_csv(rec.data_path);
    REQUIRE(t.header == std::vector<std::string>{"mu", "f", "U"});

    // stationary structure: minima at mu = -2 and 4, maximum at mu = 1
    auto u_at = [&](double mu) {
        double best = 1e300, val = 0;
        for (const auto& r : t.rows)
            if (std::abs(r[0] - mu) < best) {
                best = std::abs(r[0] - mu);
                val = r[2];
            }
        return val;
    };
    REQUIRE(u_at(-2.0) < u_at(-3.0));
    REQUIRE(u_at(-2.0) < u_at(0.0));
    REQUIRE(u_at(4.0) < u_at(2.0));
    REQUIRE(u_at(4.0) < u_at(6.0));
    REQUIRE(u_at(1.0) > u_at(0.0));
    REQUIRE(u_at(1.0) > u_at(2.0));
}

TEST_CASE("identical (preset, seed) runs hash identically", "[experiments]") {
    const auto out_a = scratch() / "a";
    const auto out_b = scratch() / "b";
    const RunRecord ra = run_preset("fig2b", 3, out_a);
    const RunRecord rb = run_preset("fig2b", 3, out_b);
    REQUIRE(ra.content_hash == rb.content_hash);

    const DiffReport rep =
        diff_runs(out_a / "fig2b" / "3", out_b / "fig2b" / "3");
    REQUIRE(rep.identical);
    REQUIRE(rep.max_abs_diff == 0.0);
    REQUIRE(rep.rows > 0);
}

TEST_CASE("diff refuses mismatched presets", "[experiments]") {
    const auto out = scratch();
    run_preset("fig1b", 5, out);
    run_preset("fig1d", 5, out);
    REQUIRE_THROWS_AS(
        diff_runs(out / "fig1b" / "5", out / "fig1d" / "5", 0.0),
        SchemaMismatch);
}

TEST_CASE("json output round-trips through diff", "[experiments]") {
    const auto out = scratch() / "json";
    RunOptions opt;
    opt.format = "json";
    run_preset("fig1b", 2, out, opt);
    const DiffReport rep =
        diff_runs(out / "fig1b" / "2", out / "fig1b" / "2");
    REQUIRE(rep.identical);
    REQUIRE(rep.cols == 3);
}

TEST_CASE("meta records the run parameters and conventions", "[experiments]") {
    const auto out = scratch() / "meta";
    const RunRecord rec = run_preset("fig2b", 1, out);
    std::ifstream is(rec.meta_path);
    nlohmann::json m;
    is >> m;
    REQUIRE(m.at("preset") == "fig2b");
    REQUIRE(m.at("seed") == 1);
    REQUIRE(m.at("scale") == "desk");
    REQUIRE(m.contains("conventions"));
    REQUIRE(m.at("content_hash").get<std::uint64_t>() == rec.content_hash);
}
