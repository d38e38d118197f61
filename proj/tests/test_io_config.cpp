#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>

#include "fcont/config.hpp"
#include "fcont/io.hpp"
#include "support.hpp"

using namespace fcont;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("fcont_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("doubles round-trip through 17 digits") {
    for (double v : testing::uniform_samples(200, -1e6, 1e6, 1)) CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    CHECK(std::strtod(format_double(0.1).c_str(), nullptr) == 0.1);
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(number(std::numeric_limits<double>::quiet_NaN()) == json("nan"));
    CHECK(number(2.5) == json(2.5));
}

TEST_CASE("atomic writes leave no temporary files") {
    const auto dir = scratch("atomic");
    write_atomic(dir / "a.txt", "first");
    write_atomic(dir / "a.txt", "second");
    CHECK(read_file(dir / "a.txt") == "second");
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
    CHECK(n == 1);
    CHECK_THROWS(read_file(dir / "missing.txt"));
}

TEST_CASE("ensemble container round-trip") {
    const auto dir = scratch("ensemble");
    const auto ens = simulate_brownian(linspace(0.0, 1.0, 17), 13, 99);
    write_ensemble(dir / "ensemble.bin", ens);
    CHECK(fs::exists(dir / "ensemble.meta.json"));
    const auto back = read_ensemble(dir / "ensemble.bin");
    CHECK(back.realizations() == 13);
    CHECK(back.points() == 17);
    CHECK(back.values() == ens.values());
    CHECK(back.generator().seed == 99);
    // header layout: magic, version, rows, cols
    const auto raw = read_file(dir / "ensemble.bin");
    CHECK(raw.substr(0, 4) == "MCEN");
    CHECK(raw.size() == 4 + 4 + 8 + 8 + 13 * 17 * 8);
    const auto meta = json::parse(read_file(dir / "ensemble.meta.json"));
    CHECK(meta["rows"] == 13);
    CHECK(meta["cols"] == 17);
    // truncated payload is rejected
    write_atomic(dir / "bad.bin", raw.substr(0, raw.size() - 8));
    fs::copy_file(dir / "ensemble.meta.json", dir / "bad.meta.json");
    CHECK_THROWS(read_ensemble(dir / "bad.bin"));

    const auto csv = ensemble_to_csv(testing::ensemble_from_rows({{1.0, 2.0}, {3.0, 4.0}}));
    CHECK(csv == "realization,point,value\n0,0,1\n0,1,2\n1,0,3\n1,1,4\n");
}

TEST_CASE("space and measure serialization") {
    const auto ext = extended_integer_space(6);
    const auto m = DiscreteMeasure({0.1, 0.1, 0.2, 0.2, 0.2, 0.1, 0.1});
    const auto doc = space_to_json(ext, &m);
    const auto back = space_from_json(doc);
    REQUIRE(back.size() == ext.size());
    for (std::size_t i = 0; i < ext.size(); ++i)
        for (std::size_t j = 0; j < ext.size(); ++j) CHECK(back(i, j) == ext(i, j));
    CHECK(measure_from_json(doc).weights() == m.weights());
    auto extra = doc;
    extra["colour"] = "blue";
    CHECK_THROWS_AS(space_from_json(extra), InvalidInput);

    const auto from_csv = space_from_csv(space_to_csv(ext));
    REQUIRE(from_csv.size() == ext.size());
    for (std::size_t i = 0; i < ext.size(); ++i)
        for (std::size_t j = 0; j < ext.size(); ++j) CHECK(from_csv(i, j) == ext(i, j));
    CHECK(from_csv.labels() == ext.labels());
}

TEST_CASE("tables") {
    const KnotFunction g({{0.0, 0.0}, {0.5, 1.25}});
    CHECK(knots_to_csv(g, "delta", "g") == "delta,g\n0,0\n0.5,1.25\n");
    const std::vector<double> tau{0.5, 2.0}, tau0{0.25, 1.0};
    CHECK(tau_samples_to_csv(tau, tau0) == "realization,tau,tau0\n0,0.5,0.25\n1,2,1\n");
    const std::vector<BoundRow> rows{{0.125, 0.5, 1.0}};
    CHECK(bounds_to_csv(rows) == "delta,empirical,bound\n0.125,0.5,1\n");
    CHECK(knots_to_json(g).size() == 2);
}

TEST_CASE("config parsing") {
    const auto def = parse_config(json::object());
    CHECK(def.generator.family == "brownian");
    CHECK(def.generator.points == 2049);
    CHECK(def.generator.t_max == doctest::Approx(std::exp(-1.0)));
    CHECK(def.pipelines.factorize);
    // the echo parses back to the same document
    CHECK(to_json(parse_config(to_json(def))) == to_json(def));

    const auto cfg = parse_config(json::parse(R"({"generator": {"family": "fbm", "hurst": 0.3, "seed": 5},
                                                   "norm": {"kind": "gls", "psi": {"family": "degenerate", "param": 3}},
                                                   "pipelines": ["rectangle", "heavy-tail"]})"));
    CHECK(cfg.generator.hurst == 0.3);
    CHECK(cfg.generator.seed == 5);
    CHECK(cfg.norm.kind == "gls");
    CHECK_FALSE(cfg.pipelines.factorize);
    CHECK(cfg.pipelines.rectangle);
    CHECK(cfg.pipelines.heavy_tail);

    auto error_path = [](const char* text) -> std::string {
        try {
            parse_config(json::parse(text));
        } catch (const ConfigError& e) {
            return e.path();
        }
        return "<no error>";
    };
    CHECK(error_path(R"({"generator": {"famly": "brownian"}})") == "generator.famly");
    CHECK(error_path(R"({"generator": {"family": "poisson"}})") == "generator.family");
    CHECK(error_path(R"({"norm": {"orlicz": {"family": "bessel"}}})") == "norm.orlicz.family");
    CHECK(error_path(R"({"generator": {"points": "many"}})") == "generator.points");
    CHECK(error_path(R"({"pipelines": ["factorise"]})") == "pipelines");
    CHECK(error_path(R"({"extra": 1})") == "extra");
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), InvalidInput);
}

TEST_CASE("config builders") {
    CHECK(make_orlicz(OrliczConfig{"gaussian", 2.0, {}, std::nullopt}).family() == OrliczFamily::gaussian);
    const auto plan = make_plan(PlanConfig{});
    CHECK(plan.size() == 40);
    PlanConfig explicit_plan;
    explicit_plan.a = {0.5, 0.25, 0.125};
    explicit_plan.b = {0.5, 0.25, 0.25};
    CHECK(make_plan(explicit_plan).a == explicit_plan.a);

    GeneratorConfig g;
    g.points = 9;
    g.realizations = 4;
    const auto grid = generator_grid(g);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == doctest::Approx(std::exp(-1.0)));
    CHECK(generate(g).points() == 9);
    g.family = "zero";
    CHECK(generate(g).is_identically_zero());
    CHECK(is_line_family("stable"));
    CHECK_FALSE(is_line_family("brownian_sheet"));
}
