#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "helpers.hpp"
#include "mps_reader.hpp"
#include "pomdpml/formulate.hpp"
#include "pomdpml/lp.hpp"
#include "pomdpml/mps.hpp"

using namespace pomdpml;
using testutil::load_bench;

TEST_CASE("an empty model renders all sections") {
    const LpModel empty;
    const auto out = export_mps(empty);
    for (const char* section : {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS",
                                "ENDATA"})
        CHECK(out.mps.find(section) != std::string::npos);
    const auto back = testutil::read_mps(out.mps);
    CHECK(back.n_rows() == 0);
    CHECK(back.n_cols() == 0);
}

TEST_CASE("binary policy columns are marked BV inside integer markers") {
    const auto m = load_bench("tiger");
    const auto model = build_memoryless_model(m, RewardSpec::plain(m, 1), {.integral = true});
    const auto out = export_mps(model);
    CHECK(out.mps.find("'INTORG'") != std::string::npos);
    CHECK(out.mps.find("'INTEND'") != std::string::npos);
    std::size_t bv_count = 0;
    std::istringstream in(out.mps);
    std::string line;
    while (std::getline(in, line))
        if (line.find(" BV ") != std::string::npos) ++bv_count;
    std::size_t delta_cols = 0;
    for (int j = 0; j < model.n_cols(); ++j)
        if (model.cols[j].integral) ++delta_cols;
    CHECK(bv_count == delta_cols);
    CHECK(delta_cols == 2 * 2 * 3);
}

TEST_CASE("names are mangled deterministically with a sidecar") {
    const auto m = load_bench("ejs2");
    const auto model = build_memoryless_model(m, RewardSpec::plain(m, 1));
    const auto out = export_mps(model);
    const auto side = nlohmann::json::parse(out.sidecar_json);
    CHECK(side["objective_sense"] == "maximize");
    CHECK(side["columns"]["C0000000"] == model.cols[0].name);
    CHECK(side["rows"]["R0000000"] == model.rows[0].name);
    for (const auto& [mangled, full] : side["columns"].items())
        CHECK(mangled.size() == 8);
}

TEST_CASE("a written model solves to the same optimum after rereading") {
    for (const char* name : {"tiger", "ejs2"}) {
        const auto m = load_bench(name);
        const auto spec = RewardSpec::plain(m, 1);
        const auto model = build_memoryless_model(m, spec, {.cuts = true});
        const auto out = export_mps(model);
        const auto back = testutil::read_mps(out.mps);
        REQUIRE(back.n_rows() == model.n_rows());
        REQUIRE(back.n_cols() == model.n_cols());
        const auto ref = solve_lp(model);
        const auto rt = solve_lp(back);
        REQUIRE(ref.status == LpStatus::Optimal);
        REQUIRE(rt.status == LpStatus::Optimal);
        INFO(name);
        CHECK(rt.objective == Catch::Approx(ref.objective).margin(1e-6));
    }
}
