#include "hbmtherm.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hbmtherm;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text)
{
    try {
        (void)parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

// Structural equality with a relative tolerance on numbers: unit conversions
// (um, mm) are not exact in binary floating point.
void expect_json_near(const json& a, const json& b, const std::string& path = "")
{
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>();
        const double y = b.get<double>();
        EXPECT_NEAR(x, y, 1e-12 * std::max(std::abs(x), std::abs(y))) << path;
        return;
    }
    ASSERT_EQ(a.type(), b.type()) << path;
    if (a.is_object()) {
        ASSERT_EQ(a.size(), b.size()) << path;
        for (const auto& [k, v] : a.items()) {
            ASSERT_TRUE(b.contains(k)) << path << "." << k;
            expect_json_near(v, b.at(k), path + "." + k);
        }
    } else if (a.is_array()) {
        ASSERT_EQ(a.size(), b.size()) << path;
        for (std::size_t i = 0; i < a.size(); ++i) {
            expect_json_near(a[i], b[i], path + "[" + std::to_string(i) + "]");
        }
    } else {
        EXPECT_EQ(a, b) << path;
    }
}

} // namespace

TEST(ParseConfig, MinimalConfigFillsDefaults)
{
    const RunConfig c = parse_config(R"({
        "footprint_mm": [24, 24],
        "interposer": {"material": "hbn", "thickness_um": 300},
        "hbm": {"total": 20, "per_layer": 5},
        "gpu": {"tdp_w": 256}
    })");
    StackSpec expect;
    expect.set_gpu_tdp(256.0);
    EXPECT_NEAR(c.stack.footprint_x, 24e-3, 1e-15);
    EXPECT_NEAR(c.stack.interposer_thickness, 300e-6, 1e-18);
    EXPECT_EQ(c.stack.hbm.n_layers, 4);
    EXPECT_EQ(c.stack.hbm, expect.hbm);
    EXPECT_EQ(c.stack.gpu_power_w, expect.gpu_power_w);
    EXPECT_FALSE(c.stack.gpu_power_density_w_cm2.has_value());
    EXPECT_EQ(c.stack.substrate, expect.substrate);
    EXPECT_EQ(c.stack.hbm_tier, expect.hbm_tier);
    EXPECT_EQ(c.stack.heat_sink, expect.heat_sink);
    EXPECT_DOUBLE_EQ(c.stack.h_top, 250.0);
    EXPECT_DOUBLE_EQ(c.stack.h_bottom, 10.0);
    EXPECT_EQ(c.grid, GridOptions{});
    EXPECT_EQ(c.solver, SolverOptions{});
    EXPECT_EQ(c.transient, TransientSchedule{});
    EXPECT_FALSE(c.sweep.has_value());
    EXPECT_EQ(c.out_dir, "out");
}

TEST(ParseConfig, EmptyObjectIsDefaultStack)
{
    const RunConfig c = parse_config("{}");
    EXPECT_EQ(c.stack, StackSpec{});
}

TEST(ParseConfig, NonDivisorIsSemanticError)
{
    const std::string e = error_of(R"({"hbm": {"total": 20, "per_layer": 6}})");
    EXPECT_NE(e.find("hbm.per_layer"), std::string::npos) << e;
}

TEST(ParseConfig, UnknownKeyNamed)
{
    const std::string e = error_of(R"({"interposer": {"material": "hbn", "thiccness": 300}})");
    EXPECT_NE(e.find("thiccness"), std::string::npos) << e;
    EXPECT_NE(e.find("interposer"), std::string::npos) << e;
    EXPECT_NE(error_of(R"({"gpuu": {}})").find("gpuu"), std::string::npos);
}

TEST(ParseConfig, SyntaxErrorHasLineAndColumn)
{
    const std::string e = error_of("{\n  \"hbm\": {\"total\": 20,,}\n}");
    EXPECT_NE(e.find("line 2"), std::string::npos) << e;
    EXPECT_NE(e.find("column"), std::string::npos) << e;
}

TEST(ParseConfig, WrongTypeNamesKey)
{
    const std::string e = error_of(R"({"boundary": {"h_top": "high"}})");
    EXPECT_NE(e.find("boundary.h_top"), std::string::npos) << e;
}

TEST(ParseConfig, UnknownMaterialNamesKey)
{
    const std::string e = error_of(R"({"interposer": {"material": "graphene"}})");
    EXPECT_NE(e.find("interposer.material"), std::string::npos) << e;
}

TEST(ParseConfig, MaterialOverrideAndNewMaterial)
{
    const RunConfig c = parse_config(R"({
        "materials": {"hbn": {"k_zz": 2}, "graphite": {"k_xx": 1500, "k_yy": 1500, "k_zz": 5, "density": 2200, "cp": 710}},
        "interposer": {"material": "graphite"}
    })");
    const MaterialLibrary lib = c.library();
    EXPECT_DOUBLE_EQ(lib.get("hbn").k_zz, 2.0);
    EXPECT_DOUBLE_EQ(lib.get("hbn").k_xx, 751.0);
    EXPECT_DOUBLE_EQ(lib.get("graphite").k_xx, 1500.0);
    EXPECT_EQ(c.stack.interposer_material, "graphite");
}

TEST(ParseConfig, IncompleteNewMaterialRejected)
{
    const std::string e = error_of(R"({"materials": {"foo": {"k": 3}}})");
    EXPECT_NE(e.find("materials.foo"), std::string::npos) << e;
}

TEST(ParseConfig, BothGpuPowerFormsRejected)
{
    EXPECT_NE(error_of(R"({"gpu": {"tdp_w": 100, "power_density_w_cm2": 50}})").find("gpu"), std::string::npos);
}

TEST(ParseConfig, SweepSection)
{
    const RunConfig c = parse_config(R"({
        "sweep": {"family": "interposer_thickness", "thickness_um": [100, 50]},
        "output": {"dir": "runs/t"}
    })");
    ASSERT_TRUE(c.sweep.has_value());
    EXPECT_EQ(c.sweep->family, SweepFamily::interposer_thickness);
    ASSERT_EQ(c.sweep->thicknesses.size(), 2u);
    EXPECT_NEAR(c.sweep->thicknesses[1], 50e-6, 1e-18);
    const SweepSpec s = c.sweep_spec(3);
    EXPECT_EQ(s.parallelism, 3);
    EXPECT_EQ(generate_cases(s).size(), 2u);
    EXPECT_EQ(c.out_dir, "runs/t");
    EXPECT_NE(error_of(R"({"sweep": {"family": "fig9"}})").find("sweep.family"), std::string::npos);
    EXPECT_NE(error_of(R"({"sweep": {}})").find("sweep.family"), std::string::npos);
}

TEST(ParseConfig, SolverAndGridValidation)
{
    EXPECT_NE(error_of(R"({"solver": {"rel_tol": 0}})").find("solver.rel_tol"), std::string::npos);
    EXPECT_NE(error_of(R"({"solver": {"preconditioner": "ilu"}})").find("solver.preconditioner"), std::string::npos);
    EXPECT_NE(error_of(R"({"grid": {"cells_per_layer": 0}})").find("grid.cells_per_layer"), std::string::npos);
    EXPECT_NE(error_of(R"({"transient": {"dt_s": 1, "t_end_s": 0.5}})").find("transient"), std::string::npos);
}

TEST(ConfigRoundTrip, Defaults)
{
    RunConfig c;
    const RunConfig back = parse_config(emit_config(c));
    expect_json_near(json::parse(emit_config(back)), json::parse(emit_config(c)));
    EXPECT_EQ(back.stack.hbm.dies_per_layer, c.stack.hbm.dies_per_layer);
    EXPECT_NEAR(back.stack.hbm.die_x, c.stack.hbm.die_x, 1e-15);
    EXPECT_EQ(back.solver, c.solver);
}

// Property: parse(emit(c)) reproduces every field on random configurations.
TEST(ConfigRoundTripProperty, RandomConfigs)
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<std::string> mats{"silicon", "hbn", "copper", "mold"};
    auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
    for (int trial = 0; trial < 100; ++trial) {
        RunConfig c;
        StackSpec& s = c.stack;
        const auto fam = fig2_family(20);
        const auto [d, l] = fam[rng() % fam.size()];
        s.footprint_x = 40e-3 + 20e-3 * u(rng);
        s.footprint_y = 40e-3 + 20e-3 * u(rng);
        s.hbm.dies_per_layer = d;
        s.hbm.n_layers = l;
        s.hbm.gap = 0.5e-3 + 1e-3 * u(rng);
        s.hbm.die_x = 1e-3 + u(rng) * 1e-3;
        s.hbm.die_y = 1e-3 + u(rng) * 1e-3;
        s.hbm_power_per_die_w = 3.0 * u(rng);
        s.interposer_material = pick(mats);
        s.interposer_thickness = 10e-6 + 990e-6 * u(rng);
        s.interposer_tsv_fraction = u(rng) < 0.3 ? std::nullopt : std::optional<double>(0.2 * u(rng));
        s.hbm_tier.tsv_fraction = u(rng) < 0.3 ? std::nullopt : std::optional<double>(0.2 * u(rng));
        s.substrate.tsv_fraction = u(rng) < 0.5 ? std::nullopt : std::optional<double>(0.1 * u(rng));
        s.gpu.material = pick(mats);
        s.hbm_fill = pick(mats);
        if (u(rng) < 0.5) {
            s.set_gpu_tdp(50.0 + 300.0 * u(rng));
        } else {
            s.gpu_power_density_w_cm2 = 200.0 * u(rng);
        }
        s.h_top = 150.0 + 200.0 * u(rng);
        s.h_bottom = 5.0 + 10.0 * u(rng);
        s.t_ambient = 280.0 + 40.0 * u(rng);
        c.grid = GridOptions{100e-6 + 400e-6 * u(rng), 1 + static_cast<int>(rng() % 4)};
        c.solver = SolverOptions{std::pow(10.0, -6 - 6 * u(rng)), static_cast<int>(rng() % 5000),
                                 u(rng) < 0.5 ? Preconditioner::jacobi : Preconditioner::none};
        c.transient = TransientSchedule{0.01 + u(rng), 50.0 + 10.0 * u(rng),
                                        u(rng) < 0.5 ? std::nullopt : std::optional<double>(300.0 + u(rng)),
                                        static_cast<int>(rng() % 50)};
        if (u(rng) < 0.5) {
            c.material_overrides["hbn"] = Material{"hbn", 751.0, 751.0, 2.0 + 18.0 * u(rng), 2100.0, 800.0, 2.5e-6};
        }
        if (u(rng) < 0.5) {
            SweepSettings sw;
            sw.family = static_cast<SweepFamily>(rng() % 3);
            sw.thicknesses = {100e-6 * (1 + u(rng)), 50e-6};
            sw.tdps = {100.0 * u(rng) + 1.0};
            sw.materials = {pick(mats)};
            sw.transient = u(rng) < 0.5;
            c.sweep = sw;
        }
        c.out_dir = "out/run" + std::to_string(trial);
        ASSERT_NO_THROW((void)validate(c.stack)) << trial;

        const std::string text = emit_config(c);
        const RunConfig back = parse_config(text);
        expect_json_near(json::parse(emit_config(back)), json::parse(text));
        // exact on everything that is not a converted length
        EXPECT_EQ(back.stack.hbm.dies_per_layer, c.stack.hbm.dies_per_layer);
        EXPECT_EQ(back.stack.hbm.n_layers, c.stack.hbm.n_layers);
        EXPECT_EQ(back.stack.interposer_material, c.stack.interposer_material);
        EXPECT_EQ(back.stack.interposer_tsv_fraction, c.stack.interposer_tsv_fraction);
        EXPECT_EQ(back.stack.gpu_power_w, c.stack.gpu_power_w);
        EXPECT_EQ(back.stack.gpu_power_density_w_cm2, c.stack.gpu_power_density_w_cm2);
        EXPECT_EQ(back.stack.h_top, c.stack.h_top);
        EXPECT_EQ(back.solver, c.solver);
        EXPECT_EQ(back.transient, c.transient);
        EXPECT_EQ(back.material_overrides, c.material_overrides);
        EXPECT_EQ(back.out_dir, c.out_dir);
        EXPECT_EQ(back.sweep.has_value(), c.sweep.has_value());
        if (c.sweep) {
            EXPECT_EQ(back.sweep->family, c.sweep->family);
            EXPECT_EQ(back.sweep->tdps, c.sweep->tdps);
            EXPECT_EQ(back.sweep->materials, c.sweep->materials);
            EXPECT_EQ(back.sweep->transient, c.sweep->transient);
        }
    }
}
