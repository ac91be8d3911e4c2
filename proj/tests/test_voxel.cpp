#include "hbmtherm.hpp"

#include <gtest/gtest.h>

using namespace hbmtherm;

namespace {

double gpu_power_in(const VoxelModel& m)
{
    double p = 0.0;
    for (std::size_t c : m.gpu_cells()) {
        const int k = static_cast<int>(c / (static_cast<std::size_t>(m.nx) * m.ny));
        const int j = static_cast<int>((c / m.nx) % m.ny);
        const int i = static_cast<int>(c % m.nx);
        p += m.power_density[c] * m.volume(i, j, k);
    }
    return p;
}

} // namespace

TEST(Voxelize, GpuPowerDensityFromArealDensity)
{
    const VoxelModel m = voxelize(StackSpec{}, builtin_library(), 1e-3, 1);
    const auto gpu = m.gpu_cells();
    ASSERT_FALSE(gpu.empty());
    for (std::size_t c : gpu) {
        EXPECT_NEAR(m.power_density[c], 2e9, 1e-3);
    }
}

TEST(Voxelize, GpuCellsCarryConfiguredTdp)
{
    StackSpec s;
    s.set_gpu_tdp(300.0);
    const VoxelModel m = voxelize(s, builtin_library(), 0.5e-3, 2);
    EXPECT_NEAR(gpu_power_in(m), 300.0, 1e-9 * 300.0);
}

TEST(Voxelize, UnpoweredStackHasNoSource)
{
    StackSpec s;
    s.set_gpu_tdp(0.0);
    s.hbm_power_per_die_w = 0.0;
    const VoxelModel m = voxelize(s, builtin_library(), 1e-3, 1);
    for (double q : m.power_density) {
        EXPECT_EQ(q, 0.0);
    }
}

TEST(Voxelize, TotalPowerConserved)
{
    const StackSpec s;
    for (double cell : {1e-3, 0.5e-3, 0.25e-3}) {
        const VoxelModel m = voxelize(s, builtin_library(), cell, 1);
        EXPECT_NEAR(m.total_power(), s.total_power(), 1e-9 * s.total_power()) << cell;
    }
}

// Property: power is conserved under refinement for every distribution and cell size.
TEST(VoxelizeProperty, PowerConservedUnderRefinement)
{
    const auto lib = builtin_library();
    for (auto [d, l] : fig2_family(20)) {
        StackSpec s;
        s.hbm.dies_per_layer = d;
        s.hbm.n_layers = l;
        for (double cell : {1e-3, 0.7e-3, 0.33e-3}) {
            for (int cpl : {1, 3}) {
                const VoxelModel m = voxelize(s, lib, cell, cpl);
                EXPECT_NEAR(m.total_power(), s.total_power(), 1e-9 * s.total_power());
                for (double q : m.power_density) {
                    EXPECT_GE(q, 0.0);
                }
            }
        }
    }
}

TEST(Voxelize, ZPlanesOnLayerBoundaries)
{
    const StackSpec s;
    const VoxelModel m = voxelize(s, builtin_library(), 1e-3, 3);
    const auto layers = expand_stack(s);
    ASSERT_EQ(m.layers.size(), layers.size());
    double z = 0.0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        EXPECT_EQ(m.layers[i].kind, layers[i].kind);
        EXPECT_EQ(m.layers[i].k_end - m.layers[i].k_begin, 3);
        EXPECT_NEAR(m.z_edges[m.layers[i].k_begin], z, 1e-15);
        z += layers[i].thickness;
        EXPECT_NEAR(m.z_edges[m.layers[i].k_end], z, 1e-15);
    }
    EXPECT_EQ(m.nz, static_cast<int>(3 * layers.size()));
}

TEST(Voxelize, CellsNoWiderThanTarget)
{
    const VoxelModel m = voxelize(StackSpec{}, builtin_library(), 0.3e-3, 1);
    for (int i = 0; i < m.nx; ++i) {
        EXPECT_LE(m.dx(i), 0.3e-3 + 1e-12);
    }
    for (int j = 0; j < m.ny; ++j) {
        EXPECT_LE(m.dy(j), 0.3e-3 + 1e-12);
    }
}

TEST(Voxelize, DeterministicAndIdempotent)
{
    const auto lib = builtin_library();
    const VoxelModel a = voxelize(StackSpec{}, lib, 0.5e-3, 2);
    const VoxelModel b = voxelize(StackSpec{}, lib, 0.5e-3, 2);
    EXPECT_EQ(a.material_id, b.material_id);
    EXPECT_EQ(a.power_density, b.power_density);
    EXPECT_EQ(a.x_edges, b.x_edges);
    EXPECT_EQ(a.z_edges, b.z_edges);
}

TEST(Voxelize, MaterialsAtCellCenters)
{
    const StackSpec s;
    const auto lib = builtin_library();
    const VoxelModel m = voxelize(s, lib, 0.5e-3, 1);
    const LayerSlab* hbm = m.find_layer(LayerKind::hbm_tier);
    const LayerSlab* gpu = m.find_layer(LayerKind::gpu);
    const LayerSlab* interposer = m.find_layer(LayerKind::interposer, 3);
    ASSERT_NE(hbm, nullptr);
    ASSERT_NE(gpu, nullptr);
    ASSERT_NE(interposer, nullptr);
    ASSERT_EQ(m.find_layer(LayerKind::interposer, 4), nullptr);

    // corner column: fill everywhere, TSV medium in the HBM tier fill
    const Material corner_hbm = m.material_at(m.index(0, 0, hbm->k_begin));
    EXPECT_NEAR(corner_hbm.k_zz, effective_tsv_medium(lib.get("mold"), lib.get("copper"), 0.05).k_zz, 1e-12);
    EXPECT_EQ(m.material_at(m.index(0, 0, gpu->k_begin)).name, "mold");

    // center column: die material
    const int ic = m.nx / 2;
    const int jc = m.ny / 2;
    EXPECT_EQ(m.material_at(m.index(ic, jc, gpu->k_begin)).name, "silicon");
    const Material interposer_mat = m.material_at(m.index(ic, jc, interposer->k_begin));
    EXPECT_NEAR(interposer_mat.k_zz, effective_tsv_medium(lib.get("hbn"), lib.get("copper"), 0.05).k_zz, 1e-12);
}

TEST(Voxelize, CoarseCellRaisesRefinementError)
{
    try {
        (void)voxelize(StackSpec{}, builtin_library(), 2e-3, 1);
        FAIL() << "expected RefinementError";
    } catch (const RefinementError& e) {
        EXPECT_NEAR(e.suggested_cell(), 0.5e-3, 1e-12); // half the 1 mm die gap
    }
}

TEST(Voxelize, BadArgumentsThrow)
{
    EXPECT_THROW((void)voxelize(StackSpec{}, builtin_library(), 0.0, 1), DomainError);
    EXPECT_THROW((void)voxelize(StackSpec{}, builtin_library(), 1e-3, 0), DomainError);
    StackSpec s;
    s.interposer_material = "unobtainium";
    EXPECT_THROW((void)voxelize(s, builtin_library(), 1e-3, 1), ValidationError);
}

TEST(Subdivide, KeepsBreakpointsAndMergesDuplicates)
{
    const auto e = detail::subdivide({0.0, 1.0, 0.5, 0.5 + 1e-14}, 0.3);
    EXPECT_EQ(e.front(), 0.0);
    EXPECT_EQ(e.back(), 1.0);
    EXPECT_NE(std::find(e.begin(), e.end(), 0.5), e.end());
    EXPECT_EQ(e.size(), 5u); // two intervals of 0.5, two cells each
}

TEST(BoxModel, UniformEdgesEndExactly)
{
    const auto e = uniform_edges(7, 3e-3);
    EXPECT_EQ(e.front(), 0.0);
    EXPECT_EQ(e.back(), 3e-3);
    EXPECT_EQ(e.size(), 8u);
}
