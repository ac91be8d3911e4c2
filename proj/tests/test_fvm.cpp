#include "hbmtherm.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hbmtherm;

namespace {

// Dense copy of the assembled operator, small systems only.
std::vector<std::vector<double>> dense(const LinearSystem& s)
{
    const std::size_t n = s.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            a[r][c] = s.coefficient(r, c);
        }
    }
    return a;
}

bool cholesky_ok(std::vector<std::vector<double>> a)
{
    const std::size_t n = a.size();
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j][j];
        for (std::size_t k = 0; k < j; ++k) {
            d -= a[j][k] * a[j][k];
        }
        if (!(d > 0.0)) {
            return false;
        }
        a[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i][j];
            for (std::size_t k = 0; k < j; ++k) {
                v -= a[i][k] * a[j][k];
            }
            a[i][j] = v / a[j][j];
        }
    }
    return true;
}

VoxelModel random_model(std::mt19937_64& rng, int nx, int ny, int nz)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto edges = [&](int n) {
        std::vector<double> e{0.0};
        for (int i = 0; i < n; ++i) {
            e.push_back(e.back() + 1e-4 + 1e-3 * u(rng));
        }
        return e;
    };
    VoxelModel m = make_box_model(nx, ny, nz, 1, 1, 1, isotropic_material("a", 1, 1, 1, 0), 10 + 340 * u(rng),
                                  10 + 340 * u(rng), 300);
    m.x_edges = edges(nx);
    m.y_edges = edges(ny);
    m.z_edges = edges(nz);
    m.materials.clear();
    for (int i = 0; i < 4; ++i) {
        m.materials.push_back(Material{"r" + std::to_string(i), 0.5 + 700 * u(rng), 0.5 + 700 * u(rng),
                                       0.5 + 700 * u(rng), 1000, 1000, 0});
    }
    for (auto& id : m.material_id) {
        id = static_cast<std::uint16_t>(rng() % 4);
    }
    for (auto& q : m.power_density) {
        q = 1e8 * u(rng);
    }
    return m;
}

} // namespace

TEST(FaceConductance, HomogeneousLimit)
{
    EXPECT_DOUBLE_EQ(face_conductance(2e-6, 1e-4, 50.0, 1e-4, 50.0), 2e-6 * 50.0 / 2e-4);
}

TEST(FaceConductance, HbnSiliconInterface)
{
    const double u = face_conductance(1e-6, 25e-6, 751.0, 25e-6, 140.0);
    EXPECT_NEAR(u, 1e-6 / (25e-6 / 751.0 + 25e-6 / 140.0), 1e-15);
    EXPECT_NEAR(u, 4.72, 0.005); // W/K
}

TEST(FaceConductance, PerfectConductorLimit)
{
    EXPECT_NEAR(face_conductance(1e-6, 1e-4, 10.0, 1e-4, 1e300), 1e-6 * 10.0 / 1e-4, 1e-15);
}

TEST(FaceConductance, Reciprocity)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1e-6, 1e-3);
    std::uniform_real_distribution<double> k(0.1, 1000.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng);
        const double da = u(rng);
        const double db = u(rng);
        const double ka = k(rng);
        const double kb = k(rng);
        EXPECT_DOUBLE_EQ(face_conductance(a, da, ka, db, kb), face_conductance(a, db, kb, da, ka));
    }
}

TEST(RobinCoefficient, SurfaceTemperatureLimit)
{
    EXPECT_NEAR(robin_face_coefficient(250.0, 1e300, 1e-4, 2.0), 500.0, 1e-9);
}

TEST(RobinCoefficient, NaturalConvectionNoHalfCell) { EXPECT_DOUBLE_EQ(robin_face_coefficient(10.0, 1.0, 0.0, 1.0), 10.0); }

TEST(RobinCoefficient, ForcedConvectionOnCopper)
{
    const double u = robin_face_coefficient(350.0, 400.0, 0.25e-3, 1e-6);
    EXPECT_NEAR(u, 1e-6 / (1.0 / 350.0 + 6.25e-7), 1e-18);
    EXPECT_NEAR(u, 3.499e-4, 0.0005e-4);
}

TEST(Assemble, SingleCellEnergyBalance)
{
    const double L = 1e-3;
    VoxelModel m = make_box_model(1, 1, 1, L, L, L, isotropic_material("a", 20, 1, 1, 0), 200, 10, 300);
    const double P = 0.5;
    m.power_density[0] = P / (L * L * L);
    const LinearSystem s = assemble_system(m);
    const double ut = robin_face_coefficient(200, 20, 0.5 * L, L * L);
    const double ub = robin_face_coefficient(10, 20, 0.5 * L, L * L);
    EXPECT_NEAR(s.diag[0], ut + ub, 1e-18);
    const auto f = solve_steady(s, 300.0);
    EXPECT_NEAR(f.t[0], 300.0 + P / (ut + ub), 1e-9);
}

TEST(Assemble, TwoByTwoByTwoSymmetricDiagonallyDominant)
{
    const VoxelModel m = make_box_model(2, 2, 2, 1e-3, 1e-3, 1e-3, isotropic_material("a", 10, 1, 1, 0), 100, 10, 300);
    const auto a = dense(assemble_system(m));
    for (std::size_t r = 0; r < a.size(); ++r) {
        double off = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) {
            EXPECT_EQ(a[r][c], a[c][r]);
            if (c != r) {
                EXPECT_LE(a[r][c], 0.0);
                off += std::abs(a[r][c]);
            }
        }
        EXPECT_GE(a[r][r], off);
    }
}

TEST(Assemble, ZeroPowerRhsIsRobinOnly)
{
    const VoxelModel m = make_box_model(3, 2, 4, 3e-3, 2e-3, 4e-3, isotropic_material("a", 10, 1, 1, 0), 100, 10, 300);
    const LinearSystem s = assemble_system(m);
    for (int k = 0; k < m.nz; ++k) {
        for (int j = 0; j < m.ny; ++j) {
            for (int i = 0; i < m.nx; ++i) {
                const std::size_t c = m.index(i, j, k);
                double expect = 0.0;
                if (k == 0) {
                    expect += s.robin_bottom[m.column(i, j)] * 300.0;
                }
                if (k == m.nz - 1) {
                    expect += s.robin_top[m.column(i, j)] * 300.0;
                }
                EXPECT_DOUBLE_EQ(s.rhs[c], expect);
            }
        }
    }
    const auto f = solve_steady(s, 300.0);
    for (double t : f.t) {
        EXPECT_NEAR(t, 300.0, 1e-9);
    }
}

TEST(Assemble, ZeroConductivityThrows)
{
    VoxelModel m = make_box_model(2, 1, 1, 1e-3, 1e-3, 1e-3, isotropic_material("a", 10, 1, 1, 0), 100, 10, 300);
    m.materials[0].k_yy = 0.0;
    EXPECT_THROW((void)assemble_system(m), AssemblyError);
}

TEST(Assemble, MismatchedArraysThrow)
{
    VoxelModel m = make_box_model(2, 2, 2, 1e-3, 1e-3, 1e-3, isotropic_material("a", 10, 1, 1, 0), 100, 10, 300);
    m.power_density.pop_back();
    EXPECT_THROW((void)assemble_system(m), AssemblyError);
}

// Layered column: harmonic faces reproduce the series resistance exactly.
TEST(Assemble, SeriesResistanceExactAcrossLayers)
{
    const double A = 1e-6;
    VoxelModel m = make_box_model(1, 1, 3, 1e-3, 1e-3, 3e-3, isotropic_material("a", 5, 1, 1, 0), 1e6, 1e-12, 300);
    m.z_edges = {0.0, 0.2e-3, 0.5e-3, 1.5e-3};
    m.materials = {isotropic_material("a", 5, 1, 1, 0), isotropic_material("b", 140, 1, 1, 0),
                   isotropic_material("c", 751, 1, 1, 0)};
    m.material_id = {0, 1, 2};
    // all heat injected in the bottom cell leaves through the top film
    const double P = 1e-3;
    m.injected_heat = {P, 0.0, 0.0};
    const auto f = solve_steady(m, SolverOptions{1e-14, 0, Preconditioner::jacobi});
    const double r01 = (0.1e-3 / 5 + 0.15e-3 / 140) / A;
    const double r12 = (0.15e-3 / 140 + 0.5e-3 / 751) / A;
    EXPECT_NEAR(f.t[0] - f.t[1], P * r01, 1e-9 * P * r01);
    EXPECT_NEAR(f.t[1] - f.t[2], P * r12, 1e-9 * P * r12);
}

// Properties on random heterogeneous anisotropic models.
TEST(AssembleProperty, SymmetricPositiveDefiniteConservative)
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int nx = 1 + static_cast<int>(rng() % 4);
        const int ny = 1 + static_cast<int>(rng() % 4);
        const int nz = 1 + static_cast<int>(rng() % 4);
        const VoxelModel m = random_model(rng, nx, ny, nz);
        const LinearSystem s = assemble_system(m);
        const auto a = dense(s);
        for (std::size_t r = 0; r < a.size(); ++r) {
            for (std::size_t c = 0; c < a.size(); ++c) {
                ASSERT_EQ(a[r][c], a[c][r]);
            }
        }
        EXPECT_TRUE(cholesky_ok(a));

        // multiply() agrees with the dense operator
        std::vector<double> x(s.size());
        for (auto& v : x) {
            v = std::uniform_real_distribution<double>(-1, 1)(rng);
        }
        std::vector<double> y(s.size());
        s.multiply(x, y);
        for (std::size_t r = 0; r < a.size(); ++r) {
            double ref = 0.0;
            for (std::size_t c = 0; c < a.size(); ++c) {
                ref += a[r][c] * x[c];
            }
            EXPECT_NEAR(y[r], ref, 1e-9 * (std::abs(ref) + s.diag[r]));
        }

        const auto f = solve_steady(s, m.t_ambient, SolverOptions{1e-12, 0, Preconditioner::jacobi});
        EXPECT_LT(verify::energy_imbalance(s, f.t), 1e-6);
    }
}

TEST(LinearSystem, CoefficientRespectsRowBoundaries)
{
    const VoxelModel m = make_box_model(1, 3, 2, 1e-3, 3e-3, 2e-3, isotropic_material("a", 10, 1, 1, 0), 100, 10, 300);
    const LinearSystem s = assemble_system(m);
    // nx = 1: cells 0 and 1 are y-neighbours, not x-neighbours
    EXPECT_LT(s.coefficient(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(s.coefficient(0, 1), -s.gy[0]);
    EXPECT_DOUBLE_EQ(s.coefficient(2, 3), 0.0); // last y-row to next plane
    EXPECT_DOUBLE_EQ(s.coefficient(0, 3), -s.gz[0]);
}
