#pragma once

// Closed-form references for verifying the discretization. Nothing here
// touches the assembly or solver code paths.

#include "hbmtherm/error.hpp"
#include "hbmtherm/voxel.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace hbmtherm::oracle {

/// Uniformly heated slab with convective faces at z = 0 (bottom) and z = L (top).
struct SlabProblem {
    double thickness = 1e-3; // m
    double k = 1.0;          // W/(m K)
    double q = 0.0;          // W/m^3
    double h_top = 10.0;     // W/(m^2 K)
    double h_bottom = 10.0;
    double t_e = 300.0; // K
};

/// T(z) = t_e - q z^2 / (2k) + c1 z + c0, with c0, c1 from the two Robin conditions
///   k T'(0) = h_b (T(0) - t_e),   -k T'(L) = h_t (T(L) - t_e).
inline double slab_analytic(const SlabProblem& p, double z)
{
    if (!(p.thickness > 0.0 && p.k > 0.0 && p.h_top > 0.0 && p.h_bottom > 0.0)) {
        throw DomainError("slab_analytic: thickness, k and h must be positive");
    }
    if (!(z >= 0.0 && z <= p.thickness)) {
        throw DomainError("slab_analytic: z outside the slab");
    }
    const double L = p.thickness;
    const double c1 = p.q * L * (1.0 + p.h_top * L / (2.0 * p.k)) / (p.k + p.h_top * L + p.h_top * p.k / p.h_bottom);
    const double c0 = p.k * c1 / p.h_bottom;
    return p.t_e - p.q * z * z / (2.0 * p.k) + c1 * z + c0;
}

/// Cosine product field with matching source and boundary data on a given grid.
/// Coordinates are measured from the domain center, so T = 300 on every face.
struct ManufacturedProblem {
    double k = 100.0;
    double h = 1000.0;
    double lx = 0.0;
    double ly = 0.0;
    double lz = 0.0;
    std::vector<double> t_exact;        // K at cell centers
    std::vector<double> source;         // W/m^3 at cell centers
    std::vector<double> ambient_top;    // per column, K
    std::vector<double> ambient_bottom; // per column, K
    std::vector<double> side_heat;      // W entering each cell through side walls

    [[nodiscard]] double exact(double x, double y, double z) const
    {
        using std::numbers::pi;
        return 300.0 + 10.0 * std::cos(pi * (x - 0.5 * lx) / lx) * std::cos(pi * (y - 0.5 * ly) / ly) *
                           std::cos(pi * (z - 0.5 * lz) / lz);
    }

    [[nodiscard]] double source_at(double x, double y, double z) const
    {
        using std::numbers::pi;
        return k * pi * pi * (1.0 / (lx * lx) + 1.0 / (ly * ly) + 1.0 / (lz * lz)) * (exact(x, y, z) - 300.0);
    }

    /// Exact gradient component along `axis`.
    [[nodiscard]] double gradient(int axis, double x, double y, double z) const
    {
        using std::numbers::pi;
        const double ax = pi * (x - 0.5 * lx) / lx;
        const double ay = pi * (y - 0.5 * ly) / ly;
        const double az = pi * (z - 0.5 * lz) / lz;
        switch (axis) {
        case 0: return -10.0 * (pi / lx) * std::sin(ax) * std::cos(ay) * std::cos(az);
        case 1: return -10.0 * (pi / ly) * std::cos(ax) * std::sin(ay) * std::cos(az);
        default: return -10.0 * (pi / lz) * std::cos(ax) * std::cos(ay) * std::sin(az);
        }
    }
};

/// Builds the manufactured problem on the grid of `grid` (only its edges are read).
/// Top/bottom ambient temperatures satisfy -k dT/dn = h (T - T_e) exactly at
/// face centers; side walls receive the exact conductive flux.
inline ManufacturedProblem manufactured_solution(const VoxelModel& grid, double k = 100.0, double h = 1000.0)
{
    ManufacturedProblem p;
    p.k = k;
    p.h = h;
    p.lx = grid.x_edges.back() - grid.x_edges.front();
    p.ly = grid.y_edges.back() - grid.y_edges.front();
    p.lz = grid.z_edges.back() - grid.z_edges.front();
    const std::size_t n = grid.size();
    p.t_exact.resize(n);
    p.source.resize(n);
    p.side_heat.assign(n, 0.0);
    const std::size_t ncol = static_cast<std::size_t>(grid.nx) * grid.ny;
    p.ambient_top.resize(ncol);
    p.ambient_bottom.resize(ncol);

    for (int kk = 0; kk < grid.nz; ++kk) {
        for (int j = 0; j < grid.ny; ++j) {
            for (int i = 0; i < grid.nx; ++i) {
                const std::size_t c = grid.index(i, j, kk);
                const double x = grid.xc(i);
                const double y = grid.yc(j);
                const double z = grid.zc(kk);
                p.t_exact[c] = p.exact(x, y, z);
                p.source[c] = p.source_at(x, y, z);
                // heat entering = k grad(T) . n A over each wall face
                if (i == 0) {
                    p.side_heat[c] -= k * p.gradient(0, grid.x_edges.front(), y, z) * grid.dy(j) * grid.dz(kk);
                }
                if (i == grid.nx - 1) {
                    p.side_heat[c] += k * p.gradient(0, grid.x_edges.back(), y, z) * grid.dy(j) * grid.dz(kk);
                }
                if (j == 0) {
                    p.side_heat[c] -= k * p.gradient(1, x, grid.y_edges.front(), z) * grid.dx(i) * grid.dz(kk);
                }
                if (j == grid.ny - 1) {
                    p.side_heat[c] += k * p.gradient(1, x, grid.y_edges.back(), z) * grid.dx(i) * grid.dz(kk);
                }
            }
        }
    }
    const double zb = grid.z_edges.front();
    const double zt = grid.z_edges.back();
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double x = grid.xc(i);
            const double y = grid.yc(j);
            // T_e = T + (k/h) dT/dn with n the outward normal
            p.ambient_top[grid.column(i, j)] = p.exact(x, y, zt) + (k / h) * p.gradient(2, x, y, zt);
            p.ambient_bottom[grid.column(i, j)] = p.exact(x, y, zb) - (k / h) * p.gradient(2, x, y, zb);
        }
    }
    return p;
}

/// Homogeneous box carrying the manufactured source and boundary data.
inline VoxelModel manufactured_model(int nx, int ny, int nz, double lx, double ly, double lz, double k = 100.0,
                                     double h = 1000.0)
{
    VoxelModel m = make_box_model(nx, ny, nz, lx, ly, lz, isotropic_material("mms", k, 1000.0, 1000.0, 0.0), h, h,
                                  300.0);
    ManufacturedProblem p = manufactured_solution(m, k, h);
    m.power_density = p.source;
    m.injected_heat = p.side_heat;
    m.t_ambient_top = p.ambient_top;
    m.t_ambient_bottom = p.ambient_bottom;
    return m;
}

/// Least-squares slope of log(error) against log(spacing).
inline double convergence_order(std::span<const double> errors, std::span<const double> spacings)
{
    if (errors.size() != spacings.size() || errors.size() < 2) {
        throw DomainError("convergence_order: need at least two (error, spacing) pairs");
    }
    const std::size_t n = errors.size();
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(errors[i] > 0.0 && spacings[i] > 0.0)) {
            throw DomainError("convergence_order: errors and spacings must be positive");
        }
        sx += std::log(spacings[i]);
        sy += std::log(errors[i]);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(spacings[i]) - mx;
        sxy += dx * (std::log(errors[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) {
        throw DomainError("convergence_order: spacings must differ");
    }
    return sxy / sxx;
}

} // namespace hbmtherm::oracle
