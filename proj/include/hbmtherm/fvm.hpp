#pragma once

#include "hbmtherm/error.hpp"
#include "hbmtherm/voxel.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace hbmtherm {

/// Conductance between two cell centers through a shared face, W/K.
/// d_a and d_b are the center-to-face distances; k is the tensor component
/// along the face normal. An infinite k drops that side's resistance.
inline double face_conductance(double area, double d_a, double k_a, double d_b, double k_b)
{
    return area / (d_a / k_a + d_b / k_b);
}

/// Convective film in series with half-cell conduction, W/K.
inline double robin_face_coefficient(double h, double k_n, double half_thickness, double area)
{
    return area / (1.0 / h + half_thickness / k_n);
}

/// Symmetric 7-point system A T = b. Off-diagonal entries are stored once
/// per face as positive conductances g; the matrix entry is -g on both sides.
struct LinearSystem {
    int nx = 0;
    int ny = 0;
    int nz = 0;
    std::vector<double> diag;
    std::vector<double> gx; // face (i, i+1); zero on the last x-cell
    std::vector<double> gy; // face (j, j+1)
    std::vector<double> gz; // face (k, k+1)
    std::vector<double> rhs;

    std::vector<double> source; // q V + prescribed injection, W
    std::vector<double> robin_top;
    std::vector<double> robin_bottom;
    std::vector<double> ambient_top;
    std::vector<double> ambient_bottom;

    [[nodiscard]] std::size_t size() const noexcept { return diag.size(); }
    [[nodiscard]] std::size_t stride_y() const noexcept { return static_cast<std::size_t>(nx); }
    [[nodiscard]] std::size_t stride_z() const noexcept
    {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const
    {
        const std::size_t n = size();
        for (std::size_t c = 0; c < n; ++c) {
            y[c] = diag[c] * x[c];
        }
        band_product(gx, 1, x, y);
        band_product(gy, stride_y(), x, y);
        band_product(gz, stride_z(), x, y);
    }

    /// Dense matrix entry A(r, c). Intended for small systems and tests.
    [[nodiscard]] double coefficient(std::size_t r, std::size_t c) const
    {
        if (r == c) {
            return diag[r];
        }
        const std::size_t lo = r < c ? r : c;
        const std::size_t hi = r < c ? c : r;
        const std::size_t d = hi - lo;
        const std::size_t sy = stride_y();
        const std::size_t sz = stride_z();
        const bool same_row = lo / sy == hi / sy;
        const bool same_plane = lo / sz == hi / sz;
        if (d == 1 && same_row) {
            return -gx[lo];
        }
        if (d == sy && same_plane) {
            return -gy[lo];
        }
        if (d == sz) {
            return -gz[lo];
        }
        return 0.0;
    }

    [[nodiscard]] double total_source() const
    {
        double s = 0.0;
        for (double v : source) {
            s += v;
        }
        return s;
    }

    /// Heat leaving through the Robin faces for a given temperature field, W.
    [[nodiscard]] double boundary_heat_loss(std::span<const double> t) const
    {
        const std::size_t sz = stride_z();
        const std::size_t top = static_cast<std::size_t>(nz - 1) * sz;
        double q = 0.0;
        for (std::size_t col = 0; col < sz; ++col) {
            q += robin_bottom[col] * (t[col] - ambient_bottom[col]);
            q += robin_top[col] * (t[top + col] - ambient_top[col]);
        }
        return q;
    }

private:
    // Both triangles of one off-diagonal band: y[c] -= g[c] x[c+s], y[c+s] -= g[c] x[c].
    void band_product(const std::vector<double>& g, std::size_t s, std::span<const double> x,
                      std::span<double> y) const
    {
        const std::size_t n = size();
        if (s >= n) {
            return;
        }
        for (std::size_t c = 0; c + s < n; ++c) {
            y[c] -= g[c] * x[c + s];
        }
        for (std::size_t c = s; c < n; ++c) {
            y[c] -= g[c - s] * x[c - s];
        }
    }
};

/// Builds the steady conduction system for a voxel model. Side walls are
/// adiabatic (plus any prescribed injection); top and bottom are Robin faces.
inline LinearSystem assemble_system(const VoxelModel& m)
{
    if (m.nx < 1 || m.ny < 1 || m.nz < 1 || m.material_id.size() != m.size() ||
        m.power_density.size() != m.size()) {
        throw AssemblyError("assemble_system: model arrays do not match grid dimensions");
    }
    for (const auto& mat : m.materials) {
        if (!(mat.k_xx > 0.0 && mat.k_yy > 0.0 && mat.k_zz > 0.0)) {
            throw AssemblyError("assemble_system: material '" + mat.name + "' has non-positive conductivity");
        }
    }
    if (!(m.h_top > 0.0) || !(m.h_bottom > 0.0)) {
        throw AssemblyError("assemble_system: h_top and h_bottom must be positive");
    }

    LinearSystem s;
    s.nx = m.nx;
    s.ny = m.ny;
    s.nz = m.nz;
    const std::size_t n = m.size();
    s.diag.assign(n, 0.0);
    s.gx.assign(n, 0.0);
    s.gy.assign(n, 0.0);
    s.gz.assign(n, 0.0);
    s.rhs.assign(n, 0.0);
    s.source.assign(n, 0.0);
    const std::size_t ncol = static_cast<std::size_t>(m.nx) * m.ny;
    s.robin_top.assign(ncol, 0.0);
    s.robin_bottom.assign(ncol, 0.0);
    s.ambient_top.assign(ncol, m.t_ambient);
    s.ambient_bottom.assign(ncol, m.t_ambient);

    for (int k = 0; k < m.nz; ++k) {
        for (int j = 0; j < m.ny; ++j) {
            for (int i = 0; i < m.nx; ++i) {
                const std::size_t c = m.index(i, j, k);
                const Material& a = m.material_at(c);
                s.source[c] = m.power_density[c] * m.volume(i, j, k);
                if (!m.injected_heat.empty()) {
                    s.source[c] += m.injected_heat[c];
                }
                if (i + 1 < m.nx) {
                    const Material& b = m.material_at(m.index(i + 1, j, k));
                    s.gx[c] = face_conductance(m.dy(j) * m.dz(k), 0.5 * m.dx(i), a.k_xx, 0.5 * m.dx(i + 1), b.k_xx);
                }
                if (j + 1 < m.ny) {
                    const Material& b = m.material_at(m.index(i, j + 1, k));
                    s.gy[c] = face_conductance(m.dx(i) * m.dz(k), 0.5 * m.dy(j), a.k_yy, 0.5 * m.dy(j + 1), b.k_yy);
                }
                if (k + 1 < m.nz) {
                    const Material& b = m.material_at(m.index(i, j, k + 1));
                    s.gz[c] = face_conductance(m.dx(i) * m.dy(j), 0.5 * m.dz(k), a.k_zz, 0.5 * m.dz(k + 1), b.k_zz);
                }
            }
        }
    }

    const std::size_t sy = s.stride_y();
    const std::size_t sz = s.stride_z();
    for (std::size_t c = 0; c < n; ++c) {
        double d = s.gx[c] + s.gy[c] + s.gz[c];
        if (c >= 1) {
            d += s.gx[c - 1];
        }
        if (c >= sy) {
            d += s.gy[c - sy];
        }
        if (c >= sz) {
            d += s.gz[c - sz];
        }
        s.diag[c] = d;
        s.rhs[c] = s.source[c];
    }

    for (int j = 0; j < m.ny; ++j) {
        for (int i = 0; i < m.nx; ++i) {
            const std::size_t col = m.column(i, j);
            const double area = m.dx(i) * m.dy(j);

            const std::size_t cb = m.index(i, j, 0);
            const double ub = robin_face_coefficient(m.h_bottom, m.material_at(cb).k_zz, 0.5 * m.dz(0), area);
            s.robin_bottom[col] = ub;
            s.ambient_bottom[col] = m.ambient_bottom(i, j);
            s.diag[cb] += ub;
            s.rhs[cb] += ub * s.ambient_bottom[col];

            const std::size_t ct = m.index(i, j, m.nz - 1);
            const double ut = robin_face_coefficient(m.h_top, m.material_at(ct).k_zz, 0.5 * m.dz(m.nz - 1), area);
            s.robin_top[col] = ut;
            s.ambient_top[col] = m.ambient_top(i, j);
            s.diag[ct] += ut;
            s.rhs[ct] += ut * s.ambient_top[col];
        }
    }
    return s;
}

} // namespace hbmtherm
