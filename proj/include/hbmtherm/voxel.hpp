#pragma once

#include "hbmtherm/error.hpp"
#include "hbmtherm/materials.hpp"
#include "hbmtherm/stack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hbmtherm {

/// Contiguous run of z-cells belonging to one stack layer.
struct LayerSlab {
    LayerKind kind = LayerKind::substrate;
    int k_begin = 0; // first z-cell
    int k_end = 0;   // one past the last z-cell
    double z0 = 0.0;
    double z1 = 0.0;

    bool operator==(const LayerSlab&) const = default;
};

/// Rectilinear cell-centered grid with per-cell material and volumetric power.
/// Cells are indexed x-fastest: c = i + nx * (j + ny * k).
struct VoxelModel {
    int nx = 0;
    int ny = 0;
    int nz = 0;
    std::vector<double> x_edges; // nx + 1
    std::vector<double> y_edges;
    std::vector<double> z_edges;

    std::vector<Material> materials;
    std::vector<std::uint16_t> material_id; // per cell
    std::vector<double> power_density;      // W/m^3 per cell

    double h_top = 0.0;
    double h_bottom = 0.0;
    double t_ambient = 0.0;
    // Optional per-column ambient temperatures (nx * ny); empty means t_ambient.
    std::vector<double> t_ambient_top;
    std::vector<double> t_ambient_bottom;
    // Optional prescribed heat entering each cell through the side walls, W.
    std::vector<double> injected_heat;

    std::vector<LayerSlab> layers;
    std::optional<Rect> gpu_die;

    [[nodiscard]] std::size_t size() const noexcept
    {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
    [[nodiscard]] std::size_t index(int i, int j, int k) const noexcept
    {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(nx) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * k);
    }
    [[nodiscard]] std::size_t column(int i, int j) const noexcept
    {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * static_cast<std::size_t>(j);
    }

    [[nodiscard]] double dx(int i) const { return x_edges[i + 1] - x_edges[i]; }
    [[nodiscard]] double dy(int j) const { return y_edges[j + 1] - y_edges[j]; }
    [[nodiscard]] double dz(int k) const { return z_edges[k + 1] - z_edges[k]; }
    [[nodiscard]] double xc(int i) const { return 0.5 * (x_edges[i] + x_edges[i + 1]); }
    [[nodiscard]] double yc(int j) const { return 0.5 * (y_edges[j] + y_edges[j + 1]); }
    [[nodiscard]] double zc(int k) const { return 0.5 * (z_edges[k] + z_edges[k + 1]); }
    [[nodiscard]] double volume(int i, int j, int k) const { return dx(i) * dy(j) * dz(k); }

    [[nodiscard]] const Material& material_at(std::size_t cell) const { return materials[material_id[cell]]; }

    [[nodiscard]] double ambient_top(int i, int j) const
    {
        return t_ambient_top.empty() ? t_ambient : t_ambient_top[column(i, j)];
    }
    [[nodiscard]] double ambient_bottom(int i, int j) const
    {
        return t_ambient_bottom.empty() ? t_ambient : t_ambient_bottom[column(i, j)];
    }

    /// Sum of q * V over all cells, W.
    [[nodiscard]] double total_power() const
    {
        double p = 0.0;
        for (int k = 0; k < nz; ++k) {
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    p += power_density[index(i, j, k)] * volume(i, j, k);
                }
            }
        }
        return p;
    }

    [[nodiscard]] const LayerSlab* find_layer(LayerKind kind, int occurrence = 0) const
    {
        for (const auto& l : layers) {
            if (l.kind == kind && occurrence-- == 0) {
                return &l;
            }
        }
        return nullptr;
    }

    /// Cells of the GPU layer that lie inside the GPU die.
    [[nodiscard]] std::vector<std::size_t> gpu_cells() const
    {
        std::vector<std::size_t> out;
        const LayerSlab* slab = find_layer(LayerKind::gpu);
        if (slab == nullptr) {
            return out;
        }
        for (int k = slab->k_begin; k < slab->k_end; ++k) {
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    if (!gpu_die || gpu_die->contains(xc(i), yc(j))) {
                        out.push_back(index(i, j, k));
                    }
                }
            }
        }
        return out;
    }
};

/// n equal subdivisions of [0, length].
inline std::vector<double> uniform_edges(int n, double length)
{
    std::vector<double> e(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        e[i] = length * static_cast<double>(i) / n;
    }
    e[n] = length;
    return e;
}

/// Homogeneous box with Robin faces top and bottom. Used by the verification
/// problems; stack geometry goes through voxelize().
inline VoxelModel make_box_model(int nx, int ny, int nz, double lx, double ly, double lz, const Material& m,
                                 double h_top, double h_bottom, double t_ambient)
{
    validate(m);
    VoxelModel v;
    v.nx = nx;
    v.ny = ny;
    v.nz = nz;
    v.x_edges = uniform_edges(nx, lx);
    v.y_edges = uniform_edges(ny, ly);
    v.z_edges = uniform_edges(nz, lz);
    v.materials = {m};
    v.material_id.assign(v.size(), 0);
    v.power_density.assign(v.size(), 0.0);
    v.h_top = h_top;
    v.h_bottom = h_bottom;
    v.t_ambient = t_ambient;
    return v;
}

namespace detail {

/// Sorted, de-duplicated breakpoints, each interval split into equal cells no wider than target.
inline std::vector<double> subdivide(std::vector<double> breaks, double target)
{
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> uniq;
    for (double b : breaks) {
        if (uniq.empty() || b - uniq.back() > 1e-12) {
            uniq.push_back(b);
        }
    }
    std::vector<double> edges{uniq.front()};
    for (std::size_t s = 1; s < uniq.size(); ++s) {
        const double a = uniq[s - 1];
        const double b = uniq[s];
        const int n = std::max(1, static_cast<int>(std::ceil((b - a) / target - 1e-9)));
        for (int i = 1; i < n; ++i) {
            edges.push_back(a + (b - a) * static_cast<double>(i) / n);
        }
        edges.push_back(b);
    }
    return edges;
}

} // namespace detail

/// Discretizes a stack onto a rectilinear grid.
///
/// In-plane edges land on every die boundary and the footprint is filled with
/// cells no wider than target_cell; each layer gets exactly cells_per_layer
/// z-cells. A cell takes the material of the region containing its center.
inline VoxelModel voxelize(const StackSpec& spec, const MaterialLibrary& lib, double target_cell,
                           int cells_per_layer)
{
    if (!(target_cell > 0.0)) {
        throw DomainError("voxelize: target cell size must be positive");
    }
    if (cells_per_layer < 1) {
        throw DomainError("voxelize: cells_per_layer must be >= 1");
    }
    (void)validate(spec);

    const Rect gpu_die = spec.gpu_die();
    const HbmLayout layout = hbm_layout(spec);

    double feature = std::min({spec.hbm.die_x, spec.hbm.die_y, spec.gpu_die_x, spec.gpu_die_y});
    if ((layout.rows > 1 || layout.cols > 1) && spec.hbm.gap > 0.0) {
        feature = std::min(feature, spec.hbm.gap);
    }
    if (target_cell > feature) {
        throw RefinementError("voxelize: cell size " + std::to_string(target_cell * 1e6) +
                                  " um exceeds smallest feature " + std::to_string(feature * 1e6) +
                                  " um; try " + std::to_string(0.5 * feature * 1e6) + " um",
                              0.5 * feature);
    }

    std::vector<double> bx{0.0, spec.footprint_x, gpu_die.x0, gpu_die.x1};
    std::vector<double> by{0.0, spec.footprint_y, gpu_die.y0, gpu_die.y1};
    for (const Rect& d : layout.dies) {
        bx.push_back(d.x0);
        bx.push_back(d.x1);
        by.push_back(d.y0);
        by.push_back(d.y1);
    }

    VoxelModel v;
    v.x_edges = detail::subdivide(std::move(bx), target_cell);
    v.y_edges = detail::subdivide(std::move(by), target_cell);
    v.nx = static_cast<int>(v.x_edges.size()) - 1;
    v.ny = static_cast<int>(v.y_edges.size()) - 1;

    const std::vector<LayerSpec> layers = expand_stack(spec);
    v.z_edges.push_back(0.0);
    for (const auto& l : layers) {
        const double z0 = v.z_edges.back();
        const int k0 = static_cast<int>(v.z_edges.size()) - 1;
        for (int s = 1; s <= cells_per_layer; ++s) {
            v.z_edges.push_back(s == cells_per_layer ? z0 + l.thickness
                                                     : z0 + l.thickness * static_cast<double>(s) / cells_per_layer);
        }
        v.layers.push_back(LayerSlab{l.kind, k0, k0 + cells_per_layer, z0, v.z_edges.back()});
    }
    v.nz = static_cast<int>(v.z_edges.size()) - 1;

    v.h_top = spec.h_top;
    v.h_bottom = spec.h_bottom;
    v.t_ambient = spec.t_ambient;
    v.gpu_die = gpu_die;

    std::map<std::string, std::uint16_t> ids;
    auto material_id = [&](const std::string& name, std::optional<double> tsv) -> std::uint16_t {
        const double phi = tsv.value_or(0.0);
        const std::string key = name + "@" + std::to_string(phi);
        auto it = ids.find(key);
        if (it != ids.end()) {
            return it->second;
        }
        Material m = lib.get(name);
        if (phi > 0.0) {
            m = effective_tsv_medium(m, lib.get("copper"), phi);
        }
        const auto id = static_cast<std::uint16_t>(v.materials.size());
        v.materials.push_back(std::move(m));
        ids.emplace(key, id);
        return id;
    };

    const double q_gpu = spec.gpu_power() / (gpu_die.area() * spec.gpu.thickness);
    const double q_hbm = spec.hbm_power_per_die_w / (spec.hbm.die_x * spec.hbm.die_y * spec.hbm_tier.thickness);

    v.material_id.assign(v.size(), 0);
    v.power_density.assign(v.size(), 0.0);
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const LayerSpec& l = layers[li];
        const LayerSlab& slab = v.layers[li];
        const std::uint16_t base = material_id(l.material, l.tsv_fraction);
        std::uint16_t fill = base;
        if (l.kind == LayerKind::hbm_tier) {
            fill = material_id(spec.hbm_fill, l.tsv_fraction);
        } else if (l.kind == LayerKind::gpu) {
            fill = material_id(spec.gpu_fill, std::nullopt);
        }
        for (int j = 0; j < v.ny; ++j) {
            for (int i = 0; i < v.nx; ++i) {
                const double x = v.xc(i);
                const double y = v.yc(j);
                std::uint16_t id = base;
                double q = 0.0;
                if (l.kind == LayerKind::gpu) {
                    const bool inside = gpu_die.contains(x, y);
                    id = inside ? base : fill;
                    q = inside ? q_gpu : 0.0;
                } else if (l.kind == LayerKind::hbm_tier) {
                    const bool inside = std::any_of(layout.dies.begin(), layout.dies.end(),
                                                    [&](const Rect& d) { return d.contains(x, y); });
                    id = inside ? base : fill;
                    q = inside ? q_hbm : 0.0;
                }
                for (int k = slab.k_begin; k < slab.k_end; ++k) {
                    const std::size_t c = v.index(i, j, k);
                    v.material_id[c] = id;
                    v.power_density[c] = q;
                }
            }
        }
    }
    return v;
}

} // namespace hbmtherm
