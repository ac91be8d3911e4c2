#pragma once

#include "hbmtherm/error.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace hbmtherm {

/// Temperature-independent thermophysical record. Conductivity is a diagonal
/// tensor aligned with the package axes (z = stacking direction).
struct Material {
    std::string name;
    double k_xx = 0.0; // W/(m K)
    double k_yy = 0.0;
    double k_zz = 0.0;
    double density = 0.0; // kg/m^3
    double cp = 0.0;      // J/(kg K)
    double cte = 0.0;     // 1/K, stored only

    [[nodiscard]] bool isotropic() const noexcept { return k_xx == k_yy && k_yy == k_zz; }

    /// Volumetric heat capacity, J/(m^3 K).
    [[nodiscard]] double heat_capacity() const noexcept { return density * cp; }

    /// Conductivity along axis 0 (x), 1 (y) or 2 (z).
    [[nodiscard]] double k_axis(int axis) const noexcept
    {
        return axis == 0 ? k_xx : (axis == 1 ? k_yy : k_zz);
    }

    bool operator==(const Material&) const = default;
};

inline Material isotropic_material(std::string name, double k, double density, double cp, double cte)
{
    return Material{std::move(name), k, k, k, density, cp, cte};
}

/// Throws ValidationError if any conductivity, the density or cp is not strictly positive.
inline void validate(const Material& m)
{
    auto positive = [&](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError("material '" + m.name + "': " + field + " must be positive and finite");
        }
    };
    positive(m.k_xx, "k_xx");
    positive(m.k_yy, "k_yy");
    positive(m.k_zz, "k_zz");
    positive(m.density, "density");
    positive(m.cp, "cp");
}

/// Homogenized medium for a matrix pierced by vertical vias at the given volume fraction.
///
/// Along the via axis the constituents conduct in parallel. In-plane the vias
/// are treated as dispersed inclusions (Maxwell-Eucken). Density is mixed by
/// volume and cp by mass, which makes the volumetric heat capacity an exact
/// volume average.
inline Material effective_tsv_medium(const Material& matrix, const Material& via, double volume_fraction)
{
    const double phi = volume_fraction;
    if (!(phi >= 0.0 && phi <= 1.0)) {
        throw DomainError("TSV volume fraction must lie in [0, 1]");
    }
    if (phi == 0.0) {
        return matrix;
    }
    if (phi == 1.0) {
        return via;
    }
    auto maxwell_eucken = [phi](double km, double kv) {
        return km * (kv * (1.0 + phi) + km * (1.0 - phi)) / (kv * (1.0 - phi) + km * (1.0 + phi));
    };
    Material out;
    out.name = matrix.name + "+" + via.name;
    out.k_xx = maxwell_eucken(matrix.k_xx, via.k_xx);
    out.k_yy = maxwell_eucken(matrix.k_yy, via.k_yy);
    out.k_zz = phi * via.k_zz + (1.0 - phi) * matrix.k_zz;
    out.density = phi * via.density + (1.0 - phi) * matrix.density;
    out.cp = (phi * via.heat_capacity() + (1.0 - phi) * matrix.heat_capacity()) / out.density;
    out.cte = phi * via.cte + (1.0 - phi) * matrix.cte;
    return out;
}

/// Default via fill and volume fraction used for the prebuilt tsv_region_* entries.
inline constexpr double kDefaultTsvFraction = 0.05;

/// Name-keyed material table. Immutable once handed to a solver.
class MaterialLibrary {
public:
    /// Inserts or replaces a material.
    void set(Material m)
    {
        validate(m);
        auto key = m.name;
        materials_.insert_or_assign(std::move(key), std::move(m));
    }

    [[nodiscard]] bool contains(const std::string& name) const { return materials_.count(name) != 0; }

    [[nodiscard]] const Material& get(const std::string& name) const
    {
        auto it = materials_.find(name);
        if (it == materials_.end()) {
            throw ValidationError("unknown material '" + name + "'");
        }
        return it->second;
    }

    [[nodiscard]] std::vector<std::string> names() const
    {
        std::vector<std::string> out;
        out.reserve(materials_.size());
        for (const auto& [name, m] : materials_) {
            out.push_back(name);
        }
        return out;
    }

    [[nodiscard]] std::size_t size() const noexcept { return materials_.size(); }

    [[nodiscard]] auto begin() const { return materials_.begin(); }
    [[nodiscard]] auto end() const { return materials_.end(); }

    bool operator==(const MaterialLibrary&) const = default;

private:
    std::map<std::string, Material> materials_;
};

/// Built-in materials. h-BN and Si follow the measured property table
/// (Si conductivity at the middle of its 130-150 band, h-BN through-plane at
/// the top of its 2-20 band); the rest are handbook defaults.
inline MaterialLibrary builtin_library()
{
    MaterialLibrary lib;
    lib.set(Material{"hbn", 751.0, 751.0, 20.0, 2100.0, 800.0, 2.5e-6});
    lib.set(isotropic_material("silicon", 140.0, 2329.0, 700.0, 2.6e-6));
    lib.set(isotropic_material("copper", 400.0, 8960.0, 385.0, 16.5e-6));
    lib.set(isotropic_material("tim", 5.0, 2500.0, 1000.0, 30e-6));
    lib.set(isotropic_material("mold", 1.0, 1900.0, 900.0, 10e-6));
    lib.set(isotropic_material("organic_substrate", 0.5, 1850.0, 1000.0, 17e-6));

    const Material& cu = lib.get("copper");
    for (const char* host : {"silicon", "hbn", "mold"}) {
        Material m = effective_tsv_medium(lib.get(host), cu, kDefaultTsvFraction);
        m.name = std::string("tsv_region_") + host;
        lib.set(std::move(m));
    }
    return lib;
}

} // namespace hbmtherm
