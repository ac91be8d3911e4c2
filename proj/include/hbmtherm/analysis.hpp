#pragma once

#include "hbmtherm/error.hpp"
#include "hbmtherm/materials.hpp"
#include "hbmtherm/solve.hpp"
#include "hbmtherm/stack.hpp"
#include "hbmtherm/voxel.hpp"

#include <cmath>
#include <span>
#include <unordered_set>
#include <vector>

namespace hbmtherm {

inline constexpr double kDefaultHotspotBand = 5.0; // K

struct HotspotReport {
    double t_max = 0.0; // K
    int i = 0;
    int j = 0;
    int k = 0;
    std::size_t cell = 0;
    double area = 0.0; // m^2
    double band = kDefaultHotspotBand;
};

/// Peak temperature over a region and the footprint area within `band` of it.
/// A column counts once toward the area however many of its cells qualify.
/// Ties resolve to the smallest linear index.
inline HotspotReport hotspot(const TemperatureField& field, const VoxelModel& model,
                             std::span<const std::size_t> region, double band = kDefaultHotspotBand)
{
    if (region.empty()) {
        throw DomainError("hotspot: empty region");
    }
    HotspotReport r;
    r.band = band;
    r.cell = region[0];
    r.t_max = field.t[region[0]];
    for (std::size_t c : region) {
        const double t = field.t[c];
        if (t > r.t_max || (t == r.t_max && c < r.cell)) {
            r.t_max = t;
            r.cell = c;
        }
    }
    const std::size_t plane = static_cast<std::size_t>(model.nx) * model.ny;
    r.k = static_cast<int>(r.cell / plane);
    r.j = static_cast<int>((r.cell % plane) / model.nx);
    r.i = static_cast<int>(r.cell % model.nx);

    std::unordered_set<std::size_t> hot_columns;
    for (std::size_t c : region) {
        if (field.t[c] >= r.t_max - band) {
            hot_columns.insert(c % plane);
        }
    }
    for (std::size_t col : hot_columns) {
        const int i = static_cast<int>(col % model.nx);
        const int j = static_cast<int>(col / model.nx);
        r.area += model.dx(i) * model.dy(j);
    }
    return r;
}

/// (t_max - t_e) / P, K/W.
inline double thermal_resistance(double t_max, double total_power, double t_e)
{
    if (!(total_power > 0.0)) {
        throw DomainError("thermal_resistance: total power must be positive");
    }
    return (t_max - t_e) / total_power;
}

inline double thermal_resistance(const TemperatureField& field, double total_power, double t_e)
{
    return thermal_resistance(field.max(), total_power, t_e);
}

struct UniformityStats {
    double mean = 0.0;
    double std = 0.0;
    double range = 0.0; // max - min
};

/// Footprint-area-weighted statistics over a region.
inline UniformityStats uniformity(const TemperatureField& field, const VoxelModel& model,
                                  std::span<const std::size_t> region)
{
    if (region.empty()) {
        throw DomainError("uniformity: empty region");
    }
    const std::size_t plane = static_cast<std::size_t>(model.nx) * model.ny;
    double wsum = 0.0;
    double sum = 0.0;
    double lo = field.t[region[0]];
    double hi = lo;
    for (std::size_t c : region) {
        const std::size_t col = c % plane;
        const double w = model.dx(static_cast<int>(col % model.nx)) * model.dy(static_cast<int>(col / model.nx));
        wsum += w;
        sum += w * field.t[c];
        lo = std::min(lo, field.t[c]);
        hi = std::max(hi, field.t[c]);
    }
    UniformityStats s;
    s.mean = sum / wsum;
    double var = 0.0;
    for (std::size_t c : region) {
        const std::size_t col = c % plane;
        const double w = model.dx(static_cast<int>(col % model.nx)) * model.dy(static_cast<int>(col / model.nx));
        const double d = field.t[c] - s.mean;
        var += w * d * d;
    }
    s.std = std::sqrt(var / wsum);
    s.range = hi - lo;
    return s;
}

/// Default temperature scale of the leakage estimator, K. Chosen so a 20 K
/// drop maps to a 22 % leakage reduction.
inline constexpr double kDefaultLeakageTheta = 80.5;

/// Fractional leakage reduction for a junction temperature drop, single-exponential model.
inline double leakage_reduction(double delta_t, double theta = kDefaultLeakageTheta)
{
    if (!(theta > 0.0)) {
        throw DomainError("leakage_reduction: theta must be positive");
    }
    return 1.0 - std::exp(-delta_t / theta);
}

struct EffectiveConductivity {
    double k_eff_z = 0.0;       // series, W/(m K)
    double k_eff_inplane = 0.0; // parallel
};

/// Through-stack (series) and in-plane (parallel) conductivity of a layer list,
/// using each layer's nominal material with its TSV fill applied.
inline EffectiveConductivity effective_k(const std::vector<LayerSpec>& layers, const MaterialLibrary& lib)
{
    double total = 0.0;
    double resistance = 0.0;
    double sheet = 0.0;
    for (const auto& l : layers) {
        Material m = lib.get(l.material);
        if (l.tsv_fraction && *l.tsv_fraction > 0.0) {
            m = effective_tsv_medium(m, lib.get("copper"), *l.tsv_fraction);
        }
        total += l.thickness;
        resistance += l.thickness / m.k_zz;
        sheet += l.thickness * m.k_xx;
    }
    if (!(total > 0.0)) {
        throw DomainError("effective_k: empty stack");
    }
    return EffectiveConductivity{total / resistance, sheet / total};
}

struct ScalingEstimate {
    double power_density = 0.0; // W/m^3
    double length = 0.0;        // m
    double k_eff = 0.0;         // W/(m K)
    double calibration = 1.0;
    double delta_t_est = 0.0; // K
};

/// delta_T ~ c q L^2 / k_eff. Meaningful only as a ratio between configurations.
inline ScalingEstimate scaling_estimate(double power_density, double length, double k_eff, double calibration = 1.0)
{
    if (!(power_density > 0.0 && length > 0.0 && k_eff > 0.0 && calibration > 0.0)) {
        throw DomainError("scaling_estimate: inputs must be positive");
    }
    return ScalingEstimate{power_density, length, k_eff, calibration,
                           calibration * power_density * length * length / k_eff};
}

} // namespace hbmtherm
