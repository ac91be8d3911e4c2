#pragma once

#include "hbmtherm/analysis.hpp"
#include "hbmtherm/error.hpp"
#include "hbmtherm/materials.hpp"
#include "hbmtherm/solve.hpp"
#include "hbmtherm/stack.hpp"
#include "hbmtherm/voxel.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace hbmtherm {

enum class SweepFamily { hbm_distribution, interposer_thickness, tdp_transient };

inline std::string_view to_string(SweepFamily f)
{
    switch (f) {
    case SweepFamily::hbm_distribution: return "hbm_distribution";
    case SweepFamily::interposer_thickness: return "interposer_thickness";
    case SweepFamily::tdp_transient: return "tdp_transient";
    }
    return "?";
}

struct GridOptions {
    double cell = 250e-6; // in-plane target, m
    int cells_per_layer = 2;

    bool operator==(const GridOptions&) const = default;
};

inline std::vector<double> default_thicknesses()
{
    return {50e-6, 100e-6, 150e-6, 200e-6, 250e-6, 300e-6, 400e-6, 500e-6};
}

struct SweepSpec {
    StackSpec base;
    SweepFamily family = SweepFamily::hbm_distribution;
    int total_dies = 20;
    std::vector<double> thicknesses = default_thicknesses(); // m
    std::vector<std::string> materials{"silicon", "hbn"};
    std::vector<double> tdps{100.0, 200.0, 300.0}; // W
    bool transient = true; // tdp family only; false runs steady solves
    int parallelism = 1;

    GridOptions grid;
    SolverOptions solver;
    TransientSchedule schedule;
    double hotspot_band = kDefaultHotspotBand;

    bool operator==(const SweepSpec&) const = default;
};

struct SweepCase {
    std::string label;
    StackSpec spec;
    bool transient = false;
};

/// Every (dies_per_layer, n_layers) factorization of total, dies_per_layer descending.
inline std::vector<std::pair<int, int>> fig2_family(int total = 20)
{
    if (total < 1) {
        throw DomainError("fig2_family: total must be >= 1");
    }
    std::vector<std::pair<int, int>> out;
    for (int d = total; d >= 1; --d) {
        if (total % d == 0) {
            out.emplace_back(d, total / d);
        }
    }
    return out;
}

inline std::vector<SweepCase> hbm_distribution_family(const StackSpec& base, int total = 20)
{
    std::vector<SweepCase> out;
    for (auto [d, l] : fig2_family(total)) {
        SweepCase c;
        c.spec = base;
        c.spec.hbm.total_dies = total;
        c.spec.hbm.dies_per_layer = d;
        c.spec.hbm.n_layers = l;
        c.label = "hbm_" + std::to_string(d) + "x" + std::to_string(l);
        out.push_back(std::move(c));
    }
    return out;
}

namespace detail {

inline void use_optimal_layout(StackSpec& s)
{
    s.hbm.total_dies = 20;
    s.hbm.dies_per_layer = 5;
    s.hbm.n_layers = 4;
}

inline std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace detail

/// One case per interposer thickness (m) on the 5-per-tier x 4-tier layout, in the given order.
inline std::vector<SweepCase> thickness_family(const StackSpec& base, const std::vector<double>& values)
{
    if (values.empty()) {
        throw DomainError("thickness_family: empty thickness list");
    }
    std::vector<SweepCase> out;
    for (double t : values) {
        if (!(t > 0.0)) {
            throw DomainError("thickness_family: thickness must be positive");
        }
        SweepCase c;
        c.spec = base;
        detail::use_optimal_layout(c.spec);
        c.spec.interposer_thickness = t;
        c.label = c.spec.interposer_material + "_t" + detail::format_number(t * 1e6) + "um";
        out.push_back(std::move(c));
    }
    return out;
}

/// Material x TDP cross product at 300 um on the 5 x 4 layout.
inline std::vector<SweepCase> tdp_transient_family(const StackSpec& base, const std::vector<std::string>& materials,
                                                   const std::vector<double>& tdps, bool transient = true)
{
    if (materials.empty() || tdps.empty()) {
        throw DomainError("tdp_transient_family: materials and tdps must be non-empty");
    }
    std::vector<SweepCase> out;
    for (const auto& m : materials) {
        for (double p : tdps) {
            SweepCase c;
            c.spec = base;
            detail::use_optimal_layout(c.spec);
            c.spec.interposer_thickness = 300e-6;
            c.spec.interposer_material = m;
            c.spec.set_gpu_tdp(p);
            c.transient = transient;
            c.label = m + "_tdp" + detail::format_number(p) + "W";
            out.push_back(std::move(c));
        }
    }
    return out;
}

inline std::vector<SweepCase> generate_cases(const SweepSpec& s)
{
    switch (s.family) {
    case SweepFamily::hbm_distribution: return hbm_distribution_family(s.base, s.total_dies);
    case SweepFamily::interposer_thickness: return thickness_family(s.base, s.thicknesses);
    case SweepFamily::tdp_transient: return tdp_transient_family(s.base, s.materials, s.tdps, s.transient);
    }
    return {};
}

struct CaseResult {
    std::string label;
    int dies_per_layer = 0;
    int n_layers = 0;
    std::string interposer_material;
    double thickness_um = 0.0;
    double tdp_w = 0.0;

    bool ok = false;
    std::string error;

    double t_max = std::numeric_limits<double>::quiet_NaN();
    double hotspot_area = std::numeric_limits<double>::quiet_NaN(); // m^2
    double resistance = std::numeric_limits<double>::quiet_NaN();   // K/W
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std = std::numeric_limits<double>::quiet_NaN();
    long long iterations = 0;
    double wall_ms = 0.0;

    std::vector<double> trace_times; // transient cases only
    std::vector<double> trace_gpu_max;
};

struct SweepReport {
    SweepFamily family = SweepFamily::hbm_distribution;
    std::vector<CaseResult> rows;

    [[nodiscard]] bool any_failed() const
    {
        return std::any_of(rows.begin(), rows.end(), [](const CaseResult& r) { return !r.ok; });
    }
};

/// Voxelizes, solves and measures one case. Errors are recorded, not thrown.
inline CaseResult run_case(const SweepCase& c, const MaterialLibrary& lib, const GridOptions& grid,
                           const SolverOptions& solver, const TransientSchedule& schedule,
                           double band = kDefaultHotspotBand)
{
    const auto start = std::chrono::steady_clock::now();
    CaseResult r;
    r.label = c.label;
    r.dies_per_layer = c.spec.hbm.dies_per_layer;
    r.n_layers = c.spec.hbm.n_layers;
    r.interposer_material = c.spec.interposer_material;
    r.thickness_um = c.spec.interposer_thickness * 1e6;
    try {
        r.tdp_w = c.spec.gpu_power();
        const VoxelModel model = voxelize(c.spec, lib, grid.cell, grid.cells_per_layer);
        TemperatureField field;
        if (c.transient) {
            TransientSchedule sched = schedule;
            TransientResult tr = run_transient(model, sched, solver);
            field = std::move(tr.final_field);
            r.iterations = tr.total_iterations;
            const int stride = std::max(1, sched.sample_stride);
            for (std::size_t s = 0; s < tr.times.size(); ++s) {
                if (s % stride == 0 || s + 1 == tr.times.size()) {
                    r.trace_times.push_back(tr.times[s]);
                    r.trace_gpu_max.push_back(tr.gpu_max[s]);
                }
            }
        } else {
            field = solve_steady(model, solver);
            r.iterations = field.iterations;
        }
        const std::vector<std::size_t> gpu = model.gpu_cells();
        const HotspotReport hs = hotspot(field, model, gpu, band);
        const UniformityStats u = uniformity(field, model, gpu);
        r.t_max = hs.t_max;
        r.hotspot_area = hs.area;
        r.resistance = thermal_resistance(hs.t_max, model.total_power(), model.t_ambient);
        r.mean = u.mean;
        r.std = u.std;
        r.ok = true;
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

/// Runs every case of the family on up to `parallelism` threads. Rows keep
/// generation order; a failed case does not stop the others.
inline SweepReport run_sweep(const SweepSpec& spec, const MaterialLibrary& lib)
{
    const std::vector<SweepCase> cases = generate_cases(spec);
    SweepReport report;
    report.family = spec.family;
    report.rows.resize(cases.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cases.size(); i = next++) {
            report.rows[i] = run_case(cases[i], lib, spec.grid, spec.solver, spec.schedule, spec.hotspot_band);
        }
    };
    const std::size_t threads =
        std::min<std::size_t>(cases.size(), static_cast<std::size_t>(std::max(1, spec.parallelism)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    return report;
}

} // namespace hbmtherm
