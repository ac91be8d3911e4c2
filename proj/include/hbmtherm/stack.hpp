#pragma once

#include "hbmtherm/error.hpp"
#include "hbmtherm/materials.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hbmtherm {

enum class LayerKind { substrate, hbm_tier, interposer, gpu, tim, heat_sink };

inline std::string_view to_string(LayerKind kind)
{
    switch (kind) {
    case LayerKind::substrate: return "substrate";
    case LayerKind::hbm_tier: return "hbm_tier";
    case LayerKind::interposer: return "interposer";
    case LayerKind::gpu: return "gpu";
    case LayerKind::tim: return "tim";
    case LayerKind::heat_sink: return "heat_sink";
    }
    return "?";
}

struct LayerSpec {
    LayerKind kind = LayerKind::substrate;
    double thickness = 0.0; // m
    std::string material;
    std::optional<double> tsv_fraction;

    bool operator==(const LayerSpec&) const = default;
};

/// How the HBM dies are split into vertical tiers.
struct HbmDistribution {
    int total_dies = 20;
    int dies_per_layer = 5;
    int n_layers = 4;
    double die_x = 3.6e-3; // m
    double die_y = 4.75e-3;
    double gap = 1.0e-3;

    bool operator==(const HbmDistribution&) const = default;
};

/// Axis-aligned rectangle in footprint coordinates (m).
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    [[nodiscard]] double width() const noexcept { return x1 - x0; }
    [[nodiscard]] double height() const noexcept { return y1 - y0; }
    [[nodiscard]] double area() const noexcept { return width() * height(); }
    [[nodiscard]] bool contains(double x, double y) const noexcept
    {
        return x >= x0 && x <= x1 && y >= y0 && y <= y1;
    }
    [[nodiscard]] bool overlaps(const Rect& o) const noexcept
    {
        return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
    }

    bool operator==(const Rect&) const = default;
};

/// Declarative package description. Lengths in m, powers in W, h in W/(m^2 K).
///
/// Defaults describe a 24 x 24 mm package with a 16 x 16 mm GPU die at
/// 100 W/cm^2 over 20 HBM dies arranged 5 per tier in 4 tiers.
struct StackSpec {
    double footprint_x = 24e-3;
    double footprint_y = 24e-3;

    LayerSpec substrate{LayerKind::substrate, 1.0e-3, "organic_substrate", std::nullopt};
    LayerSpec hbm_tier{LayerKind::hbm_tier, 0.3e-3, "silicon", kDefaultTsvFraction};
    std::string hbm_fill = "mold";
    HbmDistribution hbm;
    double hbm_power_per_die_w = 1.0;

    std::string interposer_material = "hbn";
    double interposer_thickness = 300e-6;
    std::optional<double> interposer_tsv_fraction = kDefaultTsvFraction;

    LayerSpec gpu{LayerKind::gpu, 0.5e-3, "silicon", std::nullopt};
    double gpu_die_x = 16e-3;
    double gpu_die_y = 16e-3;
    std::string gpu_fill = "mold";
    std::optional<double> gpu_power_w;
    std::optional<double> gpu_power_density_w_cm2 = 100.0;

    LayerSpec tim{LayerKind::tim, 50e-6, "tim", std::nullopt};
    LayerSpec heat_sink{LayerKind::heat_sink, 0.5e-3, "copper", std::nullopt};

    double h_top = 250.0;
    double h_bottom = 10.0;
    double t_ambient = 298.15; // K

    /// GPU die rectangle, centered in the footprint.
    [[nodiscard]] Rect gpu_die() const noexcept
    {
        const double x0 = 0.5 * (footprint_x - gpu_die_x);
        const double y0 = 0.5 * (footprint_y - gpu_die_y);
        return Rect{x0, y0, x0 + gpu_die_x, y0 + gpu_die_y};
    }

    /// Total GPU power in W, whichever of TDP or areal density is configured.
    [[nodiscard]] double gpu_power() const
    {
        if (gpu_power_w) {
            return *gpu_power_w;
        }
        if (gpu_power_density_w_cm2) {
            return *gpu_power_density_w_cm2 * 1e4 * gpu_die_x * gpu_die_y;
        }
        throw ValidationError("gpu power: neither tdp_w nor power_density_w_cm2 is set");
    }

    [[nodiscard]] double total_power() const
    {
        return gpu_power() + hbm_power_per_die_w * hbm.total_dies;
    }

    /// Sets a TDP and clears any areal density.
    void set_gpu_tdp(double watts)
    {
        gpu_power_w = watts;
        gpu_power_density_w_cm2.reset();
    }

    bool operator==(const StackSpec&) const = default;
};

/// Placement of one tier's dies.
struct HbmLayout {
    int rows = 0; // along y
    int cols = 0; // along x
    std::vector<Rect> dies;
};

/// Places dies_per_layer dies on a rows x cols grid centered in the footprint,
/// with rows the largest divisor not exceeding sqrt(dies_per_layer).
inline HbmLayout hbm_layout(int dies_per_layer, double footprint_x, double footprint_y, double die_x,
                            double die_y, double gap)
{
    if (dies_per_layer < 1) {
        throw DomainError("hbm_layout: dies_per_layer must be >= 1");
    }
    HbmLayout out;
    out.rows = 1;
    for (int d = 1; static_cast<long long>(d) * d <= dies_per_layer; ++d) {
        if (dies_per_layer % d == 0) {
            out.rows = d;
        }
    }
    out.cols = dies_per_layer / out.rows;

    const double width = out.cols * die_x + (out.cols - 1) * gap;
    const double height = out.rows * die_y + (out.rows - 1) * gap;
    if (width > footprint_x) {
        throw GeometryError("hbm_layout: " + std::to_string(out.cols) + " dies along x need " +
                            std::to_string(width * 1e3) + " mm but footprint x is " +
                            std::to_string(footprint_x * 1e3) + " mm");
    }
    if (height > footprint_y) {
        throw GeometryError("hbm_layout: " + std::to_string(out.rows) + " dies along y need " +
                            std::to_string(height * 1e3) + " mm but footprint y is " +
                            std::to_string(footprint_y * 1e3) + " mm");
    }
    const double x_start = 0.5 * (footprint_x - width);
    const double y_start = 0.5 * (footprint_y - height);
    out.dies.reserve(static_cast<std::size_t>(dies_per_layer));
    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            const double x0 = x_start + c * (die_x + gap);
            const double y0 = y_start + r * (die_y + gap);
            out.dies.push_back(Rect{x0, y0, x0 + die_x, y0 + die_y});
        }
    }
    return out;
}

inline HbmLayout hbm_layout(const StackSpec& spec)
{
    return hbm_layout(spec.hbm.dies_per_layer, spec.footprint_x, spec.footprint_y, spec.hbm.die_x,
                      spec.hbm.die_y, spec.hbm.gap);
}

/// Checks the hard invariants of a stack description and returns soft warnings.
inline std::vector<std::string> validate(const StackSpec& spec)
{
    auto positive = [](double v, const std::string& what) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError(what + " must be positive");
        }
    };
    auto fraction = [](const std::optional<double>& f, const std::string& what) {
        if (f && !(*f >= 0.0 && *f <= 1.0)) {
            throw ValidationError(what + " must lie in [0, 1]");
        }
    };
    positive(spec.footprint_x, "footprint_x");
    positive(spec.footprint_y, "footprint_y");
    for (const LayerSpec* l : {&spec.substrate, &spec.hbm_tier, &spec.gpu, &spec.tim, &spec.heat_sink}) {
        positive(l->thickness, std::string(to_string(l->kind)) + " thickness");
        fraction(l->tsv_fraction, std::string(to_string(l->kind)) + " tsv_fraction");
    }
    positive(spec.interposer_thickness, "interposer thickness");
    fraction(spec.interposer_tsv_fraction, "interposer tsv_fraction");
    positive(spec.gpu_die_x, "gpu die x");
    positive(spec.gpu_die_y, "gpu die y");
    if (spec.gpu_die_x > spec.footprint_x || spec.gpu_die_y > spec.footprint_y) {
        throw ValidationError("gpu die does not fit the footprint");
    }
    positive(spec.h_bottom, "h_bottom");
    positive(spec.h_top, "h_top");
    positive(spec.t_ambient, "t_ambient");
    if (spec.gpu_power_w.has_value() == spec.gpu_power_density_w_cm2.has_value()) {
        throw ValidationError("exactly one of gpu tdp_w / power_density_w_cm2 must be set");
    }
    if (spec.gpu_power() < 0.0 || spec.hbm_power_per_die_w < 0.0) {
        throw ValidationError("powers must be non-negative");
    }

    const auto& h = spec.hbm;
    if (h.total_dies < 1 || h.dies_per_layer < 1 || h.n_layers < 1) {
        throw ValidationError("hbm counts must be >= 1");
    }
    if (h.dies_per_layer * h.n_layers != h.total_dies) {
        throw ValidationError("hbm distribution: per_layer " + std::to_string(h.dies_per_layer) + " x " +
                              std::to_string(h.n_layers) + " layers != total " + std::to_string(h.total_dies));
    }
    positive(h.die_x, "hbm die x");
    positive(h.die_y, "hbm die y");
    if (h.gap < 0.0) {
        throw ValidationError("hbm gap must be non-negative");
    }
    try {
        (void)hbm_layout(spec);
    } catch (const GeometryError& e) {
        throw ValidationError(e.what());
    }

    std::vector<std::string> warnings;
    if (spec.h_top < 150.0 || spec.h_top > 350.0) {
        warnings.push_back("h_top " + std::to_string(spec.h_top) +
                           " W/(m^2 K) is outside the forced-convection band [150, 350]");
    }
    return warnings;
}

/// Concrete bottom-to-top layer list: substrate, one (hbm_tier, interposer)
/// pair per tier, then gpu, tim, heat_sink.
inline std::vector<LayerSpec> expand_stack(const StackSpec& spec)
{
    const auto& h = spec.hbm;
    if (h.dies_per_layer < 1 || h.n_layers < 1 || h.dies_per_layer * h.n_layers != h.total_dies) {
        throw ValidationError("hbm distribution: per_layer x n_layers must equal total");
    }
    std::vector<LayerSpec> layers;
    layers.reserve(static_cast<std::size_t>(4 + 2 * h.n_layers));
    layers.push_back(spec.substrate);
    for (int i = 0; i < h.n_layers; ++i) {
        layers.push_back(spec.hbm_tier);
        layers.push_back(LayerSpec{LayerKind::interposer, spec.interposer_thickness, spec.interposer_material,
                                   spec.interposer_tsv_fraction});
    }
    layers.push_back(spec.gpu);
    layers.push_back(spec.tim);
    layers.push_back(spec.heat_sink);
    return layers;
}

inline double stack_thickness(const std::vector<LayerSpec>& layers)
{
    double t = 0.0;
    for (const auto& l : layers) {
        t += l.thickness;
    }
    return t;
}

} // namespace hbmtherm
