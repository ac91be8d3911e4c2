#pragma once

// JSON run configuration. Units are SI unless the key names one
// (thickness_um, footprint_mm, tdp_w, ...). Unknown keys are rejected.

#include "hbmtherm/error.hpp"
#include "hbmtherm/materials.hpp"
#include "hbmtherm/solve.hpp"
#include "hbmtherm/stack.hpp"
#include "hbmtherm/sweep.hpp"

#include "json.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hbmtherm {

struct SweepSettings {
    SweepFamily family = SweepFamily::hbm_distribution;
    int total = 20;
    std::vector<double> thicknesses = default_thicknesses(); // m
    std::vector<std::string> materials{"silicon", "hbn"};
    std::vector<double> tdps{100.0, 200.0, 300.0};
    bool transient = true;

    bool operator==(const SweepSettings&) const = default;
};

struct RunConfig {
    StackSpec stack;
    std::map<std::string, Material> material_overrides;
    GridOptions grid;
    SolverOptions solver;
    TransientSchedule transient;
    std::optional<SweepSettings> sweep;
    std::string out_dir = "out";

    /// Built-in materials with the config's overrides applied.
    [[nodiscard]] MaterialLibrary library() const
    {
        MaterialLibrary lib = builtin_library();
        for (const auto& [name, m] : material_overrides) {
            lib.set(m);
        }
        return lib;
    }

    [[nodiscard]] SweepSpec sweep_spec(int parallelism = 1) const
    {
        SweepSpec s;
        s.base = stack;
        if (sweep) {
            s.family = sweep->family;
            s.total_dies = sweep->total;
            s.thicknesses = sweep->thicknesses;
            s.materials = sweep->materials;
            s.tdps = sweep->tdps;
            s.transient = sweep->transient;
        }
        s.parallelism = parallelism;
        s.grid = grid;
        s.solver = solver;
        s.schedule = transient;
        return s;
    }

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

using nlohmann::json;

/// Reads keys of one JSON object and rejects any it was not asked about.
class StrictObject {
public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) {
            throw ConfigError(where() + " must be an object");
        }
    }

    [[nodiscard]] bool has(const std::string& key)
    {
        seen_.insert(key);
        return j_.contains(key);
    }

    template <class T>
    std::optional<T> get(const std::string& key)
    {
        if (!has(key)) {
            return std::nullopt;
        }
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(qualified(key) + ": wrong type");
        }
    }

    template <class T>
    void read(const std::string& key, T& into)
    {
        if (auto v = get<T>(key)) {
            into = *v;
        }
    }

    /// Reads a value given in unit `scale` (e.g. 1e-6 for um) into SI.
    void read_scaled(const std::string& key, double& into, double scale)
    {
        if (auto v = get<double>(key)) {
            into = *v * scale;
        }
    }

    [[nodiscard]] const json& at(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items()) {
            if (seen_.count(key) == 0) {
                throw ConfigError("unknown key '" + key + "' in " + where());
            }
        }
    }

    [[nodiscard]] std::string qualified(const std::string& key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    [[nodiscard]] std::string where() const { return path_.empty() ? "config root" : "'" + path_ + "'"; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void read_pair_mm(StrictObject& o, const std::string& key, double& x, double& y)
{
    if (auto v = o.get<std::vector<double>>(key)) {
        if (v->size() != 2) {
            throw ConfigError(o.qualified(key) + ": expected [x, y]");
        }
        x = (*v)[0] * 1e-3;
        y = (*v)[1] * 1e-3;
    }
}

inline void read_layer(const json& j, const std::string& path, LayerSpec& layer)
{
    StrictObject o(j, path);
    o.read("material", layer.material);
    o.read_scaled("thickness_um", layer.thickness, 1e-6);
    if (o.has("tsv_fraction")) {
        if (o.at("tsv_fraction").is_null()) {
            layer.tsv_fraction.reset();
        } else {
            layer.tsv_fraction = o.get<double>("tsv_fraction");
        }
    }
    o.finish();
}

inline Material read_material(const json& j, const std::string& name, const MaterialLibrary& builtin)
{
    StrictObject o(j, "materials." + name);
    Material m;
    const bool known = builtin.contains(name);
    if (known) {
        m = builtin.get(name);
    }
    m.name = name;
    if (auto k = o.get<double>("k")) {
        m.k_xx = m.k_yy = m.k_zz = *k;
    }
    o.read("k_xx", m.k_xx);
    o.read("k_yy", m.k_yy);
    o.read("k_zz", m.k_zz);
    o.read("density", m.density);
    o.read("cp", m.cp);
    o.read("cte", m.cte);
    o.finish();
    try {
        validate(m);
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("materials.") + name + ": " + e.what() +
                          (known ? "" : " (new materials need k or k_xx/k_yy/k_zz, density and cp)"));
    }
    return m;
}

inline SweepFamily parse_family(const std::string& s)
{
    if (s == "hbm_distribution") {
        return SweepFamily::hbm_distribution;
    }
    if (s == "interposer_thickness") {
        return SweepFamily::interposer_thickness;
    }
    if (s == "tdp_transient") {
        return SweepFamily::tdp_transient;
    }
    throw ConfigError("sweep.family: unknown family '" + s + "'");
}

inline std::pair<int, int> line_column(std::string_view text, std::size_t byte)
{
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace detail

/// Parses a JSON run configuration, filling unspecified values with defaults.
inline RunConfig parse_config(std::string_view text)
{
    using detail::json;
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        auto [line, col] = detail::line_column(text, byte);
        throw ConfigError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                          e.what());
    }

    RunConfig cfg;
    StackSpec& s = cfg.stack;
    detail::StrictObject top(root, "");

    detail::read_pair_mm(top, "footprint_mm", s.footprint_x, s.footprint_y);

    if (top.has("substrate")) {
        detail::read_layer(top.at("substrate"), "substrate", s.substrate);
    }
    if (top.has("tim")) {
        detail::read_layer(top.at("tim"), "tim", s.tim);
    }
    if (top.has("heat_sink")) {
        detail::read_layer(top.at("heat_sink"), "heat_sink", s.heat_sink);
    }

    if (top.has("interposer")) {
        detail::StrictObject o(top.at("interposer"), "interposer");
        o.read("material", s.interposer_material);
        o.read_scaled("thickness_um", s.interposer_thickness, 1e-6);
        if (o.has("tsv_fraction")) {
            s.interposer_tsv_fraction =
                o.at("tsv_fraction").is_null() ? std::nullopt : o.get<double>("tsv_fraction");
        }
        o.finish();
    }

    if (top.has("hbm")) {
        detail::StrictObject o(top.at("hbm"), "hbm");
        auto total = o.get<int>("total");
        auto per_layer = o.get<int>("per_layer");
        if (total) {
            s.hbm.total_dies = *total;
        }
        if (per_layer) {
            s.hbm.dies_per_layer = *per_layer;
        }
        if (s.hbm.total_dies < 1) {
            throw ConfigError("hbm.total: must be >= 1");
        }
        if (s.hbm.dies_per_layer < 1 || s.hbm.total_dies % s.hbm.dies_per_layer != 0) {
            throw ConfigError("hbm.per_layer: " + std::to_string(s.hbm.dies_per_layer) + " does not divide total " +
                              std::to_string(s.hbm.total_dies));
        }
        s.hbm.n_layers = s.hbm.total_dies / s.hbm.dies_per_layer;
        detail::read_pair_mm(o, "die_mm", s.hbm.die_x, s.hbm.die_y);
        o.read_scaled("gap_mm", s.hbm.gap, 1e-3);
        o.read("power_per_die_w", s.hbm_power_per_die_w);
        o.read_scaled("thickness_um", s.hbm_tier.thickness, 1e-6);
        o.read("material", s.hbm_tier.material);
        o.read("fill", s.hbm_fill);
        if (o.has("tsv_fraction")) {
            s.hbm_tier.tsv_fraction = o.at("tsv_fraction").is_null() ? std::nullopt : o.get<double>("tsv_fraction");
        }
        o.finish();
    }

    if (top.has("gpu")) {
        detail::StrictObject o(top.at("gpu"), "gpu");
        auto tdp = o.get<double>("tdp_w");
        auto density = o.get<double>("power_density_w_cm2");
        if (tdp && density) {
            throw ConfigError("gpu: give only one of tdp_w and power_density_w_cm2");
        }
        if (tdp) {
            s.set_gpu_tdp(*tdp);
        } else if (density) {
            s.gpu_power_w.reset();
            s.gpu_power_density_w_cm2 = *density;
        }
        detail::read_pair_mm(o, "die_mm", s.gpu_die_x, s.gpu_die_y);
        o.read_scaled("thickness_um", s.gpu.thickness, 1e-6);
        o.read("material", s.gpu.material);
        o.read("fill", s.gpu_fill);
        o.finish();
    }

    if (top.has("boundary")) {
        detail::StrictObject o(top.at("boundary"), "boundary");
        o.read("h_top", s.h_top);
        o.read("h_bottom", s.h_bottom);
        o.read("t_ambient_K", s.t_ambient);
        o.finish();
    }

    if (top.has("grid")) {
        detail::StrictObject o(top.at("grid"), "grid");
        o.read_scaled("cell_um", cfg.grid.cell, 1e-6);
        o.read("cells_per_layer", cfg.grid.cells_per_layer);
        o.finish();
        if (!(cfg.grid.cell > 0.0)) {
            throw ConfigError("grid.cell_um: must be positive");
        }
        if (cfg.grid.cells_per_layer < 1) {
            throw ConfigError("grid.cells_per_layer: must be >= 1");
        }
    }

    if (top.has("solver")) {
        detail::StrictObject o(top.at("solver"), "solver");
        o.read("rel_tol", cfg.solver.rel_tol);
        o.read("max_iters", cfg.solver.max_iters);
        if (auto p = o.get<std::string>("preconditioner")) {
            if (*p == "jacobi") {
                cfg.solver.preconditioner = Preconditioner::jacobi;
            } else if (*p == "none") {
                cfg.solver.preconditioner = Preconditioner::none;
            } else {
                throw ConfigError("solver.preconditioner: expected 'jacobi' or 'none'");
            }
        }
        o.finish();
        if (!(cfg.solver.rel_tol > 0.0)) {
            throw ConfigError("solver.rel_tol: must be positive");
        }
        if (cfg.solver.max_iters < 0) {
            throw ConfigError("solver.max_iters: must be >= 1 (0 selects the default)");
        }
    }

    if (top.has("transient")) {
        detail::StrictObject o(top.at("transient"), "transient");
        o.read("dt_s", cfg.transient.dt);
        o.read("t_end_s", cfg.transient.t_end);
        if (o.has("t_initial_K")) {
            cfg.transient.t_initial =
                o.at("t_initial_K").is_null() ? std::nullopt : o.get<double>("t_initial_K");
        }
        o.read("sample_stride", cfg.transient.sample_stride);
        o.finish();
        if (!(cfg.transient.dt > 0.0) || !(cfg.transient.t_end >= cfg.transient.dt)) {
            throw ConfigError("transient: need dt_s > 0 and t_end_s >= dt_s");
        }
    }

    if (top.has("materials")) {
        const json& mats = top.at("materials");
        if (!mats.is_object()) {
            throw ConfigError("materials: must be an object");
        }
        const MaterialLibrary builtin = builtin_library();
        for (const auto& [name, value] : mats.items()) {
            cfg.material_overrides[name] = detail::read_material(value, name, builtin);
        }
    }

    if (top.has("sweep")) {
        detail::StrictObject o(top.at("sweep"), "sweep");
        SweepSettings sw;
        if (auto f = o.get<std::string>("family")) {
            sw.family = detail::parse_family(*f);
        } else {
            throw ConfigError("sweep.family: required");
        }
        o.read("total", sw.total);
        if (auto t = o.get<std::vector<double>>("thickness_um")) {
            sw.thicknesses.clear();
            for (double v : *t) {
                sw.thicknesses.push_back(v * 1e-6);
            }
        }
        o.read("materials", sw.materials);
        o.read("tdp_w", sw.tdps);
        o.read("transient", sw.transient);
        o.finish();
        cfg.sweep = sw;
    }

    if (top.has("output")) {
        detail::StrictObject o(top.at("output"), "output");
        o.read("dir", cfg.out_dir);
        o.finish();
    }
    top.finish();

    // semantic checks
    const MaterialLibrary lib = cfg.library();
    auto require_material = [&](const std::string& name, const std::string& key) {
        if (!lib.contains(name)) {
            throw ConfigError(key + ": unknown material '" + name + "'");
        }
    };
    require_material(s.substrate.material, "substrate.material");
    require_material(s.hbm_tier.material, "hbm.material");
    require_material(s.hbm_fill, "hbm.fill");
    require_material(s.interposer_material, "interposer.material");
    require_material(s.gpu.material, "gpu.material");
    require_material(s.gpu_fill, "gpu.fill");
    require_material(s.tim.material, "tim.material");
    require_material(s.heat_sink.material, "heat_sink.material");
    if (cfg.sweep) {
        for (const auto& m : cfg.sweep->materials) {
            require_material(m, "sweep.materials");
        }
    }
    try {
        (void)validate(s);
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("invalid stack: ") + e.what());
    }
    return cfg;
}

/// Serializes every field so that parse_config(emit_config(c)) reproduces c.
inline std::string emit_config(const RunConfig& cfg)
{
    using detail::json;
    const StackSpec& s = cfg.stack;
    auto layer = [](const LayerSpec& l) {
        json j{{"material", l.material}, {"thickness_um", l.thickness * 1e6}};
        j["tsv_fraction"] = l.tsv_fraction ? json(*l.tsv_fraction) : json(nullptr);
        return j;
    };
    json root;
    root["footprint_mm"] = {s.footprint_x * 1e3, s.footprint_y * 1e3};
    root["substrate"] = layer(s.substrate);
    root["tim"] = layer(s.tim);
    root["heat_sink"] = layer(s.heat_sink);
    root["interposer"] = {{"material", s.interposer_material}, {"thickness_um", s.interposer_thickness * 1e6}};
    root["interposer"]["tsv_fraction"] =
        s.interposer_tsv_fraction ? json(*s.interposer_tsv_fraction) : json(nullptr);
    root["hbm"] = {{"total", s.hbm.total_dies},
                   {"per_layer", s.hbm.dies_per_layer},
                   {"die_mm", {s.hbm.die_x * 1e3, s.hbm.die_y * 1e3}},
                   {"gap_mm", s.hbm.gap * 1e3},
                   {"power_per_die_w", s.hbm_power_per_die_w},
                   {"thickness_um", s.hbm_tier.thickness * 1e6},
                   {"material", s.hbm_tier.material},
                   {"fill", s.hbm_fill}};
    root["hbm"]["tsv_fraction"] = s.hbm_tier.tsv_fraction ? json(*s.hbm_tier.tsv_fraction) : json(nullptr);
    json gpu{{"die_mm", {s.gpu_die_x * 1e3, s.gpu_die_y * 1e3}},
             {"thickness_um", s.gpu.thickness * 1e6},
             {"material", s.gpu.material},
             {"fill", s.gpu_fill}};
    if (s.gpu_power_w) {
        gpu["tdp_w"] = *s.gpu_power_w;
    } else if (s.gpu_power_density_w_cm2) {
        gpu["power_density_w_cm2"] = *s.gpu_power_density_w_cm2;
    }
    root["gpu"] = gpu;
    root["boundary"] = {{"h_top", s.h_top}, {"h_bottom", s.h_bottom}, {"t_ambient_K", s.t_ambient}};
    root["grid"] = {{"cell_um", cfg.grid.cell * 1e6}, {"cells_per_layer", cfg.grid.cells_per_layer}};
    root["solver"] = {{"rel_tol", cfg.solver.rel_tol},
                      {"max_iters", cfg.solver.max_iters},
                      {"preconditioner", cfg.solver.preconditioner == Preconditioner::jacobi ? "jacobi" : "none"}};
    root["transient"] = {{"dt_s", cfg.transient.dt},
                         {"t_end_s", cfg.transient.t_end},
                         {"sample_stride", cfg.transient.sample_stride}};
    root["transient"]["t_initial_K"] = cfg.transient.t_initial ? json(*cfg.transient.t_initial) : json(nullptr);
    json mats = json::object();
    for (const auto& [name, m] : cfg.material_overrides) {
        mats[name] = {{"k_xx", m.k_xx}, {"k_yy", m.k_yy}, {"k_zz", m.k_zz},
                      {"density", m.density}, {"cp", m.cp}, {"cte", m.cte}};
    }
    root["materials"] = mats;
    if (cfg.sweep) {
        const SweepSettings& sw = *cfg.sweep;
        std::vector<double> um;
        for (double t : sw.thicknesses) {
            um.push_back(t * 1e6);
        }
        root["sweep"] = {{"family", std::string(to_string(sw.family))},
                         {"total", sw.total},
                         {"thickness_um", um},
                         {"materials", sw.materials},
                         {"tdp_w", sw.tdps},
                         {"transient", sw.transient}};
    }
    root["output"] = {{"dir", cfg.out_dir}};
    return root.dump(2) + "\n";
}

} // namespace hbmtherm
