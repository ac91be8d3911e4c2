// hbmtherm command-line driver.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 solver or
// verification failure, 3 sweep finished with some failed cases.

#include "hbmtherm.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

namespace fs = std::filesystem;
using namespace hbmtherm;

namespace {

enum Exit : int { ok = 0, usage = 1, solver = 2, partial = 3 };

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw IoError("cannot read '" + p.string() + "'");
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int resolve_jobs(int flag)
{
    if (flag > 0) {
        return flag;
    }
    if (const char* env = std::getenv("THERMO_JOBS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) {
                return v;
            }
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("THERMO_JOBS: expected a positive integer, got '") + env + "'");
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

fs::path prepare_out(const RunConfig& cfg, const std::string& flag)
{
    fs::path dir = flag.empty() ? fs::path(cfg.out_dir) : fs::path(flag);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    return dir;
}

RunConfig load_config(const std::string& path)
{
    try {
        return parse_config(read_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

int cmd_solve(const std::string& cfg_path, const std::string& out_flag, bool transient)
{
    const RunConfig cfg = load_config(cfg_path);
    for (const auto& w : validate(cfg.stack)) {
        std::cerr << "warning: " << w << "\n";
    }
    const fs::path out = prepare_out(cfg, out_flag);
    const MaterialLibrary lib = cfg.library();
    const auto t0 = std::chrono::steady_clock::now();
    const VoxelModel model = voxelize(cfg.stack, lib, cfg.grid.cell, cfg.grid.cells_per_layer);

    CaseResult row;
    row.label = "solve";
    row.dies_per_layer = cfg.stack.hbm.dies_per_layer;
    row.n_layers = cfg.stack.hbm.n_layers;
    row.interposer_material = cfg.stack.interposer_material;
    row.thickness_um = cfg.stack.interposer_thickness * 1e6;
    row.tdp_w = cfg.stack.gpu_power();

    TemperatureField field;
    if (transient) {
        TransientResult tr = run_transient(model, cfg.transient, cfg.solver);
        row.iterations = tr.total_iterations;
        row.trace_times = tr.times;
        row.trace_gpu_max = tr.gpu_max;
        field = std::move(tr.final_field);
    } else {
        const LinearSystem sys = assemble_system(model);
        field = solve_steady(sys, model.t_ambient, cfg.solver);
        row.iterations = field.iterations;
        std::cout << "energy imbalance " << verify::energy_imbalance(sys, field.t) << "\n";
    }
    const auto gpu = model.gpu_cells();
    const HotspotReport hs = hotspot(field, model, gpu);
    const UniformityStats u = uniformity(field, model, gpu);
    row.ok = true;
    row.t_max = hs.t_max;
    row.hotspot_area = hs.area;
    row.resistance = thermal_resistance(hs.t_max, model.total_power(), model.t_ambient);
    row.mean = u.mean;
    row.std = u.std;
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    SweepReport report;
    report.rows.push_back(row);
    write_metrics_csv(report, out / "metrics.csv");
    write_field_vtk(field, model, out / "field.vtk");
    if (transient) {
        std::ofstream(out / "traces.csv") << traces_csv(report);
    }
    if (field.max() > field.min()) {
        render_slice_pgm(field, 2, hs.k, field.min(), field.max(), out / "hotspot_slice.pgm");
    }

    std::printf("grid %d x %d x %d (%zu cells), %lld CG iterations\n", model.nx, model.ny, model.nz, model.size(),
                row.iterations);
    std::printf("GPU t_max %.3f K at cell (%d, %d, %d), hotspot area %.3f mm^2\n", hs.t_max, hs.i, hs.j, hs.k,
                hs.area * 1e6);
    std::printf("R = %.5f K/W, GPU mean %.3f K, std %.3f K\n", row.resistance, u.mean, u.std);
    std::printf("wrote %s\n", out.string().c_str());
    return ok;
}

int cmd_sweep(const std::string& cfg_path, const std::string& out_flag, int jobs)
{
    const RunConfig cfg = load_config(cfg_path);
    if (!cfg.sweep) {
        throw ConfigError(cfg_path + ": sweep: section missing");
    }
    const fs::path out = prepare_out(cfg, out_flag);
    const SweepSpec spec = cfg.sweep_spec(resolve_jobs(jobs));
    const SweepReport report = run_sweep(spec, cfg.library());
    write_metrics_csv(report, out / "metrics.csv");
    const bool any_trace = std::any_of(report.rows.begin(), report.rows.end(),
                                       [](const CaseResult& r) { return !r.trace_times.empty(); });
    if (any_trace) {
        std::ofstream(out / "traces.csv") << traces_csv(report);
    }
    int failed = 0;
    for (const auto& r : report.rows) {
        if (r.ok) {
            std::printf("%-24s t_max %10.3f K  R %.5f K/W  %6.0f ms\n", r.label.c_str(), r.t_max, r.resistance,
                        r.wall_ms);
        } else {
            ++failed;
            std::printf("%-24s FAILED: %s\n", r.label.c_str(), r.error.c_str());
        }
    }
    std::printf("%zu cases, %d failed, wrote %s\n", report.rows.size(), failed, out.string().c_str());
    if (failed == 0) {
        return ok;
    }
    return failed == static_cast<int>(report.rows.size()) ? solver : partial;
}

int cmd_verify(bool all)
{
    const MaterialLibrary lib = builtin_library();
    const verify::Limits lim;
    const verify::Settings set;
    bool pass = true;
    auto print = [&](const verify::CheckResult& r) {
        std::cout << verify::format_line(r) << std::endl;
        pass = pass && (r.pass || r.soft);
    };
    verify::Audit audit;
    print(verify::slab_oracle(lim, set, audit));
    print(verify::mms_order(lim, set, audit));
    print(verify::linearity(lim, set, lib, audit));
    if (all) {
        for (const auto& r : verify::material_effect(lim, set, lib, audit)) {
            print(r);
        }
        print(verify::hbm_distribution(lim, set, lib, audit));
        print(verify::thickness_saturation(lim, set, lib, audit));
        const auto tc = verify::transient_consistency(lim, set, lib, audit);
        print(tc.match);
        print(tc.monotone);
        print(tc.t95);
        print(verify::determinism(set, lib));
    }
    print(verify::leakage_calibration(lim));
    print(verify::conservation(lim, audit));
    return pass ? ok : solver;
}

int cmd_render(const std::string& vtk, int axis, int index, double t_min, double t_max, const std::string& out_file)
{
    const TemperatureField f = read_field_vtk(vtk);
    fs::path out = out_file.empty() ? fs::path(vtk).replace_extension(".pgm") : fs::path(out_file);
    render_slice_pgm(f, axis, index, t_min, t_max, out);
    std::printf("wrote %s\n", out.string().c_str());
    return ok;
}

RunConfig family_config(SweepFamily fam)
{
    RunConfig c;
    SweepSettings s;
    s.family = fam;
    if (fam == SweepFamily::interposer_thickness) {
        c.stack.interposer_material = "hbn";
    }
    c.sweep = s;
    c.out_dir = "out/" + std::string(to_string(fam));
    return c;
}

int cmd_families(bool write, const std::string& out_flag)
{
    const SweepFamily all[] = {SweepFamily::hbm_distribution, SweepFamily::interposer_thickness,
                               SweepFamily::tdp_transient};
    if (!write) {
        nlohmann::json doc = nlohmann::json::object();
        for (SweepFamily f : all) {
            doc[std::string(to_string(f))] = nlohmann::json::parse(emit_config(family_config(f)));
        }
        std::cout << doc.dump(2) << "\n";
        return ok;
    }
    const fs::path dir = out_flag.empty() ? fs::path(".") : fs::path(out_flag);
    fs::create_directories(dir);
    for (SweepFamily f : all) {
        const fs::path p = dir / (std::string(to_string(f)) + ".json");
        std::ofstream o(p);
        if (!(o << emit_config(family_config(f)))) {
            throw IoError("cannot write '" + p.string() + "'");
        }
        std::printf("wrote %s\n", p.string().c_str());
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Steady and transient conduction in GPU/HBM/interposer stacks"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out_flag;
    int jobs = 0;
    app.add_option("--out", out_flag, "output directory (overrides output.dir)");
    app.add_option("--jobs,-j", jobs, "sweep worker threads (fallback: THERMO_JOBS)")->check(CLI::PositiveNumber);

    std::string cfg_path;
    bool transient = false;
    auto* solve = app.add_subcommand("solve", "solve one stack configuration");
    solve->add_option("config", cfg_path, "JSON config")->required();
    solve->add_flag("--transient", transient, "run the transient schedule instead of a steady solve");

    auto* sweep = app.add_subcommand("sweep", "run the sweep family named in the config");
    sweep->add_option("config", cfg_path, "JSON config")->required();

    bool all = false;
    auto* ver = app.add_subcommand("verify", "run the analytic oracle checks");
    ver->add_flag("--all", all, "also run the stack trend checks (several minutes)");

    std::string vtk;
    std::string axis_name = "z";
    int index = 0;
    double t_min = 0.0;
    double t_max = 0.0;
    std::string pgm;
    auto* render = app.add_subcommand("render", "write a grayscale PGM slice of a VTK field");
    render->add_option("field", vtk, "field.vtk written by solve")->required();
    render->add_option("--axis", axis_name, "slice normal: x, y or z")->check(CLI::IsMember({"x", "y", "z"}));
    render->add_option("--index", index, "slice index along the axis")->required();
    render->add_option("--min", t_min, "temperature mapped to black, K")->required();
    render->add_option("--max", t_max, "temperature mapped to white, K")->required();
    render->add_option("-o,--output", pgm, "output file (default: field name with .pgm)");

    bool write = false;
    auto* fams = app.add_subcommand("families", "print the built-in sweep configs");
    fams->add_flag("--write", write, "write one JSON file per family into --out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        if (*solve) {
            return cmd_solve(cfg_path, out_flag, transient);
        }
        if (*sweep) {
            return cmd_sweep(cfg_path, out_flag, jobs);
        }
        if (*ver) {
            return cmd_verify(all);
        }
        if (*render) {
            const int axis = axis_name == "x" ? 0 : axis_name == "y" ? 1 : 2;
            return cmd_render(vtk, axis, index, t_min, t_max, pgm);
        }
        if (*fams) {
            return cmd_families(write, out_flag);
        }
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return solver;
    } catch (const AssemblyError& e) {
        std::cerr << "assembly error: " << e.what() << "\n";
        return solver;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    return usage;
}
