#pragma once

#include "hbmtherm/error.hpp"
#include "hbmtherm/solve.hpp"
#include "hbmtherm/sweep.hpp"
#include "hbmtherm/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace hbmtherm {

inline constexpr const char* kMetricsHeader =
    "case,dies_per_layer,n_layers,interposer_material,thickness_um,tdp_w,t_max_K,hotspot_area_mm2,"
    "R_KperW,mean_K,std_K,iters,wall_ms";

namespace detail {

inline std::string fmt(const char* spec, double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text, bool binary = false)
{
    std::ofstream out(path, binary ? std::ios::binary | std::ios::out : std::ios::out);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

} // namespace detail

/// Metrics table as CSV text (LF endings, '.' decimal point, 10 significant digits).
/// With include_wall_time false the wall_ms column is left empty, which makes
/// the text a pure function of the inputs.
inline std::string metrics_csv(const SweepReport& report, bool include_wall_time = true)
{
    std::string out = std::string(kMetricsHeader) + "\n";
    for (const CaseResult& r : report.rows) {
        out += r.label;
        out += "," + std::to_string(r.dies_per_layer);
        out += "," + std::to_string(r.n_layers);
        out += "," + r.interposer_material;
        out += "," + detail::fmt("%.10g", r.thickness_um);
        out += "," + detail::fmt("%.10g", r.tdp_w);
        out += "," + detail::fmt("%.10g", r.t_max);
        out += "," + detail::fmt("%.10g", r.hotspot_area * 1e6);
        out += "," + detail::fmt("%.10g", r.resistance);
        out += "," + detail::fmt("%.10g", r.mean);
        out += "," + detail::fmt("%.10g", r.std);
        out += "," + std::to_string(r.iterations);
        out += "," + (include_wall_time ? detail::fmt("%.3f", r.wall_ms) : std::string());
        out += "\n";
    }
    return out;
}

inline void write_metrics_csv(const SweepReport& report, const std::filesystem::path& path)
{
    if (report.rows.empty()) {
        throw IoError("write_metrics_csv: report is empty, nothing written to '" + path.string() + "'");
    }
    detail::write_text(path, metrics_csv(report));
}

/// One parsed line of a metrics CSV.
struct MetricsRow {
    std::string label;
    int dies_per_layer = 0;
    int n_layers = 0;
    std::string interposer_material;
    double thickness_um = 0.0;
    double tdp_w = 0.0;
    double t_max = 0.0;
    double hotspot_area_mm2 = 0.0;
    double resistance = 0.0;
    double mean = 0.0;
    double std = 0.0;
    long long iterations = 0;
    double wall_ms = 0.0;
};

inline std::vector<MetricsRow> parse_metrics_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader) {
        throw IoError("parse_metrics_csv: unexpected header");
    }
    auto num = [](const std::string& s) { return s.empty() ? 0.0 : std::stod(s); };
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto c = detail::split_csv_line(line);
        if (c.size() != 13) {
            throw IoError("parse_metrics_csv: expected 13 columns, got " + std::to_string(c.size()));
        }
        MetricsRow r;
        r.label = c[0];
        r.dies_per_layer = std::stoi(c[1]);
        r.n_layers = std::stoi(c[2]);
        r.interposer_material = c[3];
        r.thickness_um = num(c[4]);
        r.tdp_w = num(c[5]);
        r.t_max = num(c[6]);
        r.hotspot_area_mm2 = num(c[7]);
        r.resistance = num(c[8]);
        r.mean = num(c[9]);
        r.std = num(c[10]);
        r.iterations = std::stoll(c[11]);
        r.wall_ms = num(c[12]);
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Sampled GPU-max traces of transient cases: case,time_s,gpu_max_K.
inline std::string traces_csv(const SweepReport& report)
{
    std::string out = "case,time_s,gpu_max_K\n";
    for (const CaseResult& r : report.rows) {
        for (std::size_t i = 0; i < r.trace_times.size(); ++i) {
            out += r.label + "," + detail::fmt("%.10g", r.trace_times[i]) + "," +
                   detail::fmt("%.10g", r.trace_gpu_max[i]) + "\n";
        }
    }
    return out;
}

/// Legacy ASCII VTK, STRUCTURED_POINTS. Cell centers become the lattice
/// points; spacing is the mean cell pitch along each axis.
inline std::string field_vtk(const TemperatureField& field, const VoxelModel& model)
{
    if (field.nx != model.nx || field.ny != model.ny || field.nz != model.nz || field.size() != model.size()) {
        throw DomainError("field_vtk: field dimensions do not match the model");
    }
    auto pitch = [](const std::vector<double>& e) { return (e.back() - e.front()) / (e.size() - 1); };
    std::string out;
    out.reserve(field.size() * 14 + 256);
    out += "# vtk DataFile Version 3.0\n";
    out += "hbmtherm temperature field\n";
    out += "ASCII\n";
    out += "DATASET STRUCTURED_POINTS\n";
    out += "DIMENSIONS " + std::to_string(field.nx) + " " + std::to_string(field.ny) + " " +
           std::to_string(field.nz) + "\n";
    out += "ORIGIN " + detail::fmt("%.10g", model.xc(0)) + " " + detail::fmt("%.10g", model.yc(0)) + " " +
           detail::fmt("%.10g", model.zc(0)) + "\n";
    out += "SPACING " + detail::fmt("%.10g", pitch(model.x_edges)) + " " + detail::fmt("%.10g", pitch(model.y_edges)) +
           " " + detail::fmt("%.10g", pitch(model.z_edges)) + "\n";
    out += "POINT_DATA " + std::to_string(field.size()) + "\n";
    out += "SCALARS temperature_K double 1\n";
    out += "LOOKUP_TABLE default\n";
    for (double t : field.t) {
        out += detail::fmt("%.10g", t);
        out += '\n';
    }
    return out;
}

inline void write_field_vtk(const TemperatureField& field, const VoxelModel& model, const std::filesystem::path& path)
{
    detail::write_text(path, field_vtk(field, model));
}

/// Reads back the temperature scalars written by write_field_vtk.
inline TemperatureField read_field_vtk(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    TemperatureField f;
    std::string token;
    bool have_dims = false;
    while (in >> token) {
        if (token == "DIMENSIONS") {
            in >> f.nx >> f.ny >> f.nz;
            have_dims = true;
        } else if (token == "LOOKUP_TABLE") {
            in >> token;
            break;
        }
    }
    if (!have_dims || f.nx < 1 || f.ny < 1 || f.nz < 1) {
        throw IoError("'" + path.string() + "': missing DIMENSIONS");
    }
    const std::size_t n = static_cast<std::size_t>(f.nx) * f.ny * f.nz;
    f.t.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> f.t[i])) {
            throw IoError("'" + path.string() + "': expected " + std::to_string(n) + " scalar values");
        }
    }
    return f;
}

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // row-major, first row at the lowest coordinate
};

/// Grayscale slice normal to axis 0 (x), 1 (y) or 2 (z).
/// z-slices are nx wide and ny tall; x-slices ny x nz; y-slices nx x nz.
inline GrayImage slice_image(const TemperatureField& field, int axis, int index, double t_min, double t_max)
{
    if (!(t_max > t_min)) {
        throw DomainError("slice_image: degenerate temperature range");
    }
    const int dims[3] = {field.nx, field.ny, field.nz};
    if (axis < 0 || axis > 2) {
        throw DomainError("slice_image: axis must be 0, 1 or 2");
    }
    if (index < 0 || index >= dims[axis]) {
        throw DomainError("slice_image: index " + std::to_string(index) + " outside [0, " +
                          std::to_string(dims[axis]) + ")");
    }
    GrayImage img;
    img.width = axis == 0 ? field.ny : field.nx;
    img.height = axis == 2 ? field.ny : field.nz;
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            double t = 0.0;
            switch (axis) {
            case 0: t = field.at(index, c, r); break;
            case 1: t = field.at(c, index, r); break;
            default: t = field.at(c, r, index); break;
            }
            const double g = std::clamp((t - t_min) / (t_max - t_min), 0.0, 1.0);
            img.pixels[static_cast<std::size_t>(r) * img.width + c] =
                static_cast<std::uint8_t>(std::lround(g * 255.0));
        }
    }
    return img;
}

/// Binary PGM (P5) of a slice.
inline void render_slice_pgm(const TemperatureField& field, int axis, int index, double t_min, double t_max,
                             const std::filesystem::path& path)
{
    const GrayImage img = slice_image(field, axis, index, t_min, t_max);
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
    detail::write_text(path, out, true);
}

inline GrayImage read_pgm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::string magic;
    int maxval = 0;
    GrayImage img;
    in >> magic >> img.width >> img.height >> maxval;
    if (magic != "P5" || maxval != 255 || img.width < 1 || img.height < 1) {
        throw IoError("'" + path.string() + "' is not an 8-bit P5 image");
    }
    in.get();
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!in) {
        throw IoError("'" + path.string() + "': truncated pixel data");
    }
    return img;
}

} // namespace hbmtherm
