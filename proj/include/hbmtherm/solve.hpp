#pragma once

#include "hbmtherm/error.hpp"
#include "hbmtherm/fvm.hpp"
#include "hbmtherm/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hbmtherm {

enum class Preconditioner { none, jacobi };

struct SolverOptions {
    double rel_tol = 1e-8;
    int max_iters = 0; // 0: max(10000, 20 sqrt(n))
    Preconditioner preconditioner = Preconditioner::jacobi;

    [[nodiscard]] int iteration_cap(std::size_t n) const
    {
        if (max_iters > 0) {
            return max_iters;
        }
        return std::max(10000, static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))));
    }

    bool operator==(const SolverOptions&) const = default;
};

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> history;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

} // namespace detail

/// Preconditioned conjugate gradients on an SPD 7-point system.
/// Reductions are serial, so results are bitwise reproducible.
inline CgResult cg_solve(const LinearSystem& sys, std::span<const double> x0, const SolverOptions& opts)
{
    if (!(opts.rel_tol > 0.0)) {
        throw DomainError("cg_solve: rel_tol must be positive");
    }
    const std::size_t n = sys.size();
    CgResult out;
    out.x.assign(x0.begin(), x0.end());
    if (out.x.size() != n) {
        out.x.assign(n, 0.0);
    }

    const double bnorm = std::sqrt(detail::dot(sys.rhs, sys.rhs));
    if (bnorm == 0.0) {
        std::fill(out.x.begin(), out.x.end(), 0.0);
        return out;
    }

    std::vector<double> inv_diag(n, 1.0);
    if (opts.preconditioner == Preconditioner::jacobi) {
        for (std::size_t i = 0; i < n; ++i) {
            inv_diag[i] = 1.0 / sys.diag[i];
        }
    }

    std::vector<double> r(n), z(n), p(n), ap(n);
    auto true_residual = [&] {
        sys.multiply(out.x, ap);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = sys.rhs[i] - ap[i];
        }
        return std::sqrt(detail::dot(r, r)) / bnorm;
    };
    // Rounding floor of b - A x: each row sums terms of size up to 2 diag |x|.
    auto residual_floor = [&] {
        double xmax = 0.0;
        for (double v : out.x) {
            xmax = std::max(xmax, std::abs(v));
        }
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = 2.0 * sys.diag[i] * xmax;
            s += t * t;
        }
        return 16.0 * std::numeric_limits<double>::epsilon() * std::sqrt(s) / bnorm;
    };

    double rel = true_residual();
    out.history.push_back(rel);
    const int cap = opts.iteration_cap(n);
    bool restart = true;
    double rz = 0.0;

    while (rel > opts.rel_tol) {
        if (out.iterations >= cap) {
            out.relative_residual = rel;
            throw SolverError("cg_solve: no convergence after " + std::to_string(out.iterations) +
                                  " iterations (relative residual " + std::to_string(rel) + ")",
                              std::move(out.history));
        }
        if (restart) {
            for (std::size_t i = 0; i < n; ++i) {
                z[i] = inv_diag[i] * r[i];
            }
            p = z;
            rz = detail::dot(r, z);
            restart = false;
        }
        sys.multiply(p, ap);
        const double pap = detail::dot(p, ap);
        if (!(pap > 0.0)) {
            throw SolverError("cg_solve: matrix is not positive definite along search direction",
                              std::move(out.history));
        }
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        ++out.iterations;
        rel = std::sqrt(detail::dot(r, r)) / bnorm;

        if (rel <= opts.rel_tol) {
            // recursive residual drifts; confirm against b - A x
            rel = true_residual();
            if (rel > opts.rel_tol && rel <= residual_floor()) {
                out.history.push_back(rel);
                break;
            }
            restart = true;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                z[i] = inv_diag[i] * r[i];
            }
            const double rz_new = detail::dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = z[i] + beta * p[i];
            }
        }
        out.history.push_back(rel);
    }
    out.relative_residual = rel;
    return out;
}

/// Cell temperatures (K) aligned with VoxelModel indexing.
struct TemperatureField {
    int nx = 0;
    int ny = 0;
    int nz = 0;
    std::vector<double> t;
    double t_ambient = 0.0;
    int iterations = 0;
    double residual = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return t.size(); }
    [[nodiscard]] double at(int i, int j, int k) const
    {
        return t[static_cast<std::size_t>(i) +
                 static_cast<std::size_t>(nx) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * k)];
    }
    [[nodiscard]] double max() const { return *std::max_element(t.begin(), t.end()); }
    [[nodiscard]] double min() const { return *std::min_element(t.begin(), t.end()); }
};

inline TemperatureField solve_steady(const LinearSystem& sys, double t_ambient, const SolverOptions& opts = {})
{
    std::vector<double> x0(sys.size(), t_ambient);
    CgResult r = cg_solve(sys, x0, opts);
    TemperatureField f;
    f.nx = sys.nx;
    f.ny = sys.ny;
    f.nz = sys.nz;
    f.t = std::move(r.x);
    f.t_ambient = t_ambient;
    f.iterations = r.iterations;
    f.residual = r.relative_residual;
    for (double v : f.t) {
        if (!std::isfinite(v)) {
            throw SolverError("solve_steady: non-finite temperature", std::move(r.history));
        }
    }
    return f;
}

inline TemperatureField solve_steady(const VoxelModel& model, const SolverOptions& opts = {})
{
    return solve_steady(assemble_system(model), model.t_ambient, opts);
}

struct TransientSchedule {
    double dt = 0.05;   // s
    double t_end = 30.0; // s
    std::optional<double> t_initial; // K; ambient when unset
    int sample_stride = 20;         // steps between stored fields; 0 stores none

    bool operator==(const TransientSchedule&) const = default;
};

struct TransientResult {
    std::vector<double> times;   // s, one per step including t = 0
    std::vector<double> gpu_max; // K, max over the GPU die cells at each time
    std::vector<double> sample_times;
    std::vector<TemperatureField> samples;
    TemperatureField final_field;
    long long total_iterations = 0;
};

/// Backward Euler: (C/dt + A) T^{n+1} = C/dt T^n + b, C = diag(rho cp V).
/// The GPU-max trace falls back to the whole-domain max when the model has no GPU layer.
inline TransientResult run_transient(const VoxelModel& model, const TransientSchedule& sched,
                                     const SolverOptions& opts = {})
{
    if (!(sched.dt > 0.0) || !(sched.t_end >= sched.dt)) {
        throw DomainError("run_transient: need dt > 0 and t_end >= dt");
    }
    const LinearSystem base = assemble_system(model);
    const std::size_t n = base.size();

    std::vector<double> cap_dt(n);
    for (int k = 0; k < model.nz; ++k) {
        for (int j = 0; j < model.ny; ++j) {
            for (int i = 0; i < model.nx; ++i) {
                const std::size_t c = model.index(i, j, k);
                const double rc = model.material_at(c).heat_capacity();
                if (!(rc > 0.0)) {
                    throw DomainError("run_transient: non-positive heat capacity in material '" +
                                      model.material_at(c).name + "'");
                }
                cap_dt[c] = rc * model.volume(i, j, k) / sched.dt;
            }
        }
    }

    LinearSystem step = base;
    for (std::size_t c = 0; c < n; ++c) {
        step.diag[c] += cap_dt[c];
    }

    std::vector<std::size_t> probe = model.gpu_cells();
    auto gpu_max = [&](const std::vector<double>& t) {
        double m = -INFINITY;
        if (probe.empty()) {
            return *std::max_element(t.begin(), t.end());
        }
        for (std::size_t c : probe) {
            m = std::max(m, t[c]);
        }
        return m;
    };

    TransientResult out;
    std::vector<double> temp(n, sched.t_initial.value_or(model.t_ambient));
    auto as_field = [&](const std::vector<double>& t) {
        TemperatureField f;
        f.nx = model.nx;
        f.ny = model.ny;
        f.nz = model.nz;
        f.t = t;
        f.t_ambient = model.t_ambient;
        return f;
    };

    const int steps = static_cast<int>(std::llround(sched.t_end / sched.dt));
    out.times.push_back(0.0);
    out.gpu_max.push_back(gpu_max(temp));
    if (sched.sample_stride > 0) {
        out.sample_times.push_back(0.0);
        out.samples.push_back(as_field(temp));
    }
    int last_iters = 0;
    double last_res = 0.0;
    std::vector<double> prev = temp;
    std::vector<double> guess(n);
    for (int s = 1; s <= steps; ++s) {
        for (std::size_t c = 0; c < n; ++c) {
            step.rhs[c] = base.rhs[c] + cap_dt[c] * temp[c];
            guess[c] = 2.0 * temp[c] - prev[c];
        }
        CgResult r = cg_solve(step, guess, opts);
        prev = std::move(temp);
        temp = std::move(r.x);
        out.total_iterations += r.iterations;
        last_iters = r.iterations;
        last_res = r.relative_residual;
        const double t = s * sched.dt;
        out.times.push_back(t);
        out.gpu_max.push_back(gpu_max(temp));
        if (sched.sample_stride > 0 && (s % sched.sample_stride == 0 || s == steps)) {
            out.sample_times.push_back(t);
            out.samples.push_back(as_field(temp));
        }
    }
    out.final_field = as_field(temp);
    out.final_field.iterations = last_iters;
    out.final_field.residual = last_res;
    return out;
}

} // namespace hbmtherm
