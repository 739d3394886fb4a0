#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "halfstokes/errors.hpp"
#include "halfstokes/kernels.hpp"
#include "halfstokes/quadrature.hpp"
#include "halfstokes/resolvent.hpp"
#include "halfstokes/spectral_core.hpp"

namespace halfstokes {

using ForcingFn = std::function<ModeField(double)>;
using BoundaryFn = std::function<std::array<cplx, 2>(double)>;

/// Forced per-mode system: d/dt w = nu(d^2 - |xi|^2) w + f, with -nu(d/dz + D) w_tau = g and w3 = 0 at z = 0.
/// Empty forcing or boundary_g mean zero.
struct StokesProblem {
    FourierMode mode;
    double nu = 1.0;
    ModeField omega0;
    ForcingFn forcing;
    BoundaryFn boundary_g;
    double t_final = 1.0;
    std::optional<BoundaryOperatorD> D;  ///< defaults to the vorticity operator

    BoundaryOperatorD boundary_operator() const { return D.value_or(BoundaryOperatorD::vorticity(mode)); }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<ModeField> states;

    const ModeField& at_time(double t) const {
        for (std::size_t k = 0; k < times.size(); ++k)
            if (std::abs(times[k] - t) <= 1e-12 * std::max(1.0, t)) return states[k];
        throw ConfigError("time not in trajectory");
    }
};

/// Linear interpolation of samples taken at a fixed rate; evaluates exactly at the sample times.
class SampledForcing {
public:
    SampledForcing(const ForcingFn& f, double t_final, double rate = 64.0) {
        const int n = std::max(1, static_cast<int>(std::ceil(t_final * rate)));
        dt_ = t_final / n;
        for (int k = 0; k <= n; ++k) samples_.push_back(f(k * dt_));
    }

    ModeField operator()(double t) const {
        const double x = std::clamp(t / dt_, 0.0, static_cast<double>(samples_.size() - 1));
        const std::size_t k = std::min(static_cast<std::size_t>(x), samples_.size() - 2);
        const double w = x - static_cast<double>(k);
        ModeField out = samples_[k] * (1.0 - w);
        out += samples_[k + 1] * w;
        return out;
    }

private:
    double dt_ = 0.0;
    std::vector<ModeField> samples_;
};

struct CompatibilityReport {
    double correction = 0.0;  ///< |w3(0)| removed from the initial data
};

/// Sets w3(0) = 0 by a correction supported on the first interval; larger defects are rejected.
inline ModeField project_compatible(const ModeField& omega0, CompatibilityReport* report = nullptr) {
    if (omega0.components() != 3) throw IncompatibleData("initial vorticity needs three components");
    const double scale = max_norm(omega0);
    const double defect = std::abs(omega0(2, 0));
    if (defect > 1e-6 * std::max(scale, 1e-300)) throw IncompatibleData("w3 does not vanish at z = 0");
    ModeField out = omega0;
    out(2, 0) = 0.0;
    if (report) report->correction = defect;
    return out;
}

struct DuhamelOptions {
    int sigma_intervals = 128;      ///< composite Simpson intervals in sigma = sqrt(t - s)
    KernelOptions kernel{std::nullopt, std::nullopt, 1.0, {1e-8, 0.0, 2, 4000}, 46.0};
    QuadratureOptions boundary_quad{1e-11, 1e-15, 8, 4000};
};

namespace detail {

inline std::vector<double> simpson_weights(int intervals, double length) {
    if (intervals < 2 || intervals % 2 != 0) throw ConfigError("Simpson needs an even number of intervals");
    const double h = length / intervals;
    std::vector<double> w(intervals + 1);
    for (int i = 0; i <= intervals; ++i) w[i] = h / 3.0 * ((i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0));
    return w;
}

/// out_i += scale * sum_j w_j r_{i+j} (D v_j) for the two tangential components.
inline void add_residual_apply(ModeField& out, const std::vector<cplx>& r, const Mat2C& D, const ModeField& v,
                               const std::vector<double>& w, cplx scale) {
    const std::size_t n = v.size();
    std::vector<cplx> d0(n), d1(n);
    std::size_t last = 0;
    for (std::size_t j = 0; j < n; ++j) {
        d0[j] = w[j] * (D(0, 0) * v(0, j) + D(0, 1) * v(1, j));
        d1[j] = w[j] * (D(1, 0) * v(0, j) + D(1, 1) * v(1, j));
        if (d0[j] != cplx(0.0) || d1[j] != cplx(0.0)) last = j + 1;
    }
    std::size_t reach = r.size();
    while (reach > 0 && r[reach - 1] == cplx(0.0)) --reach;
    for (std::size_t i = 0; i < n && i < reach; ++i) {
        cplx a{}, b{};
        const std::size_t jmax = std::min(last, reach - i);
        for (std::size_t j = 0; j < jmax; ++j) {
            a += r[i + j] * d0[j];
            b += r[i + j] * d1[j];
        }
        out(0, i) += scale * a;
        out(1, i) += scale * b;
    }
}

/// Free-space part of S(tau) v: Neumann heat on the tangential pair, Dirichlet heat on w3.
inline ModeField heat_apply(double tau, double nu, const FourierMode& mode, const ModeField& v) {
    const HeatPropagator P(tau, nu, mode, v.grid());
    ModeField out(v.grid_ptr(), 3);
    out[0] = P.apply(v[0], 1.0);
    out[1] = P.apply(v[1], 1.0);
    out[2] = P.apply(v[2], -1.0);
    return out;
}

} // namespace detail

/// S(tau) v with the Green's function of the boundary value problem.
inline ModeField semigroup_apply(double tau, double nu, const BoundaryOperatorD& D, const ModeField& v,
                                 const KernelOptions& kopt = {}) {
    ModeField out = detail::heat_apply(tau, nu, D.mode(), v);
    if (!D.is_zero()) {
        const double h = v.grid().spacing();
        const auto r = residual_profile(tau, nu, D.mode(), D.sigma(), h, 2 * v.size() - 1, kopt, 1e-17, 2.0 * D.c0());
        detail::add_residual_apply(out, r, D.matrix(), v, v.grid().weights(), 1.0);
    }
    return out;
}

/// w(t) = S(t) w0 + int_0^t S(t-s) f(s) ds + int_0^t G(t-s, ., 0)(g(s), 0) ds on a uniform grid.
inline Trajectory duhamel_solve(const StokesProblem& problem, const std::vector<double>& times,
                                const DuhamelOptions& opt = {}, CompatibilityReport* compat = nullptr) {
    const ModeField w0 = project_compatible(problem.omega0, compat);
    const HalfLineGrid& grid = w0.grid();
    if (!grid.is_uniform()) throw ConfigError("Duhamel solver needs a uniform grid");
    if (!(problem.nu > 0.0)) throw ConfigError("viscosity must be positive");
    const double nu = problem.nu, h = grid.spacing();
    const FourierMode& mode = problem.mode;
    const BoundaryOperatorD D = problem.boundary_operator();
    const Mat2C Dm = D.matrix();
    const std::size_t n = grid.size();
    const double k2 = mode.norm_squared();

    Trajectory traj;
    for (double t : times) {
        if (t < 0.0) throw ConfigError("output times must be nonnegative");
        if (t == 0.0) {
            traj.times.push_back(0.0);
            traj.states.push_back(w0);
            continue;
        }
        ModeField w = semigroup_apply(t, nu, D, w0, opt.kernel);

        const double root = std::sqrt(t);
        const auto sw = detail::simpson_weights(opt.sigma_intervals, root);
        for (int q = 1; q <= opt.sigma_intervals; ++q) {
            const double sigma = root * q / opt.sigma_intervals;
            const double tau = sigma * sigma;
            const double weight = sw[q] * 2.0 * sigma;
            std::vector<cplx> r;
            if (!D.is_zero() && (problem.forcing || problem.boundary_g))
                r = residual_profile(tau, nu, mode, D.sigma(), h, 2 * n - 1, opt.kernel, 1e-17, 2.0 * D.c0());
            if (problem.forcing) {
                const ModeField f = problem.forcing(t - tau);
                ModeField sf = detail::heat_apply(tau, nu, mode, f);
                if (!r.empty()) detail::add_residual_apply(sf, r, Dm, f, grid.weights(), 1.0);
                sf *= weight;
                w += sf;
            }
            if (problem.boundary_g && !r.empty()) {
                const auto g = problem.boundary_g(t - tau);
                const Vec2C dg = Dm * Vec2C{g[0], g[1]};
                for (std::size_t i = 0; i < n && i < r.size(); ++i) {
                    w(0, i) += weight * r[i] * dg[0];
                    w(1, i) += weight * r[i] * dg[1];
                }
            }
        }

        if (problem.boundary_g) {
            // heat part: int_0^sqrt(t) (2/sqrt(pi nu)) e^{-y^2/(4 nu sigma^2) - nu|xi|^2 sigma^2} g(t - sigma^2) dsigma
            const double c = 2.0 / std::sqrt(pi * nu);
            for (std::size_t i = 0; i < n; ++i) {
                const double y = grid[i];
                if (y * y / (4.0 * nu * t) > 745.0) break;
                const auto res = integrate_adaptive<2>(
                    [&](double sigma) {
                        const double e = (sigma == 0.0) ? (y == 0.0 ? 1.0 : 0.0)
                                                        : std::exp(-y * y / (4.0 * nu * sigma * sigma) - nu * k2 * sigma * sigma);
                        const auto g = problem.boundary_g(t - sigma * sigma);
                        return std::array<cplx, 2>{c * e * g[0], c * e * g[1]};
                    },
                    0.0, root, opt.boundary_quad);
                w(0, i) += res.value[0];
                w(1, i) += res.value[1];
            }
        }
        traj.times.push_back(t);
        traj.states.push_back(std::move(w));
    }
    return traj;
}

/// Smooth compatible forced problem with nonzero interior forcing and boundary datum.
inline StokesProblem forced_reference_problem(const FourierMode& mode, double nu, const GridPtr& grid,
                                              double t_final = 1.0) {
    StokesProblem p;
    p.mode = mode;
    p.nu = nu;
    p.t_final = t_final;
    p.omega0 = ModeField::sample(grid, 3, [](double z) {
        const double e = std::exp(-(z - 1.0) * (z - 1.0));
        return std::array<cplx, 3>{e, cplx(0.0, 0.5) * e, z * e};
    });
    p.forcing = [grid](double t) {
        return ModeField::sample(grid, 3, [t](double z) {
            const double e = std::cos(2.0 * t) * std::exp(-(z - 2.0) * (z - 2.0));
            return std::array<cplx, 3>{0.3 * e, cplx(0.0, -0.2) * e, 0.1 * z * e};
        });
    };
    p.boundary_g = [](double t) {
        return std::array<cplx, 2>{0.2 * std::sin(3.0 * t), cplx(0.0, 0.1 * (1.0 - std::exp(-t)))};
    };
    return p;
}

struct CrankNicolsonOptions {
    double comfort = 10.0;  ///< warn when nu dt / h^2 exceeds this
};

namespace detail {

/// Tridiagonal solve with complex entries (Thomas algorithm).
inline std::vector<cplx> thomas(std::vector<cplx> a, std::vector<cplx> b, std::vector<cplx> c, std::vector<cplx> d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const cplx m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    std::vector<cplx> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
}

/// Orthonormal eigenbasis of a real symmetric rank-one D: n with eigenvalue sigma, m with 0.
inline std::array<std::array<double, 2>, 2> eigenbasis(const BoundaryOperatorD& D) {
    double n1 = D.alpha(), n2 = D.gamma_off();
    if (std::hypot(n1, n2) < std::hypot(D.gamma_off(), D.beta())) {
        n1 = D.gamma_off();
        n2 = D.beta();
    }
    const double len = std::hypot(n1, n2);
    if (len == 0.0) return {{{1.0, 0.0}, {0.0, 1.0}}};
    n1 /= len;
    n2 /= len;
    return {{{-n2, n1}, {n1, n2}}};
}

} // namespace detail

/// Crank-Nicolson in time, second-order differences in z, ghost node at z = 0, w = 0 at z = Z.
/// Tangential components are rotated into the eigenbasis of D, where the condition splits into
/// a Neumann and a Robin condition.
inline Trajectory crank_nicolson_oracle(const StokesProblem& problem, double dt, const std::vector<double>& times,
                                        const CrankNicolsonOptions& opt = {}, Diagnostics* diag = nullptr) {
    const ModeField w0 = project_compatible(problem.omega0);
    const HalfLineGrid& grid = w0.grid();
    if (!grid.is_uniform()) throw ConfigError("Crank-Nicolson oracle needs a uniform grid");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    const double nu = problem.nu, h = grid.spacing(), k2 = problem.mode.norm_squared();
    if (diag && nu * dt / (h * h) > opt.comfort)
        diag->warn(WarningKind::stability, "nu dt / h^2 exceeds the comfort bound; expect reduced accuracy");
    const BoundaryOperatorD D = problem.boundary_operator();
    const auto basis = detail::eigenbasis(D);
    const std::array<double, 3> kappa{0.0, D.sigma(), 0.0};
    const std::size_t N = grid.intervals();
    const std::size_t m = N;  // unknowns 0..N-1, u_N = 0

    auto rotate = [&](const ModeField& v) {
        std::array<std::vector<cplx>, 3> u;
        for (int c = 0; c < 3; ++c) u[c].assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (int c = 0; c < 2; ++c) u[c][i] = basis[c][0] * v(0, i) + basis[c][1] * v(1, i);
            u[2][i] = v(2, i);
        }
        return u;
    };
    auto unrotate = [&](const std::array<std::vector<cplx>, 3>& u) {
        ModeField v(w0.grid_ptr(), 3);
        for (std::size_t i = 0; i < m; ++i) {
            v(0, i) = basis[0][0] * u[0][i] + basis[1][0] * u[1][i];
            v(1, i) = basis[0][1] * u[0][i] + basis[1][1] * u[1][i];
            v(2, i) = u[2][i];
        }
        return v;
    };
    // source b(t) = f + boundary contribution in the rotated basis
    auto source = [&](double t) {
        std::array<std::vector<cplx>, 3> b;
        if (problem.forcing)
            b = rotate(problem.forcing(t));
        else
            for (auto& x : b) x.assign(m, 0.0);
        if (problem.boundary_g) {
            const auto g = problem.boundary_g(t);
            for (int c = 0; c < 2; ++c) b[c][0] += 2.0 / h * (basis[c][0] * g[0] + basis[c][1] * g[1]);
        }
        b[2][0] = 0.0;
        return b;
    };
    // A u for component c
    const double d = nu / (h * h);
    auto apply_A = [&](int c, const std::vector<cplx>& u) {
        std::vector<cplx> out(m);
        for (std::size_t i = 0; i < m; ++i) {
            const cplx up = (i + 1 < m) ? u[i + 1] : cplx(0.0);
            if (i == 0)
                out[0] = (c == 2) ? cplx(0.0) : d * (2.0 * up - 2.0 * u[0] + 2.0 * h * kappa[c] * u[0]) - nu * k2 * u[0];
            else
                out[i] = d * (up - 2.0 * u[i] + u[i - 1]) - nu * k2 * u[i];
        }
        return out;
    };

    auto u = rotate(w0);
    Trajectory traj;
    std::vector<double> targets = times;
    std::sort(targets.begin(), targets.end());
    double t = 0.0;
    std::size_t next = 0;
    while (next < targets.size() && targets[next] <= 1e-14) {
        traj.times.push_back(targets[next++]);
        traj.states.push_back(unrotate(u));
    }
    const double t_end = targets.empty() ? 0.0 : targets.back();
    const long steps = std::lround(t_end / dt);
    auto b_old = source(0.0);
    for (long step = 1; step <= steps; ++step) {
        const double t_new = step * dt;
        const auto b_new = source(t_new);
        for (int c = 0; c < 3; ++c) {
            const auto Au = apply_A(c, u[c]);
            std::vector<cplx> lo(m), di(m), up(m), rhs(m);
            for (std::size_t i = 0; i < m; ++i) {
                rhs[i] = u[c][i] + 0.5 * dt * Au[i] + 0.5 * dt * (b_old[c][i] + b_new[c][i]);
                di[i] = 1.0 + 0.5 * dt * (2.0 * d + nu * k2);
                lo[i] = -0.5 * dt * d;
                up[i] = -0.5 * dt * d;
            }
            if (c == 2) {
                di[0] = 1.0;
                up[0] = 0.0;
                rhs[0] = 0.0;
            } else {
                di[0] = 1.0 - 0.5 * dt * (d * (-2.0 + 2.0 * h * kappa[c]) - nu * k2);
                up[0] = -dt * d;
            }
            u[c] = detail::thomas(lo, di, up, rhs);
        }
        b_old = b_new;
        t = t_new;
        while (next < targets.size() && std::abs(targets[next] - t) <= 0.5 * dt) {
            traj.times.push_back(targets[next++]);
            traj.states.push_back(unrotate(u));
        }
    }
    return traj;
}

/// Trapezoid norm with half weight at z = 0 (the norm in which the oracle is dissipative).
inline double oracle_energy(const ModeField& w, std::initializer_list<std::size_t> comps) {
    const double h = w.grid().spacing();
    double s = 0.0;
    for (std::size_t c : comps)
        for (std::size_t i = 0; i < w.size(); ++i) s += (i == 0 ? 0.5 : 1.0) * h * std::norm(w(c, i));
    return std::sqrt(s);
}

/// Max over the nodes of `a` of |a - b| / max|b|, with b sampled at the same z (b's grid must contain a's nodes).
inline double relative_max_difference(const ModeField& a, const ModeField& b) {
    const HalfLineGrid& ga = a.grid();
    const HalfLineGrid& gb = b.grid();
    const std::size_t stride = gb.intervals() / ga.intervals();
    if (stride * ga.intervals() != gb.intervals() || std::abs(ga.z_max() - gb.z_max()) > 1e-12)
        throw ConfigError("grids are not nested");
    double diff = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < a.components(); ++c)
        for (std::size_t i = 0; i < a.size(); ++i) {
            diff = std::max(diff, std::abs(a(c, i) - b(c, i * stride)));
            scale = std::max(scale, std::abs(b(c, i * stride)));
        }
    return diff / std::max(scale, 1e-300);
}

struct UniquenessReport {
    std::vector<double> times;
    std::vector<double> norm;           ///< max norm of w
    std::vector<double> normal_trace;   ///< max |xi . w_tau| / |xi|
};

/// Homogeneous problem from seeded noise of the given size: no growth, and xi . w_tau stays at noise level.
inline UniquenessReport uniqueness_demo(const FourierMode& mode, double nu, double scale, std::uint64_t seed = 1,
                                        double z_max = 20.0, std::size_t intervals = 400, double dt = 1e-3) {
    const auto grid = HalfLineGrid::uniform(z_max, intervals);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    StokesProblem p;
    p.mode = mode;
    p.nu = nu;
    p.omega0 = ModeField(grid, 3);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i + 1 < grid->size(); ++i) p.omega0(c, i) = scale * cplx(U(rng), U(rng)) / std::sqrt(2.0);
    p.omega0(2, 0) = 0.0;
    const std::vector<double> times{0.0, 0.25, 0.5, 1.0};
    const auto traj = crank_nicolson_oracle(p, dt, times);
    UniquenessReport rep;
    const double k = mode.norm();
    for (std::size_t q = 0; q < traj.times.size(); ++q) {
        const auto& w = traj.states[q];
        rep.times.push_back(traj.times[q]);
        rep.norm.push_back(max_norm(w));
        double tr = 0.0;
        if (k > 0.0)
            for (std::size_t i = 0; i < w.size(); ++i)
                tr = std::max(tr, std::abs(static_cast<double>(mode.xi1()) * w(0, i) + static_cast<double>(mode.xi2()) * w(1, i)) / k);
        rep.normal_trace.push_back(tr);
    }
    return rep;
}

/// Per-mode state at one time, for assembly over a mode set.
struct ModeState {
    FourierMode mode;
    ModeField state;
};

struct PhysicalSamples {
    std::vector<std::array<double, 2>> points;
    std::vector<double> z;
    /// values[p][c][i]: component c at point p and depth z_i
    std::vector<std::array<std::vector<double>, 3>> values;
    double imaginary_residue = 0.0;
};

/// Sum over modes of w_xi(z) e^{i xi . x}; the mode set must be symmetric so the result is real.
inline PhysicalSamples assemble_3d(const std::vector<ModeState>& modes, const std::vector<std::array<double, 2>>& points) {
    std::map<FourierMode, const ModeState*> index;
    for (const auto& m : modes) index[m.mode] = &m;
    for (const auto& m : modes)
        if (!index.count(-m.mode)) throw AsymmetricModeSet("mode " + m.mode.label() + " has no partner");
    if (modes.empty()) throw ConfigError("empty mode set");
    const std::size_t n = modes.front().state.size();
    PhysicalSamples out;
    out.points = points;
    out.z = modes.front().state.grid().nodes();
    double scale = 0.0;
    for (const auto& m : modes) {
        if (m.state.size() != n || m.state.components() != 3) throw ConfigError("mode states must share a grid");
        scale = std::max(scale, max_norm(m.state));
    }
    for (const auto& x : points) {
        std::array<std::vector<double>, 3> v;
        for (int c = 0; c < 3; ++c) {
            v[c].assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                cplx s{};
                for (const auto& m : modes) s += m.state(c, i) * std::polar(1.0, m.mode.xi1() * x[0] + m.mode.xi2() * x[1]);
                v[c][i] = s.real();
                out.imaginary_residue = std::max(out.imaginary_residue, std::abs(s.imag()));
            }
        }
        out.values.push_back(std::move(v));
    }
    if (out.imaginary_residue > 1e-10 * std::max(scale, 1e-300) * static_cast<double>(modes.size()))
        throw IncompatibleData("mode data is not conjugate symmetric");
    return out;
}

} // namespace halfstokes
