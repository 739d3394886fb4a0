#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "halfstokes/errors.hpp"
#include "halfstokes/spectral_core.hpp"

namespace halfstokes {

/// Symmetric rank-one boundary operator D = [[alpha, gamma], [gamma, beta]] in the condition
/// d/dz u + D u = 0 at z = 0, with det D = 0, alpha, beta >= 0 and alpha + beta <= c0 |xi|.
class BoundaryOperatorD {
public:
    BoundaryOperatorD(double alpha, double beta, double gamma_off, double c0, FourierMode mode)
        : alpha_(alpha), beta_(beta), gamma_(gamma_off), c0_(c0), mode_(mode) {
        if (!(c0 > 0.0)) throw HypothesisViolated("c0 must be positive");
        if (alpha < 0.0 || beta < 0.0) throw HypothesisViolated("diagonal entries of D must be nonnegative");
        const double scale = std::max({1.0, alpha * alpha, beta * beta});
        if (std::abs(alpha * beta - gamma_off * gamma_off) >= 1e-12 * scale)
            throw HypothesisViolated("D must have zero determinant");
        if (alpha + beta > c0 * mode.norm() * (1.0 + 1e-14))
            throw HypothesisViolated("alpha + beta exceeds c0 |xi|");
    }

    /// The operator of the no-slip vorticity condition: P(xi)/|xi|, or 0 for the zero mode.
    static BoundaryOperatorD vorticity(const FourierMode& mode) {
        if (mode.is_zero()) return {0.0, 0.0, 0.0, 1.0, mode};
        const double k = mode.norm();
        const double a = mode.xi1(), b = mode.xi2();
        return {b * b / k, a * a / k, -a * b / k, 1.0, mode};
    }

    /// sigma n n^T with n the unit vector at angle `angle`.
    static BoundaryOperatorD rank_one(double sigma, double angle, double c0, const FourierMode& mode) {
        const double c = std::cos(angle), s = std::sin(angle);
        return {sigma * c * c, sigma * s * s, sigma * c * s, c0, mode};
    }

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double gamma_off() const { return gamma_; }
    double c0() const { return c0_; }
    const FourierMode& mode() const { return mode_; }

    /// Trace alpha + beta, the only nonzero eigenvalue.
    double sigma() const { return alpha_ + beta_; }
    bool is_zero() const { return alpha_ == 0.0 && beta_ == 0.0 && gamma_ == 0.0; }

    Mat2C matrix() const { return {{alpha_, gamma_, gamma_, beta_}}; }

    /// nu(sigma^2 - |xi|^2), where mu(lambda) = sigma.
    double pole(double nu) const { return nu * (sigma() * sigma() - mode_.norm_squared()); }

private:
    double alpha_, beta_, gamma_, c0_;
    FourierMode mode_;
};

struct ResolventOptions {
    /// Maximum grid-halving gap of the free part, relative to its max norm; <= 0 disables the check.
    double halving_tolerance = 1e-6;
};

/// u = v + w, with v the Neumann (even image) free part and w = c0 e^{-mu z} the boundary correction.
struct ResolventSolution {
    ModeField u, v, w;
    ModeField du;  ///< d/dz u from the exact derivatives of the closed forms
    SpectralPoint point;
    Mat2C D;
    Vec2C v0{};
    Vec2C c0{};
    double boundary_residual = 0.0;  ///< |d/dz u(0) + D u(0)|
    double quadrature_gap = 0.0;
};

namespace detail {

struct FreePart {
    ModeField v, dv;
    double gap = 0.0;
};

inline FreePart free_part(const ModeField& f, const SpectralPoint& point, const ResolventOptions& opt) {
    const cplx mu = point.mu();
    const cplx scale = 1.0 / (2.0 * point.nu() * mu);
    FreePart out{ModeField(f.grid_ptr(), f.components()), ModeField(f.grid_ptr(), f.components())};
    double vmax = 0.0;
    for (std::size_t c = 0; c < f.components(); ++c) {
        const auto conv = image_kernel_convolution(f.grid(), f[c], mu, 1.0);
        for (std::size_t i = 0; i < f.size(); ++i) {
            out.v(c, i) = scale * conv.value[i];
            out.dv(c, i) = scale * conv.derivative[i];
            vmax = std::max(vmax, std::abs(out.v(c, i)));
        }
        if (opt.halving_tolerance > 0.0) {
            const double gap = image_convolution_halving_gap(f.grid(), f[c], mu, 1.0);
            out.gap = std::max(out.gap, gap * std::abs(scale));
        }
    }
    if (opt.halving_tolerance > 0.0 && out.gap > opt.halving_tolerance * std::max(vmax, 1e-300))
        throw QuadratureUnderresolved("free-part quadrature changes by more than the tolerance under grid halving");
    return out;
}

inline ResolventSolution assemble(const ModeField& f, const SpectralPoint& point, const Mat2C& D, const Vec2C& c0,
                                  FreePart free) {
    const cplx mu = point.mu();
    ModeField w(f.grid_ptr(), 2), dw(f.grid_ptr(), 2);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const cplx e = std::exp(-mu * f.grid()[i]);
        for (int c = 0; c < 2; ++c) {
            w(c, i) = c0[c] * e;
            dw(c, i) = -mu * c0[c] * e;
        }
    }
    ResolventSolution sol{free.v + w, free.v, w, free.dv + dw, point, D, {free.v(0, 0), free.v(1, 0)}, c0};
    const Vec2C u0{sol.u(0, 0), sol.u(1, 0)};
    const Vec2C Du0 = D * u0;
    sol.boundary_residual = norm(Vec2C{sol.du(0, 0) + Du0[0], sol.du(1, 0) + Du0[1]});
    sol.quadrature_gap = free.gap;
    return sol;
}

} // namespace detail

/// v(y) = (1/2 nu mu) int (e^{-mu|y-z|} + e^{-mu(y+z)}) f(z) dz on every node.
inline ModeField free_part_v(const ModeField& f, const SpectralPoint& point, const ResolventOptions& opt = {}) {
    return detail::free_part(f, point, opt).v;
}

/// B = (mu - |xi|) I + xi xi^T / |xi|.
inline Mat2C boundary_matrix_B(const SpectralPoint& point) {
    const auto& mode = point.mode();
    if (mode.is_zero()) throw ZeroModeUnsupported("boundary matrix undefined for the zero mode");
    const double k = mode.norm();
    const cplx mu = point.mu();
    if (std::abs(mu) <= 1e-12 * k || std::abs(mu - k) <= 1e-12 * k)
        throw SingularB("boundary matrix singular: mu = 0 or mu = |xi|");
    const double a = mode.xi1(), b = mode.xi2();
    return {{mu - k + a * a / k, a * b / k, a * b / k, mu - k + b * b / k}};
}

/// Boundary coefficient c0 = B^{-1}(|xi| v(0) - xi (xi . v(0)) / |xi|).
inline Vec2C correction_coefficient(const Vec2C& v0, const SpectralPoint& point) {
    const Mat2C B = boundary_matrix_B(point);
    const auto& mode = point.mode();
    const double k = mode.norm();
    const cplx dot = static_cast<double>(mode.xi1()) * v0[0] + static_cast<double>(mode.xi2()) * v0[1];
    const Vec2C rhs{k * v0[0] - static_cast<double>(mode.xi1()) * dot / k,
                    k * v0[1] - static_cast<double>(mode.xi2()) * dot / k};
    return B.inverse() * rhs;
}

/// w(y) = c0 e^{-mu y} computed from the boundary trace of v.
inline ModeField correction_w(const ModeField& v, const SpectralPoint& point) {
    const Vec2C c0 = correction_coefficient({v(0, 0), v(1, 0)}, point);
    ModeField w(v.grid_ptr(), 2);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const cplx e = std::exp(-point.mu() * v.grid()[i]);
        w(0, i) = c0[0] * e;
        w(1, i) = c0[1] * e;
    }
    return w;
}

/// (lambda - nu Delta_xi)^{-1} f under the no-slip vorticity condition; pure Neumann for the zero mode.
inline ResolventSolution resolvent_apply(const ModeField& f, const SpectralPoint& point,
                                         const ResolventOptions& opt = {}) {
    if (f.components() != 2) throw ConfigError("resolvent acts on two-component fields");
    const auto D = BoundaryOperatorD::vorticity(point.mode());
    if (point.mode().is_zero())
        return detail::assemble(f, point, D.matrix(), {}, detail::free_part(f, point, opt));
    auto free = detail::free_part(f, point, opt);
    const Vec2C c0 = correction_coefficient({free.v(0, 0), free.v(1, 0)}, point);
    return detail::assemble(f, point, D.matrix(), c0, std::move(free));
}

/// Resolvent under d/dz u + D u = 0 at z = 0 for an admissible D.
inline ResolventSolution resolvent_apply_general(const ModeField& f, const SpectralPoint& point,
                                                 const BoundaryOperatorD& D, const ResolventOptions& opt = {}) {
    if (f.components() != 2) throw ConfigError("resolvent acts on two-component fields");
    const double k2 = point.mode().norm_squared();
    const double nu = point.nu();
    if (std::abs(point.lambda() - D.pole(nu)) < 1e-12 * nu * std::max(k2, 1.0))
        throw PoleHit("lambda coincides with the boundary pole nu(sigma^2 - |xi|^2)");
    auto free = detail::free_part(f, point, opt);
    const Mat2C Dm = D.matrix();
    const Mat2C B = point.mu() * Mat2C::identity() - Dm;
    const Vec2C c0 = B.inverse() * (Dm * Vec2C{free.v(0, 0), free.v(1, 0)});
    return detail::assemble(f, point, Dm, c0, std::move(free));
}

/// max over interior nodes of |(lambda - nu Delta_xi) u - f| with the second-order stencil.
inline double resolvent_interior_residual(const ResolventSolution& sol, const ModeField& f) {
    const auto lap = apply_delta_xi(sol.u, sol.point.nu(), sol.point.mode());
    double r = 0.0;
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 1; i + 1 < f.size(); ++i)
            r = std::max(r, std::abs(sol.point.lambda() * sol.u(c, i) - lap(c, i) - f(c, i)));
    return r;
}

/// Sum of one to three Gaussian bumps with random centres in [0, Z/3], widths in [0.2, 1.5]
/// and standard normal complex amplitudes per component.
inline ModeField random_bump_field(const GridPtr& grid, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_real_distribution<double> centre(0.0, grid->z_max() / 3.0);
    std::uniform_real_distribution<double> width(0.2, 1.5);
    std::normal_distribution<double> amp(0.0, 1.0);
    ModeField f(grid, 2);
    const int n = count(rng);
    for (int b = 0; b < n; ++b) {
        const double z0 = centre(rng), s = width(rng);
        const cplx a0(amp(rng), amp(rng)), a1(amp(rng), amp(rng));
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double x = (grid->nodes()[i] - z0) / s;
            const double g = std::exp(-0.5 * x * x);
            f(0, i) += a0 * g;
            f(1, i) += a1 * g;
        }
    }
    return f;
}

struct ResolventBoundReport {
    double sup_l2_ratio = 0.0;  ///< |lambda + nu|xi|^2| ||u|| / ||f||
    double sup_h1_ratio = 0.0;  ///< sqrt(nu) |lambda + nu|xi|^2|^{1/2} ||u||_{H^1_xi} / ||f||
    int trials = 0;
    std::uint64_t seed = 0;
};

/// H^1 norm at mode xi: (||d/dz u||^2 + |xi|^2 ||u||^2)^{1/2}.
inline double h1_norm(const ModeField& u, const ModeField& du, const FourierMode& mode) {
    const double a = l2_norm(du), b = l2_norm(u);
    return std::sqrt(a * a + mode.norm_squared() * b * b);
}

/// Sup of the resolvent ratios over `trials` seeded random bump data on `grid`.
inline ResolventBoundReport check_resolvent_bound(const SpectralPoint& point, int trials, std::uint64_t seed,
                                                  const GridPtr& grid) {
    std::mt19937_64 rng(seed);
    ResolventBoundReport rep;
    rep.trials = trials;
    rep.seed = seed;
    const double shift = std::abs(point.lambda() + point.nu() * point.mode().norm_squared());
    ResolventOptions opt;
    opt.halving_tolerance = 0.0;
    for (int k = 0; k < trials; ++k) {
        const ModeField f = random_bump_field(grid, rng);
        const auto sol = resolvent_apply(f, point, opt);
        const double fn = l2_norm(f);
        rep.sup_l2_ratio = std::max(rep.sup_l2_ratio, l2_norm(sol.u) * shift / fn);
        rep.sup_h1_ratio = std::max(rep.sup_h1_ratio,
                                    h1_norm(sol.u, sol.du, point.mode()) * std::sqrt(point.nu() * shift) / fn);
    }
    return rep;
}

} // namespace halfstokes
