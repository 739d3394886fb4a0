#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "halfstokes/errors.hpp"
#include "halfstokes/quadrature.hpp"
#include "halfstokes/resolvent.hpp"
#include "halfstokes/spectral_core.hpp"

namespace halfstokes {

enum class Regime { low_frequency, high_frequency };

inline const char* regime_name(Regime r) { return r == Regime::low_frequency ? "lowfreq" : "highfreq"; }

/// Low frequency when nu |xi|^2 <= 1.
inline Regime natural_regime(double nu, const FourierMode& mode) {
    return nu * mode.norm_squared() <= 1.0 ? Regime::low_frequency : Regime::high_frequency;
}

/// A point of a contour with dmu = d mu / d(parameter) and shift = mu - a, a = s / (2 nu t).
struct ContourPoint {
    cplx lambda;
    cplx mu;
    cplx dmu;
    cplx shift;
};

struct ContourSegment {
    std::string name;
    double begin = 0.0;
    double end = 0.0;
    std::function<ContourPoint(double)> at;
};

/// Deformed inverse-Laplace contour for a fixed t, nu, xi and s = y + z, oriented from
/// Im lambda = -inf to +inf. A pole left of the contour is captured by the integral
/// (encloses_pole_at); a pole right of it needs its residue added (excluded_pole_at).
struct Contour {
    Regime regime = Regime::low_frequency;
    std::vector<ContourSegment> segments;
    double a = 0.0;
    double centre = 0.0;
    double arc_radius = 0.0;
    double theta = 0.0;
    int arc_doublings = 0;
    std::optional<cplx> encloses_pole_at;
    std::optional<cplx> excluded_pole_at;
};

struct KernelOptions {
    std::optional<Regime> regime;       ///< force a contour family; must be admissible
    std::optional<double> arc_radius;   ///< override the default arc radius
    double arc_scale = 1.0;             ///< multiplies the default arc radius
    QuadratureOptions quad{1e-11, 0.0, 4, 4000};
    double truncation = 46.0;           ///< contour tails cut where the Gaussian envelope drops by e^{-truncation}
};

/// Arc radius and pole test for the low-frequency contour.
/// The ball of radius `clearance` around the real pole must sit left of the contour.
inline bool lowfreq_pole_clear(double centre, double M, double pole, double clearance) {
    return (pole + clearance <= centre && M > clearance) || (M > std::abs(pole - centre) + clearance);
}

inline Contour build_contour_lowfreq(double t, double nu, const FourierMode& mode, double s,
                                     const KernelOptions& opt = {}, double pole = 0.0, double clearance = 2.0) {
    if (!(t > 0.0) || !(nu > 0.0) || s < 0.0) throw ConfigError("contour needs t > 0, nu > 0 and s >= 0");
    const double k2 = mode.norm_squared();
    if (nu * k2 > 1.0) throw InvalidRegime("low-frequency contour needs nu |xi|^2 <= 1");
    if (mode.is_zero()) throw ZeroModeUnsupported("the zero mode has no boundary residual kernel");
    Contour c;
    c.regime = Regime::low_frequency;
    c.a = s / (2.0 * nu * t);
    c.centre = -0.5 * nu * k2 + nu * c.a * c.a;
    double M = opt.arc_radius.value_or(opt.arc_scale * 2.0 * std::max(1.0, nu * k2));
    while (!lowfreq_pole_clear(c.centre, M, pole, clearance)) {
        M *= 2.0;
        ++c.arc_doublings;
    }
    c.arc_radius = M;
    c.encloses_pole_at = pole;
    const double a = c.a, centre = c.centre;
    const double bmax = std::sqrt((opt.truncation + M * t) / (nu * t));
    auto ray = [=](double offset) {
        return [=](double b) {
            const cplx lambda(centre - nu * b * b, 2.0 * nu * a * b + offset);
            const cplx mu = std::sqrt((lambda + nu * k2) / nu);
            const cplx dlambda = cplx(0.0, 2.0 * nu) * cplx(a, b);
            const cplx eps(0.5 * k2, offset / nu);
            return ContourPoint{lambda, mu, dlambda / (2.0 * nu * mu), cplx(0.0, b) + eps / (mu + cplx(a, b))};
        };
    };
    c.segments.push_back({"ray_lower", -bmax, 0.0, ray(-M)});
    c.segments.push_back({"arc", -pi / 2.0, pi / 2.0, [=](double phi) {
                              const cplx e = std::polar(1.0, phi);
                              const cplx lambda = centre + M * e;
                              const cplx mu = std::sqrt((lambda + nu * k2) / nu);
                              const cplx eps = 0.5 * k2 + M * e / nu;
                              return ContourPoint{lambda, mu, cplx(0.0, M) * e / (2.0 * nu * mu), eps / (mu + a)};
                          }});
    c.segments.push_back({"ray_upper", 0.0, bmax, ray(M)});
    return c;
}

/// theta = 1/2 when a/sigma lies in [1/2, 3/2], else 1.
inline double highfreq_theta(double a, double sigma) {
    if (sigma <= 0.0) return 1.0;
    const double r = a / sigma;
    return (r >= 0.5 && r <= 1.5) ? 0.5 : 1.0;
}

/// Parabola mu = theta a + i b, lambda = nu(mu^2 - |xi|^2). `sigma` picks theta; the pole is nu(sigma^2 - |xi|^2).
inline Contour build_contour_highfreq(double t, double nu, const FourierMode& mode, double s,
                                      const KernelOptions& opt = {}, std::optional<double> sigma = std::nullopt) {
    if (!(t > 0.0) || !(nu > 0.0) || s < 0.0) throw ConfigError("contour needs t > 0, nu > 0 and s >= 0");
    const double k2 = mode.norm_squared();
    if (nu * k2 < 1.0) throw InvalidRegime("high-frequency contour needs nu |xi|^2 >= 1");
    const double sig = sigma.value_or(mode.norm());
    Contour c;
    c.regime = Regime::high_frequency;
    c.a = s / (2.0 * nu * t);
    c.theta = highfreq_theta(c.a, sig);
    const double pole = nu * (sig * sig - k2);
    const double vertex = nu * (c.theta * c.theta * c.a * c.a - k2);
    if (vertex > pole)
        c.encloses_pole_at = pole;
    else
        c.excluded_pole_at = pole;
    const double re = c.theta * c.a, a = c.a;
    const double bmax = std::sqrt(opt.truncation / (nu * t));
    c.segments.push_back({"parabola", -bmax, bmax, [=](double b) {
                              const cplx mu(re, b);
                              return ContourPoint{nu * (mu * mu - k2), mu, cplx(0.0, 1.0), cplx(re - a, b)};
                          }});
    return c;
}

inline Contour build_contour(double t, double nu, const FourierMode& mode, double s, const KernelOptions& opt,
                             double sigma, double clearance = 2.0) {
    const Regime r = opt.regime.value_or(natural_regime(nu, mode));
    const double pole = nu * (sigma * sigma - mode.norm_squared());
    return r == Regime::low_frequency ? build_contour_lowfreq(t, nu, mode, s, opt, pole, clearance)
                                      : build_contour_highfreq(t, nu, mode, s, opt, sigma);
}

/// (1/2 pi i) int F dmu over each segment; F(point) returns K values.
template <std::size_t K, class F>
std::vector<QuadratureResult<K>> integrate_contour(const Contour& c, F&& f, const QuadratureOptions& q) {
    std::vector<QuadratureResult<K>> out;
    const cplx inv = 1.0 / cplx(0.0, 2.0 * pi);
    for (const auto& seg : c.segments) {
        auto res = integrate_adaptive<K>(
            [&](double x) {
                const ContourPoint p = seg.at(x);
                auto v = f(p);
                for (auto& e : v) e *= p.dmu;
                return v;
            },
            seg.begin, seg.end, q);
        for (auto& e : res.value) e *= inv;
        res.error /= 2.0 * pi;
        res.magnitude /= 2.0 * pi;
        out.push_back(res);
    }
    return out;
}

/// Scalar profile r of the residual kernel R = r D for a rank-one D with trace sigma, and its
/// first two z-derivatives. R1 is the arc (low frequency) or the residue at the excluded pole
/// (high frequency); R2 the remaining contour pieces. All values carry the factor e^{log_shift}.
struct ResidualScalar {
    std::array<cplx, 3> r1{};
    std::array<cplx, 3> r2{};
    double error = 0.0;
    double magnitude = 0.0;
    int evaluations = 0;
    Regime regime = Regime::low_frequency;
    double arc_radius = 0.0;
    double theta = 0.0;
    bool residue_added = false;

    cplx total(int k = 0) const { return r1[k] + r2[k]; }
};

inline ResidualScalar residual_scalar(double t, double nu, const FourierMode& mode, double sigma, double s,
                                      const KernelOptions& opt = {}, double log_shift = 0.0,
                                      double clearance = 2.0) {
    ResidualScalar out;
    out.regime = opt.regime.value_or(natural_regime(nu, mode));
    if (sigma <= 0.0) return out;
    const Contour c = build_contour(t, nu, mode, s, opt, sigma, clearance);
    out.arc_radius = c.arc_radius;
    out.theta = c.theta;
    const double base = log_shift - s * s / (4.0 * nu * t) - nu * mode.norm_squared() * t;
    auto integrand = [&](const ContourPoint& p) {
        const cplx e = 2.0 * std::exp(nu * t * p.shift * p.shift + base) / (p.mu - sigma);
        return std::array<cplx, 3>{e, -p.mu * e, p.mu * p.mu * e};
    };
    const auto parts = integrate_contour<3>(c, integrand, opt.quad);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        auto& target = (c.segments[i].name == "arc") ? out.r1 : out.r2;
        for (int k = 0; k < 3; ++k) target[k] += parts[i].value[k];
        out.error += parts[i].error;
        out.magnitude += parts[i].magnitude;
        out.evaluations += parts[i].evaluations;
    }
    if (c.excluded_pole_at) {
        const double pole = c.excluded_pole_at->real();
        const double res = 2.0 * std::exp(pole * t - sigma * s + log_shift);
        out.r1 = {res, -sigma * res, sigma * sigma * res};
        out.residue_added = true;
    }
    return out;
}

/// R^(1), R^(2) as matrices (k-th z-derivative).
struct ResidualKernel {
    Mat2C r1, r2;
    ResidualScalar scalar;
    Mat2C total() const { return r1 + r2; }
};

inline ResidualKernel residual_kernel_general(double t, double nu, const BoundaryOperatorD& D, double y, double z,
                                              const KernelOptions& opt = {}, int k = 0) {
    if (k < 0 || k > 2) throw ConfigError("derivative order must be 0, 1 or 2");
    if (y < 0.0 || z < 0.0) throw ConfigError("kernel arguments must be nonnegative");
    ResidualKernel out;
    out.scalar = residual_scalar(t, nu, D.mode(), D.sigma(), y + z, opt, 0.0, 2.0 * D.c0());
    out.r1 = D.matrix() * out.scalar.r1[k];
    out.r2 = D.matrix() * out.scalar.r2[k];
    return out;
}

/// Residual kernel of the no-slip vorticity condition.
inline ResidualKernel residual_kernel_time(double t, double nu, const FourierMode& mode, double y, double z,
                                           const KernelOptions& opt = {}, int k = 0) {
    if (mode.is_zero()) throw ZeroModeUnsupported("the zero mode has no boundary residual kernel");
    return residual_kernel_general(t, nu, BoundaryOperatorD::vorticity(mode), y, z, opt, k);
}

/// Residue of e^{lambda t} R_lambda at lambda = 0: (2/|xi|) P(xi) e^{-|xi|(y+z)}.
inline Mat2C residue_at_zero(double /*t*/, double /*nu*/, const FourierMode& mode, double y, double z) {
    if (mode.is_zero()) throw ZeroModeUnsupported("no residue for the zero mode");
    const double k = mode.norm();
    return mode.projection() * (2.0 / k * std::exp(-k * (y + z)));
}

/// Residue at lambda* = nu(sigma^2 - |xi|^2): 2 D e^{lambda* t - sigma (y+z)}.
inline Mat2C residue_general(double t, double nu, const BoundaryOperatorD& D, double y, double z) {
    return D.matrix() * (2.0 * std::exp(D.pole(nu) * t - D.sigma() * (y + z)));
}

/// Neumann heat kernel at mode xi, normalised so that it tends to delta_y as t -> 0.
inline double heat_kernel_neumann(double t, double nu, const FourierMode& mode, double y, double z) {
    const double d = 4.0 * nu * t;
    return (std::exp(-(z - y) * (z - y) / d) + std::exp(-(z + y) * (z + y) / d)) / std::sqrt(pi * d) *
           std::exp(-nu * mode.norm_squared() * t);
}

inline double heat_kernel_dirichlet(double t, double nu, const FourierMode& mode, double y, double z) {
    const double d = 4.0 * nu * t;
    return (std::exp(-(z - y) * (z - y) / d) - std::exp(-(z + y) * (z + y) / d)) / std::sqrt(pi * d) *
           std::exp(-nu * mode.norm_squared() * t);
}

/// Resolvent kernel from a root pair (lambda, mu): H I + ((mu+|xi|)/(mu lambda |xi|)) P e^{-mu(y+z)}.
inline Mat2C resolvent_kernel_at(cplx lambda, cplx mu, double nu, const FourierMode& mode, double y, double z) {
    const cplx h = (std::exp(-mu * std::abs(y - z)) + std::exp(-mu * (y + z))) / (2.0 * nu * mu);
    Mat2C g = Mat2C::identity() * h;
    if (!mode.is_zero()) {
        if (lambda == cplx(0.0)) throw ZeroLambda("resolvent kernel has a pole at lambda = 0");
        const double k = mode.norm();
        g += mode.projection() * ((mu + k) / (mu * lambda * k) * std::exp(-mu * (y + z)));
    }
    return g;
}

inline Mat2C resolvent_kernel(const SpectralPoint& p, double y, double z) {
    if (y < 0.0 || z < 0.0) throw ConfigError("kernel arguments must be nonnegative");
    return resolvent_kernel_at(p.lambda(), p.mu(), p.nu(), p.mode(), y, z);
}

/// Resolvent kernel under a general admissible D: H I + D e^{-mu(y+z)} / (nu mu (mu - sigma)).
inline Mat2C resolvent_kernel_general_at(cplx mu, double nu, const BoundaryOperatorD& D, double y, double z) {
    const cplx h = (std::exp(-mu * std::abs(y - z)) + std::exp(-mu * (y + z))) / (2.0 * nu * mu);
    return Mat2C::identity() * h + D.matrix() * (std::exp(-mu * (y + z)) / (nu * mu * (mu - D.sigma())));
}

/// Time-domain Green's function G = H I + R1 + R2.
struct GreenSample {
    Mat2C heat, r1, r2;
    ResidualScalar info;
    Mat2C total() const { return heat + r1 + r2; }
};

inline GreenSample green_function_general(double t, double nu, const BoundaryOperatorD& D, double y, double z,
                                          const KernelOptions& opt = {}) {
    GreenSample g;
    g.heat = Mat2C::identity() * heat_kernel_neumann(t, nu, D.mode(), y, z);
    if (!D.is_zero()) {
        const auto r = residual_kernel_general(t, nu, D, y, z, opt);
        g.r1 = r.r1;
        g.r2 = r.r2;
        g.info = r.scalar;
    }
    return g;
}

inline GreenSample green_function(double t, double nu, const FourierMode& mode, double y, double z,
                                  const KernelOptions& opt = {}) {
    return green_function_general(t, nu, BoundaryOperatorD::vorticity(mode), y, z, opt);
}

/// Green's function on a tensor grid of (y, z) nodes; values(i, j) = heat + r1 + r2 at (y_i, z_j).
struct KernelSample {
    double t = 0.0;
    double nu = 0.0;
    FourierMode mode;
    std::vector<double> y_nodes, z_nodes;
    std::vector<GreenSample> parts;
    double max_error = 0.0;  ///< largest quadrature error estimate over the residual profiles
    std::vector<Regime> regimes_used;

    const GreenSample& at(std::size_t i, std::size_t j) const { return parts[i * z_nodes.size() + j]; }
    Mat2C value(std::size_t i, std::size_t j) const { return at(i, j).total(); }
};

/// The residual part depends on y + z only; each distinct sum is integrated once.
inline KernelSample sample_green_function(double t, double nu, const BoundaryOperatorD& D, std::vector<double> ys,
                                          std::vector<double> zs, const KernelOptions& opt = {}) {
    KernelSample out;
    out.t = t;
    out.nu = nu;
    out.mode = D.mode();
    out.y_nodes = std::move(ys);
    out.z_nodes = std::move(zs);
    std::map<double, ResidualScalar> cache;
    out.parts.reserve(out.y_nodes.size() * out.z_nodes.size());
    for (double y : out.y_nodes) {
        for (double z : out.z_nodes) {
            if (y < 0.0 || z < 0.0) throw ConfigError("kernel arguments must be nonnegative");
            GreenSample g;
            g.heat = Mat2C::identity() * heat_kernel_neumann(t, nu, D.mode(), y, z);
            if (!D.is_zero()) {
                auto it = cache.find(y + z);
                if (it == cache.end())
                    it = cache.emplace(y + z, residual_scalar(t, nu, D.mode(), D.sigma(), y + z, opt, 0.0, 2.0 * D.c0()))
                             .first;
                g.info = it->second;
                g.r1 = D.matrix() * g.info.r1[0];
                g.r2 = D.matrix() * g.info.r2[0];
                out.max_error = std::max(out.max_error, g.info.error);
                if (std::find(out.regimes_used.begin(), out.regimes_used.end(), g.info.regime) == out.regimes_used.end())
                    out.regimes_used.push_back(g.info.regime);
            }
            out.parts.push_back(g);
        }
    }
    return out;
}

/// Green's function by direct contour quadrature of e^{lambda t} G_lambda (no splitting into heat and
/// residual parts), using the contour built for |y - z|; the residue at an excluded pole is added.
inline Mat2C green_contour_integral(double t, double nu, const FourierMode& mode, double y, double z,
                                   const KernelOptions& opt = {}) {
    if (mode.is_zero()) throw ZeroModeUnsupported("contour route needs a nonzero mode");
    const Contour c = build_contour(t, nu, mode, std::abs(y - z), opt, mode.norm());
    auto integrand = [&](const ContourPoint& p) {
        const Mat2C g = resolvent_kernel_at(p.lambda, p.mu, nu, mode, y, z) * (2.0 * nu * p.mu * std::exp(p.lambda * t));
        return g.a;
    };
    Mat2C out;
    for (const auto& part : integrate_contour<4>(c, integrand, opt.quad)) out.a = (out + Mat2C{part.value}).a;
    if (c.excluded_pole_at) out += residue_at_zero(t, nu, mode, y, z);
    return out;
}

/// Same as green_contour_integral for a general D.
inline Mat2C green_contour_integral_general(double t, double nu, const BoundaryOperatorD& D, double y, double z,
                                           const KernelOptions& opt = {}) {
    const FourierMode& mode = D.mode();
    if (mode.is_zero()) throw ZeroModeUnsupported("contour route needs a nonzero mode");
    const Contour c = build_contour(t, nu, mode, std::abs(y - z), opt, D.sigma(), 2.0 * D.c0());
    auto integrand = [&](const ContourPoint& p) {
        const Mat2C g = resolvent_kernel_general_at(p.mu, nu, D, y, z) * (2.0 * nu * p.mu * std::exp(p.lambda * t));
        return g.a;
    };
    Mat2C out;
    for (const auto& part : integrate_contour<4>(c, integrand, opt.quad)) out.a = (out + Mat2C{part.value}).a;
    if (c.excluded_pole_at && !D.is_zero()) out += residue_general(t, nu, D, y, z);
    return out;
}

/// Values r(t, j h), j = 0..count-1, of the residual profile for a uniform spacing h.
/// Evaluation stops once the profile has decayed below `cutoff` times its value at s = 0; the rest is zero.
inline std::vector<cplx> residual_profile(double t, double nu, const FourierMode& mode, double sigma, double h,
                                          std::size_t count, const KernelOptions& opt = {},
                                          double cutoff = 1e-17, double clearance = 2.0) {
    std::vector<cplx> r(count, cplx{});
    double head = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        r[j] = residual_scalar(t, nu, mode, sigma, h * static_cast<double>(j), opt, 0.0, clearance).total();
        head = std::max(head, std::abs(r[j]));
        if (j > 0 && std::abs(r[j]) <= cutoff * head && std::abs(r[j - 1]) <= cutoff * head) break;
    }
    return r;
}

/// Heat semigroup on a uniform grid, f replaced by its piecewise-linear interpolant and the Gaussian
/// integrated exactly against each hat; parity +1 gives the Neumann and -1 the Dirichlet kernel.
class HeatPropagator {
public:
    HeatPropagator(double t, double nu, const FourierMode& mode, const HalfLineGrid& grid)
        : n_(grid.intervals()), damping_(std::exp(-nu * mode.norm_squared() * t)) {
        const double h = grid.spacing();
        const double width = std::sqrt(4.0 * nu * t);
        reach_ = static_cast<std::ptrdiff_t>(std::ceil(9.0 * width / h)) + 2;
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(n_);
        half_.assign(4 * n_ + 1, 0.0);
        for (std::ptrdiff_t m = -2 * n; m <= 2 * n; ++m) half_[m + 2 * n] = right_half_hat(m * h, h, width);
    }

    std::vector<cplx> apply(std::span<const cplx> f, double parity) const {
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(n_);
        std::vector<cplx> out(n_ + 1, cplx{});
        for (std::ptrdiff_t i = 0; i <= n; ++i) {
            cplx acc{};
            const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - reach_);
            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, i + reach_);
            for (std::ptrdiff_t j = lo; j <= hi; ++j) acc += f[j] * direct(i, j);
            const std::ptrdiff_t ihi = std::min<std::ptrdiff_t>(n, reach_ - i);
            for (std::ptrdiff_t j = 0; j <= ihi; ++j) acc += parity * f[j] * image(i, j);
            out[i] = damping_ * acc;
        }
        return out;
    }

private:
    /// int_0^h g(c + u)(1 - u/h) du for the Gaussian g of variance width^2 / 2.
    static double right_half_hat(double c, double h, double width) {
        const double gap = std::max({0.0, c, -(c + h)});
        if (gap > 9.0 * width) return 0.0;
        auto g = [&](double x) { return std::exp(-x * x / (width * width)) / (std::sqrt(pi) * width); };
        if (h < 0.5 * width) {
            const auto gx = detail::gauss_legendre8_nodes();
            const auto gw = detail::gauss_legendre8_weights();
            double s = 0.0;
            for (int q = 0; q < 8; ++q) {
                const double u = 0.5 * h * (1.0 + gx[q]);
                s += gw[q] * g(c + u) * (1.0 - u / h);
            }
            return 0.5 * h * s;
        }
        const double a = c / width, b = (c + h) / width;
        const double derf = (a >= 0.0) ? std::erfc(a) - std::erfc(b)
                            : (b <= 0.0) ? std::erfc(-b) - std::erfc(-a)
                                         : std::erf(b) - std::erf(a);
        return (1.0 + c / h) * 0.5 * derf -
               width / (2.0 * std::sqrt(pi) * h) * (std::exp(-a * a) - std::exp(-b * b));
    }

    double wr(std::ptrdiff_t m) const { return half_[m + 2 * static_cast<std::ptrdiff_t>(n_)]; }

    double direct(std::ptrdiff_t i, std::ptrdiff_t j) const {
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(n_);
        if (j == 0) return wr(-i);
        if (j == n) return wr(i - n);
        return wr(j - i) + wr(i - j);
    }

    double image(std::ptrdiff_t i, std::ptrdiff_t j) const {
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(n_);
        if (j == 0) return wr(i);
        if (j == n) return wr(-i - n);
        return wr(i + j) + wr(-i - j);
    }

    std::size_t n_;
    double damping_;
    std::ptrdiff_t reach_ = 0;
    std::vector<double> half_;
};

/// Sweep for the kernel bound certificate.
struct BoundSweep {
    std::vector<double> nus{1.0, 0.04};
    std::vector<int> wavenumbers{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<double> times;
    std::vector<double> sums;
    double theta0 = 0.25;
    /// Empty: the vorticity operator. Otherwise rank-one D with trace factor * |xi| along xi-perp.
    std::vector<double> sigma_factors;
    double c0 = 2.0;

    static BoundSweep standard() {
        BoundSweep s;
        for (int i = 0; i <= 8; ++i) s.times.push_back(std::pow(10.0, -2.0 + 0.25 * i));
        for (int i = 0; i <= 20; ++i) s.sums.push_back(0.5 * i);
        return s;
    }
};

/// Suprema of |d^k R1| / (mu0^{k+1} e^{-theta0 mu0 s} e^{lambda* t}) and
/// |d^k R2| (nu t)^{(k+1)/2} e^{s^2/(4 nu t)} e^{nu|xi|^2 t/8}, plus log10 of the R2 ratio with e^{s^2/(nu t)}.
struct BoundReport {
    std::array<double, 3> sup_r1{};
    std::array<double, 3> sup_r2{};
    std::array<double, 3> sup_log10_r2_literal{-1e300, -1e300, -1e300};
    int samples = 0;
    bool finite = true;
};

inline BoundReport kernel_bound_ratios(const BoundSweep& sweep, const KernelOptions& opt = {}) {
    BoundReport rep;
    const double ln10 = std::log(10.0);
    for (double nu : sweep.nus) {
        for (int n : sweep.wavenumbers) {
            const FourierMode mode(n, 0);
            std::vector<BoundaryOperatorD> ops;
            if (sweep.sigma_factors.empty())
                ops.push_back(BoundaryOperatorD::vorticity(mode));
            else
                for (double f : sweep.sigma_factors)
                    ops.push_back(BoundaryOperatorD::rank_one(f * mode.norm(), pi / 2.0, sweep.c0, mode));
            const double mu0 = mode.norm() + 1.0 / std::sqrt(nu);
            for (const auto& D : ops) {
                const double dn = D.matrix().frobenius();
                const double pole = D.pole(nu);
                for (double t : sweep.times) {
                    for (double s : sweep.sums) {
                        const double g2 = s * s / (4.0 * nu * t);
                        const double shift1 = sweep.theta0 * mu0 * s - pole * t;
                        const double shift2 = g2 + nu * mode.norm_squared() * t / 8.0;
                        const auto a = residual_scalar(t, nu, mode, D.sigma(), s, opt, shift1, 2.0 * D.c0());
                        const auto b = residual_scalar(t, nu, mode, D.sigma(), s, opt, shift2, 2.0 * D.c0());
                        ++rep.samples;
                        for (int k = 0; k < 3; ++k) {
                            const double q1 = std::abs(a.r1[k]) * dn / std::pow(mu0, k + 1);
                            const double q2 = std::abs(b.r2[k]) * dn * std::pow(nu * t, 0.5 * (k + 1));
                            if (!std::isfinite(q1) || !std::isfinite(q2)) rep.finite = false;
                            rep.sup_r1[k] = std::max(rep.sup_r1[k], q1);
                            rep.sup_r2[k] = std::max(rep.sup_r2[k], q2);
                            if (q2 > 0.0)
                                rep.sup_log10_r2_literal[k] =
                                    std::max(rep.sup_log10_r2_literal[k], std::log10(q2) + 3.0 * g2 / ln10);
                        }
                    }
                }
            }
        }
    }
    return rep;
}

/// Bound ratios at the given and at doubled quadrature resolution, with their relative drift.
struct BoundCertificate {
    BoundReport base, refined;
    double max_drift = 0.0;
    bool stable() const { return base.finite && refined.finite && max_drift < 0.1; }
};

inline BoundCertificate verify_kernel_bounds(const BoundSweep& sweep, const KernelOptions& opt = {}) {
    BoundCertificate cert;
    cert.base = kernel_bound_ratios(sweep, opt);
    KernelOptions fine = opt;
    fine.quad.rel_tol = opt.quad.rel_tol / 100.0;
    fine.quad.initial_intervals = 2 * opt.quad.initial_intervals;
    fine.truncation = opt.truncation + 10.0;
    cert.refined = kernel_bound_ratios(sweep, fine);
    for (int k = 0; k < 3; ++k) {
        for (auto [x, y] : {std::pair{cert.base.sup_r1[k], cert.refined.sup_r1[k]},
                            std::pair{cert.base.sup_r2[k], cert.refined.sup_r2[k]}}) {
            const double d = std::abs(x - y) / std::max(std::abs(y), 1e-300);
            cert.max_drift = std::max(cert.max_drift, d);
        }
    }
    return cert;
}

} // namespace halfstokes
