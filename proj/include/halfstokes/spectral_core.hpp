#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "halfstokes/errors.hpp"

namespace halfstokes {

using cplx = std::complex<double>;
using Vec2C = std::array<cplx, 2>;

inline constexpr double pi = 3.14159265358979323846;

/// 2x2 complex matrix, row major.
struct Mat2C {
    std::array<cplx, 4> a{};

    static Mat2C identity() { return {{1.0, 0.0, 0.0, 1.0}}; }
    static Mat2C zero() { return {}; }

    cplx& operator()(int i, int j) { return a[2 * i + j]; }
    const cplx& operator()(int i, int j) const { return a[2 * i + j]; }

    cplx det() const { return a[0] * a[3] - a[1] * a[2]; }
    cplx trace() const { return a[0] + a[3]; }

    Mat2C transpose() const { return {{a[0], a[2], a[1], a[3]}}; }

    Mat2C inverse() const {
        const cplx d = det();
        return {{a[3] / d, -a[1] / d, -a[2] / d, a[0] / d}};
    }

    double frobenius() const {
        double s = 0.0;
        for (const auto& x : a) s += std::norm(x);
        return std::sqrt(s);
    }

    Mat2C& operator+=(const Mat2C& o) {
        for (int i = 0; i < 4; ++i) a[i] += o.a[i];
        return *this;
    }
    Mat2C& operator-=(const Mat2C& o) {
        for (int i = 0; i < 4; ++i) a[i] -= o.a[i];
        return *this;
    }
    Mat2C& operator*=(cplx s) {
        for (auto& x : a) x *= s;
        return *this;
    }
};

inline Mat2C operator+(Mat2C l, const Mat2C& r) { return l += r; }
inline Mat2C operator-(Mat2C l, const Mat2C& r) { return l -= r; }
inline Mat2C operator*(Mat2C m, cplx s) { return m *= s; }
inline Mat2C operator*(cplx s, Mat2C m) { return m *= s; }

inline Mat2C operator*(const Mat2C& l, const Mat2C& r) {
    Mat2C out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out(i, j) = l(i, 0) * r(0, j) + l(i, 1) * r(1, j);
    return out;
}

inline Vec2C operator*(const Mat2C& m, const Vec2C& v) {
    return {m(0, 0) * v[0] + m(0, 1) * v[1], m(1, 0) * v[0] + m(1, 1) * v[1]};
}

inline double norm(const Vec2C& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

/// Wavenumber xi in Z^2 of a horizontal Fourier mode.
class FourierMode {
public:
    constexpr FourierMode() = default;
    constexpr FourierMode(int xi1, int xi2) : xi1_(xi1), xi2_(xi2) {}

    constexpr int xi1() const { return xi1_; }
    constexpr int xi2() const { return xi2_; }
    constexpr int norm_squared() const { return xi1_ * xi1_ + xi2_ * xi2_; }
    double norm() const { return std::sqrt(static_cast<double>(norm_squared())); }
    constexpr bool is_zero() const { return xi1_ == 0 && xi2_ == 0; }

    constexpr FourierMode operator-() const { return {-xi1_, -xi2_}; }
    constexpr bool operator==(const FourierMode&) const = default;
    constexpr auto operator<=>(const FourierMode&) const = default;

    /// |xi|^2 I - xi xi^T, the projection onto the direction normal to xi scaled by |xi|^2.
    Mat2C projection() const {
        const double a = xi1_, b = xi2_;
        return {{b * b, -a * b, -a * b, a * a}};
    }

    std::string label() const { return "(" + std::to_string(xi1_) + "," + std::to_string(xi2_) + ")"; }

private:
    int xi1_ = 0;
    int xi2_ = 0;
};

/// Principal root mu with mu^2 = (lambda + nu |xi|^2) / nu and Re mu > 0.
inline cplx spectral_root(cplx lambda, double nu, const FourierMode& mode) {
    if (!(nu > 0.0)) throw ConfigError("viscosity must be positive");
    const cplx shifted = lambda + nu * static_cast<double>(mode.norm_squared());
    if (shifted.imag() == 0.0 && shifted.real() <= 0.0)
        throw BranchCutViolation("lambda + nu|xi|^2 lies on the non-positive real axis");
    const cplx mu = std::exp(0.5 * std::log(shifted / nu));
    if (!(mu.real() > 0.0)) throw BranchCutViolation("spectral root with non-positive real part");
    return mu;
}

/// A resolvent parameter lambda together with its mode, viscosity and root mu.
class SpectralPoint {
public:
    SpectralPoint(cplx lambda, double nu, FourierMode mode)
        : lambda_(lambda), nu_(nu), mode_(mode), mu_(spectral_root(lambda, nu, mode)) {}

    cplx lambda() const { return lambda_; }
    double nu() const { return nu_; }
    const FourierMode& mode() const { return mode_; }
    cplx mu() const { return mu_; }

private:
    cplx lambda_;
    double nu_;
    FourierMode mode_;
    cplx mu_;
};

namespace detail {

/// Finite-difference weights for derivative `order` at x0 from `nodes` (Fornberg's recursion).
inline std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order) {
    const std::size_t n = nodes.size();
    std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const int mn = std::min<int>(static_cast<int>(i), order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = c[i][order];
    return w;
}

inline std::array<double, 8> gauss_legendre8_nodes() {
    return {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
            0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
}

inline std::array<double, 8> gauss_legendre8_weights() {
    return {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
            0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
}

} // namespace detail

/// Nodes 0 = z_0 < ... < z_N = Z_max with positive quadrature weights.
///
/// Weights are composite Simpson over node pairs; an odd trailing interval count
/// closes with the exact integral of the cubic through the last four nodes.
class HalfLineGrid {
public:
    static std::shared_ptr<const HalfLineGrid> uniform(double z_max, std::size_t intervals) {
        if (!(z_max > 0.0)) throw ConfigError("grid length must be positive");
        if (intervals < 2) throw GridTooSmall("a half-line grid needs at least 3 nodes");
        std::vector<double> nodes(intervals + 1);
        for (std::size_t i = 0; i <= intervals; ++i)
            nodes[i] = z_max * static_cast<double>(i) / static_cast<double>(intervals);
        nodes.back() = z_max;
        return std::shared_ptr<const HalfLineGrid>(new HalfLineGrid(std::move(nodes), true));
    }

    static std::shared_ptr<const HalfLineGrid> from_nodes(std::vector<double> nodes) {
        return std::shared_ptr<const HalfLineGrid>(new HalfLineGrid(std::move(nodes), false));
    }

    std::size_t size() const { return nodes_.size(); }
    std::size_t intervals() const { return nodes_.size() - 1; }
    double z_max() const { return nodes_.back(); }
    double operator[](std::size_t i) const { return nodes_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    bool is_uniform() const { return uniform_; }

    double spacing() const {
        if (!uniform_) throw ConfigError("operation requires a uniform grid");
        return nodes_[1] - nodes_[0];
    }

private:
    HalfLineGrid(std::vector<double> nodes, bool uniform) : nodes_(std::move(nodes)), uniform_(uniform) {
        if (nodes_.size() < 3) throw GridTooSmall("a half-line grid needs at least 3 nodes");
        if (nodes_.front() != 0.0) throw ConfigError("grid must start at z = 0");
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            if (!(nodes_[i] > nodes_[i - 1])) throw ConfigError("grid nodes must be strictly increasing");
        if (!uniform_) {
            const double h = nodes_[1] - nodes_[0];
            uniform_ = true;
            for (std::size_t i = 1; i < nodes_.size(); ++i)
                if (std::abs(nodes_[i] - nodes_[i - 1] - h) > 1e-12 * h) uniform_ = false;
        }
        build_weights();
    }

    void build_weights() {
        const std::size_t n = intervals();
        weights_.assign(n + 1, 0.0);
        const std::size_t paired = (n % 2 == 0) ? n : n - 3;
        for (std::size_t j = 0; j < paired; j += 2) {
            const double h1 = nodes_[j + 1] - nodes_[j];
            const double h2 = nodes_[j + 2] - nodes_[j + 1];
            const double s = h1 + h2;
            weights_[j] += s / 6.0 * (2.0 - h2 / h1);
            weights_[j + 1] += s * s * s / (6.0 * h1 * h2);
            weights_[j + 2] += s / 6.0 * (2.0 - h1 / h2);
        }
        if (paired != n) {
            const std::span<const double> tail(nodes_.data() + paired, 4);
            const double a = tail[0], b = tail[3];
            const auto gx = detail::gauss_legendre8_nodes();
            const auto gw = detail::gauss_legendre8_weights();
            for (int q = 0; q < 8; ++q) {
                const double x = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
                for (int k = 0; k < 4; ++k) {
                    double l = 1.0;
                    for (int m = 0; m < 4; ++m)
                        if (m != k) l *= (x - tail[m]) / (tail[k] - tail[m]);
                    weights_[paired + k] += 0.5 * (b - a) * gw[q] * l;
                }
            }
        }
        for (double w : weights_)
            if (!(w > 0.0)) throw ConfigError("grid spacing too irregular for positive quadrature weights");
    }

    std::vector<double> nodes_;
    std::vector<double> weights_;
    bool uniform_;
};

using GridPtr = std::shared_ptr<const HalfLineGrid>;

/// Complex vector field sampled on a HalfLineGrid; one array per component.
class ModeField {
public:
    ModeField() = default;
    ModeField(GridPtr grid, std::size_t components)
        : grid_(std::move(grid)), data_(components, std::vector<cplx>(grid_->size(), cplx{})) {}

    template <class F>
    static ModeField sample(GridPtr grid, std::size_t components, F&& f) {
        ModeField out(std::move(grid), components);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto v = f(out.grid()[i]);
            for (std::size_t c = 0; c < components; ++c) out.data_[c][i] = v[c];
        }
        return out;
    }

    std::size_t components() const { return data_.size(); }
    std::size_t size() const { return grid_ ? grid_->size() : 0; }
    const HalfLineGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    std::vector<cplx>& operator[](std::size_t c) { return data_[c]; }
    const std::vector<cplx>& operator[](std::size_t c) const { return data_[c]; }
    cplx& operator()(std::size_t c, std::size_t i) { return data_[c][i]; }
    cplx operator()(std::size_t c, std::size_t i) const { return data_[c][i]; }

    ModeField& operator+=(const ModeField& o) {
        check_compatible(o);
        for (std::size_t c = 0; c < data_.size(); ++c)
            for (std::size_t i = 0; i < size(); ++i) data_[c][i] += o.data_[c][i];
        return *this;
    }
    ModeField& operator-=(const ModeField& o) {
        check_compatible(o);
        for (std::size_t c = 0; c < data_.size(); ++c)
            for (std::size_t i = 0; i < size(); ++i) data_[c][i] -= o.data_[c][i];
        return *this;
    }
    ModeField& operator*=(cplx s) {
        for (auto& comp : data_)
            for (auto& x : comp) x *= s;
        return *this;
    }

    friend ModeField operator+(ModeField l, const ModeField& r) { return l += r; }
    friend ModeField operator-(ModeField l, const ModeField& r) { return l -= r; }
    friend ModeField operator*(ModeField l, cplx s) { return l *= s; }
    friend ModeField operator*(cplx s, ModeField l) { return l *= s; }

private:
    void check_compatible(const ModeField& o) const {
        if (o.grid_ != grid_ && o.grid_->nodes() != grid_->nodes())
            throw ConfigError("fields live on different grids");
        if (o.components() != components()) throw ConfigError("component count mismatch");
    }

    GridPtr grid_;
    std::vector<std::vector<cplx>> data_;
};

/// Quadrature L2 norm over all components.
inline double l2_norm(const ModeField& f) {
    const auto& w = f.grid().weights();
    double s = 0.0;
    for (std::size_t c = 0; c < f.components(); ++c)
        for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * std::norm(f(c, i));
    return std::sqrt(s);
}

inline double max_norm(const ModeField& f) {
    double m = 0.0;
    for (std::size_t c = 0; c < f.components(); ++c)
        for (const auto& x : f[c]) m = std::max(m, std::abs(x));
    return m;
}

/// Derivative of order `order` with stencils of `points` nodes (one more at one-sided even-order stencils).
inline ModeField differentiate(const ModeField& f, int order, int points) {
    const auto& z = f.grid().nodes();
    const std::size_t n = z.size();
    const std::size_t p = static_cast<std::size_t>(points);
    if (n < p + (order % 2 == 0 ? 1 : 0)) throw GridTooSmall("grid has fewer nodes than the stencil");
    ModeField out(f.grid_ptr(), f.components());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t width = p;
        std::ptrdiff_t start = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(p / 2);
        const bool clamped = start < 0 || start + static_cast<std::ptrdiff_t>(p) > static_cast<std::ptrdiff_t>(n);
        if (clamped && order % 2 == 0 && p % 2 == 1) ++width;
        start = std::clamp<std::ptrdiff_t>(start, 0, static_cast<std::ptrdiff_t>(n - width));
        const std::span<const double> window(z.data() + start, width);
        const auto w = detail::fd_weights(z[i], window, order);
        for (std::size_t c = 0; c < f.components(); ++c) {
            cplx acc{};
            for (std::size_t k = 0; k < width; ++k) acc += w[k] * f(c, start + k);
            out(c, i) = acc;
        }
    }
    return out;
}

/// Second-order first derivative d/dz.
inline ModeField derivative(const ModeField& f) { return differentiate(f, 1, 3); }

/// nu (d^2/dz^2 - |xi|^2) f, second order, one-sided 4-point stencils at both ends.
inline ModeField apply_delta_xi(const ModeField& f, double nu, const FourierMode& mode) {
    if (f.size() < 3) throw GridTooSmall("apply_delta_xi needs at least 3 nodes");
    ModeField out = f.size() >= 4 ? differentiate(f, 2, 3) : ModeField(f.grid_ptr(), f.components());
    if (f.size() == 3) {
        const auto& z = f.grid().nodes();
        const auto w = detail::fd_weights(z[1], std::span<const double>(z.data(), 3), 2);
        for (std::size_t c = 0; c < f.components(); ++c) {
            const cplx d2 = w[0] * f(c, 0) + w[1] * f(c, 1) + w[2] * f(c, 2);
            for (std::size_t i = 0; i < 3; ++i) out(c, i) = d2;
        }
    }
    const double k2 = mode.norm_squared();
    for (std::size_t c = 0; c < f.components(); ++c)
        for (std::size_t i = 0; i < f.size(); ++i) out(c, i) = nu * (out(c, i) - k2 * f(c, i));
    return out;
}

/// m_p(x) = integral_0^1 exp(-x u) u^p du for p = 0, 1, 2.
inline std::array<cplx, 3> exponential_moments(cplx x) {
    if (std::abs(x) < 1.0) {
        std::array<cplx, 3> m{};
        cplx term = 1.0;
        for (int k = 0; k < 40; ++k) {
            for (int p = 0; p < 3; ++p) m[p] += term / static_cast<double>(k + p + 1);
            term *= -x / static_cast<double>(k + 1);
            if (std::abs(term) < 1e-18) break;
        }
        return m;
    }
    const cplx e = std::exp(-x);
    const cplx m0 = (1.0 - e) / x;
    const cplx m1 = (m0 - e) / x;
    const cplx m2 = (2.0 * m1 - e) / x;
    return {m0, m1, m2};
}

/// Values and y-derivatives of integral_0^Zmax (e^{-mu|y-z|} + parity e^{-mu(y+z)}) f(z) dz at the grid nodes.
struct ImageConvolution {
    std::vector<cplx> value;
    std::vector<cplx> derivative;
    cplx laplace_trace;  ///< integral_0^Zmax e^{-mu z} f(z) dz
};

/// Product integration with f replaced by its piecewise quadratic interpolant over node pairs;
/// the exponentials are integrated exactly, so any Re mu > 0 is handled without resolving e^{-mu z}.
/// O(N) via forward and backward recursions.
inline ImageConvolution image_kernel_convolution(const HalfLineGrid& grid, std::span<const cplx> f, cplx mu,
                                                 double parity) {
    const auto& z = grid.nodes();
    const std::size_t n = grid.intervals();
    if (f.size() != z.size()) throw ConfigError("sample count does not match grid");
    std::vector<cplx> fwd(n), bwd(n), decay(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t s = std::min<std::size_t>(2 * (j / 2), n - 2);
        const double x0 = z[s], x1 = z[s + 1], x2 = z[s + 2];
        const double a = z[j], b = z[j + 1], len = b - a;
        const double mid = 0.5 * (a + b);
        auto lagrange = [&](double x) {
            return f[s] * ((x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2))) +
                   f[s + 1] * ((x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2))) +
                   f[s + 2] * ((x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1)));
        };
        const cplx q0 = f[j], q1 = f[j + 1], qm = lagrange(mid);
        const cplx c2 = 2.0 * (q0 - 2.0 * qm + q1);
        const cplx c1 = q1 - q0 - c2;
        const cplx c0 = q0;
        const auto m = exponential_moments(mu * len);
        fwd[j] = len * ((c0 + c1 + c2) * m[0] - (c1 + 2.0 * c2) * m[1] + c2 * m[2]);
        bwd[j] = len * (c0 * m[0] + c1 * m[1] + c2 * m[2]);
        decay[j] = std::exp(-mu * len);
    }
    std::vector<cplx> left(n + 1), right(n + 1);
    left[0] = 0.0;
    for (std::size_t j = 0; j < n; ++j) left[j + 1] = decay[j] * left[j] + fwd[j];
    right[n] = 0.0;
    for (std::size_t j = n; j-- > 0;) right[j] = bwd[j] + decay[j] * right[j + 1];

    ImageConvolution out;
    out.value.resize(n + 1);
    out.derivative.resize(n + 1);
    out.laplace_trace = right[0];
    for (std::size_t i = 0; i <= n; ++i) {
        const cplx image = parity * std::exp(-mu * z[i]) * right[0];
        out.value[i] = left[i] + right[i] + image;
        out.derivative[i] = mu * (right[i] - left[i] - image);
    }
    return out;
}

/// Difference between the product integration on the grid and on its every-other-node subgrid,
/// compared at the shared nodes. Returns a negative value when the subgrid is too small.
inline double image_convolution_halving_gap(const HalfLineGrid& grid, std::span<const cplx> f, cplx mu,
                                            double parity) {
    if (grid.intervals() % 2 != 0 || grid.intervals() < 4) return -1.0;
    std::vector<double> coarse_nodes;
    std::vector<cplx> coarse_f;
    for (std::size_t i = 0; i < grid.size(); i += 2) {
        coarse_nodes.push_back(grid[i]);
        coarse_f.push_back(f[i]);
    }
    const auto coarse = HalfLineGrid::from_nodes(std::move(coarse_nodes));
    const auto fine_r = image_kernel_convolution(grid, f, mu, parity);
    const auto coarse_r = image_kernel_convolution(*coarse, coarse_f, mu, parity);
    double gap = 0.0;
    for (std::size_t i = 0; i < coarse->size(); ++i)
        gap = std::max(gap, std::abs(fine_r.value[2 * i] - coarse_r.value[i]));
    return gap;
}

} // namespace halfstokes
