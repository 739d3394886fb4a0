#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <vector>

#include "halfstokes/errors.hpp"

namespace halfstokes {

struct QuadratureOptions {
    double rel_tol = 1e-11;
    double abs_tol = 0.0;
    int initial_intervals = 4;
    int max_subdivisions = 4000;
};

/// Result of an adaptive integration of a vector-valued integrand.
/// `magnitude` is the integral of the largest component modulus, used to judge cancellation.
template <std::size_t K>
struct QuadratureResult {
    std::array<std::complex<double>, K> value{};
    double error = 0.0;
    double magnitude = 0.0;
    int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kronrod15_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod15_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> gauss7_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t K>
struct Panel {
    double a, b;
    std::array<std::complex<double>, K> value;
    double error;
    double magnitude;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <std::size_t K, class F>
Panel<K> gauss_kronrod_panel(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::array<std::complex<double>, K> kron{}, gauss{};
    double mag = 0.0;
    auto accumulate = [&](const std::array<std::complex<double>, K>& v, double wk, double wg) {
        double m = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            kron[k] += wk * v[k];
            gauss[k] += wg * v[k];
            m = std::max(m, std::abs(v[k]));
        }
        mag += wk * m;
    };
    accumulate(f(c), kronrod15_weights[7], gauss7_weights[3]);
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kronrod15_nodes[j];
        const double wg = (j % 2 == 1) ? gauss7_weights[j / 2] : 0.0;
        accumulate(f(c - dx), kronrod15_weights[j], wg);
        accumulate(f(c + dx), kronrod15_weights[j], wg);
    }
    Panel<K> p{a, b, {}, 0.0, h * mag};
    for (std::size_t k = 0; k < K; ++k) {
        p.value[k] = h * kron[k];
        p.error = std::max(p.error, std::abs(h * (kron[k] - gauss[k])));
    }
    return p;
}

} // namespace detail

/// Globally adaptive 15-point Gauss-Kronrod integration of f: double -> array<complex, K> over [a, b].
/// Stops when the summed error estimate is below max(abs_tol, rel_tol * |I|, 50 eps * magnitude).
/// Throws QuadratureUnderresolved when the subdivision budget runs out.
template <std::size_t K, class F>
QuadratureResult<K> integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
    std::priority_queue<detail::Panel<K>> heap;
    const int n0 = std::max(1, opt.initial_intervals);
    for (int i = 0; i < n0; ++i) {
        const double lo = a + (b - a) * i / n0;
        const double hi = (i + 1 == n0) ? b : a + (b - a) * (i + 1) / n0;
        heap.push(detail::gauss_kronrod_panel<K>(f, lo, hi));
    }
    int evaluations = 15 * n0;
    auto totals = [&](std::array<std::complex<double>, K>& value, double& error, double& mag) {
        auto copy = heap;
        value = {};
        error = 0.0;
        mag = 0.0;
        while (!copy.empty()) {
            const auto& p = copy.top();
            for (std::size_t k = 0; k < K; ++k) value[k] += p.value[k];
            error += p.error;
            mag += p.magnitude;
            copy.pop();
        }
    };
    std::array<std::complex<double>, K> value{};
    double error = 0.0, mag = 0.0;
    totals(value, error, mag);
    auto target = [&] {
        double vmax = 0.0;
        for (const auto& v : value) vmax = std::max(vmax, std::abs(v));
        return std::max({opt.abs_tol, opt.rel_tol * vmax, 50.0 * 2.220446049250313e-16 * mag});
    };
    int splits = 0;
    while (error > target()) {
        if (splits >= opt.max_subdivisions)
            throw QuadratureUnderresolved("adaptive quadrature did not reach the requested tolerance");
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gauss_kronrod_panel<K>(f, worst.a, mid);
        auto right = detail::gauss_kronrod_panel<K>(f, mid, worst.b);
        for (std::size_t k = 0; k < K; ++k) value[k] += left.value[k] + right.value[k] - worst.value[k];
        error += left.error + right.error - worst.error;
        mag += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);
        evaluations += 30;
        ++splits;
        if (splits % 64 == 0) totals(value, error, mag);
    }
    totals(value, error, mag);
    return {value, error, mag, evaluations};
}

} // namespace halfstokes
