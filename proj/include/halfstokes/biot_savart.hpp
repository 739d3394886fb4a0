#pragma once

#include <array>
#include <cmath>
#include <string>

#include "halfstokes/errors.hpp"
#include "halfstokes/spectral_core.hpp"

namespace halfstokes {

/// (u1, u2, u3) at one Fourier mode: a three-component ModeField.
using VelocityModeField = ModeField;

namespace detail {

inline void require_nonzero(const FourierMode& mode) {
    if (mode.is_zero()) throw ZeroModeUnsupported("the half-line Laplace inverses need |xi| > 0");
}

inline void check_decay(const std::vector<cplx>& f, Diagnostics* diag, const char* what) {
    if (!diag || f.empty()) return;
    double peak = 0.0;
    for (const auto& x : f) peak = std::max(peak, std::abs(x));
    if (std::abs(f.back()) >= 1e-10 * peak && peak > 0.0)
        diag->warn(WarningKind::truncation, std::string(what) + ": data has not decayed at the end of the grid");
}

inline ModeField scalar_inverse(const ModeField& f, const FourierMode& mode, double parity, Diagnostics* diag,
                                const char* what) {
    require_nonzero(mode);
    if (f.components() != 1) throw ConfigError("expected a scalar field");
    check_decay(f[0], diag, what);
    const double k = mode.norm();
    const auto conv = image_kernel_convolution(f.grid(), f[0], k, parity);
    ModeField h(f.grid_ptr(), 1);
    for (std::size_t i = 0; i < h.size(); ++i) h(0, i) = conv.value[i] / (2.0 * k);
    if (parity < 0.0) h(0, 0) = 0.0;
    return h;
}

} // namespace detail

/// Green's function of |xi|^2 - d^2 on the half-line with h(0) = 0.
inline double dirichlet_green(double y, double z, const FourierMode& mode) {
    detail::require_nonzero(mode);
    const double k = mode.norm();
    return (std::exp(-k * std::abs(y - z)) - std::exp(-k * (y + z))) / (2.0 * k);
}

/// Green's function of |xi|^2 - d^2 on the half-line with h'(0) = 0.
inline double neumann_green(double y, double z, const FourierMode& mode) {
    detail::require_nonzero(mode);
    const double k = mode.norm();
    return (std::exp(-k * std::abs(y - z)) + std::exp(-k * (y + z))) / (2.0 * k);
}

/// h with (|xi|^2 - d^2) h = f, h(0) = 0, h -> 0.
inline ModeField dirichlet_inverse(const ModeField& f, const FourierMode& mode, Diagnostics* diag = nullptr) {
    return detail::scalar_inverse(f, mode, -1.0, diag, "dirichlet_inverse");
}

/// h with (|xi|^2 - d^2) h = f, h'(0) = 0, h -> 0.
inline ModeField neumann_inverse(const ModeField& f, const FourierMode& mode, Diagnostics* diag = nullptr) {
    return detail::scalar_inverse(f, mode, 1.0, diag, "neumann_inverse");
}

inline ModeField component(const ModeField& f, std::size_t c) {
    ModeField out(f.grid_ptr(), 1);
    out[0] = f[c];
    return out;
}

/// (Dirichlet inverse of w1, Dirichlet inverse of w2, Neumann inverse of w3).
inline ModeField phi(const ModeField& omega, const FourierMode& mode, Diagnostics* diag = nullptr) {
    if (omega.components() != 3) throw ConfigError("phi expects three components");
    ModeField w(omega.grid_ptr(), 3);
    w[0] = dirichlet_inverse(component(omega, 0), mode, diag)[0];
    w[1] = dirichlet_inverse(component(omega, 1), mode, diag)[0];
    w[2] = neumann_inverse(component(omega, 2), mode, diag)[0];
    return w;
}

/// Curl at mode xi with d/dx_j -> i xi_j and a `points`-node stencil in z (3 gives second order).
inline ModeField curl_mode(const ModeField& W, const FourierMode& mode, int points = 3) {
    if (W.components() != 3) throw ConfigError("curl expects three components");
    const ModeField dW = differentiate(W, 1, points);
    const cplx i1(0.0, mode.xi1()), i2(0.0, mode.xi2());
    ModeField out(W.grid_ptr(), 3);
    for (std::size_t n = 0; n < W.size(); ++n) {
        out(0, n) = i2 * W(2, n) - dW(1, n);
        out(1, n) = dW(0, n) - i1 * W(2, n);
        out(2, n) = i1 * W(1, n) - i2 * W(0, n);
    }
    return out;
}

/// i xi1 u1 + i xi2 u2 + d/dz u3 (scalar field).
inline ModeField divergence(const ModeField& u, const FourierMode& mode, int points = 3) {
    if (u.components() != 3) throw ConfigError("divergence expects three components");
    const ModeField d3 = differentiate(component(u, 2), 1, points);
    const cplx i1(0.0, mode.xi1()), i2(0.0, mode.xi2());
    ModeField out(u.grid_ptr(), 1);
    for (std::size_t n = 0; n < u.size(); ++n) out(0, n) = i1 * u(0, n) + i2 * u(1, n) + d3(0, n);
    return out;
}

/// (i xi1 g, i xi2 g, g') with a `points`-node stencil.
inline ModeField gradient_mode(const ModeField& g, const FourierMode& mode, int points = 3) {
    const ModeField dg = differentiate(g, 1, points);
    ModeField out(g.grid_ptr(), 3);
    for (std::size_t n = 0; n < g.size(); ++n) {
        out(0, n) = cplx(0.0, mode.xi1()) * g(0, n);
        out(1, n) = cplx(0.0, mode.xi2()) * g(0, n);
        out(2, n) = dg(0, n);
    }
    return out;
}

struct RoundtripReport {
    double relative_error = 0.0;  ///< max |curl phi curl h - h| / max |h|
    double divergence = 0.0;      ///< relative max of the sixth-order discrete divergence of h
    double boundary = 0.0;        ///< relative max of |h(0)|
};

/// curl(phi(curl h)) against h for solenoidal h vanishing at z = 0.
inline RoundtripReport check_biot_savart_roundtrip(const VelocityModeField& h, const FourierMode& mode,
                                                   Diagnostics* diag = nullptr) {
    detail::require_nonzero(mode);
    if (h.components() != 3) throw ConfigError("roundtrip expects a velocity field");
    RoundtripReport rep;
    const double scale = max_norm(h);
    if (scale == 0.0) return rep;
    rep.divergence = max_norm(divergence(h, mode, 7)) / scale;
    for (std::size_t c = 0; c < 3; ++c) rep.boundary = std::max(rep.boundary, std::abs(h(c, 0)) / scale);
    if (rep.divergence > 1e-8) throw HypothesisViolated("field is not solenoidal");
    if (rep.boundary > 1e-8) throw HypothesisViolated("field does not vanish at z = 0");
    ModeField back = curl_mode(phi(curl_mode(h, mode), mode, diag), mode);
    back -= h;
    rep.relative_error = max_norm(back) / scale;
    return rep;
}

struct TraceErrors {
    double dirichlet = 0.0;  ///< |d/dz Dirichlet-inverse(-Lf)(0) - f'(0) - |xi| f(0)|
    double neumann = 0.0;    ///< |Neumann-inverse(-Lf)(0) - f(0) - f'(0)/|xi||
};

/// Trace identities for L = d^2 - |xi|^2; derivatives by fourth-order stencils.
inline TraceErrors check_trace_identities(const ModeField& f, const FourierMode& mode, Diagnostics* diag = nullptr) {
    detail::require_nonzero(mode);
    if (f.components() != 1) throw ConfigError("expected a scalar field");
    detail::check_decay(f[0], diag, "check_trace_identities");
    const double k = mode.norm();
    const ModeField d2 = differentiate(f, 2, 5);
    const ModeField d1 = differentiate(f, 1, 5);
    std::vector<cplx> F(f.size());
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = k * k * f(0, i) - d2(0, i);
    const cplx trace = image_kernel_convolution(f.grid(), F, k, 1.0).laplace_trace;
    TraceErrors e;
    e.dirichlet = std::abs(trace - d1(0, 0) - k * f(0, 0));
    e.neumann = std::abs(trace / k - f(0, 0) - d1(0, 0) / k);
    return e;
}

/// Boundary trace of d/dz Dirichlet-inverse(g_tau) + i xi Neumann-inverse(g3), per tangential component.
inline std::array<cplx, 2> boundary_source_K(const ModeField& g, const FourierMode& mode, Diagnostics* diag = nullptr) {
    detail::require_nonzero(mode);
    if (g.components() != 3) throw ConfigError("boundary source expects three components");
    for (std::size_t c = 0; c < 3; ++c) detail::check_decay(g[c], diag, "boundary_source_K");
    const double k = mode.norm();
    auto trace = [&](std::size_t c) { return image_kernel_convolution(g.grid(), g[c], k, 1.0).laplace_trace; };
    const cplx n3 = trace(2) / k;
    return {trace(0) + cplx(0.0, mode.xi1()) * n3, trace(1) + cplx(0.0, mode.xi2()) * n3};
}

} // namespace halfstokes
