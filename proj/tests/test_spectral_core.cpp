#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "halfstokes/quadrature.hpp"
#include "halfstokes/spectral_core.hpp"

using namespace halfstokes;

TEST(SpectralRoot, MatchesSquareAtSimplePoint) {
    EXPECT_NEAR(std::abs(spectral_root(3.0, 1.0, {1, 0}) - cplx(2.0, 0.0)), 0.0, 1e-15);
}

TEST(SpectralRoot, FrozenComplexValue) {
    // 30-digit reference from an arbitrary-precision principal square root.
    const cplx mu = spectral_root({2.0, 1.0}, 0.1, {2, 1});
    EXPECT_NEAR(mu.real(), 5.09538143987633766610723885826, 1e-14);
    EXPECT_NEAR(mu.imag(), 0.981280804783350522728221119565, 1e-14);
}

TEST(SpectralRoot, RejectsBranchCut) {
    EXPECT_THROW(spectral_root(-1.0, 1.0, {1, 0}), BranchCutViolation);
    EXPECT_THROW(spectral_root(-7.5, 1.0, {1, 1}), BranchCutViolation);
    EXPECT_THROW(spectral_root(1.0, 0.0, {1, 0}), ConfigError);
    EXPECT_NO_THROW(spectral_root({-7.5, 1e-9}, 1.0, {1, 1}));
}

TEST(SpectralRoot, SquaresBackWithPositiveRealPart) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int k = 0; k < 500; ++k) {
        const cplx lam(u(rng), u(rng));
        const double nu = 0.01 + std::abs(u(rng)) / 25.0;
        const FourierMode m(static_cast<int>(u(rng)) % 5, static_cast<int>(u(rng)) % 5);
        const cplx mu = spectral_root(lam, nu, m);
        EXPECT_GT(mu.real(), 0.0);
        EXPECT_NEAR(std::abs(nu * mu * mu - lam - nu * double(m.norm_squared())), 0.0, 1e-12 * (1.0 + std::abs(lam)));
    }
}

TEST(SpectralRoot, ContinuousAcrossNegativeImaginaryApproach) {
    const cplx above = spectral_root({-3.0, 1e-10}, 1.0, {1, 0});
    const cplx below = spectral_root({-3.0, -1e-10}, 1.0, {1, 0});
    EXPECT_NEAR(above.imag(), std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(below.imag(), -std::sqrt(2.0), 1e-9);
}

TEST(FourierModeTest, ProjectionAnnihilatesXi) {
    const FourierMode m(3, -2);
    const Mat2C P = m.projection();
    const Vec2C xi{3.0, -2.0};
    EXPECT_NEAR(norm(P * xi), 0.0, 1e-14);
    const Vec2C perp{-2.0, -3.0};
    const Vec2C Pp = P * perp;
    EXPECT_NEAR(std::abs(Pp[0] - 13.0 * perp[0]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(Pp[1] - 13.0 * perp[1]), 0.0, 1e-12);
    EXPECT_EQ(FourierMode(1, 0).projection().a, (std::array<cplx, 4>{0.0, 0.0, 0.0, 1.0}));
}

TEST(HalfLineGridTest, RejectsTooFewNodes) {
    EXPECT_THROW(HalfLineGrid::uniform(1.0, 1), GridTooSmall);
    EXPECT_THROW(HalfLineGrid::from_nodes({0.0, 1.0}), GridTooSmall);
    EXPECT_THROW(HalfLineGrid::from_nodes({0.0, 1.0, 1.0}), ConfigError);
    EXPECT_THROW(HalfLineGrid::from_nodes({0.1, 1.0, 2.0}), ConfigError);
}

namespace {

double integrate_on(const GridPtr& g, double (*f)(double)) {
    double s = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        EXPECT_GT(g->weights()[i], 0.0);
        s += g->weights()[i] * f((*g)[i]);
    }
    return s;
}

double cubic(double z) { return 1.0 - 2.0 * z + 0.5 * z * z * z; }
double quadratic(double z) { return 1.0 - 2.0 * z + 0.7 * z * z; }

} // namespace

TEST(HalfLineGridTest, UniformWeightsIntegrateCubicsExactly) {
    for (int n : {8, 7, 3}) EXPECT_NEAR(integrate_on(HalfLineGrid::uniform(3.0, n), cubic), 4.125, 1e-12);
}

TEST(HalfLineGridTest, IrregularWeightsIntegrateQuadraticsExactly) {
    const double exact = 3.0 - 9.0 + 0.7 * 9.0;
    EXPECT_NEAR(integrate_on(HalfLineGrid::from_nodes({0.0, 0.2, 0.5, 0.9, 1.4, 2.0, 2.5, 3.0}), quadratic), exact,
                1e-12);
    EXPECT_NEAR(integrate_on(HalfLineGrid::from_nodes({0.0, 0.3, 0.7, 1.2, 1.8, 2.4, 3.0}), quadratic), exact, 1e-12);
}

TEST(HalfLineGridTest, UniformDetection) {
    EXPECT_TRUE(HalfLineGrid::from_nodes({0.0, 0.5, 1.0, 1.5})->is_uniform());
    EXPECT_FALSE(HalfLineGrid::from_nodes({0.0, 0.5, 1.1, 1.5})->is_uniform());
    EXPECT_THROW(HalfLineGrid::from_nodes({0.0, 0.5, 1.1, 1.5})->spacing(), ConfigError);
}

namespace {

ModeField sample_scalar(const GridPtr& g, double (*f)(double)) {
    return ModeField::sample(g, 1, [&](double z) { return std::array<cplx, 1>{f(z)}; });
}

double smooth(double z) { return std::exp(-z) * std::sin(2.0 * z) + std::cos(z) * std::exp(-0.5 * z); }
double smooth_d1(double z) {
    return std::exp(-z) * (2.0 * std::cos(2.0 * z) - std::sin(2.0 * z)) -
           std::exp(-0.5 * z) * (std::sin(z) + 0.5 * std::cos(z));
}
double smooth_d2(double z) {
    return std::exp(-z) * (-3.0 * std::sin(2.0 * z) - 4.0 * std::cos(2.0 * z)) +
           std::exp(-0.5 * z) * (std::sin(z) - 0.75 * std::cos(z));
}

double max_error(const ModeField& f, double (*g)(double), double scale = 1.0, double shift = 0.0,
                 double (*h)(double) = nullptr) {
    double e = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double z = f.grid()[i];
        const double ref = scale * g(z) + (h ? shift * h(z) : 0.0);
        e = std::max(e, std::abs(f(0, i) - ref));
    }
    return e;
}

} // namespace

TEST(Differentiation, FirstDerivativeIsSecondOrder) {
    double prev = 0.0;
    for (int n : {100, 200, 400}) {
        const auto g = HalfLineGrid::uniform(6.0, n);
        const double e = max_error(derivative(sample_scalar(g, smooth)), smooth_d1);
        if (prev > 0.0) {
            EXPECT_NEAR(prev / e, 4.0, 0.3);
        }
        prev = e;
    }
}

TEST(Differentiation, HighOrderStencilsConverge) {
    const auto g1 = HalfLineGrid::uniform(6.0, 240), g2 = HalfLineGrid::uniform(6.0, 480);
    const double e1 = max_error(differentiate(sample_scalar(g1, smooth), 1, 7), smooth_d1);
    const double e2 = max_error(differentiate(sample_scalar(g2, smooth), 1, 7), smooth_d1);
    EXPECT_GT(e1 / e2, 40.0);
    const double d1 = max_error(differentiate(sample_scalar(g1, smooth), 2, 5), smooth_d2);
    const double d2 = max_error(differentiate(sample_scalar(g2, smooth), 2, 5), smooth_d2);
    EXPECT_GT(d1 / d2, 12.0);
}

TEST(DeltaXi, SecondOrderIncludingEndpoints) {
    const double nu = 0.3;
    const FourierMode m(1, 1);
    double prev = 0.0;
    for (int n : {100, 200, 400}) {
        const auto g = HalfLineGrid::uniform(6.0, n);
        const auto lap = apply_delta_xi(sample_scalar(g, smooth), nu, m);
        const double e = max_error(lap, smooth_d2, nu, -2.0 * nu, smooth);
        if (prev > 0.0) {
            EXPECT_NEAR(prev / e, 4.0, 0.4);
        }
        prev = e;
    }
}

TEST(DeltaXi, ExactOnQuadraticsAndSmallGrids) {
    const auto g = HalfLineGrid::uniform(2.0, 2);
    ModeField f = ModeField::sample(g, 1, [](double z) { return std::array<cplx, 1>{z * z}; });
    const auto lap = apply_delta_xi(f, 1.0, {0, 0});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(lap(0, i) - 2.0), 0.0, 1e-13);
}

TEST(ExponentialMoments, MatchArbitraryPrecisionReference) {
    const auto small = exponential_moments({0.3, 0.2});
    EXPECT_NEAR(std::abs(small[0] - cplx(0.858617065576417570703, -0.0818185099055288249014)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(small[1] - cplx(0.406474124744259926324, -0.0531182490358531449868)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(small[2] - cplx(0.263518413516530630700, -0.0392077354379584981454)), 0.0, 1e-15);
    const auto large = exponential_moments({5.0, -7.0});
    EXPECT_NEAR(std::abs(large[0] - cplx(0.06764308674334669243702, 0.0938149732644300428251)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(large[1] - cplx(-0.00422839135306245401689, 0.0119578985823432463546)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(large[2] - cplx(-0.00275819019832128038910, 0.0000363449790321794103700)), 0.0, 1e-15);
}

TEST(ExponentialMoments, ContinuousAcrossSeriesSwitch) {
    for (double r : {0.999999, 1.000001}) {
        const auto m = exponential_moments(std::polar(r, 0.7));
        const auto q = integrate_adaptive<3>(
            [&](double u) {
                const cplx e = std::exp(-std::polar(r, 0.7) * u);
                return std::array<cplx, 3>{e, e * u, e * u * u};
            },
            0.0, 1.0);
        for (int p = 0; p < 3; ++p) EXPECT_NEAR(std::abs(m[p] - q.value[p]), 0.0, 1e-14);
    }
}

TEST(ImageConvolution, ExponentialDataAgainstSplitIntegral) {
    // int_0^inf (e^{-2|y-z|} + e^{-2(y+z)}) e^{-z} dz = (4/3) e^{-y} - (2/3) e^{-2y}, split at z = y.
    const auto g = HalfLineGrid::uniform(40.0, 4000);
    std::vector<cplx> f(g->size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-(*g)[i]);
    const auto r = image_kernel_convolution(*g, f, 2.0, 1.0);
    for (std::size_t i = 0; i < g->size(); i += 97) {
        const double y = (*g)[i];
        if (y > 20.0) break;
        EXPECT_NEAR(std::abs(r.value[i] - (4.0 / 3.0 * std::exp(-y) - 2.0 / 3.0 * std::exp(-2.0 * y))), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(r.derivative[i] - (-4.0 / 3.0 * std::exp(-y) + 4.0 / 3.0 * std::exp(-2.0 * y))), 0.0,
                    1e-9);
    }
    EXPECT_EQ(r.derivative[0], cplx(0.0));
    EXPECT_NEAR(std::abs(r.laplace_trace - 1.0 / 3.0), 0.0, 1e-9);
}

TEST(ImageConvolution, FourthOrderUnderRefinement) {
    double prev = 0.0;
    for (int n : {200, 400, 800}) {
        const auto g = HalfLineGrid::uniform(40.0, n);
        std::vector<cplx> f(g->size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-(*g)[i]);
        const auto r = image_kernel_convolution(*g, f, 2.0, 1.0);
        double e = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) {
            const double y = (*g)[i];
            e = std::max(e, std::abs(r.value[i] - (4.0 / 3.0 * std::exp(-y) - 2.0 / 3.0 * std::exp(-2.0 * y))));
        }
        if (prev > 0.0) {
            EXPECT_GT(prev / e, 12.0);
        }
        prev = e;
    }
}

TEST(ImageConvolution, DirichletParityVanishesAtWall) {
    const auto g = HalfLineGrid::from_nodes({0.0, 0.1, 0.3, 0.6, 1.0, 1.5, 2.1, 2.8});
    std::vector<cplx> f(g->size(), cplx(1.0, -2.0));
    const auto r = image_kernel_convolution(*g, f, {1.5, 0.5}, -1.0);
    EXPECT_EQ(r.value[0], cplx(0.0));
}

TEST(ImageConvolution, ExactForQuadraticDataOnIrregularGrid) {
    const auto g = HalfLineGrid::from_nodes({0.0, 0.15, 0.4, 0.7, 1.1, 1.5, 2.0, 2.4, 3.0});
    const cplx mu(1.3, 2.1);
    auto q = [](double z) { return cplx(1.0 - z + 0.4 * z * z, 0.2 * z); };
    std::vector<cplx> f(g->size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = q((*g)[i]);
    const auto r = image_kernel_convolution(*g, f, mu, 1.0);
    QuadratureOptions opt;
    opt.rel_tol = 1e-14;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const double y = (*g)[i];
        auto kernel = [&](double z) {
            return std::array<cplx, 1>{(std::exp(-mu * std::abs(y - z)) + std::exp(-mu * (y + z))) * q(z)};
        };
        cplx ref = integrate_adaptive<1>(kernel, y, 3.0, opt).value[0];
        if (y > 0.0) ref += integrate_adaptive<1>(kernel, 0.0, y, opt).value[0];
        EXPECT_NEAR(std::abs(r.value[i] - ref), 0.0, 1e-13);
    }
}

TEST(Quadrature, GaussianAndOscillatoryIntegrals) {
    const auto g = integrate_adaptive<2>(
        [](double x) { return std::array<cplx, 2>{std::exp(-x * x), std::exp(cplx(0.0, 30.0 * x))}; }, -8.0, 8.0);
    EXPECT_NEAR(g.value[0].real(), std::sqrt(pi), 1e-13);
    EXPECT_NEAR(std::abs(g.value[1] - cplx(2.0 * std::sin(240.0) / 30.0, 0.0)), 0.0, 1e-12);
}

TEST(Quadrature, ReportsUnderresolution) {
    QuadratureOptions opt;
    opt.max_subdivisions = 3;
    EXPECT_THROW(
        integrate_adaptive<1>([](double x) { return std::array<cplx, 1>{std::sin(1000.0 * x * x)}; }, 0.0, 10.0, opt),
        QuadratureUnderresolved);
}

TEST(ModeFieldTest, NormsAndArithmetic) {
    const auto g = HalfLineGrid::uniform(30.0, 3000);
    auto f = ModeField::sample(g, 2, [](double z) { return std::array<cplx, 2>{std::exp(-z), cplx(0.0, 2.0) * std::exp(-z)}; });
    EXPECT_NEAR(l2_norm(f), std::sqrt(2.5), 1e-8);
    EXPECT_NEAR(max_norm(f), 2.0, 1e-14);
    const auto zero = f - f;
    EXPECT_EQ(max_norm(zero), 0.0);
    const auto other = HalfLineGrid::uniform(30.0, 300);
    EXPECT_THROW(f += ModeField(other, 2), ConfigError);
}
