#include <gtest/gtest.h>

#include <cmath>

#include "halfstokes/solver.hpp"

using namespace halfstokes;

namespace {

/// w = e^{-t-z} (v, 0) + (0, 0, e^{-t} z e^{-z}) with the forcing and boundary datum it induces.
struct Manufactured {
    GridPtr grid;
    FourierMode mode;
    double nu;
    Vec2C v;

    ModeField exact(double t) const {
        return ModeField::sample(grid, 3, [&](double z) {
            const double e = std::exp(-t - z);
            return std::array<cplx, 3>{e * v[0], e * v[1], e * z};
        });
    }

    StokesProblem problem() const {
        StokesProblem p;
        p.mode = mode;
        p.nu = nu;
        p.omega0 = exact(0.0);
        const double k2 = mode.norm_squared();
        const double nu_ = nu;
        const Vec2C v_ = v;
        const GridPtr g = grid;
        p.forcing = [=](double t) {
            return ModeField::sample(g, 3, [&](double z) {
                const double e = std::exp(-t - z);
                const double a = -1.0 - nu_ * (1.0 - k2);
                return std::array<cplx, 3>{a * e * v_[0], a * e * v_[1], e * (a * z + 2.0 * nu_)};
            });
        };
        const Vec2C Dv = BoundaryOperatorD::vorticity(mode).matrix() * v;
        p.boundary_g = [=](double t) {
            const double e = std::exp(-t);
            return std::array<cplx, 2>{-nu_ * e * (Dv[0] - v_[0]), -nu_ * e * (Dv[1] - v_[1])};
        };
        return p;
    }
};

ModeField tangential_bump(const GridPtr& g, const FourierMode& m, double z0 = 3.0) {
    // xi . w_tau = 0: w_tau along xi-perp
    const double k = m.norm();
    return ModeField::sample(g, 3, [&](double z) {
        const double e = std::exp(-(z - z0) * (z - z0));
        return std::array<cplx, 3>{-m.xi2() / k * e, m.xi1() / k * e, 0.0};
    });
}

} // namespace

TEST(Solver, ZeroDataGivesZero) {
    StokesProblem p;
    p.mode = {1, 0};
    p.nu = 0.5;
    p.omega0 = ModeField(HalfLineGrid::uniform(10.0, 100), 3);
    const auto d = duhamel_solve(p, {0.0, 0.5});
    const auto c = crank_nicolson_oracle(p, 1e-2, {0.0, 0.5});
    for (const auto& s : d.states) EXPECT_EQ(max_norm(s), 0.0);
    for (const auto& s : c.states) EXPECT_EQ(max_norm(s), 0.0);
}

TEST(Solver, ManufacturedSolutionSecondOrder) {
    std::array<double, 2> ec{}, ed{};
    for (int level = 0; level < 2; ++level) {
        const Manufactured ms{HalfLineGrid::uniform(20.0, 256u << level), {1, 0}, 0.1, {0.3, cplx(1.0, 0.5)}};
        const auto p = ms.problem();
        ec[level] = relative_max_difference(crank_nicolson_oracle(p, 2e-3 / (1 << level), {0.5}).states[0], ms.exact(0.5));
        ed[level] = relative_max_difference(duhamel_solve(p, {0.5}).states[0], ms.exact(0.5));
    }
    EXPECT_LT(ed[1], 2e-4);
    EXPECT_NEAR(ec[0] / ec[1], 4.0, 0.5);
    EXPECT_NEAR(ed[0] / ed[1], 4.0, 0.6);
}

TEST(Solver, ManufacturedSolutionOffAxisMode) {
    const Manufactured ms{HalfLineGrid::uniform(20.0, 512), {1, 2}, 0.3, {cplx(0.0, 1.0), -0.4}};
    const auto p = ms.problem();
    EXPECT_LT(relative_max_difference(duhamel_solve(p, {0.3}).states[0], ms.exact(0.3)), 1e-3);
    EXPECT_LT(relative_max_difference(crank_nicolson_oracle(p, 1e-3, {0.3}).states[0], ms.exact(0.3)), 1e-3);
}

TEST(Solver, ThirdComponentIsDirichletHeat) {
    const double nu = 0.2, t = 0.4;
    const FourierMode m(1, 1);
    StokesProblem p;
    p.mode = m;
    p.nu = nu;
    const auto grid = HalfLineGrid::uniform(12.0, 8192);
    auto gauss = [&](double z, double c, double q) { return std::exp(-(z - c) * (z - c) / q) / std::sqrt(q); };
    p.omega0 = ModeField::sample(grid, 3, [&](double z) {
        return std::array<cplx, 3>{0.0, 0.0, gauss(z, 3.0, 1.0) - gauss(z, -3.0, 1.0)};
    });
    const auto w = duhamel_solve(p, {t}).states[0];
    const double q = 1.0 + 4.0 * nu * t;
    double err = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double z = (*grid)[i];
        err = std::max(err, std::abs(w(2, i) - (gauss(z, 3.0, q) - gauss(z, -3.0, q)) * std::exp(-2.0 * nu * t)));
    }
    EXPECT_LT(err, 1e-6);
}

TEST(Solver, HomogeneousAgreesWithOracle) {
    const FourierMode m(1, 0);
    StokesProblem p;
    p.mode = m;
    p.nu = 0.1;
    p.omega0 = tangential_bump(HalfLineGrid::uniform(20.0, 512), m, 1.0);
    const auto d = duhamel_solve(p, {0.1, 0.5, 1.0});
    StokesProblem fine = p;
    fine.omega0 = tangential_bump(HalfLineGrid::uniform(20.0, 4096), m, 1.0);
    const auto c = crank_nicolson_oracle(fine, 2e-4, {0.1, 0.5, 1.0});
    for (std::size_t q = 0; q < 3; ++q) EXPECT_LT(relative_max_difference(d.states[q], c.states[q]), 1e-3);
}

TEST(Solver, GeneralBoundaryOperatorAgreesWithOracle) {
    const FourierMode m(2, 0);
    StokesProblem p;
    p.mode = m;
    p.nu = 0.2;
    p.D = BoundaryOperatorD::rank_one(1.5, 0.4, 2.0, m);
    p.boundary_g = [](double t) { return std::array<cplx, 2>{0.3 * std::sin(3.0 * t), cplx(0.0, 0.2)}; };
    p.omega0 = ModeField::sample(HalfLineGrid::uniform(20.0, 512), 3, [](double z) {
        const double e = std::exp(-(z - 1.0) * (z - 1.0));
        return std::array<cplx, 3>{e, cplx(0.0, 0.5) * e, z * e};
    });
    const auto d = duhamel_solve(p, {0.5});
    StokesProblem fine = p;
    fine.omega0 = ModeField::sample(HalfLineGrid::uniform(20.0, 4096), 3, [](double z) {
        const double e = std::exp(-(z - 1.0) * (z - 1.0));
        return std::array<cplx, 3>{e, cplx(0.0, 0.5) * e, z * e};
    });
    const auto c = crank_nicolson_oracle(fine, 2e-4, {0.5});
    EXPECT_LT(relative_max_difference(d.states[0], c.states[0]), 1e-3);
}

TEST(Solver, SemigroupConsistency) {
    const FourierMode m(1, 0);
    StokesProblem p;
    p.mode = m;
    p.nu = 0.5;
    p.omega0 = tangential_bump(HalfLineGrid::uniform(20.0, 512), m, 2.0);
    const auto once = duhamel_solve(p, {0.3, 0.7});
    StokesProblem restart = p;
    restart.omega0 = once.states[0];
    const auto twice = duhamel_solve(restart, {0.4});
    ModeField diff = twice.states[0];
    diff -= once.states[1];
    EXPECT_LT(max_norm(diff), 1e-4);
}

TEST(Solver, EnergyNonincreasing) {
    const FourierMode m(1, 1);
    StokesProblem p;
    p.mode = m;
    p.nu = 0.3;
    p.omega0 = ModeField::sample(HalfLineGrid::uniform(20.0, 1024), 3, [](double z) {
        const double e = std::exp(-(z - 0.5) * (z - 0.5));
        return std::array<cplx, 3>{e, cplx(0.0, -1.0) * e, z * e};
    });
    std::vector<double> times;
    for (int k = 0; k <= 40; ++k) times.push_back(0.025 * k);
    const auto c = crank_nicolson_oracle(p, 1e-3, times);
    for (std::size_t q = 1; q < c.times.size(); ++q)
        EXPECT_LE(oracle_energy(c.states[q], {0, 1}), oracle_energy(c.states[q - 1], {0, 1}) + 1e-10);
    const auto d = duhamel_solve(p, {0.25, 0.5, 1.0});
    for (std::size_t q = 1; q < d.times.size(); ++q) EXPECT_LE(l2_norm(d.states[q]), l2_norm(d.states[q - 1]) + 1e-10);
}

TEST(Solver, NormalComponentInvariance) {
    const FourierMode m(1, 1);
    StokesProblem p;
    p.mode = m;
    p.nu = 0.2;
    p.omega0 = tangential_bump(HalfLineGrid::uniform(20.0, 512), m, 1.0);
    p.boundary_g = [](double t) { return std::array<cplx, 2>{-std::cos(t), std::cos(t)}; };
    const auto d = duhamel_solve(p, {0.25, 1.0});
    for (const auto& w : d.states) {
        double tr = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) tr = std::max(tr, std::abs(w(0, i) + w(1, i)));
        EXPECT_LT(tr, 1e-8 * max_norm(w));
    }
}

TEST(Solver, IncompatibleInitialData) {
    StokesProblem p;
    p.mode = {1, 0};
    p.omega0 = ModeField::sample(HalfLineGrid::uniform(10.0, 100), 3, [](double z) {
        return std::array<cplx, 3>{0.0, 0.0, std::exp(-z)};
    });
    EXPECT_THROW(duhamel_solve(p, {0.1}), IncompatibleData);
    p.omega0(2, 0) = 1e-9;
    CompatibilityReport rep;
    const auto w = project_compatible(p.omega0, &rep);
    EXPECT_EQ(w(2, 0), cplx(0.0));
    EXPECT_DOUBLE_EQ(rep.correction, 1e-9);
}

TEST(Solver, OracleWarnsOnLargeStep) {
    StokesProblem p;
    p.mode = {1, 0};
    p.omega0 = ModeField(HalfLineGrid::uniform(10.0, 1000), 3);
    Diagnostics diag;
    crank_nicolson_oracle(p, 0.05, {0.1}, {}, &diag);
    EXPECT_TRUE(diag.has(WarningKind::stability));
}

TEST(Solver, SampledForcingInterpolates) {
    const auto grid = HalfLineGrid::uniform(1.0, 4);
    ForcingFn f = [&](double t) {
        return ModeField::sample(grid, 3, [&](double z) { return std::array<cplx, 3>{t * z, t, 1.0}; });
    };
    const SampledForcing s(f, 1.0, 64.0);
    EXPECT_LT(std::abs(s(0.5)(0, 2) - 0.25), 1e-15);
    EXPECT_LT(std::abs(s(1.0 / 64.0 * 3.5)(1, 0) - 3.5 / 64.0), 1e-15);
}

TEST(Uniqueness, ZeroAndNoise) {
    const auto zero = uniqueness_demo({1, 1}, 0.5, 0.0);
    for (double v : zero.norm) EXPECT_EQ(v, 0.0);
    const auto noise = uniqueness_demo({1, 1}, 0.5, 1e-12, 7);
    EXPECT_LE(noise.norm.back(), 1e-12);
    EXPECT_LE(noise.normal_trace.back(), noise.normal_trace.front());
}

TEST(Uniqueness, NormalComponentIsNeumannHeat) {
    const FourierMode m(2, 0);
    const double nu = 0.3, t = 0.5;
    const auto grid = HalfLineGrid::uniform(20.0, 2048);
    StokesProblem p;
    p.mode = m;
    p.nu = nu;
    p.omega0 = ModeField::sample(grid, 3, [](double z) { return std::array<cplx, 3>{std::exp(-z * z), 0.0, 0.0}; });
    const auto w = crank_nicolson_oracle(p, 5e-4, {t}).states[0];
    const auto heat = HeatPropagator(t, nu, m, *grid).apply(p.omega0[0], 1.0);
    double err = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) err = std::max(err, std::abs(w(0, i) - heat[i]));
    EXPECT_LT(err, 1e-4);
}

TEST(Assembly, ZeroModeIsConstant) {
    const auto grid = HalfLineGrid::uniform(1.0, 4);
    const auto s = ModeField::sample(grid, 3, [](double z) { return std::array<cplx, 3>{z, 1.0, 0.0}; });
    const auto out = assemble_3d({{{0, 0}, s}}, {{0.0, 0.0}, {1.0, 2.0}});
    for (int c = 0; c < 3; ++c) EXPECT_EQ(out.values[0][c], out.values[1][c]);
}

TEST(Assembly, ConjugatePairGivesCosine) {
    const auto grid = HalfLineGrid::uniform(1.0, 4);
    const auto a = ModeField::sample(grid, 3, [](double) { return std::array<cplx, 3>{0.5, 0.0, 0.0}; });
    const auto out = assemble_3d({{{1, 0}, a}, {{-1, 0}, a}}, {{0.3, 0.0}});
    EXPECT_NEAR(out.values[0][0][2], std::cos(0.3), 1e-15);
    EXPECT_THROW(assemble_3d({{{1, 0}, a}}, {{0.3, 0.0}}), AsymmetricModeSet);
    const auto b = ModeField::sample(grid, 3, [](double) { return std::array<cplx, 3>{cplx(0.0, 1.0), 0.0, 0.0}; });
    EXPECT_THROW(assemble_3d({{{1, 0}, b}, {{-1, 0}, b}}, {{0.3, 0.0}}), IncompatibleData);
}

TEST(Assembly, Parseval) {
    const auto grid = HalfLineGrid::uniform(1.0, 2);
    std::vector<ModeState> modes;
    double energy = 0.0;
    for (FourierMode m : {FourierMode(0, 0), FourierMode(1, 0), FourierMode(2, -1)}) {
        const cplx c(0.3 * m.xi1() + 0.2, 0.1 * m.xi2());
        const cplx val = m.is_zero() ? cplx(0.7) : c;
        modes.push_back({m, ModeField::sample(grid, 3, [&](double) { return std::array<cplx, 3>{val, 0.0, 0.0}; })});
        energy += std::norm(val);
        if (!m.is_zero()) {
            modes.push_back({-m, ModeField::sample(grid, 3, [&](double) { return std::array<cplx, 3>{std::conj(val), 0.0, 0.0}; })});
            energy += std::norm(val);
        }
    }
    const int n = 16;
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) pts.push_back({2.0 * pi * i / n, 2.0 * pi * j / n});
    const auto out = assemble_3d(modes, pts);
    double mean = 0.0;
    for (const auto& v : out.values) mean += v[0][0] * v[0][0];
    mean /= n * n;
    EXPECT_NEAR(mean, energy, 1e-10);
}
