#include <cstdio>
#include <random>

#include "halfstokes/resolvent.hpp"

/// Resolvent profile for a seeded random bump field, with the boundary and interior residuals.
int main() {
    using namespace halfstokes;
    const auto grid = HalfLineGrid::uniform(30.0, 2400);
    std::mt19937_64 rng(3);
    const ModeField f = random_bump_field(grid, rng);
    const SpectralPoint p(cplx(-1.0, 4.0), 0.5, {1, 2});
    const auto sol = resolvent_apply(f, p);
    std::printf("# lambda=-1+4i nu=0.5 xi=(1,2) boundary_residual=%.3e interior_residual=%.3e\n",
                sol.boundary_residual, resolvent_interior_residual(sol, f));
    std::printf("z,|f1|,|f2|,|u1|,|u2|\n");
    for (std::size_t i = 0; i <= 1200; i += 100)
        std::printf("%.2f,%.6e,%.6e,%.6e,%.6e\n", (*grid)[i], std::abs(f(0, i)), std::abs(f(1, i)),
                    std::abs(sol.u(0, i)), std::abs(sol.u(1, i)));
}
