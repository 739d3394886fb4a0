#include <cstdio>

#include "halfstokes/kernels.hpp"

/// Green's function at y = 0.5 across z, in both contour regimes, next to the Neumann heat kernel.
int main() {
    using namespace halfstokes;
    const double nu = 0.2, y = 0.5;
    for (const FourierMode mode : {FourierMode{1, 0}, FourierMode{6, 3}}) {
        const double t = 0.4;
        std::printf("# xi=(%d,%d) nu=%.2f t=%.2f y=%.2f\n", mode.xi1(), mode.xi2(), nu, t, y);
        std::printf("z,heat,G11,G22,regime,quadrature_error\n");
        for (int k = 0; k <= 12; ++k) {
            const double z = 0.25 * k;
            const auto g = green_function(t, nu, mode, y, z);
            const Mat2C total = g.total();
            std::printf("%.2f,%.6e,%.6e,%.6e,%s,%.1e\n", z, heat_kernel_neumann(t, nu, mode, y, z),
                        total(0, 0).real(), total(1, 1).real(), regime_name(g.info.regime), g.info.error);
        }
    }
}
