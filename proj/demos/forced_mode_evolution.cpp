#include <cstdio>

#include "halfstokes/solver.hpp"

/// Forced single-mode evolution by Duhamel's formula, checked against a fine Crank-Nicolson run.
int main() {
    using namespace halfstokes;
    const FourierMode mode{1, 0};
    const double nu = 0.1;
    const auto problem = forced_reference_problem(mode, nu, HalfLineGrid::uniform(20.0, 512));
    const auto fine = forced_reference_problem(mode, nu, HalfLineGrid::uniform(20.0, 4096));
    const std::vector<double> times{0.0, 0.25, 0.5, 1.0};
    const auto duhamel = duhamel_solve(problem, times);
    const auto cn = crank_nicolson_oracle(fine, 1e-3, times);
    std::printf("t,energy_tangential,|w1(0)|,|w3(5)|,relative_difference_to_cn\n");
    for (std::size_t q = 0; q < times.size(); ++q) {
        const auto& w = duhamel.states[q];
        std::printf("%.2f,%.6e,%.6e,%.6e,%.2e\n", times[q], oracle_energy(w, {0, 1}), std::abs(w(0, 0)),
                    std::abs(w(2, 128)), relative_max_difference(w, cn.states[q]));
    }
}
