// Equal-mass comparison of the three methods' building blocks.

#include <cstdio>

#include "trimer1d/trimer1d.hpp"

int main() {
    using namespace trimer1d;
    const MassParams m = make_masses(1.0);

    const BoSolution bo = heavy_solve(m, default_bo_grid(), 1);
    std::printf("BO ground state        eps = %.8f\n", bo.energies[0]);
    std::printf("with diagonal term     eps = %.8f\n", diagonal_correction(bo, 0));

    // a narrow window keeps the zero-range scan short
    const ScanResult r = scan_energies(m, 1, default_stm_line_grid(), {-2.3, -1.9}, 1);
    std::printf("zero-range ground      eps = %.8f\n", r.energies.at(0));
    std::printf("relative BO error          = %.4f\n", relative_error(bo.energies[0], r.energies[0]));

    const TwoBodySolution tb = depth_for_energy(gaussian_shape(), -1e-2, default_two_body_grid(-1e-2));
    std::printf("Gaussian depth for E_g = -0.01: v0 = %.10f\n", tb.depth);
    return 0;
}
