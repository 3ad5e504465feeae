// Lowest bosonic state of a Gaussian trimer, saved as a grid-field file.

#include <cstdio>

#include "trimer1d/trimer1d.hpp"

int main(int argc, char** argv) {
    using namespace trimer1d;
    const double eg = -1e-2;
    const MassParams m = make_masses(20.0);
    const PotentialShape shape = gaussian_shape();
    const TwoBodySolution tb = depth_for_energy(shape, eg, default_two_body_grid(eg));

    const Grid2D grid = default_three_body_grid(eg, 128, 64);
    const ThreeBodySpectrum sp = solve_lowest({m, shape, tb.depth, grid, 1, 1, eg}, 1);
    for (const auto& w : sp.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("E_0 = %.10g, eps_0 = %.8f\n", sp.energies.at(0), scaled_energy(sp.energies[0], eg));

    const std::string path = argc > 1 ? argv[1] : "three_body_state.field";
    write_grid_field(path, {grid.nx(), grid.ny(), grid.grid_x.map_length, grid.grid_y.map_length, 1, 1,
                            sp.energies[0], {{"shape", shape.label}}, sp.wavefunctions[0]});
    std::printf("wrote %s\n", path.c_str());
    return 0;
}
