// Benchmarks the parallel sweep engine against the serial reference on a
// small optimal-duty grid and reports the speedup.

#include <chrono>
#include <cstdio>

#include "dab/config.hpp"
#include "dab/optimizer.hpp"

int main(int argc, char** argv) {
    int n_vout = 3, n_ps = 4;
    if (argc > 2) {
        n_vout = std::atoi(argv[1]);
        n_ps = std::atoi(argv[2]);
    }
    const dab::CircuitParams params = dab::nominal_params();
    dab::GridSpec grid;
    grid.lp = {4.0e-6, 5.35e-6};
    grid.ls_prime = {2.65e-6};
    grid.rl_p = {0.04};
    grid.rl_s = {0.01};
    grid.vout = dab::GridSpec::linspace(130.0, 180.0, n_vout);
    grid.ps = dab::GridSpec::linspace(400.0, 1600.0, n_ps);

    dab::OptimizerSettings s;
    s.n_starts = 3;
    s.seed = 7;

    using clk = std::chrono::steady_clock;
    std::printf("grid: %zu cells\n", grid.cells());

    const auto t0 = clk::now();
    const auto serial = dab::sweep_optimal_dataset(params, grid, s, false);
    const auto t1 = clk::now();
    const auto parallel = dab::sweep_optimal_dataset(params, grid, s, true);
    const auto t2 = clk::now();

    const double ts = std::chrono::duration<double>(t1 - t0).count();
    const double tp = std::chrono::duration<double>(t2 - t1).count();
    std::printf("serial   %8.2f s\nparallel %8.2f s\nspeedup  %8.2fx\n", ts, tp,
                ts / tp);

    for (std::size_t i = 0; i < serial.size(); ++i) {
        if (serial[i].delta_p != parallel[i].delta_p ||
            serial[i].delta_s != parallel[i].delta_s ||
            serial[i].phi != parallel[i].phi) {
            std::printf("MISMATCH at row %zu\n", i);
            return 1;
        }
    }
    std::printf("parallel output matches the serial reference bit-exactly\n");
    return 0;
}
