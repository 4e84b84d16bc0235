// Assembly benchmark: serial reference vs OpenMP kernels, and
// parent-cache fast path vs full per-cell computation, on an all-cube
// mesh.

#include "psbfem/benchmarks.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace psbfem;

namespace {

double time_assemble(const Mesh& mesh, Exec exec, bool cache) {
    AssembleOptions opts;
    opts.exec = exec;
    opts.use_parent_cache = cache;
    const auto t0 = std::chrono::steady_clock::now();
    auto system = assemble(mesh, MaterialMap{}, opts);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

double best_of(const Mesh& mesh, Exec exec, bool cache, int reps) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i)
        best = std::min(best, time_assemble(mesh, exec, cache));
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    double h = 0.05;
    int reps = 3;
    if (argc > 1) h = std::atof(argv[1]);
    if (argc > 2) reps = std::atoi(argv[2]);

    const Mesh mesh = structured_box_mesh({1.0, 1.0, 1.0}, h);
    std::cout << "mesh: " << mesh.cells.size() << " cells, "
              << mesh.nodes.size() << " nodes\n";
#ifdef _OPENMP
    std::cout << "threads: " << omp_get_max_threads() << "\n";
#endif

    const double serial_full = best_of(mesh, Exec::serial, false, reps);
    const double parallel_full = best_of(mesh, Exec::parallel, false, reps);
    const double serial_cached = best_of(mesh, Exec::serial, true, reps);
    const double parallel_cached = best_of(mesh, Exec::parallel, true, reps);

    std::cout << "assembly time (best of " << reps << "):\n";
    std::cout << "  serial,   full pipeline : " << serial_full << " s\n";
    std::cout << "  parallel, full pipeline : " << parallel_full << " s\n";
    std::cout << "  serial,   parent cache  : " << serial_cached << " s\n";
    std::cout << "  parallel, parent cache  : " << parallel_cached << " s\n";
    std::cout << "parallel speedup (full): " << serial_full / parallel_full
              << "x\n";
    std::cout << "cache speedup (serial):  " << serial_full / serial_cached
              << "x\n";
    return 0;
}
