#include "psbfem/benchmarks.hpp"
#include "psbfem/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace psbfem;

struct GlobalOptions {
    int threads = 0;
    int degree = 4;
    bool no_parent_cache = false;
    unsigned seed = 0;
};

void apply_threads(const GlobalOptions& g) {
#ifdef _OPENMP
    if (g.threads > 0) omp_set_num_threads(g.threads);
#else
    (void)g;
#endif
}

BenchOptions bench_options(const GlobalOptions& g) {
    BenchOptions opts;
    opts.degree = g.degree;
    opts.use_parent_cache = !g.no_parent_cache;
    return opts;
}

int run_solve(const GlobalOptions& g, const std::string& mesh_path,
              const std::string& config_path) {
    apply_threads(g);
    const Mesh mesh = load_mesh(mesh_path);
    SolverConfig cfg = load_config(config_path, mesh);

    AssembleOptions aopts;
    aopts.degree = cfg.quadrature_degree;
    aopts.use_parent_cache = cfg.use_parent_cache;
    auto system = assemble(mesh, cfg.materials, aopts);
    system.bc = cfg.bc;
    apply_convection(system);
    apply_flux(system);

    FieldResult result;
    if (cfg.transient)
        result = run_transient(system, cfg.transient_cfg);
    else
        result = solve_steady(system);

    const auto paths = write_vtk_series(cfg.output_path, mesh, result);
    std::cout << "solved " << mesh.cells.size() << " cells, "
              << mesh.nodes.size() << " nodes in " << result.solve_seconds
              << " s\n";
    std::cout << "wrote " << paths.size() << " VTK file(s) to "
              << cfg.output_path << "_*.vtk\n";
    return 0;
}

int run_bench_cmd(const GlobalOptions& g, const std::string& name,
                  double h_override) {
    apply_threads(g);
    const double h = h_override > 0 ? h_override : bench_default_h(name);
    const auto r = run_bench(name, h, bench_options(g));
    std::cout << r.name << ": h=" << r.h << " dofs=" << r.dofs
              << " error=" << r.error;
    if (r.gate > 0) std::cout << " gate=" << r.gate;
    if (r.monitor_value)
        std::cout << " monitor=" << *r.monitor_value;
    std::cout << " assembly=" << r.assembly_seconds
              << "s solve=" << r.solve_seconds << "s\n";
    if (r.gate > 0)
        std::cout << (r.passed ? "PASS" : "FAIL") << "\n";
    return r.gate > 0 && !r.passed ? 2 : 0;
}

int run_converge(const GlobalOptions& g, const std::string& name,
                 const std::string& csv_path) {
    apply_threads(g);
    const auto study =
        run_convergence(name, convergence_default_hs(name), bench_options(g));
    if (csv_path.empty()) {
        write_convergence_csv(std::cout, study);
    } else {
        std::ofstream out(csv_path);
        if (!out) throw InputError("cannot write '" + csv_path + "'");
        write_convergence_csv(out, study);
        std::cout << "wrote " << csv_path << "\n";
    }
    std::cout << "fitted order: " << study.fitted_order << "\n";
    return 0;
}

int run_inspect(const GlobalOptions& g, const std::string& mesh_path,
                int cell) {
    apply_threads(g);
    const Mesh mesh = load_mesh(mesh_path);
    const Material mat;
    if (cell >= 0) {
        if (cell >= static_cast<int>(mesh.cells.size()))
            throw InputError("cell index out of range");
        dump_cell_report(std::cout, cell, mesh.cells[cell], mesh, mat,
                         g.degree);
    } else {
        for (size_t c = 0; c < mesh.cells.size(); ++c)
            dump_cell_report(std::cout, static_cast<int>(c), mesh.cells[c],
                             mesh, mat, g.degree);
    }
    return 0;
}

int run_validate(const std::string& mesh_path) {
    std::ifstream in(mesh_path);
    if (!in) throw InputError("cannot open '" + mesh_path + "'");
    // parse without the loader's validation gate so the report is shown
    try {
        (void)parse_mesh(in, mesh_path);
    } catch (const InputError& e) {
        std::cout << e.what() << "\n";
        return 1;
    }
    std::cout << "mesh OK\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polyhedral scaled-boundary finite element heat solver"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--threads", g.threads, "OpenMP thread count");
    app.add_option("--quadrature-degree", g.degree, "surface quadrature degree")
        ->check(CLI::IsMember({2, 4, 6}));
    app.add_flag("--no-parent-cache", g.no_parent_cache,
                 "disable the cube parent-element fast path");
    app.add_option("--seed", g.seed, "seed for randomized self-tests");

    std::string mesh_path, config_path, case_name, csv_path;
    double h_override = 0.0;
    int cell_index = -1;

    auto* solve = app.add_subcommand("solve", "solve a mesh + config");
    solve->add_option("mesh", mesh_path, "mesh file")->required();
    solve->add_option("config", config_path, "solver config file")->required();

    auto* bench = app.add_subcommand("bench", "run a built-in benchmark case");
    bench->add_option("case", case_name,
                      "patch | beam | steady-cube | steady-cube-exact | "
                      "transient-cube | robin-slab")
        ->required();
    bench->add_option("--mesh-size", h_override, "mesh size override");

    auto* converge = app.add_subcommand("converge", "run a refinement study");
    converge->add_option("case", case_name,
                         "beam | steady-cube | steady-cube-exact | "
                         "transient-cube")
        ->required();
    converge->add_option("--csv", csv_path, "write the CSV report here");

    auto* inspect =
        app.add_subcommand("inspect", "dump per-cell matrices as text");
    inspect->add_option("mesh", mesh_path, "mesh file")->required();
    inspect->add_option("--cell", cell_index, "restrict to one cell");

    auto* validate = app.add_subcommand("validate", "check a mesh file");
    validate->add_option("mesh", mesh_path, "mesh file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(g, mesh_path, config_path);
        if (bench->parsed()) return run_bench_cmd(g, case_name, h_override);
        if (converge->parsed()) return run_converge(g, case_name, csv_path);
        if (inspect->parsed()) return run_inspect(g, mesh_path, cell_index);
        if (validate->parsed()) return run_validate(mesh_path);
    } catch (const psbfem::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const psbfem::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
