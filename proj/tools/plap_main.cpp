// plap: p-Laplacian torsion/eigenvalue solver and shape-monotonicity
// verifier on punctured disks.
//
// Subcommands: mesh, solve, eigen, oracle, sweep, verify.
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 solver failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "plap/eigen.hpp"
#include "plap/kernels.hpp"
#include "plap/radial.hpp"
#include "plap/shape_calculus.hpp"
#include "plap/sweep.hpp"
#include "plap/torsion.hpp"

namespace {

using plap::SweepConfig;

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw plap::ConfigError("cannot open output file: " + path);
    out << content;
}

/// Pre-scan for --config and load JSON defaults; explicit flags override.
SweepConfig load_config_file(int argc, char** argv) {
    SweepConfig config;
    std::string path;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") path = argv[i + 1];
    }
    if (path.empty()) return config;
    std::ifstream in(path);
    if (!in) throw plap::ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    if (j.contains("p")) config.p = j["p"].get<double>();
    if (j.contains("r0")) config.r0 = j["r0"].get<double>();
    if (j.contains("r1")) config.r1 = j["r1"].get<double>();
    if (j.contains("s_start")) config.s_start = j["s_start"].get<double>();
    if (j.contains("s_end")) config.s_end = j["s_end"].get<double>();
    if (j.contains("s_steps")) config.s_steps = j["s_steps"].get<int>();
    if (j.contains("n_theta")) config.n_theta = j["n_theta"].get<int>();
    if (j.contains("n_layers")) config.n_layers = j["n_layers"].get<int>();
    if (j.contains("tol")) config.tol = j["tol"].get<double>();
    if (j.contains("fd_step")) config.fd_step = j["fd_step"].get<double>();
    if (j.contains("out")) config.out_path = j["out"].get<std::string>();
    if (j.contains("format")) {
        config.format = j["format"].get<std::string>() == "json" ? plap::OutputFormat::Json
                                                                 : plap::OutputFormat::Csv;
    }
    if (j.contains("timings")) config.timings = j["timings"].get<bool>();
    return config;
}

void add_domain_options(CLI::App* cmd, SweepConfig& c, double& s) {
    cmd->add_option("--r0", c.r0, "inner (hole) radius");
    cmd->add_option("--r1", c.r1, "outer radius");
    cmd->add_option("--s", s, "hole-center offset along the first axis");
    cmd->add_option("--n-theta", c.n_theta, "angular resolution");
    cmd->add_option("--n-layers", c.n_layers, "radial layers");
}

int run_solve(const SweepConfig& config, double s, bool eigen_too) {
    plap::PExponent p(config.p);
    plap::AnnularDomain domain{config.r0, config.r1, s};
    plap::TriMesh mesh = plap::build_annulus_mesh(domain, config.n_theta, config.n_layers);
    plap::SolverSettings settings = plap::default_solver_settings(p);
    settings.tol = config.tol;

    plap::TorsionSolution sol = plap::solve_torsion(mesh, p, settings);
    auto [eg, el] = plap::torsional_rigidity(mesh, sol, p);
    plap::BoundaryFlux flux = plap::boundary_normal_derivative(mesh, sol.field,
                                                               plap::BoundaryTag::Inner);
    double dE = plap::hadamard_torsion_derivative(flux, p);

    std::ostringstream out;
    out.precision(12);
    out << "p " << config.p << "  r0 " << config.r0 << "  r1 " << config.r1 << "  s " << s
        << "  mesh " << config.n_theta << "x" << config.n_layers << "\n";
    out << "E_grad        " << eg << "\n";
    out << "E_load        " << el << "\n";
    out << "E_gap_rel     " << std::abs(eg - el) / el << "\n";
    out << "dE_hadamard   " << dE << "\n";
    out << "newton_iters  " << sol.newton_iterations << "\n";
    out << "residual      " << sol.residual_norm << "\n";
    if (eigen_too) {
        plap::EigenSettings es = plap::default_eigen_settings(p);
        es.inner.tol = config.tol;
        plap::EigenPair pair = plap::solve_first_eigenpair(mesh, p, es);
        plap::BoundaryFlux fe = plap::boundary_normal_derivative(mesh, pair.field,
                                                                 plap::BoundaryTag::Inner);
        out << "lambda1       " << pair.lambda1 << "\n";
        out << "dlam_hadamard " << plap::hadamard_eigen_derivative(fe, p) << "\n";
        out << "eigen_iters   " << pair.iterations << "\n";
        out << "rq_residual   " << pair.rq_residual << "\n";
    }
    std::cout << out.str();
    return 0;
}

int run_oracle(double p_value, int N, double r0, double r1, int n_grid,
               const std::string& kind, const std::string& out_path) {
    plap::PExponent p(p_value);
    std::ostringstream out;
    char buf[160];
    if (kind == "ball") {
        plap::RadialProfile prof = plap::ball_torsion_profile(p, N, r1, n_grid);
        std::snprintf(buf, sizeof buf, "# ball torsion p=%.17g N=%d R=%.17g E=%.17g\n",
                      p_value, N, r1, prof.E);
        out << buf << "r,value\n";
        for (std::size_t i = 0; i < prof.r_grid.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", prof.r_grid[i], prof.values[i]);
            out << buf;
        }
    } else if (kind == "annulus") {
        plap::RadialProfile prof = plap::annulus_torsion_profile(p, N, r0, r1, n_grid);
        std::snprintf(buf, sizeof buf,
                      "# annulus torsion p=%.17g N=%d r0=%.17g r1=%.17g E=%.17g\n", p_value, N,
                      r0, r1, prof.E);
        out << buf << "r,value\n";
        for (std::size_t i = 0; i < prof.r_grid.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", prof.r_grid[i], prof.values[i]);
            out << buf;
        }
    } else if (kind == "eigen") {
        plap::RadialEigenResult res = plap::radial_eigen(p, N, r0, r1, n_grid);
        std::snprintf(buf, sizeof buf,
                      "# radial eigen p=%.17g N=%d r0=%.17g r1=%.17g lambda1=%.17g\n", p_value,
                      N, r0, r1, res.lambda1);
        out << buf;
        if (p_value == 2.0 && N == 2 && r0 > 0.0) {
            double k = plap::annulus_cross_product_root(r0, r1);
            std::snprintf(buf, sizeof buf, "# bessel cross-product root k=%.17g k^2=%.17g\n", k,
                          k * k);
            out << buf;
        }
        out << "r,value\n";
        for (std::size_t i = 0; i < res.profile.r_grid.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", res.profile.r_grid[i],
                          res.profile.values[i]);
            out << buf;
        }
    } else {
        throw plap::ConfigError("oracle: kind must be ball|annulus|eigen");
    }
    write_output(out_path, out.str());
    return 0;
}

int run_sweep_cmd(SweepConfig& config, bool verify_mode) {
    config.validate();
    auto [records, summary] = plap::run_sweep(config);
    std::string payload = config.format == plap::OutputFormat::Json
                              ? plap::report_to_json(config, records, summary)
                              : plap::records_to_csv(records);
    if (!config.out_path.empty()) {
        write_output(config.out_path, payload);
    } else if (!verify_mode) {
        std::cout << payload;
    }
    for (const auto& r : records) {
        if (!r.ok) std::cerr << "record s=" << r.s << " failed: " << r.error << "\n";
    }
    if (verify_mode) {
        std::cout << plap::summary_to_text(summary);
        if (!summary.conclusive) return 3;
        return summary.all_pass() ? 0 : 1;
    }
    bool partial = false;
    for (const auto& r : records) partial |= !r.ok;
    return partial ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-Laplacian torsion/eigenvalue solver on punctured disks"};
    app.require_subcommand(1);

    SweepConfig config;
    try {
        config = load_config_file(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::string config_path, kernel = "auto";
    app.add_option("--config", config_path, "JSON config file (flags override)");
    app.add_option("--kernel", kernel, "kernel backend: auto|scalar|avx2");

    double s_single = 0.0;
    std::string oracle_kind = "annulus";
    int oracle_N = 2, oracle_grid = 4000;
    double oracle_p = 2.0;
    std::string out_path;

    CLI::App* mesh_cmd = app.add_subcommand("mesh", "emit a mesh dump");
    add_domain_options(mesh_cmd, config, s_single);
    mesh_cmd->add_option("--out", out_path, "output path (default stdout)");

    CLI::App* solve_cmd = app.add_subcommand("solve", "solve the torsion problem, print E");
    add_domain_options(solve_cmd, config, s_single);
    solve_cmd->add_option("--p", config.p, "exponent p");
    solve_cmd->add_option("--tol", config.tol, "solver tolerance");

    CLI::App* eigen_cmd = app.add_subcommand("eigen", "compute the first eigenvalue");
    add_domain_options(eigen_cmd, config, s_single);
    eigen_cmd->add_option("--p", config.p, "exponent p");
    eigen_cmd->add_option("--tol", config.tol, "solver tolerance");

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "radial oracle profiles/constants (CSV)");
    oracle_cmd->add_option("--p", oracle_p, "exponent p");
    oracle_cmd->add_option("--N", oracle_N, "space dimension");
    oracle_cmd->add_option("--r0", config.r0, "inner radius (0 allowed for eigen ball mode)");
    oracle_cmd->add_option("--r1", config.r1, "outer radius");
    oracle_cmd->add_option("--n-grid", oracle_grid, "radial grid cells");
    oracle_cmd->add_option("--kind", oracle_kind, "ball|annulus|eigen");
    oracle_cmd->add_option("--out", out_path, "output path (default stdout)");

    auto add_sweep_options = [&](CLI::App* cmd) {
        cmd->add_option("--p", config.p, "exponent p");
        cmd->add_option("--r0", config.r0, "inner radius");
        cmd->add_option("--r1", config.r1, "outer radius");
        cmd->add_option("--s-start", config.s_start, "first offset");
        cmd->add_option("--s-end", config.s_end, "last offset");
        cmd->add_option("--s-steps", config.s_steps, "number of offsets");
        cmd->add_option("--n-theta", config.n_theta, "angular resolution");
        cmd->add_option("--n-layers", config.n_layers, "radial layers");
        cmd->add_option("--tol", config.tol, "solver tolerance");
        cmd->add_option("--fd-step", config.fd_step, "finite-difference step h");
        cmd->add_option("--out", config.out_path, "report output path");
        cmd->add_option("--format", [&](const std::vector<std::string>& vals) {
            config.format = vals.front() == "json" ? plap::OutputFormat::Json
                                                   : plap::OutputFormat::Csv;
            return true;
        }, "csv|json");
        cmd->add_flag("--timings", config.timings, "record wall times (non-reproducible)");
    };

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "offset sweep, write records");
    add_sweep_options(sweep_cmd);
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "sweep + theorem checks; exit 0 iff all pass");
    add_sweep_options(verify_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    if (!plap::kernels::select(kernel.c_str())) {
        std::cerr << "error: kernel backend '" << kernel << "' unavailable\n";
        return 2;
    }

    try {
        if (mesh_cmd->parsed()) {
            plap::AnnularDomain domain{config.r0, config.r1, s_single};
            plap::TriMesh mesh = plap::build_annulus_mesh(domain, config.n_theta, config.n_layers);
            std::ostringstream out;
            plap::write_mesh_dump(mesh, out);
            write_output(out_path, out.str());
            return 0;
        }
        if (solve_cmd->parsed()) return run_solve(config, s_single, false);
        if (eigen_cmd->parsed()) return run_solve(config, s_single, true);
        if (oracle_cmd->parsed()) {
            return run_oracle(oracle_p, oracle_N, config.r0, config.r1, oracle_grid,
                              oracle_kind, out_path);
        }
        if (sweep_cmd->parsed()) return run_sweep_cmd(config, false);
        if (verify_cmd->parsed()) return run_sweep_cmd(config, true);
    } catch (const plap::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const plap::GeometryError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
