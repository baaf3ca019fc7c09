#include "plap/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "plap/eigen.hpp"
#include "plap/shape_calculus.hpp"
#include "plap/torsion.hpp"

namespace plap {

void SweepConfig::validate() const {
    PExponent check_p(p);  // range check
    AnnularDomain d{r0, r1, 0.0};
    d.validate();
    if (!(s_start >= 0.0) || !(s_end >= s_start)) {
        throw ConfigError("SweepConfig: need 0 <= s_start <= s_end");
    }
    if (!(s_end < r1 - r0)) throw ConfigError("SweepConfig: s_end must be < r1 - r0");
    if (s_steps < 1) throw ConfigError("SweepConfig: s_steps must be >= 1");
    if (n_theta < 8 || n_theta > 4096 || n_layers < 2 || n_layers > 2048) {
        throw ConfigError("SweepConfig: resolution out of supported range");
    }
    if (!(tol > 0.0)) throw ConfigError("SweepConfig: tol must be > 0");
    if (s_steps > 1) {
        double spacing = (s_end - s_start) / (s_steps - 1);
        if (!(resolved_fd_step() < spacing)) {
            throw ConfigError("SweepConfig: fd_step must be smaller than the s grid spacing");
        }
    }
}

std::vector<double> SweepConfig::s_values() const {
    std::vector<double> s(s_steps);
    if (s_steps == 1) {
        s[0] = s_start;
        return s;
    }
    double h = (s_end - s_start) / (s_steps - 1);
    for (int k = 0; k < s_steps; ++k) s[k] = s_start + k * h;
    return s;
}

double SweepConfig::resolved_fd_step() const {
    return fd_step > 0.0 ? fd_step : 0.01 * (r1 - r0);
}

namespace {

struct PointSolve {
    double E_load = 0.0;
    double E_grad = 0.0;
    double lambda1 = 0.0;
    TorsionSolution torsion;
    EigenPair eigen;
    TriMesh mesh;
};

PointSolve solve_point(const SweepConfig& config, double s) {
    PointSolve out;
    AnnularDomain domain{config.r0, config.r1, s};
    out.mesh = build_annulus_mesh(domain, config.n_theta, config.n_layers);
    PExponent p(config.p);
    SolverSettings settings = default_solver_settings(p);
    settings.tol = config.tol;
    out.torsion = solve_torsion(out.mesh, p, settings);
    auto [eg, el] = torsional_rigidity(out.mesh, out.torsion, p);
    out.E_grad = eg;
    out.E_load = el;
    EigenSettings es = default_eigen_settings(p);
    es.inner.tol = config.tol;
    out.eigen = solve_first_eigenpair(out.mesh, p, es);
    out.lambda1 = out.eigen.lambda1;
    return out;
}

double max_signed_flux(const BoundaryFlux& flux) {
    double m = -std::numeric_limits<double>::max();
    for (const auto& s : flux.samples) m = std::max(m, s.value);
    return m;
}

}  // namespace

SweepRecord compute_sweep_record(const SweepConfig& config, double s, bool include_fd) {
    auto t0 = std::chrono::steady_clock::now();
    PExponent p(config.p);

    SweepRecord rec;
    rec.s = s;

    PointSolve main = solve_point(config, s);
    rec.E = main.E_load;
    rec.lambda1 = main.lambda1;
    rec.E_grad_load_gap = std::abs(main.E_grad - main.E_load) / main.E_load;
    rec.solver_iterations = main.torsion.newton_iterations + main.eigen.iterations;

    BoundaryFlux flux_t = boundary_normal_derivative(main.mesh, main.torsion.field,
                                                     BoundaryTag::Inner);
    BoundaryFlux flux_e = boundary_normal_derivative(main.mesh, main.eigen.field,
                                                     BoundaryTag::Inner);
    rec.dE_hadamard = hadamard_torsion_derivative(flux_t, p);
    rec.dlam_hadamard = hadamard_eigen_derivative(flux_e, p);
    rec.min_inner_flux_torsion = max_signed_flux(flux_t);
    rec.min_inner_flux_eigen = max_signed_flux(flux_e);

    PerturbationField V = PerturbationField::translation(main.mesh.domain);
    PucciSerrinResult ps = pucci_serrin_residual(main.mesh, main.torsion.field, p, 1.0, V);
    rec.pucci_serrin_rel_residual = ps.scale > 0.0 ? ps.residual / ps.scale : 0.0;

    rec.reflection_min_gap_torsion = reflection_comparison(main.mesh, main.torsion.field, s).min_gap;
    rec.reflection_min_gap_eigen = reflection_comparison(main.mesh, main.eigen.field, s).min_gap;

    if (include_fd && s > 0.0) {
        double h = config.resolved_fd_step();
        PointSolve plus = solve_point(config, s + h);
        PointSolve minus = solve_point(config, s - h);
        rec.dE_fd = (plus.E_load - minus.E_load) / (2.0 * h);
        rec.dlam_fd = (plus.lambda1 - minus.lambda1) / (2.0 * h);
        rec.solver_iterations += plus.torsion.newton_iterations + plus.eigen.iterations +
                                 minus.torsion.newton_iterations + minus.eigen.iterations;
    }

    if (config.timings) {
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    rec.ok = true;
    return rec;
}

std::pair<std::vector<SweepRecord>, VerificationSummary> run_sweep(const SweepConfig& config) {
    config.validate();
    std::vector<double> ss = config.s_values();
    std::vector<SweepRecord> records(ss.size());

    unsigned workers = 0;
    if (const char* env = std::getenv("PLAP_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) workers = static_cast<unsigned>(std::min<long>(v, 64));
    }

    auto run_one = [&](std::size_t k) {
        try {
            records[k] = compute_sweep_record(config, ss[k], /*include_fd=*/true);
        } catch (const std::exception& e) {
            records[k].s = ss[k];
            records[k].ok = false;
            records[k].error = e.what();
        }
    };

    if (workers <= 1) {
        for (std::size_t k = 0; k < ss.size(); ++k) run_one(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t k = next.fetch_add(1);
                    if (k >= ss.size()) return;
                    run_one(k);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    VerificationSummary summary;
    bool partial = false;
    for (const auto& r : records) partial |= !r.ok;
    if (partial) {
        summary.conclusive = false;
        return {std::move(records), summary};
    }
    try {
        summary = verify_theorems(records);
    } catch (const InsufficientRecords&) {
        summary.conclusive = false;
    }
    return {std::move(records), summary};
}

VerificationSummary verify_theorems(const std::vector<SweepRecord>& records) {
    if (records.size() < 3) throw InsufficientRecords("verify_theorems: need >= 3 records");
    for (const auto& r : records) {
        if (!r.ok) throw InsufficientRecords("verify_theorems: incomplete record present");
    }
    for (std::size_t k = 0; k + 1 < records.size(); ++k) {
        if (!(records[k].s < records[k + 1].s)) {
            throw InsufficientRecords("verify_theorems: records must be sorted by s");
        }
    }
    if (records.front().s != 0.0) {
        throw InsufficientRecords("verify_theorems: first record must be at s = 0");
    }

    VerificationSummary sum;
    const SweepRecord& first = records.front();
    const SweepRecord& last = records.back();

    const double tol_j = 1e-6 * std::abs(last.E - first.E);
    const double tol_j1 = 1e-6 * std::abs(last.lambda1 - first.lambda1);

    sum.monotone_torsion = true;
    sum.monotone_eigen = true;
    for (std::size_t k = 0; k + 1 < records.size(); ++k) {
        if (!(records[k + 1].E > records[k].E - tol_j)) sum.monotone_torsion = false;
        if (!(records[k + 1].lambda1 < records[k].lambda1 + tol_j1)) sum.monotone_eigen = false;
    }

    std::size_t argmin = 0, argmax = 0;
    for (std::size_t k = 1; k < records.size(); ++k) {
        if (records[k].E < records[argmin].E) argmin = k;
        if (records[k].lambda1 > records[argmax].lambda1) argmax = k;
    }
    sum.argmin_j_at_zero = (argmin == 0);
    sum.argmax_j1_at_zero = (argmax == 0);

    sum.derivative_sign_torsion = true;
    sum.derivative_sign_eigen = true;
    double max_dE = 0.0, max_dlam = 0.0;
    for (const auto& r : records) {
        if (r.s > 0.0) {
            if (!(r.dE_hadamard >= 0.0)) sum.derivative_sign_torsion = false;
            if (!(r.dlam_hadamard <= 0.0)) sum.derivative_sign_eigen = false;
            max_dE = std::max(max_dE, std::abs(r.dE_hadamard));
            max_dlam = std::max(max_dlam, std::abs(r.dlam_hadamard));
        }
    }

    sum.symmetry_at_zero = std::abs(first.dE_hadamard) <= 1e-3 * max_dE &&
                           std::abs(first.dlam_hadamard) <= 1e-3 * max_dlam;
    return sum;
}

namespace {

const char* kCsvHeader =
    "s,E,lambda1,dE_hadamard,dE_fd,dlam_hadamard,dlam_fd,E_grad_load_gap,"
    "pucci_serrin_rel_residual,reflection_min_gap_torsion,reflection_min_gap_eigen,"
    "min_inner_flux_torsion,min_inner_flux_eigen,solver_iterations,wall_time";

}  // namespace

std::string records_to_csv(const std::vector<SweepRecord>& records) {
    std::string out(kCsvHeader);
    out += '\n';
    char buf[640];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g,%.17g,%lld,%.17g\n",
                      r.s, r.E, r.lambda1, r.dE_hadamard, r.dE_fd, r.dlam_hadamard, r.dlam_fd,
                      r.E_grad_load_gap, r.pucci_serrin_rel_residual,
                      r.reflection_min_gap_torsion, r.reflection_min_gap_eigen,
                      r.min_inner_flux_torsion, r.min_inner_flux_eigen, r.solver_iterations,
                      r.wall_time);
        out += buf;
    }
    return out;
}

std::vector<SweepRecord> records_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("records_from_csv: empty input");
    if (line != kCsvHeader) throw ConfigError("records_from_csv: unexpected header");
    std::vector<SweepRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        SweepRecord r;
        long long iters = 0;
        int n = std::sscanf(line.c_str(),
                            "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lld,%lf",
                            &r.s, &r.E, &r.lambda1, &r.dE_hadamard, &r.dE_fd, &r.dlam_hadamard,
                            &r.dlam_fd, &r.E_grad_load_gap, &r.pucci_serrin_rel_residual,
                            &r.reflection_min_gap_torsion, &r.reflection_min_gap_eigen,
                            &r.min_inner_flux_torsion, &r.min_inner_flux_eigen, &iters,
                            &r.wall_time);
        if (n != 15) throw ConfigError("records_from_csv: malformed row");
        r.solver_iterations = iters;
        r.ok = true;
        records.push_back(r);
    }
    return records;
}

std::string report_to_json(const SweepConfig& config, const std::vector<SweepRecord>& records,
                           const VerificationSummary& summary) {
    nlohmann::json j;
    j["config"] = {{"p", config.p},
                   {"r0", config.r0},
                   {"r1", config.r1},
                   {"s_start", config.s_start},
                   {"s_end", config.s_end},
                   {"s_steps", config.s_steps},
                   {"n_theta", config.n_theta},
                   {"n_layers", config.n_layers},
                   {"tol", config.tol},
                   {"fd_step", config.resolved_fd_step()}};
    j["records"] = nlohmann::json::array();
    for (const auto& r : records) {
        j["records"].push_back({{"s", r.s},
                                {"E", r.E},
                                {"lambda1", r.lambda1},
                                {"dE_hadamard", r.dE_hadamard},
                                {"dE_fd", r.dE_fd},
                                {"dlam_hadamard", r.dlam_hadamard},
                                {"dlam_fd", r.dlam_fd},
                                {"E_grad_load_gap", r.E_grad_load_gap},
                                {"pucci_serrin_rel_residual", r.pucci_serrin_rel_residual},
                                {"reflection_min_gap_torsion", r.reflection_min_gap_torsion},
                                {"reflection_min_gap_eigen", r.reflection_min_gap_eigen},
                                {"min_inner_flux_torsion", r.min_inner_flux_torsion},
                                {"min_inner_flux_eigen", r.min_inner_flux_eigen},
                                {"solver_iterations", r.solver_iterations},
                                {"wall_time", r.wall_time}});
    }
    j["summary"] = {{"monotone_torsion", summary.monotone_torsion},
                    {"monotone_eigen", summary.monotone_eigen},
                    {"argmin_j_at_zero", summary.argmin_j_at_zero},
                    {"argmax_j1_at_zero", summary.argmax_j1_at_zero},
                    {"derivative_sign_torsion", summary.derivative_sign_torsion},
                    {"derivative_sign_eigen", summary.derivative_sign_eigen},
                    {"symmetry_at_zero", summary.symmetry_at_zero},
                    {"conclusive", summary.conclusive},
                    {"all_pass", summary.all_pass()}};
    return j.dump(2) + "\n";
}

std::string summary_to_text(const VerificationSummary& s) {
    auto line = [](const char* name, bool pass) {
        return std::string(pass ? "PASS " : "FAIL ") + name + "\n";
    };
    std::string out;
    out += line("monotone_torsion (j increasing)", s.monotone_torsion);
    out += line("monotone_eigen (j1 decreasing)", s.monotone_eigen);
    out += line("argmin_j = 0", s.argmin_j_at_zero);
    out += line("argmax_j1 = 0", s.argmax_j1_at_zero);
    out += line("derivative_sign_torsion (j' >= 0)", s.derivative_sign_torsion);
    out += line("derivative_sign_eigen (j1' <= 0)", s.derivative_sign_eigen);
    out += line("symmetry_at_zero (j'(0) ~ 0 ~ j1'(0))", s.symmetry_at_zero);
    if (!s.conclusive) out += "INCONCLUSIVE: sweep incomplete\n";
    return out;
}

}  // namespace plap
