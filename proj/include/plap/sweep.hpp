#pragma once

#include <string>
#include <utility>
#include <vector>

#include "plap/geometry.hpp"

namespace plap {

enum class OutputFormat { Csv, Json };

struct SweepConfig {
    double p = 2.0;
    double r0 = 0.3;
    double r1 = 1.0;
    double s_start = 0.0;
    double s_end = 0.6;
    int s_steps = 7;
    int n_theta = 128;
    int n_layers = 48;
    double tol = 1e-10;
    double fd_step = 0.0;  ///< 0 = default 0.01 * (r1 - r0)
    std::string out_path;
    OutputFormat format = OutputFormat::Csv;
    bool timings = false;  ///< wall_time column stays 0 unless enabled (reproducible output)

    void validate() const;
    std::vector<double> s_values() const;
    double resolved_fd_step() const;
};

/// One sweep point. Columns are serialized in exactly this order.
/// min_inner_flux_* stores the signed inner-boundary normal derivative
/// closest to zero (the negativity margin): it is < 0 iff every edge is.
struct SweepRecord {
    double s = 0.0;
    double E = 0.0;        // j(s), load form
    double lambda1 = 0.0;  // j1(s)
    double dE_hadamard = 0.0;
    double dE_fd = 0.0;    // 0 at s = 0 (not evaluated there)
    double dlam_hadamard = 0.0;
    double dlam_fd = 0.0;
    double E_grad_load_gap = 0.0;  // |E_grad - E_load| / E_load
    double pucci_serrin_rel_residual = 0.0;
    double reflection_min_gap_torsion = 0.0;
    double reflection_min_gap_eigen = 0.0;
    double min_inner_flux_torsion = 0.0;
    double min_inner_flux_eigen = 0.0;
    long long solver_iterations = 0;
    double wall_time = 0.0;

    bool ok = false;           ///< not serialized: record completed
    std::string error;         ///< not serialized: failure reason
};

struct VerificationSummary {
    bool monotone_torsion = false;      // j strictly increasing (within tol_mono)
    bool monotone_eigen = false;        // j1 strictly decreasing
    bool argmin_j_at_zero = false;
    bool argmax_j1_at_zero = false;
    bool derivative_sign_torsion = false;  // dE_hadamard >= 0 for s > 0
    bool derivative_sign_eigen = false;    // dlam_hadamard <= 0 for s > 0
    bool symmetry_at_zero = false;         // |j'(0)|, |j1'(0)| below threshold
    bool conclusive = true;                // false when the sweep was partial

    bool all_pass() const {
        return conclusive && monotone_torsion && monotone_eigen && argmin_j_at_zero &&
               argmax_j1_at_zero && derivative_sign_torsion && derivative_sign_eigen &&
               symmetry_at_zero;
    }
};

/// Full verification record for one offset: mesh, torsion + eigen solves,
/// Hadamard derivatives, and (for s > 0, include_fd) central finite
/// differences from extra solves at s +- h on the same resolution.
SweepRecord compute_sweep_record(const SweepConfig& config, double s, bool include_fd);

/// Runs the whole sweep (PLAP_THREADS workers; 0/unset = sequential),
/// collects records sorted by s, and verifies the theorems. Errors abort
/// the affected record and mark the summary inconclusive.
std::pair<std::vector<SweepRecord>, VerificationSummary> run_sweep(const SweepConfig& config);

/// Theorem checks over completed records (>= 3, sorted, first at s = 0).
VerificationSummary verify_theorems(const std::vector<SweepRecord>& records);

std::string records_to_csv(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> records_from_csv(const std::string& csv);
std::string report_to_json(const SweepConfig& config, const std::vector<SweepRecord>& records,
                           const VerificationSummary& summary);

std::string summary_to_text(const VerificationSummary& summary);

}  // namespace plap
