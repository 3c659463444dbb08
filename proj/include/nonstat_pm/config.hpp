#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nspm {

struct Diagnostic {
    std::string field;    // "section.key" when applicable
    std::string message;
    int line = 0;         // 0 when not tied to a source line
};

std::string format_diagnostics(const std::vector<Diagnostic>& diags);

// Key = value configuration with [sections]; '#' starts a comment. Unknown
// sections or keys are errors: silent typos corrupt long experiments.
struct ExperimentConfig {
    // [experiment]
    std::string kind;  // stationary_clt | sequential_clt | self_norming | quenched |
                       // qds_covariance | qds_clt | rate_sweep
    std::uint64_t seed = 1;
    std::size_t grid_size = 4096;
    std::size_t M = 0;
    std::vector<std::size_t> Ns;
    double beta_star = 0.3;
    std::size_t threads = 0;  // 0 = NONSTAT_PM_THREADS env or hardware

    // [schedule]
    std::string schedule_kind;  // constant | alternating | list | iid_uniform |
                                // finite_markov | qds
    std::vector<double> schedule_values;
    double iid_lo = 0.0;
    double iid_hi = -1.0;  // -1: defaults to beta_star
    std::vector<double> markov_states;
    std::vector<std::vector<double>> markov_transition;
    std::string tau_kind = "linear";  // constant | linear
    double tau_a = 0.05;
    double tau_b = 0.2;
    double eta = 1.0;
    double c_pert = 0.0;

    // [observable]
    std::string observable = "x_minus_half";

    // [output]
    std::string out_dir = "out";

    // experiment extras
    std::size_t n_omega = 50;
    std::size_t i_burn = 200;
    std::size_t K_max = 40;
    double t = 1.0;
    std::size_t n_quad = 32;

    // resolved-config hash (FNV-1a over the canonical dump), set by finalize
    std::string config_hash;

    std::string canonical_dump() const;
    void finalize_hash();
};

// Parses and type-checks; structural problems land in diags (config unusable
// when any diagnostic has line != 0 or a parse error message).
ExperimentConfig parse_config(const std::string& text, std::vector<Diagnostic>& diags);
ExperimentConfig load_config_file(const std::string& path, std::vector<Diagnostic>& diags);

// Full static validation (ranges, cross-field rules); empty result = valid.
std::vector<Diagnostic> validate_config(const ExperimentConfig& config);

}  // namespace nspm
