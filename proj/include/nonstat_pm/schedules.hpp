#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "nonstat_pm/pm_map.hpp"

namespace nspm {

// Deterministic admissible sequence (alpha_i)_{i>=1} with every value in
// [0, beta_star]. Index 0 denotes the first map applied (T_1).
class FixedSchedule {
public:
    static FixedSchedule constant(double alpha, double beta_star);
    static FixedSchedule alternating(double a, double b, double beta_star);
    // replays the list (cyclically when cyclic is set); values validated upfront
    static FixedSchedule from_list(std::vector<double> values, double beta_star,
                                   bool cyclic = true);
    static FixedSchedule from_rule(std::function<double(std::size_t)> rule, double beta_star);

    double beta_star() const noexcept { return beta_star_; }
    // throws std::domain_error("... inadmissible at index i") on violation
    double alpha_at(std::size_t i) const;
    std::vector<MapParameter> materialize(std::size_t n) const;
    std::vector<double> values(std::size_t n) const;

private:
    FixedSchedule(std::function<double(std::size_t)> rule, double beta_star);

    std::function<double(std::size_t)> rule_;
    double beta_star_;
};

// Stationary random selection process for the map parameters: iid uniform on
// [lo,hi] (subset of [0,beta_star]) or a finite-state Markov chain started
// from its stationary vector. Stationarity and mixing hold by construction;
// mixing_profile reports the analytic bound shape.
struct RandomProcess {
    enum class Kind { iid_uniform, finite_markov };

    Kind kind = Kind::iid_uniform;
    double beta_star = 0.3;
    std::uint64_t seed = 0;

    // iid support
    double lo = 0.0, hi = 0.3;
    // markov data: states and a row-stochastic transition matrix
    std::vector<double> states;
    std::vector<std::vector<double>> transition;

    static RandomProcess iid(double lo, double hi, double beta_star, std::uint64_t seed);
    static RandomProcess markov(std::vector<double> states,
                                std::vector<std::vector<double>> transition, double beta_star,
                                std::uint64_t seed);

    std::vector<double> stationary() const;  // markov only
};

// One realization omega_1..omega_length; bitwise reproducible from
// (seed, stream_id).
FixedSchedule sample_omega(const RandomProcess& process, std::size_t length,
                           std::uint64_t stream_id);

// Analytic alpha-mixing bound shape: iid is 0 from lag 1 on; a Markov chain
// decays like lambda^n with lambda its second-largest eigenvalue modulus.
// lambda ~ 1 is flagged as non-mixing.
struct MixingProfile {
    enum class Kind { independent, geometric, none };
    Kind kind = Kind::independent;
    double lambda = 0.0;

    bool mixing() const noexcept { return kind != Kind::none; }
    double bound(std::size_t n) const;
};

MixingProfile mixing_profile(const RandomProcess& process);

// Quasistatic triangular array alpha_{n,k} tracking a limit curve tau with
// Hoelder exponent eta: alpha_{n,k} = clamp(tau(k/n) + c_pert n^{-eta} zeta,
// 0, beta_star), zeta a seeded deterministic perturbation in [-1,1].
struct QdsArray {
    std::function<double(double)> tau;
    double eta = 1.0;
    double c_pert = 0.0;
    double beta_star = 0.3;
    std::uint64_t seed = 0;

    static QdsArray constant_curve(double alpha, double beta_star);
    static QdsArray linear_curve(double a, double b, double beta_star);  // tau(t) = a + b t
};

// Row n of the array: alpha_{n,k} for k = 1..n.
FixedSchedule qds_row(const QdsArray& array, std::size_t n);

// Line-based text format: "#schedule kind=... beta_star=... seed=..." header,
// then one alpha per line with 17 significant digits.
void save_schedule(std::ostream& os, const std::vector<double>& alphas, const std::string& kind,
                   double beta_star, std::uint64_t seed);

struct LoadedSchedule {
    std::string kind;
    double beta_star = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> alphas;
};

LoadedSchedule load_schedule(std::istream& is);

}  // namespace nspm
