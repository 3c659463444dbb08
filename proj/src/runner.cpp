#include "nonstat_pm/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "nonstat_pm/ensemble.hpp"
#include "nonstat_pm/rates.hpp"
#include "nonstat_pm/stats.hpp"

namespace nspm {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// RFC-4180 quoting; our fields are plain, so quoting rarely fires.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        q += c;
        if (c == '"') q += '"';
    }
    return q + "\"";
}

struct ResultSink {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    json records = json::array();
    std::string hash;
    std::string experiment_id;

    void row(const std::vector<std::string>& values) {
        auto r = values;
        r.push_back(hash);
        rows.push_back(std::move(r));
    }

    void record(const json& params, double value, double std_error,
                const std::string& provenance) {
        records.push_back({{"experiment_id", experiment_id},
                           {"params", params},
                           {"value", value},
                           {"std_error", std_error},
                           {"provenance", provenance},
                           {"config_hash", hash}});
    }

    void write(const std::filesystem::path& dir) const {
        std::ofstream csv(dir / "results.csv", std::ios::binary);
        for (std::size_t i = 0; i < columns.size(); ++i)
            csv << csv_field(columns[i]) << (i + 1 == columns.size() ? "" : ",");
        csv << ",config_hash\r\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                csv << csv_field(r[i]) << (i + 1 == r.size() ? "" : ",");
            csv << "\r\n";
        }
        std::ofstream js(dir / "results.json", std::ios::binary);
        js << records.dump(2) << "\n";
    }
};

// Leave-one-group-out jackknife standard error for the W1 estimate.
double w1_jackknife_se(const std::vector<double>& samples, double sigma, std::size_t groups) {
    const std::size_t M = samples.size();
    if (groups < 2 || M < 2 * groups) return 0.0;
    std::vector<double> loo(groups);
    std::vector<double> buf;
    buf.reserve(M);
    for (std::size_t g = 0; g < groups; ++g) {
        buf.clear();
        for (std::size_t m = 0; m < M; ++m)
            if (m % groups != g) buf.push_back(samples[m]);
        loo[g] = wasserstein1_to_normal(buf, sigma);
    }
    double mean = 0.0;
    for (double v : loo) mean += v;
    mean /= static_cast<double>(groups);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    return std::sqrt(ss * static_cast<double>(groups - 1) / static_cast<double>(groups));
}

Observable make_observable(const ExperimentConfig& c) { return Observable::by_name(c.observable); }

FixedSchedule make_fixed_schedule(const ExperimentConfig& c) {
    if (c.schedule_kind == "constant")
        return FixedSchedule::constant(c.schedule_values.at(0), c.beta_star);
    if (c.schedule_kind == "alternating")
        return FixedSchedule::alternating(c.schedule_values.at(0), c.schedule_values.at(1),
                                          c.beta_star);
    if (c.schedule_kind == "list")
        return FixedSchedule::from_list(c.schedule_values, c.beta_star);
    throw std::invalid_argument("not a fixed schedule kind: " + c.schedule_kind);
}

RandomProcess make_process(const ExperimentConfig& c) {
    if (c.schedule_kind == "iid_uniform")
        return RandomProcess::iid(c.iid_lo, c.iid_hi < 0.0 ? c.beta_star : c.iid_hi, c.beta_star,
                                  c.seed);
    return RandomProcess::markov(c.markov_states, c.markov_transition, c.beta_star, c.seed);
}

QdsArray make_qds(const ExperimentConfig& c) {
    QdsArray a = c.tau_kind == "constant" ? QdsArray::constant_curve(c.tau_a, c.beta_star)
                                          : QdsArray::linear_curve(c.tau_a, c.tau_b, c.beta_star);
    a.eta = c.eta;
    a.c_pert = c.c_pert;
    a.seed = c.seed;
    return a;
}

void run_clt_family(const ExperimentConfig& c, ResultSink& sink, std::ostream& log) {
    const bool self_norming = c.kind == "self_norming";
    auto f = make_observable(c);
    if (f.dim != 1)
        throw std::invalid_argument(c.kind + " needs a univariate observable");
    auto schedule = make_fixed_schedule(c).materialize(c.Ns.back() - 1);
    auto mu = InitialMeasure::lebesgue(c.grid_size, c.beta_star);

    log << "covariance sweep (N = " << c.Ns.back() << ")\n";
    auto var_S = covariance_of_S(schedule, f, mu.density(), c.Ns);
    log << "ensembles (M = " << c.M << ")\n";
    auto ensembles = simulate_W_prefixes(schedule, f, mu, c.Ns, c.M,
                                         Centering::transfer_exact, c.seed, c.threads);

    sink.columns = {"N", self_norming ? "var_S" : "sigma_N_sq",
                    self_norming ? "w1_self_norming" : "w1_to_sigmaN_normal", "w1_se",
                    "rate_thm21"};
    for (std::size_t i = 0; i < c.Ns.size(); ++i) {
        const double N = static_cast<double>(c.Ns[i]);
        const double vS = var_S[i].at(0, 0);
        const double sigma_N = std::sqrt(vS / N);
        std::vector<double> samples(ensembles[i].samples);
        double sigma_ref = sigma_N;
        if (self_norming) {
            // S/sqrt(Var S) = W/sigma_N, compared against the unit normal
            for (double& x : samples) x /= sigma_N;
            sigma_ref = 1.0;
        }
        double w1 = wasserstein1_to_normal(samples, sigma_ref);
        double se = w1_jackknife_se(samples, sigma_ref, 10);
        RateSpec rs{RateSpec::Kind::thm21, {{"beta_star", c.beta_star}, {"N", N}}};
        double rate = rate_value(rs);
        sink.row({std::to_string(c.Ns[i]), fmt17(self_norming ? vS : vS / N), fmt17(w1),
                  fmt17(se), fmt17(rate)});
        sink.record({{"N", c.Ns[i]}, {"sigma_N_sq", vS / N}}, w1, se,
                    "ensemble+wasserstein1, transfer-exact centering");
        log << "  N = " << c.Ns[i] << "  w1 = " << w1 << "\n";
    }
}

void run_quenched(const ExperimentConfig& c, ResultSink& sink, std::ostream& log) {
    auto f = make_observable(c);
    if (f.dim != 1) throw std::invalid_argument("quenched needs a univariate observable");
    auto process = make_process(c);
    GridDensity mu = GridDensity::uniform(c.grid_size);

    sink.columns = {"omega", "N", "sigma_N_sq"};
    std::vector<std::vector<double>> per_n(c.Ns.size());
    for (std::size_t w = 0; w < c.n_omega; ++w) {
        auto sched = sample_omega(process, c.Ns.back() - 1, w).materialize(c.Ns.back() - 1);
        OperatorCache local;
        auto vs = covariance_of_S(sched, f, mu, c.Ns, local);
        for (std::size_t i = 0; i < c.Ns.size(); ++i) {
            double s2 = vs[i].at(0, 0) / static_cast<double>(c.Ns[i]);
            per_n[i].push_back(s2);
            sink.row({std::to_string(w), std::to_string(c.Ns[i]), fmt17(s2)});
        }
        if ((w + 1) % 10 == 0) log << "  omega " << (w + 1) << "/" << c.n_omega << "\n";
    }
    for (std::size_t i = 0; i < c.Ns.size(); ++i) {
        double mean = 0.0;
        for (double v : per_n[i]) mean += v;
        mean /= static_cast<double>(per_n[i].size());
        double ss = 0.0;
        for (double v : per_n[i]) ss += (v - mean) * (v - mean);
        double sd = std::sqrt(ss / static_cast<double>(per_n[i].size() - 1));
        sink.record({{"N", c.Ns[i]}, {"statistic", "sigma_N_sq_across_omega"}}, mean,
                    sd / std::sqrt(static_cast<double>(per_n[i].size())),
                    "transfer variance over " + std::to_string(c.n_omega) + " omega draws");
        sink.record({{"N", c.Ns[i]}, {"statistic", "std_across_omega"}}, sd, 0.0,
                    "spread of quenched variances");
        log << "  N = " << c.Ns[i] << "  mean sigma^2 = " << mean << "  std = " << sd << "\n";
    }
    double s2_full = rds_sigma_sq(process, f, mu, c.K_max, c.i_burn, c.n_omega, c.threads);
    double s2_half = rds_sigma_sq(process, f, mu, c.K_max, c.i_burn,
                                  std::max<std::size_t>(2, c.n_omega / 2), c.threads);
    sink.record({{"n_omega", c.n_omega}}, s2_full, std::abs(s2_full - s2_half),
                "rds_sigma_sq; std_error = drift against half the draws");
    log << "  rds sigma^2 = " << s2_full << " (half draws: " << s2_half << ")\n";
}

void run_qds(const ExperimentConfig& c, ResultSink& sink, std::ostream& log) {
    auto f = make_observable(c);
    auto array = make_qds(c);
    auto mu = InitialMeasure::lebesgue(c.grid_size, c.beta_star);

    log << "Sigma_t integral (n_quad = " << c.n_quad << ")\n";
    auto sigma_t = sigma_t_integral(array, f, c.t, c.n_quad, c.grid_size);
    // positivity stands in for the no-coboundary hypothesis, which has no
    // numerical test
    sink.record({{"t", c.t}, {"statistic", "lambda_min_sigma_t"}}, sigma_t.min_eigenvalue(),
                0.0, "smallest eigenvalue of the Green-Kubo time integral");

    if (c.kind == "qds_covariance") {
        sink.columns = {"n", "t", "gap_entrywise_max", "mc_se_max"};
        for (std::size_t n : c.Ns) {
            auto xi = simulate_xi(array, n, c.t, f, mu, c.M, Centering::transfer_exact, c.seed,
                                  c.threads);
            auto cov = empirical_covariance(xi);
            double gap = CovarianceMatrix::max_abs_difference(cov, sigma_t);
            double se_max = 0.0;
            for (std::size_t a = 0; a < f.dim; ++a)
                for (std::size_t b = 0; b < f.dim; ++b) {
                    double se = std::sqrt((cov.at(a, a) * cov.at(b, b) + cov.at(a, b) * cov.at(a, b)) /
                                          static_cast<double>(c.M));
                    se_max = std::max(se_max, se);
                }
            sink.row({std::to_string(n), fmt17(c.t), fmt17(gap), fmt17(se_max)});
            sink.record({{"n", n}, {"t", c.t}}, gap, se_max,
                        "empirical_covariance vs sigma_t_integral");
            log << "  n = " << n << "  gap = " << gap << "\n";
        }
    } else {  // qds_clt
        auto battery = default_battery(f.dim);
        sink.columns = {"n", "test_function", "index", "abs_difference", "phi_se"};
        for (std::size_t n : c.Ns) {
            auto xi = simulate_xi(array, n, c.t, f, mu, c.M, Centering::transfer_exact, c.seed,
                                  c.threads);
            auto dists = smooth_test_distance(xi.samples, f.dim, sigma_t, battery);
            for (std::size_t h = 0; h < battery.size(); ++h) {
                double se = phi_sigma(battery[h], sigma_t).std_error;
                sink.row({std::to_string(n), battery[h].name, std::to_string(h), fmt17(dists[h]),
                          fmt17(se)});
                sink.record({{"n", n}, {"h", battery[h].name}, {"index", h}}, dists[h], se,
                            "smooth_test_distance vs Phi_Sigma_t");
            }
            log << "  n = " << n << "  max battery distance = "
                << *std::max_element(dists.begin(), dists.end()) << "\n";
        }
    }
}

void run_rate_sweep(const ExperimentConfig& c, ResultSink& sink, std::ostream& log) {
    sink.columns = {"beta_star", "N", "K_ref", "stein_at_K_ref", "stein_min", "ratio",
                    "rate_thm21", "rho_N"};
    std::vector<double> betas = {0.1, 0.2, 0.3};
    if (c.beta_star != 0.3) betas = {c.beta_star};
    for (double b : betas) {
        for (std::size_t N : c.Ns) {
            auto Kp = static_cast<std::uint64_t>(
                std::floor(std::pow(static_cast<double>(N), b)));
            Kp = std::max<std::uint64_t>(1, std::min<std::uint64_t>(Kp, N - 1));
            double at_ref = stein_rhs(N, Kp, b);
            // brute-force min over K via one rho pass and a running tail
            double tail = rho_tail_sum(N, b);  // sum_{i >= N} rho(i)
            double best = std::numeric_limits<double>::infinity();
            const double root_n = std::sqrt(static_cast<double>(N));
            for (std::uint64_t K = N - 1; K >= 1; --K) {
                // tail currently holds sum_{i > K} rho(i)
                double value = (static_cast<double>(K) + 1.0) / root_n + tail +
                               root_n * rho(K, b);
                best = std::min(best, value);
                tail += rho(K, b);
            }
            RateSpec rs{RateSpec::Kind::thm21,
                        {{"beta_star", b}, {"N", static_cast<double>(N)}}};
            sink.row({fmt17(b), std::to_string(N), std::to_string(Kp), fmt17(at_ref),
                      fmt17(best), fmt17(at_ref / best), fmt17(rate_value(rs)),
                      fmt17(rho(N, b))});
            sink.record({{"beta_star", b}, {"N", N}, {"K", Kp}}, at_ref / best, 0.0,
                        "stein_rhs at K = floor(N^beta) over the brute-force minimum");
            log << "  beta=" << b << " N=" << N << " ratio=" << at_ref / best << "\n";
        }
    }
}

}  // namespace

int run_experiment(const ExperimentConfig& c, std::ostream& log) {
    auto diags = validate_config(c);
    if (!diags.empty()) {
        log << format_diagnostics(diags);
        return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::path dir(c.out_dir);
    std::filesystem::create_directories(dir);

    ResultSink sink;
    sink.hash = c.config_hash;
    sink.experiment_id = c.kind;

    log << "experiment " << c.kind << " (config " << c.config_hash << ")\n";
    if (c.kind == "stationary_clt" || c.kind == "sequential_clt" || c.kind == "self_norming")
        run_clt_family(c, sink, log);
    else if (c.kind == "quenched")
        run_quenched(c, sink, log);
    else if (c.kind == "qds_covariance" || c.kind == "qds_clt")
        run_qds(c, sink, log);
    else if (c.kind == "rate_sweep")
        run_rate_sweep(c, sink, log);
    else
        throw std::logic_error("unreachable: validated kind");

    sink.write(dir);

    const auto t1 = std::chrono::steady_clock::now();
    json manifest = {
        {"experiment_id", c.kind},
        {"config_hash", c.config_hash},
        {"config", c.canonical_dump()},
        {"seed", c.seed},
        {"threads", c.threads == 0 ? default_thread_count() : c.threads},
        {"wall_time_s", std::chrono::duration<double>(t1 - t0).count()},
        {"timestamp_unix",
         std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
             .count()},
        {"tool", {{"name", "nonstat-pm"}, {"version", "1.0.0"}}},
    };
    std::ofstream mf(dir / "manifest.json", std::ios::binary);
    mf << manifest.dump(2) << "\n";
    log << "wrote " << (dir / "results.csv").string() << "\n";
    return 0;
}

}  // namespace nspm
