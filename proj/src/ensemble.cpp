#include "nonstat_pm/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "nonstat_pm/numerics.hpp"
#include "nonstat_pm/rng.hpp"

namespace nspm {

namespace {

constexpr std::uint64_t kEnsembleStreamTag = 0x01ULL << 56;
constexpr std::size_t kBlock = 4096;  // reduction granularity, fixed so results
                                      // do not depend on the worker count

void run_blocks(std::size_t total, std::size_t threads,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    const std::size_t nblocks = (total + kBlock - 1) / kBlock;
    if (threads <= 1 || nblocks <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b)
            body(b, b * kBlock, std::min(total, (b + 1) * kBlock));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t b = next.fetch_add(1);
            if (b >= nblocks) return;
            body(b, b * kBlock, std::min(total, (b + 1) * kBlock));
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

const char* to_string(Centering c) {
    return c == Centering::transfer_exact ? "transfer_exact" : "ensemble_mean";
}

InitialMeasure::InitialMeasure(GridDensity density, double beta_star)
    : density_(std::move(density)) {
    if (std::abs(density_.mass() - 1.0) > 1e-10)
        throw std::invalid_argument("InitialMeasure: density mass differs from 1");
    auto report = cone_check(density_, MapParameter(beta_star));
    if (!report.is_member)
        throw std::invalid_argument("InitialMeasure: density not in the cone C_*(beta_star); "
                                    "first violation: " +
                                    report.violations[0].criterion);
    const std::size_t G = density_.grid_size;
    cdf_.assign(G + 1, 0.0);
    KahanSum acc;
    for (std::size_t j = 0; j < G; ++j) {
        acc.add(density_.cells[j] / static_cast<double>(G));
        cdf_[j + 1] = acc.value();
    }
    const double total = cdf_[G];
    for (double& c : cdf_) c /= total;
    cdf_[G] = 1.0;
}

InitialMeasure InitialMeasure::lebesgue(std::size_t grid_size, double beta_star) {
    return InitialMeasure(GridDensity::uniform(grid_size), beta_star);
}

double InitialMeasure::sample(double u) const {
    const std::size_t G = density_.grid_size;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t j = it == cdf_.begin() ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
    if (j >= G) j = G - 1;
    const double width = cdf_[j + 1] - cdf_[j];
    const double frac = width > 0.0 ? (u - cdf_[j]) / width : 0.0;
    return (static_cast<double>(j) + frac) / static_cast<double>(G);
}

std::size_t default_thread_count() {
    if (const char* env = std::getenv("NONSTAT_PM_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

double trajectory_step(const MapParameter& p, double x, bool bit) {
    double y = apply_map(p, x);
    if (bit) {
        double z = y + 0x1.0p-53;
        if (z < 1.0) y = z;
    }
    return y;
}

namespace {

// Raw centered prefix sums sum_{i<n}(f(x_i) - c_i) at each checkpoint.
struct PrefixSums {
    std::vector<std::vector<double>> at;  // per checkpoint: M x d
};

PrefixSums run_trajectories(std::span<const MapParameter> schedule, const Observable& f,
                            const InitialMeasure& mu, std::span<const std::size_t> checkpoints,
                            std::size_t M, Centering centering, std::uint64_t seed,
                            std::size_t threads, OperatorCache& cache) {
    if (checkpoints.empty()) throw std::invalid_argument("ensemble: no checkpoints");
    for (std::size_t c = 1; c < checkpoints.size(); ++c)
        if (checkpoints[c] <= checkpoints[c - 1])
            throw std::invalid_argument("ensemble: checkpoints must increase");
    const std::size_t N = checkpoints.back();
    if (N < 1 || M < 2) throw std::invalid_argument("ensemble: need N >= 1 and M >= 2");
    if (N > 1 && schedule.size() < N - 1)
        throw std::invalid_argument("ensemble: schedule shorter than N-1");
    if (threads == 0) threads = default_thread_count();
    const std::size_t d = f.dim;

    // centering coefficients c[i*d + a]
    std::vector<double> center(N * d, 0.0);
    if (centering == Centering::transfer_exact) {
        auto means = mean_along(schedule, f, N, mu.density(), cache);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t a = 0; a < d; ++a) center[i * d + a] = means[i][a];
    } else {
        // pass 1: per-time sums, reduced in fixed block order
        const std::size_t nblocks = (M + kBlock - 1) / kBlock;
        std::vector<std::vector<double>> partial(nblocks);
        run_blocks(M, threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
            std::vector<double> acc(N * d, 0.0);
            for (std::size_t m = begin; m < end; ++m) {
                CounterRng rng(seed, kEnsembleStreamTag | m);
                double x = mu.sample(rng.uniform(0));
                for (std::size_t i = 0; i < N; ++i) {
                    for (std::size_t a = 0; a < d; ++a) acc[i * d + a] += f.eval(a, x);
                    if (i + 1 < N) x = trajectory_step(schedule[i], x, rng.bits(i + 1) & 1);
                }
            }
            partial[b] = std::move(acc);
        });
        for (std::size_t b = 0; b < nblocks; ++b)
            for (std::size_t k = 0; k < N * d; ++k) center[k] += partial[b][k];
        for (double& v : center) v /= static_cast<double>(M);
    }

    PrefixSums out;
    out.at.assign(checkpoints.size(), std::vector<double>(M * d, 0.0));
    run_blocks(M, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> acc(d);
        for (std::size_t m = begin; m < end; ++m) {
            CounterRng rng(seed, kEnsembleStreamTag | m);
            double x = mu.sample(rng.uniform(0));
            std::fill(acc.begin(), acc.end(), 0.0);
            std::size_t next_cp = 0;
            for (std::size_t i = 0; i < N; ++i) {
                for (std::size_t a = 0; a < d; ++a) acc[a] += f.eval(a, x) - center[i * d + a];
                if (i + 1 == checkpoints[next_cp]) {
                    for (std::size_t a = 0; a < d; ++a) out.at[next_cp][m * d + a] = acc[a];
                    ++next_cp;
                    if (next_cp == checkpoints.size()) break;
                }
                x = trajectory_step(schedule[i], x, rng.bits(i + 1) & 1);
            }
        }
    });
    return out;
}

EnsembleResult make_result(std::vector<double> samples, std::size_t M, std::size_t d,
                           std::size_t N, Centering centering, std::uint64_t seed) {
    EnsembleResult r;
    r.samples = std::move(samples);
    r.count = M;
    r.dim = d;
    r.N = N;
    r.centering = centering;
    r.seed = seed;
    return r;
}

}  // namespace

std::vector<EnsembleResult> simulate_W_prefixes(std::span<const MapParameter> schedule,
                                                const Observable& f, const InitialMeasure& mu,
                                                std::span<const std::size_t> checkpoints,
                                                std::size_t M, Centering centering,
                                                std::uint64_t seed, std::size_t threads,
                                                OperatorCache& cache) {
    auto sums = run_trajectories(schedule, f, mu, checkpoints, M, centering, seed, threads, cache);
    std::vector<EnsembleResult> results;
    results.reserve(checkpoints.size());
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(checkpoints[c]));
        auto& v = sums.at[c];
        for (double& x : v) x *= scale;
        results.push_back(make_result(std::move(v), M, f.dim, checkpoints[c], centering, seed));
    }
    return results;
}

EnsembleResult simulate_W(std::span<const MapParameter> schedule, const Observable& f,
                          const InitialMeasure& mu, std::size_t N, std::size_t M,
                          Centering centering, std::uint64_t seed, std::size_t threads,
                          OperatorCache& cache) {
    const std::size_t cps[] = {N};
    return std::move(
        simulate_W_prefixes(schedule, f, mu, cps, M, centering, seed, threads, cache)[0]);
}

EnsembleResult simulate_S(std::span<const MapParameter> schedule, const Observable& f,
                          const InitialMeasure& mu, std::size_t N, std::size_t M,
                          Centering centering, std::uint64_t seed, std::size_t threads,
                          OperatorCache& cache) {
    EnsembleResult r = simulate_W(schedule, f, mu, N, M, centering, seed, threads, cache);
    const double root_n = std::sqrt(static_cast<double>(N));
    for (double& x : r.samples) x *= root_n;
    return r;
}

EnsembleResult simulate_xi(const QdsArray& array, std::size_t n, double t, const Observable& f,
                           const InitialMeasure& mu, std::size_t M, Centering centering,
                           std::uint64_t seed, std::size_t threads, OperatorCache& cache) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("simulate_xi: t outside [0,1]");
    const double nt = static_cast<double>(n) * t;
    const auto j = static_cast<std::size_t>(std::floor(nt));
    const double theta = nt - static_cast<double>(j);
    const double root_n = std::sqrt(static_cast<double>(n));

    if (j == 0 && theta == 0.0) {
        // empty sum: xi_n(0) = 0
        return make_result(std::vector<double>(M * f.dim, 0.0), M, f.dim, 0, centering, seed);
    }

    auto schedule = qds_row(array, n).materialize(n);
    std::vector<std::size_t> cps;
    if (j >= 1) cps.push_back(j);
    if (theta > 0.0) cps.push_back(j + 1);
    auto sums = run_trajectories(schedule, f, mu, cps, M, centering, seed, threads, cache);

    std::vector<double> samples(M * f.dim, 0.0);
    const auto& lo = sums.at.front();
    const auto& hi = sums.at.back();
    for (std::size_t k = 0; k < samples.size(); ++k) {
        double v;
        if (theta == 0.0)
            v = lo[k];
        else if (j == 0)
            v = theta * hi[k];  // xi(0) = 0, interpolate toward the first point
        else
            v = (1.0 - theta) * lo[k] + theta * hi[k];
        samples[k] = v / root_n;
    }
    return make_result(std::move(samples), M, f.dim,
                       theta == 0.0 ? j : j + 1, centering, seed);
}

CovarianceMatrix empirical_covariance(const EnsembleResult& r) {
    if (r.count < 2) throw std::invalid_argument("empirical_covariance: need M >= 2");
    for (double v : r.samples)
        if (!std::isfinite(v)) throw std::invalid_argument("empirical_covariance: non-finite sample");
    const std::size_t d = r.dim, M = r.count;
    std::vector<double> mean(d, 0.0);
    if (r.centering == Centering::ensemble_mean) {
        for (std::size_t a = 0; a < d; ++a) {
            KahanSum s;
            for (std::size_t m = 0; m < M; ++m) s.add(r.at(m, a));
            mean[a] = s.value() / static_cast<double>(M);
        }
    }
    CovarianceMatrix cov(d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            KahanSum s;
            for (std::size_t m = 0; m < M; ++m)
                s.add((r.at(m, a) - mean[a]) * (r.at(m, b) - mean[b]));
            double v = s.value() / static_cast<double>(M);
            cov.at(a, b) = v;
            cov.at(b, a) = v;
        }
    cov.clamp_psd(1e-10);
    return cov;
}

void write_csv(std::ostream& os, const EnsembleResult& r) {
    os << "# N=" << r.N << " M=" << r.count << " d=" << r.dim << " seed=" << r.seed
       << " centering=" << to_string(r.centering) << "\n";
    char buf[64];
    for (std::size_t m = 0; m < r.count; ++m) {
        for (std::size_t a = 0; a < r.dim; ++a) {
            std::snprintf(buf, sizeof buf, "%.17g", r.at(m, a));
            os << buf << (a + 1 == r.dim ? "" : ",");
        }
        os << "\n";
    }
}

}  // namespace nspm
