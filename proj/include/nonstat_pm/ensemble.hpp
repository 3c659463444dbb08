#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "nonstat_pm/covariance.hpp"
#include "nonstat_pm/grid_density.hpp"
#include "nonstat_pm/observable.hpp"
#include "nonstat_pm/schedules.hpp"
#include "nonstat_pm/transfer.hpp"

namespace nspm {

enum class Centering {
    transfer_exact,  // subtract mu(f o T~_i) from the transfer module (default)
    ensemble_mean,   // subtract per-time sample means (cross-validation only)
};

const char* to_string(Centering c);

// Initial measure mu: a cone density together with its piecewise-linear CDF,
// inverted exactly for sampling. Sampling from the grid measure itself (rather
// than an approximation of a continuum density) is what makes transfer-exact
// centering consistent with the drawn trajectories.
class InitialMeasure {
public:
    // validates cone membership at beta_star and unit mass
    InitialMeasure(GridDensity density, double beta_star);
    static InitialMeasure lebesgue(std::size_t grid_size, double beta_star);

    const GridDensity& density() const noexcept { return density_; }
    double sample(double u) const;  // u in [0,1)

private:
    GridDensity density_;
    std::vector<double> cdf_;
};

// M x d sample matrix of W (or S, or xi_n(t)) values.
struct EnsembleResult {
    std::vector<double> samples;  // row-major M x d
    std::size_t count = 0;        // M
    std::size_t dim = 1;          // d
    std::size_t N = 0;
    Centering centering = Centering::transfer_exact;
    std::uint64_t seed = 0;

    double at(std::size_t m, std::size_t a) const { return samples[m * dim + a]; }
};

std::size_t default_thread_count();  // NONSTAT_PM_THREADS env var, else hardware

// One trajectory step with a fresh low-order bit. Every double is dyadic, so
// exact doubling-map arithmetic empties the mantissa and parks every orbit at
// 0 within ~53 steps; re-feeding one random bit per step simulates the
// genuine bit-shift dynamics (and is harmless 2^-53-scale dither for a > 0).
double trajectory_step(const MapParameter& p, double x, bool bit);

// W(N) = N^{-1/2} sum_{i<N} (f o T~_i - mu(f o T~_i)), M independent draws of
// x0 ~ mu. Bitwise deterministic in (seed, schedule, N, M) regardless of the
// worker count: sample streams are counter-based and reductions run in fixed
// block order.
EnsembleResult simulate_W(std::span<const MapParameter> schedule, const Observable& f,
                          const InitialMeasure& mu, std::size_t N, std::size_t M,
                          Centering centering, std::uint64_t seed, std::size_t threads = 0,
                          OperatorCache& cache = OperatorCache::global());

// One sweep, W at several prefix lengths (shared trajectories).
std::vector<EnsembleResult> simulate_W_prefixes(std::span<const MapParameter> schedule,
                                                const Observable& f, const InitialMeasure& mu,
                                                std::span<const std::size_t> checkpoints,
                                                std::size_t M, Centering centering,
                                                std::uint64_t seed, std::size_t threads = 0,
                                                OperatorCache& cache = OperatorCache::global());

// S = sqrt(N) W, elementwise on the same draws.
EnsembleResult simulate_S(std::span<const MapParameter> schedule, const Observable& f,
                          const InitialMeasure& mu, std::size_t N, std::size_t M,
                          Centering centering, std::uint64_t seed, std::size_t threads = 0,
                          OperatorCache& cache = OperatorCache::global());

// QDS fluctuation xi_n(t) on row n of the array; nt non-integer interpolates
// linearly between the adjacent integer-time values, per sample.
EnsembleResult simulate_xi(const QdsArray& array, std::size_t n, double t, const Observable& f,
                           const InitialMeasure& mu, std::size_t M, Centering centering,
                           std::uint64_t seed, std::size_t threads = 0,
                           OperatorCache& cache = OperatorCache::global());

// (1/M) sum w w^T, uncentered under transfer-exact centering (mu(W) = 0
// exactly there), centered otherwise. Symmetrized; eigenvalues below -1e-10
// raise, small negatives clamp to zero.
CovarianceMatrix empirical_covariance(const EnsembleResult& result);

// CSV export: "# N=.. M=.. d=.. seed=.. centering=.." header, one sample per
// row, 17 significant digits.
void write_csv(std::ostream& os, const EnsembleResult& result);

}  // namespace nspm
