#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "nonstat_pm/grid_density.hpp"
#include "nonstat_pm/observable.hpp"
#include "nonstat_pm/transport.hpp"
#include "nonstat_pm/ulam.hpp"

namespace nspm {

// Built operators keyed by (alpha rounded to 1e-12, G). Schedules reuse few
// distinct parameters; QDS rows and omega draws cycle through many, so the
// cache evicts in insertion order beyond a fixed capacity (live shared_ptrs
// stay valid).
class OperatorCache {
public:
    explicit OperatorCache(std::size_t capacity = 64) : capacity_(capacity) {}

    std::shared_ptr<const UlamOperator> ulam(const MapParameter& alpha, std::size_t grid_size);
    std::shared_ptr<const MomentOperator> moment(const MapParameter& alpha,
                                                 std::size_t grid_size);
    std::shared_ptr<const MomentOperator> moment(const MapParameter& alpha,
                                                 const std::shared_ptr<const Partition>& part);

    static OperatorCache& global();

private:
    struct Key {
        long long alpha_fixed;
        std::size_t grid;
        long long gamma_fixed;
        auto operator<=>(const Key&) const = default;
    };
    static Key key(const MapParameter& alpha, std::size_t grid_size, double gamma = 1.0);

    template <typename Op>
    struct Store {
        std::map<Key, std::shared_ptr<const Op>> map;
        std::vector<Key> order;
    };

    std::size_t capacity_;
    std::mutex mutex_;
    Store<UlamOperator> ulam_;
    Store<MomentOperator> moment_;
};

// L_a applied to a cell-average density; preserves mass and non-negativity.
GridDensity transfer_apply(const UlamOperator& op, const GridDensity& d);

// Fixed density of the Ulam operator by power iteration from the uniform
// density, stopping when the L1 change drops below tol. Throws (with the
// residual in the message) if max_iter is exhausted.
GridDensity invariant_density(const MapParameter& alpha, std::size_t grid_size,
                              double tol = 1e-12, std::size_t max_iter = 200000,
                              OperatorCache& cache = OperatorCache::global());

// Sequential pushforward of d under the maps of the prefix.
GridDensity push_density(std::span<const MapParameter> prefix, GridDensity d,
                         OperatorCache& cache = OperatorCache::global());

// Fixed field of the first-moment transport, mass-normalized. Correlation
// sums need the invariant density at sub-cell accuracy; the cell-average
// fixed point moves by ~1e-3 under grid refinement at alpha ~ 0.25, this one
// by far less.
P1Field p1_invariant_density(const MapParameter& alpha,
                             const std::shared_ptr<const Partition>& part, double tol = 1e-13,
                             std::size_t max_iter = 500000,
                             OperatorCache& cache = OperatorCache::global());

// Exact fiberwise means mu(f o T~_i), i = 0..N-1, where mu has density mu_d.
// Evolved with the first-moment transport: the centering feeds ensembles at
// sqrt(N) amplification, so cell-resolution bias is not acceptable there.
std::vector<std::vector<double>> mean_along(std::span<const MapParameter> schedule,
                                            const Observable& f, std::size_t N,
                                            const GridDensity& mu_d,
                                            OperatorCache& cache = OperatorCache::global());

// cov(f o T~_i, g o T~_{i+k}) under the initial measure with density mu_d:
// the signed measure (f - mean) d_i is pushed k steps and paired against g.
double lag_correlation(std::span<const MapParameter> schedule,
                       const std::function<double(double)>& f,
                       const std::function<double(double)>& g, std::size_t i, std::size_t k,
                       const GridDensity& mu_d,
                       OperatorCache& cache = OperatorCache::global());

}  // namespace nspm
