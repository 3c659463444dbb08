#include "nonstat_pm/transfer.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "nonstat_pm/numerics.hpp"

namespace nspm {

OperatorCache::Key OperatorCache::key(const MapParameter& alpha, std::size_t grid_size,
                                      double gamma) {
    return Key{static_cast<long long>(std::llround(alpha.alpha() * 1e12)), grid_size,
               static_cast<long long>(std::llround(gamma * 1e6))};
}

namespace {

template <typename Store, typename Key, typename Build>
auto cached(Store& store, std::size_t capacity, const Key& k, Build&& build) {
    auto it = store.map.find(k);
    if (it != store.map.end()) return it->second;
    auto op = build();
    if (store.order.size() >= capacity) {
        store.map.erase(store.order.front());
        store.order.erase(store.order.begin());
    }
    store.map.emplace(k, op);
    store.order.push_back(k);
    return op;
}

}  // namespace

std::shared_ptr<const UlamOperator> OperatorCache::ulam(const MapParameter& alpha,
                                                        std::size_t grid_size) {
    Key k = key(alpha, grid_size);
    std::lock_guard lock(mutex_);
    return cached(ulam_, capacity_, k, [&] {
        return std::make_shared<const UlamOperator>(UlamOperator::build(alpha, grid_size));
    });
}

std::shared_ptr<const MomentOperator> OperatorCache::moment(const MapParameter& alpha,
                                                            std::size_t grid_size) {
    Key k = key(alpha, grid_size);
    std::lock_guard lock(mutex_);
    return cached(moment_, capacity_, k, [&] {
        return std::make_shared<const MomentOperator>(
            MomentOperator::build(alpha, Partition::uniform(grid_size)));
    });
}

std::shared_ptr<const MomentOperator> OperatorCache::moment(
    const MapParameter& alpha, const std::shared_ptr<const Partition>& part) {
    Key k = key(alpha, part->size(), part->gamma());
    std::lock_guard lock(mutex_);
    return cached(moment_, capacity_, k, [&] {
        return std::make_shared<const MomentOperator>(MomentOperator::build(alpha, part));
    });
}

OperatorCache& OperatorCache::global() {
    static OperatorCache cache;
    return cache;
}

GridDensity transfer_apply(const UlamOperator& op, const GridDensity& d) {
    return op.apply(d);
}

GridDensity invariant_density(const MapParameter& alpha, std::size_t grid_size, double tol,
                              std::size_t max_iter, OperatorCache& cache) {
    if (!(tol > 0.0)) throw std::invalid_argument("invariant_density: tol must be positive");
    auto op = cache.ulam(alpha, grid_size);
    GridDensity d = GridDensity::uniform(grid_size);
    double change = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        GridDensity next = op->apply(d);
        KahanSum diff;
        for (std::size_t i = 0; i < grid_size; ++i) diff.add(std::abs(next.cells[i] - d.cells[i]));
        change = diff.value() / static_cast<double>(grid_size);
        d = std::move(next);
        if (change < tol) return d;
    }
    throw std::runtime_error("invariant_density: no convergence after " +
                             std::to_string(max_iter) + " iterations (residual " +
                             std::to_string(change) + ")");
}

GridDensity push_density(std::span<const MapParameter> prefix, GridDensity d,
                         OperatorCache& cache) {
    for (const auto& alpha : prefix) d = cache.ulam(alpha, d.grid_size)->apply(d);
    return d;
}

P1Field p1_invariant_density(const MapParameter& alpha,
                             const std::shared_ptr<const Partition>& part, double tol,
                             std::size_t max_iter, OperatorCache& cache) {
    if (!(tol > 0.0)) throw std::invalid_argument("p1_invariant_density: tol must be positive");
    auto op = cache.moment(alpha, part);
    const std::size_t n = part->size();
    P1Field d = P1Field::zero(part);
    for (std::size_t i = 0; i < n; ++i) d.mean[i] = 1.0;
    P1Field next = P1Field::zero(part);
    double change = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        op->apply(d, next);
        KahanSum diff;
        for (std::size_t i = 0; i < n; ++i)
            diff.add(part->width(i) * std::abs(next.mean[i] - d.mean[i]));
        change = diff.value();
        std::swap(d, next);
        if (change < tol) {
            double m = field_mass(d);
            for (std::size_t i = 0; i < n; ++i) {
                d.mean[i] /= m;
                d.slope[i] /= m;
            }
            return d;
        }
    }
    throw std::runtime_error("p1_invariant_density: no convergence after " +
                             std::to_string(max_iter) + " iterations (residual " +
                             std::to_string(change) + ")");
}

std::vector<std::vector<double>> mean_along(std::span<const MapParameter> schedule,
                                            const Observable& f, std::size_t N,
                                            const GridDensity& mu_d, OperatorCache& cache) {
    if (N < 1) throw std::invalid_argument("mean_along: N must be >= 1");
    if (N > 1 && schedule.size() < N - 1)
        throw std::invalid_argument("mean_along: schedule shorter than N-1");
    const std::size_t G = mu_d.grid_size;
    P1Field d = P1Field::embed(mu_d);
    std::vector<P1Field> fp;
    fp.reserve(f.dim);
    for (std::size_t a = 0; a < f.dim; ++a)
        fp.push_back(P1Field::project(f.components[a], d.part));

    std::vector<std::vector<double>> means(N, std::vector<double>(f.dim, 0.0));
    P1Field scratch = P1Field::zero(d.part);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t a = 0; a < f.dim; ++a) means[i][a] = field_pair(fp[a], d);
        if (i + 1 < N) {
            cache.moment(schedule[i], G)->apply(d, scratch);
            std::swap(d, scratch);
        }
    }
    return means;
}

double lag_correlation(std::span<const MapParameter> schedule,
                       const std::function<double(double)>& f,
                       const std::function<double(double)>& g, std::size_t i, std::size_t k,
                       const GridDensity& mu_d, OperatorCache& cache) {
    if (schedule.size() < i + k)
        throw std::invalid_argument("lag_correlation: schedule shorter than i+k");
    const std::size_t G = mu_d.grid_size;
    P1Field d = P1Field::embed(mu_d);
    P1Field pf = P1Field::project(f, d.part);
    P1Field pg = P1Field::project(g, d.part);
    P1Field scratch = P1Field::zero(d.part);
    for (std::size_t s = 0; s < i; ++s) {
        cache.moment(schedule[s], G)->apply(d, scratch);
        std::swap(d, scratch);
    }
    double mean_f = field_pair(pf, d);
    P1Field fc = pf;
    for (double& m : fc.mean) m -= mean_f;
    P1Field q = field_multiply(fc, d);
    for (std::size_t s = i; s < i + k; ++s) {
        const auto& op = *cache.moment(schedule[s], G);
        op.apply(q, scratch);
        std::swap(q, scratch);
        op.apply(d, scratch);
        std::swap(d, scratch);
    }
    double mean_g = field_pair(pg, d);
    P1Field gc = pg;
    for (double& m : gc.mean) m -= mean_g;
    return field_pair(gc, q);
}

}  // namespace nspm
