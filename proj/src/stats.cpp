#include "nonstat_pm/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "nonstat_pm/ensemble.hpp"
#include "nonstat_pm/numerics.hpp"
#include "nonstat_pm/transport.hpp"

namespace nspm {

// ---------------------------------------------------------------- quantile

double normal_quantile(double p) {
    // Wichura's algorithm AS241 (PPND16)
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("normal_quantile: p outside [0,1]");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                    3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                  4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                  2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                  5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
                ((((((1.42151175831644588870e-15 * r + 1.84631831751005468180e-6) * r +
                     7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r +
                   1.36929880922735805310e-1) * r + 5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -value : value;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// -------------------------------------------------------------- wasserstein

double wasserstein1_to_normal(std::span<const double> samples, double sigma) {
    if (samples.size() < 2) throw std::invalid_argument("wasserstein1_to_normal: need M >= 2");
    if (!(sigma >= 0.0)) throw std::invalid_argument("wasserstein1_to_normal: sigma < 0");
    std::vector<double> xs(samples.begin(), samples.end());
    for (double x : xs)
        if (!std::isfinite(x))
            throw std::invalid_argument("wasserstein1_to_normal: non-finite sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t M = xs.size();
    if (sigma == 0.0) {
        KahanSum s;
        for (double x : xs) s.add(std::abs(x));
        return s.value() / static_cast<double>(M);
    }
    const auto& gl = gauss_legendre(16);
    KahanSum total;
    for (std::size_t i = 0; i < M; ++i) {
        double acc = 0.0;
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            double u = (static_cast<double>(i) + gl.nodes[q]) / static_cast<double>(M);
            acc += gl.weights[q] * std::abs(xs[i] - sigma * normal_quantile(u));
        }
        total.add(acc);
    }
    return total.value() / static_cast<double>(M);
}

// ------------------------------------------------------------ test battery

double TestFunction::operator()(std::span<const double> x) const {
    if (kind == Kind::cosine_linear) {
        double s = 0.0;
        for (std::size_t a = 0; a < wave.size(); ++a) s += wave[a] * x[a];
        return std::cos(s);
    }
    return evaluate(x);
}

TestFunction TestFunction::cosine(std::vector<double> wave) {
    TestFunction h;
    h.kind = Kind::cosine_linear;
    double amax = 0.0;
    for (double a : wave) amax = std::max(amax, std::abs(a));
    h.name = "cos_linear";
    h.wave = std::move(wave);
    h.d1 = amax;
    h.d2 = amax * amax;
    h.d3 = amax * amax * amax;
    return h;
}

TestFunction TestFunction::cubic_saturating(std::vector<double> v) {
    TestFunction h;
    h.kind = Kind::generic;
    h.name = "cubic_saturating";
    double vmax = 0.0;
    for (double c : v) vmax = std::max(vmax, std::abs(c));
    auto vec = std::make_shared<std::vector<double>>(std::move(v));
    h.evaluate = [vec](std::span<const double> x) {
        double u = 0.0;
        for (std::size_t a = 0; a < vec->size(); ++a) u += (*vec)[a] * x[a];
        double u3 = u * u * u;
        return u3 / (1.0 + std::abs(u3));
    };
    // conservative bounds for s(u) = u^3/(1+|u|^3) composed with v.x
    h.d1 = 2.0 * vmax;
    h.d2 = 6.0 * vmax * vmax;
    h.d3 = 24.0 * vmax * vmax * vmax;
    return h;
}

std::vector<TestFunction> default_battery(std::size_t dim) {
    // six fixed linear forms; tails beyond the observable dimension are unused
    static const double forms[6][4] = {
        {1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {1.0, 1.0, 0.0, 0.0},
        {1.0, -1.0, 0.0, 0.0}, {2.0, 0.0, 0.0, 0.0}, {0.5, 1.5, 0.0, 0.0},
    };
    if (dim > 4) throw std::invalid_argument("default_battery: dim > 4 unsupported");
    std::vector<TestFunction> battery;
    for (const auto& row : forms) {
        std::vector<double> wave(row, row + dim);
        if (dim == 1 && wave[0] == 0.0) wave[0] = 1.5;  // keep 1-d forms distinct
        battery.push_back(TestFunction::cosine(std::move(wave)));
    }
    battery.push_back(TestFunction::cubic_saturating(std::vector<double>(dim, 1.0)));
    return battery;
}

namespace {

// Roberts' R_d quasirandom sequence: u_i = frac(i * g), g from the generalized
// golden ratio x^{d+1} = x + 1.
std::vector<double> rd_generator(std::size_t dim) {
    double g = 1.5;
    for (int it = 0; it < 64; ++it)
        g = std::pow(1.0 + g, 1.0 / (static_cast<double>(dim) + 1.0));
    std::vector<double> out(dim);
    double p = 1.0;
    for (std::size_t a = 0; a < dim; ++a) {
        p /= g;
        out[a] = p;
    }
    return out;
}

}  // namespace

MonteCarloValue phi_sigma(const TestFunction& h, const CovarianceMatrix& sigma,
                          std::span<const double> mean) {
    const std::size_t d = sigma.dim();
    if (sigma.min_eigenvalue() < -1e-10)
        throw std::invalid_argument("phi_sigma: Sigma not PSD");
    if (h.kind == TestFunction::Kind::cosine_linear) {
        if (h.wave.size() != d) throw std::invalid_argument("phi_sigma: dimension mismatch");
        double quad = 0.0, shift = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) quad += h.wave[a] * sigma.at(a, b) * h.wave[b];
            if (!mean.empty()) shift += h.wave[a] * mean[a];
        }
        return {std::exp(-0.5 * quad) * std::cos(shift), 0.0};
    }

    const std::size_t n_points = 1u << 20;  // ~1e6
    CovarianceMatrix root = sigma.sqrt_psd();
    const auto gen = rd_generator(d);
    std::vector<double> z(d), x(d);
    constexpr std::size_t n_batches = 32;
    std::vector<double> batch_mean(n_batches, 0.0);
    const std::size_t per_batch = n_points / n_batches;
    for (std::size_t batch = 0; batch < n_batches; ++batch) {
        KahanSum acc;
        for (std::size_t i = 0; i < per_batch; ++i) {
            const double idx = static_cast<double>(batch * per_batch + i + 1);
            for (std::size_t a = 0; a < d; ++a) {
                double u = idx * gen[a] + 0.5;
                u -= std::floor(u);
                // keep away from the exact endpoints of (0,1)
                z[a] = normal_quantile(std::min(1.0 - 1e-13, std::max(1e-13, u)));
            }
            for (std::size_t a = 0; a < d; ++a) {
                double s = mean.empty() ? 0.0 : mean[a];
                for (std::size_t b = 0; b < d; ++b) s += root.at(a, b) * z[b];
                x[a] = s;
            }
            acc.add(h(x));
        }
        batch_mean[batch] = acc.value() / static_cast<double>(per_batch);
    }
    double value = 0.0;
    for (double b : batch_mean) value += b;
    value /= static_cast<double>(n_batches);
    double var = 0.0;
    for (double b : batch_mean) var += (b - value) * (b - value);
    var /= static_cast<double>(n_batches - 1);
    return {value, std::sqrt(var / static_cast<double>(n_batches))};
}

std::vector<double> smooth_test_distance(std::span<const double> samples, std::size_t dim,
                                         const CovarianceMatrix& sigma,
                                         std::span<const TestFunction> battery) {
    if (dim == 0 || samples.size() % dim != 0)
        throw std::invalid_argument("smooth_test_distance: bad sample shape");
    if (sigma.dim() != dim) throw std::invalid_argument("smooth_test_distance: dim mismatch");
    const std::size_t M = samples.size() / dim;
    std::vector<double> out;
    out.reserve(battery.size());
    for (const auto& h : battery) {
        KahanSum acc;
        for (std::size_t m = 0; m < M; ++m) acc.add(h(samples.subspan(m * dim, dim)));
        double emp = acc.value() / static_cast<double>(M);
        out.push_back(std::abs(emp - phi_sigma(h, sigma).value));
    }
    return out;
}

// -------------------------------------------------------------- green-kubo

namespace {

struct CenteredObservable {
    std::vector<P1Field> fc;       // mean-centered P1 projections
    std::vector<double> mean;
};

CenteredObservable center_against(const Observable& f, const P1Field& density) {
    CenteredObservable out;
    out.fc.reserve(f.dim);
    out.mean.resize(f.dim);
    for (std::size_t a = 0; a < f.dim; ++a) {
        P1Field p = P1Field::project(f.components[a], density.part);
        out.mean[a] = field_pair(p, density);
        for (double& m : p.mean) m -= out.mean[a];
        out.fc.push_back(std::move(p));
    }
    return out;
}

}  // namespace

CovarianceMatrix green_kubo(const MapParameter& alpha, const Observable& f,
                            std::size_t grid_size, std::size_t K_max, double tail_tol,
                            OperatorCache& cache) {
    // The Green-Kubo tail is set by orbits that linger near the neutral point
    // for hundreds of steps; a mesh graded toward 0 resolves those sojourn
    // times where a uniform one cuts them off at its first cell.
    auto part = alpha.alpha() == 0.0 ? Partition::uniform(grid_size)
                                     : Partition::graded(grid_size, 3.0);
    P1Field hp = p1_invariant_density(alpha, part, 1e-13, 500000, cache);
    auto obs = center_against(f, hp);
    const std::size_t d = f.dim;

    CovarianceMatrix sigma(d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            double v = field_triple(obs.fc[a], obs.fc[b], hp);
            sigma.at(a, b) = v;
            sigma.at(b, a) = v;
        }

    std::vector<P1Field> q;
    q.reserve(d);
    for (std::size_t a = 0; a < d; ++a) q.push_back(field_multiply(obs.fc[a], hp));

    auto op = cache.moment(alpha, part);
    P1Field scratch = P1Field::zero(part);
    for (std::size_t k = 1; k <= K_max; ++k) {
        for (std::size_t a = 0; a < d; ++a) {
            op->apply(q[a], scratch);
            std::swap(q[a], scratch);
        }
        double largest = 0.0;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) {
                double term = field_pair(obs.fc[b], q[a]) + field_pair(obs.fc[a], q[b]);
                sigma.at(a, b) += term;
                sigma.at(b, a) = sigma.at(a, b);
                largest = std::max(largest, std::abs(term));
            }
        if (largest < tail_tol) break;
    }
    return sigma;
}

CovarianceMatrix sigma_t_integral(const QdsArray& array, const Observable& f, double t,
                                  std::size_t n_quad, std::size_t grid_size, std::size_t K_max,
                                  double tail_tol, OperatorCache& cache) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("sigma_t_integral: t outside [0,1]");
    CovarianceMatrix total(f.dim);
    if (t == 0.0 || n_quad == 0) return total;
    const double step = t / static_cast<double>(n_quad);
    for (std::size_t j = 0; j < n_quad; ++j) {
        double s = (static_cast<double>(j) + 0.5) * step;
        double a = std::clamp(array.tau(s), 0.0, array.beta_star);
        CovarianceMatrix node = green_kubo(MapParameter(a), f, grid_size, K_max, tail_tol, cache);
        node *= step;
        total += node;
    }
    return total;
}

// ---------------------------------------------------------- birkhoff sums

std::vector<CovarianceMatrix> covariance_of_S(std::span<const MapParameter> schedule,
                                              const Observable& f, const GridDensity& mu_d,
                                              std::span<const std::size_t> checkpoints,
                                              OperatorCache& cache) {
    if (checkpoints.empty()) throw std::invalid_argument("covariance_of_S: no checkpoints");
    for (std::size_t c = 1; c < checkpoints.size(); ++c)
        if (checkpoints[c] <= checkpoints[c - 1])
            throw std::invalid_argument("covariance_of_S: checkpoints must increase");
    const std::size_t N = checkpoints.back();
    if (N > 1 && schedule.size() < N - 1)
        throw std::invalid_argument("covariance_of_S: schedule shorter than N-1");
    const std::size_t G = mu_d.grid_size;
    const std::size_t d = f.dim;

    P1Field density = P1Field::embed(mu_d);
    std::vector<P1Field> fp;
    fp.reserve(d);
    for (std::size_t a = 0; a < d; ++a)
        fp.push_back(P1Field::project(f.components[a], density.part));

    std::vector<P1Field> r(d, P1Field::zero(density.part));
    P1Field scratch = P1Field::zero(density.part);
    std::vector<P1Field> fc = fp;  // reused per step
    CovarianceMatrix acc(d);
    std::vector<CovarianceMatrix> out;
    out.reserve(checkpoints.size());
    std::size_t next_cp = 0;

    for (std::size_t i = 0; i < N; ++i) {
        if (i > 0) {
            auto op = cache.moment(schedule[i - 1], G);
            op->apply(density, scratch);
            std::swap(density, scratch);
            for (std::size_t a = 0; a < d; ++a) {
                op->apply(r[a], scratch);
                std::swap(r[a], scratch);
            }
        }
        for (std::size_t a = 0; a < d; ++a) {
            double m = field_pair(fp[a], density);
            fc[a] = fp[a];
            for (double& v : fc[a].mean) v -= m;
        }
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) {
                double v = field_triple(fc[a], fc[b], density) + field_pair(fc[a], r[b]) +
                           field_pair(fc[b], r[a]);
                acc.at(a, b) += v;
                acc.at(b, a) = acc.at(a, b);
            }
        for (std::size_t a = 0; a < d; ++a) field_axpy(r[a], 1.0, field_multiply(fc[a], density));
        if (i + 1 == checkpoints[next_cp]) {
            out.push_back(acc);
            ++next_cp;
        }
    }
    return out;
}

double rds_sigma_sq(const RandomProcess& process, const Observable& f, const GridDensity& mu_d,
                    std::size_t K_max, std::size_t i_burn, std::size_t n_omega,
                    std::size_t threads) {
    if (n_omega < 2) throw std::invalid_argument("rds_sigma_sq: need n_omega >= 2");
    if (f.dim != 1) throw std::invalid_argument("rds_sigma_sq: univariate observable expected");
    if (threads == 0) threads = default_thread_count();
    const std::size_t G = mu_d.grid_size;

    std::vector<std::vector<double>> per_omega(n_omega);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        OperatorCache local_cache;  // omega draws rarely share parameters
        for (;;) {
            std::size_t w = next.fetch_add(1);
            if (w >= n_omega) return;
            auto sched = sample_omega(process, i_burn + K_max, w).materialize(i_burn + K_max);
            P1Field density = P1Field::embed(mu_d);
            P1Field pf = P1Field::project(f.components[0], density.part);
            P1Field scratch = P1Field::zero(density.part);
            for (std::size_t s = 0; s < i_burn; ++s) {
                local_cache.moment(sched[s], G)->apply(density, scratch);
                std::swap(density, scratch);
            }
            std::vector<double> corr(K_max + 1, 0.0);
            double m0 = field_pair(pf, density);
            P1Field fc = pf;
            for (double& v : fc.mean) v -= m0;
            corr[0] = field_triple(fc, fc, density);
            P1Field q = field_multiply(fc, density);
            for (std::size_t k = 1; k <= K_max; ++k) {
                auto op = local_cache.moment(sched[i_burn + k - 1], G);
                op->apply(q, scratch);
                std::swap(q, scratch);
                op->apply(density, scratch);
                std::swap(density, scratch);
                double mk = field_pair(pf, density);
                P1Field gk = pf;
                for (double& v : gk.mean) v -= mk;
                corr[k] = field_pair(gk, q);
            }
            per_omega[w] = std::move(corr);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n_omega); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    KahanSum sigma2;
    for (std::size_t k = 0; k <= K_max; ++k) {
        KahanSum avg;
        for (std::size_t w = 0; w < n_omega; ++w) avg.add(per_omega[w][k]);
        double mean_k = avg.value() / static_cast<double>(n_omega);
        sigma2.add((k == 0 ? 1.0 : 2.0) * mean_k);
    }
    return sigma2.value();
}

}  // namespace nspm
