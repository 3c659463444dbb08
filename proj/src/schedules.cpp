#include "nonstat_pm/schedules.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nonstat_pm/rng.hpp"

namespace {
// distinct stream namespaces so different consumers of one seed never share draws
constexpr std::uint64_t kOmegaStreamTag = 0x02ULL << 56;
constexpr std::uint64_t kQdsStreamTag = 0x03ULL << 56;
}  // namespace

namespace nspm {

FixedSchedule::FixedSchedule(std::function<double(std::size_t)> rule, double beta_star)
    : rule_(std::move(rule)), beta_star_(beta_star) {
    if (!(beta_star >= 0.0 && beta_star < 1.0))
        throw std::domain_error("FixedSchedule: beta_star outside [0,1)");
}

FixedSchedule FixedSchedule::constant(double alpha, double beta_star) {
    FixedSchedule s([alpha](std::size_t) { return alpha; }, beta_star);
    s.alpha_at(0);  // validate now
    return s;
}

FixedSchedule FixedSchedule::alternating(double a, double b, double beta_star) {
    FixedSchedule s([a, b](std::size_t i) { return i % 2 == 0 ? a : b; }, beta_star);
    s.alpha_at(0);
    s.alpha_at(1);
    return s;
}

FixedSchedule FixedSchedule::from_list(std::vector<double> values, double beta_star,
                                       bool cyclic) {
    if (values.empty()) throw std::invalid_argument("FixedSchedule::from_list: empty list");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!(values[i] >= 0.0 && values[i] <= beta_star))
            throw std::domain_error("FixedSchedule: value " + std::to_string(values[i]) +
                                    " inadmissible at index " + std::to_string(i));
    auto vs = std::make_shared<std::vector<double>>(std::move(values));
    if (cyclic)
        return FixedSchedule([vs](std::size_t i) { return (*vs)[i % vs->size()]; }, beta_star);
    return FixedSchedule(
        [vs](std::size_t i) {
            if (i >= vs->size())
                throw std::out_of_range("FixedSchedule: index past end of non-cyclic list");
            return (*vs)[i];
        },
        beta_star);
}

FixedSchedule FixedSchedule::from_rule(std::function<double(std::size_t)> rule,
                                       double beta_star) {
    return FixedSchedule(std::move(rule), beta_star);
}

double FixedSchedule::alpha_at(std::size_t i) const {
    double a = rule_(i);
    if (!(a >= 0.0 && a <= beta_star_))
        throw std::domain_error("FixedSchedule: value " + std::to_string(a) +
                                " inadmissible at index " + std::to_string(i));
    return a;
}

std::vector<MapParameter> FixedSchedule::materialize(std::size_t n) const {
    std::vector<MapParameter> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(alpha_at(i));
    return out;
}

std::vector<double> FixedSchedule::values(std::size_t n) const {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = alpha_at(i);
    return out;
}

RandomProcess RandomProcess::iid(double lo, double hi, double beta_star, std::uint64_t seed) {
    if (!(0.0 <= lo && lo <= hi && hi <= beta_star))
        throw std::domain_error("RandomProcess::iid: support outside [0,beta_star]");
    RandomProcess p;
    p.kind = Kind::iid_uniform;
    p.beta_star = beta_star;
    p.seed = seed;
    p.lo = lo;
    p.hi = hi;
    return p;
}

RandomProcess RandomProcess::markov(std::vector<double> states,
                                    std::vector<std::vector<double>> transition,
                                    double beta_star, std::uint64_t seed) {
    const std::size_t m = states.size();
    if (m == 0 || transition.size() != m)
        throw std::invalid_argument("RandomProcess::markov: square transition required");
    for (double s : states)
        if (!(s >= 0.0 && s <= beta_star))
            throw std::domain_error("RandomProcess::markov: state outside [0,beta_star]");
    for (const auto& row : transition) {
        if (row.size() != m)
            throw std::invalid_argument("RandomProcess::markov: square transition required");
        double sum = 0.0;
        for (double v : row) {
            if (v < 0.0) throw std::domain_error("RandomProcess::markov: negative probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::domain_error("RandomProcess::markov: row not stochastic");
    }
    RandomProcess p;
    p.kind = Kind::finite_markov;
    p.beta_star = beta_star;
    p.seed = seed;
    p.states = std::move(states);
    p.transition = std::move(transition);
    return p;
}

std::vector<double> RandomProcess::stationary() const {
    if (kind != Kind::finite_markov)
        throw std::logic_error("RandomProcess::stationary: not a Markov process");
    const std::size_t m = states.size();
    std::vector<double> pi(m, 1.0 / static_cast<double>(m));
    std::vector<double> next(m);
    for (int it = 0; it < 20000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) next[j] += pi[i] * transition[i][j];
        double delta = 0.0;
        for (std::size_t j = 0; j < m; ++j) delta += std::abs(next[j] - pi[j]);
        pi.swap(next);
        if (delta < 1e-15) break;
    }
    return pi;
}

FixedSchedule sample_omega(const RandomProcess& process, std::size_t length,
                           std::uint64_t stream_id) {
    if (length < 1) throw std::invalid_argument("sample_omega: length must be >= 1");
    CounterRng rng(process.seed, kOmegaStreamTag | (stream_id & 0x00ffffffffffffffULL));
    std::vector<double> values(length);
    if (process.kind == RandomProcess::Kind::iid_uniform) {
        for (std::size_t i = 0; i < length; ++i)
            values[i] = rng.uniform(i, process.lo, process.hi);
    } else {
        const auto pi = process.stationary();
        const std::size_t m = pi.size();
        auto draw_from = [&](const std::vector<double>& dist, double u) {
            double acc = 0.0;
            for (std::size_t j = 0; j + 1 < m; ++j) {
                acc += dist[j];
                if (u < acc) return j;
            }
            return m - 1;
        };
        std::size_t state = draw_from(pi, rng.uniform(0));
        values[0] = process.states[state];
        for (std::size_t i = 1; i < length; ++i) {
            state = draw_from(process.transition[state], rng.uniform(i));
            values[i] = process.states[state];
        }
    }
    return FixedSchedule::from_list(std::move(values), process.beta_star, /*cyclic=*/false);
}

double MixingProfile::bound(std::size_t n) const {
    if (n == 0) return 1.0;
    switch (kind) {
        case Kind::independent: return 0.0;
        case Kind::geometric: return std::pow(lambda, static_cast<double>(n));
        case Kind::none: return 1.0;
    }
    return 1.0;
}

MixingProfile mixing_profile(const RandomProcess& process) {
    MixingProfile mp;
    if (process.kind == RandomProcess::Kind::iid_uniform) {
        mp.kind = MixingProfile::Kind::independent;
        mp.lambda = 0.0;
        return mp;
    }
    const std::size_t m = process.states.size();
    Eigen::MatrixXd P(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) P(i, j) = process.transition[i][j];
    Eigen::EigenSolver<Eigen::MatrixXd> es(P);
    // second-largest eigenvalue modulus: drop one eigenvalue closest to 1
    std::vector<double> mods(m);
    for (std::size_t i = 0; i < m; ++i) mods[i] = std::abs(es.eigenvalues()(i));
    std::size_t unit = 0;
    for (std::size_t i = 1; i < m; ++i)
        if (std::abs(es.eigenvalues()(i) - 1.0) < std::abs(es.eigenvalues()(unit) - 1.0))
            unit = i;
    double slem = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        if (i != unit) slem = std::max(slem, mods[i]);
    mp.lambda = slem;
    mp.kind = slem >= 1.0 - 1e-12 ? MixingProfile::Kind::none : MixingProfile::Kind::geometric;
    return mp;
}

QdsArray QdsArray::constant_curve(double alpha, double beta_star) {
    QdsArray a;
    a.tau = [alpha](double) { return alpha; };
    a.beta_star = beta_star;
    return a;
}

QdsArray QdsArray::linear_curve(double c0, double c1, double beta_star) {
    QdsArray a;
    a.tau = [c0, c1](double t) { return c0 + c1 * t; };
    a.beta_star = beta_star;
    return a;
}

FixedSchedule qds_row(const QdsArray& array, std::size_t n) {
    if (n < 1) throw std::invalid_argument("qds_row: n must be >= 1");
    CounterRng rng(array.seed, kQdsStreamTag | n);
    const double amplitude = array.c_pert * std::pow(static_cast<double>(n), -array.eta);
    std::vector<double> values(n);
    for (std::size_t k = 1; k <= n; ++k) {
        double t = static_cast<double>(k) / static_cast<double>(n);
        double a = array.tau(t);
        if (amplitude != 0.0) a += amplitude * rng.symmetric(k);
        values[k - 1] = std::clamp(a, 0.0, array.beta_star);
    }
    return FixedSchedule::from_list(std::move(values), array.beta_star, /*cyclic=*/false);
}

void save_schedule(std::ostream& os, const std::vector<double>& alphas, const std::string& kind,
                   double beta_star, std::uint64_t seed) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", beta_star);
    os << "#schedule kind=" << kind << " beta_star=" << buf << " seed=" << seed << "\n";
    for (double a : alphas) {
        std::snprintf(buf, sizeof buf, "%.17g", a);
        os << buf << "\n";
    }
}

LoadedSchedule load_schedule(std::istream& is) {
    LoadedSchedule out;
    std::string line;
    if (!std::getline(is, line) || line.rfind("#schedule ", 0) != 0)
        throw std::runtime_error("load_schedule: missing '#schedule' header");
    std::istringstream header(line.substr(10));
    std::string tok;
    while (header >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "kind")
            out.kind = val;
        else if (key == "beta_star")
            out.beta_star = std::stod(val);
        else if (key == "seed")
            out.seed = std::stoull(val);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.alphas.push_back(std::stod(line));
    }
    return out;
}

}  // namespace nspm
