#include "nonstat_pm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nonstat_pm/numerics.hpp"

namespace nspm {

Partition::Partition(std::size_t cells, double gamma) : cells_(cells), gamma_(gamma) {
    if (cells < 2) throw std::invalid_argument("Partition: need at least 2 cells");
    if (!(gamma >= 1.0)) throw std::invalid_argument("Partition: gamma must be >= 1");
    edges_.resize(cells + 1);
    const double n = static_cast<double>(cells);
    for (std::size_t j = 0; j <= cells; ++j) {
        double t = static_cast<double>(j) / n;
        edges_[j] = gamma == 1.0 ? t : std::pow(t, gamma);
    }
    edges_[0] = 0.0;
    edges_[cells] = 1.0;
}

std::shared_ptr<const Partition> Partition::uniform(std::size_t cells) {
    return std::shared_ptr<const Partition>(new Partition(cells, 1.0));
}

std::shared_ptr<const Partition> Partition::graded(std::size_t cells, double gamma) {
    return std::shared_ptr<const Partition>(new Partition(cells, gamma));
}

std::size_t Partition::locate(double y) const noexcept {
    const double n = static_cast<double>(cells_);
    double guess = gamma_ == 1.0 ? y * n : std::pow(y, 1.0 / gamma_) * n;
    auto j = static_cast<std::ptrdiff_t>(guess);
    j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(cells_) - 1);
    // fix up rounding of the analytic inverse against the stored edges
    while (j > 0 && y < edges_[j]) --j;
    while (j + 1 < static_cast<std::ptrdiff_t>(cells_) && y >= edges_[j + 1]) ++j;
    return static_cast<std::size_t>(j);
}

P1Field P1Field::zero(std::shared_ptr<const Partition> part) {
    P1Field f;
    f.mean.assign(part->size(), 0.0);
    f.slope.assign(part->size(), 0.0);
    f.part = std::move(part);
    return f;
}

P1Field P1Field::embed(const GridDensity& d) {
    P1Field f = zero(Partition::uniform(d.grid_size));
    f.mean = d.cells;
    return f;
}

P1Field P1Field::project(const std::function<double(double)>& fn,
                         std::shared_ptr<const Partition> part) {
    P1Field f = zero(std::move(part));
    const auto& gl = gauss_legendre(8);
    for (std::size_t i = 0; i < f.cells(); ++i) {
        const double x0 = f.part->edge(i);
        const double w = f.part->width(i);
        const double m = f.part->midpoint(i);
        double avg = 0.0, mom = 0.0;
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            double x = x0 + gl.nodes[q] * w;
            double v = fn(x);
            avg += gl.weights[q] * v;
            mom += gl.weights[q] * v * (x - m);
        }
        f.mean[i] = avg;                    // (1/w) * integral
        f.slope[i] = 12.0 * mom / (w * w);  // (12/w^3) * w * mom
    }
    return f;
}

namespace {

void require_compatible(const P1Field& a, const P1Field& b, const char* what) {
    if (!a.part || !b.part || !a.part->compatible(*b.part))
        throw std::invalid_argument(std::string(what) + ": partition mismatch");
}

}  // namespace

double field_mass(const P1Field& rho) {
    KahanSum s;
    for (std::size_t i = 0; i < rho.cells(); ++i) s.add(rho.part->width(i) * rho.mean[i]);
    return s.value();
}

double field_pair(const P1Field& f, const P1Field& rho) {
    require_compatible(f, rho, "field_pair");
    KahanSum s;
    for (std::size_t i = 0; i < f.cells(); ++i) {
        const double w = f.part->width(i);
        s.add(w * (f.mean[i] * rho.mean[i] + w * w / 12.0 * f.slope[i] * rho.slope[i]));
    }
    return s.value();
}

double field_triple(const P1Field& f, const P1Field& g, const P1Field& rho) {
    require_compatible(f, rho, "field_triple");
    require_compatible(g, rho, "field_triple");
    KahanSum s;
    for (std::size_t i = 0; i < f.cells(); ++i) {
        const double w = f.part->width(i);
        const double w2_12 = w * w / 12.0;
        double A = f.mean[i], B = f.slope[i];
        double C = g.mean[i], D = g.slope[i];
        double a = rho.mean[i], b = rho.slope[i];
        s.add(w * (A * C * a + w2_12 * ((A * D + B * C) * b + B * D * a)));
    }
    return s.value();
}

P1Field field_multiply(const P1Field& f, const P1Field& rho) {
    require_compatible(f, rho, "field_multiply");
    P1Field out = P1Field::zero(rho.part);
    for (std::size_t i = 0; i < f.cells(); ++i) {
        const double w = f.part->width(i);
        out.mean[i] = f.mean[i] * rho.mean[i] + w * w / 12.0 * f.slope[i] * rho.slope[i];
        out.slope[i] = f.mean[i] * rho.slope[i] + f.slope[i] * rho.mean[i];
    }
    return out;
}

void field_axpy(P1Field& rho, double coeff, const P1Field& f) {
    require_compatible(f, rho, "field_axpy");
    for (std::size_t i = 0; i < rho.cells(); ++i) {
        rho.mean[i] += coeff * f.mean[i];
        rho.slope[i] += coeff * f.slope[i];
    }
}

namespace {

// int_p^q y^s dy without cancellation. p >= 0, q > p.
double power_integral(double p, double q, double s) {
    double s1 = s + 1.0;
    if (p == 0.0) return std::pow(q, s1) / s1;
    // p^{s+1} * expm1((s+1) log1p((q-p)/p)) is exact up to rounding even when
    // q - p is far below p.
    return std::pow(p, s1) * std::expm1(s1 * std::log1p((q - p) / p)) / s1;
}

// int_p^q (y - c) y^s dy with c = (p+q)/2.
double centered_power_integral(double p, double q, double s) {
    const double c = 0.5 * (p + q);
    const double delta = 0.5 * (q - p);
    if (p > 0.0 && delta <= 0.125 * c) {
        // odd part of (c+u)^s integrated against u; series in (u/c)
        double e = delta / c;
        double e2 = e * e;
        double b1 = s;
        double b3 = s * (s - 1.0) * (s - 2.0) / 6.0;
        double b5 = b3 * (s - 3.0) * (s - 4.0) / 20.0;
        double b7 = b5 * (s - 5.0) * (s - 6.0) / 42.0;
        double series = b1 / 3.0 + e2 * (b3 / 5.0 + e2 * (b5 / 7.0 + e2 * b7 / 9.0));
        return 2.0 * std::pow(c, s + 2.0) * e * e2 * series;
    }
    // wide segment (first cells): direct antiderivative, no harmful cancellation
    double s1 = s + 1.0, s2 = s + 2.0;
    auto F = [&](double y) {
        return y == 0.0 ? 0.0 : std::pow(y, s2) / s2 - c * std::pow(y, s1) / s1;
    };
    return F(q) - F(p);
}

}  // namespace

MomentOperator MomentOperator::build(const MapParameter& alpha,
                                     std::shared_ptr<const Partition> part) {
    MomentOperator op(alpha, std::move(part));
    const Partition& P = *op.part_;
    const std::size_t n = P.size();
    const double a = alpha.alpha();
    const double C = alpha.two_pow_alpha();
    const double s = 1.0 + a;

    // preimages of every edge under both branches
    std::vector<double> left(n + 1), right(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        left[i] = inverse_left(alpha, P.edge(i));
        right[i] = 0.5 * (P.edge(i) + 1.0);
    }

    op.row_offsets_.resize(n + 1, 0);
    op.terms_.reserve(4 * n);
    for (std::size_t i = 0; i < n; ++i) {
        op.row_offsets_[i] = op.terms_.size();
        const double mi = P.midpoint(i);
        const double wi = P.width(i);
        const double twelve_wi3 = 12.0 / (wi * wi * wi);
        for (int branch = 0; branch < 2; ++branch) {
            const bool is_left = branch == 0;
            const double bp = is_left ? left[i] : right[i];
            const double bq = is_left ? left[i + 1] : right[i + 1];
            if (!(bq > bp)) continue;
            for (std::size_t j = P.locate(bp);; ++j) {
                const double p = std::max(bp, P.edge(j));
                const double q = std::min(bq, P.edge(j + 1));
                if (q > p) {
                    const double mj = P.midpoint(j);
                    const double c = 0.5 * (p + q);
                    const double delta = 0.5 * (q - p);
                    const double len = q - p;
                    const double cmj = c - mj;

                    double J0, J1;
                    if (!is_left || a == 0.0) {
                        // affine branch: T(y) = 2y - 1 (right) or 2y (left, a = 0)
                        double t0 = is_left ? 2.0 * c - mi : 2.0 * c - 1.0 - mi;
                        J0 = len * t0;
                        J1 = cmj * len * t0 + 4.0 / 3.0 * delta * delta * delta;
                    } else {
                        // T(y) = y + C y^s
                        double P1 = power_integral(p, q, s);
                        double R = centered_power_integral(p, q, s);
                        double cmi = c - mi;
                        J0 = len * cmi + C * P1;
                        J1 = (2.0 / 3.0) * delta * delta * delta + len * cmj * cmi +
                             C * (R + cmj * P1);
                    }

                    Term t;
                    t.src = static_cast<std::uint32_t>(j);
                    t.a_m = len / wi;
                    t.a_s = len * cmj / wi;
                    t.b_m = twelve_wi3 * J0;
                    t.b_s = twelve_wi3 * J1;
                    op.terms_.push_back(t);
                }
                if (P.edge(j + 1) >= bq || j + 1 >= n) break;
            }
        }
    }
    op.row_offsets_[n] = op.terms_.size();
    return op;
}

void MomentOperator::apply(const P1Field& in, P1Field& out) const {
    if (!in.part || !in.part->compatible(*part_))
        throw std::invalid_argument("MomentOperator::apply: partition mismatch");
    if (!out.part || !out.part->compatible(*part_)) out = P1Field::zero(part_);
    const std::size_t n = part_->size();
    for (std::size_t i = 0; i < n; ++i) {
        double m = 0.0, sl = 0.0;
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            const Term& t = terms_[k];
            m += t.a_m * in.mean[t.src] + t.a_s * in.slope[t.src];
            sl += t.b_m * in.mean[t.src] + t.b_s * in.slope[t.src];
        }
        out.mean[i] = m;
        out.slope[i] = sl;
    }
}

P1Field MomentOperator::apply(const P1Field& in) const {
    P1Field out = P1Field::zero(part_);
    apply(in, out);
    return out;
}

}  // namespace nspm
