#include "bankrun/market_impact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bankrun {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_price(double p) {
    if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument("initial price must lie in (0,1]");
}

void require_elasticity(double b) {
    if (!(b >= 0.0) || !std::isfinite(b))
        throw std::invalid_argument("impact elasticity b must be finite and >= 0");
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::string to_string(ImpactKind kind) {
    switch (kind) {
        case ImpactKind::Linear: return "linear";
        case ImpactKind::Exponential: return "exponential";
        case ImpactKind::Tabulated: return "tabulated";
    }
    return "unknown";
}

InverseDemand InverseDemand::linear(double p, double b) {
    require_price(p);
    require_elasticity(b);
    return {ImpactKind::Linear, p, b, b > 0.0 ? 1.0 / b : kInf, {}};
}

InverseDemand InverseDemand::exponential(double p, double b) {
    require_price(p);
    require_elasticity(b);
    return {ImpactKind::Exponential, p, b, kInf, {}};
}

InverseDemand InverseDemand::tabulated(std::vector<PricePoint> curve) {
    if (curve.size() < 2)
        throw std::invalid_argument("tabulated curve needs at least two samples");
    if (curve.front().quantity != 0.0)
        throw std::invalid_argument("tabulated curve must start at quantity 0");
    require_price(curve.front().price);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (!(curve[i].quantity > curve[i - 1].quantity))
            throw std::invalid_argument("tabulated quantities must be strictly increasing");
        if (curve[i].price > curve[i - 1].price)
            throw std::invalid_argument("tabulated prices must be non-increasing");
        if (!(curve[i].price > 0.0))
            throw std::invalid_argument("tabulated prices must stay positive");
    }
    const double p = curve.front().price;
    const double q_max = curve.back().quantity;
    return {ImpactKind::Tabulated, p, 0.0, q_max, std::move(curve)};
}

InverseDemand InverseDemand::restricted_to(double q_max) const {
    if (!(q_max >= 0.0) || q_max > domain_max_)
        throw std::out_of_range("restriction exceeds the impact curve domain");
    InverseDemand out = *this;
    out.domain_max_ = q_max;
    return out;
}

void InverseDemand::check_domain(double q) const {
    const double slack = 1e-12 * std::max(1.0, std::isfinite(domain_max_) ? domain_max_ : 1.0);
    if (!(q >= 0.0) || q > domain_max_ + slack)
        throw std::out_of_range("quantity " + fmt_num(q) + " outside impact curve domain [0, " +
                                fmt_num(domain_max_) + "]");
}

double InverseDemand::price(double q) const {
    check_domain(q);
    switch (kind_) {
        case ImpactKind::Linear: return p_ * (1.0 - b_ * q);
        case ImpactKind::Exponential: return p_ * std::exp(-b_ * q);
        case ImpactKind::Tabulated: {
            if (q >= curve_.back().quantity) return curve_.back().price;
            auto hi = std::upper_bound(curve_.begin(), curve_.end(), q,
                                       [](double v, const PricePoint& pt) { return v < pt.quantity; });
            auto lo = std::prev(hi);
            const double t = (q - lo->quantity) / (hi->quantity - lo->quantity);
            return lo->price + t * (hi->price - lo->price);
        }
    }
    return p_;
}

double InverseDemand::slope(double q) const {
    check_domain(q);
    switch (kind_) {
        case ImpactKind::Linear: return -p_ * b_;
        case ImpactKind::Exponential: return -p_ * b_ * std::exp(-b_ * q);
        case ImpactKind::Tabulated: {
            auto hi = std::upper_bound(curve_.begin(), curve_.end(), q,
                                       [](double v, const PricePoint& pt) { return v < pt.quantity; });
            if (hi == curve_.end()) hi = std::prev(curve_.end());
            auto lo = std::prev(hi);
            return (hi->price - lo->price) / (hi->quantity - lo->quantity);
        }
    }
    return 0.0;
}

double InverseDemand::integral_tabulated(double q) const {
    double area = 0.0;
    for (std::size_t i = 1; i < curve_.size(); ++i) {
        const auto& a = curve_[i - 1];
        const auto& b = curve_[i];
        if (q <= a.quantity) break;
        const double right = std::min(q, b.quantity);
        const double f_right = right == b.quantity ? b.price : price(right);
        area += 0.5 * (a.price + f_right) * (right - a.quantity);
    }
    return area;
}

double InverseDemand::avg_price(double q) const {
    check_domain(q);
    if (q == 0.0) return p_;
    switch (kind_) {
        case ImpactKind::Linear: return p_ * (1.0 - 0.5 * b_ * q);
        case ImpactKind::Exponential: {
            const double bq = b_ * q;
            if (bq == 0.0) return p_;
            return p_ * (-std::expm1(-bq)) / bq;
        }
        case ImpactKind::Tabulated: return integral_tabulated(q) / q;
    }
    return p_;
}

double InverseDemand::proceeds(double q) const {
    check_domain(q);
    if (q == 0.0) return 0.0;
    if (kind_ == ImpactKind::Tabulated) return integral_tabulated(q);
    return q * avg_price(q);
}

std::optional<double> InverseDemand::invert_proceeds(double target, double q_max) const {
    if (!(target >= 0.0)) throw std::invalid_argument("proceeds target must be >= 0");
    check_domain(q_max);
    if (target == 0.0) return 0.0;
    const double cap = proceeds(q_max);
    if (target > cap) return std::nullopt;
    if (target == cap) return q_max;

    if (kind_ == ImpactKind::Linear) {
        // p q - (p b / 2) q^2 = target; the smaller root is the one on the increasing branch.
        for (double r : quadratic_roots(-0.5 * p_ * b_, p_, -target))
            if (r >= 0.0 && r <= q_max) return r;
    }
    return bisect_increasing([this](double q) { return proceeds(q); }, target, 0.0, q_max);
}

std::string InverseDemand::label() const {
    switch (kind_) {
        case ImpactKind::Linear: return "linear:p=" + fmt_num(p_) + ",b=" + fmt_num(b_);
        case ImpactKind::Exponential: return "exponential:p=" + fmt_num(p_) + ",b=" + fmt_num(b_);
        case ImpactKind::Tabulated:
            return "tabulated:p=" + fmt_num(p_) + ",n=" + std::to_string(curve_.size());
    }
    return "unknown";
}

Admissibility check_admissible(const InverseDemand& idf, double total_marketable,
                               double lambda_max) {
    if (!(lambda_max > 1.0)) throw std::invalid_argument("lambda_max must exceed 1");
    if (!(total_marketable >= 0.0))
        throw std::invalid_argument("total marketable quantity must be >= 0");
    const double s_bar = total_marketable;
    if (s_bar == 0.0) return {};

    auto violated = [](std::string what) { return Admissibility{false, std::move(what)}; };

    switch (idf.kind()) {
        case ImpactKind::Linear:
        case ImpactKind::Exponential: {
            const double b = idf.elasticity();
            if (b == 0.0) return {};
            const bool linear = idf.kind() == ImpactKind::Linear;
            const double bound = (linear && lambda_max < 2.0)
                                     ? 1.0 / s_bar
                                     : 1.0 / ((lambda_max - 1.0) * s_bar);
            if (b < bound) return {};
            return violated("b=" + fmt_num(b) + " >= " + fmt_num(bound) +
                            " for lambda_max=" + fmt_num(lambda_max) + " and s+h=" +
                            fmt_num(s_bar));
        }
        case ImpactKind::Tabulated: {
            if (idf.domain_max() < s_bar)
                return violated("tabulated curve does not cover s+h=" + fmt_num(s_bar));
            constexpr int kGrid = 2000;
            for (int i = 0; i <= kGrid; ++i) {
                const double q = s_bar * i / kGrid;
                const double lhs = idf.price(q);
                const double rhs = (1.0 - lambda_max) * (s_bar - q) * idf.slope(std::min(q, s_bar));
                if (!(lhs > rhs))
                    return violated("differential inequality fails at quantity " + fmt_num(q));
            }
            return {};
        }
    }
    return {};
}

std::vector<double> quadratic_roots(double a, double b, double c) {
    std::vector<double> roots;
    if (a == 0.0) {
        if (b != 0.0) roots.push_back(-c / b);
        return roots;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return roots;
    const double sq = std::sqrt(disc);
    // q has the sign of b so that b + sign(b) sq never cancels.
    const double q = -0.5 * (b + std::copysign(sq, b));
    if (q == 0.0) {
        roots.push_back(0.0);
        return roots;
    }
    roots.push_back(q / a);
    roots.push_back(c / q);
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace bankrun
