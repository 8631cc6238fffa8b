#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bankrun {

/// Absolute tolerance (in units of securities) used by every bisection in the library.
inline constexpr double kBisectionTolerance = 1e-10;

enum class ImpactKind { Linear, Exponential, Tabulated };

std::string to_string(ImpactKind kind);

/// One sample of a tabulated inverse demand curve.
struct PricePoint {
    double quantity = 0.0;
    double price = 0.0;
};

/// Inverse demand function f: quantity sold -> unit price of marketable securities.
///
/// All variants satisfy f(0) = p, f non-increasing and f > 0 on [0, domain_max()].
/// Linear:      f(q) = p (1 - b q), domain capped strictly below 1/b.
/// Exponential: f(q) = p exp(-b q), unbounded domain unless capped.
/// Tabulated:   piecewise-linear interpolation of a non-increasing sampled curve
///              starting at quantity 0; the domain is the last sample.
class InverseDemand {
public:
    static InverseDemand linear(double p, double b);
    static InverseDemand exponential(double p, double b);
    static InverseDemand tabulated(std::vector<PricePoint> curve);
    static InverseDemand frictionless(double p) { return linear(p, 0.0); }

    /// Same curve restricted to [0, q_max]. Throws if q_max lies outside the current domain.
    [[nodiscard]] InverseDemand restricted_to(double q_max) const;

    [[nodiscard]] ImpactKind kind() const noexcept { return kind_; }
    [[nodiscard]] double initial_price() const noexcept { return p_; }
    [[nodiscard]] double elasticity() const noexcept { return b_; }
    [[nodiscard]] double domain_max() const noexcept { return domain_max_; }
    [[nodiscard]] const std::vector<PricePoint>& curve() const noexcept { return curve_; }

    /// f(q)
    [[nodiscard]] double price(double q) const;
    /// f'(q); one-sided (right) derivative at tabulated knots.
    [[nodiscard]] double slope(double q) const;
    /// Volume-weighted average price (1/q) * integral_0^q f, equal to p at q = 0.
    [[nodiscard]] double avg_price(double q) const;
    /// q * avg_price(q), the cash raised by selling q units.
    [[nodiscard]] double proceeds(double q) const;

    /// Unique q in [0, q_max] with proceeds(q) == target, or nullopt when target exceeds
    /// proceeds(q_max). Throws std::invalid_argument for a negative target.
    [[nodiscard]] std::optional<double> invert_proceeds(double target, double q_max) const;

    /// Short human-readable descriptor, e.g. "linear:p=1,b=0.0005".
    [[nodiscard]] std::string label() const;

private:
    InverseDemand(ImpactKind kind, double p, double b, double domain_max,
                  std::vector<PricePoint> curve)
        : kind_(kind), p_(p), b_(b), domain_max_(domain_max), curve_(std::move(curve)) {}

    void check_domain(double q) const;
    [[nodiscard]] double integral_tabulated(double q) const;

    ImpactKind kind_;
    double p_;
    double b_;
    double domain_max_;
    std::vector<PricePoint> curve_;
};

struct Admissibility {
    bool admissible = true;
    std::string detail;  // empty when admissible
    explicit operator bool() const noexcept { return admissible; }
};

/// Checks that q -> q avg(q) + (1 - 1/lambda_max)(total - q) f(q) is strictly increasing on
/// [0, total], which the clearing algorithm relies on. Advisory: never throws for an
/// inadmissible curve, only for lambda_max <= 1.
Admissibility check_admissible(const InverseDemand& idf, double total_marketable,
                               double lambda_max);

/// Real roots of a*x^2 + b*x + c = 0 computed without catastrophic cancellation,
/// degrading to the linear case when a == 0. Roots are sorted ascending.
std::vector<double> quadratic_roots(double a, double b, double c);

/// Bisection for a non-decreasing function g on [lo, hi]: returns x with g(x) ~ target,
/// terminating once the bracket is narrower than tol. Assumes g(lo) <= target <= g(hi).
template <class F>
double bisect_increasing(F&& g, double target, double lo, double hi,
                         double tol = kBisectionTolerance) {
    for (int iter = 0; iter < 400 && hi - lo > tol; ++iter) {
        const double mid = lo + 0.5 * (hi - lo);
        if (g(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return lo + 0.5 * (hi - lo);
}

}  // namespace bankrun
