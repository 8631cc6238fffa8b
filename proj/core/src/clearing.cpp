#include "bankrun/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace bankrun {

std::string to_string(Liquidity l) { return l == Liquidity::Liquid ? "Liquid" : "Illiquid"; }
std::string to_string(Solvency s) { return s == Solvency::Solvent ? "Solvent" : "Insolvent"; }

namespace {

void check_lambda(double lambda_max) {
    if (!(lambda_max > 1.0) || !std::isfinite(lambda_max))
        throw std::invalid_argument("lambda_max must be finite and > 1");
}

void check_inputs(const BalanceSheet& bs, const InverseDemand& idf, double lambda_max) {
    require_valid(bs);
    check_lambda(lambda_max);
    if (std::abs(idf.initial_price() - bs.p) > 1e-12)
        throw std::invalid_argument("impact curve must start at the sheet price p");
    const double total = bs.marketable();
    const bool covers = idf.kind() == ImpactKind::Linear ? total < idf.domain_max()
                                                         : total <= idf.domain_max();
    if (!covers)
        throw std::invalid_argument("impact curve must stay positive on [0, s+h]");
}

// Root of a strictly increasing step equation g(q) = target on [lo, hi].
// Linear impact: g is quadratic, a q^2 + c1 q + c0, solved in closed form.
std::optional<double> solve_step_equation(const InverseDemand& idf, double one_minus_inv,
                                          double remaining_total, double target, double lo,
                                          double hi) {
    auto g = [&](double q) {
        return idf.proceeds(q) + one_minus_inv * (remaining_total - q) * idf.price(q);
    };
    if (idf.kind() == ImpactKind::Linear) {
        const double p = idf.initial_price();
        const double b = idf.elasticity();
        const double a = p * b * (one_minus_inv - 0.5);
        const double c1 = p * (1.0 - one_minus_inv - one_minus_inv * remaining_total * b);
        const double c0 = one_minus_inv * remaining_total * p - target;
        const double slack = 1e-9 * std::max(1.0, hi);
        for (double r : quadratic_roots(a, c1, c0))
            if (r >= lo - slack && r <= hi + slack) return std::clamp(r, lo, hi);
        return std::nullopt;
    }
    return bisect_increasing(g, target, lo, hi);
}

ClearingResult finish(const BalanceSheet& bs, const InverseDemand& idf, double lambda_max,
                      ClearingStep step, double w, double gamma,
                      std::vector<std::string> diagnostics) {
    ClearingResult r;
    r.w = w;
    r.gamma = gamma;
    r.step = step;
    r.lambda_max = lambda_max;
    r.liquidity = step == ClearingStep::Illiquidity ? Liquidity::Illiquid : Liquidity::Liquid;
    r.solvency = check_solvency(bs, idf, gamma);
    r.realized = realized_state(bs, idf, std::clamp(w, 0.0, bs.L_U), gamma);
    r.admissibility = check_admissible(idf, bs.marketable(), lambda_max);
    if (!r.admissibility) diagnostics.push_back("inadmissible impact: " + r.admissibility.detail);
    r.diagnostics = std::move(diagnostics);
    return r;
}

FixedPointResult iterate(const BalanceSheet& bs, const InverseDemand& idf, double lambda_max,
                         ClearingPoint start, FixedPointOptions opts) {
    check_inputs(bs, idf, lambda_max);
    if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
    const double stop = opts.tol * std::max(bs.L_U, bs.marketable());
    ClearingPoint cur = start;
    for (std::uint64_t it = 1; it <= opts.max_iter; ++it) {
        const ClearingPoint next = phi(bs, idf, lambda_max, cur);
        const double change = std::max(std::abs(next.w - cur.w), std::abs(next.gamma - cur.gamma));
        cur = next;
        if (change < stop) return {cur, it};
    }
    throw NonConvergence(cur, opts.max_iter);
}

}  // namespace

double withdrawal_demand(const BalanceSheet& bs, const InverseDemand& idf, double lambda_max,
                         double gamma) {
    const double demand =
        lambda_max * bs.liabilities() - (lambda_max - 1.0) * asset_value(bs, idf, gamma);
    return std::min(bs.L_U, std::max(demand, 0.0));
}

ClearingPoint phi(const BalanceSheet& bs, const InverseDemand& idf, double lambda_max,
                  ClearingPoint in) {
    check_lambda(lambda_max);
    if (!(in.w >= 0.0 && in.w <= bs.L_U) || !(in.gamma >= 0.0 && in.gamma <= bs.marketable()))
        throw std::out_of_range("clearing map input outside [0,L_U] x [0,s+h]");
    ClearingPoint out;
    out.w = withdrawal_demand(bs, idf, lambda_max, in.gamma);
    out.gamma = std::min(bs.marketable(), std::max(in.w - bs.x, 0.0) / idf.avg_price(in.gamma));
    return out;
}

FixedPointResult clear_fixed_point(const BalanceSheet& bs, const InverseDemand& idf,
                                   double lambda_max, FixedPointOptions opts) {
    return iterate(bs, idf, lambda_max, {0.0, 0.0}, opts);
}

FixedPointResult clear_fixed_point_from_top(const BalanceSheet& bs, const InverseDemand& idf,
                                            double lambda_max, FixedPointOptions opts) {
    return iterate(bs, idf, lambda_max, {bs.L_U, bs.marketable()}, opts);
}

Solvency check_solvency(const BalanceSheet& bs, const InverseDemand& idf, double gamma) {
    return asset_value(bs, idf, gamma) > bs.liabilities() ? Solvency::Solvent
                                                          : Solvency::Insolvent;
}

void require_admissible(const BalanceSheet& bs, const InverseDemand& idf, double lambda_max) {
    const auto adm = check_admissible(idf, bs.marketable(), lambda_max);
    if (!adm) throw std::invalid_argument("inadmissible impact parameters: " + adm.detail);
}

ClearingResult clear_algorithm(const BalanceSheet& bs, const InverseDemand& idf,
                               double lambda_max) {
    check_inputs(bs, idf, lambda_max);
    std::vector<std::string> diag;

    const double x = bs.x, s = bs.s, h = bs.h, ell = bs.ell;
    const double total = bs.marketable();
    const double L = bs.liabilities();
    const double lev = lambda_max;
    const double keep = 1.0 - 1.0 / lev;  // fraction of remaining assets depositors count on

    // Step 1: no sales.
    {
        const double demand = lev * L - (lev - 1.0) * (x + s * bs.p + h + ell);
        if (bs.L_U <= x || demand <= x) {
            const double w = std::min(bs.L_U, std::max(demand, 0.0));
            return finish(bs, idf, lev, ClearingStep::NoSales, w, 0.0, std::move(diag));
        }
    }

    const double afs_proceeds = idf.proceeds(s);
    const double all_proceeds = idf.proceeds(total);

    // Step 2: partial run, AfS sales only.
    {
        const double target = L - x - keep * (h + ell);
        if (target >= keep * s * bs.p && target <= afs_proceeds) {
            if (auto q = solve_step_equation(idf, keep, s, target, 0.0, s)) {
                const double g = *q;
                const double demand =
                    lev * L - (lev - 1.0) * (x + idf.proceeds(g) + (s - g) * idf.price(g) + h + ell);
                if (bs.L_U >= demand)
                    return finish(bs, idf, lev, ClearingStep::PartialRunAfs, x + idf.proceeds(g), g,
                                  std::move(diag));
            } else {
                diag.emplace_back("step 2 interval holds but root equation has no solution");
            }
        }
    }

    // Step 3: full run, AfS sales only.
    if (bs.L_U > x && bs.L_U <= x + afs_proceeds) {
        if (auto q = idf.invert_proceeds(bs.L_U - x, s)) {
            const double g = *q;
            if (bs.L_I >= keep * ((s - g) * idf.price(g) + h + ell))
                return finish(bs, idf, lev, ClearingStep::FullRunAfs, bs.L_U, g, std::move(diag));
        }
    }

    // Step 4: partial run with HtM re-marked.
    {
        const double target = L - x - keep * ell;
        const double lower = afs_proceeds + keep * h * idf.price(s);
        if (target >= lower && target <= all_proceeds) {
            if (auto q = solve_step_equation(idf, keep, total, target, s, total)) {
                const double g = *q;
                const double demand =
                    lev * L - (lev - 1.0) * (x + idf.proceeds(g) + (total - g) * idf.price(g) + ell);
                if (bs.L_U >= demand)
                    return finish(bs, idf, lev, ClearingStep::PartialRunRemark,
                                  x + idf.proceeds(g), g, std::move(diag));
            } else {
                diag.emplace_back("step 4 interval holds but root equation has no solution");
            }
        }
    }

    // Step 5: full run with HtM re-marked.
    if (bs.L_U > x && bs.L_U <= x + all_proceeds) {
        if (auto q = idf.invert_proceeds(bs.L_U - x, total); q && *q >= s) {
            const double g = *q;
            if (bs.L_I >= keep * ((total - g) * idf.price(g) + ell))
                return finish(bs, idf, lev, ClearingStep::FullRunRemark, bs.L_U, g,
                              std::move(diag));
        }
    }

    // Step 6: illiquidity. w is the withdrawal request, not what is actually paid out.
    const double demand = lev * L - (lev - 1.0) * (x + all_proceeds + ell);
    double w = 0.0;
    if (demand >= bs.L_U && bs.L_U - x >= all_proceeds) {
        w = bs.L_U;
    } else if (demand < bs.L_U && L >= x + all_proceeds + keep * ell) {
        w = demand;
    } else {
        w = std::min(bs.L_U, std::max(demand, 0.0));
        diag.emplace_back("no step condition matched; reporting illiquidity at Phi_w(s+h)");
    }
    return finish(bs, idf, lev, ClearingStep::Illiquidity, w, total, std::move(diag));
}

ClearingResult classify_solution(const BalanceSheet& bs, const InverseDemand& idf,
                                 double lambda_max, ClearingPoint point, double tol) {
    check_inputs(bs, idf, lambda_max);
    const double total = bs.marketable();
    const bool full = point.w >= bs.L_U - tol;
    ClearingStep step;
    if (point.gamma <= tol)
        step = ClearingStep::NoSales;
    else if (point.gamma >= total - tol)
        step = ClearingStep::Illiquidity;
    else if (point.gamma <= bs.s + tol)
        step = full ? ClearingStep::FullRunAfs : ClearingStep::PartialRunAfs;
    else
        step = full ? ClearingStep::FullRunRemark : ClearingStep::PartialRunRemark;
    return finish(bs, idf, lambda_max, step, point.w, std::clamp(point.gamma, 0.0, total), {});
}

}  // namespace bankrun
