#include "bankrun/htm_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bankrun/clearing.hpp"
#include "bankrun/market_impact.hpp"

namespace bankrun {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_case_params(const HtmShell& shell, double p1, double lambda_max, double b,
                       bool closed_form) {
    require_valid(shell);
    if (!(p1 > 0.0 && p1 < 1.0)) throw std::invalid_argument("p1 must lie in (0,1)");
    if (closed_form) {
        if (!(lambda_max > 2.0) || !std::isfinite(lambda_max))
            throw std::invalid_argument("closed-form HtM designation requires lambda_max > 2");
        if (!(b > 0.0)) throw std::invalid_argument("closed-form HtM designation requires b > 0");
    } else if (!(lambda_max > 1.0) || !std::isfinite(lambda_max)) {
        throw std::invalid_argument("lambda_max must be > 1");
    } else if (!(b >= 0.0)) {
        throw std::invalid_argument("b must be >= 0");
    }
    if (shell.A_bar > 0.0 && !(b * (lambda_max - 1.0) * shell.A_bar < 1.0))
        throw std::invalid_argument("b must be below 1/[(lambda_max - 1) A_bar]");
}

bool is_case1(const HtmShell& shell, double l_bar) {
    return shell.L_U <= shell.x || shell.liabilities() <= shell.x + l_bar * (shell.A_bar + shell.ell);
}

}  // namespace

std::string to_string(HtmCase c) { return c == HtmCase::Case1 ? "Case1" : "Case2"; }

std::string to_string(HtmBinding b) {
    switch (b) {
        case HtmBinding::NoRun: return "NoRun";
        case HtmBinding::PartialWithdrawal: return "PartialWithdrawal";
        case HtmBinding::FullWithdrawal: return "FullWithdrawal";
        case HtmBinding::AllAfS: return "AllAfS";
    }
    return "unknown";
}

HtmShell shell_of(const BalanceSheet& bs) {
    return {bs.x, bs.s * bs.p + bs.h, bs.ell, bs.L_I, bs.L_U};
}

BalanceSheet time1_sheet(const HtmShell& shell, double afs, double p1) {
    BalanceSheet bs;
    bs.x = shell.x;
    bs.s = afs;
    bs.h = std::max(shell.A_bar - afs, 0.0);
    bs.ell = shell.ell;
    bs.p = p1;
    bs.L_I = shell.L_I;
    bs.L_U = shell.L_U;
    return bs;
}

void require_valid(const HtmShell& shell) {
    for (double v : {shell.x, shell.A_bar, shell.ell, shell.L_I})
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("HtM shell fields must be finite and >= 0");
    if (!(shell.L_U > 0.0) || !std::isfinite(shell.L_U))
        throw std::invalid_argument("HtM shell requires L_U > 0");
}

double PartialWithdrawalCurve::gamma_bar(double s) const {
    const double lev = lambda_max;
    const double l_bar = (lev - 1.0) / lev;
    const double rhs =
        shell.liabilities() - shell.x - l_bar * (shell.A_bar + shell.ell - s * (1.0 - p1));
    const double B = p1 * ((lev - 1.0) * b * s - 1.0);
    const double D = 2.0 * lev * (lev - 2.0) * p1 * b * rhs;
    const double root = std::sqrt(std::max(B * B + D, 0.0));
    // (B + root) / (p1 b (lev - 2)), rearranged to avoid cancellation when B < 0.
    if (B < 0.0) return 2.0 * lev * rhs / (root - B);
    return (B + root) / (p1 * b * (lev - 2.0));
}

double PartialWithdrawalCurve::demand(double s) const {
    const double g = gamma_bar(s);
    const double f = p1 * (1.0 - b * g);
    const double f_avg = p1 * (1.0 - 0.5 * b * g);
    return lambda_max * shell.liabilities() -
           (lambda_max - 1.0) * (shell.x + g * f_avg + (s - g) * f + shell.A_bar + shell.ell - s);
}

HtmDecision optimal_htm(const HtmShell& shell, double p1, double lambda_max, double b) {
    check_case_params(shell, p1, lambda_max, b, true);
    HtmDecision d;
    auto& im = d.intermediates;
    const double A_bar = shell.A_bar;
    im.l_bar = (lambda_max - 1.0) / lambda_max;

    if (is_case1(shell, im.l_bar)) {
        d.case_ = HtmCase::Case1;
        d.binding = HtmBinding::NoRun;
        d.s_star = 0.0;
        d.h_star = A_bar;
        return d;
    }
    d.case_ = HtmCase::Case2;

    const double L = shell.liabilities();
    const double x = shell.x;
    const double l_bar = im.l_bar;
    const double K = L - x - l_bar * (A_bar + shell.ell);
    im.excess = K;
    const double disc = (p1 - l_bar) * (p1 - l_bar) - 2.0 * p1 * b * K;
    im.M = std::sqrt(std::max(disc, 0.0));
    im.C = std::sqrt(b * K * (2.0 * l_bar + b * K));

    // Cap from the withdrawal demand G(s) staying at or below L_U.
    const PartialWithdrawalCurve curve{shell, lambda_max, p1, b};
    const double g_lo = curve.demand(0.0);
    const double g_hi = curve.demand(A_bar);
    if (shell.L_U <= g_lo)
        im.s_cap = 0.0;
    else if (shell.L_U >= g_hi)
        im.s_cap = A_bar;
    else
        im.s_cap = bisect_increasing([&](double s) { return curve.demand(s); }, shell.L_U, 0.0,
                                     A_bar, 1e-13 * std::max(1.0, A_bar));

    // Partial withdrawals: smaller root of -(b/2) p1 s^2 + (p1 - l_bar) s = K.
    im.s_pw = kInf;
    if (p1 >= l_bar + b * K + im.C) {
        const double candidate = 2.0 * K / (p1 - l_bar + im.M);  // == (p1 - l_bar - M) / (b p1)
        if (candidate <= im.s_cap) im.s_pw = candidate;
    }

    // Full withdrawals.
    const double run = shell.L_U - x;
    im.s1 = kInf;
    im.s2 = kInf;
    im.s_fw = kInf;
    if (p1 > 2.0 * b * run) {
        im.s1 = 2.0 * run / (p1 * (1.0 + std::sqrt(1.0 - 2.0 * b * run / p1)));
        const double f1 = p1 * (1.0 - b * im.s1);
        im.s2 = (A_bar + shell.ell - im.s1 * f1 - shell.L_I / l_bar) / (1.0 - f1);
        const double s_fw = std::max(im.s1, im.s2);
        if (s_fw <= A_bar) im.s_fw = s_fw;
    }

    d.s_star = std::min({im.s_pw, im.s_fw, A_bar});
    d.h_star = A_bar - d.s_star;
    if (d.s_star == im.s_pw)
        d.binding = HtmBinding::PartialWithdrawal;
    else if (d.s_star == im.s_fw)
        d.binding = HtmBinding::FullWithdrawal;
    else
        d.binding = HtmBinding::AllAfS;
    return d;
}

HtmDecision optimal_htm_oracle(const HtmShell& shell, double p1, double lambda_max, double b,
                               int grid_n) {
    check_case_params(shell, p1, lambda_max, b, false);
    if (grid_n < 1) throw std::invalid_argument("grid_n must be >= 1");
    const auto idf = InverseDemand::linear(p1, b);
    const double slack = 1e-9 * std::max(1.0, shell.A_bar);
    FixedPointOptions opts;
    opts.tol = 1e-12;

    HtmDecision d;
    d.intermediates.l_bar = (lambda_max - 1.0) / lambda_max;
    d.s_star = shell.A_bar;
    d.binding = HtmBinding::AllAfS;
    d.case_ = HtmCase::Case2;
    for (int k = 0; k <= grid_n; ++k) {
        const double s = k == grid_n ? shell.A_bar : shell.A_bar * k / grid_n;
        const auto sheet = time1_sheet(shell, s, p1);
        const auto sol = clear_fixed_point(sheet, idf, lambda_max, opts);
        if (sol.point.gamma > s + slack) continue;
        d.s_star = s;
        const auto cls = classify_solution(sheet, idf, lambda_max, sol.point);
        switch (cls.step) {
            case ClearingStep::NoSales:
                d.binding = HtmBinding::NoRun;
                d.case_ = k == 0 ? HtmCase::Case1 : HtmCase::Case2;
                break;
            case ClearingStep::PartialRunAfs: d.binding = HtmBinding::PartialWithdrawal; break;
            case ClearingStep::FullRunAfs: d.binding = HtmBinding::FullWithdrawal; break;
            default: d.binding = HtmBinding::AllAfS; break;
        }
        break;
    }
    d.h_star = shell.A_bar - d.s_star;
    return d;
}

ImpliedShock implied_shock(const HtmShell& shell, double observed_h, double lambda_max,
                           double b, std::span<const double> p1_grid) {
    if (p1_grid.empty()) throw std::invalid_argument("p1 grid must not be empty");
    require_valid(shell);
    const double slack = 1e-9 * std::max(1.0, shell.A_bar);
    if (!(observed_h >= 0.0 && observed_h <= shell.A_bar + slack))
        throw std::invalid_argument("observed HtM must lie in [0, A_bar]");

    std::vector<double> grid(p1_grid.begin(), p1_grid.end());
    std::sort(grid.begin(), grid.end());
    ImpliedShock out;
    double prev = -kInf;
    for (double p1 : grid) {
        const double h = optimal_htm(shell, p1, lambda_max, b).h_star;
        out.profile.emplace_back(p1, h);
        if (h < prev - slack) out.monotone = false;
        prev = h;
        if (!out.p1 && h >= observed_h - slack) out.p1 = p1;
    }
    return out;
}

double min_lambda_no_sale(const HtmShell& shell) {
    require_valid(shell);
    const double L = shell.liabilities();
    if (shell.L_U <= shell.x || L <= shell.x) return 1.0;
    const double gap = L - shell.x;
    const double cover = shell.A_bar + shell.ell;
    if (gap >= cover) return kInf;
    return cover / (cover - gap);
}

}  // namespace bankrun
