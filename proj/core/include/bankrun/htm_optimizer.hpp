#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bankrun/balance_sheet.hpp"

namespace bankrun {

/// Balance sheet with the AfS/HtM split left open: A_bar units of marketable securities
/// (at par) are to be divided between the two books.
struct HtmShell {
    double x = 0.0;
    double A_bar = 0.0;
    double ell = 0.0;
    double L_I = 0.0;
    double L_U = 0.0;

    [[nodiscard]] double liabilities() const noexcept { return L_I + L_U; }
};

/// Shell of an existing sheet; A_bar = A - x - ell = s p + h.
HtmShell shell_of(const BalanceSheet& bs);

/// Time-1 sheet for a designation s of AfS at price p1 (HtM = A_bar - s).
BalanceSheet time1_sheet(const HtmShell& shell, double afs, double p1);

void require_valid(const HtmShell& shell);

enum class HtmCase { Case1, Case2 };
enum class HtmBinding { NoRun, PartialWithdrawal, FullWithdrawal, AllAfS };

std::string to_string(HtmCase c);
std::string to_string(HtmBinding b);

/// Quantities of the closed-form solution. Infeasible candidates are +infinity.
struct HtmIntermediates {
    double l_bar = 0.0;  // (lambda - 1) / lambda
    double excess = 0.0;  // L - x - l_bar (A_bar + ell)
    double M = 0.0;
    double C = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    double s_cap = 0.0;  // largest s keeping the partial-withdrawal run below L_U
    double s_pw = 0.0;
    double s_fw = 0.0;
};

struct HtmDecision {
    double s_star = 0.0;
    double h_star = 0.0;
    HtmCase case_ = HtmCase::Case1;
    HtmBinding binding = HtmBinding::NoRun;
    HtmIntermediates intermediates;
};

/// Context needed to evaluate the partial-withdrawal liquidation gamma_bar(s) and the
/// withdrawal demand G(s) it induces, for linear impact f(q) = p1 (1 - b q).
struct PartialWithdrawalCurve {
    HtmShell shell;
    double lambda_max = 0.0;
    double p1 = 0.0;
    double b = 0.0;

    [[nodiscard]] double gamma_bar(double s) const;
    [[nodiscard]] double demand(double s) const;  // G(s)
};

/// Largest HtM designation that avoids re-marking at threshold price p1 (closed form).
/// Requires lambda_max > 2, p1 in (0,1), 0 < b < 1/[(lambda_max - 1) A_bar].
HtmDecision optimal_htm(const HtmShell& shell, double p1, double lambda_max, double b);

/// Brute-force counterpart: scans s on a uniform grid of grid_n + 1 points over [0, A_bar],
/// clears each time-1 sheet by monotone iteration, and keeps the least s with gamma <= s.
HtmDecision optimal_htm_oracle(const HtmShell& shell, double p1, double lambda_max, double b,
                               int grid_n);

struct ImpliedShock {
    std::optional<double> p1;  // least grid price with h*(p1) >= observed HtM
    std::vector<std::pair<double, double>> profile;  // (p1, h*) over the sorted grid
    bool monotone = true;  // whether h* was non-decreasing in p1 over the grid
};

ImpliedShock implied_shock(const HtmShell& shell, double observed_h, double lambda_max,
                           double b, std::span<const double> p1_grid);

/// Smallest lambda_max for which the all-HtM sheet needs no sales (+infinity if none).
double min_lambda_no_sale(const HtmShell& shell);

}  // namespace bankrun
