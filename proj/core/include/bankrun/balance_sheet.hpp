#pragma once

#include <limits>
#include <string>
#include <vector>

#include "bankrun/market_impact.hpp"

namespace bankrun {

/// Leverage value reported when equity is zero or negative.
inline constexpr double kUnboundedLeverage = std::numeric_limits<double>::infinity();

inline bool is_unbounded(double leverage) noexcept {
    return leverage == kUnboundedLeverage;
}

/// Stylized bank balance sheet before a run. Money amounts in USD bn; s and h are
/// quantities of marketable securities whose HtM book value is 1 per unit.
struct BalanceSheet {
    double x = 0.0;    // cash
    double s = 0.0;    // available-for-sale quantity, marked at p
    double h = 0.0;    // held-to-maturity quantity, carried at par
    double ell = 0.0;  // nonmarketable assets at book value
    double p = 1.0;    // initial unit price of marketable securities
    double L_I = 0.0;  // insured / stable liabilities
    double L_U = 0.0;  // uninsured, run-prone liabilities

    [[nodiscard]] double marketable() const noexcept { return s + h; }
    [[nodiscard]] double liabilities() const noexcept { return L_I + L_U; }

    friend bool operator==(const BalanceSheet&, const BalanceSheet&) = default;
};

struct Validation {
    std::vector<std::string> violations;
    bool nonpositive_equity = false;  // warning only; the sheet is still usable

    [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

/// Range checks for every field. Never throws.
Validation validate(const BalanceSheet& bs);

/// Throws std::invalid_argument listing all violations when the sheet is invalid.
void require_valid(const BalanceSheet& bs);

struct Totals {
    double assets = 0.0;
    double liabilities = 0.0;
    double equity = 0.0;
    double leverage = 0.0;  // kUnboundedLeverage when equity <= 0
};

Totals totals(const BalanceSheet& bs);

struct RealizedState {
    double w = 0.0;
    double gamma = 0.0;
    double assets = 0.0;
    double equity = 0.0;
    double leverage = 0.0;
    bool remarked = false;  // HtM block valued at market (gamma > s)
};

/// Value of all assets still held plus cash raised after selling gamma units, before paying
/// out any withdrawals: x + gamma avg(gamma) + (s-gamma)^+ f(gamma) + HtM block + ell, where
/// the HtM block is valued at par while gamma <= s and at f(gamma) once it is re-marked.
double asset_value(const BalanceSheet& bs, const InverseDemand& idf, double gamma);

/// A(w, gamma) = asset_value(gamma) - w.
double realized_assets(const BalanceSheet& bs, const InverseDemand& idf, double w, double gamma);

/// A / (A - (L - w)), or kUnboundedLeverage when the denominator is not positive.
double realized_leverage(const BalanceSheet& bs, const InverseDemand& idf, double w,
                         double gamma);

RealizedState realized_state(const BalanceSheet& bs, const InverseDemand& idf, double w,
                             double gamma);

}  // namespace bankrun
