#include "bankrun/balance_sheet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bankrun {

namespace {

void check_nonnegative(std::vector<std::string>& out, const char* name, double v) {
    if (!std::isfinite(v))
        out.push_back(std::string(name) + " must be finite");
    else if (v < 0.0)
        out.push_back(std::string(name) + " >= 0 required");
}

void check_inputs(const BalanceSheet& bs, double w, double gamma) {
    if (!(w >= 0.0 && w <= bs.L_U))
        throw std::out_of_range("withdrawals must lie in [0, L_U]");
    if (!(gamma >= 0.0 && gamma <= bs.marketable()))
        throw std::out_of_range("quantity sold must lie in [0, s+h]");
}

}  // namespace

Validation validate(const BalanceSheet& bs) {
    Validation v;
    check_nonnegative(v.violations, "x", bs.x);
    check_nonnegative(v.violations, "s", bs.s);
    check_nonnegative(v.violations, "h", bs.h);
    check_nonnegative(v.violations, "ell", bs.ell);
    check_nonnegative(v.violations, "L_I", bs.L_I);
    if (!std::isfinite(bs.L_U) || !(bs.L_U > 0.0)) v.violations.emplace_back("L_U > 0 required");
    if (!std::isfinite(bs.p) || !(bs.p > 0.0 && bs.p <= 1.0))
        v.violations.emplace_back("p in (0,1] required");
    if (v.ok()) v.nonpositive_equity = totals(bs).equity <= 0.0;
    return v;
}

void require_valid(const BalanceSheet& bs) {
    const auto v = validate(bs);
    if (v.ok()) return;
    std::string msg = "invalid balance sheet:";
    for (const auto& e : v.violations) msg += " " + e + ";";
    throw std::invalid_argument(msg);
}

Totals totals(const BalanceSheet& bs) {
    Totals t;
    t.assets = bs.x + bs.s * bs.p + bs.h + bs.ell;
    t.liabilities = bs.liabilities();
    t.equity = t.assets - t.liabilities;
    t.leverage = t.equity > 0.0 ? t.assets / t.equity : kUnboundedLeverage;
    return t;
}

double asset_value(const BalanceSheet& bs, const InverseDemand& idf, double gamma) {
    if (!(gamma >= 0.0 && gamma <= bs.marketable()))
        throw std::out_of_range("quantity sold must lie in [0, s+h]");
    const double f = idf.price(gamma);
    const double afs_left = std::max(bs.s - gamma, 0.0);
    const double htm_left = bs.h - std::max(gamma - bs.s, 0.0);
    const double htm_price = gamma <= bs.s ? 1.0 : f;
    return bs.x + idf.proceeds(gamma) + afs_left * f + htm_left * htm_price + bs.ell;
}

double realized_assets(const BalanceSheet& bs, const InverseDemand& idf, double w, double gamma) {
    check_inputs(bs, w, gamma);
    return asset_value(bs, idf, gamma) - w;
}

double realized_leverage(const BalanceSheet& bs, const InverseDemand& idf, double w,
                         double gamma) {
    return realized_state(bs, idf, w, gamma).leverage;
}

RealizedState realized_state(const BalanceSheet& bs, const InverseDemand& idf, double w,
                             double gamma) {
    RealizedState r;
    r.w = w;
    r.gamma = gamma;
    r.assets = realized_assets(bs, idf, w, gamma);
    r.equity = r.assets - (bs.liabilities() - w);
    r.leverage = r.equity > 0.0 ? r.assets / r.equity : kUnboundedLeverage;
    r.remarked = gamma > bs.s;
    return r;
}

}  // namespace bankrun
