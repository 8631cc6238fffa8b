#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bankrun/balance_sheet.hpp"
#include "bankrun/market_impact.hpp"

namespace bankrun {

/// Branch of the six-step clearing algorithm that produced an equilibrium.
enum class ClearingStep : int {
    NoSales = 1,
    PartialRunAfs = 2,     // run without re-marking HtM, w < L_U
    FullRunAfs = 3,        // run without re-marking HtM, w = L_U
    PartialRunRemark = 4,  // HtM re-marked, w < L_U
    FullRunRemark = 5,     // HtM re-marked, w = L_U
    Illiquidity = 6,
};

enum class Liquidity { Liquid, Illiquid };
enum class Solvency { Solvent, Insolvent };

std::string to_string(Liquidity l);
std::string to_string(Solvency s);
inline int step_number(ClearingStep s) noexcept { return static_cast<int>(s); }

struct ClearingPoint {
    double w = 0.0;
    double gamma = 0.0;
};

struct ClearingResult {
    double w = 0.0;
    double gamma = 0.0;
    ClearingStep step = ClearingStep::NoSales;
    Liquidity liquidity = Liquidity::Liquid;
    Solvency solvency = Solvency::Solvent;
    RealizedState realized;
    double lambda_max = 0.0;
    Admissibility admissibility;
    std::vector<std::string> diagnostics;
};

/// Thrown by clear_fixed_point when the iteration budget runs out.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(ClearingPoint last, std::uint64_t iterations)
        : std::runtime_error("fixed-point iteration did not converge"),
          last_(last),
          iterations_(iterations) {}

    [[nodiscard]] ClearingPoint last_iterate() const noexcept { return last_; }
    [[nodiscard]] std::uint64_t iterations() const noexcept { return iterations_; }

private:
    ClearingPoint last_;
    std::uint64_t iterations_;
};

struct FixedPointOptions {
    double tol = 1e-9;  // relative to max(L_U, s+h)
    std::uint64_t max_iter = 1'000'000;
};

struct FixedPointResult {
    ClearingPoint point;
    std::uint64_t iterations = 0;
};

/// Withdrawals the uninsured depositors demand after gamma units have been sold:
/// L_U ^ [lambda L - (lambda - 1) asset_value(gamma)]^+.
double withdrawal_demand(const BalanceSheet& bs, const InverseDemand& idf, double lambda_max,
                         double gamma);

/// One application of the clearing map (w, gamma) -> (Phi_w(gamma), Phi_gamma(w, gamma)).
ClearingPoint phi(const BalanceSheet& bs, const InverseDemand& idf, double lambda_max,
                  ClearingPoint in);

/// Minimal clearing solution by monotone iteration of phi from (0, 0).
FixedPointResult clear_fixed_point(const BalanceSheet& bs, const InverseDemand& idf,
                                   double lambda_max, FixedPointOptions opts = {});

/// Maximal clearing solution by iteration from the top corner (L_U, s+h). Test support only.
FixedPointResult clear_fixed_point_from_top(const BalanceSheet& bs, const InverseDemand& idf,
                                            double lambda_max, FixedPointOptions opts = {});

/// Direct six-step computation of the minimal clearing solution, with classification.
ClearingResult clear_algorithm(const BalanceSheet& bs, const InverseDemand& idf,
                               double lambda_max);

/// Classifies an arbitrary clearing solution (e.g. from clear_fixed_point) into the step it
/// belongs to, using tol as the absolute tie tolerance.
ClearingResult classify_solution(const BalanceSheet& bs, const InverseDemand& idf,
                                 double lambda_max, ClearingPoint point, double tol = 1e-7);

/// Solvent iff asset_value(gamma) > L.
Solvency check_solvency(const BalanceSheet& bs, const InverseDemand& idf, double gamma);

/// Strict mode: throws std::invalid_argument if the impact curve is inadmissible.
void require_admissible(const BalanceSheet& bs, const InverseDemand& idf, double lambda_max);

}  // namespace bankrun
