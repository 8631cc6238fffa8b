#include <gtest/gtest.h>

#include <random>

#include "bankrun/clearing.hpp"
#include "oracles.hpp"

using namespace bankrun;

namespace {

const auto kFrictionless = InverseDemand::frictionless(1.0);

BalanceSheet step1_sheet() { return {20, 30, 20, 30, 1.0, 60, 23}; }
BalanceSheet step2_sheet() { return {10, 40, 20, 30, 1.0, 54, 30}; }
BalanceSheet step6_sheet() { return {5, 10, 5, 10, 1.0, 40, 30}; }

}  // namespace

TEST(Clearing, PhiHandIterates) {
    const auto bs = step2_sheet();
    auto a = phi(bs, kFrictionless, 5.0, {0, 0});
    EXPECT_DOUBLE_EQ(a.w, 20.0);
    EXPECT_DOUBLE_EQ(a.gamma, 0.0);
    auto b = phi(bs, kFrictionless, 5.0, a);
    EXPECT_DOUBLE_EQ(b.w, 20.0);
    EXPECT_DOUBLE_EQ(b.gamma, 10.0);
    auto c = phi(bs, kFrictionless, 5.0, b);
    EXPECT_DOUBLE_EQ(c.w, 20.0);
    EXPECT_DOUBLE_EQ(c.gamma, 10.0);
}

TEST(Clearing, PhiClipsBelowThreshold) {
    // leverage 4 < lambda_max: lambda L - (lambda - 1) A <= 0
    const BalanceSheet bs{30, 20, 10, 40, 1.0, 50, 25};
    const auto out = phi(bs, kFrictionless, 7.5, {0, 0});
    EXPECT_DOUBLE_EQ(out.w, 0.0);
    EXPECT_DOUBLE_EQ(out.gamma, 0.0);
}

TEST(Clearing, PhiUpperCornerAbsorbs) {
    const auto bs = step6_sheet();
    const auto out = phi(bs, kFrictionless, 5.0, {bs.L_U, bs.marketable()});
    EXPECT_DOUBLE_EQ(out.gamma, bs.marketable());
    EXPECT_DOUBLE_EQ(out.w, withdrawal_demand(bs, kFrictionless, 5.0, bs.marketable()));
}

TEST(Clearing, PhiRejectsBadInputs) {
    EXPECT_THROW(phi(step2_sheet(), kFrictionless, 1.0, {0, 0}), std::invalid_argument);
    EXPECT_THROW(phi(step2_sheet(), kFrictionless, 5.0, {31, 0}), std::out_of_range);
}

TEST(Clearing, FixedPointWorkedInstances) {
    auto r = clear_fixed_point(step2_sheet(), kFrictionless, 5.0);
    EXPECT_NEAR(r.point.w, 20.0, 1e-9);
    EXPECT_NEAR(r.point.gamma, 10.0, 1e-9);

    r = clear_fixed_point({30, 20, 10, 40, 1.0, 50, 25}, kFrictionless, 7.5);
    EXPECT_DOUBLE_EQ(r.point.w, 0.0);
    EXPECT_DOUBLE_EQ(r.point.gamma, 0.0);

    r = clear_fixed_point(step6_sheet(), kFrictionless, 5.0);
    EXPECT_NEAR(r.point.w, 30.0, 1e-9);
    EXPECT_NEAR(r.point.gamma, 15.0, 1e-9);
}

TEST(Clearing, FixedPointReportsNonConvergence) {
    FixedPointOptions opts;
    opts.max_iter = 1;
    try {
        (void)clear_fixed_point(step2_sheet(), kFrictionless, 5.0, opts);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        EXPECT_EQ(e.iterations(), 1u);
        EXPECT_DOUBLE_EQ(e.last_iterate().w, 20.0);
    }
}

TEST(Clearing, AlgorithmStep1) {
    const auto r = clear_algorithm(step1_sheet(), kFrictionless, 5.0);
    EXPECT_EQ(r.step, ClearingStep::NoSales);
    EXPECT_NEAR(r.w, 15.0, 1e-12);
    EXPECT_EQ(r.gamma, 0.0);
    EXPECT_EQ(r.liquidity, Liquidity::Liquid);
    EXPECT_EQ(r.solvency, Solvency::Solvent);
}

TEST(Clearing, AlgorithmStep2) {
    const auto r = clear_algorithm(step2_sheet(), kFrictionless, 5.0);
    EXPECT_EQ(r.step, ClearingStep::PartialRunAfs);
    EXPECT_NEAR(r.w, 20.0, 1e-12);
    EXPECT_NEAR(r.gamma, 10.0, 1e-12);
    EXPECT_EQ(r.liquidity, Liquidity::Liquid);
    EXPECT_EQ(r.solvency, Solvency::Solvent);
    EXPECT_NEAR(r.realized.leverage, 5.0, 1e-12);
}

TEST(Clearing, AlgorithmStep6) {
    const auto r = clear_algorithm(step6_sheet(), kFrictionless, 5.0);
    EXPECT_EQ(r.step, ClearingStep::Illiquidity);
    EXPECT_DOUBLE_EQ(r.w, 30.0);
    EXPECT_DOUBLE_EQ(r.gamma, 15.0);
    EXPECT_EQ(r.liquidity, Liquidity::Illiquid);
    EXPECT_EQ(r.solvency, Solvency::Insolvent);
}

TEST(Clearing, AlgorithmRejectsMismatchedCurve) {
    EXPECT_THROW(clear_algorithm(step2_sheet(), InverseDemand::linear(0.9, 0.001), 5.0),
                 std::invalid_argument);
    // b (s+h) >= 1 leaves non-positive prices inside the domain.
    EXPECT_THROW(clear_algorithm(step2_sheet(), InverseDemand::linear(1.0, 1.0 / 60.0), 5.0),
                 std::invalid_argument);
}

TEST(Clearing, InadmissibleCurveStillClearsWithWarning) {
    const auto idf = InverseDemand::linear(1.0, 0.01);  // bound is 1/(4*60)
    const auto r = clear_algorithm(step2_sheet(), idf, 5.0);
    EXPECT_FALSE(r.admissibility);
    EXPECT_FALSE(r.diagnostics.empty());
    EXPECT_THROW(require_admissible(step2_sheet(), idf, 5.0), std::invalid_argument);
}

TEST(Clearing, Solvency) {
    EXPECT_EQ(check_solvency(step2_sheet(), kFrictionless, 0.0), Solvency::Solvent);
    EXPECT_EQ(check_solvency(step6_sheet(), kFrictionless, 15.0), Solvency::Insolvent);
    // With f == 1 re-marking costs nothing: solvency is unchanged across gamma = s.
    const auto bs = step2_sheet();
    EXPECT_EQ(check_solvency(bs, kFrictionless, bs.s),
              check_solvency(bs, kFrictionless, bs.s + 1e-9));
    EXPECT_THROW((void)check_solvency(bs, kFrictionless, 61.0), std::out_of_range);
}

TEST(Clearing, TabulatedCurveUsesBisection) {
    std::vector<PricePoint> pts;
    for (int i = 0; i <= 20; ++i) pts.push_back({6.0 * i, 1.0 - 0.0006 * 6.0 * i});
    const auto tab = InverseDemand::tabulated(pts);
    const auto lin = InverseDemand::linear(1.0, 0.0006);
    const auto bs = step2_sheet();
    const auto a = clear_algorithm(bs, tab, 5.0);
    const auto b = clear_algorithm(bs, lin, 5.0);
    EXPECT_EQ(a.step, b.step);
    EXPECT_NEAR(a.w, b.w, 1e-8);
    EXPECT_NEAR(a.gamma, b.gamma, 1e-8);
}

TEST(Clearing, MaximalSolutionDominatesMinimal) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rs = oracle::random_sheet(rng);
        const auto idf = InverseDemand::linear(rs.sheet.p, rs.b);
        const auto lo = clear_fixed_point(rs.sheet, idf, rs.lambda_max).point;
        const auto hi = clear_fixed_point_from_top(rs.sheet, idf, rs.lambda_max).point;
        EXPECT_LE(lo.w, hi.w + 1e-7);
        EXPECT_LE(lo.gamma, hi.gamma + 1e-7);
    }
}
