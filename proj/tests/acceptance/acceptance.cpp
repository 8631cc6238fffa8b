// Acceptance checks 1-8. Prints one PASS/FAIL line per criterion; exit status is the
// number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bankrun/clearing.hpp"
#include "bankrun/htm_optimizer.hpp"
#include "bankrun/scenario.hpp"
#include "oracles.hpp"

#ifdef BANKRUN_HAVE_CLI
#include "bankrun/cli.hpp"
#endif

using namespace bankrun;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

std::string num(double v, int prec = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

const std::vector<BankRecord>& svb() {
    static const auto recs = load_records(BANKRUN_SVB_CSV);
    return recs;
}

const BankRecord& record(const std::string& period) {
    for (const auto& r : svb())
        if (r.period == period) return r;
    throw std::runtime_error("missing " + period);
}

Outcome implied_leverage_column() {
    Outcome o;
    const double expected[] = {6.0, 6.2, 6.3, 6.5, 7.6, 7.8, 8.2, 8.6, 12.7, 18.7, 39.2, 35.9};
    const auto& recs = svb();
    if (recs.size() != 12) {
        o.fail("expected 12 records");
        return o;
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < 12; ++i) {
        const double got = implied_leverage(recs[i]);
        worst = std::max(worst, std::abs(got - expected[i]));
        if (!(std::abs(got - expected[i]) <= 0.15))
            o.fail(recs[i].period + " gives " + num(got) + " vs " + num(expected[i]));
    }
    if (o.pass) o.detail = "max deviation " + num(worst, 3);
    return o;
}

Outcome calibration_identity() {
    Outcome o;
    double worst = 0.0;
    for (const auto& r : svb()) {
        const double err = std::abs(totals(calibrate(r)).equity - r.capital);
        worst = std::max(worst, err);
        if (!(err <= 1e-9)) o.fail(r.period + " off by " + num(err));
    }
    if (o.pass) o.detail = "max |E - capital| " + num(worst, 3);
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    std::mt19937_64 rng(2024);
    FixedPointOptions opts;
    opts.tol = 1e-13;
    const int n = 1200;
    std::map<int, int> steps;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto rs = oracle::random_sheet(rng);
        const auto idf = i % 2 ? InverseDemand::exponential(rs.sheet.p, rs.b)
                               : InverseDemand::linear(rs.sheet.p, rs.b);
        const auto alg = clear_algorithm(rs.sheet, idf, rs.lambda_max);
        const auto fp = clear_fixed_point(rs.sheet, idf, rs.lambda_max, opts).point;
        const auto cls = classify_solution(rs.sheet, idf, rs.lambda_max, fp);
        ++steps[step_number(alg.step)];
        const double d = std::max(std::abs(alg.w - fp.w), std::abs(alg.gamma - fp.gamma));
        worst = std::max(worst, d);
        if (!(d <= 1e-6)) o.fail("sheet " + std::to_string(i) + " differs by " + num(d));
        if (cls.step != alg.step || cls.liquidity != alg.liquidity || cls.solvency != alg.solvency)
            o.fail("sheet " + std::to_string(i) + " classified differently");
    }
    if (o.pass) {
        o.detail = std::to_string(n) + " sheets, max diff " + num(worst, 3) + ", steps";
        for (const auto& [k, v] : steps) o.detail += " " + std::to_string(k) + ":" + std::to_string(v);
    }
    return o;
}

Outcome hand_equilibria() {
    Outcome o;
    const auto f1 = InverseDemand::frictionless(1.0);
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };

    const auto r1 = clear_algorithm({20, 30, 20, 30, 1.0, 60, 23}, f1, 5.0);
    if (!(r1.step == ClearingStep::NoSales && near(r1.w, 15) && near(r1.gamma, 0)))
        o.fail("step-1 instance gave (" + num(r1.w) + ", " + num(r1.gamma) + ")");

    const auto r2 = clear_algorithm({10, 40, 20, 30, 1.0, 54, 30}, f1, 5.0);
    if (!(r2.step == ClearingStep::PartialRunAfs && near(r2.w, 20) && near(r2.gamma, 10) &&
          near(r2.realized.leverage, 5.0)))
        o.fail("step-2 instance gave (" + num(r2.w) + ", " + num(r2.gamma) + ") leverage " +
               num(r2.realized.leverage));

    const auto r6 = clear_algorithm({5, 10, 5, 10, 1.0, 40, 30}, f1, 5.0);
    if (!(r6.step == ClearingStep::Illiquidity && near(r6.w, 30) && near(r6.gamma, 15) &&
          r6.liquidity == Liquidity::Illiquid && r6.solvency == Solvency::Insolvent))
        o.fail("step-6 instance gave (" + num(r6.w) + ", " + num(r6.gamma) + ")");
    if (o.pass) o.detail = "(15,0) step 1; (20,10) step 2 leverage 5; (30,15) Illiquid+Insolvent";
    return o;
}

Outcome qualitative_sweeps() {
    Outcome o;
    const auto baseline = sweep(svb(), {7.0, 7.5, 8.0, 8.5},
                                {ImpactSpec::parse("linear:p=1,b=0.0005")}, {TransformChain{}});
    for (const auto& r : baseline)
        if (r.period <= "2021q1" && r.result.step != ClearingStep::NoSales)
            o.fail(r.period + " at lambda " + num(r.lambda_max) + " is step " +
                   std::to_string(step_number(r.result.step)));

    const std::vector<double> bs{0.0001, 0.0002, 0.001, 0.002};
    std::vector<ImpactSpec> specs;
    for (double b : bs) specs.push_back({ImpactKind::Linear, b, 1.0});
    const auto losses = sweep(svb(), {7.5}, specs, {parse_chain("realize-ugl")});
    std::optional<double> q1_illiquid_solvent;
    std::map<double, int> late_insolvent;
    for (const auto& r : losses) {
        const double b = ImpactSpec::parse(r.impact).b;
        if (r.period == "2022q1" && r.result.liquidity == Liquidity::Illiquid &&
            r.result.solvency == Solvency::Solvent && !q1_illiquid_solvent)
            q1_illiquid_solvent = b;
        if (r.period > "2022q1" && r.result.solvency == Solvency::Insolvent) ++late_insolvent[b];
    }
    if (!q1_illiquid_solvent) {
        o.fail("2022q1 never Illiquid+Solvent");
        return o;
    }
    std::optional<double> b_insolvent;
    for (const auto& [b, count] : late_insolvent)
        if (b >= *q1_illiquid_solvent && count > 0) b_insolvent = b;
    if (!b_insolvent) o.fail("no insolvent late-2022 quarter at or above b = " + num(*q1_illiquid_solvent));
    if (o.pass)
        o.detail = "step 1 through 2021q1; 2022q1 Illiquid+Solvent at b=" + num(*q1_illiquid_solvent) +
                   "; " + std::to_string(late_insolvent[*b_insolvent]) +
                   " later-2022 quarters Insolvent at b=" + num(*b_insolvent);
    return o;
}

Outcome closed_form_vs_oracle() {
    Outcome o;
    const auto worked = optimal_htm({10, 60, 30, 50, 35}, 0.9, 5.0, 1e-9);
    if (!(std::abs(worked.s_star - 250.0 / 9.0) <= 1e-4))
        o.fail("worked shell gives " + num(worked.s_star, 10));

    std::mt19937_64 rng(77);
    const int n = 500, grid = 10000;
    std::map<HtmBinding, int> bindings;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto r = oracle::random_case2_shell(rng);
        const auto d = optimal_htm(r.shell, r.p1, r.lambda_max, r.b);
        const auto g = optimal_htm_oracle(r.shell, r.p1, r.lambda_max, r.b, grid);
        const double cell = r.shell.A_bar / grid;
        ++bindings[d.binding];
        const double gap = g.s_star - d.s_star;
        worst = std::max(worst, std::abs(gap) / cell);
        if (!(gap >= -1e-9 * r.shell.A_bar && gap <= cell * (1.0 + 1e-9)))
            o.fail("shell " + std::to_string(i) + ": closed form " + num(d.s_star, 10) +
                   ", oracle " + num(g.s_star, 10));
    }
    if (o.pass) {
        o.detail = "s*=" + num(worked.s_star, 8) + "; " + std::to_string(n) +
                   " shells within one cell (max " + num(worst, 3) + " cells);";
        for (const auto& [b, c] : bindings) o.detail += " " + to_string(b) + ":" + std::to_string(c);
    }
    return o;
}

Outcome htm_inferences() {
    Outcome o;
    std::vector<double> grid;
    for (int i = 50; i <= 99; ++i) grid.push_back(i / 100.0);
    std::string implied;
    for (const auto& r : svb()) {
        const auto bs = calibrate(r);
        const auto res = implied_shock(shell_of(bs), bs.h, 6.5, 0.0005, grid);
        if (r.period <= "2021q2") {
            implied += " " + (res.p1 ? num(*res.p1, 3) : std::string("none"));
            if (!res.p1 || std::abs(*res.p1 - 0.9) > 0.05)
                o.fail(r.period + " implied p1 " + (res.p1 ? num(*res.p1) : std::string("none")));
        }
        if (r.period >= "2022q1" && res.p1) o.fail(r.period + " implied p1 " + num(*res.p1));
    }
    double prev = 0.0;
    double first = 0.0, last = 0.0;
    for (const auto& r : svb()) {
        if (r.period < "2020q3") continue;
        const double lam = min_lambda_no_sale(shell_of(calibrate(r)));
        if (r.period == "2020q3") first = lam;
        else if (lam < prev) o.fail("min lambda decreases at " + r.period);
        prev = lam;
        last = lam;
    }
    if (std::abs(first - 6.5) > 0.1) o.fail("2020q3 min lambda " + num(first));
    if (!(last > 8.0)) o.fail("2022q4 min lambda " + num(last));
    if (o.pass)
        o.detail = "implied p1 through 2021q2:" + implied + "; 2022 none; min lambda " +
                   num(first, 4) + " -> " + num(last, 4);
    return o;
}

Outcome property_suites() {
    Outcome o;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 300; ++t) {
        const auto rs = oracle::random_sheet(rng);
        const auto& bs = rs.sheet;
        const auto idf = t % 2 ? InverseDemand::exponential(bs.p, rs.b) : InverseDemand::linear(bs.p, rs.b);
        // Phi monotone.
        for (int k = 0; k < 5; ++k) {
            ClearingPoint a{bs.L_U * u(rng), bs.marketable() * u(rng)};
            ClearingPoint b{a.w + (bs.L_U - a.w) * u(rng), a.gamma + (bs.marketable() - a.gamma) * u(rng)};
            const auto pa = phi(bs, idf, rs.lambda_max, a), pb = phi(bs, idf, rs.lambda_max, b);
            if (pa.w > pb.w + 1e-9 || pa.gamma > pb.gamma + 1e-9) o.fail("Phi not monotone");
        }
        // Picard iterates non-decreasing.
        ClearingPoint cur{0, 0};
        for (int it = 0; it < 100; ++it) {
            const auto next = phi(bs, idf, rs.lambda_max, cur);
            if (next.w < cur.w - 1e-12 || next.gamma < cur.gamma - 1e-12) o.fail("Picard decreased");
            cur = next;
        }
        // Insolvency persists as gamma grows.
        bool insolvent = false;
        for (int i = 0; i <= 200; ++i) {
            const double g = std::min(bs.marketable() * i / 200, bs.marketable());
            const bool now = check_solvency(bs, idf, g) == Solvency::Insolvent;
            if (insolvent && !now) o.fail("insolvency not monotone in gamma");
            insolvent = insolvent || now;
        }
        // Realized leverage pinned on partial runs.
        const auto r = clear_algorithm(bs, idf, rs.lambda_max);
        if ((r.step == ClearingStep::PartialRunAfs || r.step == ClearingStep::PartialRunRemark) &&
            std::abs(r.realized.leverage - rs.lambda_max) > 1e-8)
            o.fail("realized leverage " + num(r.realized.leverage) + " vs " + num(rs.lambda_max));
        // Increasing / non-increasing maps on an admissible curve.
        const double keep = 1.0 - 1.0 / rs.lambda_max;
        const double total = bs.marketable();
        double prev_inc = -1e300, prev_non = 1e300;
        for (int i = 0; i <= 200 && check_admissible(idf, total, rs.lambda_max); ++i) {
            const double q = std::min(total * i / 200, total);
            const double inc = idf.proceeds(q) + keep * (total - q) * idf.price(q);
            const double non = idf.proceeds(q) + (total - q) * idf.price(q);
            if (!(inc > prev_inc) || non > prev_non + 1e-9) o.fail("increasing/non-increasing maps");
            prev_inc = inc;
            prev_non = non;
        }
    }
#ifdef BANKRUN_HAVE_CLI
    const std::vector<std::string> args{"bankrun", "--records", BANKRUN_SVB_CSV, "--format", "csv",
                                        "sweep", "--lambda", "6.5,7.0,7.5,8.0,8.5", "--impact",
                                        "linear:p=1,b=0.0005", "--impact", "exponential:b=0.001",
                                        "--transform", "baseline", "--transform", "realize-ugl"};
    std::string first;
    for (int rep = 0; rep < 3; ++rep) {
        std::ostringstream out, err;
        auto a = args;
        if (rep == 2) {
            a.push_back("--threads");
            a.push_back("4");
        }
        if (cli::run_cli(a, out, err) != 0) o.fail("CLI sweep failed: " + err.str());
        if (rep == 0) first = out.str();
        else if (out.str() != first) o.fail("CLI re-run output differs");
    }
    if (o.pass) o.detail = "300 seeded sheets; CLI re-runs byte-identical (" +
                           std::to_string(first.size()) + " bytes)";
#else
    o.fail("CLI not built");
#endif
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
        double budget_s;
    };
    const std::vector<Criterion> all{
        {1, "implied leverage column", implied_leverage_column, 1.0},
        {2, "calibration identity", calibration_identity, 1.0},
        {3, "algorithm vs fixed point", oracle_equivalence, 30.0},
        {4, "hand-verifiable equilibria", hand_equilibria, 0.0},
        {5, "qualitative sweep claims", qualitative_sweeps, 0.0},
        {6, "closed-form HtM vs oracle", closed_form_vs_oracle, 60.0},
        {7, "implied shock and minimal lambda", htm_inferences, 0.0},
        {8, "property suites", property_suites, 0.0},
    };
    int failures = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0.0 && secs > c.budget_s)
            o.fail("took " + num(secs, 3) + " s, budget " + num(c.budget_s) + " s");
        failures += !o.pass;
        std::printf("%s %d %s: %s [%.3f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs);
    }
    return failures;
}
