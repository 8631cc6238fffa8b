#include "bankrun/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "bankrun/clearing.hpp"
#include "bankrun/htm_optimizer.hpp"
#include "bankrun/scenario.hpp"
#include "table.hpp"

namespace bankrun::cli {

namespace {

const std::vector<std::string> kRowColumns{"period", "lambda_max", "impact", "transforms",
                                           "w", "gamma", "step", "liquidity",
                                           "solvency", "realized_leverage"};

struct Common {
    std::string records;
    std::string format = "table";
    bool strict = false;
    bool other_funding_runnable = false;
    std::vector<std::string> periods;
};

// Explicit balance sheet given on the command line instead of a record file.
struct SheetFlags {
    std::optional<double> x, s, h, ell, li, lu;
    double p = 1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--cash", x, "cash x");
        cmd->add_option("--afs", s, "AfS units s");
        cmd->add_option("--htm", h, "HtM units h");
        cmd->add_option("--ell", ell, "nonmarketable assets");
        cmd->add_option("--price", p, "initial AfS price p")->capture_default_str();
        cmd->add_option("--insured", li, "insured liabilities L_I");
        cmd->add_option("--uninsured", lu, "uninsured liabilities L_U");
    }

    [[nodiscard]] bool given() const { return x || s || h || ell || li || lu; }

    [[nodiscard]] BalanceSheet sheet() const {
        if (!(x && s && h && ell && li && lu))
            throw std::invalid_argument("explicit sheet needs --cash --afs --htm --ell --insured --uninsured");
        BalanceSheet bs{*x, *s, *h, *ell, p, *li, *lu};
        require_valid(bs);
        return bs;
    }
};

struct Case {
    std::string period;
    BalanceSheet sheet;
    std::optional<BankRecord> record;
};

Format format_of(const std::string& f) {
    if (f == "csv") return Format::Csv;
    if (f == "json") return Format::Json;
    return Format::Table;
}

std::vector<BankRecord> load(const Common& c) {
    if (c.records.empty())
        throw std::invalid_argument("no record file (use --records or BANKRUN_RECORDS)");
    auto recs = load_records(c.records);
    if (c.periods.empty()) return recs;
    std::vector<BankRecord> kept;
    for (const auto& p : c.periods) {
        auto it = std::find_if(recs.begin(), recs.end(), [&](const auto& r) { return r.period == p; });
        if (it == recs.end()) throw std::invalid_argument("unknown period " + p);
        kept.push_back(*it);
    }
    return kept;
}

std::vector<Case> cases(const Common& c, const SheetFlags& flags) {
    if (flags.given()) return {{"custom", flags.sheet(), std::nullopt}};
    std::vector<Case> out;
    const CalibrationOptions opts{c.other_funding_runnable};
    for (const auto& rec : load(c)) out.push_back({rec.period, calibrate(rec, opts), rec});
    return out;
}

std::vector<Cell> result_row(const std::string& period, double lambda, const std::string& impact,
                             const std::string& transforms, const ClearingResult& r) {
    return {period, lambda, impact, transforms, r.w, r.gamma, step_number(r.step),
            to_string(r.liquidity), to_string(r.solvency), r.realized.leverage};
}

void warn(std::ostream& err, std::set<std::string>& seen, const std::string& msg) {
    if (seen.insert(msg).second) err << "warning: " << msg << '\n';
}

// ---- validate -----------------------------------------------------------------------------

struct ValidateCmd {
    SheetFlags sheet;
    std::vector<double> lambdas;
    std::vector<std::string> impacts;

    int run(const Common& c, std::ostream& out, std::ostream& err) const {
        Table t({"period", "lambda_max", "impact", "assets", "equity", "leverage",
                 "implied_leverage", "admissible", "detail"});
        bool failed = false;
        std::vector<ImpactSpec> specs;
        for (const auto& s : impacts) specs.push_back(ImpactSpec::parse(s));
        for (const auto& cs : cases(c, sheet)) {
            const auto v = validate(cs.sheet);
            const auto tot = totals(cs.sheet);
            const Cell implied =
                cs.record ? Cell(implied_leverage(*cs.record)) : Cell(std::optional<double>{});
            if (v.nonpositive_equity) err << "warning: " << cs.period << ": equity <= 0\n";
            if (lambdas.empty() || specs.empty()) {
                t.add({cs.period, Cell(), Cell(), tot.assets, tot.equity, tot.leverage, implied,
                       Cell(), ""});
                continue;
            }
            for (double lam : lambdas)
                for (const auto& spec : specs) {
                    auto bs = cs.sheet;
                    if (spec.price) bs.p = *spec.price;
                    const auto adm = check_admissible(spec.curve_for(bs), bs.marketable(), lam);
                    failed = failed || !adm;
                    t.add({cs.period, lam, spec.label(), tot.assets, tot.equity, tot.leverage,
                           implied, adm.admissible, adm.detail});
                }
        }
        t.write(out, format_of(c.format));
        if (failed && c.strict) {
            err << "bankrun: error: inadmissible impact parameters (strict mode)\n";
            return kInputError;
        }
        return kOk;
    }
};

// ---- clear --------------------------------------------------------------------------------

struct ClearCmd {
    SheetFlags sheet;
    double lambda = 0.0;
    std::string impact = "linear:b=0";
    std::string transforms = "baseline";
    std::string method = "algorithm";
    double tol = FixedPointOptions{}.tol;
    std::uint64_t max_iter = FixedPointOptions{}.max_iter;

    int run(const Common& c, std::ostream& out, std::ostream& err) const {
        const auto spec = ImpactSpec::parse(impact);
        const auto chain = parse_chain(transforms);
        Table t(kRowColumns);
        std::set<std::string> seen;
        for (const auto& cs : cases(c, sheet)) {
            auto bs = cs.record ? apply_chain(cs.sheet, *cs.record, chain) : cs.sheet;
            if (!chain.empty() && !cs.record)
                throw std::invalid_argument("--transform needs a record file");
            if (spec.price) bs.p = *spec.price;
            const auto idf = spec.curve_for(bs);
            if (c.strict) require_admissible(bs, idf, lambda);
            ClearingResult r;
            if (method == "fixed-point") {
                const auto fp = clear_fixed_point(bs, idf, lambda, {tol, max_iter});
                r = classify_solution(bs, idf, lambda, fp.point);
                if (!r.admissibility) r.diagnostics.push_back(r.admissibility.detail);
            } else {
                r = clear_algorithm(bs, idf, lambda);
            }
            for (const auto& d : r.diagnostics) warn(err, seen, cs.period + ": " + d);
            t.add(result_row(cs.period, lambda, spec.label(), label(chain), r));
        }
        t.write(out, format_of(c.format));
        return kOk;
    }
};

// ---- sweep --------------------------------------------------------------------------------

struct SweepCmd {
    std::vector<double> lambdas;
    std::vector<std::string> impacts;
    std::vector<std::string> transforms{"baseline"};
    unsigned threads = 1;
    std::string plot_data;
    std::string plot_value = "w";

    int run(const Common& c, std::ostream& out, std::ostream& err) const {
        std::vector<ImpactSpec> specs;
        for (const auto& s : impacts) specs.push_back(ImpactSpec::parse(s));
        std::vector<TransformChain> chains;
        for (const auto& s : transforms) chains.push_back(parse_chain(s));
        SweepOptions opts;
        opts.calibration.other_funding_runnable = c.other_funding_runnable;
        opts.strict_admissibility = c.strict;
        opts.threads = std::max(1u, threads);
        const auto rows = sweep(load(c), lambdas, specs, chains, opts);

        Table t(kRowColumns);
        std::set<std::string> seen;
        for (const auto& row : rows) {
            for (const auto& d : row.result.diagnostics)
                warn(err, seen, row.impact + " lambda_max=" + fmt6(row.lambda_max) + ": " + d);
            t.add(result_row(row.period, row.lambda_max, row.impact, row.transforms, row.result));
        }
        t.write(out, format_of(c.format));

        if (!plot_data.empty()) {
            std::ofstream f(plot_data);
            if (!f) throw std::runtime_error("cannot write " + plot_data);
            Table plot({"period", "lambda_max", "impact", "transforms", "height", "category",
                        "overlay"});
            for (const auto& row : rows) {
                const auto& r = row.result;
                std::string overlay;
                if (r.solvency == Solvency::Insolvent)
                    overlay = r.liquidity == Liquidity::Illiquid ? "insolvent-illiquid"
                                                                 : "insolvent-liquid";
                plot.add({row.period, row.lambda_max, row.impact, row.transforms,
                          plot_value == "gamma" ? r.gamma : r.w,
                          "step-" + std::to_string(step_number(r.step)), overlay});
            }
            plot.write(f, Format::Csv);
        }
        return kOk;
    }
};

// ---- optimize-htm -------------------------------------------------------------------------

struct OptimizeCmd {
    SheetFlags sheet;
    double lambda = 7.5;
    double b = 0.0005;
    std::string p1_grid = "0.9";
    std::string method = "closed-form";
    int grid = 10000;

    int run(const Common& c, std::ostream& out, std::ostream&) const {
        const auto p1s = parse_grid(p1_grid);
        Table t({"period", "lambda_max", "b", "p1", "A_bar", "s_star", "h_star", "case",
                 "binding"});
        for (const auto& cs : cases(c, sheet)) {
            const auto shell = shell_of(cs.sheet);
            for (double p1 : p1s) {
                const auto d = method == "oracle" ? optimal_htm_oracle(shell, p1, lambda, b, grid)
                                                  : optimal_htm(shell, p1, lambda, b);
                t.add({cs.period, lambda, b, p1, shell.A_bar, d.s_star, d.h_star,
                       to_string(d.case_), to_string(d.binding)});
            }
        }
        t.write(out, format_of(c.format));
        return kOk;
    }
};

// ---- implied-shock ------------------------------------------------------------------------

struct ImpliedCmd {
    SheetFlags sheet;
    double lambda = 6.5;
    double b = 0.0005;
    std::string p1_grid = "0.50:0.99:0.01";
    bool profile = false;

    int run(const Common& c, std::ostream& out, std::ostream& err) const {
        const auto grid = parse_grid(p1_grid);
        Table summary({"period", "lambda_max", "b", "observed_h", "implied_p1", "monotone"});
        Table prof({"period", "lambda_max", "b", "p1", "h_star", "observed_h"});
        for (const auto& cs : cases(c, sheet)) {
            const auto shell = shell_of(cs.sheet);
            const auto res = implied_shock(shell, cs.sheet.h, lambda, b, grid);
            if (!res.monotone)
                err << "warning: " << cs.period << ": h* not monotone in p1 over the grid\n";
            summary.add({cs.period, lambda, b, cs.sheet.h, res.p1, res.monotone});
            for (const auto& [p1, h] : res.profile)
                prof.add({cs.period, lambda, b, p1, h, cs.sheet.h});
        }
        (profile ? prof : summary).write(out, format_of(c.format));
        return kOk;
    }
};

// ---- min-lambda ---------------------------------------------------------------------------

struct MinLambdaCmd {
    SheetFlags sheet;

    int run(const Common& c, std::ostream& out, std::ostream&) const {
        Table t({"period", "A_bar", "min_lambda"});
        for (const auto& cs : cases(c, sheet)) {
            const auto shell = shell_of(cs.sheet);
            t.add({cs.period, shell.A_bar, min_lambda_no_sale(shell)});
        }
        t.write(out, format_of(c.format));
        return kOk;
    }
};

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
    auto num = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw std::invalid_argument("bad grid value '" + s + "'");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw std::invalid_argument("grid range must be lo:hi:step");
        const double lo = num(parts[0]), hi = num(parts[1]), step = num(parts[2]);
        if (!(step > 0.0) || hi < lo) throw std::invalid_argument("bad grid range " + text);
        const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
        for (long i = 0; i <= n; ++i) out.push_back(std::round((lo + i * step) * 1e10) / 1e10);
    } else {
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ',');) out.push_back(num(p));
    }
    if (out.empty()) throw std::invalid_argument("empty grid");
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bank-run clearing and HtM designation toolkit", "bankrun"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "read options from a TOML/INI file (flags override)");

    Common common;
    app.add_option("--records", common.records, "bank record CSV")->envname("BANKRUN_RECORDS");
    app.add_option("--format", common.format, "output format")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
    app.add_flag("--strict", common.strict, "treat inadmissible impact parameters as errors");
    app.add_flag("--other-funding-runnable", common.other_funding_runnable,
                 "classify other funding as uninsured");
    app.add_option("--period", common.periods, "restrict to these periods")->delimiter(',');

    ValidateCmd validate_cmd;
    auto* v = app.add_subcommand("validate", "check records or a sheet and impact admissibility");
    validate_cmd.sheet.attach(v);
    v->add_option("--lambda", validate_cmd.lambdas, "lambda_max values")->delimiter(',');
    v->add_option("--impact", validate_cmd.impacts, "impact spec, e.g. linear:p=1,b=0.0005");

    ClearCmd clear_cmd;
    auto* cl = app.add_subcommand("clear", "clear one sheet (or every record)");
    clear_cmd.sheet.attach(cl);
    cl->add_option("--lambda", clear_cmd.lambda, "lambda_max")->required();
    cl->add_option("--impact", clear_cmd.impact, "impact spec")->capture_default_str();
    cl->add_option("--transform", clear_cmd.transforms, "transform chain")->capture_default_str();
    cl->add_option("--method", clear_cmd.method, "solver")
        ->check(CLI::IsMember({"algorithm", "fixed-point"}))
        ->capture_default_str();
    cl->add_option("--tol", clear_cmd.tol, "fixed-point tolerance")->capture_default_str();
    cl->add_option("--max-iter", clear_cmd.max_iter, "fixed-point iteration cap")
        ->capture_default_str();

    SweepCmd sweep_cmd;
    auto* sw = app.add_subcommand("sweep", "period x lambda x impact x transform grid");
    sw->add_option("--lambda", sweep_cmd.lambdas, "lambda_max values")->delimiter(',')->required();
    sw->add_option("--impact", sweep_cmd.impacts, "impact spec (repeatable)")->required();
    sw->add_option("--transform", sweep_cmd.transforms, "transform chain (repeatable)")
        ->capture_default_str();
    sw->add_option("--threads", sweep_cmd.threads, "worker threads")->capture_default_str();
    sw->add_option("--plot-data", sweep_cmd.plot_data, "write bar-chart data CSV here");
    sw->add_option("--plot-value", sweep_cmd.plot_value, "bar height")
        ->check(CLI::IsMember({"w", "gamma"}))
        ->capture_default_str();

    OptimizeCmd opt_cmd;
    auto* op = app.add_subcommand("optimize-htm", "maximal HtM designation per p1");
    opt_cmd.sheet.attach(op);
    op->add_option("--lambda", opt_cmd.lambda, "lambda_max")->capture_default_str();
    op->add_option("--b", opt_cmd.b, "linear impact elasticity")->capture_default_str();
    op->add_option("--p1-grid", opt_cmd.p1_grid, "p1 values, lo:hi:step or list")
        ->capture_default_str();
    op->add_option("--method", opt_cmd.method, "solver")
        ->check(CLI::IsMember({"closed-form", "oracle"}))
        ->capture_default_str();
    op->add_option("--grid", opt_cmd.grid, "oracle grid size")->capture_default_str();

    ImpliedCmd implied_cmd;
    auto* im = app.add_subcommand("implied-shock", "least p1 that justifies the observed HtM book");
    implied_cmd.sheet.attach(im);
    im->add_option("--lambda", implied_cmd.lambda, "lambda_max")->capture_default_str();
    im->add_option("--b", implied_cmd.b, "linear impact elasticity")->capture_default_str();
    im->add_option("--p1-grid", implied_cmd.p1_grid, "p1 values, lo:hi:step or list")
        ->capture_default_str();
    im->add_flag("--profile", implied_cmd.profile, "emit h*(p1) over the grid instead");

    MinLambdaCmd min_cmd;
    auto* ml = app.add_subcommand("min-lambda", "smallest lambda_max with no sales (all HtM)");
    min_cmd.sheet.attach(ml);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("bankrun");

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kOk;
        }
        err << "bankrun: error: " << e.what() << '\n';
        return kInputError;
    }

    try {
        if (v->parsed()) return validate_cmd.run(common, out, err);
        if (cl->parsed()) return clear_cmd.run(common, out, err);
        if (sw->parsed()) return sweep_cmd.run(common, out, err);
        if (op->parsed()) return opt_cmd.run(common, out, err);
        if (im->parsed()) return implied_cmd.run(common, out, err);
        if (ml->parsed()) return min_cmd.run(common, out, err);
    } catch (const NonConvergence& e) {
        err << "bankrun: error: " << e.what() << '\n';
        return kNonConvergence;
    } catch (const std::exception& e) {
        err << "bankrun: error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}

}  // namespace bankrun::cli
