#include "bankrun/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace bankrun {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

std::optional<double> to_double(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

double parse_number(std::string_view s, const std::string& what) {
    if (auto v = to_double(s)) return *v;
    throw std::invalid_argument("invalid number '" + std::string(s) + "' for " + what);
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

void require_fraction(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string(what) + " fraction must lie in [0,1]");
}

}  // namespace

std::vector<BankRecord> parse_records(std::istream& in) {
    std::vector<BankRecord> out;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    const auto expected = split(kRecordHeader, ',');

    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty()) continue;
        const auto cells = split(text, ',');
        if (!header_seen) {
            if (cells != expected)
                throw RecordError(std::string("header mismatch, expected '") + kRecordHeader + "'",
                                  line_no);
            header_seen = true;
            continue;
        }
        if (cells.size() != expected.size())
            throw RecordError("malformed row: expected " + std::to_string(expected.size()) +
                                  " fields, got " + std::to_string(cells.size()),
                              line_no);
        BankRecord r;
        r.period = std::string(cells[0]);
        if (r.period.empty()) throw RecordError("malformed row: empty period", line_no);
        double* fields[] = {&r.total_deposits, &r.other_funding, &r.insured_deposits, &r.capital,
                            &r.total_assets,   &r.cash,          &r.afs,
                            &r.htm,            &r.ugl_htm,       &r.ugl_afs};
        for (std::size_t i = 0; i < std::size(fields); ++i) {
            auto v = to_double(cells[i + 1]);
            if (!v)
                throw RecordError("malformed row: invalid number '" + std::string(cells[i + 1]) +
                                      "' in column " + std::string(expected[i + 1]),
                                  line_no);
            *fields[i] = *v;
        }
        if (auto bad = record_violations(r); !bad.empty())
            throw RecordError("invalid record " + r.period + ": " + bad.front(), line_no);
        out.push_back(std::move(r));
    }
    if (!header_seen || out.empty()) throw RecordError("no records", 0);
    std::stable_sort(out.begin(), out.end(),
                     [](const BankRecord& a, const BankRecord& b) { return a.period < b.period; });
    return out;
}

std::vector<BankRecord> load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RecordError("cannot open record file " + path.string(), 0);
    return parse_records(in);
}

std::vector<std::string> record_violations(const BankRecord& rec) {
    std::vector<std::string> out;
    const std::pair<const char*, double> nonneg[] = {
        {"total_deposits", rec.total_deposits}, {"other_funding", rec.other_funding},
        {"insured_deposits", rec.insured_deposits}, {"total_assets", rec.total_assets},
        {"cash", rec.cash}, {"afs", rec.afs}, {"htm", rec.htm}};
    for (const auto& [name, v] : nonneg)
        if (v < 0.0) out.push_back(std::string(name) + " must be >= 0");
    if (rec.insured_deposits > rec.total_deposits)
        out.emplace_back("insured_deposits exceeds total_deposits");
    if (rec.total_assets < rec.cash + rec.afs + rec.htm)
        out.emplace_back("total_assets below cash + afs + htm");
    return out;
}

BalanceSheet calibrate(const BankRecord& rec, CalibrationOptions opts) {
    BalanceSheet bs;
    bs.x = rec.cash;
    bs.p = 1.0;
    bs.s = rec.afs;
    bs.h = rec.htm;
    bs.ell = rec.total_assets - rec.cash - rec.afs - rec.htm;
    bs.L_U = rec.total_deposits - rec.insured_deposits;
    bs.L_I = rec.insured_deposits + rec.other_funding;
    if (opts.other_funding_runnable) {
        bs.L_U += rec.other_funding;
        bs.L_I -= rec.other_funding;
    }
    if (bs.ell < 0.0)
        throw std::invalid_argument(rec.period + ": negative nonmarketable assets");
    if (!(bs.L_U > 0.0))
        throw std::invalid_argument(rec.period + ": uninsured liabilities must be > 0");
    return bs;
}

double implied_leverage(const BankRecord& rec) {
    const double denom = rec.capital + rec.ugl_htm + rec.ugl_afs;
    return denom > 0.0 ? rec.total_assets / denom : kUnboundedLeverage;
}

Transform Transform::parse(const std::string& text) {
    const auto t = trim(text);
    const auto colon = t.find(':');
    const auto name = trim(t.substr(0, colon));
    const std::optional<std::string_view> arg =
        colon == std::string_view::npos ? std::nullopt
                                        : std::optional(trim(t.substr(colon + 1)));
    auto value = [&](const char* what) {
        if (!arg) throw std::invalid_argument(std::string("transform '") + what + "' needs a value");
        return parse_number(*arg, what);
    };
    Transform out;
    if (name == "realize-ugl") {
        if (arg) throw std::invalid_argument("transform 'realize-ugl' takes no value");
        out = realize_losses();
    } else if (name == "convert") {
        out = convert_uninsured(value("convert"));
        require_fraction(out.value, "convert");
    } else if (name == "reallocate") {
        out = reallocate_htm(value("reallocate"));
        require_fraction(out.value, "reallocate");
    } else if (name == "price") {
        out = set_price(value("price"));
        if (!(out.value > 0.0 && out.value <= 1.0))
            throw std::invalid_argument("price transform must lie in (0,1]");
    } else {
        throw std::invalid_argument("unknown transform '" + std::string(name) + "'");
    }
    return out;
}

std::string Transform::label() const {
    switch (kind) {
        case TransformKind::RealizeUnrealizedLosses: return "realize-ugl";
        case TransformKind::ConvertUninsured: return "convert:" + fmt_num(value);
        case TransformKind::ReallocateHtmToAfs: return "reallocate:" + fmt_num(value);
        case TransformKind::SetInitialPrice: return "price:" + fmt_num(value);
    }
    return "unknown";
}

std::string label(const TransformChain& chain) {
    if (chain.empty()) return "baseline";
    std::string out;
    for (const auto& t : chain) {
        if (!out.empty()) out += '+';
        out += t.label();
    }
    return out;
}

TransformChain parse_chain(const std::string& text) {
    const auto t = trim(text);
    if (t.empty() || t == "baseline") return {};
    TransformChain chain;
    for (auto part : split(t, '+')) chain.push_back(Transform::parse(std::string(part)));
    return chain;
}

BalanceSheet apply_transform(const BalanceSheet& bs, const BankRecord& rec, const Transform& t) {
    BalanceSheet out = bs;
    switch (t.kind) {
        case TransformKind::RealizeUnrealizedLosses:
            out.h = bs.h + rec.ugl_htm;
            out.s = bs.s + rec.ugl_afs / bs.p;
            break;
        case TransformKind::ConvertUninsured:
            require_fraction(t.value, "convert");
            out.L_U = (1.0 - t.value) * bs.L_U;
            out.L_I = bs.L_I + t.value * bs.L_U;
            break;
        case TransformKind::ReallocateHtmToAfs:
            require_fraction(t.value, "reallocate");
            out.h = (1.0 - t.value) * bs.h;
            out.s = bs.s + t.value * bs.h / bs.p;
            break;
        case TransformKind::SetInitialPrice:
            if (!(t.value > 0.0 && t.value <= 1.0))
                throw std::invalid_argument("price transform must lie in (0,1]");
            out.p = t.value;
            break;
    }
    for (double v : {out.x, out.s, out.h, out.ell, out.L_I, out.L_U})
        if (v < 0.0)
            throw std::invalid_argument(rec.period + ": transform " + t.label() +
                                        " makes a balance sheet field negative");
    return out;
}

BalanceSheet apply_chain(const BalanceSheet& bs, const BankRecord& rec,
                         const TransformChain& chain) {
    BalanceSheet out = bs;
    for (const auto& t : chain) out = apply_transform(out, rec, t);
    return out;
}

ImpactSpec ImpactSpec::parse(const std::string& text) {
    const auto t = trim(text);
    const auto colon = t.find(':');
    const auto name = trim(t.substr(0, colon));
    ImpactSpec spec;
    if (name == "linear")
        spec.kind = ImpactKind::Linear;
    else if (name == "exponential" || name == "exp")
        spec.kind = ImpactKind::Exponential;
    else
        throw std::invalid_argument("unknown impact kind '" + std::string(name) + "'");
    bool has_b = false;
    if (colon != std::string_view::npos) {
        for (auto kv : split(t.substr(colon + 1), ',')) {
            if (kv.empty()) continue;
            const auto eq = kv.find('=');
            if (eq == std::string_view::npos)
                throw std::invalid_argument("impact parameter '" + std::string(kv) +
                                            "' must be key=value");
            const auto key = trim(kv.substr(0, eq));
            const double v = parse_number(trim(kv.substr(eq + 1)), std::string(key));
            if (key == "b") {
                if (!(v >= 0.0)) throw std::invalid_argument("impact b must be >= 0");
                spec.b = v;
                has_b = true;
            } else if (key == "p") {
                if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("impact p must lie in (0,1]");
                spec.price = v;
            } else {
                throw std::invalid_argument("unknown impact parameter '" + std::string(key) + "'");
            }
        }
    }
    if (!has_b) throw std::invalid_argument("impact spec needs b=<elasticity>");
    return spec;
}

std::string ImpactSpec::label() const {
    std::string out = to_string(kind) + ":";
    if (price) out += "p=" + fmt_num(*price) + ",";
    return out + "b=" + fmt_num(b);
}

InverseDemand ImpactSpec::curve_for(const BalanceSheet& bs) const {
    const double p = price.value_or(bs.p);
    return kind == ImpactKind::Exponential ? InverseDemand::exponential(p, b)
                                           : InverseDemand::linear(p, b);
}

std::vector<SweepRow> sweep(const std::vector<BankRecord>& records,
                            const std::vector<double>& lambdas,
                            const std::vector<ImpactSpec>& impacts,
                            const std::vector<TransformChain>& chains, SweepOptions opts) {
    if (records.empty() || lambdas.empty() || impacts.empty() || chains.empty())
        throw std::invalid_argument("sweep axes must not be empty");

    const std::size_t n_lam = lambdas.size(), n_imp = impacts.size(), n_ch = chains.size();
    const std::size_t cells = records.size() * n_lam * n_imp * n_ch;
    std::vector<SweepRow> rows(cells);
    std::vector<std::exception_ptr> errors(cells);

    auto evaluate = [&](std::size_t idx) {
        const std::size_t c = idx % n_ch;
        const std::size_t i = (idx / n_ch) % n_imp;
        const std::size_t l = (idx / (n_ch * n_imp)) % n_lam;
        const std::size_t r = idx / (n_ch * n_imp * n_lam);
        try {
            const auto& rec = records[r];
            auto bs = apply_chain(calibrate(rec, opts.calibration), rec, chains[c]);
            if (impacts[i].price) bs.p = *impacts[i].price;
            const auto idf = impacts[i].curve_for(bs);
            if (opts.strict_admissibility) require_admissible(bs, idf, lambdas[l]);
            rows[idx] = SweepRow{rec.period, lambdas[l], impacts[i].label(), label(chains[c]),
                                 clear_algorithm(bs, idf, lambdas[l])};
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(opts.threads, cells));
    if (workers == 1) {
        for (std::size_t idx = 0; idx < cells; ++idx) evaluate(idx);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (std::size_t idx = next++; idx < cells; idx = next++) evaluate(idx);
            });
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

}  // namespace bankrun
