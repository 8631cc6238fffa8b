#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bankrun/balance_sheet.hpp"
#include "bankrun/clearing.hpp"
#include "bankrun/market_impact.hpp"

namespace bankrun {

/// One quarterly row of reported financials, USD bn. Unrealized gains/losses are signed
/// (losses negative).
struct BankRecord {
    std::string period;
    double total_deposits = 0.0;
    double other_funding = 0.0;
    double insured_deposits = 0.0;
    double capital = 0.0;
    double total_assets = 0.0;
    double cash = 0.0;
    double afs = 0.0;
    double htm = 0.0;
    double ugl_htm = 0.0;
    double ugl_afs = 0.0;
};

inline constexpr const char* kRecordHeader =
    "period,total_deposits,other_funding,insured_deposits,capital,total_assets,cash,afs,htm,"
    "ugl_htm,ugl_afs";

class RecordError : public std::runtime_error {
public:
    RecordError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Parses a record file (header row + one row per quarter). Records come back sorted by
/// period. Throws RecordError with the offending line number.
std::vector<BankRecord> parse_records(std::istream& in);
std::vector<BankRecord> load_records(const std::filesystem::path& path);

/// Empty when the record satisfies its invariants.
std::vector<std::string> record_violations(const BankRecord& rec);

struct CalibrationOptions {
    bool other_funding_runnable = false;  // classify other funding as uninsured
};

BalanceSheet calibrate(const BankRecord& rec, CalibrationOptions opts = {});

/// total_assets / (capital + ugl_htm + ugl_afs); kUnboundedLeverage when the denominator
/// is not positive.
double implied_leverage(const BankRecord& rec);

enum class TransformKind { RealizeUnrealizedLosses, ConvertUninsured, ReallocateHtmToAfs,
                           SetInitialPrice };

struct Transform {
    TransformKind kind = TransformKind::RealizeUnrealizedLosses;
    double value = 0.0;  // fraction in [0,1] or the new price in (0,1]

    static Transform realize_losses() { return {TransformKind::RealizeUnrealizedLosses, 0.0}; }
    static Transform convert_uninsured(double fraction) {
        return {TransformKind::ConvertUninsured, fraction};
    }
    static Transform reallocate_htm(double fraction) {
        return {TransformKind::ReallocateHtmToAfs, fraction};
    }
    static Transform set_price(double p) { return {TransformKind::SetInitialPrice, p}; }

    /// Parses "realize-ugl", "convert:0.4", "reallocate:0.2", "price:0.95".
    static Transform parse(const std::string& text);
    [[nodiscard]] std::string label() const;
};

using TransformChain = std::vector<Transform>;

std::string label(const TransformChain& chain);
/// Parses '+'-joined transforms; "baseline" or "" is the empty chain.
TransformChain parse_chain(const std::string& text);

BalanceSheet apply_transform(const BalanceSheet& bs, const BankRecord& rec, const Transform& t);
BalanceSheet apply_chain(const BalanceSheet& bs, const BankRecord& rec,
                         const TransformChain& chain);

/// Impact curve parameters independent of any particular sheet. The initial price comes
/// from the sheet unless `price` is set, in which case it overrides the sheet price.
struct ImpactSpec {
    ImpactKind kind = ImpactKind::Linear;
    double b = 0.0;
    std::optional<double> price;

    /// Parses "linear:p=1,b=0.0005" or "exponential:b=0.01" (p optional).
    static ImpactSpec parse(const std::string& text);
    [[nodiscard]] std::string label() const;
    [[nodiscard]] InverseDemand curve_for(const BalanceSheet& bs) const;
};

struct SweepRow {
    std::string period;
    double lambda_max = 0.0;
    std::string impact;
    std::string transforms;
    ClearingResult result;
};

struct SweepOptions {
    CalibrationOptions calibration;
    bool strict_admissibility = false;
    unsigned threads = 1;
};

/// Clears every (record x lambda x impact x transform chain) cell. Row order is the
/// nested axis order regardless of how many threads evaluate cells.
std::vector<SweepRow> sweep(const std::vector<BankRecord>& records,
                            const std::vector<double>& lambdas,
                            const std::vector<ImpactSpec>& impacts,
                            const std::vector<TransformChain>& chains, SweepOptions opts = {});

}  // namespace bankrun
