#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace bankrun::cli {

enum class Format { Table, Csv, Json };

inline std::string fmt6(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Cell {
    std::string text;
    nlohmann::ordered_json value;
    bool numeric = false;

    Cell() : text(""), value(nullptr) {}
    Cell(const char* s) : text(s), value(s) {}
    Cell(std::string s) : text(s), value(std::move(s)) {}
    Cell(int v) : text(std::to_string(v)), value(v), numeric(true) {}
    Cell(bool v) : text(v ? "true" : "false"), value(v) {}
    Cell(double v) : text(fmt6(v)), numeric(true) {
        // Round-trip through the printed form so every format carries the same digits.
        if (std::isfinite(v))
            value = std::stod(text);
        else
            value = nullptr;
    }
    Cell(std::optional<double> v) : Cell() {
        if (v) *this = Cell(*v);
        else text = "none";
    }
};

class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add(std::vector<Cell> row) { rows_.push_back(std::move(row)); }
    [[nodiscard]] std::size_t size() const { return rows_.size(); }

    void write(std::ostream& os, Format f) const {
        switch (f) {
            case Format::Table: write_text(os); break;
            case Format::Csv: write_csv(os); break;
            case Format::Json: write_json(os); break;
        }
    }

private:
    static std::string csv_field(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }

    void write_csv(std::ostream& os) const {
        for (std::size_t i = 0; i < columns_.size(); ++i)
            os << (i ? "," : "") << columns_[i];
        os << '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i].text);
            os << '\n';
        }
    }

    void write_text(std::ostream& os) const {
        std::vector<std::size_t> width(columns_.size());
        for (std::size_t i = 0; i < columns_.size(); ++i) width[i] = columns_[i].size();
        for (const auto& row : rows_)
            for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].text.size());
        auto pad = [&](const std::string& s, std::size_t i, bool right) {
            const std::string fill(width[i] - s.size(), ' ');
            os << (i ? "  " : "") << (right ? fill + s : s + (i + 1 < width.size() ? fill : ""));
        };
        for (std::size_t i = 0; i < columns_.size(); ++i) pad(columns_[i], i, false);
        os << '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) pad(row[i].text, i, row[i].numeric);
            os << '\n';
        }
    }

    void write_json(std::ostream& os) const {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& row : rows_) {
            nlohmann::ordered_json obj = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < row.size(); ++i) obj[columns_[i]] = row[i].value;
            arr.push_back(std::move(obj));
        }
        os << arr.dump(2) << '\n';
    }

    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace bankrun::cli
