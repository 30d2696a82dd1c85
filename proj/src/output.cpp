#include "decoy/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include "json.hpp"

namespace decoy {

namespace {

std::string machine_cell(const Cell& cell) {
    if (std::holds_alternative<double>(cell)) return format_machine(std::get<double>(cell));
    if (std::holds_alternative<std::string>(cell)) return std::get<std::string>(cell);
    if (std::holds_alternative<bool>(cell)) return std::get<bool>(cell) ? "true" : "false";
    return "";
}

std::string human_cell(const Cell& cell, ColumnKind kind) {
    if (std::holds_alternative<double>(cell)) {
        const double v = std::get<double>(cell);
        if (kind == ColumnKind::fraction) return format_human(100.0 * v) + "%";
        return format_human(v);
    }
    if (std::holds_alternative<bool>(cell)) return std::get<bool>(cell) ? "yes" : "no";
    if (std::holds_alternative<std::string>(cell)) return std::get<std::string>(cell);
    return "-";
}

}  // namespace

OutputFormat parse_output_format(std::string_view text) {
    if (text == "table") return OutputFormat::table;
    if (text == "json") return OutputFormat::json;
    if (text == "csv") return OutputFormat::csv;
    throw std::invalid_argument("unknown output format '" + std::string(text) + "' (table|json|csv)");
}

std::string format_machine(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string format_human(double value) { return fmt::format("{:.4g}", value); }

void Tabular::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("Tabular: row width does not match columns");
    rows.push_back(std::move(row));
}

void write_csv(const Tabular& table, std::ostream& out) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << table.columns[i].name;
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << machine_cell(row[i]);
        out << '\n';
    }
}

void write_text_table(const Tabular& table, std::ostream& out) {
    const std::size_t ncol = table.columns.size();
    std::vector<std::vector<std::string>> text;
    std::vector<std::size_t> width(ncol, 0);
    for (std::size_t i = 0; i < ncol; ++i) width[i] = table.columns[i].name.size();
    for (const auto& row : table.rows) {
        auto& line = text.emplace_back();
        for (std::size_t i = 0; i < ncol; ++i) {
            line.push_back(human_cell(row[i], table.columns[i].kind));
            width[i] = std::max(width[i], line.back().size());
        }
    }
    auto emit = [&](auto cell_at) {
        for (std::size_t i = 0; i < ncol; ++i) {
            const std::string s = cell_at(i);
            out << (i ? "  " : "") << s << std::string(width[i] - s.size(), ' ');
        }
        out << '\n';
    };
    emit([&](std::size_t i) { return table.columns[i].name; });
    emit([&](std::size_t i) { return std::string(width[i], '-'); });
    for (const auto& line : text) emit([&](std::size_t i) { return line[i]; });
}

void write_json(const Tabular& table, std::ostream& out) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size(); ++i) {
            const auto& name = table.columns[i].name;
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::monostate>) {
                        obj[name] = nullptr;
                    } else {
                        obj[name] = v;
                    }
                },
                row[i]);
        }
        rows.push_back(std::move(obj));
    }
    out << rows.dump(2) << '\n';
}

void render(const Tabular& table, OutputFormat format, std::ostream& out) {
    switch (format) {
        case OutputFormat::table: write_text_table(table, out); break;
        case OutputFormat::json: write_json(table, out); break;
        case OutputFormat::csv: write_csv(table, out); break;
    }
}

std::vector<std::string> split_csv_record(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace decoy
