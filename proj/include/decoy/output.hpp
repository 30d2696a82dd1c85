#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace decoy {

enum class OutputFormat { table, json, csv };

/// Parses "table" | "json" | "csv"; throws std::invalid_argument otherwise.
OutputFormat parse_output_format(std::string_view text);

/// Shortest-free fixed form for machine output: 17 significant digits,
/// locale independent.
std::string format_machine(double value);

/// Four significant digits for human-readable tables.
std::string format_human(double value);

enum class ColumnKind {
    number,    // plain value
    fraction,  // shown as a percentage in human tables
    text,
    flag,
};

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::number;
};

using Cell = std::variant<std::monostate, double, std::string, bool>;

/// Rows of cells with named, typed columns; rendered as an aligned text
/// table, CSV with a header row, or a JSON array of objects.
struct Tabular {
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

void write_csv(const Tabular& table, std::ostream& out);
void write_text_table(const Tabular& table, std::ostream& out);
void write_json(const Tabular& table, std::ostream& out);
void render(const Tabular& table, OutputFormat format, std::ostream& out);

/// Splits one CSV record written by write_csv (no quoting is ever emitted).
std::vector<std::string> split_csv_record(std::string_view line);

}  // namespace decoy
