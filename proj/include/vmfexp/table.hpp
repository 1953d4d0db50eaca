#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace vmfexp {

/// Empty, integer, real or text. Empty cells are blank in CSV and null in JSON.
using Cell = std::variant<std::monostate, std::int64_t, std::uint64_t, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

enum class OutputFormat { csv, json };

/// Shortest decimal that reads back to the same double; non-finite values give "".
std::string format_number(double x);

/// RFC 4180 with LF line ends; fields are quoted only when they need it.
void write_csv(std::ostream& out, const Table& table);

/// A JSON array with one object per row, keys in column order.
void write_json(std::ostream& out, const Table& table);

void write_table(std::ostream& out, const Table& table, OutputFormat format);

}  // namespace vmfexp
