#include "vmfexp/table.hpp"

#include <charconv>
#include <cmath>
#include <json.hpp>

#include "vmfexp/errors.hpp"

namespace vmfexp {

namespace {

std::string quote_csv(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + '"';
}

std::string cell_text(const Cell& cell) {
    struct Visitor {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(std::int64_t x) const { return std::to_string(x); }
        std::string operator()(std::uint64_t x) const { return std::to_string(x); }
        std::string operator()(double x) const { return format_number(x); }
        std::string operator()(const std::string& x) const { return x; }
    };
    return std::visit(Visitor{}, cell);
}

nlohmann::ordered_json cell_json(const Cell& cell) {
    struct Visitor {
        nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
        nlohmann::ordered_json operator()(std::int64_t x) const { return x; }
        nlohmann::ordered_json operator()(std::uint64_t x) const { return x; }
        nlohmann::ordered_json operator()(double x) const {
            if (!std::isfinite(x)) return nullptr;
            return x;
        }
        nlohmann::ordered_json operator()(const std::string& x) const { return x; }
    };
    return std::visit(Visitor{}, cell);
}

void check_shape(const Table& table) {
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw DomainError("table: row width differs from header");
    }
}

}  // namespace

std::string format_number(double x) {
    if (!std::isfinite(x)) return "";
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, end);
}

void write_csv(std::ostream& out, const Table& table) {
    check_shape(table);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c ? "," : "") << quote_csv(table.columns[c]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << quote_csv(cell_text(row[c]));
        out << '\n';
    }
}

void write_json(std::ostream& out, const Table& table) {
    check_shape(table);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) obj[table.columns[c]] = cell_json(row[c]);
        rows.push_back(std::move(obj));
    }
    out << rows.dump(2) << '\n';
}

void write_table(std::ostream& out, const Table& table, OutputFormat format) {
    if (format == OutputFormat::csv) {
        write_csv(out, table);
    } else {
        write_json(out, table);
    }
}

}  // namespace vmfexp
