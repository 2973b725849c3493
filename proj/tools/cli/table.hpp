#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace canard::cli {

using Cell = std::variant<double, long long, std::string>;

/// Column-typed rows written as RFC 4180 CSV with %.17g numbers.
class ResultTable {
public:
    explicit ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    /// @throws std::invalid_argument if the row width differs from the header
    void add_row(std::vector<Cell> row);

    [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }
    [[nodiscard]] std::size_t rows() const { return rows_.size(); }
    [[nodiscard]] std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

[[nodiscard]] std::string format_double(double x);
[[nodiscard]] std::string csv_escape(const std::string& s);

}  // namespace canard::cli
