#include "table.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace canard::cli {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void ResultTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw std::invalid_argument("row width does not match table header");
    rows_.push_back(std::move(row));
}

std::string ResultTable::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(columns_[i]);
    }
    out += "\r\n";
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>)
                        out += format_double(v);
                    else if constexpr (std::is_same_v<T, long long>)
                        out += std::to_string(v);
                    else
                        out += csv_escape(v);
                },
                row[i]);
        }
        out += "\r\n";
    }
    return out;
}

void ResultTable::write_csv(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << to_csv();
}

}  // namespace canard::cli
