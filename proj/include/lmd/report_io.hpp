#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lmd {

/// "%.17g"; non-finite values print as nan / inf / -inf.
std::string format_double(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

/// Column-oriented CSV table; doubles use format_double.
class CsvTable {
public:
    using Cell = std::variant<double, std::int64_t, std::string>;

    explicit CsvTable(std::vector<std::string> columns);

    /// Throws std::invalid_argument when the row width differs from the header.
    void add_row(std::vector<Cell> row);

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

/// Writes through a temporary file and rename, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::string read_text_file(const std::filesystem::path& path);

/// Identifier of the build, fixed at configure time.
std::string_view build_id();

/// Version tag of the numerical schemes; bumped whenever payloads change.
inline constexpr std::string_view kSchemeVersion = "lmd-schemes/1";

}  // namespace lmd
