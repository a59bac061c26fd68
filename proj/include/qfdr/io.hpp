#ifndef QFDR_IO_HPP
#define QFDR_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qfdr/protocol.hpp"

namespace qfdr {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for malformed tables or record files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Cell = std::variant<std::int64_t, double, bool, std::string>;

/// Header plus rows; the unit of CSV and JSON emission.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
    friend bool operator==(const Table&, const Table&) = default;
};

/// Doubles are printed with 17 significant digits ("%.17g").
std::string format_cell(const Cell& cell);
/// Inverse of format_cell: bool, then integer, then double, else string.
Cell parse_cell(std::string_view text);

std::string to_csv(const Table& table);
Table parse_csv(std::string_view text);
/// Array of flat records keyed by column name, in column order.
std::string to_json(const Table& table);

enum class OutputFormat { csv, json };

std::string render(const Table& table, OutputFormat format);

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed; throws IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Sample record file: '#'-prefixed key=value header lines describing the
/// protocol, readout model, seed and step tallies, then a
/// `run_index,total_work` table.
std::string format_samples(const WorkSampleSet& samples);
WorkSampleSet parse_samples(std::string_view text);

}  // namespace qfdr

#endif  // QFDR_IO_HPP
