#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sparsagg::io {

/// Header plus numeric body of a comma-separated file.
struct NumericCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column index by header name, or -1.
  int column(std::string_view name) const;
  Eigen::MatrixXd matrix() const;
};

/// Splits one RFC-4180 record (double-quoted fields may contain commas).
std::vector<std::string> split_record(std::string_view line);

std::vector<std::vector<std::string>> read_records(const std::filesystem::path& path);
NumericCsv read_numeric(const std::filesystem::path& path);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

/// Shortest round-trip decimal form, independent of locale.
std::string format_double(double value);

/// Writes via a temporary sibling and rename so readers never see a
/// truncated file.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

/// `key=value` lines; blank lines and `#` comments skipped.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

std::string matrix_csv(const Eigen::MatrixXd& m);

}  // namespace sparsagg::io
