#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rogsure/linalg.hpp"

namespace rogsure {

/// Malformed or unreadable input files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a CSV file with one observation per row and returns it transposed, so
/// observations become columns. A first line that does not parse as numbers
/// is treated as a header and skipped.
Matrix load_matrix_csv(const std::filesystem::path& path);

/// Inverse of load_matrix_csv: one row per column of `x`, 17 significant
/// digits, LF line endings, no header.
void save_matrix_csv(const std::filesystem::path& path, const Matrix& x);

/// One integer per line.
std::vector<int> load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const std::vector<int>& labels);

/// Shortest text that reads back to the same double.
std::string format_real(double v);

/// Flat key-value text with stable insertion order, written as `key = value`.
class Report {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value) { set(key, format_real(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
  void set(const std::string& key, const std::vector<double>& values);
  void set(const std::string& key, const std::vector<int>& values);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string text() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
/// Duplicate keys are rejected.
std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                    const std::string& source = "<text>");
std::map<std::string, std::string> load_key_values(const std::filesystem::path& path);

/// Grayscale SVG with one cell per entry, darkness proportional to |entry|
/// over the largest magnitude. A zero matrix renders white.
void render_heatmap(const Matrix& w, const std::filesystem::path& path, int cell_px = 4);

/// 64-bit FNV-1a of the file bytes.
std::uint64_t file_checksum(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace rogsure
