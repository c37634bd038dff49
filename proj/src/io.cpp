#include "rogsure/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rogsure/rng.hpp"

namespace rogsure {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_real(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::string location(const std::filesystem::path& path, std::size_t row, std::size_t col) {
  return path.string() + ": row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace

Matrix load_matrix_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) {
    throw FormatError(path.string() + ": empty file");
  }
  std::size_t first = 0;
  {
    double v = 0.0;
    const auto cells = split_commas(lines.front());
    const bool numeric =
        std::all_of(cells.begin(), cells.end(), [&](const std::string& c) { return parse_real(c, v); });
    if (!numeric) first = 1;
  }
  if (first >= lines.size()) {
    throw FormatError(path.string() + ": header but no data rows");
  }

  const std::size_t rows = lines.size() - first;
  std::size_t cols = 0;
  Matrix out;
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto cells = split_commas(lines[r]);
    if (r == first) {
      cols = cells.size();
      out.resize(static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(rows));
    } else if (cells.size() != cols) {
      throw FormatError(location(path, r + 1, std::min(cells.size(), cols) + 1) + ": expected " +
                        std::to_string(cols) + " values, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_real(cells[c], v)) {
        throw FormatError(location(path, r + 1, c + 1) + ": not a number: '" + cells[c] + "'");
      }
      if (!std::isfinite(v)) {
        throw FormatError(location(path, r + 1, c + 1) + ": non-finite value");
      }
      out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r - first)) = v;
    }
  }
  return out;
}

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) {
    throw std::runtime_error("format_real: conversion failed");
  }
  return std::string(buf, ptr);
}

void save_matrix_csv(const std::filesystem::path& path, const Matrix& x) {
  std::string text;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (i > 0) text += ',';
      text += format_real(x(i, j));
    }
    text += '\n';
  }
  write_text(path, text);
}

std::vector<int> load_labels(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::vector<int> labels;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const std::string cell = trim(lines[r]);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw FormatError(location(path, r + 1, 1) + ": not an integer label: '" + cell + "'");
    }
    labels.push_back(v);
  }
  if (labels.empty()) {
    throw FormatError(path.string() + ": empty file");
  }
  return labels;
}

void save_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::string text;
  for (int l : labels) {
    text += std::to_string(l);
    text += '\n';
  }
  write_text(path, text);
}

void Report::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Report::set(const std::string& key, const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) s += ',';
    s += format_real(values[i]);
  }
  set(key, s);
}

void Report::set(const std::string& key, const std::vector<int>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) s += ',';
    s += std::to_string(values[i]);
  }
  set(key, s);
}

std::string Report::text() const {
  std::string s;
  for (const auto& [k, v] : entries_) {
    s += k;
    s += " = ";
    s += v;
    s += '\n';
  }
  return s;
}

void Report::write(const std::filesystem::path& path) const { write_text(path, text()); }

std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                    const std::string& source) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      throw FormatError(source + ":" + std::to_string(lineno) + ": empty key");
    }
    if (!out.emplace(key, value).second) {
      throw FormatError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

std::map<std::string, std::string> load_key_values(const std::filesystem::path& path) {
  return parse_key_values(read_text(path), path.string());
}

void render_heatmap(const Matrix& w, const std::filesystem::path& path, int cell_px) {
  if (cell_px < 1) {
    throw InvalidArgument("render_heatmap: cell size must be positive");
  }
  const double top = w.size() > 0 ? w.cwiseAbs().maxCoeff() : 0.0;
  std::ostringstream svg;
  const auto width = w.cols() * cell_px;
  const auto height = w.rows() * cell_px;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" shape-rendering=\"crispEdges\">\n";
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double level = top > 0.0 ? std::abs(w(i, j)) / top : 0.0;
      const int gray = static_cast<int>(std::lround(255.0 * (1.0 - level)));
      svg << "<rect x=\"" << j * cell_px << "\" y=\"" << i * cell_px << "\" width=\"" << cell_px
          << "\" height=\"" << cell_px << "\" fill=\"rgb(" << gray << ',' << gray << ',' << gray
          << ")\"/>\n";
    }
  }
  svg << "</svg>\n";
  write_text(path, svg.str());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw FormatError("write failed for " + path.string());
  }
}

std::uint64_t file_checksum(const std::filesystem::path& path) { return fnv1a(read_text(path)); }

}  // namespace rogsure
