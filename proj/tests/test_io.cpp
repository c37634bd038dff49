#include <doctest.h>

#include <filesystem>
#include <regex>

#include "oracles.hpp"
#include "rogsure/io.hpp"

using namespace rogsure;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rogsure_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string error_of(const fs::path& p) {
  try {
    load_matrix_csv(p);
  } catch (const FormatError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("load_matrix_csv: rows are observations") {
  const auto p = scratch("two.csv");
  write_text(p, "1,2\n3,4\n");
  const Matrix m = load_matrix_csv(p);
  REQUIRE(m.rows() == 2);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 0) == 2.0);
  CHECK(m(0, 1) == 3.0);
  CHECK(m(1, 1) == 4.0);
}

TEST_CASE("load_matrix_csv: header skipped, CRLF and signs accepted") {
  const auto p = scratch("header.csv");
  write_text(p, "f1,f2,f3\r\n1.5,-2e-3,+7\r\n0,0,1\r\n");
  const Matrix m = load_matrix_csv(p);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m(1, 0) == -2e-3);
  CHECK(m(2, 0) == 7.0);
}

TEST_CASE("save/load round trip is bitwise") {
  Rng rng(1);
  Matrix m = oracle::random_matrix(7, 13, rng);
  m(0, 0) = 1e-310;
  m(1, 1) = -0.0;
  m(2, 2) = 1.0 / 3.0;
  const auto p = scratch("round.csv");
  save_matrix_csv(p, m);
  const Matrix back = load_matrix_csv(p);
  REQUIRE(back.rows() == 7);
  REQUIRE(back.cols() == 13);
  for (Eigen::Index j = 0; j < 13; ++j)
    for (Eigen::Index i = 0; i < 7; ++i) CHECK(std::memcmp(&back(i, j), &m(i, j), sizeof(double)) == 0);
  const std::string text = read_text(p);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.find(",\n") == std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 13);
}

TEST_CASE("load_matrix_csv: errors carry coordinates") {
  auto p = scratch("ragged.csv");
  write_text(p, "1,2\n3\n");
  CHECK(error_of(p).find("row 2") != std::string::npos);

  p = scratch("nonnum.csv");
  write_text(p, "1,2\n3,x\n");
  const std::string msg = error_of(p);
  CHECK(msg.find("row 2, column 2") != std::string::npos);

  p = scratch("empty.csv");
  write_text(p, "");
  CHECK(error_of(p).find("empty") != std::string::npos);

  p = scratch("nan.csv");
  write_text(p, "1,nan\n");
  CHECK_FALSE(error_of(p).empty());

  CHECK_THROWS_AS(load_matrix_csv(scratch("does_not_exist.csv")), FormatError);
}

TEST_CASE("labels") {
  const auto p = scratch("labels.csv");
  save_labels(p, {0, 2, 1, 1});
  CHECK(load_labels(p) == std::vector<int>{0, 2, 1, 1});
  write_text(p, "0\nfoo\n");
  CHECK_THROWS_AS(load_labels(p), FormatError);
}

TEST_CASE("key-value text") {
  const auto kv = parse_key_values("# comment\n a = 1 \n\nb=two # trailing\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "two");
  CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n"), FormatError);
  CHECK_THROWS_AS(parse_key_values("just words\n"), FormatError);

  Report r;
  r.set("z", 1);
  r.set("a", 0.1);
  r.set("list", std::vector<int>{1, 2});
  r.set("z", 2);
  CHECK(r.text() == "z = 2\na = 0.10000000000000001\nlist = 1,2\n");
}

TEST_CASE("render_heatmap") {
  const auto p = scratch("zero.svg");
  render_heatmap(Matrix::Zero(3, 3), p);
  const std::string zero = read_text(p);
  const std::regex fill("fill=\"rgb\\((\\d+),");
  int cells = 0;
  for (auto it = std::sregex_iterator(zero.begin(), zero.end(), fill); it != std::sregex_iterator(); ++it) {
    CHECK((*it)[1] == "255");
    ++cells;
  }
  CHECK(cells == 9);

  render_heatmap(Matrix::Identity(3, 3), p, 2);
  const std::string id = read_text(p);
  CHECK(id.find("<rect x=\"0\" y=\"0\" width=\"2\" height=\"2\" fill=\"rgb(0,0,0)\"/>") != std::string::npos);
  CHECK(id.find("<rect x=\"2\" y=\"0\" width=\"2\" height=\"2\" fill=\"rgb(255,255,255)\"/>") != std::string::npos);
  CHECK(id.find("<rect x=\"4\" y=\"4\" width=\"2\" height=\"2\" fill=\"rgb(0,0,0)\"/>") != std::string::npos);
  CHECK_THROWS(render_heatmap(Matrix::Zero(1, 1), "/nonexistent_dir/x.svg"));
}

TEST_CASE("file_checksum is FNV-1a of the bytes") {
  const auto p = scratch("hash.txt");
  write_text(p, "a");
  CHECK(file_checksum(p) == 0xaf63dc4c8601ec8cULL);
}
