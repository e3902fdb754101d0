#include "kronsensus/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace kronsensus {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_matrix(std::ostream& os, const MatrixXd& m) {
  if (!m.allFinite()) throw IoError("write_matrix: matrix has non-finite entries");
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
  if (!os) throw IoError("write_matrix: stream error");
}

void write_matrix(const std::filesystem::path& path, const MatrixXd& m) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_matrix(os, m);
}

MatrixXd read_matrix(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw IoError("read_matrix: missing header");
  std::istringstream hs(header);
  long long rows = 0, cols = 0;
  std::string extra;
  if (!(hs >> rows >> cols) || (hs >> extra)) throw IoError("read_matrix: bad header '" + header + "'");
  if (rows < 1 || cols < 1) throw IoError("read_matrix: dimensions must be positive");
  if (rows > (Index{1} << 24) / cols) throw IoError("read_matrix: matrix too large");
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("read_matrix: expected " + std::to_string(rows) + " rows");
    const char* p = line.data();
    const char* end = p + line.size();
    for (Index j = 0; j < cols; ++j) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      double v = 0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw IoError("read_matrix: row " + std::to_string(i) + " column " + std::to_string(j) +
                      " is not a number");
      }
      if (!std::isfinite(v)) throw IoError("read_matrix: non-finite entry");
      m(i, j) = v;
      p = res.ptr;
    }
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p != end) throw IoError("read_matrix: row " + std::to_string(i) + " has extra values");
  }
  return m;
}

MatrixXd read_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_matrix(is);
}

}  // namespace kronsensus
