#include "simco/matrix.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace simco {

void save_mtx(const std::string& path, const Matrix& a) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_mtx: cannot open " + path);
  out << a.rows() << ' ' << a.cols() << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out << ' ';
      out << a(i, j);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("save_mtx: write failed for " + path);
}

Matrix load_mtx(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_mtx: cannot open " + path);
  Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    throw std::runtime_error("load_mtx: bad header in " + path);
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (!(in >> a(i, j)))
        throw std::runtime_error("load_mtx: truncated data in " + path);
  check_finite(a, "load_mtx");
  return a;
}

}  // namespace simco
