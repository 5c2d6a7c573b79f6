#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace simco {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when an operation's input contract is violated (shape mismatch,
/// non-finite entries, invalid parameters).
class contract_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline void check_finite(const Matrix& a, const char* what) {
  if (!a.allFinite())
    throw contract_error(std::string(what) + ": non-finite entries");
}

/// MTXv1 text format: first line `rows cols`, then one row per line,
/// space-separated decimals with >= 15 significant digits.
void save_mtx(const std::string& path, const Matrix& a);
Matrix load_mtx(const std::string& path);

}  // namespace simco
