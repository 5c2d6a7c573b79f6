#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "simco/numerics.hpp"
#include "simco/rng.hpp"

using namespace simco;

namespace {

Matrix random_matrix(Index m, Index n, RngState& rng) {
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = rng.next_gaussian();
  return a;
}

}  // namespace

TEST_CASE("solve_least_squares identity") {
  Vector y(3);
  y << 1, 2, 3;
  for (LsBackend be : {LsBackend::QR, LsBackend::CG}) {
    Vector x = solve_least_squares(Matrix::Identity(3, 3), y, be);
    CHECK((x - y).norm() < 1e-12);
  }
}

TEST_CASE("solve_least_squares unit-vector projection") {
  Matrix a(2, 1);
  a << 3.0 / 5.0, 4.0 / 5.0;
  Vector y(2);
  y << 3, 4;
  Vector x = solve_least_squares(a, y);
  CHECK(x.size() == 1);
  CHECK(x(0) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("solve_least_squares random 6x3 stationarity") {
  RngState rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = random_matrix(6, 3, rng);
    Vector y = random_matrix(6, 1, rng).col(0);
    for (LsBackend be : {LsBackend::QR, LsBackend::CG}) {
      Vector x = solve_least_squares(a, y, be);
      CHECK((a.transpose() * (y - a * x)).norm() <= 1e-10);
      CHECK((a.transpose() * (y - a * x)).norm() <=
            1e-8 * (1.0 + (a.transpose() * y).norm()));
      // Against the normal-equation oracle (explicit 3x3 inverse).
      Vector xo = oracle::small_inverse(a.transpose() * a) * (a.transpose() * y);
      CHECK((x - xo).norm() < 1e-8 * (1.0 + xo.norm()));
    }
  }
}

TEST_CASE("solve_least_squares rank-deficient minimum norm") {
  RngState rng(12);
  Matrix a(5, 3);
  a.col(0) = random_matrix(5, 1, rng).col(0);
  a.col(1) = a.col(0);  // duplicated column
  a.col(2) = random_matrix(5, 1, rng).col(0);
  Vector y = random_matrix(5, 1, rng).col(0);
  for (LsBackend be : {LsBackend::QR, LsBackend::CG}) {
    Vector x = solve_least_squares(a, y, be);
    Vector xo = oracle::ls_min_norm(a, y);
    CHECK((a * x - a * xo).norm() < 1e-9);
    CHECK(x.norm() <= xo.norm() + 1e-8);
  }
}

TEST_CASE("solve_least_squares shape mismatch") {
  CHECK_THROWS_AS(solve_least_squares(Matrix::Identity(3, 3), Vector::Zero(2)),
                  contract_error);
}

TEST_CASE("rank_one_svd diagonal") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2;
  a(1, 1) = 1;
  RankOnePair p = rank_one_svd(a);
  CHECK(p.lambda1 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(p.u(0)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(p.v(0)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(p.u(0) > 0);  // sign convention
}

TEST_CASE("rank_one_svd exact rank-one") {
  RngState rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    Vector u0 = stiefel_sample_uniform(6, rng);
    Vector v0 = stiefel_sample_uniform(9, rng);
    const double scale = 0.5 + rng.next_double();
    RankOnePair p = rank_one_svd(scale * u0 * v0.transpose());
    CHECK(std::abs(p.u.dot(u0)) >= 1.0 - 1e-10);
    CHECK(p.lambda1 == doctest::Approx(scale).epsilon(1e-10));
  }
}

TEST_CASE("rank_one_svd vs oracle on random 5x8") {
  RngState rng(22);
  for (int trial = 0; trial < 25; ++trial) {
    Matrix a = random_matrix(5, 8, rng);
    RankOnePair p = rank_one_svd(a);
    oracle::Svd o = oracle::jacobi_svd(a);
    CHECK(p.lambda1 == doctest::Approx(o.values(0)).epsilon(1e-9));
    CHECK((a * p.v - p.lambda1 * p.u).norm() <= 1e-8 * p.lambda1);
    CHECK((a.transpose() * p.u - p.lambda1 * p.v).norm() <= 1e-8 * p.lambda1);
    CHECK(p.u.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.v.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rank_one_svd zero matrix") {
  RankOnePair p = rank_one_svd(Matrix::Zero(3, 4));
  CHECK(p.is_zero);
  CHECK(p.lambda1 == 0.0);
}

TEST_CASE("singular_values orthonormal columns") {
  RngState rng(31);
  Matrix q = random_matrix(4, 2, rng);
  // Gram-Schmidt by hand.
  q.col(0).normalize();
  q.col(1) -= q.col(0) * q.col(0).dot(q.col(1));
  q.col(1).normalize();
  Vector sv = singular_values(q);
  CHECK(sv(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sv(1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("singular_values diagonal") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 3;
  a(1, 1) = 0.5;
  Vector sv = singular_values(a);
  CHECK(sv(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sv(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("singular_values vs oracle and transpose symmetry") {
  RngState rng(32);
  for (int trial = 0; trial < 15; ++trial) {
    Matrix a = random_matrix(8, 4, rng);
    Vector sv = singular_values(a);
    oracle::Svd o = oracle::jacobi_svd(a);
    REQUIRE(sv.size() == o.values.size());
    for (Index i = 0; i < sv.size(); ++i) {
      CHECK(sv(i) == doctest::Approx(o.values(i)).epsilon(1e-9));
      if (i > 0) CHECK(sv(i) <= sv(i - 1) + 1e-14);
    }
    Vector svt = singular_values(a.transpose());
    for (Index i = 0; i < std::min(sv.size(), svt.size()); ++i)
      CHECK(std::abs(sv(i) - svt(i)) <= 1e-10 * (1.0 + sv(0)));
  }
}

TEST_CASE("svd orthonormality invariants") {
  RngState rng(33);
  Matrix a = random_matrix(6, 4, rng);
  SvdResult s = svd(a);
  for (Index i = 0; i < s.left_vectors.cols(); ++i) {
    CHECK(s.left_vectors.col(i).norm() == doctest::Approx(1.0).epsilon(1e-10));
    for (Index j = i + 1; j < s.left_vectors.cols(); ++j)
      CHECK(std::abs(s.left_vectors.col(i).dot(s.left_vectors.col(j))) <= 1e-10);
  }
  for (Index i = 0; i < s.singular_values.size(); ++i) {
    CHECK(s.singular_values(i) >= 0.0);
    if (i > 0) CHECK(s.singular_values(i) <= s.singular_values(i - 1));
  }
}

TEST_CASE("stiefel_sample_uniform unit norm and determinism") {
  RngState a(42), b(42);
  Vector va = stiefel_sample_uniform(4, a);
  Vector vb = stiefel_sample_uniform(4, b);
  CHECK(va.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((va - vb).norm() == 0.0);
}

TEST_CASE("stiefel_sample_uniform empirical mean concentration") {
  RngState rng(43);
  Vector mean = Vector::Zero(16);
  const int n = 10000;
  for (int k = 0; k < n; ++k) mean += stiefel_sample_uniform(16, rng);
  mean /= static_cast<double>(n);
  CHECK(mean.norm() <= 0.05);
}

TEST_CASE("stiefel_sample_uniform sign-pattern chi-square") {
  RngState rng(44);
  const int n = 10000;
  int counts[8] = {0};
  for (int k = 0; k < n; ++k) {
    Vector v = stiefel_sample_uniform(3, rng);
    int cell = (v(0) > 0 ? 1 : 0) | (v(1) > 0 ? 2 : 0) | (v(2) > 0 ? 4 : 0);
    ++counts[cell];
  }
  const double expected = n / 8.0;
  double stat = 0.0;
  for (int c = 0; c < 8; ++c)
    stat += (counts[c] - expected) * (counts[c] - expected) / expected;
  CHECK(oracle::chi_square_p(stat, 7) > 0.001);
}

TEST_CASE("rng identical seeds identical streams") {
  RngState a(123), b(123), c(124);
  bool same = true, diff = false;
  for (int k = 0; k < 100; ++k) {
    auto x = a.next_u64();
    same = same && (x == b.next_u64());
    diff = diff || (x != c.next_u64());
  }
  CHECK(same);
  CHECK(diff);
}

TEST_CASE("rng next_below bounds and coverage") {
  RngState rng(7);
  bool seen[5] = {false};
  for (int k = 0; k < 200; ++k) {
    auto v = rng.next_below(5);
    REQUIRE(v < 5);
    seen[v] = true;
  }
  for (bool s : seen) CHECK(s);
}

TEST_CASE("mtx round trip") {
  RngState rng(55);
  Matrix a = random_matrix(3, 5, rng);
  const std::string path = "mtx_roundtrip_test.txt";
  save_mtx(path, a);
  Matrix b = load_mtx(path);
  REQUIRE(b.rows() == 3);
  REQUIRE(b.cols() == 5);
  CHECK((a - b).norm() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("check_finite rejects nan") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = std::nan("");
  CHECK_THROWS_AS(check_finite(a, "test"), contract_error);
}
