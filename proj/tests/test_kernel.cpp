#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "krrtf/kernel.hpp"

using namespace krrtf;

TEST_SUITE("kernel") {
  TEST_CASE("gaussian kernel values") {
    const KernelParams p(1.0);
    VectorXd a(1), b(1);
    a << 1.0;
    b << 0.0;
    CHECK(gaussian_kernel(a, a, p) == 1.0);
    CHECK(gaussian_kernel(a, b, p) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));

    const KernelParams p2(0.7);
    VectorXd c(2), e(2);
    c << 0.3, -0.1;
    e = c;
    e[0] += 0.7;
    e[1] += 0.7;  // squared distance 2 v^2
    CHECK(gaussian_kernel(c, e, p2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  }

  TEST_CASE("kernel is symmetric bitwise") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    const KernelParams p(0.9);
    for (int trial = 0; trial < 100; ++trial) {
      VectorXd a(5), b(5);
      for (int k = 0; k < 5; ++k) {
        a[k] = g(rng);
        b[k] = g(rng);
      }
      CHECK(gaussian_kernel(a, b, p) == gaussian_kernel(b, a, p));
    }
  }

  TEST_CASE("bandwidth must be positive") {
    CHECK_THROWS_AS(KernelParams(0.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelParams(-1.0), std::invalid_argument);
  }

  TEST_CASE("assemble system small cases") {
    MatrixXd X1(1, 3);
    X1 << 0.2, 0.1, -0.3;
    VectorXd y1(1);
    y1 << 2.0;
    const KernelSystem s1 = assemble_system(X1, y1, 0.3, KernelParams(1.0));
    CHECK(s1.K(0, 0) == 1.0);
    CHECK(s1.D[0] == 1.0);
    CHECK(s1.lambda == doctest::Approx(0.3));

    MatrixXd X5 = MatrixXd::Zero(5, 2);
    const KernelSystem s5 = assemble_system(X5, VectorXd::Ones(5), 0.1, KernelParams(1.0));
    CHECK(s5.lambda == doctest::Approx(0.5).epsilon(1e-15));

    // K = [[1, 0.5], [0.5, 1]] when ||x1 - x2||^2 = 2 v^2 ln 2.
    MatrixXd X2(2, 1);
    X2 << 0.0, std::sqrt(2.0 * std::log(2.0));
    const KernelSystem s2 = assemble_system(X2, VectorXd::Ones(2), 0.1, KernelParams(1.0));
    CHECK(s2.K(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s2.D[0] == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(s2.D[1] == doctest::Approx(1.5).epsilon(1e-14));
  }

  TEST_CASE("assemble system rejects bad input") {
    const MatrixXd empty(0, 2);
    CHECK_THROWS_AS(assemble_system(empty, VectorXd(0), 0.1, KernelParams(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(assemble_system(MatrixXd::Zero(2, 2), VectorXd::Ones(3), 0.1, KernelParams(1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(assemble_system(MatrixXd::Zero(2, 2), VectorXd::Ones(2), 0.0, KernelParams(1.0)),
                    std::invalid_argument);
    MatrixXd bad = MatrixXd::Zero(2, 2);
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(assemble_system(bad, VectorXd::Ones(2), 0.1, KernelParams(1.0)), std::invalid_argument);
  }

  TEST_CASE("oracle kernel matrix and row sums") {
    const KernelSystem s = fixtures::oracle_system();
    for (int i = 0; i < 7; ++i) {
      CHECK(s.D[i] == doctest::Approx(oracle::kD[i]).epsilon(1e-14));
      for (int j = 0; j < 7; ++j) CHECK(s.K(i, j) == doctest::Approx(oracle::kK[7 * i + j]).epsilon(1e-14));
    }
    CHECK(s.lambda == doctest::Approx(0.7).epsilon(1e-15));
  }

  TEST_CASE("kappa_min") {
    CHECK(compute_kappa_min(0.0, KernelParams(1.0)) == 1.0);
    CHECK(compute_kappa_min(1.0, KernelParams(1.0)) == doctest::Approx(0.1353352832366127).epsilon(1e-14));
    CHECK(compute_kappa_min(1.0, KernelParams(2.0)) == doctest::Approx(0.6065306597126334).epsilon(1e-14));
    const DataBounds b = make_bounds(1.0, 2.0, KernelParams(1.0));
    CHECK(b.kappa_min == doctest::Approx(std::exp(-2.0)));
  }

  TEST_CASE("row sums respect the density bounds and K is PSD") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
      const int N = 5 + trial;
      MatrixXd X(N, 3);
      for (int i = 0; i < N; ++i) {
        for (int k = 0; k < 3; ++k) X(i, k) = g(rng);
        X.row(i) /= X.row(i).norm();
      }
      const KernelParams p(1.0);
      const KernelSystem s = assemble_system(X, VectorXd::Ones(N), 0.1, p);
      const double kappa = compute_kappa_min(1.0, p);
      for (int i = 0; i < N; ++i) {
        CHECK(s.D[i] >= N * kappa * (1.0 - 1e-12));
        CHECK(s.D[i] <= N * (1.0 + 1e-12));
        for (int j = 0; j < N; ++j) {
          CHECK(s.K(i, j) > 0.0);
          CHECK(s.K(i, j) <= 1.0);
          CHECK(s.K(i, j) == s.K(j, i));
        }
      }
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(s.K, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8 * N);
    }
  }
}
