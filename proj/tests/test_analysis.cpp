#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "krrtf/analysis.hpp"

using namespace krrtf;

namespace {

GpTask oracle_task() {
  GpTask t;
  t.X = fixtures::oracle_inputs();
  t.y_noisy = fixtures::oracle_labels().head(6);
  t.f_values = fixtures::oracle_labels();
  return t;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("error vectors") {
    VectorXd labels(3);
    labels << 1.0, -2.0, 0.5;
    CHECK(prefix_error_vector(labels, labels).entries.isZero(0.0));
    CHECK(prefix_error_vector(VectorXd::Zero(3), labels).entries == -labels);
    CHECK_THROWS_AS(prefix_error_vector(VectorXd::Zero(2), labels), std::invalid_argument);
  }

  TEST_CASE("direct prefix predictions match the oracle") {
    const GpTask t = oracle_task();
    const VectorXd d = direct_prefix_predictions(t, KernelParams(1.0), Regularization::per_sample(0.1));
    for (int n = 0; n < 6; ++n) CHECK(d[n] == doctest::Approx(oracle::kPrefixDirect[n]).epsilon(1e-12));
  }

  TEST_CASE("cosine and SimE") {
    VectorXd u(3), v(3);
    u << 1.0, 2.0, -1.0;
    v << 0.0, 0.5, 1.0;
    CHECK(cosine(u, u) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine(u, -u) == doctest::Approx(-1.0).epsilon(1e-15));
    bool zero = false;
    CHECK(cosine(u, VectorXd::Zero(3), &zero) == 0.0);
    CHECK(zero);

    VectorXd a(2), b(2);
    a << 1.0, 0.0;
    b << 0.0, 1.0;
    const SimeValue s = sime({a, a}, {a, b});
    CHECK(s.value == doctest::Approx(0.5));
    const SimeValue z = sime({a, a}, {a, VectorXd::Zero(2)});
    CHECK(z.value == doctest::Approx(0.5));
    CHECK(z.zero_vectors == 1);
    CHECK(sime({a, a}, {a, VectorXd::Zero(2)}, true).value == doctest::Approx(1.0));
    CHECK_THROWS_AS(sime({a}, {a, b}), std::invalid_argument);
  }

  TEST_CASE("SimE matrix and argmax trajectory") {
    // Steps are a shifted copy of layers: layer l best matches step l + 2.
    std::vector<MatrixXd> layers, steps;
    Rng rng(4);
    std::normal_distribution<double> g;
    for (int b = 0; b < 5; ++b) {
      MatrixXd base(8, 10);
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 10; ++j) base(i, j) = g(rng);
      }
      steps.push_back(base);
      layers.push_back(base.middleCols(2, 6));
    }
    const SimEMatrix m = sime_matrix(layers, steps);
    CHECK(m.batch == 5);
    CHECK(m.mean.maxCoeff() <= 1.0);
    CHECK(m.mean.minCoeff() >= -1.0);
    const ArgmaxTrajectory tr = argmax_trajectory(m);
    for (int l = 0; l < 6; ++l) {
      CHECK(tr.grid_argmax[l] == l + 2);
      CHECK(tr.mean[l] == l + 2);
      CHECK(tr.stddev[l] == 0.0);
    }
    CHECK(tr.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tr.intercept == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(tr.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(tr.degenerate);
    const ArgmaxTrajectory again = argmax_trajectory(sime_matrix(layers, steps));
    CHECK(again.mean == tr.mean);

    // Shuffling step order moves the argmax with it.
    std::vector<MatrixXd> shuffled = steps;
    for (MatrixXd& s : shuffled) s.col(3).swap(s.col(9));
    const ArgmaxTrajectory sh = argmax_trajectory(sime_matrix(layers, shuffled));
    CHECK(sh.grid_argmax[1] == 9);
  }

  TEST_CASE("argmax ties and single points") {
    SimEMatrix m;
    m.mean = MatrixXd::Constant(1, 4, 0.3);
    m.batch = 1;
    const ArgmaxTrajectory tr = argmax_trajectory(m);
    CHECK(tr.grid_argmax[0] == 0);
    CHECK(tr.degenerate);
    CHECK(tr.r2 == 1.0);
    CHECK_THROWS_AS(argmax_trajectory(m, 0, 3), std::invalid_argument);
  }

  TEST_CASE("MSE curves") {
    DistributionSpec s;
    s.d = 3;
    const std::vector<GpTask> tasks = make_batch(s, 6, KernelParams(1.0), 0.05, 4, 3);
    std::vector<MatrixXd> zero(4, MatrixXd::Zero(6, 2));
    const std::vector<MseRow> rows = mse_curves(zero, tasks, {2, 6});
    REQUIRE(rows.size() == 4);
    double expect = 0.0;
    for (const GpTask& t : tasks) expect += t.f_values[6] * t.f_values[6];
    CHECK(rows[1].n == 6);
    CHECK(rows[1].mse == doctest::Approx(expect / 4.0).epsilon(1e-14));
    CHECK(rows[3].curve == 1);
  }

  TEST_CASE("oracle chain: direct, converged Richardson and CG agree") {
    DistributionSpec s;
    const std::vector<GpTask> tasks = make_batch(s, 12, KernelParams(1.0), 0.05, 3, 17);
    const Regularization reg = Regularization::total(0.05 * 0.05);
    for (const GpTask& t : tasks) {
      const VectorXd labels = t.next_labels();
      const VectorXd direct = direct_prefix_predictions(t, KernelParams(1.0), reg) - labels;
      SolverSetup cg{Method::ConjugateGradient, 40, 1e-13, std::nullopt, std::nullopt};
      const MatrixXd c = solver_prefix_predictions(t, KernelParams(1.0), reg, cg);
      CHECK((c.col(40) - labels - direct).cwiseAbs().maxCoeff() < 1e-6);
      double kappa = 1.0;
      for (int n = 1; n <= 12; ++n) kappa = std::max(kappa, preconditioned_condition(prefix_system(t, n, KernelParams(1.0), reg)));
      const int T = 40 * static_cast<int>(std::ceil(kappa));
      SolverSetup pr{Method::Richardson, T, 1e-13, std::nullopt, std::nullopt};
      const MatrixXd p = solver_prefix_predictions(t, KernelParams(1.0), reg, pr);
      CHECK((p.col(T) - labels - direct).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("Richardson MSE starts at the zero predictor and ends at the floor") {
    DistributionSpec s;
    const std::vector<GpTask> tasks = make_batch(s, 10, KernelParams(1.0), 0.05, 8, 23);
    const Regularization reg = Regularization::total(0.05 * 0.05);
    std::vector<MatrixXd> preds;
    std::vector<MatrixXd> floor;
    SolverSetup pr{Method::Richardson, 20000, 1e-13, std::nullopt, std::nullopt};
    for (const GpTask& t : tasks) {
      const MatrixXd p = solver_prefix_predictions(t, KernelParams(1.0), reg, pr);
      MatrixXd ends(p.rows(), 2);
      ends.col(0) = p.col(0);
      ends.col(1) = p.col(pr.steps);
      preds.push_back(ends);
      floor.push_back(direct_prefix_predictions(t, KernelParams(1.0), reg));
    }
    const std::vector<int> lengths = {2, 5, 10};
    const std::vector<MseRow> rows = mse_curves(preds, tasks, lengths);
    const std::vector<MseRow> direct = mse_curves(floor, tasks, lengths);
    REQUIRE(rows.size() == 2 * lengths.size());
    for (std::size_t k = 0; k < lengths.size(); ++k) {
      double zero = 0.0;
      for (const GpTask& t : tasks) zero += t.f_values[lengths[k]] * t.f_values[lengths[k]];
      CHECK(rows[k].mse == doctest::Approx(zero / tasks.size()).epsilon(1e-12));
      CHECK(rows[lengths.size() + k].mse == doctest::Approx(direct[k].mse).epsilon(1e-8));
    }
  }

  TEST_CASE("noise sweep encoded equals Bayes at matched noise") {
    NoiseSweepSetup setup;
    setup.spec.d = 3;
    setup.n = 10;
    setup.sigma_train = 0.05;
    setup.sigma_test = {0.05, 0.5};
    setup.l_finite = 3;
    setup.tasks_per_level = 8;
    setup.seed = 12;
    const std::vector<NoiseSweepRow> rows = noise_sweep(setup);
    REQUIRE(rows.size() == 6);
    CHECK(rows[1].predictor == "encoded");
    CHECK(rows[1].ratio == 1.0);
    CHECK(rows[2].ratio == 1.0);
    setup.l_finite = 0;
    CHECK_THROWS_AS(noise_sweep(setup), std::invalid_argument);
  }

  TEST_CASE("finite Richardson converges to the encoded predictor") {
    NoiseSweepSetup setup;
    setup.spec.d = 3;
    setup.n = 8;
    setup.sigma_test = {0.3};
    setup.tasks_per_level = 6;
    setup.l_finite = 20000;
    const std::vector<NoiseSweepRow> rows = noise_sweep(setup);
    CHECK(rows[0].mse == doctest::Approx(rows[1].mse).epsilon(1e-6));
  }
}
