#include <gtest/gtest.h>

#include <sstream>

#include "lrbias/gd_engine.hpp"
#include "lrbias/kernel_learning.hpp"

using namespace lrbias;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception thrown";
  return ErrorCode::InvalidArgument;
}

Dataset spread_points() {
  Dataset d;
  d.points = Matrix{{0, 0}, {2, 1}, {4, -1}, {6, 0.5}, {8, 2}, {-2, 3}, {1, -3}, {5, 4}};
  d.labels = Vector{{1, -1, 1, -1, 1, -1, 1, -1}};
  return d;
}

// A vector with (vᵀKv)^{1/2} = norm.
Vector k_scaled_direction(const KernelProblem& p, Rng& rng, double norm) {
  const Vector v = rng.normal_vector(p.size());
  return v * (norm / std::sqrt(hilbert_distance2(p, v, Vector::Zero(p.size()))));
}

}  // namespace

TEST(GaussianKernel, MatrixInvariants) {
  Rng rng(1, "kernel-inv");
  const Matrix X = Matrix::NullaryExpr(30, 3, [&] { return rng.uniform(-2, 2); });
  const Matrix K = gaussian_kernel_matrix(X, 0.7);
  for (Index i = 0; i < 30; ++i) {
    EXPECT_EQ(K(i, i), 1.0);
    for (Index j = 0; j < 30; ++j) {
      EXPECT_EQ(K(i, j), K(j, i));
      EXPECT_GT(K(i, j), 0.0);
      EXPECT_LE(K(i, j), 1.0);
    }
  }
  EXPECT_THROW(gaussian_kernel_matrix(X, 0.0), Error);
}

TEST(GaussianKernel, Examples) {
  const double s = 1.7;
  const Matrix X{{0.0, 0.0}, {s * std::sqrt(2.0), 0.0}, {0.0, 0.0}};
  const Matrix K = gaussian_kernel_matrix(X, s);
  EXPECT_NEAR(K(0, 1), std::exp(-1.0), 1e-15);
  EXPECT_EQ(K(0, 2), 1.0);
}

TEST(GaussianKernel, LargeScaleTendsToRankOne) {
  const Dataset d = spread_points();
  const double n = static_cast<double>(d.size());
  double prev = 0.0;
  for (double s : {1.0, 3.0, 10.0, 30.0}) {
    const Matrix K = gaussian_kernel_matrix(d.points, s);
    const double kappa = condition_number(eig_sym(K / n));
    EXPECT_GT(kappa, prev);
    prev = kappa;
  }
  EXPECT_GT(prev, 1e6);
  EXPECT_LE((gaussian_kernel_matrix(d.points, 1e4) - Matrix::Ones(8, 8)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(RidgeAlpha, Examples) {
  EXPECT_EQ(ridge_alpha(Matrix::Ones(1, 1), Vector::Ones(1), 0.0)(0), 1.0);

  Rng rng(2, "ridge");
  const Matrix A = Matrix::NullaryExpr(10, 10, [&] { return rng.uniform(-1, 1); });
  const Matrix K = A * A.transpose();
  const Vector y = rng.uniform_vector(10, -1, 1);
  const Vector a = ridge_alpha(K, y, 0.1);
  EXPECT_LE((K * a + 10 * 0.1 * a - y).norm(), 1e-10);

  // λ → ∞: nλ·α* → y.
  const double big = 1e9;
  EXPECT_LE((ridge_alpha(K, y, big) * (10 * big) - y).norm(), 1e-6);
}

TEST(RidgeAlpha, InterpolatesAtZeroLambda) {
  const Dataset d = spread_points();
  const Matrix K = gaussian_kernel_matrix(d.points, 1.0);
  const Vector a = ridge_alpha(K, d.labels, 0.0);
  EXPECT_LE((K * a - d.labels).norm(), 1e-8 * d.labels.norm());
}

TEST(RidgeAlpha, Errors) {
  EXPECT_EQ(code_of([] { ridge_alpha(Matrix::Ones(3, 3), Vector::Ones(3), 0.0); }), ErrorCode::SingularSystem);
  EXPECT_EQ(code_of([] { ridge_alpha(Matrix::Ones(3, 3), Vector::Ones(2), 0.1); }), ErrorCode::DimensionMismatch);
  EXPECT_NO_THROW(ridge_alpha(Matrix::Ones(3, 3), Vector::Ones(3), 0.1));
}

TEST(KernelProblem, SpectrumBridge) {
  for (double lambda : {0.0, 1e-3, 0.1}) {
    const KernelProblem p = make_kernel_problem(spread_points(), 1.0, lambda);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(p.K / 8.0);
    const Vector expected = ref.eigenvalues().reverse();
    for (Index i = 0; i < 8; ++i) {
      EXPECT_NEAR(p.kn.values(i), expected(i), 1e-10 * expected(0));
      EXPECT_NEAR(p.objective.spectrum.values(i), p.kn.values(i) + lambda, 1e-10 * (p.kn.values(i) + lambda));
    }
    EXPECT_EQ(p.C_K, 1.0);
  }
}

TEST(EigenCoords, UnitEigenvector) {
  const KernelProblem p = make_kernel_problem(spread_points(), 1.0, 0.0);
  const Vector c = to_eigen_coords(p, p.kn.vectors.col(0));
  EXPECT_NEAR(c(0), std::sqrt(8.0 * p.kn.values(0)), 1e-12);
  for (Index i = 1; i < 8; ++i) EXPECT_NEAR(c(i), 0.0, 1e-12);
}

TEST(EigenCoords, NormIdentityAndRoundTrip) {
  Rng rng(3, "coords");
  const KernelProblem p = make_kernel_problem(two_cluster_dataset(25, 3), 0.5, 1e-3);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector a = rng.uniform_vector(25, -1, 1);
    const Vector c = to_eigen_coords(p, a);
    const double ka = a.dot(p.K * a);
    EXPECT_NEAR(c.squaredNorm(), ka, 1e-8 * ka);
    EXPECT_LE((from_eigen_coords(p, c) - a).norm(), 1e-6 * a.norm());
  }
}

TEST(EigenCoords, InitializationCoefficients) {
  // α₀ − α* maps to ι = θ₀ − θ̂* in the train objective's eigenbasis.
  Rng rng(4, "iota");
  const KernelProblem p = make_kernel_problem(two_cluster_dataset(20, 4), 0.5, 1e-2);
  const Vector a0 = rng.uniform_vector(20, -1, 1);
  const Vector iota = to_eigen_coords(p, a0 - p.alpha_star);
  const Vector via_theta = decompose(p.objective, to_eigen_coords(p, a0));
  EXPECT_LE((iota - via_theta).cwiseAbs().maxCoeff(), 1e-10 * iota.cwiseAbs().maxCoeff());
  EXPECT_LE((to_eigen_coords(p, p.alpha_star) - p.objective.optimum).cwiseAbs().maxCoeff(),
            1e-10 * p.objective.optimum.cwiseAbs().maxCoeff());
}

TEST(GdAlpha, FixedPointInBothModes) {
  const KernelProblem p = make_kernel_problem(spread_points(), 1.0, 0.0);
  for (DualMode mode : {DualMode::TrainLoss, DualMode::HilbertNorm}) {
    const DualState s = gd_alpha(p, DualState{p.alpha_star, mode}, 0.05);
    EXPECT_LE((s.alpha - p.alpha_star).norm(), 1e-9 * p.alpha_star.norm());
  }
  EXPECT_EQ(code_of([&] { gd_alpha(p, DualState{Vector::Zero(3), DualMode::TrainLoss}, 0.1); }),
            ErrorCode::DimensionMismatch);
}

TEST(GdAlpha, HilbertStepKillsLeadingComponent) {
  const KernelProblem p = make_kernel_problem(spread_points(), 1.0, 0.0);
  const double eta = 1.0 / (8.0 * p.kn.values(0));
  Rng rng(5, "kill");
  const Vector a0 = rng.uniform_vector(8, -1, 1);
  const Vector before = to_eigen_coords(p, a0 - p.alpha_star);
  const DualState s = gd_alpha(p, DualState{a0, DualMode::HilbertNorm}, eta);
  const Vector after = to_eigen_coords(p, s.alpha - p.alpha_star);
  EXPECT_LE(std::abs(after(0)), 1e-12 * before.cwiseAbs().maxCoeff());
}

TEST(GdAlpha, TrainLossMatchesDualMetricGradientDescent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const KernelProblem p = make_kernel_problem(two_cluster_dataset(20, seed, 0.4), 1.0, 1e-2);
    const QuadraticObjective q = dual_metric_objective(p);
    const double eta = 1.0 / q.spectrum.largest();
    Rng rng(seed, "dual-init");
    DualState s{rng.uniform_vector(20, -1, 1), DualMode::TrainLoss};
    const Vector theta0 = to_eigen_coords(p, s.alpha);
    for (int t = 0; t < 100; ++t) s = gd_alpha(p, s, eta);
    const Vector primal = closed_form(q, theta0, eta, 100).theta;
    const Vector mapped = to_eigen_coords(p, s.alpha);
    EXPECT_LE((mapped - primal).cwiseAbs().maxCoeff(), 1e-8 * primal.cwiseAbs().maxCoeff()) << "seed " << seed;
  }
}

TEST(GdAlpha, HilbertNormMatchesTrainObjectiveGradientDescent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const KernelProblem p = make_kernel_problem(two_cluster_dataset(20, seed, 0.4), 1.0, 1e-2);
    const double eta = 1.0 / p.objective.spectrum.largest();
    Rng rng(seed, "hilbert-init");
    DualState s{rng.uniform_vector(20, -1, 1), DualMode::HilbertNorm};
    const Vector theta0 = to_eigen_coords(p, s.alpha);
    for (int t = 0; t < 100; ++t) s = gd_alpha(p, s, eta / 20.0);
    const Vector primal = closed_form(p.objective, theta0, eta, 100).theta;
    EXPECT_LE((to_eigen_coords(p, s.alpha) - primal).cwiseAbs().maxCoeff(), 1e-8 * primal.cwiseAbs().maxCoeff());
  }
}

TEST(GdAlpha, HilbertNormDistanceDecreases) {
  const KernelProblem p = make_kernel_problem(two_cluster_dataset(30, 6), 0.5, 1e-3);
  const double limit = 2.0 / (30.0 * (p.kn.values(0) + p.lambda));
  Rng rng(6, "hn-mono");
  for (double frac : {0.1, 0.5, 0.99}) {
    DualState s{rng.uniform_vector(30, -1, 1), DualMode::HilbertNorm};
    double prev = hilbert_distance2(p, s.alpha, p.alpha_star);
    for (int t = 0; t < 200; ++t) {
      s = gd_alpha(p, s, frac * limit);
      const double d = hilbert_distance2(p, s.alpha, p.alpha_star);
      EXPECT_LE(d, prev * (1 + 1e-12));
      prev = d;
    }
  }
}

TEST(HilbertDistance, Examples) {
  const KernelProblem p = make_kernel_problem(spread_points(), 1.0, 0.0);
  const Vector a = Vector::LinSpaced(8, -1, 1);
  EXPECT_EQ(hilbert_distance2(p, a, a), 0.0);
  EXPECT_NEAR(hilbert_distance2(p, p.kn.vectors.col(0), Vector::Zero(8)), 8.0 * p.kn.values(0), 1e-12);

  Rng rng(7, "triangle");
  for (int rep = 0; rep < 200; ++rep) {
    const Vector x = rng.uniform_vector(8, -1, 1), y = rng.uniform_vector(8, -1, 1), z = rng.uniform_vector(8, -1, 1);
    const double xy = std::sqrt(hilbert_distance2(p, x, y));
    const double yz = std::sqrt(hilbert_distance2(p, y, z));
    const double xz = std::sqrt(hilbert_distance2(p, x, z));
    EXPECT_LE(xz, xy + yz + 1e-12);
  }
}

TEST(Predict, Examples) {
  const KernelProblem p = make_kernel_problem(spread_points(), 1.0, 0.0);
  EXPECT_EQ(predict(p, Vector::Zero(8), Vector{{0.3, 0.1}}), 0.0);
  for (Index i = 0; i < 8; ++i)
    EXPECT_NEAR(predict(p, p.alpha_star, p.data.points.row(i).transpose()), p.data.labels(i), 1e-6);

  Dataset one;
  one.points = Matrix{{0.5, -0.5}};
  one.labels = Vector{{1.0}};
  const KernelProblem single = make_kernel_problem(one, 2.0, 0.0);
  EXPECT_EQ(predict(single, Vector::Ones(1), Vector{{0.5, -0.5}}), 1.0);
  EXPECT_THROW(predict(p, p.alpha_star, Vector{{1.0, 2.0, 3.0}}), Error);
}

TEST(Predict, BoundedByHilbertNorm) {
  Rng rng(8, "linf");
  const KernelProblem p = make_kernel_problem(two_cluster_dataset(40, 8), 0.5, 1e-3);
  const Dataset grid = cluster_core_grid(50, 0.5);
  for (int rep = 0; rep < 10; ++rep) {
    const Vector a = rng.uniform_vector(40, -1, 1);
    const double norm = std::sqrt(hilbert_distance2(p, a, Vector::Zero(40)));
    EXPECT_LE(predict_all(p, a, grid.points).cwiseAbs().maxCoeff(), norm * (1 + 1e-12));
  }
}

TEST(BinaryError, Examples) {
  const KernelProblem p = make_kernel_problem(spread_points(), 1.0, 0.0);
  EXPECT_EQ(binary_error(p, p.alpha_star, p.data), 0.0);
  EXPECT_EQ(binary_error(p, Vector::Zero(8), p.data), 1.0);
  Dataset empty;
  empty.points.resize(0, 2);
  EXPECT_EQ(code_of([&] { binary_error(p, p.alpha_star, empty); }), ErrorCode::EmptyTestSet);
}

TEST(BinaryError, TwoClustersAreSeparated) {
  const KernelProblem p = make_kernel_problem(two_cluster_dataset(100, 9), 0.5, 1e-3);
  EXPECT_EQ(binary_error(p, p.alpha_star, cluster_core_grid()), 0.0);
  EXPECT_EQ(binary_error(p, p.alpha_star, two_cluster_dataset(500, 99, 0.2, "held-out")), 0.0);
}

TEST(MarginCertificate, Examples) {
  const KernelProblem p = make_kernel_problem(two_cluster_dataset(100, 10), 0.5, 1e-3);
  const Dataset grid = cluster_core_grid();
  const double delta = 0.5;
  // Scale the reference so that it has margin δ on the grid.
  const Vector scores = predict_all(p, p.alpha_star, grid.points);
  const double margin = (scores.array() * grid.labels.array()).minCoeff();
  ASSERT_GT(margin, 0.0);
  const Vector ref = p.alpha_star * (delta / margin);

  const MarginVerdict same = margin_certificate(p, ref, ref, delta);
  EXPECT_TRUE(same.holds);
  EXPECT_EQ(same.radius, 0.25);
  EXPECT_EQ(binary_error(p, ref, grid), 0.0);

  Rng rng(10, "margin");
  for (int rep = 0; rep < 5; ++rep) {
    const Vector outside = ref + k_scaled_direction(p, rng, 0.25 * 1.01);
    EXPECT_FALSE(margin_certificate(p, outside, ref, delta).holds);
    const Vector inside = ref + k_scaled_direction(p, rng, 0.25 * 0.999);
    EXPECT_TRUE(margin_certificate(p, inside, ref, delta).holds);
    EXPECT_EQ(binary_error(p, inside, grid), 0.0);
  }
  EXPECT_THROW(margin_certificate(p, ref, ref, 1.0), Error);
  EXPECT_THROW(margin_certificate(p, ref, ref, 0.0), Error);
}

TEST(DatasetCsv, RoundTrip) {
  const Dataset d = two_cluster_dataset(50, 11);
  std::stringstream ss;
  write_dataset_csv(d, ss);
  const Dataset back = read_dataset_csv(ss);
  EXPECT_EQ(back.points, d.points);
  EXPECT_EQ(back.labels, d.labels);
}

TEST(DatasetCsv, ParsesExponentsAndSigns) {
  std::istringstream in("x_1,x_2,label\n1e-3,+2.5E2,1\n-0.5, 3 ,-1\n\n");
  const Dataset d = read_dataset_csv(in);
  ASSERT_EQ(d.size(), 2);
  EXPECT_EQ(d.points(0, 0), 1e-3);
  EXPECT_EQ(d.points(0, 1), 250.0);
  EXPECT_EQ(d.points(1, 1), 3.0);
  EXPECT_EQ(d.labels(1), -1.0);
}

TEST(DatasetCsv, Errors) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_dataset_csv(in);
  };
  EXPECT_EQ(code_of([&] { parse(""); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("a,b,label\n1,2,1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("x_1,label\n1,2,1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("x_1,label\nabc,1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("x_1,label\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("x_1,label\n0.5,2\n"); }), ErrorCode::ValidationError);
  EXPECT_EQ(code_of([] { load_dataset_csv("/nonexistent/data.csv"); }), ErrorCode::IoError);
}

TEST(Synthetic, DeterministicAndBalanced) {
  const Dataset a = two_cluster_dataset(101, 12);
  const Dataset b = two_cluster_dataset(101, 12);
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.labels.sum(), 1.0);
  EXPECT_NE(two_cluster_dataset(101, 13).points, a.points);
  const Dataset grid = cluster_core_grid();
  EXPECT_EQ(grid.size(), 1000);
  EXPECT_EQ(grid.labels.sum(), 0.0);
  EXPECT_LE((grid.points.col(0) - grid.labels).cwiseAbs().maxCoeff(), 0.2 + 1e-15);
}
