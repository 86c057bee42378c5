#pragma once

// Gaussian-kernel least squares in dual coordinates: kernel matrices, the
// correspondence between dual coefficients α and eigen-coordinates θ, dual
// gradient descent, prediction and classification error.

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lrbias/format.hpp"
#include "lrbias/gd_engine.hpp"
#include "lrbias/instances.hpp"
#include "lrbias/quadratic_model.hpp"

namespace lrbias {

struct Dataset {
  Matrix points;  // n × d
  Vector labels;  // ±1

  Index size() const noexcept { return points.rows(); }
  Index dim() const noexcept { return points.cols(); }
};

inline void validate(const Dataset& d) {
  require(d.size() >= 1 && d.dim() >= 1, ErrorCode::ValidationError, "dataset needs n >= 1 and d >= 1");
  require(d.labels.size() == d.size(), ErrorCode::DimensionMismatch, "one label per sample required");
  for (Index i = 0; i < d.size(); ++i)
    require(d.labels(i) == 1.0 || d.labels(i) == -1.0, ErrorCode::ValidationError,
            "labels must be -1 or 1 (row " + std::to_string(i + 1) + ")");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, t.data() + t.size(), out);
  return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

}  // namespace detail

/// Reads `x_1,…,x_d,label` rows after a mandatory header line.
inline Dataset read_dataset_csv(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError, source + ": missing header");
  const auto header = detail::split_csv_line(line);
  require(header.size() >= 2, ErrorCode::ParseError, source + ": header needs x_1..x_d and label columns");
  for (std::size_t j = 0; j + 1 < header.size(); ++j)
    require(detail::trim(header[j]) == "x_" + std::to_string(j + 1), ErrorCode::ParseError,
            source + ": header column " + std::to_string(j + 1) + " must be x_" + std::to_string(j + 1));
  require(detail::trim(header.back()) == "label", ErrorCode::ParseError, source + ": last header column must be label");
  const std::size_t d = header.size() - 1;

  std::vector<double> values;
  std::vector<double> labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    require(fields.size() == d + 1, ErrorCode::ParseError,
            source + ":" + std::to_string(row) + ": expected " + std::to_string(d + 1) + " fields");
    for (std::size_t j = 0; j <= d; ++j) {
      double v = 0.0;
      require(detail::parse_double(fields[j], v), ErrorCode::ParseError,
              source + ":" + std::to_string(row) + ": column " + std::to_string(j + 1) + " is not a number");
      (j < d ? values : labels).push_back(v);
    }
  }
  const auto n = static_cast<Index>(labels.size());
  require(n >= 1, ErrorCode::ParseError, source + ": no data rows");
  Dataset out;
  out.points.resize(n, static_cast<Index>(d));
  out.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < static_cast<Index>(d); ++j) out.points(i, j) = values[static_cast<std::size_t>(i) * d + j];
    out.labels(i) = labels[static_cast<std::size_t>(i)];
  }
  validate(out);
  return out;
}

inline Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open dataset " + path);
  return read_dataset_csv(in, path);
}

inline void write_dataset_csv(const Dataset& d, std::ostream& out) {
  for (Index j = 0; j < d.dim(); ++j) out << "x_" << (j + 1) << ',';
  out << "label\n";
  for (Index i = 0; i < d.size(); ++i) {
    for (Index j = 0; j < d.dim(); ++j) out << format_double(d.points(i, j)) << ',';
    out << (d.labels(i) > 0 ? "1" : "-1") << '\n';
  }
}

inline void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot write " + path);
  write_dataset_csv(d, out);
  require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

/// exp(−‖x − x'‖² / (2s²))
template <typename A, typename B>
double gaussian_kernel(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& xp, double s) {
  return std::exp(-(x - xp).squaredNorm() / (2.0 * s * s));
}

inline Matrix gaussian_kernel_matrix(const Matrix& X, double s) {
  require(s > 0.0, ErrorCode::InvalidArgument, "kernel scale must be positive");
  const Index n = X.rows();
  Matrix K(n, n);
  for (Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) K(i, j) = K(j, i) = gaussian_kernel(X.row(i), X.row(j), s);
  }
  return K;
}

/// Solves (K + nλI)α = y with an LDLᵀ factorization. Throws SingularSystem
/// when a pivot falls below 1e-12 times the largest diagonal entry.
inline Vector ridge_alpha(const Matrix& K, const Vector& y, double lambda) {
  const Index n = K.rows();
  require(K.cols() == n && y.size() == n, ErrorCode::DimensionMismatch, "ridge system dimensions differ");
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "lambda must be nonnegative");
  Matrix A = K;
  A.diagonal().array() += static_cast<double>(n) * lambda;
  const Eigen::LDLT<Matrix> ldlt(A);
  const double dmax = A.diagonal().cwiseAbs().maxCoeff();
  require(ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() >= 1e-12 * dmax, ErrorCode::SingularSystem,
          "K + n*lambda*I is numerically singular");
  return ldlt.solve(y);
}

struct KernelProblem {
  Dataset data;
  double scale = 1.0;
  double lambda = 0.0;
  double C_K = 1.0;  // sup_x √k(x, x) for the Gaussian kernel
  Matrix K;
  Spectrum kn;  // spectrum of K/n
  QuadraticObjective objective;  // train objective in eigen-coordinates
  Vector alpha_star;

  Index size() const noexcept { return data.size(); }
};

inline KernelProblem make_kernel_problem(Dataset data, double scale, double lambda) {
  validate(data);
  KernelProblem p;
  p.scale = scale;
  p.lambda = lambda;
  p.K = gaussian_kernel_matrix(data.points, scale);
  p.kn = eig_sym(p.K / static_cast<double>(data.size()));
  p.objective = from_kernel(p.kn, data.labels, lambda);
  p.alpha_star = ridge_alpha(p.K, data.labels, lambda);
  p.data = std::move(data);
  return p;
}

/// θ-coordinates: c_i = √(nσ_i)⟨α, u_i⟩, with (σ_i, u_i) the eigenpairs of K/n.
inline Vector to_eigen_coords(const KernelProblem& p, const Vector& alpha) {
  require(alpha.size() == p.size(), ErrorCode::DimensionMismatch, "alpha has wrong size");
  const double n = static_cast<double>(p.size());
  const Vector proj = p.kn.vectors.transpose() * alpha;
  return (proj.array() * (n * p.kn.values.array().max(0.0)).sqrt()).matrix();
}

/// Inverse of to_eigen_coords on the span of eigenvectors with σ_i > 0.
inline Vector from_eigen_coords(const KernelProblem& p, const Vector& c) {
  require(c.size() == p.size(), ErrorCode::DimensionMismatch, "coordinate vector has wrong size");
  require(p.kn.smallest() > 0.0, ErrorCode::SingularKernel, "inverse map needs a positive definite kernel");
  const double n = static_cast<double>(p.size());
  const Vector a = (c.array() / (n * p.kn.values.array()).sqrt()).matrix();
  return p.kn.vectors * a;
}

enum class DualMode { TrainLoss, HilbertNorm };

struct DualState {
  Vector alpha;
  DualMode mode = DualMode::TrainLoss;
};

/// One gradient step in dual coordinates, with r = (K + nλ)α − y:
///   TrainLoss:   α ← α − η (K/n) r
///   HilbertNorm: α ← α − η r
/// Both have the ridge solution α* as fixed point.
inline DualState gd_alpha(const KernelProblem& p, const DualState& s, double eta) {
  require(s.alpha.size() == p.size(), ErrorCode::DimensionMismatch, "alpha has wrong size");
  require(eta > 0.0, ErrorCode::InvalidArgument, "step size must be positive");
  const double n = static_cast<double>(p.size());
  const Vector r = p.K * s.alpha + (n * p.lambda) * s.alpha - p.data.labels;
  DualState out{s.alpha, s.mode};
  if (s.mode == DualMode::TrainLoss)
    out.alpha -= (eta / n) * (p.K * r);
  else
    out.alpha -= eta * r;
  return out;
}

/// Quadratic whose θ-space GD reproduces TrainLoss-mode dual GD exactly:
/// eigenvalues nσ_i(σ_i + λ), same optimum as the train objective.
inline QuadraticObjective dual_metric_objective(const KernelProblem& p) {
  const double n = static_cast<double>(p.size());
  const Vector sig = p.kn.values.array().max(0.0).matrix();
  const Vector vals = (n * sig.array() * (sig.array() + p.lambda)).matrix();
  return make_objective(make_spectrum(vals, Matrix::Identity(p.size(), p.size())), p.objective.optimum,
                        p.objective.min_value);
}

/// Dual coefficients after t steps of θ-space gradient descent on the train
/// objective with step η, in closed form:
///   α_t − α* = U diag((1 − η(σ_i + λ))^t) Uᵀ (α₀ − α*).
/// Equivalent to HilbertNorm-mode gd_alpha with step η/n, and well defined
/// even when K/n has eigenvalues at rounding level.
inline Vector dual_closed_form(const KernelProblem& p, const Vector& alpha0, double eta, std::int64_t t) {
  require(alpha0.size() == p.size(), ErrorCode::DimensionMismatch, "alpha has wrong size");
  const Vector& s = p.objective.spectrum.values;
  Vector f(s.size());
  for (Index i = 0; i < s.size(); ++i) f(i) = signed_power(1.0 - eta * s(i), t);
  const Vector coeff = p.kn.vectors.transpose() * (alpha0 - p.alpha_star);
  return p.alpha_star + p.kn.vectors * f.cwiseProduct(coeff);
}

/// (α − α')ᵀ K (α − α') = ‖θ − θ'‖²_H.
inline double hilbert_distance2(const KernelProblem& p, const Vector& a, const Vector& b) {
  require(a.size() == p.size() && b.size() == p.size(), ErrorCode::DimensionMismatch, "alpha has wrong size");
  const Vector d = a - b;
  return std::max(0.0, d.dot(p.K * d));
}

template <typename Derived>
double predict(const KernelProblem& p, const Vector& alpha, const Eigen::MatrixBase<Derived>& x) {
  require(alpha.size() == p.size(), ErrorCode::DimensionMismatch, "alpha has wrong size");
  require(x.size() == p.data.dim(), ErrorCode::DimensionMismatch, "input has wrong dimension");
  double s = 0.0;
  for (Index j = 0; j < p.size(); ++j) s += alpha(j) * gaussian_kernel(p.data.points.row(j), x.transpose(), p.scale);
  return s;
}

/// Scores on every row of `points`.
inline Vector predict_all(const KernelProblem& p, const Vector& alpha, const Matrix& points) {
  Vector out(points.rows());
  for (Index i = 0; i < points.rows(); ++i) out(i) = predict(p, alpha, points.row(i).transpose());
  return out;
}

/// Fraction of misclassified samples; a zero score counts as an error.
inline double binary_error(const KernelProblem& p, const Vector& alpha, const Dataset& test) {
  require(test.size() >= 1, ErrorCode::EmptyTestSet, "binary error needs a nonempty test set");
  const Vector scores = predict_all(p, alpha, test.points);
  Index wrong = 0;
  for (Index i = 0; i < test.size(); ++i)
    if (!(scores(i) * test.labels(i) > 0.0)) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

struct MarginVerdict {
  double distance = 0.0;  // ‖θ − θ_ref‖_H
  double radius = 0.0;    // δ/(2C_K)
  bool holds = false;
};

/// Hilbert-norm closeness test: when the reference has margin δ, every
/// estimator within δ/(2C_K) of it classifies exactly like it.
inline MarginVerdict margin_certificate(const KernelProblem& p, const Vector& alpha, const Vector& alpha_ref,
                                        double delta) {
  require(delta > 0.0 && delta < 1.0, ErrorCode::InvalidArgument, "margin must lie in (0, 1)");
  MarginVerdict v;
  v.distance = std::sqrt(hilbert_distance2(p, alpha, alpha_ref));
  v.radius = delta / (2.0 * p.C_K);
  v.holds = v.distance <= v.radius;
  return v;
}

/// Two Gaussian clusters centred at ±e₁ in dimension d with standard
/// deviation `sd`; labels alternate +1/−1 by row so both classes are balanced.
inline Dataset synthetic_clusters(Index n, Index d, std::uint64_t seed, double sd = 0.2,
                                  std::string_view stream = "two-cluster") {
  require(n >= 1 && d >= 1, ErrorCode::InvalidArgument, "dataset size and dimension must be positive");
  Rng rng(seed, stream);
  Dataset out;
  out.points.resize(n, d);
  out.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double y = (i % 2 == 0) ? 1.0 : -1.0;
    out.labels(i) = y;
    for (Index j = 0; j < d; ++j) out.points(i, j) = (j == 0 ? y : 0.0) + sd * rng.normal();
  }
  return out;
}

inline Dataset two_cluster_dataset(Index n, std::uint64_t seed, double sd = 0.2,
                                   std::string_view stream = "two-cluster") {
  return synthetic_clusters(n, 2, seed, sd, stream);
}

/// Regular grid of `per_cluster` points filling the square of half-width
/// `half_width` around each cluster centre (±1, 0), labelled by cluster.
inline Dataset cluster_core_grid(Index per_cluster = 500, double half_width = 0.2) {
  const auto cols = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(per_cluster))));
  const Index rows = (per_cluster + cols - 1) / cols;
  Dataset d;
  d.points.resize(2 * per_cluster, 2);
  d.labels.resize(2 * per_cluster);
  Index k = 0;
  for (double y : {1.0, -1.0}) {
    for (Index i = 0; i < per_cluster; ++i) {
      const Index r = i / cols;
      const Index c = i % cols;
      const double u = cols > 1 ? -half_width + 2.0 * half_width * static_cast<double>(c) / static_cast<double>(cols - 1) : 0.0;
      const double v = rows > 1 ? -half_width + 2.0 * half_width * static_cast<double>(r) / static_cast<double>(rows - 1) : 0.0;
      d.points(k, 0) = y + u;
      d.points(k, 1) = v;
      d.labels(k) = y;
      ++k;
    }
  }
  return d;
}

}  // namespace lrbias
