#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "springrod/errors.hpp"

namespace springrod::sysid {

/// Least-squares problem accumulated in normal-equation (Gram) form, so
/// arbitrarily many rows cost O(d^2) memory. Supports several target columns
/// sharing one design matrix.
class RegressionProblem {
 public:
  explicit RegressionProblem(std::vector<std::string> feature_names,
                             int n_targets = 1)
      : names_(std::move(feature_names)),
        gram_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(names_.size()),
                                    static_cast<Eigen::Index>(names_.size()))),
        moment_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(names_.size()),
                                      n_targets)),
        yty_(Eigen::VectorXd::Zero(n_targets)) {}

  void add(std::span<const double> x, std::span<const double> y) {
    const auto d = static_cast<Eigen::Index>(names_.size());
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(xv);
    for (Eigen::Index t = 0; t < moment_.cols(); ++t) {
      moment_.col(t) += y[static_cast<std::size_t>(t)] * xv;
      yty_(t) += y[static_cast<std::size_t>(t)] * y[static_cast<std::size_t>(t)];
    }
    ++n_;
  }

  void add(std::span<const double> x, double y) { add(x, {&y, 1}); }

  int dim() const { return static_cast<int>(names_.size()); }
  int n_targets() const { return static_cast<int>(moment_.cols()); }
  long n() const { return n_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  Eigen::MatrixXd gram() const {
    return gram_.selfadjointView<Eigen::Lower>();
  }
  const Eigen::MatrixXd& moment() const { return moment_; }
  const Eigen::VectorXd& yty() const { return yty_; }

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXd gram_;    // lower triangle filled
  Eigen::MatrixXd moment_;  // d x n_targets
  Eigen::VectorXd yty_;
  long n_ = 0;
};

struct OlsSolution {
  Eigen::MatrixXd beta;              ///< d x n_targets
  double condition = 0.0;            ///< of the equilibrated normal matrix
  std::vector<double> residual_rms;  ///< per target, over accumulated rows
  double ridge = 0.0;
};

inline constexpr double kSingularConditionLimit = 1e12;

/// Solves (gram + ridge I) beta = moment via a symmetric factorization with
/// Jacobi equilibration and two rounds of iterative refinement. Throws
/// SingularProblemError when ridge == 0 and the (equilibrated) normal matrix
/// has condition number above 1e12; the message names the feature aligned
/// with the near-null direction.
inline OlsSolution fit_ols(const RegressionProblem& problem,
                           double ridge = 0.0) {
  const Eigen::Index d = problem.dim();
  Eigen::MatrixXd G = problem.gram();
  for (Eigen::Index i = 0; i < d; ++i) G(i, i) += ridge;

  Eigen::VectorXd scale(d);
  for (Eigen::Index i = 0; i < d; ++i)
    scale(i) = G(i, i) > 0.0 ? 1.0 / std::sqrt(G(i, i)) : 1.0;
  const Eigen::MatrixXd Ge = scale.asDiagonal() * G * scale.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Ge);
  const double lambda_min = eig.eigenvalues().minCoeff();
  const double lambda_max = eig.eigenvalues().maxCoeff();
  const double condition =
      lambda_min > 0.0 && lambda_max > 0.0
          ? lambda_max / lambda_min
          : std::numeric_limits<double>::infinity();
  if (ridge == 0.0 && !(condition <= kSingularConditionLimit)) {
    Eigen::Index weak_row, weak_col;
    eig.eigenvectors().col(0).cwiseAbs().maxCoeff(&weak_row, &weak_col);
    throw SingularProblemError(
        condition,
        "normal matrix singular (condition " + std::to_string(condition) +
            "); weakest excitation along feature '" +
            problem.feature_names()[static_cast<std::size_t>(weak_row)] + "'");
  }

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(Ge);
  OlsSolution sol;
  sol.ridge = ridge;
  sol.condition = condition;
  sol.beta.resize(d, problem.n_targets());
  sol.residual_rms.resize(static_cast<std::size_t>(problem.n_targets()));
  for (Eigen::Index t = 0; t < problem.n_targets(); ++t) {
    const Eigen::VectorXd m = problem.moment().col(t);
    Eigen::VectorXd beta =
        scale.asDiagonal() * Eigen::VectorXd(ldlt.solve(scale.asDiagonal() * m));
    for (int refine = 0; refine < 2; ++refine) {
      const Eigen::VectorXd r = m - G * beta;
      beta += scale.asDiagonal() *
              Eigen::VectorXd(ldlt.solve(scale.asDiagonal() * r));
    }
    sol.beta.col(t) = beta;
    const double rss = problem.yty()(t) - 2.0 * beta.dot(m) +
                       beta.dot(problem.gram() * beta);
    sol.residual_rms[static_cast<std::size_t>(t)] =
        problem.n() > 0
            ? std::sqrt(std::max(0.0, rss) / static_cast<double>(problem.n()))
            : 0.0;
  }
  return sol;
}

/// Default ridge used when retrying a borderline-singular fit.
inline double auto_ridge(const RegressionProblem& problem) {
  return 1e-10 * problem.gram().trace() / std::max(1, problem.dim());
}

/// fit_ols with the standard retry policy: try ridge = 0 first and rescue a
/// borderline-conditioned problem with a tiny ridge. A structurally singular
/// problem (rank-deficient Gram) is rethrown unless allow_rank_deficient is
/// set, in which case the ridge decides (used by the Koopman baseline whose
/// lifted bases are routinely underdetermined).
inline OlsSolution fit_ols_auto(const RegressionProblem& problem,
                                bool allow_rank_deficient = false) {
  try {
    return fit_ols(problem, 0.0);
  } catch (const SingularProblemError& e) {
    if (!allow_rank_deficient && !(e.condition < 1e15)) throw;
    return fit_ols(problem, auto_ridge(problem));
  }
}

}  // namespace springrod::sysid
