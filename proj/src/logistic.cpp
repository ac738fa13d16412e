#include <cmath>

#include <Eigen/Dense>

#include "model_impl.hpp"

namespace phyto::detail {

namespace {

constexpr int kMaxNewtonSteps = 100;

double log1p_exp(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

class LogisticModel final : public Model {
 public:
  LogisticModel(Eigen::VectorXd w, double b) : w_(std::move(w)), b_(b) {}
  double score(std::span<const double> row) const override {
    double z = b_;
    for (Eigen::Index j = 0; j < w_.size(); ++j) z += w_[j] * row[static_cast<std::size_t>(j)];
    return sigmoid(z);
  }

 private:
  Eigen::VectorXd w_;
  double b_;
};

}  // namespace

/// Minimizes C * sum(logloss) + 0.5 * |w|^2 by damped Newton steps; the
/// intercept is not penalized.
std::shared_ptr<const Model> fit_logistic(const Logistic& params, const Matrix& x, const Labels& y) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  const double c = params.strength;

  Eigen::MatrixXd a(n, d + 1);
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = x(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    a(i, d) = 1.0;
    t[i] = y[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd penalty = Eigen::VectorXd::Ones(d + 1);
  penalty[d] = 0.0;

  auto objective = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd z = a * beta;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss += log1p_exp(z[i]) - t[i] * z[i];
    return c * loss + 0.5 * beta.cwiseProduct(penalty).squaredNorm();
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
  double current = objective(beta);
  for (int step = 0; step < kMaxNewtonSteps; ++step) {
    const Eigen::VectorXd z = a * beta;
    Eigen::VectorXd p(n), wdiag(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = sigmoid(z[i]);
      wdiag[i] = std::max(p[i] * (1.0 - p[i]), 1e-12);
    }
    const Eigen::VectorXd grad = c * a.transpose() * (p - t) + beta.cwiseProduct(penalty);
    Eigen::MatrixXd hess = c * a.transpose() * wdiag.asDiagonal() * a;
    hess.diagonal() += penalty;
    hess(d, d) += 1e-10;
    const Eigen::VectorXd dir = hess.ldlt().solve(-grad);
    const double decrement = -grad.dot(dir);
    if (!std::isfinite(decrement) || decrement < 1e-12) break;

    double lr = 1.0;
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      const Eigen::VectorXd candidate = beta + lr * dir;
      const double value = objective(candidate);
      if (value <= current - 1e-4 * lr * decrement) {
        beta = candidate;
        current = value;
        improved = true;
        break;
      }
      lr *= 0.5;
    }
    if (!improved) break;
  }
  return std::make_shared<LogisticModel>(beta.head(d), beta[d]);
}

}  // namespace phyto::detail
