#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "model_impl.hpp"
#include "phyto/error.hpp"

namespace phyto::detail {

namespace {

double population_variance(const Matrix& x, std::size_t col) {
  double mean = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, col);
  mean /= static_cast<double>(x.rows());
  double ss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) ss += (x(i, col) - mean) * (x(i, col) - mean);
  return ss / static_cast<double>(x.rows());
}

double anova_f(const Matrix& x, const Labels& y, std::size_t col) {
  double sum[2] = {0.0, 0.0};
  double count[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < x.rows(); ++i) {
    sum[y[i]] += x(i, col);
    count[y[i]] += 1.0;
  }
  const double n = count[0] + count[1];
  const double grand = (sum[0] + sum[1]) / n;
  const double mean[2] = {sum[0] / count[0], sum[1] / count[1]};
  double within = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double d = x(i, col) - mean[y[i]];
    within += d * d;
  }
  double between = 0.0;
  for (int c = 0; c < 2; ++c) between += count[c] * (mean[c] - grand) * (mean[c] - grand);
  if (within <= 0.0) return between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return between / (within / (n - 2.0));
}

}  // namespace

FittedTransform FittedTransform::fit(const Preprocessor& p, const Matrix& x, const Labels& y) {
  FittedTransform t;
  t.n_inputs_ = x.cols();
  switch (p.index()) {
    case 0:
      t.kind_ = Kind::Identity;
      break;
    case 1: {
      const double threshold = std::get<VarianceThreshold>(p).threshold;
      t.kind_ = Kind::SelectColumns;
      for (std::size_t j = 0; j < x.cols(); ++j) {
        if (population_variance(x, j) > threshold) t.keep_.push_back(j);
      }
      break;
    }
    case 2: {
      t.kind_ = Kind::MinMax;
      t.min_.assign(x.cols(), 0.0);
      t.range_.assign(x.cols(), 0.0);
      for (std::size_t j = 0; j < x.cols(); ++j) {
        double lo = x(0, j), hi = x(0, j);
        for (std::size_t i = 1; i < x.rows(); ++i) {
          lo = std::min(lo, x(i, j));
          hi = std::max(hi, x(i, j));
        }
        t.min_[j] = lo;
        t.range_[j] = hi - lo;
      }
      break;
    }
    case 3:
      t.kind_ = Kind::L2;
      break;
    case 4: {
      const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::get<UnivariateSelect>(p).k), x.cols());
      std::vector<double> f(x.cols());
      for (std::size_t j = 0; j < x.cols(); ++j) f[j] = anova_f(x, y, j);
      std::vector<std::size_t> order(x.cols());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
      t.kind_ = Kind::SelectColumns;
      t.keep_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(t.keep_.begin(), t.keep_.end());
      break;
    }
  }
  if (t.output_cols() == 0) {
    throw Error(ErrorCode::EmptyAfterPreprocessing, std::string(component_name(p)) + " removed every column");
  }
  return t;
}

std::size_t FittedTransform::output_cols() const noexcept {
  return kind_ == Kind::SelectColumns ? keep_.size() : n_inputs_;
}

Matrix FittedTransform::apply(const Matrix& x) const {
  switch (kind_) {
    case Kind::Identity:
      return x;
    case Kind::SelectColumns:
      return x.select_cols(keep_);
    case Kind::MinMax: {
      Matrix out(x.rows(), x.cols());
      for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
          out(i, j) = range_[j] > 0.0 ? (x(i, j) - min_[j]) / range_[j] : 0.0;
        }
      }
      return out;
    }
    case Kind::L2: {
      Matrix out = x;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        auto r = out.row(i);
        double norm = 0.0;
        for (double v : r) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > 0.0)
          for (double& v : r) v /= norm;
      }
      return out;
    }
  }
  return x;
}

}  // namespace phyto::detail
