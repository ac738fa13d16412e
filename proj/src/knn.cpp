#include <algorithm>
#include <cmath>
#include <numeric>

#include "model_impl.hpp"

namespace phyto::detail {

namespace {

class KnnModel final : public Model {
 public:
  KnnModel(const Knn& params, Matrix x, Labels y) : params_(params), x_(std::move(x)), y_(std::move(y)) {}

  double score(std::span<const double> row) const override {
    const std::size_t n = x_.rows();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto r = x_.row(i);
      double d = 0.0;
      for (std::size_t j = 0; j < r.size(); ++j) d += (r[j] - row[j]) * (r[j] - row[j]);
      dist[i] = {std::sqrt(d), i};
    }
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params_.k), n);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

    if (params_.weights == KnnWeights::Uniform) {
      double pos = 0.0;
      for (std::size_t i = 0; i < k; ++i) pos += y_[dist[i].second];
      return pos / static_cast<double>(k);
    }
    // Exact matches dominate inverse-distance weights.
    if (dist[0].first == 0.0) {
      double pos = 0.0, cnt = 0.0;
      for (std::size_t i = 0; i < k && dist[i].first == 0.0; ++i) {
        pos += y_[dist[i].second];
        cnt += 1.0;
      }
      return pos / cnt;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double w = 1.0 / dist[i].first;
      num += w * y_[dist[i].second];
      den += w;
    }
    return num / den;
  }

 private:
  Knn params_;
  Matrix x_;
  Labels y_;
};

}  // namespace

std::shared_ptr<const Model> fit_knn(const Knn& params, const Matrix& x, const Labels& y) {
  return std::make_shared<KnnModel>(params, x, y);
}

}  // namespace phyto::detail
