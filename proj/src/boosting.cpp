#include <algorithm>
#include <cmath>

#include "model_impl.hpp"

namespace phyto::detail {

namespace {

constexpr double kL2 = 1.0;
constexpr double kMinHessian = 1e-3;
constexpr std::size_t kMinSamplesLeaf = 5;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Per-feature cut points; a value goes to bin b = #thresholds <= value.
std::vector<double> bin_thresholds(std::vector<double> values, std::size_t max_bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> uniq = values;
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<double> thr;
  if (uniq.size() <= max_bins) {
    for (std::size_t i = 0; i + 1 < uniq.size(); ++i) {
      double mid = uniq[i] + 0.5 * (uniq[i + 1] - uniq[i]);
      if (!(mid > uniq[i])) mid = uniq[i + 1];
      thr.push_back(mid);
    }
    return thr;
  }
  // Equal-frequency cuts over the sorted training values.
  for (std::size_t j = 1; j < max_bins; ++j) {
    const std::size_t idx = j * values.size() / max_bins;
    if (idx > 0 && values[idx] > values.front()) thr.push_back(values[idx]);
  }
  thr.erase(std::unique(thr.begin(), thr.end()), thr.end());
  return thr;
}

struct BoostNode {
  int feature = -1;
  double threshold = 0.0;  // left iff value < threshold
  int left = -1;
  int right = -1;
  double weight = 0.0;
};

struct BoostTree {
  std::vector<BoostNode> nodes;
  double predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
    }
    return nodes[i].weight;
  }
};

class BoostedModel final : public Model {
 public:
  BoostedModel(double base, double rate, std::vector<BoostTree> trees)
      : base_(base), rate_(rate), trees_(std::move(trees)) {}
  double score(std::span<const double> row) const override {
    double z = base_;
    for (const auto& t : trees_) z += rate_ * t.predict(row);
    return sigmoid(z);
  }

 private:
  double base_;
  double rate_;
  std::vector<BoostTree> trees_;
};

class HistogramTreeBuilder {
 public:
  HistogramTreeBuilder(const std::vector<std::vector<std::uint8_t>>& bins,
                       const std::vector<std::vector<double>>& thresholds, const std::vector<double>& grad,
                       const std::vector<double>& hess, int max_depth)
      : bins_(bins), thresholds_(thresholds), grad_(grad), hess_(hess), max_depth_(max_depth) {}

  BoostTree build(std::vector<std::size_t> samples) {
    grow(std::move(samples), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> samples, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double g = 0.0, h = 0.0;
    for (auto s : samples) {
      g += grad_[s];
      h += hess_[s];
    }
    tree_.nodes[static_cast<std::size_t>(id)].weight = -g / (h + kL2);
    if (depth >= max_depth_ || samples.size() < 2 * kMinSamplesLeaf) return id;

    const double parent = g * g / (h + kL2);
    double best_gain = 0.0;
    int best_feature = -1;
    std::size_t best_bin = 0;
    for (std::size_t f = 0; f < bins_.size(); ++f) {
      const std::size_t nb = thresholds_[f].size() + 1;
      if (nb < 2) continue;
      hg_.assign(nb, 0.0);
      hh_.assign(nb, 0.0);
      hc_.assign(nb, 0);
      for (auto s : samples) {
        const auto b = bins_[f][s];
        hg_[b] += grad_[s];
        hh_[b] += hess_[s];
        hc_[b] += 1;
      }
      double gl = 0.0, hl = 0.0;
      std::size_t cl = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        gl += hg_[b];
        hl += hh_[b];
        cl += hc_[b];
        const std::size_t cr = samples.size() - cl;
        if (cl < kMinSamplesLeaf || cr < kMinSamplesLeaf) continue;
        const double hr = h - hl;
        if (hl < kMinHessian || hr < kMinHessian) continue;
        const double gr = g - gl;
        const double gain = gl * gl / (hl + kL2) + gr * gr / (hr + kL2) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_bin = b;
        }
      }
    }
    if (best_feature < 0) return id;

    const auto bf = static_cast<std::size_t>(best_feature);
    std::vector<std::size_t> left, right;
    for (auto s : samples) (bins_[bf][s] <= best_bin ? left : right).push_back(s);
    samples.clear();
    samples.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = thresholds_[bf][best_bin];
    node.left = l;
    node.right = r;
    return id;
  }

  const std::vector<std::vector<std::uint8_t>>& bins_;
  const std::vector<std::vector<double>>& thresholds_;
  const std::vector<double>& grad_;
  const std::vector<double>& hess_;
  int max_depth_;
  BoostTree tree_;
  std::vector<double> hg_, hh_;
  std::vector<std::size_t> hc_;
};

}  // namespace

std::shared_ptr<const Model> fit_gradient_boosting(const GradientBoostedTrees& params, const Matrix& x,
                                                   const Labels& y) {
  const std::size_t n = x.rows();
  const auto max_bins = static_cast<std::size_t>(std::clamp(params.max_bins, 2, 255));

  std::vector<std::vector<double>> thresholds(x.cols());
  std::vector<std::vector<std::uint8_t>> bins(x.cols(), std::vector<std::uint8_t>(n));
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto col = x.column(f);
    thresholds[f] = bin_thresholds(col, max_bins);
    for (std::size_t i = 0; i < n; ++i) {
      bins[f][i] = static_cast<std::uint8_t>(
          std::upper_bound(thresholds[f].begin(), thresholds[f].end(), col[i]) - thresholds[f].begin());
    }
  }

  double pos = 0.0;
  for (int v : y) pos += v;
  const double prior = pos / static_cast<double>(n);
  const double base = std::log(prior / (1.0 - prior));

  std::vector<double> raw(n, base), grad(n), hess(n);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;

  std::vector<BoostTree> trees;
  trees.reserve(static_cast<std::size_t>(params.n_rounds));
  for (int round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(raw[i]);
      grad[i] = p - y[i];
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }
    HistogramTreeBuilder builder(bins, thresholds, grad, hess, params.max_depth);
    auto tree = builder.build(all);
    for (std::size_t i = 0; i < n; ++i) raw[i] += params.learning_rate * tree.predict(x.row(i));
    trees.push_back(std::move(tree));
  }
  return std::make_shared<BoostedModel>(base, params.learning_rate, std::move(trees));
}

}  // namespace phyto::detail
