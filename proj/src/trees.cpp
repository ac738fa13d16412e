#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "model_impl.hpp"

namespace phyto::detail {

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity, lower is better
};

/// n * gini for a node with the given class counts.
double weighted_gini(double pos, double neg) {
  const double n = pos + neg;
  return n > 0.0 ? n - (pos * pos + neg * neg) / n : 0.0;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Labels& y, const TreeParams& params, Rng& rng)
      : x_(x), y_(y), params_(params), rng_(rng) {}

  Tree build(std::vector<std::size_t> samples) {
    grow(std::move(samples), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> samples, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double pos = 0.0;
    for (auto s : samples) pos += y_[s];
    const double n = static_cast<double>(samples.size());
    tree_.nodes[static_cast<std::size_t>(id)].value = pos / n;

    const bool pure = pos == 0.0 || pos == n;
    const bool depth_reached = params_.max_depth && depth >= *params_.max_depth;
    if (pure || depth_reached || samples.size() < 2 * static_cast<std::size_t>(params_.min_leaf)) return id;

    auto split = find_split(samples, pos);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto s : samples) {
      (x_(s, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  std::vector<std::size_t> candidate_features(const std::vector<std::size_t>& samples) {
    std::vector<std::size_t> usable;
    lo_.assign(x_.cols(), 0.0);
    hi_.assign(x_.cols(), 0.0);
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      double lo = x_(samples[0], f), hi = lo;
      for (auto s : samples) {
        const double v = x_(s, f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      lo_[f] = lo;
      hi_[f] = hi;
      if (lo < hi) usable.push_back(f);
    }
    if (params_.max_features > 0 && usable.size() > params_.max_features) {
      for (std::size_t i = 0; i < params_.max_features; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, usable.size() - 1);
        std::swap(usable[i], usable[pick(rng_)]);
      }
      usable.resize(params_.max_features);
      std::sort(usable.begin(), usable.end());
    }
    return usable;
  }

  SplitChoice find_split(const std::vector<std::size_t>& samples, double pos_total) {
    SplitChoice best;
    best.impurity = std::numeric_limits<double>::infinity();
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    const std::size_t n = samples.size();
    const double neg_total = static_cast<double>(n) - pos_total;

    for (auto f : candidate_features(samples)) {
      if (params_.random_thresholds) {
        std::uniform_real_distribution<double> draw(lo_[f], hi_[f]);
        double t = draw(rng_);
        if (t >= hi_[f]) t = lo_[f];
        double lpos = 0.0;
        std::size_t ln = 0;
        for (auto s : samples) {
          if (x_(s, f) <= t) {
            ++ln;
            lpos += y_[s];
          }
        }
        if (ln < min_leaf || n - ln < min_leaf) continue;
        const double lneg = static_cast<double>(ln) - lpos;
        const double imp = weighted_gini(lpos, lneg) + weighted_gini(pos_total - lpos, neg_total - lneg);
        if (imp < best.impurity) best = {static_cast<int>(f), t, imp};
        continue;
      }

      pairs_.clear();
      for (auto s : samples) pairs_.emplace_back(x_(s, f), y_[s]);
      std::sort(pairs_.begin(), pairs_.end());
      double lpos = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        lpos += pairs_[i].second;
        if (!(pairs_[i].first < pairs_[i + 1].first)) continue;
        const std::size_t ln = i + 1;
        if (ln < min_leaf || n - ln < min_leaf) continue;
        const double lneg = static_cast<double>(ln) - lpos;
        const double imp = weighted_gini(lpos, lneg) + weighted_gini(pos_total - lpos, neg_total - lneg);
        if (imp < best.impurity) {
          double t = pairs_[i].first + 0.5 * (pairs_[i + 1].first - pairs_[i].first);
          if (!(t < pairs_[i + 1].first)) t = pairs_[i].first;
          best = {static_cast<int>(f), t, imp};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  const Labels& y_;
  const TreeParams& params_;
  Rng& rng_;
  Tree tree_;
  std::vector<double> lo_, hi_;
  std::vector<std::pair<double, int>> pairs_;
};

class TreeModel final : public Model {
 public:
  explicit TreeModel(Tree tree) : tree_(std::move(tree)) {}
  double score(std::span<const double> row) const override { return tree_.predict(row); }

 private:
  Tree tree_;
};

class ForestModel final : public Model {
 public:
  explicit ForestModel(std::vector<Tree> trees) : trees_(std::move(trees)) {}
  double score(std::span<const double> row) const override {
    double acc = 0.0;
    for (const auto& t : trees_) acc += t.predict(row);
    return acc / static_cast<double>(trees_.size());
  }

 private:
  std::vector<Tree> trees_;
};

std::vector<std::size_t> all_samples(std::size_t n) {
  std::vector<std::size_t> s(n);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

template <class Params>
std::shared_ptr<const Model> fit_ensemble(const Params& p, const Matrix& x, const Labels& y, std::uint64_t seed,
                                          bool bootstrap, bool random_thresholds) {
  TreeParams tp;
  tp.max_depth = p.max_depth;
  tp.min_leaf = 1;
  tp.max_features = resolve_max_features(p.max_features, x.cols());
  tp.random_thresholds = random_thresholds;
  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(p.n_trees));
  for (int t = 0; t < p.n_trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> samples;
    if (bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, x.rows() - 1);
      samples.resize(x.rows());
      for (auto& s : samples) s = pick(rng);
      std::sort(samples.begin(), samples.end());
    } else {
      samples = all_samples(x.rows());
    }
    trees.push_back(grow_tree(x, y, std::move(samples), tp, rng));
  }
  return std::make_shared<ForestModel>(std::move(trees));
}

}  // namespace

Tree grow_tree(const Matrix& x, const Labels& y, std::vector<std::size_t> samples, const TreeParams& params,
               Rng& rng) {
  TreeBuilder builder(x, y, params, rng);
  return builder.build(std::move(samples));
}

std::size_t resolve_max_features(MaxFeatures m, std::size_t n_features) {
  const double d = static_cast<double>(n_features);
  double v = 1.0;
  switch (m) {
    case MaxFeatures::Sqrt: v = std::sqrt(d); break;
    case MaxFeatures::Log2: v = n_features > 0 ? std::log2(d) : 1.0; break;
    case MaxFeatures::Half: v = 0.5 * d; break;
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(v));
}

std::shared_ptr<const Model> fit_decision_tree(const DecisionTree& params, const Matrix& x, const Labels& y) {
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_leaf = params.min_leaf;
  Rng unused(0);
  return std::make_shared<TreeModel>(grow_tree(x, y, all_samples(x.rows()), tp, unused));
}

std::shared_ptr<const Model> fit_random_forest(const RandomForest& params, const Matrix& x, const Labels& y,
                                               std::uint64_t seed) {
  return fit_ensemble(params, x, y, seed, /*bootstrap=*/true, /*random_thresholds=*/false);
}

std::shared_ptr<const Model> fit_extra_trees(const ExtraTrees& params, const Matrix& x, const Labels& y,
                                             std::uint64_t seed) {
  return fit_ensemble(params, x, y, seed, /*bootstrap=*/false, /*random_thresholds=*/true);
}

}  // namespace phyto::detail
