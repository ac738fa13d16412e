#include <charconv>
#include <cmath>
#include <map>

#include "phyto/error.hpp"
#include "phyto/models.hpp"
#include "phyto/text.hpp"

namespace phyto {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using Params = std::vector<std::pair<std::string, std::string>>;

std::string depth_text(const std::optional<int>& d) { return d ? std::to_string(*d) : "none"; }

std::string_view max_features_text(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::Sqrt: return "sqrt";
    case MaxFeatures::Log2: return "log2";
    case MaxFeatures::Half: return "half";
  }
  return "sqrt";
}

Params params_of(const Preprocessor& p) {
  return std::visit(overloaded{
                        [](const NoPreprocessing&) { return Params{}; },
                        [](const VarianceThreshold& v) { return Params{{"threshold", format_double(v.threshold)}}; },
                        [](const MinMaxScaler&) { return Params{}; },
                        [](const L2Normalizer&) { return Params{}; },
                        [](const UnivariateSelect& u) { return Params{{"k", std::to_string(u.k)}}; },
                    },
                    p);
}

Params params_of(const Classifier& c) {
  return std::visit(
      overloaded{
          [](const Knn& k) {
            return Params{{"k", std::to_string(k.k)},
                          {"weights", k.weights == KnnWeights::Uniform ? "uniform" : "distance"}};
          },
          [](const DecisionTree& t) {
            return Params{{"max_depth", depth_text(t.max_depth)}, {"min_leaf", std::to_string(t.min_leaf)}};
          },
          [](const RandomForest& f) {
            return Params{{"n_trees", std::to_string(f.n_trees)},
                          {"max_features", std::string(max_features_text(f.max_features))},
                          {"max_depth", depth_text(f.max_depth)}};
          },
          [](const ExtraTrees& f) {
            return Params{{"n_trees", std::to_string(f.n_trees)},
                          {"max_features", std::string(max_features_text(f.max_features))},
                          {"max_depth", depth_text(f.max_depth)}};
          },
          [](const GradientBoostedTrees& g) {
            return Params{{"n_rounds", std::to_string(g.n_rounds)},
                          {"learning_rate", format_double(g.learning_rate)},
                          {"max_bins", std::to_string(g.max_bins)},
                          {"max_depth", std::to_string(g.max_depth)}};
          },
          [](const Logistic& l) { return Params{{"strength", format_double(l.strength)}}; },
      },
      c);
}

std::string params_text(const Params& params) {
  std::string out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ';';
    out += params[i].first + "=" + params[i].second;
  }
  return out;
}

std::string component_text(std::string_view name, const Params& params) {
  std::string out(name);
  if (!params.empty()) out += "(" + params_text(params) + ")";
  return out;
}

struct ParsedComponent {
  std::string name;
  std::map<std::string, std::string> params;
};

ParsedComponent parse_component(std::string_view text) {
  text = trim(text);
  ParsedComponent out;
  const auto open = text.find('(');
  if (open == std::string_view::npos) {
    out.name = std::string(text);
    return out;
  }
  if (text.back() != ')') throw Error(ErrorCode::InvalidSpec, "unbalanced parenthesis in '" + std::string(text) + "'");
  out.name = std::string(trim(text.substr(0, open)));
  auto body = text.substr(open + 1, text.size() - open - 2);
  if (trim(body).empty()) return out;
  for (auto item : split(body, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::InvalidSpec, "expected key=value, got '" + std::string(item) + "'");
    out.params[std::string(trim(item.substr(0, eq)))] = std::string(trim(item.substr(eq + 1)));
  }
  return out;
}

class ParamReader {
 public:
  explicit ParamReader(ParsedComponent c) : c_(std::move(c)) {}

  double real(const std::string& key, double fallback) {
    auto it = take(key);
    if (!it) return fallback;
    auto v = parse_double(*it);
    if (!v) throw Error(ErrorCode::InvalidSpec, c_.name + "." + key + " is not a number");
    return *v;
  }
  int integer(const std::string& key, int fallback) {
    auto it = take(key);
    if (!it) return fallback;
    auto v = parse_int(*it);
    if (!v) throw Error(ErrorCode::InvalidSpec, c_.name + "." + key + " is not an integer");
    return static_cast<int>(*v);
  }
  std::optional<int> depth(const std::string& key, std::optional<int> fallback) {
    auto it = take(key);
    if (!it) return fallback;
    if (*it == "none") return std::nullopt;
    auto v = parse_int(*it);
    if (!v) throw Error(ErrorCode::InvalidSpec, c_.name + "." + key + " is not an integer or 'none'");
    return static_cast<int>(*v);
  }
  std::string word(const std::string& key, std::string fallback) {
    auto it = take(key);
    return it ? *it : fallback;
  }
  void finish() const {
    if (!c_.params.empty()) {
      throw Error(ErrorCode::InvalidSpec, c_.name + " has unknown parameter '" + c_.params.begin()->first + "'");
    }
  }

 private:
  std::optional<std::string> take(const std::string& key) {
    auto it = c_.params.find(key);
    if (it == c_.params.end()) return std::nullopt;
    auto v = it->second;
    c_.params.erase(it);
    return v;
  }
  ParsedComponent c_;
};

MaxFeatures parse_max_features(const std::string& s) {
  if (s == "sqrt") return MaxFeatures::Sqrt;
  if (s == "log2") return MaxFeatures::Log2;
  if (s == "half") return MaxFeatures::Half;
  throw Error(ErrorCode::InvalidSpec, "max_features must be sqrt, log2 or half");
}

Preprocessor parse_preprocessor(std::string_view text) {
  auto parsed = parse_component(text);
  const std::string name = parsed.name;
  ParamReader r(std::move(parsed));
  Preprocessor out;
  if (name == "none") {
    out = NoPreprocessing{};
  } else if (name == "variance_threshold") {
    out = VarianceThreshold{r.real("threshold", 0.0)};
  } else if (name == "minmax_scaler") {
    out = MinMaxScaler{};
  } else if (name == "l2_normalizer") {
    out = L2Normalizer{};
  } else if (name == "univariate_select") {
    out = UnivariateSelect{r.integer("k", 50)};
  } else {
    throw Error(ErrorCode::InvalidSpec, "unknown preprocessor '" + name + "'");
  }
  r.finish();
  return out;
}

Classifier parse_classifier(std::string_view text) {
  auto parsed = parse_component(text);
  const std::string name = parsed.name;
  ParamReader r(std::move(parsed));
  Classifier out;
  if (name == "knn") {
    Knn k;
    k.k = r.integer("k", 5);
    const auto w = r.word("weights", "uniform");
    if (w != "uniform" && w != "distance") throw Error(ErrorCode::InvalidSpec, "knn.weights must be uniform or distance");
    k.weights = w == "uniform" ? KnnWeights::Uniform : KnnWeights::Distance;
    out = k;
  } else if (name == "decision_tree") {
    DecisionTree t;
    t.max_depth = r.depth("max_depth", std::nullopt);
    t.min_leaf = r.integer("min_leaf", 1);
    out = t;
  } else if (name == "random_forest" || name == "extra_trees") {
    const int n_trees = r.integer("n_trees", 100);
    const auto mf = parse_max_features(r.word("max_features", "sqrt"));
    const auto depth = r.depth("max_depth", std::nullopt);
    if (name == "random_forest") {
      out = RandomForest{n_trees, mf, depth};
    } else {
      out = ExtraTrees{n_trees, mf, depth};
    }
  } else if (name == "gradient_boosted_trees") {
    GradientBoostedTrees g;
    g.n_rounds = r.integer("n_rounds", 100);
    g.learning_rate = r.real("learning_rate", 0.1);
    g.max_bins = r.integer("max_bins", 255);
    g.max_depth = r.integer("max_depth", 3);
    out = g;
  } else if (name == "logistic") {
    out = Logistic{r.real("strength", 1.0)};
  } else {
    throw Error(ErrorCode::InvalidSpec, "unknown classifier '" + name + "'");
  }
  r.finish();
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidSpec, what);
}

}  // namespace

std::string_view component_name(const Preprocessor& p) {
  static constexpr std::string_view names[] = {"none", "variance_threshold", "minmax_scaler", "l2_normalizer",
                                               "univariate_select"};
  return names[p.index()];
}

std::string_view component_name(const Classifier& c) {
  static constexpr std::string_view names[] = {"knn",        "decision_tree",          "random_forest",
                                               "extra_trees", "gradient_boosted_trees", "logistic"};
  return names[c.index()];
}

std::string PipelineSpec::preprocessor_params() const { return params_text(params_of(preprocessor)); }
std::string PipelineSpec::classifier_params() const { return params_text(params_of(classifier)); }

std::string PipelineSpec::to_string() const {
  return component_text(component_name(preprocessor), params_of(preprocessor)) + " + " +
         component_text(component_name(classifier), params_of(classifier)) + " seed=" + std::to_string(seed);
}

PipelineSpec PipelineSpec::parse(std::string_view text) {
  text = trim(text);
  PipelineSpec spec;
  const auto seed_pos = text.rfind(" seed=");
  if (seed_pos != std::string_view::npos) {
    auto seed_text = trim(text.substr(seed_pos + 6));
    std::uint64_t seed = 0;
    auto res = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
    if (seed_text.empty() || res.ec != std::errc() || res.ptr != seed_text.data() + seed_text.size()) {
      throw Error(ErrorCode::InvalidSpec, "bad seed '" + std::string(seed_text) + "'");
    }
    spec.seed = seed;
    text = trim(text.substr(0, seed_pos));
  }
  const auto plus = text.find(" + ");
  if (plus == std::string_view::npos) {
    throw Error(ErrorCode::InvalidSpec, "expected '<preprocessor> + <classifier>', got '" + std::string(text) + "'");
  }
  spec.preprocessor = parse_preprocessor(text.substr(0, plus));
  spec.classifier = parse_classifier(text.substr(plus + 3));
  spec.validate();
  return spec;
}

void PipelineSpec::validate() const {
  std::visit(overloaded{
                 [](const NoPreprocessing&) {},
                 [](const VarianceThreshold& v) { require(v.threshold >= 0.0 && std::isfinite(v.threshold), "variance_threshold.threshold must be >= 0"); },
                 [](const MinMaxScaler&) {},
                 [](const L2Normalizer&) {},
                 [](const UnivariateSelect& u) { require(u.k >= 1, "univariate_select.k must be >= 1"); },
             },
             preprocessor);
  auto depth_ok = [](const std::optional<int>& d) { return !d || *d >= 1; };
  std::visit(overloaded{
                 [](const Knn& k) { require(k.k >= 1, "knn.k must be >= 1"); },
                 [&](const DecisionTree& t) {
                   require(depth_ok(t.max_depth) && t.min_leaf >= 1, "decision_tree depth/min_leaf must be >= 1");
                 },
                 [&](const RandomForest& f) {
                   require(f.n_trees >= 1 && depth_ok(f.max_depth), "random_forest n_trees/max_depth must be >= 1");
                 },
                 [&](const ExtraTrees& f) {
                   require(f.n_trees >= 1 && depth_ok(f.max_depth), "extra_trees n_trees/max_depth must be >= 1");
                 },
                 [](const GradientBoostedTrees& g) {
                   require(g.n_rounds >= 1 && g.learning_rate > 0.0 && g.max_bins >= 2 && g.max_bins <= 255 &&
                               g.max_depth >= 1,
                           "gradient_boosted_trees hyperparameters out of range");
                 },
                 [](const Logistic& l) { require(l.strength > 0.0 && std::isfinite(l.strength), "logistic.strength must be > 0"); },
             },
             classifier);
}

const ComponentRegistry& list_components() {
  static const ComponentRegistry registry{
      {NoPreprocessing{}, VarianceThreshold{0.0}, MinMaxScaler{}, L2Normalizer{}, UnivariateSelect{50}},
      {Knn{}, DecisionTree{}, RandomForest{}, ExtraTrees{}, GradientBoostedTrees{}, Logistic{}},
  };
  return registry;
}

}  // namespace phyto
