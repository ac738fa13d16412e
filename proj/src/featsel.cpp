#include "phyto/featsel.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "phyto/error.hpp"
#include "phyto/parallel.hpp"
#include "phyto/random.hpp"
#include "phyto/text.hpp"

namespace phyto {

namespace {

constexpr std::size_t kDefaultRoundCap = 120;

bool better(const ScoredSet& a, const ScoredSet& b) {
  if (a.mean_roc_auc != b.mean_roc_auc) return a.mean_roc_auc > b.mean_roc_auc;
  return a.features < b.features;
}

std::vector<std::string> names_of(const SelectionTrace& trace, const std::vector<std::size_t>& features) {
  std::vector<std::string> out;
  out.reserve(features.size());
  for (auto f : features) out.push_back(trace.column_names[f]);
  return out;
}

}  // namespace

BeamSchedule BeamSchedule::default_schedule() {
  return BeamSchedule{{{40, 10}, {100, 5}, {std::nullopt, 3}}};
}

BeamSchedule BeamSchedule::parse(std::string_view text) {
  BeamSchedule schedule;
  for (auto part : split(text, ',')) {
    const auto fields = split(trim(part), ':');
    if (fields.size() != 2) throw Error(ErrorCode::InvalidSchedule, "expected size:width, got '" + std::string(part) + "'");
    BeamStage stage;
    const auto size_text = trim(fields[0]);
    if (size_text != "inf") {
      const auto size = parse_int(size_text);
      if (!size || *size < 1) throw Error(ErrorCode::InvalidSchedule, "bad set size '" + std::string(size_text) + "'");
      stage.max_set_size = static_cast<std::size_t>(*size);
    }
    const auto width = parse_int(trim(fields[1]));
    if (!width || *width < 1) throw Error(ErrorCode::InvalidSchedule, "bad beam width '" + std::string(fields[1]) + "'");
    stage.width = static_cast<std::size_t>(*width);
    schedule.stages.push_back(stage);
  }
  schedule.validate();
  return schedule;
}

std::string BeamSchedule::to_string() const {
  std::vector<std::string> parts;
  for (const auto& s : stages) {
    parts.push_back((s.max_set_size ? std::to_string(*s.max_set_size) : std::string("inf")) + ":" +
                    std::to_string(s.width));
  }
  return join(parts, ",");
}

void BeamSchedule::validate() const {
  if (stages.empty()) throw Error(ErrorCode::InvalidSchedule, "schedule has no stages");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].width < 1) throw Error(ErrorCode::InvalidSchedule, "beam widths must be >= 1");
    const bool last = i + 1 == stages.size();
    if (!stages[i].max_set_size && !last) throw Error(ErrorCode::InvalidSchedule, "only the last stage may be unbounded");
    if (i > 0 && stages[i].max_set_size && *stages[i].max_set_size <= *stages[i - 1].max_set_size) {
      throw Error(ErrorCode::InvalidSchedule, "max set sizes must be strictly increasing");
    }
  }
}

std::size_t BeamSchedule::width_for(std::size_t set_size) const {
  for (const auto& s : stages) {
    if (!s.max_set_size || set_size <= *s.max_set_size) return s.width;
  }
  return stages.back().width;
}

SplitPlan round_splits(const Labels& y, const SelectionConfig& cfg, std::size_t round, const Groups& groups) {
  return stratified_shuffle_splits(y, groups, cfg.n_runs, cfg.split_ratio, derive_seed(cfg.seed, round));
}

ScoredSet score_subset(const PipelineSpec& spec, const Matrix& x, const Labels& y,
                       const std::vector<std::size_t>& features, const SplitPlan& splits) {
  ScoredSet result;
  result.features = features;
  try {
    const Matrix sub = x.select_cols(features);
    std::vector<double> aucs;
    aucs.reserve(splits.splits.size());
    for (const auto& s : splits.splits) {
      const auto model = fit(spec, sub.select_rows(s.train), select_labels(y, s.train));
      aucs.push_back(roc_auc(model.predict_score(sub.select_rows(s.validation)), select_labels(y, s.validation)));
    }
    const auto summary = summarize(aucs);
    result.mean_roc_auc = summary.mean;
    result.std_roc_auc = summary.std;
  } catch (const Error&) {
    result.failed = true;
    result.mean_roc_auc = -std::numeric_limits<double>::infinity();
    result.std_roc_auc = 0.0;
  }
  return result;
}

SelectionTrace forward_select(const FeatureMatrix& x, const PipelineSpec& spec, const BeamSchedule& schedule,
                              const SelectionConfig& cfg) {
  schedule.validate();
  spec.validate();
  x.check();
  if (x.values.rows() == 0 || x.values.cols() == 0) throw Error(ErrorCode::TooFewSamples, "feature matrix is empty");
  if (cfg.n_runs < 1) throw Error(ErrorCode::InvalidConfig, "n_runs must be >= 1");
  if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) throw Error(ErrorCode::InvalidConfig, "split ratio must be in (0, 1)");
  std::size_t counts[2] = {0, 0};
  for (int v : x.labels) counts[v == 1] += 1;
  for (auto c : counts) {
    if (c < 2) throw Error(ErrorCode::TooFewSamples, "each class needs at least 2 samples");
  }

  const std::size_t n_cols = x.values.cols();
  const std::size_t rounds = std::min(n_cols, cfg.max_rounds.value_or(std::min(n_cols, kDefaultRoundCap)));

  SelectionTrace trace;
  trace.column_names = x.column_names;
  trace.spec = spec;
  trace.schedule = schedule;
  trace.config = cfg;

  const auto groups = groups_of(x);
  std::vector<std::vector<std::size_t>> beam{{}};
  for (std::size_t round = 1; round <= rounds; ++round) {
    std::set<std::vector<std::size_t>> unique;
    for (const auto& base : beam) {
      for (std::size_t f = 0; f < n_cols; ++f) {
        if (std::binary_search(base.begin(), base.end(), f)) continue;
        auto candidate = base;
        candidate.insert(std::upper_bound(candidate.begin(), candidate.end(), f), f);
        unique.insert(std::move(candidate));
      }
    }
    if (unique.empty()) break;
    const std::vector<std::vector<std::size_t>> candidates(unique.begin(), unique.end());
    const auto splits = round_splits(x.labels, cfg, round, groups);

    std::vector<ScoredSet> scored(candidates.size());
    parallel_for(candidates.size(),
                 [&](std::size_t i) { scored[i] = score_subset(spec, x.values, x.labels, candidates[i], splits); });

    const std::size_t width = std::min(schedule.width_for(round), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(width), scored.end(), better);
    scored.resize(width);

    SelectionRound r;
    r.size = round;
    r.n_candidates = candidates.size();
    r.kept = std::move(scored);
    beam.clear();
    for (const auto& s : r.kept) beam.push_back(s.features);
    trace.rounds.push_back(std::move(r));
  }
  return trace;
}

BestSubset best_subset(const SelectionTrace& trace) {
  if (trace.rounds.empty()) throw Error(ErrorCode::EmptyTrace, "selection trace has no rounds");
  const ScoredSet* best = nullptr;
  std::vector<std::string> best_names;
  for (const auto& round : trace.rounds) {
    for (const auto& s : round.kept) {
      auto names = names_of(trace, s.features);
      const bool wins = best == nullptr || s.mean_roc_auc > best->mean_roc_auc ||
                        (s.mean_roc_auc == best->mean_roc_auc &&
                         (s.features.size() < best->features.size() ||
                          (s.features.size() == best->features.size() && names < best_names)));
      if (wins) {
        best = &s;
        best_names = std::move(names);
      }
    }
  }
  if (best == nullptr) throw Error(ErrorCode::EmptyTrace, "selection trace has no scored sets");
  return BestSubset{best->features, best_names, best->features.size(), best->mean_roc_auc, best->std_roc_auc};
}

std::vector<CurvePoint> running_best_curve(const SelectionTrace& trace) {
  if (trace.rounds.empty()) throw Error(ErrorCode::EmptyTrace, "selection trace has no rounds");
  std::vector<CurvePoint> curve;
  double running = -std::numeric_limits<double>::infinity();
  for (const auto& round : trace.rounds) {
    const auto& top = round.kept.front();
    running = std::max(running, top.mean_roc_auc);
    curve.push_back(CurvePoint{round.size, top.mean_roc_auc, top.std_roc_auc, running});
  }
  return curve;
}

void write_trace_csv(std::ostream& out, const SelectionTrace& trace) {
  out << "size,rank,feature_names,mean_roc_auc,std_roc_auc\n";
  for (const auto& round : trace.rounds) {
    for (std::size_t rank = 0; rank < round.kept.size(); ++rank) {
      const auto& s = round.kept[rank];
      out << round.size << ',' << rank + 1 << ',' << join(names_of(trace, s.features), ";") << ','
          << format_double(s.mean_roc_auc) << ',' << format_double(s.std_roc_auc) << '\n';
    }
  }
  const auto best = best_subset(trace);
  out << best.size << ",best," << join(best.names, ";") << ',' << format_double(best.mean_roc_auc) << ','
      << format_double(best.std_roc_auc) << '\n';
}

void write_selection_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "size,mean_roc_auc,std_roc_auc,running_max\n";
  for (const auto& p : curve) {
    out << p.size << ',' << format_double(p.mean_roc_auc) << ',' << format_double(p.std_roc_auc) << ','
        << format_double(p.running_max) << '\n';
  }
}

}  // namespace phyto
