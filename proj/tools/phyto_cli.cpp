#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "phyto/automl.hpp"
#include "phyto/datagen.hpp"
#include "phyto/error.hpp"
#include "phyto/eval.hpp"
#include "phyto/featsel.hpp"
#include "phyto/parallel.hpp"
#include "phyto/text.hpp"
#include "phyto/workflow.hpp"

namespace fs = std::filesystem;
using namespace phyto;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Usage problems detected after parsing (bad paths, inconsistent flags).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  std::string out;
};

struct MatrixInput {
  std::string in = ".";
  std::string dataset = "combined";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed for every random choice");
  cmd->add_option("--out", c.out, "Output directory")->required();
}

void add_matrix_input(CLI::App* cmd, MatrixInput& m) {
  cmd->add_option("--in", m.in, "Directory written by `extract`");
  cmd->add_option("--dataset", m.dataset, "Feature matrix variant")
      ->check(CLI::IsMember({"leaf", "stem", "combined"}));
}

Provenance provenance_of(const std::string& dataset) {
  if (dataset == "leaf") return Provenance::Leaf;
  if (dataset == "stem") return Provenance::Stem;
  return Provenance::Combined;
}

fs::path require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw UsageError("input file not found: " + path.string());
  return path;
}

FeatureMatrix load_part(const MatrixInput& m, const std::string& part) {
  const auto path = require_file(fs::path(m.in) / (m.dataset + "_" + part + ".csv"));
  return load_feature_matrix(path, provenance_of(m.dataset));
}

PipelineSpec resolve_spec(const std::string& text, const std::string& file) {
  if (!text.empty() && !file.empty()) throw UsageError("use either --spec or --spec-file");
  if (!file.empty()) {
    std::ifstream in(require_file(file));
    std::string line;
    std::getline(in, line);
    return PipelineSpec::parse(trim(line));
  }
  if (text.empty()) throw UsageError("a pipeline spec is required (--spec or --spec-file)");
  return PipelineSpec::parse(text);
}

FeatureMatrix restrict_features(const FeatureMatrix& m, const std::string& features_file) {
  if (features_file.empty()) return m;
  std::ifstream in(require_file(features_file));
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto name = trim(line);
    if (!name.empty()) names.emplace_back(name);
  }
  if (names.empty()) throw UsageError("feature list is empty: " + features_file);
  return m.select_columns(names);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileMissing, "cannot write " + path.string());
  out << text;
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ostringstream ss;
  writer(ss);
  write_text(path, ss.str());
}

/// Effective values of every option of `cmd`, defaults included.
void write_config(const fs::path& dir, const CLI::App* cmd) {
  nlohmann::ordered_json j;
  j["command"] = cmd->get_name();
  nlohmann::ordered_json options = nlohmann::ordered_json::object();
  for (const auto* opt : cmd->get_options()) {
    const auto& name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      options[name] = r.size() == 1 ? nlohmann::ordered_json(r.front()) : nlohmann::ordered_json(r);
    } else {
      options[name] = opt->get_default_str();
    }
  }
  j["options"] = options;
  write_text(dir / "config.json", j.dump(2) + "\n");
}

fs::path prepare_out(const Common& c) {
  fs::create_directories(c.out);
  return c.out;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  Common common;
  SynthConfig cfg;
};

int run_synth(const SynthArgs& a, const CLI::App* cmd) {
  auto cfg = a.cfg;
  cfg.seed = a.common.seed;
  cfg.validate();
  const auto out = prepare_out(a.common);
  const auto manifests = write_dataset(cfg, out);
  write_config(out, cmd);
  std::cout << "wrote " << manifests.size() << " expositions to " << (out / "expositions").string() << "\n";
  return 0;
}

// -------------------------------------------------------------- extract

struct ExtractArgs {
  Common common;
  std::string data;
  double analysis_ratio = 0.8;
  double min_coverage = 0.5;
};

int run_extract(const ExtractArgs& a, const CLI::App* cmd) {
  if (!fs::is_directory(a.data)) throw UsageError("dataset directory not found: " + a.data);
  if (!(a.analysis_ratio > 0.0 && a.analysis_ratio < 1.0)) throw UsageError("--analysis-ratio must be in (0, 1)");
  const auto manifests = find_manifests(a.data);
  if (manifests.empty()) throw UsageError("no manifests in " + a.data);
  const auto out = prepare_out(a.common);

  ExtractConfig cfg;
  cfg.min_coverage = a.min_coverage;
  std::vector<ExpositionResult> results(manifests.size());
  parallel_for(manifests.size(), [&](std::size_t i) { results[i] = process_exposition(manifests[i], cfg); });

  const auto matrices = build_matrices(results);
  std::vector<std::string> ids;
  for (const auto& r : results) {
    if (!r.accepted.empty()) ids.push_back(r.manifest.exposition_id);
  }
  const auto split = split_expositions(ids, a.analysis_ratio, a.common.seed);

  const std::pair<const char*, const FeatureMatrix*> variants[] = {
      {"leaf", &matrices.leaf}, {"stem", &matrices.stem}, {"combined", &matrices.combined}};
  for (const auto& [name, m] : variants) {
    save_feature_matrix(out / (std::string(name) + ".csv"), *m);
    save_feature_matrix(out / (std::string(name) + "_analysis.csv"), rows_of(*m, split.analysis));
    save_feature_matrix(out / (std::string(name) + "_test.csv"), rows_of(*m, split.test));
  }
  write_file(out / "split.csv", [&](std::ostream& o) {
    o << "exposition_id,set\n";
    for (const auto& id : ids) o << id << ',' << (split.analysis.contains(id) ? "analysis" : "test") << '\n';
  });
  write_file(out / "rejected.csv", [&](std::ostream& o) {
    o << "exposition_id,channel,reason\n";
    for (const auto& r : results) {
      for (const auto& [channel, reason] : r.rejected) {
        std::string clean = reason;
        for (auto& ch : clean) {
          if (ch == ',' || ch == '\n') ch = ';';
        }
        o << r.manifest.exposition_id << ',' << channel << ',' << clean << '\n';
      }
    }
  });
  write_config(out, cmd);
  std::cout << "leaf " << matrices.leaf.rows() << "x" << matrices.leaf.cols() << ", stem " << matrices.stem.rows()
            << "x" << matrices.stem.cols() << ", combined " << matrices.combined.rows() << "x"
            << matrices.combined.cols() << "; analysis " << split.analysis.size() << " / test " << split.test.size()
            << " expositions\n";
  return 0;
}

// ---------------------------------------------------------------- automl

struct AutomlArgs {
  Common common;
  MatrixInput input;
  std::string metric = "roc_auc";
  std::size_t splits = 5;
  double split_ratio = 0.8;
  std::size_t hpo_steps = 100;
  double timeout = 0.0;
};

int run_automl(const AutomlArgs& a, const CLI::App* cmd) {
  const auto x = load_part(a.input, "analysis");
  SearchConfig cfg;
  cfg.metric = parse_metric(a.metric);
  cfg.n_validation_splits = a.splits;
  cfg.split_ratio = a.split_ratio;
  cfg.n_hpo_steps = a.hpo_steps;
  cfg.seed = a.common.seed;
  if (a.timeout > 0.0) cfg.timeout = std::chrono::duration<double>(a.timeout);
  cfg.validate();
  const auto out = prepare_out(a.common);
  const auto report = search(x, cfg);
  write_file(out / "automl_report.csv", [&](std::ostream& o) { write_search_report_csv(o, report); });
  write_file(out / "automl_summary.csv", [&](std::ostream& o) { write_search_summary_csv(o, report); });
  write_text(out / "best_spec.txt", report.best_spec.to_string() + "\n");
  write_config(out, cmd);
  std::cout << report.best_spec.to_string() << "  mean " << to_string(cfg.metric) << " "
            << format_double(report.best_score) << "\n";
  return 0;
}

// ---------------------------------------------------------------- select

struct SelectArgs {
  Common common;
  MatrixInput input;
  std::string spec;
  std::string spec_file;
  std::size_t runs = 100;
  double split_ratio = 0.8;
  std::string schedule = "40:10,100:5,inf:3";
  std::size_t max_rounds = 0;
};

int run_select(const SelectArgs& a, const CLI::App* cmd) {
  const auto x = load_part(a.input, "analysis");
  const auto spec = resolve_spec(a.spec, a.spec_file);
  const auto schedule = BeamSchedule::parse(a.schedule);
  SelectionConfig cfg;
  cfg.n_runs = a.runs;
  cfg.split_ratio = a.split_ratio;
  cfg.seed = a.common.seed;
  if (a.max_rounds > 0) cfg.max_rounds = a.max_rounds;
  const auto out = prepare_out(a.common);
  const auto trace = forward_select(x, spec, schedule, cfg);
  const auto best = best_subset(trace);
  write_file(out / "selection_trace.csv", [&](std::ostream& o) { write_trace_csv(o, trace); });
  write_file(out / "selection_curve.csv", [&](std::ostream& o) { write_selection_curve_csv(o, running_best_curve(trace)); });
  write_file(out / "best_subset.csv", [&](std::ostream& o) {
    o << "key,value\nsize," << best.size << "\nmean_roc_auc," << format_double(best.mean_roc_auc)
      << "\nstd_roc_auc," << format_double(best.std_roc_auc) << "\nfeatures," << join(best.names, ";") << '\n';
  });
  write_text(out / "best_features.txt", join(best.names, "\n") + "\n");
  write_config(out, cmd);
  std::cout << "best subset: " << best.size << " features, mean ROC AUC " << format_double(best.mean_roc_auc)
            << "\n";
  return 0;
}

// ------------------------------------------------------------------ eval

struct EvalArgs {
  Common common;
  MatrixInput input;
  std::string mode = "repeated";
  std::string spec;
  std::string spec_file;
  std::string features_file;
  std::size_t runs = 500;
  double train_ratio = 0.8;
  std::vector<std::size_t> grid;
  std::string scalar;
};

int run_eval(const EvalArgs& a, const CLI::App* cmd) {
  EvalConfig cfg;
  cfg.n_runs = a.runs;
  cfg.train_ratio = a.train_ratio;
  cfg.seed = a.common.seed;
  if (cfg.n_runs == 0) throw UsageError("--runs must be >= 1");
  const auto analysis = restrict_features(load_part(a.input, "analysis"), a.features_file);

  if (a.mode == "baseline") {
    const std::string scalar =
        !a.scalar.empty() ? a.scalar : (a.input.dataset == "combined" ? "leaf__mean" : "mean");
    const auto column = analysis.values.column(analysis.column_index(scalar));
    const auto report = threshold_baseline(column, analysis.labels, cfg, groups_of(analysis));
    const auto out = prepare_out(a.common);
    write_file(out / "baseline.csv", [&](std::ostream& o) { write_baseline_csv(o, report); });
    write_config(out, cmd);
    std::cout << "baseline (" << scalar << ") mean accuracy " << format_double(report.accuracy.mean) << "\n";
    return 0;
  }

  const auto spec = resolve_spec(a.spec, a.spec_file);
  if (a.mode == "learning") {
    auto grid = a.grid;
    if (grid.empty()) {
      const auto plan = stratified_shuffle_splits(analysis.labels, groups_of(analysis), 1, cfg.train_ratio, cfg.seed);
      const std::size_t train = plan.splits.front().train.size();
      for (std::size_t m = 10; m < train; m += 10) grid.push_back(m);
      grid.push_back(train);
    }
    const auto points = learning_curve(spec, analysis, grid, cfg);
    const auto out = prepare_out(a.common);
    write_file(out / "learning_curve.csv", [&](std::ostream& o) { write_learning_curve_csv(o, points); });
    write_config(out, cmd);
    std::cout << "learning curve: " << points.size() << " points, final mean ROC AUC "
              << format_double(points.back().mean_roc_auc) << "\n";
    return 0;
  }

  EvaluationReport report;
  if (a.mode == "holdout") {
    const auto test = restrict_features(load_part(a.input, "test"), a.features_file);
    report = holdout_eval(spec, analysis, test, cfg);
  } else {
    report = repeated_eval(spec, analysis, cfg);
  }
  const auto out = prepare_out(a.common);
  write_file(out / "eval_summary.csv", [&](std::ostream& o) { write_summary_csv(o, report); });
  write_file(out / "eval_curve.csv", [&](std::ostream& o) { write_curve_csv(o, report); });
  write_config(out, cmd);
  std::cout << a.mode << ": mean ROC AUC " << format_double(report.roc_auc.mean) << ", mean accuracy "
            << format_double(report.accuracy.mean) << "\n";
  return 0;
}

bool is_usage_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidSchedule:
    case ErrorCode::ParseError:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plant electrophysiology stimulus classification toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic exposition dataset");
  add_common(synth_cmd, synth.common);
  synth_cmd->add_option("--plants", synth.cfg.n_plants, "Number of plants");
  synth_cmd->add_option("--expositions", synth.cfg.expositions_per_plant, "Expositions per plant");
  synth_cmd->add_option("--rate", synth.cfg.sampling_rate, "Sampling rate in Hz");
  synth_cmd->add_option("--response-strength", synth.cfg.response_strength, "Class signal strength in [0, 1]");
  synth_cmd->add_option("--response-amplitude", synth.cfg.response_amplitude, "Leaf response amplitude (mV)");
  synth_cmd->add_option("--response-rise", synth.cfg.response_rise, "Response rise time constant (s)");
  synth_cmd->add_option("--response-decay", synth.cfg.response_decay, "Response decay time constant (s)");
  synth_cmd->add_option("--amplitude-jitter", synth.cfg.amplitude_jitter, "Relative per-plant amplitude spread");
  synth_cmd->add_option("--noise-std", synth.cfg.noise_std, "White noise std (mV)");
  synth_cmd->add_option("--walk-std", synth.cfg.walk_std, "Stationary std of the wandering baseline (mV)");
  synth_cmd->add_option("--walk-time-constant", synth.cfg.walk_time_constant, "Reversion time of the baseline (s)");
  synth_cmd->add_option("--drift-amplitude", synth.cfg.drift_amplitude, "Sinusoidal drift amplitude (mV)");
  synth_cmd->add_option("--drift-period", synth.cfg.drift_period, "Sinusoidal drift period (s)");
  synth_cmd->add_option("--offset-spread", synth.cfg.offset_spread, "Per-plant offset std (mV)");

  ExtractArgs extract;
  auto* extract_cmd = app.add_subcommand("extract", "Preprocess recordings and build feature matrices");
  add_common(extract_cmd, extract.common);
  extract_cmd->add_option("--data", extract.data, "Dataset directory")->required();
  extract_cmd->add_option("--analysis-ratio", extract.analysis_ratio, "Share of expositions in the analysis set");
  extract_cmd->add_option("--min-coverage", extract.min_coverage, "Minimum raw coverage per window");

  AutomlArgs automl;
  auto* automl_cmd = app.add_subcommand("automl", "Two-phase pipeline search on the analysis matrix");
  add_common(automl_cmd, automl.common);
  add_matrix_input(automl_cmd, automl.input);
  automl_cmd->add_option("--metric", automl.metric, "Search metric")->check(CLI::IsMember({"roc_auc", "accuracy"}));
  automl_cmd->add_option("--splits", automl.splits, "Validation splits per candidate");
  automl_cmd->add_option("--split-ratio", automl.split_ratio, "Training share of each validation split");
  automl_cmd->add_option("--hpo-steps", automl.hpo_steps, "Random hyperparameter draws in phase 2");
  automl_cmd->add_option("--timeout", automl.timeout, "Wall-clock limit in seconds (0 = none)");

  SelectArgs select;
  auto* select_cmd = app.add_subcommand("select", "Beam forward feature selection");
  add_common(select_cmd, select.common);
  add_matrix_input(select_cmd, select.input);
  select_cmd->add_option("--spec", select.spec, "Pipeline spec text");
  select_cmd->add_option("--spec-file", select.spec_file, "File whose first line is a pipeline spec");
  select_cmd->add_option("--runs", select.runs, "Scoring splits per candidate set");
  select_cmd->add_option("--split-ratio", select.split_ratio, "Training share of each scoring split");
  select_cmd->add_option("--schedule", select.schedule, "Beam schedule as size:width pairs");
  select_cmd->add_option("--max-rounds", select.max_rounds, "Round cap (0 = min(columns, 120))");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a pipeline or the threshold baseline");
  add_common(eval_cmd, eval.common);
  add_matrix_input(eval_cmd, eval.input);
  eval_cmd->add_option("--mode", eval.mode, "Evaluation protocol")
      ->check(CLI::IsMember({"repeated", "holdout", "learning", "baseline"}));
  eval_cmd->add_option("--spec", eval.spec, "Pipeline spec text");
  eval_cmd->add_option("--spec-file", eval.spec_file, "File whose first line is a pipeline spec");
  eval_cmd->add_option("--features-file", eval.features_file, "Restrict to the feature names listed one per line");
  eval_cmd->add_option("--runs", eval.runs, "Number of runs");
  eval_cmd->add_option("--train-ratio", eval.train_ratio, "Training share of each split");
  eval_cmd->add_option("--grid", eval.grid, "Learning-curve training sizes")->delimiter(',');
  eval_cmd->add_option("--scalar", eval.scalar, "Baseline column (default mean, leaf__mean for combined)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth, synth_cmd);
    if (*extract_cmd) return run_extract(extract, extract_cmd);
    if (*automl_cmd) return run_automl(automl, automl_cmd);
    if (*select_cmd) return run_select(select, select_cmd);
    if (*eval_cmd) return run_eval(eval, eval_cmd);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_usage_code(e.code()) ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
