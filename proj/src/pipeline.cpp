#include "mutrank/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "mutrank/bayes.hpp"
#include "mutrank/coupling.hpp"
#include "mutrank/rng.hpp"

namespace mutrank::cli {

namespace {

using nlohmann::json;

// Pipeline failure tagged with the stage it happened in; the top-level
// handlers turn it into an exit-1 diagnostic.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

template <typename Fn>
decltype(auto) stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

json score_to_json(const Score& s) {
  if (s.is_exact() && s.rational().is_integer()) return s.rational().num();
  return s.as_double();
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["model"] = std::string(to_string(cfg.model));
  j["epsilon"] = cfg.epsilon;
  j["seed"] = cfg.seed;
  j["coverage_filter"] = cfg.coverage_filter;
  j["subsuming_only"] = cfg.subsuming_only;
  j["dedup_indistinguishable"] = cfg.dedup_indistinguishable;
  j["reason_filter"] =
      cfg.reason_filter ? json(std::string(to_string(*cfg.reason_filter))) : json(nullptr);
  if (cfg.sampling) {
    json s;
    if (cfg.sampling->kind == reduce::SamplingSpec::Kind::Uniform) {
      s["kind"] = "uniform";
      s["rate"] = cfg.sampling->rate;
    } else {
      s["kind"] = "stratified";
      s["cap_n"] = cfg.sampling->cap_n;
    }
    s["seed"] = cfg.sampling->seed;
    j["sampling"] = s;
  } else {
    j["sampling"] = nullptr;
  }
  if (cfg.classifier) {
    json c;
    c["kind"] = cfg.classifier->kind == classify::ClassifierKind::Mlp ? "mlp"
                                                                      : "logistic_regression";
    c["hidden_units"] = cfg.classifier->hidden_units;
    c["learning_rate"] = cfg.classifier->learning_rate;
    c["epochs"] = cfg.classifier->epochs;
    c["seed"] = cfg.classifier->seed;
    c["l2"] = cfg.classifier->l2;
    j["classifier"] = c;
  } else {
    j["classifier"] = nullptr;
  }
  j["format"] = cfg.output == OutputFormat::Json ? "json" : "table";
  return j;
}

std::string ranking_to_json(const RunConfig& cfg, const eval::Ranking& ranking) {
  json j;
  j["config"] = config_to_json(cfg);
  j["ranking"] = json::array();
  for (const eval::RankedMethod& e : ranking.entries) {
    json row;
    row["method"] = e.method.qualified_name;
    row["score"] = score_to_json(e.score);
    row["rank"] = e.rank;
    j["ranking"].push_back(row);
  }
  return j.dump(2) + "\n";
}

std::string ranking_to_table(const RunConfig& cfg, const eval::Ranking& ranking) {
  std::size_t method_width = 6;
  for (const eval::RankedMethod& e : ranking.entries)
    method_width = std::max(method_width, e.method.qualified_name.size());

  std::string out = "# config: " + config_to_json(cfg).dump() + "\n";
  out += "rank  method";
  out.append(method_width - 6 + 2, ' ');
  out += "score\n";
  for (const eval::RankedMethod& e : ranking.entries) {
    std::string rank = std::to_string(e.rank);
    out += rank;
    out.append(rank.size() < 4 ? 4 - rank.size() + 2 : 2, ' ');
    out += e.method.qualified_name;
    out.append(method_width - e.method.qualified_name.size() + 2, ' ');
    out += e.score.to_string();
    out += '\n';
  }
  return out;
}

std::string eval_to_json(const RunConfig& cfg, const eval::EvalReport& report,
                         std::size_t warnings) {
  json j;
  j["config"] = config_to_json(cfg);
  j["n_faults"] = report.n_faults;
  j["warnings"] = warnings;
  j["acc"] = json::object();
  for (const auto& [n, count] : report.acc) j["acc"][std::to_string(n)] = count;
  j["wef_per_fault"] = report.wef_per_fault;
  j["map_score"] = report.map_score;
  return j.dump(2) + "\n";
}

double wef_median(std::vector<std::size_t> wef) {
  if (wef.empty()) return 0.0;
  std::sort(wef.begin(), wef.end());
  std::size_t mid = wef.size() / 2;
  if (wef.size() % 2 == 1) return static_cast<double>(wef[mid]);
  return (static_cast<double>(wef[mid - 1]) + static_cast<double>(wef[mid])) / 2.0;
}

std::string eval_to_table(const RunConfig& cfg, const eval::EvalReport& report,
                          std::size_t warnings) {
  std::string out = "# config: " + config_to_json(cfg).dump() + "\n";
  out += "faults: " + std::to_string(report.n_faults) +
         " (skipped: " + std::to_string(warnings) + ")\n";
  for (const auto& [n, count] : report.acc)
    out += "acc@" + std::to_string(n) + ": " + std::to_string(count) + "\n";
  out += "wef_median: " + format_double(wef_median(report.wef_per_fault)) + "\n";
  out += "map: " + format_double(report.map_score) + "\n";
  return out;
}

void write_output(const std::string& text,
                  const std::optional<std::filesystem::path>& out_path, std::ostream& out) {
  if (out_path) {
    std::ofstream f(*out_path, std::ios::binary);
    if (!f) throw StageError("output", "cannot write " + out_path->string());
    f << text;
    if (!f) throw StageError("output", "write failed for " + out_path->string());
  } else {
    out << text;
  }
}

classify::TrainedModel train_for(const KillMatrix& km, const FailureSnapshot& snap,
                                 const RunConfig& cfg) {
  bool failing_only = cfg.model == Model::LrF || cfg.model == Model::MlpF;
  classify::TrainingSet ts = classify::build_training_set(
      km, snap,
      failing_only ? classify::TestSelection::FailingOnly : classify::TestSelection::AllTests);
  return classify::train(ts, *cfg.classifier);
}

int handle_failure(const StageError& e, std::ostream& err) {
  err << "error in " << e.stage() << ": " << e.what() << "\n";
  return 1;
}

int handle_usage(const UsageError& e, std::ostream& err) {
  err << "usage error: " << e.what() << "\n";
  return 2;
}

}  // namespace

std::string_view to_string(Model model) {
  switch (model) {
    case Model::EmF: return "em_f";
    case Model::EmFp: return "em_fp";
    case Model::PmMultF: return "pm_mult_f";
    case Model::PmAddF: return "pm_add_f";
    case Model::PmMultFp: return "pm_mult_fp";
    case Model::PmAddFp: return "pm_add_fp";
    case Model::PcFp: return "pc_fp";
    case Model::LrF: return "lr_f";
    case Model::LrFp: return "lr_fp";
    case Model::MlpF: return "mlp_f";
    case Model::MlpFp: return "mlp_fp";
  }
  return "pm_add_f";
}

std::optional<Model> model_from_string(std::string_view name) {
  for (Model m : {Model::EmF, Model::EmFp, Model::PmMultF, Model::PmAddF, Model::PmMultFp,
                  Model::PmAddFp, Model::PcFp, Model::LrF, Model::LrFp, Model::MlpF,
                  Model::MlpFp})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

bool is_classifier(Model model) {
  return model == Model::LrF || model == Model::LrFp || model == Model::MlpF ||
         model == Model::MlpFp;
}

RunConfig resolve(RunConfig cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
    throw UsageError("--epsilon must lie in (0, 1)");
  if (cfg.classifier && !is_classifier(cfg.model))
    throw UsageError("classifier settings require an lr_* or mlp_* model");
  if (is_classifier(cfg.model)) {
    if (!cfg.classifier) cfg.classifier.emplace();
    cfg.classifier->kind = (cfg.model == Model::MlpF || cfg.model == Model::MlpFp)
                               ? classify::ClassifierKind::Mlp
                               : classify::ClassifierKind::LogisticRegression;
    cfg.classifier->seed = cfg.seed;
    try {
      classify::validate(*cfg.classifier);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (cfg.sampling) {
    cfg.sampling->seed = cfg.seed;
    if (cfg.sampling->kind == reduce::SamplingSpec::Kind::Uniform &&
        !(cfg.sampling->rate > 0.0 && cfg.sampling->rate <= 1.0))
      throw UsageError("uniform sampling rate must lie in (0, 1]");
    if (cfg.sampling->kind == reduce::SamplingSpec::Kind::Stratified && cfg.sampling->cap_n < 1)
      throw UsageError("stratified sampling cap must be >= 1");
  }
  return cfg;
}

MatrixFormat matrix_format_of(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  if (ext == ".csv") return MatrixFormat::Csv;
  if (ext == ".json") return MatrixFormat::Json;
  throw UsageError("cannot infer matrix format from '" + path.string() +
                   "' (expected .csv or .json)");
}

KillMatrix apply_reductions(const KillMatrix& km, const FailureSnapshot& snap,
                            const RunConfig& cfg) {
  KillMatrix current = km;
  if (cfg.coverage_filter && snap.covered_methods())
    current = stage("coverage-filter", [&] { return restrict_to_coverage(current, snap); });
  if (cfg.reason_filter)
    current = stage("reason-filter",
                    [&] { return reduce::filter_kill_reason(current, *cfg.reason_filter); });
  if (cfg.subsuming_only)
    current = stage("subsumption", [&] {
      return reduce::keep_most_subsuming(current, cfg.dedup_indistinguishable);
    });
  if (cfg.sampling)
    current = stage("sampling", [&] { return reduce::apply_sampling(current, *cfg.sampling); });
  return current;
}

ScoreVector score_with_model(const KillMatrix& km, const FailureSnapshot& snap,
                             const RunConfig& cfg) {
  switch (cfg.model) {
    case Model::EmF: return bayes::score_em_f(km, snap);
    case Model::EmFp: return bayes::score_em_fp(km, snap);
    case Model::PmMultF: return bayes::score_pm_mult_f(km, snap, bayes::Epsilon(cfg.epsilon));
    case Model::PmAddF: return bayes::score_pm_add_f(km, snap);
    case Model::PmMultFp: return bayes::score_pm_mult_fp(km, snap, bayes::Epsilon(cfg.epsilon));
    case Model::PmAddFp: return bayes::score_pm_add_fp(km, snap);
    case Model::PcFp: return coupling::score_pc_fp(km, snap);
    case Model::LrF:
    case Model::LrFp:
    case Model::MlpF:
    case Model::MlpFp: {
      return classify::score_classifier(train_for(km, snap, cfg), snap);
    }
  }
  throw std::logic_error("unhandled model");
}

eval::Ranking run_fault(const std::filesystem::path& matrix_path,
                        const std::filesystem::path& snapshot_path, const RunConfig& cfg) {
  MatrixFormat format = matrix_format_of(matrix_path);
  KillMatrix km = stage("load", [&] { return load_kill_matrix(matrix_path, format); });
  FailureSnapshot snap = stage("load", [&] { return load_failure_snapshot(snapshot_path); });
  km = apply_reductions(km, snap, cfg);
  ScoreVector scores = stage("scoring", [&] { return score_with_model(km, snap, cfg); });
  return stage("ranking", [&] { return eval::rank(scores); });
}

int cmd_rank(const RankCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg = resolve(cmd.config);
    if ((cmd.save_model_path || cmd.load_model_path) && !is_classifier(cfg.model))
      throw UsageError("--save-model/--load-model require an lr_* or mlp_* model");

    eval::Ranking ranking;
    if (is_classifier(cfg.model)) {
      FailureSnapshot snap =
          stage("load", [&] { return load_failure_snapshot(cmd.snapshot_path); });
      classify::TrainedModel model = [&] {
        if (cmd.load_model_path)
          return stage("model-load",
                       [&] { return classify::load_trained_model(*cmd.load_model_path); });
        MatrixFormat format = matrix_format_of(cmd.matrix_path);
        KillMatrix km =
            stage("load", [&] { return load_kill_matrix(cmd.matrix_path, format); });
        km = apply_reductions(km, snap, cfg);
        return stage("training", [&] { return train_for(km, snap, cfg); });
      }();
      if (cmd.save_model_path)
        stage("model-save",
              [&] { classify::save_trained_model(model, *cmd.save_model_path); });
      ScoreVector scores =
          stage("scoring", [&] { return classify::score_classifier(model, snap); });
      ranking = stage("ranking", [&] { return eval::rank(scores); });
    } else {
      ranking = run_fault(cmd.matrix_path, cmd.snapshot_path, cfg);
    }

    std::string text = cfg.output == OutputFormat::Json ? ranking_to_json(cfg, ranking)
                                                        : ranking_to_table(cfg, ranking);
    write_output(text, cmd.out_path, out);
    return 0;
  } catch (const UsageError& e) {
    return handle_usage(e, err);
  } catch (const StageError& e) {
    return handle_failure(e, err);
  }
}

int cmd_eval(const EvalCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg = resolve(cmd.config);
    if (!std::filesystem::is_directory(cmd.corpus_dir))
      throw UsageError("corpus dir '" + cmd.corpus_dir.string() + "' is not a directory");

    struct Fault {
      std::filesystem::path dir;
      std::filesystem::path matrix;
    };
    std::vector<Fault> faults;
    for (const auto& entry : std::filesystem::directory_iterator(cmd.corpus_dir)) {
      if (!entry.is_directory()) continue;
      std::filesystem::path csv = entry.path() / "matrix.csv";
      std::filesystem::path js = entry.path() / "matrix.json";
      if (std::filesystem::exists(csv))
        faults.push_back({entry.path(), csv});
      else if (std::filesystem::exists(js))
        faults.push_back({entry.path(), js});
    }
    if (faults.empty())
      throw UsageError("corpus dir '" + cmd.corpus_dir.string() + "' contains no faults");
    std::sort(faults.begin(), faults.end(),
              [](const Fault& a, const Fault& b) { return a.dir < b.dir; });

    std::vector<eval::FaultResult> results;
    std::size_t warnings = 0;
    for (const Fault& fault : faults) {
      try {
        eval::Ranking ranking = run_fault(fault.matrix, fault.dir / "snapshot.json", cfg);
        eval::GroundTruth truth = stage(
            "truth", [&] { return eval::load_ground_truth(fault.dir / "truth.json"); });
        results.emplace_back(std::move(ranking), std::move(truth));
      } catch (const StageError& e) {
        ++warnings;
        err << "warning: skipping " << fault.dir.filename().string() << " (" << e.stage()
            << ": " << e.what() << ")\n";
      }
    }

    eval::EvalReport report = eval::evaluate(results);
    std::string text = cfg.output == OutputFormat::Json ? eval_to_json(cfg, report, warnings)
                                                        : eval_to_table(cfg, report, warnings);
    write_output(text, cmd.out_path, out);
    return 0;
  } catch (const UsageError& e) {
    return handle_usage(e, err);
  } catch (const StageError& e) {
    return handle_failure(e, err);
  }
}

int cmd_reduce(const ReduceCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    MatrixFormat in_format = matrix_format_of(cmd.matrix_path);
    MatrixFormat out_format = matrix_format_of(cmd.out_path);
    KillMatrix km =
        stage("load", [&] { return load_kill_matrix(cmd.matrix_path, in_format); });
    std::size_t before = km.mutant_count();

    if (cmd.reason_filter)
      km = stage("reason-filter",
                 [&] { return reduce::filter_kill_reason(km, *cmd.reason_filter); });
    if (cmd.graph_path)
      stage("graph", [&] {
        reduce::SubsumptionGraph graph = reduce::build_subsumption_graph(km);
        std::ofstream f(*cmd.graph_path, std::ios::binary);
        if (!f) throw ParseError("cannot write " + cmd.graph_path->string());
        f << reduce::subsumption_graph_to_dot(graph, km);
      });
    if (cmd.subsuming_only)
      km = stage("subsumption", [&] {
        return reduce::keep_most_subsuming(km, cmd.dedup_indistinguishable);
      });
    if (cmd.sampling) {
      if (cmd.sampling->kind == reduce::SamplingSpec::Kind::Uniform &&
          !(cmd.sampling->rate > 0.0 && cmd.sampling->rate <= 1.0))
        throw UsageError("uniform sampling rate must lie in (0, 1]");
      if (cmd.sampling->kind == reduce::SamplingSpec::Kind::Stratified && cmd.sampling->cap_n < 1)
        throw UsageError("stratified sampling cap must be >= 1");
      km = stage("sampling", [&] { return reduce::apply_sampling(km, *cmd.sampling); });
    }

    stage("write", [&] { save_kill_matrix(km, cmd.out_path, out_format); });
    out << "mutants retained: " << km.mutant_count() << " of " << before << " (removed "
        << before - km.mutant_count() << ")\n";
    return 0;
  } catch (const UsageError& e) {
    return handle_usage(e, err);
  } catch (const StageError& e) {
    return handle_failure(e, err);
  }
}

int cmd_synth(const SynthCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    if (cmd.n_faults < 1) throw UsageError("--faults must be >= 1");
    try {
      synth::validate(cmd.spec);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    for (int i = 0; i < cmd.n_faults; ++i) {
      synth::SynthSpec spec = cmd.spec;
      spec.seed = rng::mix(cmd.spec.seed, static_cast<std::uint64_t>(i));
      std::string name = "fault_" + std::string(i < 10 ? "00" : i < 100 ? "0" : "") +
                         std::to_string(i);
      stage("write", [&] {
        synth::write_fault_dir(synth::generate(spec), cmd.out_dir / name, cmd.format);
      });
    }
    out << "faults written: " << cmd.n_faults << "\n";
    return 0;
  } catch (const UsageError& e) {
    return handle_usage(e, err);
  } catch (const StageError& e) {
    return handle_failure(e, err);
  }
}

}  // namespace mutrank::cli
