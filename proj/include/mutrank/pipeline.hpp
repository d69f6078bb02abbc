#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "mutrank/classify.hpp"
#include "mutrank/corpus.hpp"
#include "mutrank/rank_eval.hpp"
#include "mutrank/reduce.hpp"
#include "mutrank/synth.hpp"

namespace mutrank::cli {

enum class Model {
  EmF,
  EmFp,
  PmMultF,
  PmAddF,
  PmMultFp,
  PmAddFp,
  PcFp,
  LrF,
  LrFp,
  MlpF,
  MlpFp,
};

std::string_view to_string(Model model);
std::optional<Model> model_from_string(std::string_view name);
bool is_classifier(Model model);

enum class OutputFormat { Json, Table };

// A command-line mistake (bad flag combination, unusable path, empty corpus
// directory). Mapped to exit code 2, unlike pipeline failures which exit 1.
class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Model model = Model::PmAddF;
  double epsilon = 1e-4;
  std::optional<reduce::SamplingSpec> sampling;
  std::optional<KillReason> reason_filter;
  bool subsuming_only = false;
  bool dedup_indistinguishable = false;
  bool coverage_filter = true;
  std::optional<classify::ClassifierConfig> classifier;  // classifier models only
  std::uint64_t seed = 0;
  OutputFormat output = OutputFormat::Table;
};

// Throws UsageError on contract violations (e.g. classifier settings on a
// counting model); fills in resolved classifier defaults for lr_*/mlp_*.
RunConfig resolve(RunConfig cfg);

// Infers Csv/Json from the file extension; UsageError otherwise.
MatrixFormat matrix_format_of(const std::filesystem::path& path);

// Reduction stages in fixed order: coverage -> reason -> subsumption ->
// sampling. Coverage is skipped when the snapshot carries no coverage set.
KillMatrix apply_reductions(const KillMatrix& km, const FailureSnapshot& snap,
                            const RunConfig& cfg);

ScoreVector score_with_model(const KillMatrix& km, const FailureSnapshot& snap,
                             const RunConfig& cfg);

// The full per-fault pipeline: load, reduce, score, rank.
eval::Ranking run_fault(const std::filesystem::path& matrix_path,
                        const std::filesystem::path& snapshot_path, const RunConfig& cfg);

struct RankCommand {
  std::filesystem::path matrix_path;
  std::filesystem::path snapshot_path;
  RunConfig config;
  std::optional<std::filesystem::path> out_path;         // default: stdout
  std::optional<std::filesystem::path> save_model_path;  // classifier models only
  std::optional<std::filesystem::path> load_model_path;  // classifier models only
};

struct EvalCommand {
  std::filesystem::path corpus_dir;
  RunConfig config;
  std::optional<std::filesystem::path> out_path;
};

struct ReduceCommand {
  std::filesystem::path matrix_path;
  std::filesystem::path out_path;
  std::optional<reduce::SamplingSpec> sampling;
  std::optional<KillReason> reason_filter;
  bool subsuming_only = false;
  bool dedup_indistinguishable = false;
  std::optional<std::filesystem::path> graph_path;  // DOT export
};

struct SynthCommand {
  std::filesystem::path out_dir;
  synth::SynthSpec spec;  // spec.seed is the master seed; faults derive from it
  int n_faults = 1;
  MatrixFormat format = MatrixFormat::Csv;
};

// Each returns a process exit code: 0 success, 1 pipeline failure (with a
// stage-named diagnostic on err), 2 usage error.
int cmd_rank(const RankCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_reduce(const ReduceCommand& cmd, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthCommand& cmd, std::ostream& out, std::ostream& err);

}  // namespace mutrank::cli
