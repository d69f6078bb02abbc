#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mutrank/pipeline.hpp"

namespace {

using mutrank::cli::UsageError;

mutrank::reduce::SamplingSpec parse_sample(const std::string& arg) {
  auto pos = arg.find(':');
  if (pos != std::string::npos) {
    std::string kind = arg.substr(0, pos);
    std::string value = arg.substr(pos + 1);
    try {
      mutrank::reduce::SamplingSpec spec;
      if (kind == "uniform") {
        spec.kind = mutrank::reduce::SamplingSpec::Kind::Uniform;
        spec.rate = std::stod(value);
        return spec;
      }
      if (kind == "stratified") {
        spec.kind = mutrank::reduce::SamplingSpec::Kind::Stratified;
        spec.cap_n = std::stoi(value);
        return spec;
      }
    } catch (const std::exception&) {
    }
  }
  throw UsageError("--sample expects uniform:<rate> or stratified:<n>, got '" + arg + "'");
}

mutrank::KillReason parse_reason(const std::string& arg) {
  if (arg == "assertion") return mutrank::KillReason::Assertion;
  if (arg == "timeout") return mutrank::KillReason::Timeout;
  if (arg == "exception") return mutrank::KillReason::Exception;
  throw UsageError("--reason expects assertion|timeout|exception, got '" + arg + "'");
}

// "lo:hi" or a single count.
void parse_mutant_range(const std::string& arg, mutrank::synth::SynthSpec& spec) {
  try {
    auto pos = arg.find(':');
    if (pos == std::string::npos) {
      spec.mutants_per_method_min = spec.mutants_per_method_max = std::stoi(arg);
    } else {
      spec.mutants_per_method_min = std::stoi(arg.substr(0, pos));
      spec.mutants_per_method_max = std::stoi(arg.substr(pos + 1));
    }
  } catch (const std::exception&) {
    throw UsageError("--mutants expects <n> or <lo>:<hi>, got '" + arg + "'");
  }
}

void parse_reason_weights(const std::string& arg, mutrank::synth::ReasonWeights& w) {
  auto first = arg.find(':');
  auto second = first == std::string::npos ? std::string::npos : arg.find(':', first + 1);
  if (second == std::string::npos)
    throw UsageError("--reason-weights expects a:t:e, got '" + arg + "'");
  try {
    w.assertion = std::stod(arg.substr(0, first));
    w.timeout = std::stod(arg.substr(first + 1, second - first - 1));
    w.exception = std::stod(arg.substr(second + 1));
  } catch (const std::exception&) {
    throw UsageError("--reason-weights expects a:t:e, got '" + arg + "'");
  }
}

struct ModelFlags {
  std::string model = "pm_add_f";
  double epsilon = 1e-4;
  std::string sample;
  std::uint64_t seed = 0;
  std::string reason;
  bool subsuming_only = false;
  bool dedup_indistinguishable = false;
  bool no_coverage_filter = false;
  std::string format = "table";
  std::string out;
  int hidden_units = 50;
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-4;
  bool classifier_flag_used = false;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  static const std::vector<std::string> kModels = {
      "em_f",  "em_fp", "pm_mult_f", "pm_add_f", "pm_mult_fp", "pm_add_fp",
      "pc_fp", "lr_f",  "lr_fp",     "mlp_f",    "mlp_fp"};
  cmd->add_option("--model", f.model, "Scoring model")
      ->check(CLI::IsMember(kModels))
      ->capture_default_str();
  cmd->add_option("--epsilon", f.epsilon, "Smoothing constant for pm_mult_* models")
      ->capture_default_str();
  cmd->add_option("--sample", f.sample, "Mutant sampling: uniform:<rate> or stratified:<n>");
  cmd->add_option("--seed", f.seed, "Seed for sampling and classifier training")
      ->capture_default_str();
  cmd->add_option("--reason", f.reason, "Keep only kills with this reason")
      ->check(CLI::IsMember({"assertion", "timeout", "exception"}));
  cmd->add_flag("--subsuming-only", f.subsuming_only,
                "Reduce to the most-subsuming mutants before scoring");
  cmd->add_flag("--dedup-indistinguishable", f.dedup_indistinguishable,
                "Keep one mutant per indistinguishable group when reducing");
  cmd->add_flag("--no-coverage-filter", f.no_coverage_filter,
                "Ignore the snapshot's covered_methods");
  cmd->add_option("--format", f.format, "Output format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  cmd->add_option("--out", f.out, "Write output to a file instead of stdout");
  cmd->add_option("--hidden-units", f.hidden_units, "MLP hidden width")
      ->capture_default_str();
  cmd->add_option("--learning-rate", f.learning_rate, "Gradient-descent step size")
      ->capture_default_str();
  cmd->add_option("--epochs", f.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--l2", f.l2, "L2 weight penalty")->capture_default_str();
}

mutrank::cli::RunConfig build_config(const CLI::App* cmd, const ModelFlags& f) {
  mutrank::cli::RunConfig cfg;
  auto model = mutrank::cli::model_from_string(f.model);
  if (!model) throw UsageError("unknown model '" + f.model + "'");
  cfg.model = *model;
  cfg.epsilon = f.epsilon;
  cfg.seed = f.seed;
  if (!f.sample.empty()) cfg.sampling = parse_sample(f.sample);
  if (!f.reason.empty()) cfg.reason_filter = parse_reason(f.reason);
  cfg.subsuming_only = f.subsuming_only;
  cfg.dedup_indistinguishable = f.dedup_indistinguishable;
  cfg.coverage_filter = !f.no_coverage_filter;
  cfg.output = f.format == "json" ? mutrank::cli::OutputFormat::Json
                                  : mutrank::cli::OutputFormat::Table;
  bool classifier_flags = cmd->count("--hidden-units") || cmd->count("--learning-rate") ||
                          cmd->count("--epochs") || cmd->count("--l2");
  if (classifier_flags || mutrank::cli::is_classifier(cfg.model)) {
    mutrank::classify::ClassifierConfig cc;
    cc.hidden_units = f.hidden_units;
    cc.learning_rate = f.learning_rate;
    cc.epochs = f.epochs;
    cc.l2 = f.l2;
    cc.seed = f.seed;
    cfg.classifier = cc;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fault localisation from mutation kill matrices"};
  app.require_subcommand(1);

  // rank
  auto* rank = app.add_subcommand("rank", "Rank methods of one fault by suspiciousness");
  std::string rank_matrix, rank_snapshot, save_model, load_model;
  ModelFlags rank_flags;
  rank->add_option("matrix", rank_matrix, "Kill matrix (.csv or .json)")->required();
  rank->add_option("snapshot", rank_snapshot, "Failure snapshot JSON")->required();
  add_model_flags(rank, rank_flags);
  rank->add_option("--save-model", save_model, "Serialise the trained classifier");
  rank->add_option("--load-model", load_model, "Score with a previously trained classifier");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a model over a corpus of faults");
  std::string eval_dir;
  ModelFlags eval_flags;
  eval->add_option("corpus_dir", eval_dir, "Directory of fault_* subdirectories")->required();
  add_model_flags(eval, eval_flags);

  // reduce
  auto* red = app.add_subcommand("reduce", "Reduce a kill matrix and write the result");
  std::string red_matrix, red_out, red_sample, red_reason, red_graph;
  bool red_subsuming = false, red_dedup = false;
  std::uint64_t red_seed = 0;
  red->add_option("matrix", red_matrix, "Kill matrix (.csv or .json)")->required();
  red->add_option("--out", red_out, "Output matrix path (.csv or .json)")->required();
  red->add_option("--sample", red_sample, "uniform:<rate> or stratified:<n>");
  red->add_option("--seed", red_seed, "Sampling seed")->capture_default_str();
  red->add_option("--reason", red_reason, "Keep only kills with this reason")
      ->check(CLI::IsMember({"assertion", "timeout", "exception"}));
  red->add_flag("--subsuming-only", red_subsuming, "Keep only most-subsuming mutants");
  red->add_flag("--dedup-indistinguishable", red_dedup,
                "Keep one mutant per indistinguishable group");
  red->add_option("--graph", red_graph, "Write the subsumption graph as DOT");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic fault corpus");
  std::string synth_out, synth_mutants = "1", synth_weights, synth_format = "csv";
  mutrank::synth::SynthSpec spec;
  int n_faults = 1;
  synth->add_option("out_dir", synth_out, "Corpus output directory")->required();
  synth->add_option("--faults", n_faults, "Number of faults to generate")
      ->capture_default_str();
  synth->add_option("--methods", spec.n_methods, "Methods per program")
      ->capture_default_str();
  synth->add_option("--mutants", synth_mutants, "Mutants per method: <n> or <lo>:<hi>")
      ->capture_default_str();
  synth->add_option("--tests", spec.n_tests, "Tests per suite")->capture_default_str();
  synth->add_option("--failing", spec.n_failing, "Failing tests per fault")
      ->capture_default_str();
  synth->add_option("--coupling", spec.coupling,
                    "Probability a failing test kills a faulty-method mutant")
      ->capture_default_str();
  synth->add_option("--noise", spec.noise, "Probability of spurious kills")
      ->capture_default_str();
  synth->add_option("--seed", spec.seed, "Master seed")->capture_default_str();
  synth->add_option("--reason-weights", synth_weights, "Kill-reason weights a:t:e");
  synth->add_option("--matrix-format", synth_format, "Matrix file format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rank->parsed()) {
      mutrank::cli::RankCommand cmd;
      cmd.matrix_path = rank_matrix;
      cmd.snapshot_path = rank_snapshot;
      cmd.config = build_config(rank, rank_flags);
      if (rank_flags.out.empty() == false) cmd.out_path = rank_flags.out;
      if (!save_model.empty()) cmd.save_model_path = save_model;
      if (!load_model.empty()) cmd.load_model_path = load_model;
      return mutrank::cli::cmd_rank(cmd, std::cout, std::cerr);
    }
    if (eval->parsed()) {
      mutrank::cli::EvalCommand cmd;
      cmd.corpus_dir = eval_dir;
      cmd.config = build_config(eval, eval_flags);
      if (!eval_flags.out.empty()) cmd.out_path = eval_flags.out;
      return mutrank::cli::cmd_eval(cmd, std::cout, std::cerr);
    }
    if (red->parsed()) {
      mutrank::cli::ReduceCommand cmd;
      cmd.matrix_path = red_matrix;
      cmd.out_path = red_out;
      if (!red_sample.empty()) {
        cmd.sampling = parse_sample(red_sample);
        cmd.sampling->seed = red_seed;
      }
      if (!red_reason.empty()) cmd.reason_filter = parse_reason(red_reason);
      cmd.subsuming_only = red_subsuming;
      cmd.dedup_indistinguishable = red_dedup;
      if (!red_graph.empty()) cmd.graph_path = red_graph;
      return mutrank::cli::cmd_reduce(cmd, std::cout, std::cerr);
    }
    if (synth->parsed()) {
      mutrank::cli::SynthCommand cmd;
      cmd.out_dir = synth_out;
      parse_mutant_range(synth_mutants, spec);
      if (!synth_weights.empty()) parse_reason_weights(synth_weights, spec.reasons);
      cmd.spec = spec;
      cmd.n_faults = n_faults;
      cmd.format = synth_format == "json" ? mutrank::MatrixFormat::Json
                                          : mutrank::MatrixFormat::Csv;
      return mutrank::cli::cmd_synth(cmd, std::cout, std::cerr);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
