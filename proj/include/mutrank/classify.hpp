#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "mutrank/corpus.hpp"

namespace mutrank::classify {

class EmptyTrainingSet : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class NonFiniteLoss : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class ColumnMismatch : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TestSelection { FailingOnly, AllTests };
enum class ClassifierKind { LogisticRegression, Mlp };

// One bit per selected test, canonical column order; 1 = the test kills the
// mutant (and, at serving time, 1 = the test fails).
struct FeatureVector {
  std::vector<std::uint8_t> bits;
};

struct TrainingSet {
  TestSelection selection = TestSelection::AllTests;
  std::vector<TestId> columns;        // selected tests, matrix column order
  std::vector<FeatureVector> rows;    // one per killed mutant
  std::vector<std::uint32_t> labels;  // dense class ids, parallel to rows
  std::vector<MethodId> classes;      // dense id -> method, sorted
};

// One row per killed mutant; survivors carry no label signal and are
// dropped. Throws EmptyTrainingSet when nothing was killed.
TrainingSet build_training_set(const KillMatrix& km, const FailureSnapshot& snap,
                               TestSelection selection);

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::LogisticRegression;
  int hidden_units = 50;  // MLP only
  double learning_rate = 0.1;
  int epochs = 500;
  std::uint64_t seed = 0;
  double l2 = 1e-4;
};

void validate(const ClassifierConfig& cfg);  // throws std::invalid_argument

struct TrainedModel {
  ClassifierKind kind = ClassifierKind::LogisticRegression;
  TestSelection selection = TestSelection::AllTests;
  std::vector<TestId> columns;
  std::vector<MethodId> classes;
  int hidden_units = 0;               // 0 for logistic regression
  std::vector<double> params;         // flattened, layout per parameter_count
  std::vector<double> loss_history;   // objective per epoch, pre-update
};

// Flattened layouts: LR = [W (C x D row-major), b (C)];
// MLP = [W1 (H x D), b1 (H), W2 (C x H), b2 (C)].
std::size_t parameter_count(std::size_t n_features, std::size_t n_classes,
                            ClassifierKind kind, int hidden_units);

// Seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases.
std::vector<double> initial_parameters(std::size_t n_features, std::size_t n_classes,
                                       const ClassifierConfig& cfg);

// Mean cross-entropy plus (l2/2)*||weights||^2, with the analytic gradient
// written to grad (resized to match params). This is the exact function
// train() descends, exposed so gradient checks exercise the real path.
double loss_and_gradient(const TrainingSet& ts, const ClassifierConfig& cfg,
                         const std::vector<double>& params, std::vector<double>& grad);

// Full-batch gradient descent, deterministic per seed. Rows are canonically
// reordered internally, so permuting the input rows cannot change the model.
TrainedModel train(const TrainingSet& ts, const ClassifierConfig& cfg);

// Softmax probabilities for one feature vector, indexed by dense class id.
std::vector<double> predict_probabilities(const TrainedModel& model, const FeatureVector& x);

// Serves the observed fault: bit 1 for columns in T_f, 0 for columns in
// T_p; a column in neither set is a ColumnMismatch.
ScoreVector score_classifier(const TrainedModel& model, const FailureSnapshot& snap);

void save_trained_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_trained_model(const std::filesystem::path& path);

}  // namespace mutrank::classify
