#include "mutrank/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "mutrank/rng.hpp"

namespace mutrank::classify {

namespace {

struct Shape {
  std::size_t d = 0;  // features
  std::size_t c = 0;  // classes
  std::size_t h = 0;  // hidden units, 0 for LR
};

Shape shape_of(const TrainingSet& ts, const ClassifierConfig& cfg) {
  return Shape{ts.columns.size(), ts.classes.size(),
               cfg.kind == ClassifierKind::Mlp ? static_cast<std::size_t>(cfg.hidden_units) : 0};
}

// In-place softmax with max-shift for stability.
void softmax(std::vector<double>& logits) {
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

void forward_lr(const double* params, const Shape& s, const FeatureVector& x,
                std::vector<double>& logits) {
  const double* w = params;
  const double* b = params + s.c * s.d;
  logits.assign(s.c, 0.0);
  for (std::size_t c = 0; c < s.c; ++c) {
    double acc = b[c];
    const double* row = w + c * s.d;
    for (std::size_t d = 0; d < s.d; ++d)
      if (x.bits[d]) acc += row[d];
    logits[c] = acc;
  }
}

void forward_mlp(const double* params, const Shape& s, const FeatureVector& x,
                 std::vector<double>& pre, std::vector<double>& hidden,
                 std::vector<double>& logits) {
  const double* w1 = params;
  const double* b1 = params + s.h * s.d;
  const double* w2 = b1 + s.h;
  const double* b2 = w2 + s.c * s.h;
  pre.assign(s.h, 0.0);
  hidden.assign(s.h, 0.0);
  for (std::size_t j = 0; j < s.h; ++j) {
    double acc = b1[j];
    const double* row = w1 + j * s.d;
    for (std::size_t d = 0; d < s.d; ++d)
      if (x.bits[d]) acc += row[d];
    pre[j] = acc;
    hidden[j] = acc > 0.0 ? acc : 0.0;
  }
  logits.assign(s.c, 0.0);
  for (std::size_t c = 0; c < s.c; ++c) {
    double acc = b2[c];
    const double* row = w2 + c * s.h;
    for (std::size_t j = 0; j < s.h; ++j) acc += row[j] * hidden[j];
    logits[c] = acc;
  }
}

// Rows sorted by (features, label) so full-batch accumulation order is a
// function of the data, not of how the caller happened to order it.
TrainingSet canonicalise(const TrainingSet& ts) {
  std::vector<std::size_t> order(ts.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ts.rows[a].bits != ts.rows[b].bits) return ts.rows[a].bits < ts.rows[b].bits;
    return ts.labels[a] < ts.labels[b];
  });
  TrainingSet out;
  out.selection = ts.selection;
  out.columns = ts.columns;
  out.classes = ts.classes;
  out.rows.reserve(ts.rows.size());
  out.labels.reserve(ts.labels.size());
  for (std::size_t i : order) {
    out.rows.push_back(ts.rows[i]);
    out.labels.push_back(ts.labels[i]);
  }
  return out;
}

nlohmann::json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON in " + path.string());
  return j;
}

constexpr int kModelFormatVersion = 1;

}  // namespace

TrainingSet build_training_set(const KillMatrix& km, const FailureSnapshot& snap,
                               TestSelection selection) {
  SnapshotView view = resolve_snapshot(km, snap);
  TrainingSet ts;
  ts.selection = selection;

  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < km.test_count(); ++c) {
    bool selected = selection == TestSelection::FailingOnly
                        ? view.failing.test(c)
                        : view.failing.test(c) || view.passing.test(c);
    if (selected) {
      cols.push_back(c);
      ts.columns.push_back(km.tests()[c]);
    }
  }

  std::set<MethodId> methods;
  for (const Mutant& m : km.mutants())
    if (!m.kills.empty()) methods.insert(m.method);
  if (methods.empty()) throw EmptyTrainingSet("matrix has no killed mutants");
  ts.classes.assign(methods.begin(), methods.end());

  for (const Mutant& m : km.mutants()) {
    if (m.kills.empty()) continue;
    FeatureVector fv;
    fv.bits.reserve(cols.size());
    for (std::size_t c : cols) fv.bits.push_back(m.kills.test(c) ? 1 : 0);
    ts.rows.push_back(std::move(fv));
    auto it = std::lower_bound(ts.classes.begin(), ts.classes.end(), m.method);
    ts.labels.push_back(static_cast<std::uint32_t>(it - ts.classes.begin()));
  }
  return ts;
}

void validate(const ClassifierConfig& cfg) {
  if (cfg.kind == ClassifierKind::Mlp && cfg.hidden_units < 1)
    throw std::invalid_argument("hidden_units must be >= 1");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be positive");
  if (cfg.l2 < 0.0) throw std::invalid_argument("l2 must be non-negative");
}

std::size_t parameter_count(std::size_t n_features, std::size_t n_classes,
                            ClassifierKind kind, int hidden_units) {
  if (kind == ClassifierKind::LogisticRegression)
    return n_classes * n_features + n_classes;
  auto h = static_cast<std::size_t>(hidden_units);
  return h * n_features + h + n_classes * h + n_classes;
}

std::vector<double> initial_parameters(std::size_t n_features, std::size_t n_classes,
                                       const ClassifierConfig& cfg) {
  validate(cfg);
  rng::Engine eng(cfg.seed);
  std::vector<double> params(
      parameter_count(n_features, n_classes, cfg.kind, cfg.hidden_units), 0.0);
  if (cfg.kind == ClassifierKind::LogisticRegression) {
    double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(n_features, 1)));
    for (std::size_t i = 0; i < n_classes * n_features; ++i)
      params[i] = eng.range(-bound, bound);
  } else {
    auto h = static_cast<std::size_t>(cfg.hidden_units);
    double bound1 = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(n_features, 1)));
    for (std::size_t i = 0; i < h * n_features; ++i) params[i] = eng.range(-bound1, bound1);
    double bound2 = 1.0 / std::sqrt(static_cast<double>(h));
    double* w2 = params.data() + h * n_features + h;
    for (std::size_t i = 0; i < n_classes * h; ++i) w2[i] = eng.range(-bound2, bound2);
  }
  return params;
}

double loss_and_gradient(const TrainingSet& ts, const ClassifierConfig& cfg,
                         const std::vector<double>& params, std::vector<double>& grad) {
  Shape s = shape_of(ts, cfg);
  std::size_t n = ts.rows.size();
  if (n == 0) throw EmptyTrainingSet("cannot evaluate loss on an empty training set");

  grad.assign(params.size(), 0.0);
  double loss = 0.0;
  std::vector<double> logits, pre, hidden;

  if (cfg.kind == ClassifierKind::LogisticRegression) {
    double* gw = grad.data();
    double* gb = grad.data() + s.c * s.d;
    for (std::size_t r = 0; r < n; ++r) {
      forward_lr(params.data(), s, ts.rows[r], logits);
      softmax(logits);
      loss -= std::log(std::max(logits[ts.labels[r]], 1e-300));
      for (std::size_t c = 0; c < s.c; ++c) {
        double delta = logits[c] - (c == ts.labels[r] ? 1.0 : 0.0);
        gb[c] += delta;
        double* row = gw + c * s.d;
        for (std::size_t d = 0; d < s.d; ++d)
          if (ts.rows[r].bits[d]) row[d] += delta;
      }
    }
  } else {
    const double* w2 = params.data() + s.h * s.d + s.h;
    double* gw1 = grad.data();
    double* gb1 = grad.data() + s.h * s.d;
    double* gw2 = gb1 + s.h;
    double* gb2 = gw2 + s.c * s.h;
    std::vector<double> dhidden(s.h);
    for (std::size_t r = 0; r < n; ++r) {
      forward_mlp(params.data(), s, ts.rows[r], pre, hidden, logits);
      softmax(logits);
      loss -= std::log(std::max(logits[ts.labels[r]], 1e-300));
      std::fill(dhidden.begin(), dhidden.end(), 0.0);
      for (std::size_t c = 0; c < s.c; ++c) {
        double delta = logits[c] - (c == ts.labels[r] ? 1.0 : 0.0);
        gb2[c] += delta;
        double* row = gw2 + c * s.h;
        const double* wrow = w2 + c * s.h;
        for (std::size_t j = 0; j < s.h; ++j) {
          row[j] += delta * hidden[j];
          dhidden[j] += delta * wrow[j];
        }
      }
      for (std::size_t j = 0; j < s.h; ++j) {
        if (pre[j] <= 0.0) continue;
        gb1[j] += dhidden[j];
        double* row = gw1 + j * s.d;
        for (std::size_t d = 0; d < s.d; ++d)
          if (ts.rows[r].bits[d]) row[d] += dhidden[j];
      }
    }
  }

  double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  for (double& g : grad) g *= inv_n;

  // L2 on weight matrices only; biases stay unpenalised.
  auto penalise = [&](std::size_t offset, std::size_t count) {
    for (std::size_t i = offset; i < offset + count; ++i) {
      loss += 0.5 * cfg.l2 * params[i] * params[i];
      grad[i] += cfg.l2 * params[i];
    }
  };
  if (cfg.kind == ClassifierKind::LogisticRegression) {
    penalise(0, s.c * s.d);
  } else {
    penalise(0, s.h * s.d);
    penalise(s.h * s.d + s.h, s.c * s.h);
  }
  return loss;
}

TrainedModel train(const TrainingSet& ts, const ClassifierConfig& cfg) {
  validate(cfg);
  if (ts.rows.empty()) throw EmptyTrainingSet("training set has no rows");
  TrainingSet canon = canonicalise(ts);

  TrainedModel model;
  model.kind = cfg.kind;
  model.selection = canon.selection;
  model.columns = canon.columns;
  model.classes = canon.classes;
  model.hidden_units = cfg.kind == ClassifierKind::Mlp ? cfg.hidden_units : 0;
  model.params = initial_parameters(canon.columns.size(), canon.classes.size(), cfg);

  std::vector<double> grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss = loss_and_gradient(canon, cfg, model.params, grad);
    if (!std::isfinite(loss))
      throw NonFiniteLoss("training diverged at epoch " + std::to_string(epoch));
    model.loss_history.push_back(loss);
    for (std::size_t i = 0; i < model.params.size(); ++i)
      model.params[i] -= cfg.learning_rate * grad[i];
  }
  return model;
}

std::vector<double> predict_probabilities(const TrainedModel& model, const FeatureVector& x) {
  Shape s{model.columns.size(), model.classes.size(),
          static_cast<std::size_t>(model.hidden_units)};
  std::vector<double> logits, pre, hidden;
  if (model.kind == ClassifierKind::LogisticRegression)
    forward_lr(model.params.data(), s, x, logits);
  else
    forward_mlp(model.params.data(), s, x, pre, hidden, logits);
  softmax(logits);
  return logits;
}

ScoreVector score_classifier(const TrainedModel& model, const FailureSnapshot& snap) {
  FeatureVector x;
  x.bits.reserve(model.columns.size());
  for (const TestId& t : model.columns) {
    if (snap.failing().count(t))
      x.bits.push_back(1);
    else if (snap.passing().count(t))
      x.bits.push_back(0);
    else
      throw ColumnMismatch("test '" + t.name + "' from the model's columns is missing "
                           "from the snapshot");
  }
  std::vector<double> probs = predict_probabilities(model, x);
  ScoreVector out;
  for (std::size_t c = 0; c < model.classes.size(); ++c)
    out.emplace(model.classes[c], Score::real(probs[c]));
  return out;
}

void save_trained_model(const TrainedModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["version"] = kModelFormatVersion;
  j["kind"] = model.kind == ClassifierKind::Mlp ? "mlp" : "logistic_regression";
  j["selection"] =
      model.selection == TestSelection::FailingOnly ? "failing_only" : "all_tests";
  j["columns"] = nlohmann::json::array();
  for (const TestId& t : model.columns) j["columns"].push_back(t.name);
  j["classes"] = nlohmann::json::array();
  for (const MethodId& m : model.classes) j["classes"].push_back(m.qualified_name);
  j["hidden_units"] = model.hidden_units;
  j["params"] = model.params;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

TrainedModel load_trained_model(const std::filesystem::path& path) {
  nlohmann::json j = parse_json_file(path);
  if (!j.is_object() || j.value("version", -1) != kModelFormatVersion)
    throw ParseError(path.string() + ": unsupported model file version");
  for (const char* key : {"kind", "selection", "columns", "classes", "hidden_units", "params"})
    if (!j.contains(key))
      throw ParseError(path.string() + ": missing field '" + std::string(key) + "'");

  TrainedModel model;
  std::string kind = j["kind"].get<std::string>();
  if (kind == "mlp")
    model.kind = ClassifierKind::Mlp;
  else if (kind == "logistic_regression")
    model.kind = ClassifierKind::LogisticRegression;
  else
    throw ParseError(path.string() + ": unknown kind '" + kind + "'");

  std::string selection = j["selection"].get<std::string>();
  if (selection == "failing_only")
    model.selection = TestSelection::FailingOnly;
  else if (selection == "all_tests")
    model.selection = TestSelection::AllTests;
  else
    throw ParseError(path.string() + ": unknown selection '" + selection + "'");

  for (const auto& v : j["columns"]) model.columns.push_back(TestId{v.get<std::string>()});
  for (const auto& v : j["classes"]) model.classes.push_back(MethodId{v.get<std::string>()});
  model.hidden_units = j["hidden_units"].get<int>();
  model.params = j["params"].get<std::vector<double>>();

  if (model.classes.empty()) throw ParseError(path.string() + ": no classes");
  std::size_t expected =
      parameter_count(model.columns.size(), model.classes.size(), model.kind,
                      model.kind == ClassifierKind::Mlp ? model.hidden_units : 0);
  if (model.params.size() != expected)
    throw ParseError(path.string() + ": parameter array has wrong length");
  return model;
}

}  // namespace mutrank::classify
