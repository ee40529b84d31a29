#include "convxai/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "convxai/error.hpp"
#include "convxai/random.hpp"

namespace convxai {

Probabilities softmax(const Logits& logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  Probabilities p{};
  double total = 0.0;
  for (std::size_t i = 0; i < kNumAspects; ++i) {
    p[i] = std::exp(logits[i] - peak);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

double similarity(const SentenceEmbedding& a, const SentenceEmbedding& b) {
  return dot(a.vector, b.vector);
}

AspectClassifier::AspectClassifier(const ClassifierHyperparams& hyperparams)
    : hyper_(hyperparams),
      featurizer_(FeaturizerConfig{hyperparams.feature_dim, FeaturizerConfig{}.seed, true}) {
  const std::size_t dim = featurizer_.dim();
  if (is_linear()) {
    output_weights_.assign(kNumAspects * dim, 0.0);
  } else {
    const std::size_t hidden = hyper_.hidden_units;
    output_weights_.assign(kNumAspects * hidden, 0.0);
    hidden_bias_.assign(hidden, 0.0);
    input_weights_.resize(hidden * dim);
    Rng rng(hyper_.seed ^ 0x9e3779b97f4a7c15ull);
    for (auto& w : input_weights_) w = rng.symmetric(0.5);
  }
  document_frequency_.assign(dim, 0);
}

AspectClassifier::HiddenActivations AspectClassifier::hidden_forward(const SparseVector& x) const {
  const std::size_t dim = featurizer_.dim();
  HiddenActivations act;
  act.h.resize(hyper_.hidden_units);
  for (std::size_t j = 0; j < hyper_.hidden_units; ++j) {
    double a = hidden_bias_[j];
    const double* row = &input_weights_[j * dim];
    for (std::size_t k = 0; k < x.indices.size(); ++k) a += row[x.indices[k]] * x.values[k];
    act.h[j] = std::tanh(a);
  }
  return act;
}

Logits AspectClassifier::output_from_hidden(const HiddenActivations& act) const {
  Logits z = output_bias_;
  const std::size_t hidden = hyper_.hidden_units;
  for (std::size_t c = 0; c < kNumAspects; ++c) {
    for (std::size_t j = 0; j < hidden; ++j) z[c] += output_weights_[c * hidden + j] * act.h[j];
  }
  return z;
}

Logits AspectClassifier::logits(const SparseVector& x) const {
  if (!is_linear()) return output_from_hidden(hidden_forward(x));
  const std::size_t dim = featurizer_.dim();
  Logits z = output_bias_;
  for (std::size_t c = 0; c < kNumAspects; ++c) {
    const double* row = &output_weights_[c * dim];
    for (std::size_t k = 0; k < x.indices.size(); ++k) z[c] += row[x.indices[k]] * x.values[k];
  }
  return z;
}

std::vector<double> AspectClassifier::logit_gradient(const SparseVector& x,
                                                     AspectLabel target) const {
  const std::size_t dim = featurizer_.dim();
  const std::size_t t = index_of(target);
  std::vector<double> grad(x.indices.size(), 0.0);
  if (is_linear()) {
    for (std::size_t k = 0; k < x.indices.size(); ++k) grad[k] = output_weights_[t * dim + x.indices[k]];
    return grad;
  }
  const std::size_t hidden = hyper_.hidden_units;
  const auto act = hidden_forward(x);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double upstream = output_weights_[t * hidden + j] * (1.0 - act.h[j] * act.h[j]);
    if (upstream == 0.0) continue;
    const double* row = &input_weights_[j * dim];
    for (std::size_t k = 0; k < x.indices.size(); ++k) grad[k] += upstream * row[x.indices[k]];
  }
  return grad;
}

Prediction AspectClassifier::predict(const SparseVector& x) const {
  Prediction out;
  out.probabilities = softmax(logits(x));
  const auto best = std::max_element(out.probabilities.begin(), out.probabilities.end());
  out.label = aspect_at(static_cast<std::size_t>(best - out.probabilities.begin()));
  out.confidence = *best;
  return out;
}

Prediction AspectClassifier::predict(std::string_view sentence) const {
  return predict(featurizer_.counts(sentence));
}

double AspectClassifier::idf(std::uint32_t feature) const {
  const double n = static_cast<double>(training_sentences_);
  return std::log((1.0 + n) / (1.0 + document_frequency_[feature])) + 1.0;
}

SentenceEmbedding AspectClassifier::embed(std::string_view sentence) const {
  SentenceEmbedding out;
  out.vector = featurizer_.counts(sentence);
  for (std::size_t k = 0; k < out.vector.indices.size(); ++k) {
    out.vector.values[k] *= idf(out.vector.indices[k]);
  }
  const double norm = out.vector.norm();
  if (norm > 0.0) {
    for (auto& v : out.vector.values) v /= norm;
  }
  return out;
}

double AspectClassifier::linear_weight(AspectLabel label, std::uint32_t feature) const {
  if (!is_linear()) throw InvalidInput("linear_weight is only defined for the linear head");
  return output_weights_[index_of(label) * featurizer_.dim() + feature];
}

void AspectClassifier::sgd_step(const SparseVector& x, std::size_t label, double lr) {
  const std::size_t dim = featurizer_.dim();
  if (is_linear()) {
    auto p = softmax(logits(x));
    for (std::size_t c = 0; c < kNumAspects; ++c) {
      const double g = p[c] - (c == label ? 1.0 : 0.0);
      double* row = &output_weights_[c * dim];
      for (std::size_t k = 0; k < x.indices.size(); ++k) row[x.indices[k]] -= lr * g * x.values[k];
      output_bias_[c] -= lr * g;
    }
    return;
  }
  const std::size_t hidden = hyper_.hidden_units;
  const auto act = hidden_forward(x);
  auto p = softmax(output_from_hidden(act));
  std::array<double, kNumAspects> g{};
  for (std::size_t c = 0; c < kNumAspects; ++c) g[c] = p[c] - (c == label ? 1.0 : 0.0);
  std::vector<double> da(hidden, 0.0);
  for (std::size_t j = 0; j < hidden; ++j) {
    double dh = 0.0;
    for (std::size_t c = 0; c < kNumAspects; ++c) dh += g[c] * output_weights_[c * hidden + j];
    da[j] = dh * (1.0 - act.h[j] * act.h[j]);
  }
  for (std::size_t c = 0; c < kNumAspects; ++c) {
    for (std::size_t j = 0; j < hidden; ++j) output_weights_[c * hidden + j] -= lr * g[c] * act.h[j];
    output_bias_[c] -= lr * g[c];
  }
  for (std::size_t j = 0; j < hidden; ++j) {
    double* row = &input_weights_[j * dim];
    for (std::size_t k = 0; k < x.indices.size(); ++k) row[x.indices[k]] -= lr * da[j] * x.values[k];
    hidden_bias_[j] -= lr * da[j];
  }
}

double AspectClassifier::mean_loss(const std::vector<SparseVector>& xs,
                                   const std::vector<std::size_t>& ys) const {
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    total -= std::log(std::max(softmax(logits(xs[i]))[ys[i]], 1e-300));
  }
  return xs.empty() ? 0.0 : total / static_cast<double>(xs.size());
}

bool AspectClassifier::same_parameters(const AspectClassifier& other) const {
  return hyper_.hidden_units == other.hyper_.hidden_units &&
         featurizer_.config() == other.featurizer_.config() &&
         output_weights_ == other.output_weights_ && output_bias_ == other.output_bias_ &&
         input_weights_ == other.input_weights_ && hidden_bias_ == other.hidden_bias_ &&
         document_frequency_ == other.document_frequency_;
}

AspectClassifier train_classifier(const Corpus& corpus, const ClassifierHyperparams& hyperparams) {
  if (hyperparams.learning_rate <= 0.0) throw InvalidInput("learning rate must be positive");
  std::set<AspectLabel> labels;
  for (const auto& r : corpus.records()) {
    for (const auto& s : r.sentences) labels.insert(s.label);
  }
  if (labels.size() < 2) {
    throw DegenerateInput("training corpus carries fewer than two distinct labels");
  }

  AspectClassifier model(hyperparams);
  std::vector<SparseVector> xs;
  std::vector<std::size_t> ys;
  for (const auto& r : corpus.records()) {
    for (const auto& s : r.sentences) {
      xs.push_back(model.featurizer_.counts(s.text));
      ys.push_back(index_of(s.label));
      for (auto f : xs.back().indices) ++model.document_frequency_[f];
    }
  }
  model.training_sentences_ = xs.size();

  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(hyperparams.seed);
  model.loss_history_.push_back(model.mean_loss(xs, ys));
  for (std::size_t epoch = 0; epoch < hyperparams.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) model.sgd_step(xs[i], ys[i], hyperparams.learning_rate);
    model.loss_history_.push_back(model.mean_loss(xs, ys));
  }
  return model;
}

Prediction predict_aspect(const AspectClassifier& classifier, std::string_view sentence) {
  return classifier.predict(sentence);
}

SentenceEmbedding embed_sentence(const AspectClassifier& classifier, std::string_view sentence) {
  return classifier.embed(sentence);
}

namespace {

nlohmann::json sparse_rows(const std::vector<double>& dense, std::size_t rows, std::size_t cols) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = dense[r * cols + c];
      if (v != 0.0) row.push_back(nlohmann::json::array({c, v}));
    }
    out.push_back(std::move(row));
  }
  return out;
}

void fill_sparse_rows(const nlohmann::json& rows, std::vector<double>& dense, std::size_t n_rows,
                      std::size_t cols) {
  if (rows.size() != n_rows) throw ArtifactError("classifier weight rows have the wrong count");
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (const auto& entry : rows[r]) {
      const auto c = entry.at(0).get<std::size_t>();
      if (c >= cols) throw ArtifactError("classifier weight index out of range");
      dense[r * cols + c] = entry.at(1).get<double>();
    }
  }
}

}  // namespace

nlohmann::json AspectClassifier::to_json() const {
  const std::size_t dim = featurizer_.dim();
  nlohmann::json df = nlohmann::json::array();
  for (std::size_t f = 0; f < dim; ++f) {
    if (document_frequency_[f] != 0) df.push_back(nlohmann::json::array({f, document_frequency_[f]}));
  }
  nlohmann::json out = {
      {"format_version", kClassifierFormatVersion},
      {"kind", "aspect_classifier"},
      {"hyperparams",
       {{"epochs", hyper_.epochs},
        {"learning_rate", hyper_.learning_rate},
        {"feature_dim", hyper_.feature_dim},
        {"seed", hyper_.seed},
        {"hidden_units", hyper_.hidden_units}}},
      {"featurizer", {{"seed", featurizer_.config().seed}, {"bigrams", featurizer_.config().bigrams}}},
      {"output_bias", output_bias_},
      {"training_sentences", training_sentences_},
      {"document_frequency", df},
      {"loss_history", loss_history_}};
  if (is_linear()) {
    out["output_weights"] = sparse_rows(output_weights_, kNumAspects, dim);
  } else {
    out["output_weights"] = output_weights_;
    out["hidden_bias"] = hidden_bias_;
    out["input_weights"] = input_weights_;
  }
  return out;
}

AspectClassifier AspectClassifier::from_json(const nlohmann::json& object) {
  if (object.value("format_version", -1) != kClassifierFormatVersion ||
      object.value("kind", std::string()) != "aspect_classifier") {
    throw ArtifactError("classifier artifact format_version mismatch (expected " +
                        std::to_string(kClassifierFormatVersion) + ")");
  }
  try {
    ClassifierHyperparams h;
    const auto& hp = object.at("hyperparams");
    h.epochs = hp.at("epochs").get<std::size_t>();
    h.learning_rate = hp.at("learning_rate").get<double>();
    h.feature_dim = hp.at("feature_dim").get<std::uint32_t>();
    h.seed = hp.at("seed").get<std::uint64_t>();
    h.hidden_units = hp.at("hidden_units").get<std::size_t>();
    AspectClassifier model(h);
    const auto& fz = object.at("featurizer");
    model.featurizer_ = HashedFeaturizer(
        FeaturizerConfig{h.feature_dim, fz.at("seed").get<std::uint64_t>(), fz.at("bigrams").get<bool>()});
    model.output_bias_ = object.at("output_bias").get<Logits>();
    model.training_sentences_ = object.at("training_sentences").get<std::size_t>();
    for (const auto& entry : object.at("document_frequency")) {
      const auto f = entry.at(0).get<std::size_t>();
      if (f >= model.document_frequency_.size()) throw ArtifactError("document frequency index out of range");
      model.document_frequency_[f] = entry.at(1).get<std::uint32_t>();
    }
    model.loss_history_ = object.at("loss_history").get<std::vector<double>>();
    if (model.is_linear()) {
      fill_sparse_rows(object.at("output_weights"), model.output_weights_, kNumAspects, h.feature_dim);
    } else {
      model.output_weights_ = object.at("output_weights").get<std::vector<double>>();
      model.hidden_bias_ = object.at("hidden_bias").get<std::vector<double>>();
      model.input_weights_ = object.at("input_weights").get<std::vector<double>>();
      if (model.output_weights_.size() != kNumAspects * h.hidden_units ||
          model.hidden_bias_.size() != h.hidden_units ||
          model.input_weights_.size() != h.hidden_units * h.feature_dim) {
        throw ArtifactError("hidden-layer weight shapes do not match hyperparameters");
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(std::string("malformed classifier artifact: ") + e.what());
  }
}

void AspectClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write classifier '" + path.string() + "'");
  out << to_json().dump() << '\n';
}

AspectClassifier AspectClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot read classifier '" + path.string() + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ArtifactError("classifier '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace convxai
