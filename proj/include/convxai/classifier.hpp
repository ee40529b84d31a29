#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "convxai/aspect.hpp"
#include "convxai/corpus.hpp"
#include "convxai/features.hpp"
#include "json.hpp"

namespace convxai {

inline constexpr int kClassifierFormatVersion = 1;

using Logits = std::array<double, kNumAspects>;
using Probabilities = std::array<double, kNumAspects>;

// Numerically stable softmax; the result sums to 1 within rounding.
Probabilities softmax(const Logits& logits);

struct Prediction {
  AspectLabel label = AspectLabel::Other;
  double confidence = 0.0;  // == probabilities[label]
  Probabilities probabilities{};
};

// TF-IDF weighted hashed n-gram vector with unit L2 norm (zero when the
// sentence has no tokens).
struct SentenceEmbedding {
  SparseVector vector;
};

// Dot product of two embeddings.
double similarity(const SentenceEmbedding& a, const SentenceEmbedding& b);

struct ClassifierHyperparams {
  std::size_t epochs = 15;
  double learning_rate = 0.1;
  std::uint32_t feature_dim = 1u << 14;
  std::uint64_t seed = 13;
  // 0 selects the linear softmax head; otherwise a tanh hidden layer of
  // this width sits between the features and the softmax.
  std::size_t hidden_units = 0;
};

// Aspect classifier over hashed unigram+bigram counts.
class AspectClassifier {
 public:
  // Untrained model: output layer is zero so every prediction is uniform.
  explicit AspectClassifier(const ClassifierHyperparams& hyperparams = {});

  const HashedFeaturizer& featurizer() const { return featurizer_; }
  const ClassifierHyperparams& hyperparams() const { return hyper_; }
  bool is_linear() const { return hyper_.hidden_units == 0; }

  Logits logits(const SparseVector& features) const;
  // Gradient of logits()[target] with respect to each active input feature,
  // aligned with features.indices.
  std::vector<double> logit_gradient(const SparseVector& features, AspectLabel target) const;

  Prediction predict(const SparseVector& features) const;
  Prediction predict(std::string_view sentence) const;
  SentenceEmbedding embed(std::string_view sentence) const;

  // Linear head only: weight of `feature` for class `label`.
  double linear_weight(AspectLabel label, std::uint32_t feature) const;
  double output_bias(AspectLabel label) const { return output_bias_[index_of(label)]; }

  // Mean cross-entropy before training (index 0) and after each epoch.
  const std::vector<double>& loss_history() const { return loss_history_; }
  std::size_t training_sentences() const { return training_sentences_; }

  bool same_parameters(const AspectClassifier& other) const;

  nlohmann::json to_json() const;
  static AspectClassifier from_json(const nlohmann::json& object);
  void save(const std::filesystem::path& path) const;
  static AspectClassifier load(const std::filesystem::path& path);

 private:
  friend AspectClassifier train_classifier(const Corpus&, const ClassifierHyperparams&);

  struct HiddenActivations {
    std::vector<double> h;
  };
  HiddenActivations hidden_forward(const SparseVector& x) const;
  Logits output_from_hidden(const HiddenActivations& act) const;
  void sgd_step(const SparseVector& x, std::size_t label, double learning_rate);
  double mean_loss(const std::vector<SparseVector>& xs, const std::vector<std::size_t>& ys) const;
  double idf(std::uint32_t feature) const;

  ClassifierHyperparams hyper_;
  HashedFeaturizer featurizer_;
  // Linear: kNumAspects x dim. Hidden: kNumAspects x hidden_units.
  std::vector<double> output_weights_;
  Logits output_bias_{};
  // Hidden head only: hidden_units x dim, and hidden_units biases.
  std::vector<double> input_weights_;
  std::vector<double> hidden_bias_;
  // Document frequencies from the training sentences, for embeddings.
  std::vector<std::uint32_t> document_frequency_;
  std::size_t training_sentences_ = 0;
  std::vector<double> loss_history_;
};

// Stochastic gradient descent on mean cross-entropy, one pass per epoch over
// a seed-shuffled order. Throws DegenerateInput when the corpus carries
// fewer than two distinct labels.
AspectClassifier train_classifier(const Corpus& corpus, const ClassifierHyperparams& hyperparams);

Prediction predict_aspect(const AspectClassifier& classifier, std::string_view sentence);
SentenceEmbedding embed_sentence(const AspectClassifier& classifier, std::string_view sentence);

}  // namespace convxai
