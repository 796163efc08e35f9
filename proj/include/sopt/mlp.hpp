#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sopt/dataset.hpp"
#include "sopt/rng.hpp"

namespace sopt {

// Small feed-forward binary classifier, hand-rolled: tanh hidden layers and a
// single sigmoid output, trained with Adam on a logit-space cross-entropy.

struct Net {
  std::vector<int> layers;                  // sizes, input through output
  std::vector<std::vector<double>> weights; // [l]: layers[l+1] x layers[l], row-major
  std::vector<std::vector<double>> biases;  // [l]: layers[l+1]

  // Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
  static Net init(const std::vector<int>& layers, Rng& rng);

  // Pre-sigmoid output. The output layer must have size 1.
  double logit(const std::vector<double>& x) const;
  // sigmoid(logit(x))
  double forward(const std::vector<double>& x) const;

  size_t parameter_count() const;
};

struct TrainConfig {
  std::vector<int> hidden = {16, 32, 16};
  double learning_rate = 0.01;
  int epochs = 400;
  int batch_size = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 42;
};

struct TrainResult {
  Net net;
  // Mean training loss per epoch (batch losses weighted by batch size).
  std::vector<double> loss_curve;
};

// Minibatch Adam over shuffled epochs. One RNG stream seeds the weights and
// then drives every epoch's shuffle, so a (data, config) pair fully
// determines the result. Throws if the loss goes non-finite.
TrainResult train(const std::vector<std::vector<double>>& x,
                  const std::vector<int>& y, const TrainConfig& cfg);

// Max relative disagreement between backprop and central-difference gradients
// of the mean loss over (x, y), across every weight and bias. Healthy
// implementations stay under 1e-4.
double gradient_check(const Net& net, const std::vector<std::vector<double>>& x,
                      const std::vector<int>& y);

// A net bundled with its input pipeline: the feature-selection mask, the
// scaler fitted on training rows, and the pruning threshold.
struct Model {
  std::vector<int> mask;
  Scaler scaler;
  double threshold = 1e-4;
  Net net;

  // Full pipeline score: select, standardize, run the net.
  double predict_raw(const FeatureVector& f) const;
};

void save_model(const std::string& path, const Model& m);
Model load_model(const std::string& path);

struct Metrics {
  double accuracy = 0;
  double precision = 0;  // macro-averaged over both classes
  double recall = 0;
  double f1 = 0;
};

// Zero stands in for any undefined per-class ratio (empty denominator).
Metrics compute_metrics(const std::vector<int>& y, const std::vector<int>& predicted);

struct RocPoint {
  double threshold = 0;
  double fpr = 0;
  double tpr = 0;
};

// One point per unique score plus sentinel thresholds 1 and 0, descending, so
// the curve always runs from (0, 0) to (1, 1). Scores are nudged away from
// exactly 0 and 1 for the sentinel comparison only. Throws when y contains a
// single class.
std::vector<RocPoint> roc_curve(const std::vector<int>& y,
                                const std::vector<double>& scores);

}  // namespace sopt
