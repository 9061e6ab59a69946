#pragma once

#include <cstdint>

#include "idbpd/problems/dataset.hpp"

namespace idbpd {

enum class Task { kFirst, kSecond };

/// One tanh hidden layer shared by two softmax heads. Flattened parameter
/// order: W1 (hidden x input, column-major), b1, W2 for task 1, b2 for task 1,
/// W2 for task 2, b2 for task 2.
struct MlpLayout {
  Index input_dim = 0;
  Index hidden = 0;
  Index classes1 = 0;
  Index classes2 = 0;

  Index size() const;
  Index w1_offset() const { return 0; }
  Index b1_offset() const { return hidden * input_dim; }
  Index head_offset(Task task) const;
  Index classes(Task task) const { return task == Task::kFirst ? classes1 : classes2; }
};

MlpLayout layout_for(const DatasetSplit& split, Index hidden);

/// Forward pass of one task over all its samples. Keeps the activations so the
/// gradient of any weighted loss sum costs one backward pass.
class MlpEvaluation {
 public:
  MlpEvaluation(const Vector& weights, const MlpLayout& layout, const TaskData& data, Task task);

  /// Cross-entropy of each sample.
  const Vector& losses() const { return losses_; }

  /// Gradient of sum_j sample_weights[j] * losses()[j] w.r.t. all parameters.
  Vector weighted_gradient(const Vector& sample_weights) const;

 private:
  MlpLayout layout_;
  Task task_;
  const TaskData* data_;
  Matrix w1_, w2_;
  Matrix hidden_;  // hidden x samples, tanh activations
  Matrix probs_;   // classes x samples, softmax
  Vector losses_;
};

MlpEvaluation mlp_loss_and_grads(const Vector& weights, const MlpLayout& layout,
                                 const TaskData& data, Task task);

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer, seeded.
Vector mlp_initial_weights(const MlpLayout& layout, std::uint64_t seed);

}  // namespace idbpd
