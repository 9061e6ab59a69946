#include "idbpd/problems/mlp.hpp"

#include <cmath>
#include <random>

namespace idbpd {

Index MlpLayout::size() const {
  return hidden * input_dim + hidden + (classes1 + classes2) * (hidden + 1);
}

Index MlpLayout::head_offset(Task task) const {
  const Index first = hidden * input_dim + hidden;
  return task == Task::kFirst ? first : first + classes1 * (hidden + 1);
}

MlpLayout layout_for(const DatasetSplit& split, Index hidden) {
  if (hidden < 1) throw ConfigError("hidden width must be >= 1");
  return {split.task1.features.cols(), hidden, split.task1.num_classes, split.task2.num_classes};
}

MlpEvaluation::MlpEvaluation(const Vector& weights, const MlpLayout& layout, const TaskData& data,
                             Task task)
    : layout_(layout), task_(task), data_(&data) {
  if (weights.size() != layout.size())
    throw std::invalid_argument("MLP weight vector has size " + std::to_string(weights.size()) +
                                ", layout needs " + std::to_string(layout.size()));
  if (data.features.cols() != layout.input_dim)
    throw std::invalid_argument("MLP input dimension does not match the data");
  const Index h = layout.hidden;
  const Index c = layout.classes(task);
  const Index head = layout.head_offset(task);

  w1_ = Eigen::Map<const Matrix>(weights.data() + layout.w1_offset(), h, layout.input_dim);
  const auto b1 = weights.segment(layout.b1_offset(), h);
  w2_ = Eigen::Map<const Matrix>(weights.data() + head, c, h);
  const auto b2 = weights.segment(head + c * h, c);

  hidden_ = ((w1_ * data.features.transpose()).colwise() + b1).array().tanh().matrix();
  Matrix logits = (w2_ * hidden_).colwise() + b2;
  if (!logits.allFinite()) throw NumericError("MLP activations");

  const Index n = data.size();
  probs_.resize(c, n);
  losses_.resize(n);
  for (Index j = 0; j < n; ++j) {
    const double shift = logits.col(j).maxCoeff();
    const Eigen::ArrayXd e = (logits.col(j).array() - shift).exp();
    const double total = e.sum();
    probs_.col(j) = (e / total).matrix();
    const int label = data.labels[static_cast<std::size_t>(j)];
    losses_[j] = std::log(total) - (logits(label, j) - shift);
  }
}

Vector MlpEvaluation::weighted_gradient(const Vector& sample_weights) const {
  const TaskData& data = *data_;
  if (sample_weights.size() != data.size())
    throw std::invalid_argument("sample weight vector does not match the task size");
  const Index h = layout_.hidden;
  const Index c = layout_.classes(task_);
  const Index head = layout_.head_offset(task_);

  // dL/dlogits = (softmax - onehot) scaled per sample.
  Matrix delta = probs_;
  for (Index j = 0; j < data.size(); ++j) delta(data.labels[static_cast<std::size_t>(j)], j) -= 1.0;
  delta *= sample_weights.asDiagonal();

  Vector grad = Vector::Zero(layout_.size());
  Eigen::Map<Matrix>(grad.data() + head, c, h) = delta * hidden_.transpose();
  grad.segment(head + c * h, c) = delta.rowwise().sum();

  const Matrix back = ((w2_.transpose() * delta).array() * (1.0 - hidden_.array().square())).matrix();
  Eigen::Map<Matrix>(grad.data() + layout_.w1_offset(), h, layout_.input_dim) = back * data.features;
  grad.segment(layout_.b1_offset(), h) = back.rowwise().sum();
  return grad;
}

MlpEvaluation mlp_loss_and_grads(const Vector& weights, const MlpLayout& layout,
                                 const TaskData& data, Task task) {
  return MlpEvaluation(weights, layout, data, task);
}

Vector mlp_initial_weights(const MlpLayout& layout, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector x(layout.size());
  auto fill = [&](Index offset, Index count, Index fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-s, s);
    for (Index i = 0; i < count; ++i) x[offset + i] = dist(rng);
  };
  const Index h = layout.hidden;
  fill(layout.w1_offset(), h * layout.input_dim + h, layout.input_dim);
  fill(layout.head_offset(Task::kFirst), layout.classes1 * (h + 1), h);
  fill(layout.head_offset(Task::kSecond), layout.classes2 * (h + 1), h);
  return x;
}

}  // namespace idbpd
