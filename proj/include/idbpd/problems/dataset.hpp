#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "idbpd/common.hpp"

namespace idbpd {

/// Samples of one task: one row of `features` per sample, labels in
/// [0, num_classes).
struct TaskData {
  Matrix features;
  std::vector<int> labels;
  int num_classes = 0;

  Index size() const { return features.rows(); }
};

enum class Normalization { kNone, kZScore };

/// Which CSV columns hold labels. A single integer column (by header name;
/// empty name means the last column), or a trailing block of 0/1 indicator
/// columns.
struct LabelSpec {
  enum class Kind { kColumn, kIndicatorBlock };
  Kind kind = Kind::kColumn;
  std::string column;
  int block_size = 0;
};

/// Two-task view of a labelled dataset: the first ceil(L/2) labels form task
/// 1, the rest task 2. For indicator blocks a row joins a task when it has a
/// positive label in that task's half, with the first such label as its class.
struct DatasetSplit {
  TaskData task1, task2;
  int num_labels = 0;
  /// Original label -> (task 1 or 2, class within task).
  std::vector<int> label_task;
  std::vector<int> label_class;
  Vector feature_mean, feature_scale;
  std::vector<std::string> feature_names;

  void validate() const;
};

DatasetSplit split_by_labels(const Matrix& features, const std::vector<int>& labels,
                             int num_labels, Normalization normalization);

/// Multi-label variant: `indicators` is rows x num_labels of 0/1.
DatasetSplit split_by_indicators(const Matrix& features, const Matrix& indicators,
                                 Normalization normalization);

/// Parses a numeric CSV with a header row. Errors carry the 1-based line number.
DatasetSplit load_csv_dataset(const std::filesystem::path& path, const LabelSpec& labels,
                              Normalization normalization = Normalization::kZScore);

struct BlobParams {
  std::uint64_t seed = 7;
  int samples = 800;
  int features = 8;
  int labels = 4;
  double separation = 3.0;
  double noise = 1.0;
};

/// Gaussian blobs: one isotropic cluster per label, centers at distance
/// `separation` from the origin in seeded random directions.
DatasetSplit make_blobs(const BlobParams& params, Normalization normalization = Normalization::kZScore);

/// Both tasks on the same samples: one cluster per (task-1 class, task-2
/// class) pair, rows labelled through an indicator block. The cluster centers
/// sit at the corners of a scaled grid spanned by two random orthonormal
/// directions when the label halves have two classes each, so the two tasks
/// depend on different feature directions; otherwise at random directions.
DatasetSplit make_paired_blobs(const BlobParams& params,
                               Normalization normalization = Normalization::kZScore);

}  // namespace idbpd
