#include "idbpd/problems/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace idbpd {

namespace {

void normalize(Matrix& features, Normalization mode, Vector& mean, Vector& scale) {
  const Index cols = features.cols();
  mean = Vector::Zero(cols);
  scale = Vector::Ones(cols);
  if (mode == Normalization::kNone || features.rows() == 0) return;
  const double rows = static_cast<double>(features.rows());
  mean = features.colwise().sum().transpose() / rows;
  features.rowwise() -= mean.transpose();
  for (Index j = 0; j < cols; ++j) {
    const double sd = std::sqrt(features.col(j).squaredNorm() / rows);
    if (sd > 0.0) {
      scale[j] = sd;
      features.col(j) /= sd;
    }
  }
  // Remove the residual mean left by rounding in the centring pass.
  features.rowwise() -= (features.colwise().sum() / rows);
}

DatasetSplit empty_split(int num_labels) {
  DatasetSplit s;
  s.num_labels = num_labels;
  const int first = (num_labels + 1) / 2;
  s.label_task.resize(static_cast<std::size_t>(num_labels));
  s.label_class.resize(static_cast<std::size_t>(num_labels));
  for (int l = 0; l < num_labels; ++l) {
    s.label_task[static_cast<std::size_t>(l)] = l < first ? 1 : 2;
    s.label_class[static_cast<std::size_t>(l)] = l < first ? l : l - first;
  }
  s.task1.num_classes = first;
  s.task2.num_classes = num_labels - first;
  return s;
}

void assign_rows(DatasetSplit& s, const Matrix& features, const std::vector<Index>& rows1,
                 const std::vector<Index>& rows2) {
  auto gather = [&](const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = features.row(rows[i]);
    return out;
  };
  s.task1.features = gather(rows1);
  s.task2.features = gather(rows2);
}

}  // namespace

void DatasetSplit::validate() const {
  for (const TaskData* t : {&task1, &task2}) {
    if (t->size() < 1) throw ConfigError("dataset split leaves a task with no samples");
    if (t->num_classes < 1) throw ConfigError("dataset split leaves a task with no classes");
    if (static_cast<Index>(t->labels.size()) != t->size())
      throw ConfigError("label count does not match sample count");
    for (int l : t->labels)
      if (l < 0 || l >= t->num_classes) throw ConfigError("label out of range for its task");
  }
  if (task1.features.cols() != task2.features.cols())
    throw ConfigError("tasks disagree on feature dimension");
}

DatasetSplit split_by_labels(const Matrix& features, const std::vector<int>& labels,
                             int num_labels, Normalization normalization) {
  if (static_cast<Index>(labels.size()) != features.rows())
    throw ConfigError("label count does not match row count");
  if (num_labels < 2) throw ConfigError("need at least two labels to form two tasks");
  DatasetSplit s = empty_split(num_labels);
  Matrix normed = features;
  normalize(normed, normalization, s.feature_mean, s.feature_scale);

  std::vector<Index> rows1, rows2;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || l >= num_labels)
      throw ConfigError("label " + std::to_string(l) + " outside [0, " + std::to_string(num_labels) + ")");
    const auto li = static_cast<std::size_t>(l);
    if (s.label_task[li] == 1) {
      rows1.push_back(static_cast<Index>(i));
      s.task1.labels.push_back(s.label_class[li]);
    } else {
      rows2.push_back(static_cast<Index>(i));
      s.task2.labels.push_back(s.label_class[li]);
    }
  }
  assign_rows(s, normed, rows1, rows2);
  return s;
}

DatasetSplit split_by_indicators(const Matrix& features, const Matrix& indicators,
                                 Normalization normalization) {
  if (indicators.rows() != features.rows()) throw ConfigError("indicator rows do not match features");
  const int num_labels = static_cast<int>(indicators.cols());
  if (num_labels < 2) throw ConfigError("need at least two labels to form two tasks");
  DatasetSplit s = empty_split(num_labels);
  Matrix normed = features;
  normalize(normed, normalization, s.feature_mean, s.feature_scale);

  const int first = s.task1.num_classes;
  std::vector<Index> rows1, rows2;
  for (Index i = 0; i < indicators.rows(); ++i) {
    for (int l = 0; l < num_labels; ++l) {
      const double v = indicators(i, l);
      if (v != 0.0 && v != 1.0)
        throw ConfigError("indicator block must hold 0/1 values (row " + std::to_string(i) + ")");
    }
    for (int l = 0; l < first; ++l)
      if (indicators(i, l) == 1.0) {
        rows1.push_back(i);
        s.task1.labels.push_back(l);
        break;
      }
    for (int l = first; l < num_labels; ++l)
      if (indicators(i, l) == 1.0) {
        rows2.push_back(i);
        s.task2.labels.push_back(l - first);
        break;
      }
  }
  assign_rows(s, normed, rows1, rows2);
  return s;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

DatasetSplit load_csv_dataset(const std::filesystem::path& path, const LabelSpec& spec,
                              Normalization normalization) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ":1: missing header row");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  const auto cols = static_cast<Index>(header.size());

  std::vector<bool> is_label(static_cast<std::size_t>(cols), false);
  if (spec.kind == LabelSpec::Kind::kColumn) {
    Index label_col = cols - 1;
    if (!spec.column.empty()) {
      auto it = std::find(header.begin(), header.end(), spec.column);
      if (it == header.end()) throw ConfigError(path.string() + ": missing label column '" + spec.column + "'");
      label_col = static_cast<Index>(it - header.begin());
    }
    is_label[static_cast<std::size_t>(label_col)] = true;
  } else {
    if (spec.block_size < 2 || spec.block_size >= cols)
      throw ConfigError(path.string() + ": indicator block size does not fit the header");
    for (Index j = cols - spec.block_size; j < cols; ++j) is_label[static_cast<std::size_t>(j)] = true;
  }
  const Index label_cols = std::count(is_label.begin(), is_label.end(), true);
  if (cols - label_cols < 1) throw ConfigError(path.string() + ": no feature columns");

  std::vector<std::string> feature_names;
  for (Index j = 0; j < cols; ++j)
    if (!is_label[static_cast<std::size_t>(j)]) feature_names.push_back(header[static_cast<std::size_t>(j)]);

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<Index>(cells.size()) != cols)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(cols) + " cells, found " + std::to_string(cells.size()));
    std::vector<double> values(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string cell = trim(cells[j]);
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      if (!cell.empty() && *begin == '+') ++begin;
      auto [ptr, ec] = std::from_chars(begin, end, values[j]);
      if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(values[j]))
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                          cell + "' in column '" + header[j] + "'");
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ConfigError(path.string() + ": no data rows");

  const auto n_rows = static_cast<Index>(rows.size());
  Matrix features(n_rows, cols - label_cols);
  Matrix label_block(n_rows, label_cols);
  for (Index i = 0; i < n_rows; ++i) {
    Index fj = 0, lj = 0;
    for (Index j = 0; j < cols; ++j) {
      const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (is_label[static_cast<std::size_t>(j)])
        label_block(i, lj++) = v;
      else
        features(i, fj++) = v;
    }
  }

  DatasetSplit split;
  if (spec.kind == LabelSpec::Kind::kColumn) {
    std::vector<int> labels(static_cast<std::size_t>(n_rows));
    int max_label = -1;
    for (Index i = 0; i < n_rows; ++i) {
      const double v = label_block(i, 0);
      if (v != std::floor(v) || v < 0.0)
        throw ConfigError(path.string() + ":" + std::to_string(i + 2) + ": label must be a nonnegative integer");
      labels[static_cast<std::size_t>(i)] = static_cast<int>(v);
      max_label = std::max(max_label, static_cast<int>(v));
    }
    split = split_by_labels(features, labels, max_label + 1, normalization);
  } else {
    split = split_by_indicators(features, label_block, normalization);
  }
  split.feature_names = std::move(feature_names);
  split.validate();
  return split;
}

DatasetSplit make_blobs(const BlobParams& params, Normalization normalization) {
  if (params.samples < params.labels || params.features < 1 || params.labels < 2)
    throw ConfigError("blob parameters need samples >= labels >= 2 and features >= 1");
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix centers(params.labels, params.features);
  for (int l = 0; l < params.labels; ++l) {
    Vector dir(params.features);
    for (int j = 0; j < params.features; ++j) dir[j] = normal(rng);
    centers.row(l) = (params.separation / dir.norm()) * dir.transpose();
  }
  Matrix features(params.samples, params.features);
  std::vector<int> labels(static_cast<std::size_t>(params.samples));
  for (int i = 0; i < params.samples; ++i) {
    const int l = i % params.labels;
    labels[static_cast<std::size_t>(i)] = l;
    for (int j = 0; j < params.features; ++j) features(i, j) = centers(l, j) + params.noise * normal(rng);
  }
  DatasetSplit split = split_by_labels(features, labels, params.labels, normalization);
  for (int j = 0; j < params.features; ++j) split.feature_names.push_back("f" + std::to_string(j));
  split.validate();
  return split;
}

DatasetSplit make_paired_blobs(const BlobParams& params, Normalization normalization) {
  if (params.labels < 2 || params.features < 2)
    throw ConfigError("paired blobs need labels >= 2 and features >= 2");
  const int classes1 = (params.labels + 1) / 2;
  const int classes2 = params.labels - classes1;
  const int clusters = classes1 * classes2;
  if (params.samples < clusters) throw ConfigError("paired blobs need samples >= number of clusters");
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix centers(clusters, params.features);
  if (classes1 == 2 && classes2 == 2) {
    Matrix basis(params.features, 2);
    for (Index j = 0; j < basis.cols(); ++j)
      for (Index i = 0; i < basis.rows(); ++i) basis(i, j) = normal(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(basis).householderQ() *
                     Matrix::Identity(params.features, 2);
    for (int b = 0; b < clusters; ++b) {
      const double s1 = b % 2 == 0 ? -1.0 : 1.0;
      const double s2 = b / 2 == 0 ? -1.0 : 1.0;
      centers.row(b) = (0.5 * params.separation) * (s1 * q.col(0) + s2 * q.col(1)).transpose();
    }
  } else {
    for (int b = 0; b < clusters; ++b) {
      Vector dir(params.features);
      for (int j = 0; j < params.features; ++j) dir[j] = normal(rng);
      centers.row(b) = (params.separation / dir.norm()) * dir.transpose();
    }
  }

  Matrix features(params.samples, params.features);
  Matrix indicators = Matrix::Zero(params.samples, params.labels);
  for (int i = 0; i < params.samples; ++i) {
    const int b = i % clusters;
    indicators(i, b % classes1) = 1.0;
    indicators(i, classes1 + b / classes1) = 1.0;
    for (int j = 0; j < params.features; ++j) features(i, j) = centers(b, j) + params.noise * normal(rng);
  }
  DatasetSplit split = split_by_indicators(features, indicators, normalization);
  for (int j = 0; j < params.features; ++j) split.feature_names.push_back("f" + std::to_string(j));
  split.validate();
  return split;
}

}  // namespace idbpd
