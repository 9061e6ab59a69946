#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "idbpd/metrics.hpp"
#include "idbpd/projection.hpp"
#include "oracles.hpp"

using namespace idbpd;

namespace {

/// Lowest f over feasible points of a cubic grid, refined around the winner.
double grid_min_f(const QuadraticTestbed& p, Vector center, double radius, double final_step) {
  double best = 1e300;
  double step = radius / 20.0;
  while (true) {
    Vector arg = center;
    const int half = static_cast<int>(std::round(radius / step));
    for (int i = -half; i <= half; ++i)
      for (int j = -half; j <= half; ++j)
        for (int k = -half; k <= half; ++k) {
          const Vector x = center + step * (Vector(3) << i, j, k).finished();
          if (p.g(x) > 0.0) continue;
          const double v = p.f(x);
          if (v < best) best = v, arg = x;
        }
    if (step <= final_step * 1.0000001) return best;
    center = arg;
    radius = 3.0 * step;
    step = std::max(step / 10.0, final_step);
  }
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("idbpd_test_" + name);
}

TaskData single_sample(const TaskData& data, Index j) {
  TaskData out;
  out.features = data.features.row(j);
  out.labels = {data.labels[static_cast<std::size_t>(j)]};
  out.num_classes = data.num_classes;
  return out;
}

bool same_split(const DatasetSplit& a, const DatasetSplit& b) {
  return a.task1.features == b.task1.features && a.task2.features == b.task2.features &&
         a.task1.labels == b.task1.labels && a.task2.labels == b.task2.labels &&
         a.feature_mean == b.feature_mean && a.feature_scale == b.feature_scale &&
         a.feature_names == b.feature_names && a.label_task == b.label_task;
}

}  // namespace

TEST(Testbed, IdentityObjectiveClosedForm) {
  Matrix c_mat = Matrix::Identity(2, 2);
  QuadraticTestbed p(Matrix::Identity(2, 2), Vector::Zero(2), c_mat, Vector::Ones(2), 1.0, 0.5, 0.0);
  const Vector x = (Vector(2) << 0.3, -1.2).finished();
  EXPECT_NEAR(p.f(x), 0.5 * x.squaredNorm(), 1e-15);
  EXPECT_LT((p.grad_f(x) - x).norm(), 1e-15);
}

TEST(Testbed, OriginStrictlyFeasible) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TestbedParams tp;
    tp.seed = seed;
    const auto tb = make_testbed(tp);
    EXPECT_LT(tb.problem->g(Vector::Zero(tp.n)), 0.0) << seed;
    EXPECT_EQ(tb.c_repairs, 0);
  }
}

TEST(Testbed, NegativeThresholdTriggersCRepair) {
  TestbedParams tp;
  tp.r = -5.0;
  const auto tb = make_testbed(tp);
  EXPECT_EQ(tb.c_repairs, 1);
  EXPECT_LT(tb.problem->g(Vector::Zero(tp.n)), 0.0);
  const auto again = make_testbed(tp);
  EXPECT_EQ(again.problem->c(), tb.problem->c());
  const auto r = kkt_residuals(*tb.problem, tb.kkt.x, tb.kkt.lambda);
  EXPECT_LE(r.max_residual(), 1e-6);
}

TEST(Testbed, PlantedKktPointMatchesIndependentSolve) {
  const auto& tb = fixtures::canonical_testbed();
  const auto& p = *tb.problem;
  const auto planted = kkt_residuals(p, tb.kkt.x, tb.kkt.lambda);
  EXPECT_LE(planted.max_residual(), 1e-6);

  const KktPoint solved = solve_testbed_kkt(p);
  EXPECT_NEAR(solved.lambda, tb.kkt.lambda, 1e-6);
  const auto r = kkt_residuals(p, solved.x, solved.lambda);
  EXPECT_LE(r.stationarity, 1e-6);
  EXPECT_LE(r.infeasibility, 1e-6);
  EXPECT_LE(r.slackness, 1e-6);
  EXPECT_NEAR(p.f(solved.x), p.f(tb.kkt.x), 1e-8);
}

TEST(Testbed, GridScanAgreesWithKktValue) {
  const auto& tb = fixtures::canonical_testbed();
  const auto& p = *tb.problem;
  const double f_star = p.f(tb.kkt.x);
  const double radius = 1.5 * tb.kkt.x.norm() + 1.0;
  const double scanned = grid_min_f(p, Vector::Zero(3), radius, 1e-3);
  // No feasible point beats the optimum; the grid lands within O(h) of it.
  EXPECT_GE(scanned, f_star - 1e-12);
  EXPECT_LE(scanned, f_star + 1e-3 * p.grad_f(tb.kkt.x).norm() * std::sqrt(3.0));
}

TEST(Testbed, ImplicitValuesMatchClosedForms) {
  const auto& tb = *fixtures::canonical_testbed().problem;
  const fixtures::HideExact iterative(tb);
  oracle::Gen gen(20);
  for (int i = 0; i < 20; ++i) {
    const Vector x = gen.normal_vector(tb.dim_x(), 2.0);
    const auto f = implicit_value_and_grad(iterative, x, ImplicitFunction::kObjective);
    const auto g = implicit_value_and_grad(iterative, x, ImplicitFunction::kConstraint, 2000);
    EXPECT_NEAR(f.value, tb.f(x), 1e-10);
    EXPECT_NEAR(g.value, tb.g(x), 1e-10);
    EXPECT_LT((f.grad - tb.grad_f(x)).norm(), 1e-8);
    EXPECT_NEAR(implicit_value_and_grad(tb, x, ImplicitFunction::kConstraint).value, tb.g(x), 1e-12);
  }
}

TEST(Testbed, RejectsBadDimensions) {
  TestbedParams tp;
  tp.n = 0;
  EXPECT_THROW(make_testbed(tp), std::invalid_argument);
}

TEST(Mlp, ZeroWeightsGiveLogClasses) {
  auto dro = fixtures::small_dro();
  const auto& layout = dro->layout();
  const Vector zero = Vector::Zero(layout.size());
  for (Task t : {Task::kFirst, Task::kSecond}) {
    const auto& data = t == Task::kFirst ? dro->split().task1 : dro->split().task2;
    const auto eval = mlp_loss_and_grads(zero, layout, data, t);
    for (Index j = 0; j < eval.losses().size(); ++j)
      EXPECT_NEAR(eval.losses()[j], std::log(static_cast<double>(layout.classes(t))), 1e-15);
  }
}

TEST(Mlp, OneHotWeightGivesSingleSampleGradient) {
  auto dro = fixtures::small_dro();
  const auto& data = dro->split().task2;
  const Vector x = mlp_initial_weights(dro->layout(), 11);
  const auto eval = mlp_loss_and_grads(x, dro->layout(), data, Task::kSecond);
  for (Index j : {Index{0}, Index{7}, data.size() - 1}) {
    const TaskData one = single_sample(data, j);
    const auto alone = mlp_loss_and_grads(x, dro->layout(), one, Task::kSecond);
    const Vector expected = alone.weighted_gradient(Vector::Ones(1));
    const Vector got = eval.weighted_gradient(Vector::Unit(data.size(), j));
    EXPECT_LT((got - expected).norm(), 1e-14 * (1.0 + expected.norm()));
    EXPECT_NEAR(alone.losses()[0], eval.losses()[j], 1e-15);
  }
}

TEST(Mlp, GradientMatchesCentralDifferences) {
  auto dro = fixtures::small_dro();
  const auto& data = dro->split().task1;
  oracle::Gen gen(12);
  for (int i = 0; i < 5; ++i) {
    const Vector x = mlp_initial_weights(dro->layout(), 100 + i) + gen.normal_vector(dro->dim_x(), 0.5);
    const Vector weights = gen.simplex_point(data.size());
    auto value = [&](const Vector& v) {
      return weights.dot(mlp_loss_and_grads(v, dro->layout(), data, Task::kFirst).losses());
    };
    const Vector an = mlp_loss_and_grads(x, dro->layout(), data, Task::kFirst).weighted_gradient(weights);
    EXPECT_LT(oracle::relative_error(oracle::central_difference(value, x, 1e-5), an), 1e-4);
  }
}

TEST(Mlp, LossesNonnegativeAndFinite) {
  auto dro = fixtures::small_dro();
  oracle::Gen gen(13);
  for (int i = 0; i < 20; ++i) {
    const Vector x = gen.normal_vector(dro->dim_x(), 3.0);
    for (Task t : {Task::kFirst, Task::kSecond}) {
      const Vector l = dro->task_losses(x, t);
      EXPECT_TRUE(l.allFinite());
      EXPECT_GE(l.minCoeff(), 0.0);
    }
  }
}

TEST(Mlp, RejectsMismatchedWeights) {
  auto dro = fixtures::small_dro();
  EXPECT_THROW(mlp_loss_and_grads(Vector::Zero(dro->dim_x() + 1), dro->layout(), dro->split().task1,
                                  Task::kFirst),
               std::invalid_argument);
  const auto eval = mlp_loss_and_grads(Vector::Zero(dro->dim_x()), dro->layout(), dro->split().task1,
                                       Task::kFirst);
  EXPECT_THROW(eval.weighted_gradient(Vector::Ones(2)), std::invalid_argument);
}

TEST(Mlp, InitialWeightsWithinFanInBound) {
  auto dro = fixtures::small_dro();
  const auto& l = dro->layout();
  const Vector x = mlp_initial_weights(l, 5);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(l.input_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(l.hidden));
  EXPECT_LE(x.segment(0, l.head_offset(Task::kFirst)).cwiseAbs().maxCoeff(), s1);
  EXPECT_LE(x.tail(l.size() - l.head_offset(Task::kFirst)).cwiseAbs().maxCoeff(), s2);
  EXPECT_EQ(x, mlp_initial_weights(l, 5));
  EXPECT_NE(x, mlp_initial_weights(l, 6));
}

TEST(DroMtl, UniformWeightsGiveMeanLoss) {
  auto dro = fixtures::small_dro(0.25);
  oracle::Gen gen(14);
  for (int i = 0; i < 5; ++i) {
    const Vector x = mlp_initial_weights(dro->layout(), 30 + i) + gen.normal_vector(dro->dim_x(), 0.4);
    const Vector l1 = dro->task_losses(x, Task::kFirst);
    const Vector l2 = dro->task_losses(x, Task::kSecond);
    EXPECT_NEAR(dro->phi(x, dro->set_y().center_point()), l1.mean(), 1e-12);
    EXPECT_NEAR(dro->psi(x, dro->set_w().center_point()), l2.mean() - 0.25, 1e-12);
    EXPECT_GE(dro->exact_max_w(x)->value, l2.mean() - 0.25 - 1e-12);
  }
}

TEST(DroMtl, DefaultRegularization) {
  EXPECT_EQ(kDefaultDroRegularization, 1e-3);
  auto dro = make_dro_mtl(fixtures::small_dro()->split(), 3);
  EXPECT_EQ(dro->lambda_reg(), 1e-3);
}

TEST(DroMtl, ExactMaximaMatchProjectedAscent) {
  auto dro = fixtures::small_dro(0.1);
  const fixtures::HideExact iterative(*dro);
  oracle::Gen gen(15);
  for (int i = 0; i < 10; ++i) {
    const Vector x = mlp_initial_weights(dro->layout(), 50 + i) + gen.normal_vector(dro->dim_x(), 0.5);
    for (auto which : {ImplicitFunction::kObjective, ImplicitFunction::kConstraint}) {
      const double exact = implicit_value_and_grad(*dro, x, which).value;
      const double ascent = implicit_value_and_grad(iterative, x, which, 500).value;
      EXPECT_NEAR(ascent, exact, 1e-5);
    }
  }
}

TEST(DroMtl, EmptyTaskRejected) {
  DatasetSplit s = fixtures::small_dro()->split();
  s.task2.features.resize(0, s.task2.features.cols());
  s.task2.labels.clear();
  EXPECT_THROW(make_dro_mtl(s, 3), ConfigError);
  EXPECT_THROW(make_dro_mtl(fixtures::small_dro()->split(), 3, 0.0), ConfigError);
  EXPECT_THROW(make_dro_mtl(fixtures::small_dro()->split(), 3, 1e-3, std::nan("")), ConfigError);
}

TEST(Calibration, RejectsZeroBudget) {
  EXPECT_THROW(calibrate_threshold(fixtures::small_dro()->split(), 3, 1e-3, 0), ConfigError);
}

TEST(Calibration, SeparableBlobsDriveThresholdNearZero) {
  BlobParams bp;
  bp.seed = 21;
  bp.samples = 120;
  bp.features = 4;
  bp.labels = 4;
  bp.separation = 8.0;
  bp.noise = 0.3;
  const auto split = make_blobs(bp);
  CalibrationOptions opt;
  opt.gamma = 0.5;
  const double r = calibrate_threshold(split, 4, 1e-3, 1500, opt);
  const double reference = calibrate_threshold(split, 4, 1e-3, 6000, opt);
  EXPECT_LT(r, 0.05);
  EXPECT_GE(r, 0.0);
  EXPECT_LE(reference, r + 1e-12);
  EXPECT_LT(r - reference, 0.05);
}

TEST(Calibration, CalibratedThresholdMakesStartInfeasible) {
  BlobParams bp;
  bp.seed = 7;
  bp.separation = 4.0;
  bp.noise = 0.5;
  const auto split = make_paired_blobs(bp);
  CalibrationOptions opt;
  opt.gamma = 0.1;
  const double r = calibrate_threshold(split, 1, 1e-3, 3000, opt);
  auto p = make_dro_mtl(split, 1, 1e-3, r);
  EXPECT_GT(p->exact_max_w(Vector::Zero(p->dim_x()))->value, 0.0);
  EXPECT_GT(p->exact_max_w(mlp_initial_weights(p->layout(), 2))->value, 0.0);
}

TEST(Dataset, FourLabelsSplitEvenly) {
  BlobParams bp;
  bp.samples = 40;
  const auto s = make_blobs(bp);
  EXPECT_EQ(s.task1.num_classes, 2);
  EXPECT_EQ(s.task2.num_classes, 2);
  EXPECT_EQ(s.label_task, (std::vector<int>{1, 1, 2, 2}));
  EXPECT_EQ(s.label_class, (std::vector<int>{0, 1, 0, 1}));
  EXPECT_EQ(s.task1.size() + s.task2.size(), 40);
}

TEST(Dataset, OddLabelCountGivesExtraLabelToFirstTask) {
  Matrix x = Matrix::Zero(5, 1);
  const auto s = split_by_labels(x, {0, 1, 2, 3, 4}, 5, Normalization::kNone);
  EXPECT_EQ(s.task1.num_classes, 3);
  EXPECT_EQ(s.task2.num_classes, 2);
}

TEST(Dataset, ZScoreNormalization) {
  oracle::Gen gen(16);
  Matrix x(300, 5);
  for (Index j = 0; j < 5; ++j) x.col(j) = gen.normal_vector(300, 1.0 + j).array() + 10.0 * j;
  std::vector<int> labels(300);
  for (int i = 0; i < 300; ++i) labels[static_cast<std::size_t>(i)] = i % 4;
  const auto s = split_by_labels(x, labels, 4, Normalization::kZScore);
  Matrix all(300, 5);
  all << s.task1.features, s.task2.features;
  for (Index j = 0; j < 5; ++j) {
    EXPECT_LT(std::abs(all.col(j).mean()), 1e-10);
    EXPECT_NEAR(all.col(j).squaredNorm() / 300.0, 1.0, 1e-10);
  }
}

TEST(Dataset, ChdShapedIndicatorFile) {
  const auto path = temp_file("chd49.csv");
  std::mt19937_64 rng(49);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::bernoulli_distribution coin(0.4);
  int expect1 = 0, expect2 = 0;
  {
    std::ofstream out(path);
    for (int j = 0; j < 49; ++j) out << "x" << j << ",";
    for (int l = 0; l < 6; ++l) out << "y" << l << (l < 5 ? "," : "\n");
    for (int i = 0; i < 555; ++i) {
      for (int j = 0; j < 49; ++j) out << u(rng) << ",";
      bool any1 = false, any2 = false;
      for (int l = 0; l < 6; ++l) {
        const bool on = coin(rng);
        (l < 3 ? any1 : any2) |= on;
        out << (on ? 1 : 0) << (l < 5 ? "," : "\n");
      }
      expect1 += any1;
      expect2 += any2;
    }
  }
  LabelSpec spec;
  spec.kind = LabelSpec::Kind::kIndicatorBlock;
  spec.block_size = 6;
  const auto s = load_csv_dataset(path, spec);
  EXPECT_EQ(s.num_labels, 6);
  EXPECT_EQ(s.task1.features.cols(), 49);
  EXPECT_EQ(s.feature_names.size(), 49u);
  EXPECT_EQ(s.task1.size(), expect1);
  EXPECT_EQ(s.task2.size(), expect2);
  EXPECT_EQ(s.task1.num_classes, 3);
  EXPECT_TRUE(same_split(s, load_csv_dataset(path, spec)));
  std::filesystem::remove(path);
}

TEST(Dataset, LabelColumnFileIsDeterministic) {
  const auto path = temp_file("labels.csv");
  {
    std::ofstream out(path);
    out << "a,b,label\n";
    out << "1.5,2,0\n-0.5,+3,1\n2,2.25,2\n\n4,1e-1,3\n";
  }
  const auto s = load_csv_dataset(path, {}, Normalization::kNone);
  EXPECT_EQ(s.task1.size(), 2);
  EXPECT_EQ(s.task2.size(), 2);
  EXPECT_EQ(s.task2.features(1, 1), 0.1);
  EXPECT_EQ(s.task2.labels, (std::vector<int>{0, 1}));
  EXPECT_TRUE(same_split(s, load_csv_dataset(path, {}, Normalization::kNone)));
  LabelSpec by_name;
  by_name.column = "a";
  EXPECT_THROW(load_csv_dataset(path, by_name), ConfigError);  // 1.5 is not an integer label
  std::filesystem::remove(path);
}

TEST(Dataset, ParseErrorsCarryLineNumbers) {
  const auto path = temp_file("bad.csv");
  auto message_for = [&](const std::string& body, const LabelSpec& spec) -> std::string {
    {
      std::ofstream out(path);
      out << body;
    }
    try {
      load_csv_dataset(path, spec);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  const std::string ragged = message_for("a,b,label\n1,2,0\n3,1\n", {});
  EXPECT_NE(ragged.find(":3:"), std::string::npos) << ragged;
  const std::string text = message_for("a,b,label\n1,2,0\n3,4,1\n5,oops,1\n", {});
  EXPECT_NE(text.find(":4:"), std::string::npos) << text;
  EXPECT_NE(text.find("oops"), std::string::npos);
  LabelSpec missing;
  missing.column = "target";
  const std::string col = message_for("a,b,label\n1,2,0\n", missing);
  EXPECT_NE(col.find("target"), std::string::npos) << col;
  EXPECT_THROW(load_csv_dataset(temp_file("does_not_exist.csv"), {}), ConfigError);
  std::filesystem::remove(path);
}

TEST(Dataset, PairedBlobsShareSamplesAcrossTasks) {
  BlobParams bp;
  bp.samples = 100;
  const auto s = make_paired_blobs(bp);
  EXPECT_EQ(s.task1.size(), 100);
  EXPECT_EQ(s.task2.size(), 100);
  EXPECT_EQ(s.task1.features, s.task2.features);
  EXPECT_TRUE(same_split(s, make_paired_blobs(bp)));
}
