#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sonoforge/error.hpp"
#include "sonoforge/report.hpp"
#include "sonoforge/training.hpp"
#include "test_support.hpp"

using namespace sonoforge;

namespace {

DatasetIndex fake_index(std::size_t n, int n_labels = 50) {
  DatasetIndex idx;
  idx.class_names.assign(50, "");
  for (std::size_t i = 0; i < n; ++i) {
    IndexEntry e;
    e.path = "clip" + std::to_string(i) + ".wav";
    e.label = static_cast<int>(i % static_cast<std::size_t>(n_labels));
    e.category = "c" + std::to_string(e.label);
    idx.class_names[static_cast<std::size_t>(e.label)] = e.category;
    idx.entries.push_back(e);
  }
  return idx;
}

std::set<std::string> names(const DatasetIndex& idx) {
  std::set<std::string> s;
  for (const auto& e : idx.entries) s.insert(e.path.string());
  return s;
}

// Small separable problem: class k has a bright row k.
FeatureDataset toy_dataset(std::size_t n, int n_classes, std::uint64_t seed, std::size_t h = 12, std::size_t w = 24) {
  FeatureDataset d;
  d.kind = FeatureKind::ChromaStft;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(n_classes));
    FeatureMatrix f;
    f.kind = FeatureKind::ChromaStft;
    f.values = RealMatrix(h, w);
    const auto noise = testing_support::random_signal(h * w, seed * 1000 + i, 0.0, 0.3);
    std::copy(noise.begin(), noise.end(), f.values.data());
    for (std::size_t j = 0; j < w; ++j) f.values(static_cast<std::size_t>(label) % h, j) += 1.0;
    d.add("item" + std::to_string(i), label, f);
  }
  return d;
}

ModelSpec small_spec(std::size_t h = 12, std::size_t w = 24) {
  ModelSpec s;
  s.input_height = h;
  s.input_width = w;
  s.conv_filters = {8, 8, 16, 16};
  s.dense_units = 32;
  return s;
}

std::vector<double> prefix(const std::vector<double>& v, std::size_t n) { return {v.begin(), v.begin() + static_cast<long>(n)}; }

}  // namespace

TEST(ReduceLr, FlatHistoryHalvesAtEpochThree) {
  const std::vector<double> losses{3.0, 3.0, 3.0};
  EXPECT_EQ(reduce_lr_on_plateau(prefix(losses, 1), 1e-3, 2, 0.5, 1e-5), 1e-3);
  EXPECT_EQ(reduce_lr_on_plateau(prefix(losses, 2), 1e-3, 2, 0.5, 1e-5), 1e-3);
  EXPECT_EQ(reduce_lr_on_plateau(losses, 1e-3, 2, 0.5, 1e-5), 5e-4);
}

TEST(ReduceLr, CounterResetsAfterFiring) {
  const std::vector<double> losses{3.0, 3.0, 3.0, 3.0, 3.0};
  EXPECT_EQ(reduce_lr_on_plateau(prefix(losses, 4), 5e-4, 2, 0.5, 1e-5), 5e-4);
  EXPECT_EQ(reduce_lr_on_plateau(losses, 5e-4, 2, 0.5, 1e-5), 2.5e-4);
}

TEST(ReduceLr, DecreasingNeverFires) {
  std::vector<double> losses;
  for (int i = 0; i < 40; ++i) {
    losses.push_back(10.0 - 0.2 * i);
    EXPECT_EQ(reduce_lr_on_plateau(losses, 1e-3, 2, 0.5, 1e-5), 1e-3);
  }
}

TEST(ReduceLr, ClampsAtMinimum) {
  const std::vector<double> losses{1.0, 1.0, 1.0};
  EXPECT_EQ(reduce_lr_on_plateau(losses, 1e-5, 2, 0.5, 1e-5), 1e-5);
  EXPECT_EQ(reduce_lr_on_plateau(losses, 1.5e-5, 2, 0.5, 1e-5), 1e-5);
}

TEST(ReduceLr, ImprovementThreshold) {
  // 3.0 -> 2.99995 is within 1e-4 and does not count as improvement
  const std::vector<double> losses{3.0, 2.99995, 2.99991};
  EXPECT_EQ(reduce_lr_on_plateau(losses, 1e-3, 2, 0.5, 1e-5), 5e-4);
  const std::vector<double> real{3.0, 2.9998, 2.9996};
  EXPECT_EQ(reduce_lr_on_plateau(real, 1e-3, 2, 0.5, 1e-5), 1e-3);
}

TEST(EarlyStopping, SixFlatEpochsAfterTheBest) {
  const std::vector<double> losses{5, 4, 4, 4, 4, 4, 4, 4};
  for (std::size_t n = 1; n < losses.size(); ++n) EXPECT_FALSE(early_stopping(prefix(losses, n))) << n;
  EXPECT_TRUE(early_stopping(losses));
}

TEST(EarlyStopping, DecreasingNeverStops) {
  std::vector<double> losses;
  for (int i = 0; i < 100; ++i) {
    losses.push_back(std::exp(-0.05 * i));
    EXPECT_FALSE(early_stopping(losses));
  }
}

TEST(EarlyStopping, LateSmallerValuesThatDoNotBeatTheBest) {
  const std::vector<double> losses{3, 2, 3, 3, 3, 2.5, 2.4, 2.3};
  for (std::size_t n = 1; n < losses.size(); ++n) EXPECT_FALSE(early_stopping(prefix(losses, n))) << n;
  EXPECT_TRUE(early_stopping(losses));
}

TEST(PlateauMonitor, MatchesBatchFunctions) {
  const std::vector<double> losses{5, 4, 4, 3.5, 3.5, 3.5, 3.6, 3.5, 3.5, 3.5, 3.5};
  PlateauMonitor lr(2), stop(6);
  for (std::size_t n = 1; n <= losses.size(); ++n) {
    EXPECT_EQ(lr.update(losses[n - 1]), reduce_lr_on_plateau(prefix(losses, n), 1.0, 2, 0.5, 0.0) != 1.0) << n;
    EXPECT_EQ(stop.update(losses[n - 1]), early_stopping(prefix(losses, n))) << n;
  }
}

TEST(Split, FullCorpusSizes) {
  const auto [train, val] = split_dataset(fake_index(2000), 0.8, 1);
  EXPECT_EQ(train.entries.size(), 1600u);
  EXPECT_EQ(val.entries.size(), 400u);
}

TEST(Split, TenItemsDisjointAndComplete) {
  const auto idx = fake_index(10, 5);
  const auto [train, val] = split_dataset(idx, 0.8, 3);
  EXPECT_EQ(train.entries.size(), 8u);
  EXPECT_EQ(val.entries.size(), 2u);
  auto a = names(train), b = names(val);
  for (const auto& s : b) EXPECT_FALSE(a.contains(s));
  a.insert(b.begin(), b.end());
  EXPECT_EQ(a, names(idx));
}

TEST(Split, SeedDeterminism) {
  const auto idx = fake_index(200);
  const auto [t1, v1] = split_dataset(idx, 0.8, 42);
  const auto [t2, v2] = split_dataset(idx, 0.8, 42);
  const auto [t3, v3] = split_dataset(idx, 0.8, 43);
  ASSERT_EQ(t1.entries.size(), t2.entries.size());
  for (std::size_t i = 0; i < t1.entries.size(); ++i) EXPECT_EQ(t1.entries[i].path, t2.entries[i].path);
  EXPECT_NE(names(v1), names(v3));
}

TEST(Split, StratifiedKeepsClassProportions) {
  const auto idx = fake_index(400, 10);
  const auto [train, val] = split_dataset(idx, 0.8, 5, true);
  EXPECT_EQ(train.entries.size(), 320u);
  std::vector<int> per_class(10, 0);
  for (const auto& e : val.entries) ++per_class[static_cast<std::size_t>(e.label)];
  for (int c : per_class) EXPECT_EQ(c, 8);
}

TEST(Permutation, IsAPermutationAndSeeded) {
  const auto p = seeded_permutation(100, 9);
  auto sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_EQ(p, seeded_permutation(100, 9));
  EXPECT_NE(p, seeded_permutation(100, 10));
}

TEST(Evaluate, ZeroedModelIsUniform) {
  const auto data = toy_dataset(50, 50, 1);
  Model model(small_spec());
  model.zero_parameters();
  const auto ev = evaluate(model, data);
  EXPECT_NEAR(ev.loss, std::log(50.0), 1e-6);
  EXPECT_NEAR(ev.accuracy, 1.0 / 50.0, 1e-12);
}

TEST(Evaluate, ConfidentModelOnItsOwnLabelsAndAdversarialLabels) {
  auto data = toy_dataset(20, 1, 2);
  for (int& l : data.labels) l = 7;
  Model model(small_spec());
  model.zero_parameters();
  for (auto* p : model.parameters()) {
    if (p->name == "dense2.bias") p->value[7] = 1000.0f;
  }
  const auto ev = evaluate(model, data);
  EXPECT_EQ(ev.accuracy, 1.0);
  EXPECT_LT(ev.loss, 1e-6);
  for (std::size_t i = 0; i < data.labels.size(); ++i) data.labels[i] = static_cast<int>(i % 7);
  EXPECT_EQ(evaluate(model, data).accuracy, 0.0);
}

TEST(Evaluate, GeometryMismatch) {
  const auto data = toy_dataset(4, 2, 3, 12, 24);
  Model model(small_spec(12, 30));
  model.initialize(1);
  try {
    evaluate(model, data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Geometry);
  }
}

TEST(Train, ReportIsSelfConsistentAndDeterministic) {
  const auto all = toy_dataset(48, 4, 4);
  std::vector<std::size_t> tr, va;
  for (std::size_t i = 0; i < all.size(); ++i) (i % 4 == 3 ? va : tr).push_back(i);
  const auto train_set = all.subset(tr), val_set = all.subset(va);

  TrainConfig cfg;
  cfg.feature_kind = FeatureKind::ChromaStft;
  cfg.batch_size = 8;
  cfg.max_epochs = 12;
  cfg.seed = 77;

  std::vector<int> seen;
  auto run = [&](bool record) {
    Model model(small_spec());
    model.initialize(cfg.seed);
    return train(model, train_set, val_set, cfg, [&](int epoch, const EpochRecord&) {
      if (record) seen.push_back(epoch);
    });
  };
  const RunReport a = run(true);
  const RunReport b = run(false);
  EXPECT_EQ(format_run_report(a), format_run_report(b));

  ASSERT_FALSE(a.epochs.empty());
  EXPECT_LE(a.epoch_count(), 12u);
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], static_cast<int>(i) + 1);
  EXPECT_EQ(seen.size(), a.epoch_count());

  std::vector<double> losses;
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    const auto& e = a.epochs[i];
    EXPECT_GE(e.lr, cfg.min_lr);
    if (i > 0) EXPECT_LE(e.lr, a.epochs[i - 1].lr);
    losses.push_back(e.val_loss);
    // lr in epoch i+1 is what the plateau rule says after epoch i
    if (i + 1 < a.epochs.size()) {
      EXPECT_EQ(a.epochs[i + 1].lr, reduce_lr_on_plateau(losses, e.lr, cfg.lr_patience, cfg.lr_factor, cfg.min_lr));
      EXPECT_FALSE(early_stopping(losses, cfg.stop_patience));
    }
  }
  EXPECT_EQ(a.stopped_early, early_stopping(losses, cfg.stop_patience));
  EXPECT_LT(a.final_epoch().train_loss, 0.5 * a.epochs.front().train_loss);
}

TEST(Train, StopAtTrainAccuracy) {
  const auto data = toy_dataset(16, 4, 5);
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.max_epochs = 200;
  cfg.stop_at_train_acc = 0.95;
  cfg.lr_patience = 1000;
  cfg.stop_patience = 1000;
  Model model(small_spec());
  model.initialize(3);
  const auto r = train(model, data, data, cfg);
  EXPECT_GE(r.final_epoch().train_acc, 0.95);
  EXPECT_LT(r.epoch_count(), 200u);
}

TEST(Train, NonFiniteInputAborts) {
  auto data = toy_dataset(8, 2, 6);
  data.values[5] = std::numeric_limits<float>::quiet_NaN();
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.max_epochs = 2;
  Model model(small_spec());
  model.initialize(1);
  try {
    train(model, data, data, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFinite);
  }
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.train_frac = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.lr_factor = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
}
