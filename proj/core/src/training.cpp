#include "sonoforge/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "sonoforge/adam.hpp"

namespace sonoforge {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) fail(ErrorKind::Validation, "batch_size must be >= 1");
  if (!(initial_lr > 0.0)) fail(ErrorKind::Validation, "initial_lr must be positive");
  if (!(lr_factor > 0.0 && lr_factor < 1.0)) fail(ErrorKind::Validation, "lr_factor must be in (0, 1)");
  if (!(min_lr > 0.0)) fail(ErrorKind::Validation, "min_lr must be positive");
  if (lr_patience < 1 || stop_patience < 1) fail(ErrorKind::Validation, "patience values must be >= 1");
  if (max_epochs < 1) fail(ErrorKind::Validation, "max_epochs must be >= 1");
  if (!(train_frac > 0.0 && train_frac < 1.0)) fail(ErrorKind::Validation, "train_frac must be in (0, 1)");
}

void FeatureDataset::add(const std::string& id, int label, const FeatureMatrix& f) {
  if (labels.empty() && height == 0) {
    kind = f.kind;
    height = f.rows();
    width = f.cols();
  }
  if (f.kind != kind) fail(ErrorKind::Geometry, id + ": feature kind differs from the rest of the dataset");
  if (f.rows() != height || f.cols() != width) {
    fail(ErrorKind::Geometry, id + ": shape " + std::to_string(f.rows()) + "x" + std::to_string(f.cols()) +
                                  " differs from " + std::to_string(height) + "x" + std::to_string(width));
  }
  ids.push_back(id);
  labels.push_back(label);
  for (double v : f.values.values()) values.push_back(static_cast<float>(v));
}

Tensor FeatureDataset::batch(std::span<const std::size_t> rows) const {
  const std::size_t plane = height * width;
  Tensor t({rows.size(), height, width, 1});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(rows[i] * plane), plane, t.data() + i * plane);
  }
  return t;
}

FeatureDataset FeatureDataset::subset(std::span<const std::size_t> rows) const {
  FeatureDataset out;
  out.kind = kind;
  out.height = height;
  out.width = width;
  const std::size_t plane = height * width;
  for (std::size_t r : rows) {
    out.ids.push_back(ids[r]);
    out.labels.push_back(labels[r]);
    out.values.insert(out.values.end(), values.begin() + static_cast<std::ptrdiff_t>(r * plane),
                      values.begin() + static_cast<std::ptrdiff_t>((r + 1) * plane));
  }
  return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const auto j = static_cast<std::size_t>(u * static_cast<double>(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::pair<DatasetIndex, DatasetIndex> split_dataset(const DatasetIndex& index, double train_frac,
                                                    std::uint64_t seed, bool stratified) {
  if (index.entries.empty()) fail(ErrorKind::Validation, "cannot split an empty index");
  if (!(train_frac > 0.0 && train_frac < 1.0)) fail(ErrorKind::Range, "train_frac must be in (0, 1)");
  DatasetIndex train, val;
  train.class_names = val.class_names = index.class_names;

  auto take = [&](const std::vector<std::size_t>& members, std::uint64_t s) {
    const auto perm = seeded_permutation(members.size(), s);
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(members.size())));
    for (std::size_t i = 0; i < perm.size(); ++i) {
      (i < n_train ? train : val).entries.push_back(index.entries[members[perm[i]]]);
    }
  };

  if (!stratified) {
    std::vector<std::size_t> all(index.entries.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    take(all, seed);
  } else {
    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < index.entries.size(); ++i) by_label[index.entries[i].label].push_back(i);
    for (const auto& [label, members] : by_label) take(members, derive_seed(seed, static_cast<std::uint64_t>(label)));
  }
  return {std::move(train), std::move(val)};
}

bool PlateauMonitor::update(double value) {
  if (!has_best_ || value < best_ - kPlateauMinDelta) {
    best_ = value;
    has_best_ = true;
    wait_ = 0;
    return false;
  }
  if (++wait_ >= patience_) {
    wait_ = 0;
    return true;
  }
  return false;
}

double reduce_lr_on_plateau(std::span<const double> val_losses, double current_lr, int patience, double factor,
                            double min_lr) {
  if (val_losses.empty()) fail(ErrorKind::Validation, "empty loss history");
  PlateauMonitor monitor(patience);
  bool fired = false;
  for (double v : val_losses) fired = monitor.update(v);
  return fired ? std::max(current_lr * factor, min_lr) : current_lr;
}

bool early_stopping(std::span<const double> val_losses, int patience) {
  if (val_losses.empty()) fail(ErrorKind::Validation, "empty loss history");
  PlateauMonitor monitor(patience);
  bool fired = false;
  for (double v : val_losses) fired = monitor.update(v);
  return fired;
}

const EpochRecord& RunReport::final_epoch() const {
  if (epochs.empty()) fail(ErrorKind::Validation, "run report has no epochs");
  return epochs.back();
}

Evaluation evaluate(Model& model, const FeatureDataset& data, std::size_t batch_size) {
  if (data.size() == 0) fail(ErrorKind::EmptyBatch, "evaluation on an empty dataset");
  if (data.height != model.spec().input_height || data.width != model.spec().input_width) {
    fail(ErrorKind::Geometry, "features are " + std::to_string(data.height) + "x" + std::to_string(data.width) +
                                  ", model expects " + std::to_string(model.spec().input_height) + "x" +
                                  std::to_string(model.spec().input_width));
  }
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + batch_size);
    rows.clear();
    for (std::size_t i = start; i < end; ++i) rows.push_back(i);
    const Tensor logits = model.forward(data.batch(rows), Mode::Infer);
    const auto r = softmax_xent(logits, std::span<const int>(data.labels).subspan(start, end - start));
    loss_sum += r.loss * static_cast<double>(end - start);
    correct += r.correct;
  }
  model.release_caches();
  return {loss_sum / static_cast<double>(data.size()),
          static_cast<double>(correct) / static_cast<double>(data.size())};
}

RunReport train(Model& model, const FeatureDataset& train_set, const FeatureDataset& val_set,
                const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.size() == 0 || val_set.size() == 0) fail(ErrorKind::EmptyBatch, "training and validation sets must be nonempty");
  if (train_set.kind != val_set.kind || train_set.height != val_set.height || train_set.width != val_set.width) {
    fail(ErrorKind::Geometry, "training and validation features differ in kind or shape");
  }

  RunReport report;
  report.config = config;
  report.train_size = train_set.size();
  report.val_size = val_set.size();

  AdamState<float> adam;
  adam.options.lr = config.initial_lr;
  PlateauMonitor lr_monitor(config.lr_patience);
  PlateauMonitor stop_monitor(config.stop_patience);
  const auto params = model.parameters();
  std::vector<int> batch_labels;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto order = seeded_permutation(train_set.size(), derive_seed(config.seed, 1, static_cast<std::uint64_t>(epoch)));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      batch_labels.clear();
      for (std::size_t r : rows) batch_labels.push_back(train_set.labels[r]);

      const Tensor logits =
          model.forward(train_set.batch(rows), Mode::Train, derive_seed(config.seed, static_cast<std::uint64_t>(epoch) << 32, batch_no));
      auto loss = softmax_xent(logits, batch_labels);
      if (!std::isfinite(loss.loss)) {
        fail(ErrorKind::NonFinite, "training loss became non-finite at epoch " + std::to_string(epoch) + ", batch " +
                                       std::to_string(batch_no) + " (lr " + std::to_string(adam.options.lr) + ")");
      }
      model.zero_grad();
      model.backward(loss.grad);
      adam_step<float>(params, adam);
      loss_sum += loss.loss * static_cast<double>(rows.size());
      correct += loss.correct;
    }
    model.release_caches();

    EpochRecord rec;
    rec.lr = adam.options.lr;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
    const Evaluation val = evaluate(model, val_set, config.batch_size);
    rec.val_loss = val.loss;
    rec.val_acc = val.accuracy;
    if (!std::isfinite(rec.val_loss)) fail(ErrorKind::NonFinite, "validation loss became non-finite at epoch " + std::to_string(epoch));
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(epoch, rec);

    // callbacks: reduce LR first, then early stopping
    if (lr_monitor.update(rec.val_loss)) adam.options.lr = std::max(adam.options.lr * config.lr_factor, config.min_lr);
    if (stop_monitor.update(rec.val_loss)) {
      report.stopped_early = true;
      break;
    }
    if (config.stop_at_train_acc && rec.train_acc >= *config.stop_at_train_acc) break;
  }
  return report;
}

}  // namespace sonoforge
