#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sonoforge/audio_io.hpp"
#include "sonoforge/feature.hpp"
#include "sonoforge/model.hpp"

namespace sonoforge {

/// "Improvement" means beating the best value so far by more than this.
inline constexpr double kPlateauMinDelta = 1e-4;

struct TrainConfig {
  FeatureKind feature_kind = FeatureKind::Mel;
  std::size_t batch_size = 32;
  double initial_lr = 1e-3;
  int lr_patience = 2;
  double lr_factor = 0.5;
  double min_lr = 1e-5;
  int stop_patience = 6;
  int max_epochs = 100;
  std::uint64_t seed = 0;
  double train_frac = 0.8;
  bool stratified = false;
  /// Optional extra stop rule: end once the epoch's training accuracy
  /// reaches this value. Unset in the standard protocol.
  std::optional<double> stop_at_train_acc;

  void validate() const;
};

/// Feature images of one kind, stacked. values holds N * height * width
/// floats, sample-major, each image row-major (bins x frames).
struct FeatureDataset {
  FeatureKind kind = FeatureKind::Mel;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<float> values;

  std::size_t size() const noexcept { return labels.size(); }
  void add(const std::string& id, int label, const FeatureMatrix& f);
  /// Copies the selected samples into an [N, H, W, 1] tensor.
  Tensor batch(std::span<const std::size_t> rows) const;
  FeatureDataset subset(std::span<const std::size_t> rows) const;
};

/// Seeded Fisher-Yates permutation of 0..n-1 (portable across standard
/// libraries).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// Shuffles and splits into round(train_frac * N) training entries and the
/// remainder. Stratified mode splits each label separately.
std::pair<DatasetIndex, DatasetIndex> split_dataset(const DatasetIndex& index, double train_frac,
                                                    std::uint64_t seed, bool stratified = false);

/// Walks the history with a best-so-far / wait counter. Returns
/// max(lr * factor, min_lr) if the counter reaches `patience` on the last
/// epoch, otherwise current_lr.
double reduce_lr_on_plateau(std::span<const double> val_losses, double current_lr, int patience, double factor,
                            double min_lr);

/// True iff the last `patience` epochs did not improve on the best.
bool early_stopping(std::span<const double> val_losses, int patience = 6);

/// Incremental version of the two callbacks above.
class PlateauMonitor {
 public:
  explicit PlateauMonitor(int patience) : patience_(patience) {}
  /// Feeds one epoch; returns true if the monitor fires (counter reset).
  bool update(double value);
  int wait() const noexcept { return wait_; }

 private:
  int patience_;
  int wait_ = 0;
  double best_ = 0.0;
  bool has_best_ = false;
};

struct EpochRecord {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;  // rate used during the epoch

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct RunReport {
  TrainConfig config;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
  std::vector<EpochRecord> epochs;
  bool stopped_early = false;

  std::size_t epoch_count() const noexcept { return epochs.size(); }
  const EpochRecord& final_epoch() const;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Inference-mode loss and accuracy over the whole dataset.
Evaluation evaluate(Model& model, const FeatureDataset& data, std::size_t batch_size = 32);

using EpochCallback = std::function<void(int epoch, const EpochRecord&)>;

/// Mini-batch Adam training with reduce-on-plateau and early stopping.
/// The model must already be initialized.
RunReport train(Model& model, const FeatureDataset& train_set, const FeatureDataset& val_set,
                const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace sonoforge
