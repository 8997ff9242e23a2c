#pragma once

// Feed-forward network predicting, per source phone, the probability that
// each articulatory feature increases or decreases in a sound change, and the
// directional weighted feature edit distance derived from it.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sctree/phonology.hpp"

namespace sctree {

struct SoundChangeRecord {
  std::string source;
  std::string target;
  std::string family;
};

struct SoundChangeLoad {
  std::vector<SoundChangeRecord> records;
  std::size_t skipped_unknown = 0;   // phone absent from the feature table
  std::size_t skipped_identity = 0;  // no feature differs
  std::size_t skipped_family = 0;    // family on the exclusion list
};

// Reads `source<TAB>target<TAB>family` rows (optional header line starting
// with "source"). Throws when the file is unreadable or yields no records.
SoundChangeLoad load_sound_changes(const std::filesystem::path& path,
                                   const PhoneFeatureTable& table,
                                   const std::vector<std::string>& excluded_families = {"Altaic"});

// Bit 2f: feature f increased. Bit 2f+1: feature f decreased.
struct DirectionVector {
  std::vector<std::uint8_t> bits;
};

struct TrainingPair {
  OneHotEncoding input;
  DirectionVector target;
};

TrainingPair make_training_pair(const SoundChangeRecord& record, const PhoneFeatureTable& table);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

struct EpochLoss {
  int epoch = 0;
  double train_bce = 0.0;
  std::optional<double> test_bce;  // absent when the held-out split is empty
};

struct TrainingConfig;

class FeatureEditModel {
 public:
  // Seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
  FeatureEditModel(std::size_t feature_count, int depth, std::uint64_t seed,
                   std::uint64_t feature_names_hash = 0);

  // Every weight and bias zero: each output is exactly 0.5.
  static FeatureEditModel zeros(std::size_t feature_count, int depth = 1);

  static bool supported_depth(int depth) {
    return depth == 1 || depth == 4 || depth == 8 || depth == 16;
  }

  std::size_t feature_count() const { return feature_count_; }
  std::size_t input_width() const { return 3 * feature_count_; }
  std::size_t output_width() const { return 2 * feature_count_; }
  int depth() const { return static_cast<int>(layers_.size()); }
  // Identity shortcut into every second hidden layer, for depth >= 8.
  bool has_skip() const { return depth() >= 8; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t feature_names_hash() const { return names_hash_; }

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  // Columns are examples. Returns pre-sigmoid outputs.
  Eigen::MatrixXd logits(const Eigen::MatrixXd& inputs) const;
  Eigen::VectorXd probabilities(const OneHotEncoding& input) const;

  std::vector<EpochLoss> history;
  int epochs_trained = 0;

  void save(const std::filesystem::path& path) const;
  static FeatureEditModel load(const std::filesystem::path& path);

  friend bool operator==(const FeatureEditModel& a, const FeatureEditModel& b);
  friend FeatureEditModel train(const std::vector<SoundChangeRecord>&, const PhoneFeatureTable&,
                                const TrainingConfig&);

 private:
  FeatureEditModel() = default;

  std::size_t feature_count_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t names_hash_ = 0;
  std::vector<DenseLayer> layers_;
};

// Mean binary cross-entropy over the batch and all 2N outputs. When `grad` is
// non-null it receives d(loss)/d(parameter) with the layer shapes of `model`.
double loss_and_gradient(const FeatureEditModel& model, std::span<const TrainingPair> batch,
                         std::vector<DenseLayer>* grad);

struct TrainingConfig {
  int depth = 1;
  int epochs = 25;
  std::size_t batch_size = 5;
  double learning_rate = 0.001;
  double train_fraction = 0.9;
  std::uint64_t seed = 411;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

FeatureEditModel train(const std::vector<SoundChangeRecord>& records,
                       const PhoneFeatureTable& table, const TrainingConfig& config = {});

// Entry 2f = P(f increases | source), entry 2f+1 = P(f decreases | source).
std::vector<double> predict(const FeatureEditModel& model, std::string_view source,
                            const PhoneFeatureTable& table);

// Sum over differing features of (1 - probability of that directional change).
double dwfed_from_probabilities(const FeatureVector& source, const FeatureVector& target,
                                std::span<const double> probabilities);

double dwfed(const FeatureEditModel& model, const PhoneFeatureTable& table,
             std::string_view source, std::string_view target);

}  // namespace sctree
