#pragma once
// Substrate classifier emulation and confusion-matrix metrics.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string_view>

#include "reefsim/reefworld.hpp"

namespace reefsim::perception {

using reefworld::SubstrateClass;

struct ClassifierModel {
  double recall_suitable = 1.0;    // P(predict Suitable | truth Suitable)
  double recall_unsuitable = 1.0;  // P(predict Unsuitable | truth Unsuitable)
  std::uint64_t rng_seed = 0;
  // When > 0, a misclassification repeats for this many consecutive frames.
  int sticky_frames = 0;

  void validate() const;
};

struct Prediction {
  SubstrateClass predicted = SubstrateClass::Unsuitable;
  std::uint64_t frame_id = 0;
  double timestamp = 0.0;
};

/// Anything that turns the substrate under the camera into a prediction.
/// Implementations need not look at `truth`.
class SubstrateClassifier {
 public:
  virtual ~SubstrateClassifier() = default;
  virtual Prediction classify(SubstrateClass truth, double timestamp) = 0;
};

/// Rate-exact emulator: independent Bernoulli errors per frame (or runs of
/// `sticky_frames` errors) drawn from a seeded 64-bit Mersenne Twister, so a
/// (seed, truth sequence) pair always yields the same predictions.
class EmulatedClassifier final : public SubstrateClassifier {
 public:
  explicit EmulatedClassifier(const ClassifierModel& model);

  Prediction classify(SubstrateClass truth, double timestamp) override;
  const ClassifierModel& model() const { return model_; }

 private:
  double uniform();

  ClassifierModel model_;
  std::mt19937_64 rng_;
  std::uint64_t next_frame_ = 0;
  int sticky_left_ = 0;
};

/// Truth-oblivious classifier that always answers `answer`.
class FixedClassifier final : public SubstrateClassifier {
 public:
  explicit FixedClassifier(SubstrateClass answer) : answer_(answer) {}
  Prediction classify(SubstrateClass truth, double timestamp) override;

 private:
  SubstrateClass answer_;
  std::uint64_t next_frame_ = 0;
};

/// Suitable is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fn + fp + tn; }
  void add(SubstrateClass truth, SubstrateClass predicted);
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  // nullopt when the class has no support in the matrix.
  std::optional<double> f1_suitable;
  std::optional<double> f1_unsuitable;
};

ClassificationMetrics confusion_to_metrics(const ConfusionMatrix& cm);

enum class NamedModel { LoomisField, WatsonField, CombinedTest };

NamedModel named_model_from_string(std::string_view name);
std::string_view to_string(NamedModel m);

ClassifierModel calibrate_model(NamedModel target, std::uint64_t seed);
/// Throws Configuration for an unknown scenario name.
ClassifierModel calibrate_model(std::string_view target, std::uint64_t seed);

}  // namespace reefsim::perception
