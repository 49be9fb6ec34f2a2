#include "reefsim/perception.hpp"

#include <string>

namespace reefsim::perception {

namespace {
SubstrateClass flip(SubstrateClass c) {
  return c == SubstrateClass::Suitable ? SubstrateClass::Unsuitable : SubstrateClass::Suitable;
}
}  // namespace

void ClassifierModel::validate() const {
  if (!(recall_suitable >= 0.0 && recall_suitable <= 1.0))
    throw Error(Errc::InvalidParameter, "recall_suitable must be in [0,1]");
  if (!(recall_unsuitable >= 0.0 && recall_unsuitable <= 1.0))
    throw Error(Errc::InvalidParameter, "recall_unsuitable must be in [0,1]");
  if (sticky_frames < 0) throw Error(Errc::InvalidParameter, "sticky_frames must be >= 0");
}

EmulatedClassifier::EmulatedClassifier(const ClassifierModel& model)
    : model_(model), rng_(model.rng_seed) {
  model_.validate();
}

double EmulatedClassifier::uniform() {
  // 53 random mantissa bits; independent of the standard library's
  // distribution implementations.
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

Prediction EmulatedClassifier::classify(SubstrateClass truth, double timestamp) {
  const double recall =
      truth == SubstrateClass::Suitable ? model_.recall_suitable : model_.recall_unsuitable;
  const double u = uniform();
  bool wrong;
  if (sticky_left_ > 0) {
    wrong = true;
    --sticky_left_;
  } else {
    wrong = u >= recall;
    if (wrong && model_.sticky_frames > 1) sticky_left_ = model_.sticky_frames - 1;
  }
  return {wrong ? flip(truth) : truth, next_frame_++, timestamp};
}

Prediction FixedClassifier::classify(SubstrateClass, double timestamp) {
  return {answer_, next_frame_++, timestamp};
}

void ConfusionMatrix::add(SubstrateClass truth, SubstrateClass predicted) {
  const bool t = truth == SubstrateClass::Suitable;
  const bool p = predicted == SubstrateClass::Suitable;
  if (t && p) ++tp;
  else if (t) ++fn;
  else if (p) ++fp;
  else ++tn;
}

ClassificationMetrics confusion_to_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(Errc::InvalidParameter, "confusion matrix is empty");
  const auto f1 = [](std::uint64_t hit, std::uint64_t false_pos, std::uint64_t miss) -> std::optional<double> {
    if (hit + miss == 0) return std::nullopt;
    // 2PR/(P+R) reduces to 2TP/(2TP+FP+FN); zero when nothing was hit.
    return 2.0 * static_cast<double>(hit) / static_cast<double>(2 * hit + false_pos + miss);
  };
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  m.f1_suitable = f1(cm.tp, cm.fp, cm.fn);
  m.f1_unsuitable = f1(cm.tn, cm.fn, cm.fp);
  return m;
}

NamedModel named_model_from_string(std::string_view name) {
  if (name == "LoomisFieldModel") return NamedModel::LoomisField;
  if (name == "WatsonFieldModel") return NamedModel::WatsonField;
  if (name == "CombinedTestModel") return NamedModel::CombinedTest;
  throw Error(Errc::Configuration, "unknown classifier model '" + std::string(name) + "'");
}

std::string_view to_string(NamedModel m) {
  switch (m) {
    case NamedModel::LoomisField: return "LoomisFieldModel";
    case NamedModel::WatsonField: return "WatsonFieldModel";
    case NamedModel::CombinedTest: return "CombinedTestModel";
  }
  return "unknown";
}

ClassifierModel calibrate_model(NamedModel target, std::uint64_t seed) {
  // Recalls are the field area fractions classified correctly over the
  // ground-truth fraction of each class.
  switch (target) {
    case NamedModel::LoomisField: return {46.27 / 46.85, 53.06 / 53.15, seed, 0};
    case NamedModel::WatsonField: return {89.28 / 90.41, 9.49 / 9.59, seed, 0};
    case NamedModel::CombinedTest: return {0.9947, 0.9947, seed, 0};
  }
  throw Error(Errc::Configuration, "unknown classifier model");
}

ClassifierModel calibrate_model(std::string_view target, std::uint64_t seed) {
  return calibrate_model(named_model_from_string(target), seed);
}

}  // namespace reefsim::perception
