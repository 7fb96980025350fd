#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "isarf/baselines.hpp"
#include "isarf/forest.hpp"
#include "isarf/isarf_model.hpp"

namespace isarf {

enum class ModelVariant { Isarf, RfGlobal, Logistic, Mlp };

std::string to_string(ModelVariant variant);
/// "isarf", "rf-global", "lr", "mlp".
ModelVariant parse_model_variant(std::string_view name);
const std::vector<ModelVariant>& all_model_variants();

struct ClassifierOptions {
  IsarfParams isarf;
  ForestParams forest;  // rf-global
  double logistic_C = 1.0;
  MlpParams mlp;
};

/// Common fit/predict surface so the CV harness is model-agnostic. X holds the
/// standardized selected features; sizes are raw infection fractions.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                   const Eigen::Ref<const Eigen::VectorXd>& sizes, std::uint64_t seed) = 0;
  virtual Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const Eigen::Ref<const Eigen::VectorXd>& sizes) const = 0;
  /// Learned size-routing thresholds; empty for size-agnostic models.
  virtual std::vector<double> size_thresholds() const { return {}; }
};

std::unique_ptr<Classifier> make_classifier(ModelVariant variant, const ClassifierOptions& options = {});

}  // namespace isarf
