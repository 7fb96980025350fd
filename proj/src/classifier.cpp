#include "isarf/classifier.hpp"

#include "isarf/error.hpp"

namespace isarf {

std::string to_string(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::Isarf: return "isarf";
    case ModelVariant::RfGlobal: return "rf-global";
    case ModelVariant::Logistic: return "lr";
    case ModelVariant::Mlp: return "mlp";
  }
  return "?";
}

ModelVariant parse_model_variant(std::string_view name) {
  for (ModelVariant v : all_model_variants())
    if (to_string(v) == name) return v;
  throw UsageError("unknown model variant '" + std::string(name) + "' (expected isarf, rf-global, lr or mlp)");
}

const std::vector<ModelVariant>& all_model_variants() {
  static const std::vector<ModelVariant> variants{ModelVariant::Isarf, ModelVariant::RfGlobal, ModelVariant::Logistic,
                                                  ModelVariant::Mlp};
  return variants;
}

namespace {

class IsarfClassifier final : public Classifier {
 public:
  explicit IsarfClassifier(IsarfParams params) : params_(params) {}

  void fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
           const Eigen::Ref<const Eigen::VectorXd>& sizes, std::uint64_t seed) override {
    model_ = fit_isarf(X, y, sizes, seed, params_);
  }

  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>& sizes) const override {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = model_.predict(X.row(i), sizes[i]);
    return out;
  }

  std::vector<double> size_thresholds() const override { return model_.thresholds; }

 private:
  IsarfParams params_;
  SizeAwareForest model_;
};

class ForestClassifier final : public Classifier {
 public:
  explicit ForestClassifier(ForestParams params) : params_(params) {}

  void fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
           const Eigen::Ref<const Eigen::VectorXd>&, std::uint64_t seed) override {
    forest_ = fit_random_forest(X, y, params_, seed);
  }

  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>&) const override {
    return forest_.predict(X);
  }

 private:
  ForestParams params_;
  RandomForest forest_;
};

class LogisticClassifier final : public Classifier {
 public:
  explicit LogisticClassifier(double C) : C_(C) {}

  void fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
           const Eigen::Ref<const Eigen::VectorXd>&, std::uint64_t) override {
    model_ = fit_logistic_l2(X, y, C_);
  }

  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>&) const override {
    return model_.predict(X);
  }

 private:
  double C_;
  LogisticModel model_;
};

class MlpClassifier final : public Classifier {
 public:
  explicit MlpClassifier(MlpParams params) : params_(params) {}

  void fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
           const Eigen::Ref<const Eigen::VectorXd>&, std::uint64_t seed) override {
    model_ = fit_mlp(X, y, seed, params_);
  }

  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>&) const override {
    return model_.predict(X);
  }

 private:
  MlpParams params_;
  MlpModel model_;
};

}  // namespace

std::unique_ptr<Classifier> make_classifier(ModelVariant variant, const ClassifierOptions& options) {
  switch (variant) {
    case ModelVariant::Isarf: return std::make_unique<IsarfClassifier>(options.isarf);
    case ModelVariant::RfGlobal: return std::make_unique<ForestClassifier>(options.forest);
    case ModelVariant::Logistic: return std::make_unique<LogisticClassifier>(options.logistic_C);
    case ModelVariant::Mlp: return std::make_unique<MlpClassifier>(options.mlp);
  }
  throw UsageError("unhandled model variant");
}

}  // namespace isarf
