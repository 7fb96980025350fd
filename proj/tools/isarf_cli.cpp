// isarf: synthetic cohort generation, feature extraction, cross-validation,
// training and prediction.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "isarf/cv.hpp"
#include "isarf/error.hpp"
#include "isarf/feature_table.hpp"
#include "isarf/isarf_model.hpp"
#include "isarf/metrics.hpp"
#include "isarf/synth.hpp"
#include "isarf/util.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int exit_code(isarf::ErrorKind kind) {
  switch (kind) {
    case isarf::ErrorKind::Usage: return kExitUsage;
    case isarf::ErrorKind::Data: return kExitData;
    case isarf::ErrorKind::Numerical: return kExitNumerical;
  }
  return kExitData;
}

void require_file(const std::string& path, const char* what) {
  if (!std::filesystem::is_regular_file(path)) throw isarf::UsageError(std::string(what) + " not found: " + path);
}

void require_parent(const std::string& path) {
  const auto parent = std::filesystem::absolute(path).parent_path();
  if (!std::filesystem::is_directory(parent)) {
    throw isarf::UsageError("output directory does not exist: " + parent.string());
  }
}

void add_selection_options(CLI::App* cmd, isarf::SelectionOptions& selection) {
  cmd->add_option("--lambda-grid", selection.grid_size, "Number of LASSO penalties on the log grid")
      ->check(CLI::Range(1, 1000));
  cmd->add_option("--lambda-min-ratio", selection.min_ratio, "Smallest grid penalty as a fraction of lambda_max")
      ->check(CLI::Range(1e-12, 1.0));
  cmd->add_option("--inner-folds", selection.inner_folds, "Inner CV folds for choosing the penalty")
      ->check(CLI::Range(2, 100));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Size-aware random forest pipeline for COVID-19 vs CAP classification on chest CT"};
  app.require_subcommand(1);

  struct {
    std::string out;
    int n = 0;
    std::uint64_t seed = 0;
    double covid_frac = 0.6;
    bool null_effect = false;
    int jobs = 1;
  } synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--n", synth.n, "Number of subjects")->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Master seed")->required();
  synth_cmd->add_option("--covid-frac", synth.covid_frac, "Fraction of COVID subjects")->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_flag("--null-effect", synth.null_effect, "Give both classes the same generator profile");
  synth_cmd->add_option("--jobs", synth.jobs, "Worker threads")->check(CLI::PositiveNumber);

  struct {
    std::string cohort, out;
    int jobs = 1;
    double num_large_ml = isarf::kDefaultLargeLesionMl;
  } extract;
  auto* extract_cmd = app.add_subcommand("extract", "Extract the 96 features of every subject in a cohort");
  extract_cmd->add_option("--cohort", extract.cohort, "Cohort directory")->required();
  extract_cmd->add_option("--out", extract.out, "Feature CSV")->required();
  extract_cmd->add_option("--jobs", extract.jobs, "Worker threads")->check(CLI::PositiveNumber);
  extract_cmd->add_option("--num-large-ml", extract.num_large_ml, "Volume (ml) above which a lesion counts as large")
      ->check(CLI::PositiveNumber);

  struct {
    std::string features, model, out;
    std::uint64_t seed = 0;
    int k = 5;
    double threshold = 0.5;
    int min_group_size = 10;
    int jobs = 1;
    isarf::SelectionOptions selection;
  } cv;
  auto* cv_cmd = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  cv_cmd->add_option("--features", cv.features, "Feature CSV")->required();
  cv_cmd->add_option("--model", cv.model, "isarf, rf-global, lr or mlp")->required();
  cv_cmd->add_option("--seed", cv.seed, "Seed")->required();
  cv_cmd->add_option("--out", cv.out, "Report path")->required();
  cv_cmd->add_option("--k", cv.k, "Number of folds")->check(CLI::Range(2, 100));
  cv_cmd->add_option("--threshold", cv.threshold, "Operating threshold on P(COVID)")->check(CLI::Range(0.0, 1.0));
  cv_cmd->add_option("--min-group-size", cv.min_group_size, "Smallest size group kept by iSARF")
      ->check(CLI::PositiveNumber);
  cv_cmd->add_option("--jobs", cv.jobs, "Worker threads for forest training")->check(CLI::PositiveNumber);
  add_selection_options(cv_cmd, cv.selection);

  struct {
    std::string features, model_out;
    std::uint64_t seed = 0;
    int min_group_size = 10;
    int jobs = 1;
    isarf::SelectionOptions selection;
  } train;
  auto* train_cmd = app.add_subcommand("train", "Fit an iSARF model on a whole feature CSV");
  train_cmd->add_option("--features", train.features, "Feature CSV")->required();
  train_cmd->add_option("--model-out", train.model_out, "Model path")->required();
  train_cmd->add_option("--seed", train.seed, "Seed")->required();
  train_cmd->add_option("--min-group-size", train.min_group_size, "Smallest size group kept")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--jobs", train.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_selection_options(train_cmd, train.selection);

  struct {
    std::string model, features, out;
  } predict;
  auto* predict_cmd = app.add_subcommand("predict", "Score a feature CSV with a trained model");
  predict_cmd->add_option("--model", predict.model, "Model path")->required();
  predict_cmd->add_option("--features", predict.features, "Feature CSV")->required();
  predict_cmd->add_option("--out", predict.out, "Predictions CSV (id,prob,group)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth_cmd) {
      isarf::CohortConfig config = isarf::CohortConfig::defaults();
      config.n_subjects = synth.n;
      config.seed = synth.seed;
      config.covid_fraction = synth.covid_frac;
      if (synth.null_effect) config = config.with_null_effect();
      const auto truth = isarf::generate_cohort(config, synth.out, synth.jobs);
      std::cout << "wrote " << truth.size() << " subjects to " << synth.out << '\n';
    } else if (*extract_cmd) {
      if (!std::filesystem::is_directory(extract.cohort)) {
        throw isarf::UsageError("cohort directory not found: " + extract.cohort);
      }
      require_parent(extract.out);
      isarf::ExtractionOptions options;
      options.large_lesion_ml = extract.num_large_ml;
      const auto rows = isarf::extract_cohort(extract.cohort, options, extract.jobs);
      isarf::write_feature_csv(std::filesystem::path(extract.out), rows);
      std::cout << "wrote " << rows.size() << " feature rows to " << extract.out << '\n';
    } else if (*cv_cmd) {
      const auto variant = isarf::parse_model_variant(cv.model);
      require_file(cv.features, "feature CSV");
      require_parent(cv.out);
      isarf::CvOptions options;
      options.folds = cv.k;
      options.threshold = cv.threshold;
      options.jobs = cv.jobs;
      options.classifier.isarf.min_group_size = cv.min_group_size;
      options.selection = cv.selection;
      const auto table = isarf::read_feature_csv(std::filesystem::path(cv.features));
      const auto report = isarf::run_cv(table, variant, cv.seed, options);
      isarf::write_report(std::filesystem::path(cv.out), report);
      std::cout << isarf::format_summary(report);
    } else if (*train_cmd) {
      require_file(train.features, "feature CSV");
      require_parent(train.model_out);
      isarf::TrainOptions options;
      options.isarf.min_group_size = train.min_group_size;
      options.selection = train.selection;
      options.isarf.forest.jobs = train.jobs;
      const auto table = isarf::read_feature_csv(std::filesystem::path(train.features));
      const auto model = isarf::train_isarf_model(table, train.seed, options);
      isarf::write_model(std::filesystem::path(train.model_out), model);
      std::cout << "selected " << model.selected.size() << " features, " << model.core.forests.size()
                << " size groups\n";
    } else if (*predict_cmd) {
      require_file(predict.model, "model");
      require_file(predict.features, "feature CSV");
      require_parent(predict.out);
      const auto model = isarf::read_model(std::filesystem::path(predict.model));
      const auto table = isarf::read_feature_csv(std::filesystem::path(predict.features));
      const auto predictions = isarf::isarf_predict(model, table);
      std::ofstream out(predict.out, std::ios::binary);
      if (!out) throw isarf::DataError("cannot open " + predict.out + " for writing");
      out << "id,prob,group\n";
      for (std::size_t i = 0; i < predictions.size(); ++i) {
        out << table.ids[i] << ',' << isarf::format_shortest(predictions[i].probability) << ','
            << predictions[i].group << '\n';
      }
      out.flush();
      if (!out) throw isarf::DataError("failed writing " + predict.out);
    }
  } catch (const isarf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
