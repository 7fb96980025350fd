#include <gtest/gtest.h>

#include <random>

#include <Eigen/QR>

#include "isarf/error.hpp"
#include "isarf/lasso.hpp"
#include "isarf/util.hpp"

using namespace isarf;

namespace {

Eigen::MatrixXd gaussian(int n, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = g(rng);
  return X;
}

Eigen::VectorXi binary_labels(const Eigen::VectorXd& score) {
  Eigen::VectorXi y(score.size());
  for (Eigen::Index i = 0; i < score.size(); ++i) y[i] = score[i] > 0 ? 1 : 0;
  return y;
}

double kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LassoFit& fit, double lambda) {
  const double n = static_cast<double>(X.rows());
  const Eigen::VectorXd r = (y - X * fit.coef).array() - fit.intercept;
  const Eigen::VectorXd g = X.transpose() * r / n;
  double worst = std::abs(r.mean());
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    worst = std::max(worst, fit.coef[j] == 0 ? std::max(0.0, std::abs(g[j]) - lambda)
                                             : std::abs(g[j] - lambda * (fit.coef[j] > 0 ? 1 : -1)));
  }
  return worst;
}

}  // namespace

TEST(Standardize, ColumnExamples) {
  Eigen::MatrixXd X(3, 2);
  X << 1, 5, 2, 5, 3, 5;
  const auto s = standardize_fit_apply(X, X);
  EXPECT_EQ(s.train.col(0), Eigen::Vector3d(-1, 0, 1));
  EXPECT_EQ(s.train.col(1), Eigen::Vector3d::Zero());
  EXPECT_FALSE(s.params.constant[0]);
  EXPECT_TRUE(s.params.constant[1]);
  EXPECT_THROW(fit_standardization(Eigen::MatrixXd(0, 2)), DataError);
}

TEST(Standardize, HeldOutUsesTrainingParameters) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd A = gaussian(40, 5, rng) * 3.0;
  const Eigen::MatrixXd B = (gaussian(25, 5, rng).array() + 2.0).matrix();
  const auto s = standardize_fit_apply(A, B);
  for (int j = 0; j < 5; ++j) {
    EXPECT_NEAR(s.train.col(j).mean(), 0.0, 1e-12);
    const double var = (s.train.col(j).array() - s.train.col(j).mean()).square().sum() / 39.0;
    EXPECT_NEAR(var, 1.0, 1e-12);
    const double sd = std::sqrt((A.col(j).array() - A.col(j).mean()).square().sum() / 39.0);
    EXPECT_NEAR(s.other.col(j).mean(), (B.col(j).mean() - A.col(j).mean()) / sd, 1e-12);
  }
  EXPECT_EQ(s.params.apply_row(B.row(3).transpose()), s.other.row(3).transpose());
}

TEST(Lasso, SoftThreshold) {
  EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
}

TEST(Lasso, LambdaMaxGivesZero) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd X = gaussian(30 + trial, 8, rng);
    const Eigen::VectorXd y = binary_labels(X.col(0) + gaussian(30 + trial, 1, rng).col(0)).cast<double>();
    const double lmax = lambda_max(X, y);
    const auto fit = lasso_fit(X, y, lmax * (1.0 + 0.01 * (trial % 3)));
    EXPECT_TRUE((fit.coef.array() == 0.0).all());
    EXPECT_DOUBLE_EQ(fit.intercept, y.mean());
  }
}

TEST(Lasso, OrthonormalDesignClosedForm) {
  std::mt19937_64 rng(3);
  const int n = 64, p = 6;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(n, p, rng));
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  // Remove column means so the intercept does not interact, then rescale to X^T X / n = I.
  Eigen::MatrixXd Xc = Q.rowwise() - Q.colwise().mean();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr2(Xc);
  Eigen::MatrixXd X = (qr2.householderQ() * Eigen::MatrixXd::Identity(n, p)) * std::sqrt(static_cast<double>(n));
  ASSERT_NEAR((X.colwise().sum()).cwiseAbs().maxCoeff(), 0.0, 1e-9);
  const Eigen::VectorXd y = binary_labels(X.col(0) - 0.5 * X.col(2) + gaussian(n, 1, rng).col(0)).cast<double>();
  for (double lambda : {0.01, 0.05, 0.1, 0.2}) {
    const auto fit = lasso_fit(X, y, lambda);
    for (int j = 0; j < p; ++j) {
      EXPECT_NEAR(fit.coef[j], soft_threshold(X.col(j).dot(y) / n, lambda), 1e-8);
    }
  }
}

TEST(Lasso, ZeroPenaltyMatchesLeastSquares) {
  std::mt19937_64 rng(4);
  const int n = 50, p = 5;
  const Eigen::MatrixXd X = gaussian(n, p, rng);
  const Eigen::VectorXd y = binary_labels(X.col(1) + gaussian(n, 1, rng).col(0)).cast<double>();
  Eigen::MatrixXd A(n, p + 1);
  A << Eigen::VectorXd::Ones(n), X;
  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(y);
  const auto fit = lasso_fit(X, y, 0.0);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.intercept, beta[0], 1e-6);
  for (int j = 0; j < p; ++j) EXPECT_NEAR(fit.coef[j], beta[j + 1], 1e-6);
}

TEST(Lasso, KktHoldsAlongPath) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd X = gaussian(60, 20, rng);
    const Eigen::VectorXd y = binary_labels(X.col(0) + X.col(3) + gaussian(60, 1, rng).col(0)).cast<double>();
    const double lmax = lambda_max(X, y);
    LassoFit prev;
    for (int g = 0; g < 20; ++g) {
      const double lambda = lmax * std::pow(1e-3, g / 19.0);
      const auto fit = lasso_fit(X, y, lambda, {}, g == 0 ? nullptr : &prev);
      ASSERT_TRUE(fit.converged);
      EXPECT_LE(kkt_residual(X, y, fit, lambda), 1e-6);
      prev = fit;
    }
  }
}

TEST(Lasso, SupportShrinksAsPenaltyGrowsOnOrthogonalDesign) {
  // With X^T X / n = I each coefficient is its own soft-threshold, so the
  // support is nested along the grid.
  std::mt19937_64 rng(6);
  const int n = 64, p = 10;
  Eigen::MatrixXd G = gaussian(n, p, rng);
  G = G.rowwise() - G.colwise().mean();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  const Eigen::MatrixXd X = (qr.householderQ() * Eigen::MatrixXd::Identity(n, p)) * std::sqrt(static_cast<double>(n));
  const Eigen::VectorXd y = binary_labels(X.col(0) - X.col(4) + gaussian(n, 1, rng).col(0)).cast<double>();
  const double lmax = lambda_max(X, y);
  std::vector<int> previous;
  for (int g = 29; g >= 0; --g) {
    const auto support = lasso_fit(X, y, lmax * std::pow(1e-2, g / 29.0)).support();
    EXPECT_TRUE(std::includes(previous.begin(), previous.end(), support.begin(), support.end()) || g == 29);
    previous = support;
  }
}

TEST(Lasso, RowPermutationInvariance) {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd X = gaussian(40, 6, rng);
  const Eigen::VectorXd y = binary_labels(X.col(2) + gaussian(40, 1, rng).col(0)).cast<double>();
  std::vector<int> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd Xp(40, 6);
  Eigen::VectorXd yp(40);
  for (int i = 0; i < 40; ++i) {
    Xp.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
    yp[i] = y[perm[static_cast<std::size_t>(i)]];
  }
  const auto a = lasso_fit(X, y, 0.02), b = lasso_fit(Xp, yp, 0.02);
  EXPECT_EQ(a.support(), b.support());
  EXPECT_LE((a.coef - b.coef).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Lasso, RejectsBadInput) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
  X(1, 1) = std::nan("");
  EXPECT_THROW(lasso_fit(X, y, 0.1), DataError);
  EXPECT_THROW(lasso_fit(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Ones(1), 0.1), DataError);
}

TEST(Selection, PlantedSignalIsFound) {
  int hits = 0;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const int n = 120;
    Eigen::MatrixXd X = gaussian(n, 96, rng);
    Eigen::VectorXi y(n);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> tiny(0.0, 0.01);
    for (int i = 0; i < n; ++i) {
      y[i] = coin(rng) ? 1 : 0;
      X(i, 37) = y[i] + tiny(rng);
    }
    const auto z = standardize_fit_apply(X, X);
    const auto sel = select_features(z.train, y, static_cast<std::uint64_t>(seed));
    if (std::find(sel.selected.begin(), sel.selected.end(), 37) != sel.selected.end()) ++hits;
    EXPECT_EQ(sel.curve.size(), 50u);
  }
  EXPECT_GE(hits, 19);
}

TEST(Selection, IndependentLabelsAreDeterministicAndNonEmpty) {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd X = gaussian(60, 20, rng);
  Eigen::VectorXi y(60);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 60; ++i) y[i] = coin(rng) ? 1 : 0;
  const auto a = select_features(X, y, 9), b = select_features(X, y, 9);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.coef, b.coef);
  EXPECT_FALSE(a.selected.empty());
  for (int j : a.selected) EXPECT_NE(a.coef[j], 0.0);
}

TEST(Selection, DuplicatedPredictiveColumn) {
  std::mt19937_64 rng(10);
  Eigen::MatrixXd X = gaussian(80, 10, rng);
  const Eigen::VectorXi y = binary_labels(X.col(0));
  X.col(1) = X.col(0);
  const auto sel = select_features(X, y, 3);
  EXPECT_FALSE(sel.selected.empty());
}

TEST(Selection, TooFewSamples) {
  EXPECT_THROW(select_features(Eigen::MatrixXd::Ones(9, 3), Eigen::VectorXi::Ones(9), 1), DataError);
}

TEST(Selection, FrequencyAccounting) {
  std::mt19937_64 rng(11);
  std::vector<SelectionResult> folds;
  for (int f = 0; f < 5; ++f) {
    const Eigen::MatrixXd X = gaussian(50, 8, rng);
    folds.push_back(select_features(X, binary_labels(X.col(2) + 0.5 * X.col(5)), static_cast<std::uint64_t>(f)));
  }
  std::vector<std::string> names;
  for (int j = 0; j < 8; ++j) names.push_back("f" + std::to_string(j));
  const auto freq = selection_frequency(folds, names);
  ASSERT_EQ(freq.size(), 8u);
  int total = 0, expected = 0;
  for (const auto& [name, count] : freq) total += count;
  for (const auto& f : folds) expected += static_cast<int>(f.selected.size());
  EXPECT_EQ(total, expected);
  EXPECT_EQ(freq.front().first, "f2");
  EXPECT_EQ(freq.front().second, 5);
  for (std::size_t i = 1; i < freq.size(); ++i) EXPECT_GE(freq[i - 1].second, freq[i].second);
}
