#include "isarf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>

#include "isarf/error.hpp"
#include "isarf/util.hpp"

namespace isarf {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_inputs(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y) {
  if (X.rows() != y.size()) throw DataError("X and y row counts differ");
  if (!X.allFinite()) throw DataError("non-finite input features");
}

}  // namespace

Eigen::VectorXd LogisticModel::predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  Eigen::VectorXd z = X * weights;
  return z.unaryExpr([this](double v) { return sigmoid(v + intercept); });
}

LogisticGradient logistic_objective(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                    const Eigen::Ref<const Eigen::VectorXi>& y,
                                    const Eigen::Ref<const Eigen::VectorXd>& w, double b, double C) {
  const Eigen::VectorXd z = (X * w).array() + b;
  LogisticGradient g;
  Eigen::VectorXd residual(z.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // -[y log s + (1-y) log(1-s)] = softplus(z) - y z
    loss += softplus(z[i]) - (y[i] != 0 ? z[i] : 0.0);
    residual[i] = sigmoid(z[i]) - (y[i] != 0 ? 1.0 : 0.0);
  }
  g.objective = loss + w.squaredNorm() / (2.0 * C);
  g.weights = X.transpose() * residual + w / C;
  g.intercept = residual.sum();
  return g;
}

LogisticModel fit_logistic_l2(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                              double C, int max_iter, double tolerance) {
  check_inputs(X, y);
  if (!(C > 0)) throw UsageError("logistic regression needs C > 0");
  const Eigen::Index n = X.rows(), p = X.cols();
  LogisticModel m;
  m.C = C;
  m.weights = Eigen::VectorXd::Zero(p);
  m.intercept = 0.0;

  // Augmented design [X 1]; theta = [w; b].
  Eigen::MatrixXd A(n, p + 1);
  A.leftCols(p) = X;
  A.col(p).setOnes();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p + 1, 1.0 / C);
  penalty[p] = 0.0;

  auto evaluate = [&](const Eigen::VectorXd& th) {
    return logistic_objective(X, y, th.head(p), th[p], C);
  };
  LogisticGradient cur = evaluate(theta);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd grad(p + 1);
    grad << cur.weights, cur.intercept;
    m.iterations = it;
    if (grad.lpNorm<Eigen::Infinity>() <= tolerance) break;

    const Eigen::VectorXd z = A * theta;
    Eigen::VectorXd s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double q = sigmoid(z[i]);
      s[i] = q * (1.0 - q);
    }
    Eigen::MatrixXd H = A.transpose() * s.asDiagonal() * A;
    H.diagonal() += penalty;
    H.diagonal().array() += 1e-12;  // intercept row when all curvature vanishes
    const Eigen::VectorXd step = H.ldlt().solve(grad);

    // Backtracking line search on the objective.
    double t = 1.0;
    LogisticGradient next;
    for (int ls = 0; ls < 50; ++ls) {
      next = evaluate(theta - t * step);
      if (next.objective <= cur.objective - 1e-4 * t * grad.dot(step)) break;
      t *= 0.5;
    }
    theta -= t * step;
    cur = next;
    m.iterations = it + 1;
  }
  if (!theta.allFinite()) throw NumericalError("logistic regression diverged");
  m.weights = theta.head(p);
  m.intercept = theta[p];
  return m;
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  return a.W1 == b.W1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2;
}

Eigen::VectorXd MlpModel::predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  const Eigen::MatrixXd hidden = ((X * W1.transpose()).rowwise() + b1.transpose()).cwiseMax(0.0);
  const Eigen::VectorXd z = (hidden * w2).array() + b2;
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

MlpGradient mlp_loss_and_gradient(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const Eigen::Ref<const Eigen::VectorXi>& y) {
  const double n = static_cast<double>(X.rows());
  const Eigen::MatrixXd pre = (X * model.W1.transpose()).rowwise() + model.b1.transpose();
  const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  const Eigen::VectorXd z = (hidden * model.w2).array() + model.b2;

  MlpGradient g;
  Eigen::VectorXd dz(z.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double target = y[i] != 0 ? 1.0 : 0.0;
    loss += softplus(z[i]) - target * z[i];
    dz[i] = (sigmoid(z[i]) - target) / n;
  }
  g.loss = loss / n;
  g.grad.w2 = hidden.transpose() * dz;
  g.grad.b2 = dz.sum();
  Eigen::MatrixXd dpre = dz * model.w2.transpose();
  dpre.array() *= (pre.array() > 0.0).cast<double>();
  g.grad.W1 = dpre.transpose() * X;
  g.grad.b1 = dpre.colwise().sum().transpose();
  return g;
}

namespace {

struct AdamState {
  MlpModel m, v;
  int t = 0;

  explicit AdamState(const MlpModel& shape) {
    m.W1 = Eigen::MatrixXd::Zero(shape.W1.rows(), shape.W1.cols());
    m.b1 = Eigen::VectorXd::Zero(shape.b1.size());
    m.w2 = Eigen::VectorXd::Zero(shape.w2.size());
    v = m;
  }

  void step(MlpModel& w, const MlpModel& g, const MlpParams& p) {
    ++t;
    const double c1 = 1.0 - std::pow(p.beta1, t);
    const double c2 = 1.0 - std::pow(p.beta2, t);
    auto update = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
      mom = p.beta1 * mom + (1.0 - p.beta1) * grad;
      vel = p.beta2 * vel + (1.0 - p.beta2) * grad.cwiseProduct(grad);
      param.array() -= p.learning_rate * (mom.array() / c1) / ((vel.array() / c2).sqrt() + p.epsilon);
    };
    update(w.W1, m.W1, v.W1, g.W1);
    update(w.b1, m.b1, v.b1, g.b1);
    update(w.w2, m.w2, v.w2, g.w2);
    m.b2 = p.beta1 * m.b2 + (1.0 - p.beta1) * g.b2;
    v.b2 = p.beta2 * v.b2 + (1.0 - p.beta2) * g.b2 * g.b2;
    w.b2 -= p.learning_rate * (m.b2 / c1) / (std::sqrt(v.b2 / c2) + p.epsilon);
  }
};

template <typename Rows>
Eigen::MatrixXd gather(const Eigen::Ref<const Eigen::MatrixXd>& X, const Rows& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

template <typename Rows>
Eigen::VectorXi gather(const Eigen::Ref<const Eigen::VectorXi>& y, const Rows& rows) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[rows[i]];
  return out;
}

}  // namespace

MlpModel fit_mlp(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                 std::uint64_t seed, const MlpParams& params) {
  check_inputs(X, y);
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n < 20) throw DataError("MLP needs at least 20 training samples");

  std::mt19937_64 rng(seed);
  // He-uniform for the ReLU layer, LeCun-uniform for the sigmoid output.
  MlpModel model;
  const double bound1 = std::sqrt(6.0 / std::max(1, p));
  const double bound2 = std::sqrt(3.0 / params.hidden);
  std::uniform_real_distribution<double> u1(-bound1, bound1), u2(-bound2, bound2);
  model.W1.resize(params.hidden, p);
  for (Eigen::Index i = 0; i < model.W1.size(); ++i) model.W1.data()[i] = u1(rng);
  model.b1 = Eigen::VectorXd::Zero(params.hidden);
  model.w2.resize(params.hidden);
  for (Eigen::Index i = 0; i < model.w2.size(); ++i) model.w2[i] = u2(rng);
  model.b2 = 0.0;

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
  }
  const int n_val = std::max(1, static_cast<int>(std::lround(params.validation_fraction * n)));
  const std::vector<int> val_rows(order.end() - n_val, order.end());
  std::vector<int> train_rows(order.begin(), order.end() - n_val);
  const Eigen::MatrixXd Xv = gather(X, val_rows);
  const Eigen::VectorXi yv = gather(y, val_rows);

  AdamState adam(model);
  MlpModel best = model;
  double best_loss = mlp_loss_and_gradient(model, Xv, yv).loss;
  int stale = 0;
  for (int epoch = 1; epoch <= params.max_iter; ++epoch) {
    for (int i = static_cast<int>(train_rows.size()) - 1; i > 0; --i) {
      std::uniform_int_distribution<int> pick(0, i);
      std::swap(train_rows[static_cast<std::size_t>(i)], train_rows[static_cast<std::size_t>(pick(rng))]);
    }
    for (std::size_t start = 0; start < train_rows.size(); start += static_cast<std::size_t>(params.batch_size)) {
      const std::size_t end = std::min(train_rows.size(), start + static_cast<std::size_t>(params.batch_size));
      const std::vector<int> batch(train_rows.begin() + static_cast<std::ptrdiff_t>(start),
                                   train_rows.begin() + static_cast<std::ptrdiff_t>(end));
      const MlpGradient g = mlp_loss_and_gradient(model, gather(X, batch), gather(y, batch));
      adam.step(model, g.grad, params);
    }
    model.epochs = epoch;
    const double val_loss = mlp_loss_and_gradient(model, Xv, yv).loss;
    if (!std::isfinite(val_loss)) throw NumericalError("MLP training diverged");
    const bool improved = val_loss < best_loss - params.tolerance;
    if (val_loss < best_loss) {
      best_loss = val_loss;
      best = model;
    }
    if (improved) {
      stale = 0;
    } else if (++stale >= params.patience) {
      break;
    }
  }
  best.epochs = model.epochs;
  return best;
}

}  // namespace isarf
