#include "propas/sparse_id.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "propas/errors.hpp"
#include "propas/least_squares.hpp"
#include "propas/units.hpp"

namespace propas::sparse {

namespace {

void require_positive_omega(std::span<const RegressionRecord> records) {
  for (const auto& r : records) {
    if (!(r.omega > 0.0)) throw std::invalid_argument("feature library: omega must be positive");
  }
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

void require_finite(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (!x.allFinite() || !y.allFinite()) throw NonFiniteError("lasso: non-finite design or target");
}

}  // namespace

double FeatureLibrary::target(const RegressionRecord& r) const {
  if (transform == TargetTransform::kIdentity) return r.v_a;
  return r.v_a / (units::rad_s_to_rev_s(r.omega) * diameter);
}

bool FeatureLibrary::has_constant() const {
  return std::any_of(features.begin(), features.end(), [](const Feature& f) { return f.constant; });
}

std::vector<std::string> FeatureLibrary::names() const {
  std::vector<std::string> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.name);
  return out;
}

std::string monomial_name(int a, int b) {
  const std::string p = a == 0 ? "" : (a == 1 ? "P" : "P" + std::to_string(a));
  const int mag = std::abs(b);
  const std::string w = mag == 1 ? "omega" : "omega" + std::to_string(mag);
  if (b == 0) return p.empty() ? "1" : p;
  if (b > 0) return p.empty() ? w : p + "_" + w;
  return (p.empty() ? "1" : p) + "_over_" + w;
}

FeatureLibrary build_features_direct(std::span<const RegressionRecord> records,
                                     const DirectLibraryOptions& options) {
  if (records.empty()) throw std::invalid_argument("build_features_direct: no records");
  require_positive_omega(records);

  FeatureLibrary lib;
  lib.transform = TargetTransform::kIdentity;
  for (int a = 0; a <= options.max_power_exponent; ++a) {
    for (int b = options.min_omega_exponent; b <= options.max_omega_exponent; ++b) {
      if (a == 0 && b == 0) continue;
      lib.features.push_back({monomial_name(a, b), [a, b](const RegressionRecord& r) {
                                return std::pow(r.power, a) * std::pow(r.omega, b);
                              }});
    }
  }
  if (options.include_omega_dot) {
    lib.features.push_back({"omega_dot", [](const RegressionRecord& r) { return r.omega_dot; }});
    lib.features.push_back(
        {"omega_dot_over_omega", [](const RegressionRecord& r) { return r.omega_dot / r.omega; }});
  }
  return lib;
}

FeatureLibrary build_features_indirect(std::span<const RegressionRecord> records, double diameter,
                                       int max_degree) {
  if (records.empty()) throw std::invalid_argument("build_features_indirect: no records");
  if (!(diameter > 0.0)) throw std::invalid_argument("build_features_indirect: bad diameter");
  require_positive_omega(records);

  FeatureLibrary lib;
  lib.transform = TargetTransform::kAdvanceRatio;
  lib.diameter = diameter;
  for (int k = 0; k <= max_degree; ++k) {
    lib.features.push_back({"cp" + std::to_string(k),
                            [k](const RegressionRecord& r) { return std::pow(r.c_p, k); }, k == 0});
  }
  return lib;
}

Design assemble(const FeatureLibrary& library, std::span<const RegressionRecord> records) {
  const auto n = static_cast<Eigen::Index>(records.size());
  const auto p = static_cast<Eigen::Index>(library.size());
  Design d{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j)
      d.x(i, j) = library.features[static_cast<std::size_t>(j)].eval(r);
    d.y(i) = library.target(r);
  }
  return d;
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out.col(jj) = (x.col(kept[j]).array() - mean(jj)) / scale(jj);
  }
  return out;
}

Standardization fit_standardization(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Standardization s;
  const double n = static_cast<double>(x.rows());
  std::vector<double> means, scales;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double m = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - m).square().sum() / n);
    if (!(sd > 1e-12 * std::abs(m)) || sd == 0.0) {
      s.dropped.push_back(j);
      continue;
    }
    s.kept.push_back(j);
    means.push_back(m);
    scales.push_back(sd);
  }
  s.mean = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
  s.scale = Eigen::Map<Eigen::VectorXd>(scales.data(), static_cast<Eigen::Index>(scales.size()));
  s.y_mean = y.size() > 0 ? y.mean() : 0.0;
  return s;
}

LinearModel unstandardize(const Standardization& s, const Eigen::VectorXd& w) {
  LinearModel out;
  out.coefficients = w.cwiseQuotient(s.scale);
  out.intercept = s.y_mean - out.coefficients.dot(s.mean);
  return out;
}

double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.cols() == 0 || x.rows() == 0) return 0.0;
  return (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

std::vector<double> lambda_grid(double lmax, int count, double ratio) {
  if (count < 1) throw std::invalid_argument("lambda_grid: count must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lmax;
    return out;
  }
  const double step = std::log(ratio) / static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lmax * std::exp(step * i);
  return out;
}

namespace {

// Coordinate descent on precomputed Gram quantities (covariance updates).
LassoResult gram_descent(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xty, double yty,
                         double lambda, Eigen::VectorXd w, const LassoOptions& options) {
  const Eigen::Index p = gram.rows();
  // grad(j) = x_j^T (y - X w) / N
  Eigen::VectorXd grad = xty - gram * w;
  LassoResult out;
  auto objective = [&] {
    const double fit = 0.5 * (yty - 2.0 * w.dot(xty) + w.dot(gram * w));
    return fit + lambda * w.lpNorm<1>();
  };

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double d = gram(j, j);
      if (d <= 0.0) continue;
      const double updated = soft_threshold(grad(j) + d * w(j), lambda) / d;
      const double delta = updated - w(j);
      if (delta != 0.0) {
        grad -= delta * gram.col(j);
        w(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    out.sweeps = sweep + 1;
    if (options.record_objective) out.objective.push_back(objective());
    if (max_change < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.w = std::move(w);
  return out;
}

struct GramSystem {
  Eigen::MatrixXd gram;
  Eigen::VectorXd xty;
  double yty = 0.0;
};

GramSystem gram_system(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(x.rows());
  GramSystem g;
  g.gram = (x.transpose() * x) / n;
  g.xty = (x.transpose() * y) / n;
  g.yty = y.squaredNorm() / n;
  return g;
}

}  // namespace

LassoResult lasso_coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     double lambda, const Eigen::VectorXd& warm_start,
                                     const LassoOptions& options) {
  require_finite(x, y);
  if (!(lambda >= 0.0)) throw std::invalid_argument("lasso: lambda must be >= 0");
  if (x.rows() != y.size()) throw std::invalid_argument("lasso: row count mismatch");
  if (warm_start.size() != x.cols()) throw std::invalid_argument("lasso: warm start size mismatch");
  const GramSystem g = gram_system(x, y);
  return gram_descent(g.gram, g.xty, g.yty, lambda, warm_start, options);
}

LassoResult lasso_coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     double lambda, const LassoOptions& options) {
  return lasso_coordinate_descent(x, y, lambda, Eigen::VectorXd::Zero(x.cols()), options);
}

std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold_assignment: k must be >= 2");
  if (static_cast<std::size_t>(k) > n) throw std::invalid_argument("fold_assignment: k exceeds N");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's distribution implementation.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t span = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    std::swap(order[i - 1], order[static_cast<std::size_t>(draw % span)]);
  }

  std::vector<int> folds(n);
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t i = 0; i < len; ++i) folds[order[pos++]] = f;
  }
  return folds;
}

namespace {

// Full warm-started path on standardized data; returns kept x lambda.
Eigen::MatrixXd run_path(const Eigen::MatrixXd& xs, const Eigen::VectorXd& yc,
                         std::span<const double> lambdas, const LassoOptions& options) {
  const GramSystem g = gram_system(xs, yc);
  Eigen::MatrixXd coefs(xs.cols(), static_cast<Eigen::Index>(lambdas.size()));
  Eigen::VectorXd w = Eigen::VectorXd::Zero(xs.cols());
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    w = gram_descent(g.gram, g.xty, g.yty, lambdas[l], w, options).w;
    coefs.col(static_cast<Eigen::Index>(l)) = w;
  }
  return coefs;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
  return out;
}

}  // namespace

LassoPath cv_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const CvOptions& options,
                   std::span<const double> lambdas) {
  require_finite(x, y);
  if (x.rows() != y.size()) throw std::invalid_argument("cv_lasso: row count mismatch");
  const auto n = static_cast<std::size_t>(x.rows());
  if (options.folds < 2) throw std::invalid_argument("cv_lasso: k must be >= 2");
  if (static_cast<std::size_t>(options.folds) > n) throw std::invalid_argument("cv_lasso: k > N");

  LassoPath path;
  path.folds = options.folds;
  path.standardization = fit_standardization(x, y);
  const Eigen::MatrixXd xs = path.standardization.apply(x);
  const Eigen::VectorXd yc = y.array() - path.standardization.y_mean;

  if (lambdas.empty()) {
    path.lambdas = lambda_grid(lambda_max(xs, yc), options.n_lambdas, options.lambda_ratio);
  } else {
    path.lambdas.assign(lambdas.begin(), lambdas.end());
  }
  for (std::size_t l = 1; l < path.lambdas.size(); ++l) {
    if (!(path.lambdas[l] < path.lambdas[l - 1])) {
      throw std::invalid_argument("cv_lasso: lambdas must be strictly decreasing");
    }
  }
  path.coefs = run_path(xs, yc, path.lambdas, options.lasso);

  const std::size_t n_lambda = path.lambdas.size();
  const auto folds = fold_assignment(n, options.folds, options.seed);
  Eigen::MatrixXd fold_err(options.folds, static_cast<Eigen::Index>(n_lambda));
  for (int f = 0; f < options.folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < n; ++i)
      (folds[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
    const Eigen::MatrixXd x_tr = select_rows(x, train);
    const Eigen::VectorXd y_tr = select_rows(y, train);
    const Eigen::MatrixXd x_te = select_rows(x, test);
    const Eigen::VectorXd y_te = select_rows(y, test);

    const Standardization st = fit_standardization(x_tr, y_tr);
    const Eigen::MatrixXd coefs =
        run_path(st.apply(x_tr), y_tr.array() - st.y_mean, path.lambdas, options.lasso);
    const Eigen::MatrixXd xs_te = st.apply(x_te);
    for (std::size_t l = 0; l < n_lambda; ++l) {
      const auto ll = static_cast<Eigen::Index>(l);
      const Eigen::VectorXd pred = (xs_te * coefs.col(ll)).array() + st.y_mean;
      fold_err(f, ll) = (pred - y_te).squaredNorm() / static_cast<double>(y_te.size());
    }
  }

  path.cv_mean.resize(n_lambda);
  path.cv_se.resize(n_lambda);
  const double k = static_cast<double>(options.folds);
  for (std::size_t l = 0; l < n_lambda; ++l) {
    const auto col = fold_err.col(static_cast<Eigen::Index>(l));
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / (k - 1.0);
    path.cv_mean[l] = mean;
    path.cv_se[l] = std::sqrt(var / k);
  }
  return path;
}

double SelectedModel::predict(const Eigen::RowVectorXd& x_row) const {
  double v = intercept;
  for (std::size_t i = 0; i < support_columns.size(); ++i) {
    v += coefficients(static_cast<Eigen::Index>(i)) * x_row(support_columns[i]);
  }
  return v;
}

SelectedModel select_lambda(const LassoPath& path, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& y, const FeatureLibrary& library) {
  if (path.lambdas.empty()) throw std::invalid_argument("select_lambda: empty path");
  const std::size_t n_lambda = path.lambdas.size();

  const auto best = static_cast<std::size_t>(
      std::min_element(path.cv_mean.begin(), path.cv_mean.end()) - path.cv_mean.begin());
  const double threshold = path.cv_mean[best] + path.cv_se[best];

  auto support_size = [&](std::size_t l) {
    return (path.coefs.col(static_cast<Eigen::Index>(l)).array() != 0.0).count();
  };

  std::size_t chosen = n_lambda;
  for (std::size_t l = 0; l < n_lambda; ++l) {
    if (path.cv_mean[l] > threshold || support_size(l) == 0) continue;
    if (chosen == n_lambda || support_size(l) < support_size(chosen)) chosen = l;
  }
  if (chosen == n_lambda) {
    for (std::size_t l = 0; l < n_lambda && chosen == n_lambda; ++l) {
      if (support_size(l) > 0) chosen = l;
    }
  }
  if (chosen == n_lambda) throw DegenerateFitError("select_lambda: every path point is empty");

  SelectedModel model;
  model.lambda_index = chosen;
  model.lambda_selected = path.lambdas[chosen];
  model.cv_error = path.cv_mean[chosen];
  for (auto j : path.standardization.dropped) {
    const auto& f = library.features[static_cast<std::size_t>(j)];
    if (!f.constant) model.warnings.push_back("dropped zero-variance feature " + f.name);
  }

  const auto w = path.coefs.col(static_cast<Eigen::Index>(chosen));
  model.has_intercept = library.has_constant();
  if (model.has_intercept) {
    for (const auto& f : library.features) {
      if (f.constant) model.support.push_back(f.name);
    }
  }
  for (std::size_t i = 0; i < path.standardization.kept.size(); ++i) {
    if (w(static_cast<Eigen::Index>(i)) == 0.0) continue;
    const Eigen::Index col = path.standardization.kept[i];
    model.support_columns.push_back(col);
    model.support.push_back(library.features[static_cast<std::size_t>(col)].name);
  }

  // Debiasing refit on the selected support.
  const auto n_sup = static_cast<Eigen::Index>(model.support_columns.size());
  const Eigen::Index extra = model.has_intercept ? 1 : 0;
  Eigen::MatrixXd a(x.rows(), n_sup + extra);
  for (Eigen::Index i = 0; i < n_sup; ++i)
    a.col(i) = x.col(model.support_columns[static_cast<std::size_t>(i)]);
  if (model.has_intercept) a.col(n_sup).setOnes();
  const LeastSquaresSolution sol = solve_least_squares(a, y);
  if (!sol.x.allFinite()) throw NonFiniteError("select_lambda: refit produced non-finite values");
  model.coefficients = sol.x.head(n_sup);
  model.intercept = model.has_intercept ? sol.x(n_sup) : 0.0;
  model.fit_rmse = sol.residual_rms;
  return model;
}

Discovery discover(const FeatureLibrary& library, std::span<const RegressionRecord> records,
                   const CvOptions& options) {
  const Design d = assemble(library, records);
  Discovery out;
  out.path = cv_lasso(d.x, d.y, options);
  out.model = select_lambda(out.path, d.x, d.y, library);
  return out;
}

}  // namespace propas::sparse
