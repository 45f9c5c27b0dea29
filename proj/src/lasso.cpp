#include "forestmap/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "forestmap/rng.hpp"
#include "forestmap/standardize.hpp"

namespace forestmap {

namespace {

constexpr double kConvergenceTol = 1e-8;
constexpr int kMaxSweeps = 10000;

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

void check_finite(const std::vector<std::vector<double>>& columns, const std::vector<double>& y) {
    for (const auto& col : columns) {
        if (col.size() != y.size()) throw std::invalid_argument("lasso: column length differs from response");
        for (double v : col) {
            if (!std::isfinite(v)) throw std::invalid_argument("lasso: non-finite design value");
        }
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw std::invalid_argument("lasso: non-finite response value");
    }
}

} // namespace

std::vector<std::vector<double>> to_columns(const DesignMatrix& m) {
    std::vector<std::vector<double>> cols(m.cols(), std::vector<double>(m.rows));
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) cols[c][r] = m(r, c);
    }
    return cols;
}

LassoFit lasso_coordinate_descent(const std::vector<std::vector<double>>& columns,
                                  const std::vector<double>& y, double lambda, bool fit_intercept,
                                  const std::vector<double>* warm_start) {
    if (lambda < 0.0) throw std::invalid_argument("lasso: lambda must be >= 0");
    check_finite(columns, y);
    const std::size_t n = y.size();
    const std::size_t p = columns.size();
    if (n == 0) throw std::invalid_argument("lasso: empty response");

    LassoFit fit;
    fit.beta.assign(p, 0.0);
    if (warm_start) {
        if (warm_start->size() != p) throw std::invalid_argument("lasso: warm start length mismatch");
        fit.beta = *warm_start;
    }

    // (1/n) X_j' X_j per column; constant columns stay at zero coefficients.
    std::vector<double> col_sq(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (double v : columns[j]) s += v * v;
        col_sq[j] = s / static_cast<double>(n);
    }

    std::vector<double> residual = y;
    for (std::size_t j = 0; j < p; ++j) {
        if (fit.beta[j] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) residual[i] -= columns[j][i] * fit.beta[j];
    }
    if (fit_intercept) {
        fit.intercept = mean_of(residual);
        for (double& r : residual) r -= fit.intercept;
    }

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_delta = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (col_sq[j] <= 0.0) continue;
            const auto& col = columns[j];
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += col[i] * residual[i];
            const double z = dot / static_cast<double>(n) + col_sq[j] * fit.beta[j];
            const double updated = soft_threshold(z, lambda) / col_sq[j];
            const double delta = updated - fit.beta[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) residual[i] -= col[i] * delta;
                fit.beta[j] = updated;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        if (fit_intercept) {
            const double shift = mean_of(residual);
            if (shift != 0.0) {
                fit.intercept += shift;
                for (double& r : residual) r -= shift;
                max_delta = std::max(max_delta, std::abs(shift));
            }
        }
        fit.sweeps = sweep + 1;
        if (max_delta < kConvergenceTol) return fit;
    }
    throw std::runtime_error("lasso: no convergence after " + std::to_string(kMaxSweeps) + " sweeps");
}

double lasso_kkt_violation(const std::vector<std::vector<double>>& columns,
                           const std::vector<double>& y, double lambda,
                           const std::vector<double>& beta, double intercept) {
    const std::size_t n = y.size();
    std::vector<double> residual = y;
    for (double& r : residual) r -= intercept;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (beta[j] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) residual[i] -= columns[j][i] * beta[j];
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += columns[j][i] * residual[i];
        const double g = dot / static_cast<double>(n);
        if (beta[j] == 0.0) {
            worst = std::max(worst, std::abs(g) - lambda);
        } else {
            worst = std::max(worst, std::abs(g - lambda * (beta[j] > 0.0 ? 1.0 : -1.0)));
        }
    }
    return worst;
}

double lasso_lambda_max(const std::vector<std::vector<double>>& columns, const std::vector<double>& y) {
    const std::size_t n = y.size();
    double lmax = 0.0;
    for (const auto& col : columns) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += col[i] * y[i];
        lmax = std::max(lmax, std::abs(dot) / static_cast<double>(n));
    }
    return lmax;
}

std::vector<double> lasso_lambda_grid(double lambda_max, std::size_t count, double min_ratio) {
    if (count < 2) throw std::invalid_argument("lambda grid needs at least 2 values");
    if (!(lambda_max > 0.0)) throw std::invalid_argument("lambda_max must be > 0");
    std::vector<double> grid(count);
    const double step = std::log(min_ratio) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = lambda_max * std::exp(step * static_cast<double>(i));
    grid.front() = lambda_max;
    return grid;
}

std::vector<LassoFit> lasso_path(const std::vector<std::vector<double>>& columns,
                                 const std::vector<double>& y,
                                 const std::vector<double>& lambdas, bool fit_intercept) {
    std::vector<LassoFit> fits;
    fits.reserve(lambdas.size());
    const std::vector<double>* warm = nullptr;
    for (double lambda : lambdas) {
        fits.push_back(lasso_coordinate_descent(columns, y, lambda, fit_intercept, warm));
        warm = &fits.back().beta;
    }
    return fits;
}

LassoPath cv_lasso(const PlotTable& table, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("cv_lasso: need k >= 2 folds");
    const std::size_t n = table.size();
    if (n < 2 * static_cast<std::size_t>(k)) {
        throw std::invalid_argument("cv_lasso: need at least 2k plots, got " + std::to_string(n));
    }

    // Standardized continuous predictors plus centered type indicators.
    const Standardizer standardizer = Standardizer::fit(table, table.schema());
    DesignMatrix design = one_hot_encode(table);
    const std::size_t p_cont = table.schema().size();
    auto columns = to_columns(design);
    for (std::size_t j = 0; j < p_cont; ++j) {
        const double m = standardizer.means()[j];
        const double s = standardizer.sds()[j];
        for (double& v : columns[j]) v = (v - m) / s;
    }
    for (std::size_t j = p_cont; j < columns.size(); ++j) {
        const double m = mean_of(columns[j]);
        for (double& v : columns[j]) v -= m;
    }
    std::vector<double> y = table.responses();
    const double y_mean = mean_of(y);
    for (double& v : y) v -= y_mean;

    LassoPath path;
    path.columns = design.columns;
    path.lambdas = lasso_lambda_grid(lasso_lambda_max(columns, y));

    // Seeded shuffle of the id-sorted rows, then round-robin fold labels.
    std::vector<std::size_t> order = table.order_by_id();
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<int> fold_of(n);
    for (std::size_t pos = 0; pos < n; ++pos) fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));

    const std::size_t L = path.lambdas.size();
    std::vector<std::vector<double>> fold_mse(static_cast<std::size_t>(k), std::vector<double>(L, 0.0));
    for (int fold = 0; fold < k; ++fold) {
        std::vector<std::vector<double>> train_cols(columns.size());
        std::vector<double> train_y, test_y;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] == fold) {
                test_rows.push_back(i);
                test_y.push_back(y[i]);
            } else {
                train_y.push_back(y[i]);
            }
        }
        for (std::size_t j = 0; j < columns.size(); ++j) {
            train_cols[j].reserve(train_y.size());
            for (std::size_t i = 0; i < n; ++i) {
                if (fold_of[i] != fold) train_cols[j].push_back(columns[j][i]);
            }
        }
        const auto fits = lasso_path(train_cols, train_y, path.lambdas, /*fit_intercept=*/true);
        for (std::size_t li = 0; li < L; ++li) {
            double sse = 0.0;
            for (std::size_t t = 0; t < test_rows.size(); ++t) {
                double pred = fits[li].intercept;
                for (std::size_t j = 0; j < columns.size(); ++j) {
                    if (fits[li].beta[j] != 0.0) pred += columns[j][test_rows[t]] * fits[li].beta[j];
                }
                const double d = test_y[t] - pred;
                sse += d * d;
            }
            fold_mse[static_cast<std::size_t>(fold)][li] = sse / static_cast<double>(test_rows.size());
        }
    }

    path.cv_mean.assign(L, 0.0);
    path.cv_se.assign(L, 0.0);
    for (std::size_t li = 0; li < L; ++li) {
        std::vector<double> per_fold(static_cast<std::size_t>(k));
        for (int fold = 0; fold < k; ++fold) per_fold[static_cast<std::size_t>(fold)] = fold_mse[static_cast<std::size_t>(fold)][li];
        path.cv_mean[li] = mean_of(per_fold);
        path.cv_se[li] = sd_of(per_fold) / std::sqrt(static_cast<double>(k));
    }

    // lambda_min: lowest CV error (largest lambda on exact ties);
    // lambda_1se: largest lambda within one SE of that minimum.
    path.index_min = 0;
    for (std::size_t li = 1; li < L; ++li) {
        if (path.cv_mean[li] < path.cv_mean[path.index_min]) path.index_min = li;
    }
    const double threshold = path.cv_mean[path.index_min] + path.cv_se[path.index_min];
    path.index_1se = path.index_min;
    for (std::size_t li = 0; li <= path.index_min; ++li) {
        if (path.cv_mean[li] <= threshold) {
            path.index_1se = li;
            break;
        }
    }
    path.lambda_min = path.lambdas[path.index_min];
    path.lambda_1se = path.lambdas[path.index_1se];

    // Full-data path reported to the caller.
    const auto fits = lasso_path(columns, y, path.lambdas, /*fit_intercept=*/false);
    path.coefs.reserve(L);
    path.intercepts.reserve(L);
    for (const auto& fit : fits) {
        path.coefs.push_back(fit.beta);
        path.intercepts.push_back(fit.intercept + y_mean);
    }
    return path;
}

} // namespace forestmap
