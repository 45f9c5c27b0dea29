#pragma once

#include <cstdint>
#include <vector>

#include "forestmap/design.hpp"
#include "forestmap/plot.hpp"

namespace forestmap {

// Lasso objective: (1/2n)||y - mu - X b||^2 + lambda ||b||_1, solved by cyclic
// coordinate descent with soft thresholding. Columns are used as given; the
// caller standardizes. Convergence: max coefficient change < 1e-8 per sweep.

struct LassoFit {
    std::vector<double> beta;
    double intercept = 0.0; // 0 when fit without an intercept
    int sweeps = 0;
};

// Column-major view of a design for the solver.
std::vector<std::vector<double>> to_columns(const DesignMatrix& m);

LassoFit lasso_coordinate_descent(const std::vector<std::vector<double>>& columns,
                                  const std::vector<double>& y, double lambda,
                                  bool fit_intercept = false,
                                  const std::vector<double>* warm_start = nullptr);

// Max violation of the lasso stationarity conditions:
//   |g_j| <= lambda            for b_j = 0
//   g_j = lambda * sign(b_j)   for b_j != 0,   g_j = (1/n) X_j' r
double lasso_kkt_violation(const std::vector<std::vector<double>>& columns,
                           const std::vector<double>& y, double lambda,
                           const std::vector<double>& beta, double intercept = 0.0);

// Smallest lambda with an all-zero solution.
double lasso_lambda_max(const std::vector<std::vector<double>>& columns, const std::vector<double>& y);

// 100 geometrically spaced values from lambda_max down to lambda_max * 1e-3.
std::vector<double> lasso_lambda_grid(double lambda_max, std::size_t count = 100,
                                      double min_ratio = 1e-3);

struct LassoPath {
    std::vector<std::string> columns;        // design column names
    std::vector<double> lambdas;             // strictly decreasing
    std::vector<std::vector<double>> coefs;  // one vector per lambda
    std::vector<double> intercepts;
    std::vector<double> cv_mean;             // mean of per-fold MSEs
    std::vector<double> cv_se;               // sd of fold MSEs / sqrt(k)
    double lambda_min = 0.0;                 // lowest CV error
    double lambda_1se = 0.0;                 // largest lambda within one SE of the minimum
    std::size_t index_min = 0;
    std::size_t index_1se = 0;
};

// Warm-started path fit over a decreasing lambda sequence (no CV).
std::vector<LassoFit> lasso_path(const std::vector<std::vector<double>>& columns,
                                 const std::vector<double>& y,
                                 const std::vector<double>& lambdas, bool fit_intercept);

// Cross-validated path on a plot table. The design holds the standardized
// continuous predictors followed by mean-centered forest-type indicators; the
// response is centered. Folds come from a seeded shuffle of the id-sorted
// rows, assigned round-robin. Requires k >= 2 and n >= 2k.
LassoPath cv_lasso(const PlotTable& table, int k, std::uint64_t seed);

} // namespace forestmap
