#include "forestmap/hull_lp.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace forestmap {

namespace {

// Dense phase-1 simplex workspace, thread-local so pixel loops can classify
// in parallel without allocation churn.
struct SimplexWorkspace {
    std::vector<double> tableau; // (m+1) x (width+1), row-major
    std::vector<int> basis;
};

constexpr double kPivotEps = 1e-11;

} // namespace

bool in_convex_hull_lp(const std::vector<std::vector<double>>& points, std::span<const double> x,
                       double tol) {
    const std::size_t n = points.size();
    if (n == 0) throw std::invalid_argument("in_convex_hull_lp: no points");
    const std::size_t d = x.size();
    for (const auto& p : points) {
        if (p.size() != d) throw std::invalid_argument("in_convex_hull_lp: dimension mismatch");
    }

    const std::size_t m = d + 1;      // equality rows: coordinates + weight sum
    const std::size_t width = n + m;  // structural + artificial columns
    const std::size_t stride = width + 1;

    thread_local SimplexWorkspace ws;
    ws.tableau.assign((m + 1) * stride, 0.0);
    ws.basis.assign(m, 0);
    auto cell = [&](std::size_t r, std::size_t c) -> double& { return ws.tableau[r * stride + c]; };

    // Row r (< d): sum_i w_i * P_i[r] = x[r]; row d: sum_i w_i = 1.
    // Rows are sign-flipped so the right-hand side is nonnegative.
    for (std::size_t r = 0; r < m; ++r) {
        const double rhs = r < d ? x[r] : 1.0;
        const double sign = rhs < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            cell(r, i) = sign * (r < d ? points[i][r] : 1.0);
        }
        cell(r, n + r) = 1.0; // artificial
        cell(r, width) = sign * rhs;
        ws.basis[r] = static_cast<int>(n + r);
    }

    // Objective row: minimize the artificial sum. Expressed in reduced form by
    // subtracting each constraint row (every artificial starts basic).
    for (std::size_t c = 0; c <= width; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) s += cell(r, c);
        cell(m, c) = -s;
    }
    for (std::size_t r = 0; r < m; ++r) cell(m, n + r) = 0.0;

    const std::size_t dantzig_limit = 32 * (width + m);
    std::size_t iterations = 0;
    for (;;) {
        // Entering column: most negative reduced cost (Dantzig), switching to
        // Bland's rule after an iteration budget to rule out cycling.
        std::size_t enter = width;
        if (iterations < dantzig_limit) {
            double best = -kPivotEps;
            for (std::size_t c = 0; c < width; ++c) {
                if (cell(m, c) < best) {
                    best = cell(m, c);
                    enter = c;
                }
            }
        } else {
            for (std::size_t c = 0; c < width; ++c) {
                if (cell(m, c) < -kPivotEps) {
                    enter = c;
                    break;
                }
            }
        }
        if (enter == width) break; // optimal

        // Leaving row: minimum ratio, ties to the smallest basis index.
        std::size_t leave = m;
        double best_ratio = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double a = cell(r, enter);
            if (a <= kPivotEps) continue;
            const double ratio = cell(r, width) / a;
            if (leave == m || ratio < best_ratio ||
                (ratio == best_ratio && ws.basis[r] < ws.basis[leave])) {
                best_ratio = ratio;
                leave = r;
            }
        }
        if (leave == m) break; // unbounded (cannot happen for phase 1)

        // Pivot.
        const double pivot = cell(leave, enter);
        for (std::size_t c = 0; c <= width; ++c) cell(leave, c) /= pivot;
        for (std::size_t r = 0; r <= m; ++r) {
            if (r == leave) continue;
            const double factor = cell(r, enter);
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c <= width; ++c) cell(r, c) -= factor * cell(leave, c);
        }
        ws.basis[leave] = static_cast<int>(enter);

        if (++iterations > dantzig_limit + 16 * (width + m)) {
            throw std::runtime_error("in_convex_hull_lp: simplex failed to terminate");
        }
    }

    // Residual infeasibility: the artificial variables still basic. Reading
    // them beats the objective-row value, which compounds pivot rounding.
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        if (ws.basis[r] >= static_cast<int>(n)) infeasibility += std::max(0.0, cell(r, width));
    }
    return infeasibility <= tol;
}

} // namespace forestmap
