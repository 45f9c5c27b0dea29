#pragma once

#include <span>
#include <vector>

namespace forestmap {

// Convex-hull membership as a linear feasibility problem: x is in
// conv(points) iff weights w >= 0 exist with sum(w) = 1 and P'w = x. Solved
// with a dense phase-1 simplex minimizing artificial variables; feasible iff
// the optimum is <= tol. Points within tol of the boundary count as inside.
//
// The tableau has d+1 rows, so each query costs O(iterations * n * d); meant
// for the low-dimension hulls used here (d <= ~8).
bool in_convex_hull_lp(const std::vector<std::vector<double>>& points, std::span<const double> x,
                       double tol = 1e-9);

} // namespace forestmap
