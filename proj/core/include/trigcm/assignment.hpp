#pragma once

#include <cstddef>
#include <vector>

namespace trigcm {

// Dense square cost matrix, row-major: cost[i * n + j].
struct CostMatrix {
    std::size_t n = 0;
    std::vector<double> cost;

    double operator()(std::size_t i, std::size_t j) const { return cost[i * n + j]; }
};

struct Assignment {
    std::vector<std::size_t> row_to_col;
    double cost = 0.0;        // primal cost of row_to_col
    double lower_bound = 0.0;  // dual bound on the optimum (equals cost when exact)
};

// Exact minimum-cost perfect matching (shortest augmenting paths with
// potentials), O(n^3).
Assignment solve_hungarian(const CostMatrix& c);

// Forward auction with epsilon scaling for non-negative costs. Stops once
// the primal cost is certified within a factor (1 + rel_tol) of the
// optimum by the dual bound, or once epsilon reaches a floor relative to
// the largest cost; `lower_bound` always holds a valid certificate.
Assignment solve_auction(const CostMatrix& c, double rel_tol = 0.01);

}  // namespace trigcm
