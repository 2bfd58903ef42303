#include "trigcm/assignment.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "trigcm/error.hpp"

namespace trigcm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check(const CostMatrix& c) {
    if (c.n == 0) throw DomainError("assignment: empty cost matrix");
    if (c.cost.size() != c.n * c.n) throw ShapeError("assignment: cost matrix is not n x n");
}

double primal_cost(const CostMatrix& c, const std::vector<std::size_t>& row_to_col) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.n; ++i) s += c(i, row_to_col[i]);
    return s;
}

}  // namespace

Assignment solve_hungarian(const CostMatrix& c) {
    check(c);
    const std::size_t n = c.n;
    // 1-based potentials u (rows), v (cols); p[j] is the row matched to column j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<double> minv(n + 1);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    Assignment out;
    out.row_to_col.resize(n);
    for (std::size_t j = 1; j <= n; ++j) out.row_to_col[p[j] - 1] = j - 1;
    out.cost = primal_cost(c, out.row_to_col);
    out.lower_bound = out.cost;
    return out;
}

Assignment solve_auction(const CostMatrix& c, double rel_tol) {
    check(c);
    if (!(rel_tol >= 0.0)) throw DomainError("auction: tolerance must be non-negative");
    const std::size_t n = c.n;
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    double max_cost = 0.0;
    for (double x : c.cost) {
        if (x < 0.0) throw DomainError("auction: costs must be non-negative");
        max_cost = std::max(max_cost, x);
    }

    Assignment best;
    best.row_to_col.resize(n);
    for (std::size_t i = 0; i < n; ++i) best.row_to_col[i] = i;
    best.cost = primal_cost(c, best.row_to_col);
    best.lower_bound = 0.0;
    if (max_cost == 0.0) {
        best.lower_bound = best.cost;
        return best;
    }

    // Benefit of row i for column j is -c(i, j); prices persist across phases.
    std::vector<double> price(n, 0.0);
    std::vector<std::size_t> owner(n), row_to_col(n);
    const double eps_floor = max_cost * 1e-12;
    double eps = max_cost / 4.0;

    while (true) {
        std::fill(owner.begin(), owner.end(), kNone);
        std::fill(row_to_col.begin(), row_to_col.end(), kNone);
        std::deque<std::size_t> queue;
        for (std::size_t i = 0; i < n; ++i) queue.push_back(i);
        while (!queue.empty()) {
            const std::size_t i = queue.front();
            queue.pop_front();
            double v1 = -kInf, v2 = -kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const double val = -c(i, j) - price[j];
                if (val > v1) {
                    v2 = v1;
                    v1 = val;
                    j1 = j;
                } else if (val > v2) {
                    v2 = val;
                }
            }
            const double bid = (v2 == -kInf) ? eps : v1 - v2 + eps;
            price[j1] += bid;
            if (owner[j1] != kNone) {
                row_to_col[owner[j1]] = kNone;
                queue.push_back(owner[j1]);
            }
            owner[j1] = i;
            row_to_col[i] = j1;
        }

        // Dual bound: optimum >= -(sum_j p_j + sum_i max_j(-c_ij - p_j)).
        double dual = 0.0;
        for (double p : price) dual += p;
        for (std::size_t i = 0; i < n; ++i) {
            double m = -kInf;
            for (std::size_t j = 0; j < n; ++j) m = std::max(m, -c(i, j) - price[j]);
            dual += m;
        }
        const double lower = std::max(0.0, -dual);
        const double cost = primal_cost(c, row_to_col);
        if (cost < best.cost || (cost == best.cost && lower > best.lower_bound)) {
            best.row_to_col = row_to_col;
            best.cost = cost;
        }
        best.lower_bound = std::max(best.lower_bound, lower);
        if (best.cost - best.lower_bound <= rel_tol * best.lower_bound || eps <= eps_floor) break;
        eps /= 4.0;
    }
    return best;
}

}  // namespace trigcm
