#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hawkesbg {

struct SimplexOptions {
    double initial_step = 1.0;        // simplex edge length at (re)start
    double size_tolerance = 1e-5;     // characteristic simplex size at collapse
    std::size_t max_iterations = 4000;
    std::size_t max_restarts = 4;
    double restart_improvement = 1e-6;  // a restart must gain at least this much
    // plateau: the best value gained less than this (relative) over stall_window iterations
    double value_tolerance = 1e-10;
    std::size_t stall_window = 200;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
    bool converged = false;
    // Best objective value after every iteration (non-increasing).
    std::vector<double> history;
};

// Nelder-Mead minimization (GSL nmsimplex2) with restart-on-collapse: after
// the simplex shrinks below size_tolerance it is rebuilt around the best
// point, until a restart fails to improve. Non-finite objective values are
// treated as a very large penalty.
SimplexResult minimize_simplex(const std::function<double(std::span<const double>)>& objective,
                               std::vector<double> start, const SimplexOptions& options = {});

}  // namespace hawkesbg
