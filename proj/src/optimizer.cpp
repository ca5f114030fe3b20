#include "hawkesbg/optimizer.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <memory>
#include <stdexcept>

namespace hawkesbg {

namespace {

constexpr double kPenalty = 1e100;

struct Context {
    const std::function<double(std::span<const double>)>* objective;
    std::size_t evaluations = 0;
};

double trampoline(const gsl_vector* x, void* params) {
    auto* ctx = static_cast<Context*>(params);
    ++ctx->evaluations;
    std::span<const double> view(x->data, x->size);
    const double value = (*ctx->objective)(view);
    return std::isfinite(value) ? std::min(value, kPenalty) : kPenalty;
}

struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* s) const { gsl_multimin_fminimizer_free(s); }
};

using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;
using MinimizerPtr = std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter>;

}  // namespace

SimplexResult minimize_simplex(const std::function<double(std::span<const double>)>& objective,
                               std::vector<double> start, const SimplexOptions& options) {
    if (start.empty()) {
        throw std::invalid_argument("simplex search needs at least one coordinate");
    }
    gsl_set_error_handler_off();
    const std::size_t dim = start.size();
    Context ctx{&objective};
    gsl_multimin_function fn{&trampoline, dim, &ctx};

    SimplexResult result;
    result.x = std::move(start);
    {
        VectorPtr x(gsl_vector_alloc(dim));
        std::copy(result.x.begin(), result.x.end(), x->data);
        result.value = trampoline(x.get(), &ctx);
    }

    VectorPtr x(gsl_vector_alloc(dim));
    VectorPtr steps(gsl_vector_alloc(dim));
    gsl_vector_set_all(steps.get(), options.initial_step);
    MinimizerPtr solver(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));

    for (std::size_t round = 0; round <= options.max_restarts; ++round) {
        const double round_start_value = result.value;
        std::copy(result.x.begin(), result.x.end(), x->data);
        gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), steps.get());
        bool collapsed = false;
        while (result.iterations < options.max_iterations) {
            ++result.iterations;
            const int status = gsl_multimin_fminimizer_iterate(solver.get());
            if (solver->fval < result.value) {
                result.value = solver->fval;
                result.x.assign(solver->x->data, solver->x->data + dim);
            }
            result.history.push_back(result.value);
            if (status != GSL_SUCCESS) {
                collapsed = true;
                break;
            }
            if (gsl_multimin_fminimizer_size(solver.get()) < options.size_tolerance) {
                collapsed = true;
                break;
            }
            // a coordinate drifting along a flat direction (e.g. log alpha -> -inf) never collapses
            const std::size_t h = result.history.size();
            if (h > options.stall_window &&
                result.history[h - 1 - options.stall_window] - result.value <=
                    options.value_tolerance * (1.0 + std::abs(result.value))) {
                collapsed = true;
                break;
            }
        }
        result.converged = collapsed;
        if (!collapsed) {
            break;  // iteration cap
        }
        result.restarts = round;
        if (round > 0 && round_start_value - result.value < options.restart_improvement) {
            break;
        }
    }
    result.evaluations = ctx.evaluations;
    return result;
}

}  // namespace hawkesbg
