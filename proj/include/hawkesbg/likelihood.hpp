#pragma once

#include "hawkesbg/banded.hpp"
#include "hawkesbg/basis.hpp"
#include "hawkesbg/core.hpp"

#include <span>
#include <vector>

namespace hawkesbg {

// Per-event excitation state from the O(nM) recursion
//   R_j(1) = 0,  R_j(i) = exp(-beta_j (t_i - t_{i-1})) (R_j(i-1) + 1).
struct LikelihoodWorkspace {
    std::size_t order = 0;              // M
    std::vector<double> decay_states;   // R_j(i), row-major n x M
    std::vector<double> excitation;     // sum_j alpha_j beta_j R_j(i)
    std::vector<double> gaps;           // t_{i+1} - t_i for i = 0..n (t_0 = S, t_{n+1} = T)
    double kernel_compensator = 0.0;    // sum_i sum_j alpha_j (1 - exp(-beta_j (T - t_i)))
};

LikelihoodWorkspace make_workspace(const EventSequence& seq, const ExponentialKernel& kernel);

// lambda(t) = mu(t) + sum_{t_i < t} g(t - t_i)
double intensity_at(double t, const EventSequence& seq, const ExponentialKernel& kernel,
                    const BackgroundModel& bg);
double intensity_at(double t, const EventSequence& seq, const ExponentialKernel& kernel,
                    const AnalyticRate& bg);

// Exact log-likelihood via the excitation recursion, O(nM).
double log_likelihood(const EventSequence& seq, const ExponentialKernel& kernel,
                      const BackgroundModel& bg);
double log_likelihood(const EventSequence& seq, const ExponentialKernel& kernel,
                      const AnalyticRate& bg);

// Same quantity by explicit double sum over event pairs, O(n^2 M). Test oracle.
double log_likelihood_direct(const EventSequence& seq, const ExponentialKernel& kernel,
                             const BackgroundModel& bg);

// Integrated intensity over [t_a, t_b].
double compensator(const EventSequence& seq, const ExponentialKernel& kernel,
                   const BackgroundModel& bg, double t_a, double t_b);
double compensator(const EventSequence& seq, const ExponentialKernel& kernel,
                   const AnalyticRate& bg, double t_a, double t_b);

// Integrated intensity over each inter-event interval [t_i, t_{i+1}], i = 1..n-1.
std::vector<double> interval_compensators(const EventSequence& seq, const ExponentialKernel& kernel,
                                          const BackgroundModel& bg);
std::vector<double> interval_compensators(const EventSequence& seq, const ExponentialKernel& kernel,
                                          const AnalyticRate& bg);

// Log-likelihood of the spline-background model as a function of the
// coefficient vector, with the kernel held fixed. The excitation is computed
// once at construction, so each evaluation costs O(n + m).
class SplineLikelihood {
public:
    struct Evaluation {
        double value = 0.0;
        std::vector<double> gradient;
        // -d^2 logL / da da^T (band, half-bandwidth 3).
        SymmetricBandMatrix neg_hessian;
        // The compensator part sum_i mu_i dt_i f_i f_i^T alone; always PSD.
        SymmetricBandMatrix compensator_curvature;
    };

    SplineLikelihood(const EventSequence& seq, const ExponentialKernel& kernel,
                     const NaturalTimeBasis& basis);

    double value(std::span<const double> coeffs) const;
    Evaluation evaluate(std::span<const double> coeffs, bool with_hessian = true) const;

    const NaturalTimeBasis& basis() const noexcept { return *basis_; }
    const LikelihoodWorkspace& workspace() const noexcept { return work_; }

private:
    const NaturalTimeBasis* basis_;
    LikelihoodWorkspace work_;
};

std::vector<double> loglik_grad_coeffs(const EventSequence& seq, const ExponentialKernel& kernel,
                                       const NaturalTimeBasis& basis, std::span<const double> coeffs);

// d^2 logL / da da^T, banded with half-bandwidth 3.
SymmetricBandMatrix loglik_hessian_coeffs(const EventSequence& seq, const ExponentialKernel& kernel,
                                          const NaturalTimeBasis& basis,
                                          std::span<const double> coeffs);

}  // namespace hawkesbg
