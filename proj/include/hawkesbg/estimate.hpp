#pragma once

#include "hawkesbg/banded.hpp"
#include "hawkesbg/basis.hpp"
#include "hawkesbg/core.hpp"
#include "hawkesbg/optimizer.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hawkesbg {

inline constexpr double kDefaultBaselineWeight = 1e4;

// Hyper-parameters of the Bayesian spline model. W is held fixed.
struct HyperParams {
    ExponentialKernel kernel;
    double V = 1.0;
    double W = kDefaultBaselineWeight;
    double mu_c = 1.0;

    void validate() const;
};

// alpha_j = 0.5 / M, beta_j log-spaced over [0.1, 10] per second (1.0 when M = 1).
ExponentialKernel default_kernel(std::size_t order);
// default_kernel plus mu_c = n / (T - S) and V = 1.
HyperParams default_hyperparams(const EventSequence& seq, std::size_t order);

// Basis-dependent part of the smoothness prior, shared across (V, W, mu_c):
// the Gram matrix G^T G of natural-time derivatives and its log
// pseudo-determinant. G^T G annihilates the constant vector, so the
// pseudo-determinant equals m times the determinant of any principal
// (m-1)-minor.
class PriorStructure {
public:
    // Throws ConfigError when G^T G has rank below m - 1 (too few events per basis).
    explicit PriorStructure(const NaturalTimeBasis& basis);

    std::size_t size() const noexcept { return gram_.size(); }
    const SymmetricBandMatrix& derivative_gram() const noexcept { return gram_; }
    double log_pseudo_determinant() const noexcept { return log_pdet_; }

private:
    SymmetricBandMatrix gram_;
    double log_pdet_ = 0.0;
};

// Gaussian prior on the spline coefficients,
//   log p(a) = -V/2 |G a|^2 - W/2 (mean(a) - log mu_c)^2 - log C,
// i.e. precision Q = V G^T G + (W / m^2) 1 1^T and mean log(mu_c) 1.
class SmoothnessPrior {
public:
    SmoothnessPrior(std::shared_ptr<const PriorStructure> structure, double V, double W, double mu_c);
    SmoothnessPrior(const NaturalTimeBasis& basis, double V, double W, double mu_c);

    std::size_t size() const noexcept { return structure_->size(); }
    double V() const noexcept { return V_; }
    double W() const noexcept { return W_; }
    double mu_c() const noexcept { return mu_c_; }

    // V G^T G, the banded part of Q.
    SymmetricBandMatrix band_precision() const;
    // Weight c of the rank-one part c 1 1^T of Q.
    double ones_weight() const noexcept;
    Eigen::MatrixXd precision() const;
    const std::vector<double>& mean() const noexcept { return mean_; }
    // (m/2) log 2 pi - (1/2) log det Q
    double log_normalizer() const noexcept { return log_normalizer_; }

    double log_density(std::span<const double> coeffs) const;
    std::vector<double> gradient(std::span<const double> coeffs) const;

private:
    std::shared_ptr<const PriorStructure> structure_;
    double V_;
    double W_;
    double mu_c_;
    std::vector<double> mean_;
    double log_normalizer_;
};

double log_prior(std::span<const double> coeffs, const SmoothnessPrior& prior);

struct MapOptions {
    double gradient_tolerance = 1e-6;  // per coefficient; total tolerance is this times m
    std::size_t max_iterations = 100;
};

struct MapResult {
    std::vector<double> coeffs;
    double log_likelihood = 0.0;
    double log_prior = 0.0;
    double gradient_norm = 0.0;
    std::size_t iterations = 0;
    std::size_t fallback_steps = 0;  // steps taken with the PSD surrogate metric
};

// Posterior mode of the coefficients by damped Newton on the banded Hessian.
// Throws ConvergenceError (carrying the best iterate) at the iteration cap.
MapResult map_estimate(const EventSequence& seq, const HyperParams& hyper,
                       const NaturalTimeBasis& basis,
                       std::optional<std::span<const double>> warm_start = std::nullopt,
                       const MapOptions& options = {});
MapResult map_estimate(const EventSequence& seq, const HyperParams& hyper,
                       const NaturalTimeBasis& basis, const SmoothnessPrior& prior,
                       std::optional<std::span<const double>> warm_start,
                       const MapOptions& options = {});

struct LaplaceResult {
    MapResult map;
    double log_marginal_likelihood = 0.0;
    double log_det_hessian = 0.0;
};

// Laplace approximation of the evidence around the MAP estimate. Throws
// ConvergenceError when the negative log-posterior Hessian is not positive
// definite there.
LaplaceResult log_marginal_likelihood(const EventSequence& seq, const HyperParams& hyper,
                                      const NaturalTimeBasis& basis,
                                      std::optional<std::span<const double>> warm_start = std::nullopt,
                                      const MapOptions& options = {});
LaplaceResult log_marginal_likelihood(const EventSequence& seq, const HyperParams& hyper,
                                      const NaturalTimeBasis& basis, const SmoothnessPrior& prior,
                                      std::optional<std::span<const double>> warm_start,
                                      const MapOptions& options = {});

struct HyperOptions {
    std::optional<double> fixed_V;
    SimplexOptions simplex{};
    MapOptions map{};
};

struct HyperFit {
    HyperParams hyper;
    LaplaceResult laplace;
    SimplexResult search;
    // log ML of the best point after every outer iteration.
    std::vector<double> accepted_log_ml;
    bool converged = false;
};

// Maximizes the Laplace evidence over (log alpha, log beta, log V, log mu_c)
// with the simplex search; W stays fixed. The inner MAP is warm-started from
// the coefficients of the best point so far.
HyperFit optimize_hyperparams(const EventSequence& seq, const NaturalTimeBasis& basis,
                              const HyperParams& init, const HyperOptions& options = {});

enum class ModelKind { Constant, PiecewiseLinear, Bcb };

struct ModelSpec {
    ModelKind kind = ModelKind::Constant;
    std::string tag = "const";
    std::vector<double> knot_times;  // piecewise-linear only
    std::size_t k = 50;              // BCB only: events per basis function

    static ModelSpec constant();
    static ModelSpec piecewise_linear(std::vector<double> knot_times, std::string tag = "pl");
    static ModelSpec bcb(std::size_t k = 50, std::string tag = "bcb");
};

// Knots at start + l * interval, dropping an interior knot when less than
// half an interval remains before the end; the end is always the last knot.
std::vector<double> interval_knots(const ObservationWindow& window, double interval);

// Resolves "const", "pl2h", "pl30", "bcb" (and "pl:<seconds>") for a window.
ModelSpec model_from_tag(const std::string& tag, const ObservationWindow& window, std::size_t k = 50);

struct FitDiagnostics {
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
    std::string message;
};

struct FitResult {
    ModelSpec model;
    ObservationWindow window{0.0, 1.0};
    std::size_t n_events = 0;
    ExponentialKernel kernel;
    BackgroundModel background = ConstantBackground(1.0);
    std::optional<HyperParams> hyper;  // BCB only
    double log_likelihood = 0.0;
    std::optional<double> log_marginal_likelihood;  // BCB only
    std::size_t num_parameters = 0;  // parameters (MLE) or free hyper-parameters (BCB)
    double score = 0.0;
    double branching_ratio = 0.0;
    // (segment start, mu) pairs, closed by (T, last mu).
    std::vector<std::pair<double, double>> background_curve;
    FitDiagnostics diagnostics;
};

struct FitOptions {
    SimplexOptions simplex{};
    MapOptions map{};
    std::optional<double> fixed_V;
    double W = kDefaultBaselineWeight;
    std::optional<HyperParams> bcb_init;
};

// Maximum likelihood for constant and piecewise-linear backgrounds.
FitResult fit_mle(const EventSequence& seq, const ModelSpec& model, std::size_t order,
                  const FitOptions& options = {});
// Empirical-Bayes fit of the spline background model.
FitResult fit_bcb(const EventSequence& seq, std::size_t order, std::size_t k = 50,
                  const FitOptions& options = {});
FitResult fit_model(const EventSequence& seq, const ModelSpec& model, std::size_t order,
                    const FitOptions& options = {});

// max log L - #parameters (MLE models) or max log ML - #hyper-parameters (BCB).
double score(const FitResult& fit);

std::vector<std::pair<double, double>> background_curve(const BackgroundModel& bg,
                                                        const ObservationWindow& window);

}  // namespace hawkesbg
