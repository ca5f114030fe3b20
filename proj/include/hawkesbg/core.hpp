#pragma once

#include "hawkesbg/basis.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hawkesbg {

// Closed observation interval [start, end] in seconds.
class ObservationWindow {
public:
    ObservationWindow(double start, double end);

    double start() const noexcept { return start_; }
    double end() const noexcept { return end_; }
    double length() const noexcept { return end_ - start_; }
    bool contains(double t) const noexcept { return t >= start_ && t <= end_; }

    friend bool operator==(const ObservationWindow&, const ObservationWindow&) = default;

private:
    double start_;
    double end_;
};

// Strictly increasing event times inside a window. Events exactly at the
// window edges are allowed.
class EventSequence {
public:
    EventSequence(std::vector<double> times, ObservationWindow window);

    std::span<const double> times() const noexcept { return times_; }
    std::size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }
    const ObservationWindow& window() const noexcept { return window_; }
    double operator[](std::size_t i) const { return times_[i]; }

private:
    std::vector<double> times_;
    ObservationWindow window_;
};

// g(s) = sum_j alpha_j beta_j exp(-beta_j s). An empty kernel (M = 0) is a
// pure Poisson process. sum(alpha) >= 1 is accepted here; simulation rejects it.
class ExponentialKernel {
public:
    ExponentialKernel() = default;
    ExponentialKernel(std::vector<double> alphas, std::vector<double> betas);

    std::size_t order() const noexcept { return alphas_.size(); }
    std::span<const double> alphas() const noexcept { return alphas_; }
    std::span<const double> betas() const noexcept { return betas_; }

private:
    std::vector<double> alphas_;
    std::vector<double> betas_;
};

double kernel_eval(const ExponentialKernel& kernel, double lag);
double kernel_integral(const ExponentialKernel& kernel, double lag);
double branching_ratio(const ExponentialKernel& kernel);

class ConstantBackground {
public:
    explicit ConstantBackground(double mu_c);
    double rate() const noexcept { return mu_c_; }

private:
    double mu_c_;
};

// Linear interpolation between knots; the first and last knot are the window edges.
class PiecewiseLinearBackground {
public:
    PiecewiseLinearBackground(std::vector<double> knot_times, std::vector<double> knot_values);

    std::span<const double> knot_times() const noexcept { return knot_times_; }
    std::span<const double> knot_values() const noexcept { return knot_values_; }
    ObservationWindow window() const { return {knot_times_.front(), knot_times_.back()}; }

    double eval(double t) const;
    double integral(double a, double b) const;
    double supremum(double a, double b) const;

private:
    std::vector<double> knot_times_;
    std::vector<double> knot_values_;
};

// log mu(t) = sum_j a_j f^j(t), piecewise constant between consecutive events
// of the sequence the basis was built for. Segment i covers [t_i, t_{i+1}),
// with t_0 = S and t_{n+1} = T; t = T falls in segment n.
class SplineBackground {
public:
    SplineBackground(std::vector<double> coeffs, std::shared_ptr<const NaturalTimeBasis> basis,
                     EventSequence events);

    std::span<const double> coeffs() const noexcept { return coeffs_; }
    const NaturalTimeBasis& basis() const noexcept { return *basis_; }
    const std::shared_ptr<const NaturalTimeBasis>& basis_ptr() const noexcept { return basis_; }
    const EventSequence& events() const noexcept { return events_; }
    const ObservationWindow& window() const noexcept { return events_.window(); }

    // mu_i for i = 0..n.
    std::span<const double> segment_rates() const noexcept { return rates_; }
    double segment_start(std::size_t i) const;
    double segment_end(std::size_t i) const;
    std::size_t segment_index(double t) const;

    double eval(double t) const;
    double integral(double a, double b) const;
    double supremum(double a, double b) const;

private:
    std::vector<double> coeffs_;
    std::shared_ptr<const NaturalTimeBasis> basis_;
    EventSequence events_;
    std::vector<double> rates_;
    std::vector<double> cumulative_;  // integral from S to t_i, i = 0..n+1
};

using BackgroundModel = std::variant<ConstantBackground, PiecewiseLinearBackground, SplineBackground>;

double background_eval(const BackgroundModel& bg, double t);
double background_integral(const BackgroundModel& bg, double a, double b);
double background_integral(const BackgroundModel& bg, const EventSequence& seq);
double background_supremum(const BackgroundModel& bg, double a, double b);

// Closed-form rate function used for synthetic scenarios. breakpoints lists
// discontinuities (rate(t) at a breakpoint is the right limit).
struct AnalyticRate {
    std::string name;
    ObservationWindow window;
    std::function<double(double)> rate;
    std::function<double(double, double)> integral;
    std::vector<double> breakpoints;
};

double background_eval(const AnalyticRate& bg, double t);
double background_integral(const AnalyticRate& bg, double a, double b);
double background_integral(const AnalyticRate& bg, const EventSequence& seq);

// Lowercase tag of the background family: "const", "pl" or "spline".
std::string background_family(const BackgroundModel& bg);

}  // namespace hawkesbg
