#pragma once

#include "hawkesbg/estimate.hpp"

#include <json.hpp>

#include <iosfwd>

namespace hawkesbg {

// FitResult <-> JSON. Field names (stable):
//   format            "hawkesbg-fit/1"
//   model             "const" | "pl2h" | "pl30" | "pl:<s>" | "pl" | "bcb"
//   kernel_order, n_events, window {start, end}
//   parameters        alpha[], beta[], and per model:
//                       const: mu_c
//                       pl:    knot_times[], knot_values[]
//                       bcb:   mu_c, V, W, k, basis_count, coefficients[]
//   log_likelihood, log_marginal_likelihood (bcb), num_parameters, score,
//   branching_ratio
//   background        [[t, mu], ...] per segment, closed at T
//   diagnostics       {converged, iterations, evaluations, restarts, message}
nlohmann::json fit_to_json(const FitResult& fit);

// Rebuilds a fit from JSON. The spline background needs the events it was
// fitted to; throws DomainError when their count or window disagree with the
// stored fit.
FitResult fit_from_json(const nlohmann::json& doc, const EventSequence& events);

// Plot-ready "t,mu" CSV of the background curve.
void write_curve_csv(const FitResult& fit, std::ostream& out);

}  // namespace hawkesbg
