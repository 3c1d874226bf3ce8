#pragma once

#include <cstdint>
#include <variant>

#include "dstruct/dstructure.hpp"

namespace dstruct {

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 200000;
  // Accepted for interface stability; the method itself is deterministic.
  std::uint64_t seed = 0;
};

struct MinimizationResult {
  std::variant<ScalarField, CellPolyField> g_star;
  double energy;
  int iterations;
  double primal_residual;  // worst constraint violation of the returned g
  double dual_gap;         // relative objective stall at the stopping test
  bool converged;

  const ScalarField& g_finite() const { return std::get<ScalarField>(g_star); }
  const CellPolyField& g_interval() const { return std::get<CellPolyField>(g_star); }
};

// Minimal pseudo-gradient: argmin of the weighted p-energy over the convex
// body of upper gradients.  Linear-constraint bodies are solved by projected
// dual ascent with diminishing steps and an exact per-coordinate primal
// minimization; pointwise-floor bodies are returned exactly.  p in (1, inf).
MinimizationResult minimal_pseudo_gradient(const DStructureDescriptor& desc,
                                           const FiniteMetricSpace& X, const ScalarField& u,
                                           double p, const SolveOptions& opts = {});
MinimizationResult minimal_pseudo_gradient(const DStructureDescriptor& desc,
                                           const PiecewisePolyField& u, double p,
                                           const SolveOptions& opts = {});

// Exact reference minimizer for p = 2 by enumeration of KKT active sets.
// Throws std::invalid_argument when p != 2 or more than 12 constraints.
MinimizationResult kkt_oracle(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                              const ScalarField& u, double p = 2.0);

// Restricted p-energy inf { sum_B w g^p : g in D[u] }.  Constraints touching
// the complement of B never bind (the body is closed upward), so only rows
// supported inside B survive the restriction.
double dirichlet_energy(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                        const ScalarField& u, double p, const CellSet& B,
                        const SolveOptions& opts = {});
double dirichlet_energy(const DStructureDescriptor& desc, const PiecewisePolyField& u,
                        double p, const CellSet& B_cells, const SolveOptions& opts = {});

// (||u||_p^p + E_p(u))^(1/p).
double sobolev_norm(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                    const ScalarField& u, double p, const SolveOptions& opts = {});
double sobolev_norm(const DStructureDescriptor& desc, const PiecewisePolyField& u, double p,
                    const SolveOptions& opts = {});

}  // namespace dstruct
