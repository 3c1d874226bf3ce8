#pragma once

#include <string>
#include <variant>
#include <vector>

#include "dstruct/space.hpp"

namespace dstruct {

// Default additive slack when testing membership inequalities.
inline constexpr double kMembershipTol = 1e-9;

enum class StructureKind { graph, hajlasz, interval_derivative, trivial };

std::string to_string(StructureKind k);
StructureKind structure_kind_from_string(const std::string& s);

// Names one of the built-in structure families and records whether the
// family satisfies the pointwise locality conditions by design.
struct DStructureDescriptor {
  StructureKind kind;
  bool claims_pointwise_local;

  static DStructureDescriptor graph() { return {StructureKind::graph, false}; }
  static DStructureDescriptor hajlasz() { return {StructureKind::hajlasz, false}; }
  static DStructureDescriptor interval_derivative() {
    return {StructureKind::interval_derivative, true};
  }
  static DStructureDescriptor trivial() { return {StructureKind::trivial, true}; }
};

// One inequality sum_k coeff_k g(idx_k) >= bound with nonnegative
// coefficients; bound >= 0 because it is |u(x) - u(y)| by construction.
struct LinearConstraint {
  std::vector<std::pair<std::size_t, double>> support;
  double bound;
  std::string label;
};

struct LinearConstraintsBody {
  std::size_t n_points;
  std::vector<LinearConstraint> constraints;  // deterministic order
};

// g belongs iff g >= floor pointwise (almost everywhere on cells).
struct PointwiseFloorBody {
  std::variant<ScalarField, CellPolyField> floor;
};

using ConvexGradientBody = std::variant<LinearConstraintsBody, PointwiseFloorBody>;

// Finite model.  graph: |u(x)-u(y)| <= g(x)+g(y) over adjacent pairs.
// hajlasz: |u(x)-u(y)| <= d(x,y)(g(x)+g(y)) over all pairs.  trivial: g >= 0.
ConvexGradientBody describe(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                            const ScalarField& u);

// Interval model.  interval_derivative: g >= |u'| per cell, cells refined so
// |u'| has constant sign.  trivial: g >= 0.
ConvexGradientBody describe(const DStructureDescriptor& desc, const PiecewisePolyField& u);

struct MembershipReport {
  bool member;
  double worst_violation;      // max over inequalities of (required - actual), >= 0
  std::string worst_constraint;
};

MembershipReport membership(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                            const ScalarField& u, const ScalarField& g,
                            double tol = kMembershipTol);
MembershipReport membership(const DStructureDescriptor& desc, const PiecewisePolyField& u,
                            const CellPolyField& g, double tol = kMembershipTol);

// Pointwise minimal element of the body.  Only structures that claim the
// pointwise locality conditions expose it; others throw std::logic_error.
ScalarField floor_of(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                     const ScalarField& u);
CellPolyField floor_of(const DStructureDescriptor& desc, const PiecewisePolyField& u);

// Canonical derivative field |u'| on a sign-refined grid, independent of any
// structure; equals floor_of for the interval_derivative family.
CellPolyField derivative_magnitude(const PiecewisePolyField& u);

}  // namespace dstruct
