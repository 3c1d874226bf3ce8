#include "dstruct/dstructure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dstruct {

namespace {

using poly::Poly;

std::string pair_label(const FiniteMetricSpace& X, std::size_t i, std::size_t j) {
  const auto name = [&](std::size_t k) {
    return k < X.point_ids.size() && !X.point_ids[k].empty() ? X.point_ids[k]
                                                             : std::to_string(k);
  };
  return "(" + name(i) + ", " + name(j) + ")";
}

LinearConstraintsBody finite_pair_body(const FiniteMetricSpace& X, const ScalarField& u,
                                       bool scale_by_distance, bool adjacent_only) {
  LinearConstraintsBody body;
  body.n_points = X.size();
  auto pairs = adjacent_only ? X.constrained_pairs()
                             : [&] {
                                 std::vector<std::pair<std::size_t, std::size_t>> all;
                                 for (std::size_t i = 0; i < X.size(); ++i)
                                   for (std::size_t j = i + 1; j < X.size(); ++j)
                                     all.emplace_back(i, j);
                                 return all;
                               }();
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [i, j] : pairs) {
    const double gap = std::abs(u.values[i] - u.values[j]);
    const double coeff = scale_by_distance ? X.d(i, j) : 1.0;
    LinearConstraint c;
    c.support = {{i, coeff}, {j, coeff}};
    c.bound = gap;
    c.label = pair_label(X, i, j);
    body.constraints.push_back(std::move(c));
  }
  return body;
}

}  // namespace

std::string to_string(StructureKind k) {
  switch (k) {
    case StructureKind::graph: return "graph";
    case StructureKind::hajlasz: return "hajlasz";
    case StructureKind::interval_derivative: return "interval_derivative";
    case StructureKind::trivial: return "trivial";
  }
  throw std::logic_error("unknown structure kind");
}

StructureKind structure_kind_from_string(const std::string& s) {
  if (s == "graph") return StructureKind::graph;
  if (s == "hajlasz") return StructureKind::hajlasz;
  if (s == "interval_derivative") return StructureKind::interval_derivative;
  if (s == "trivial") return StructureKind::trivial;
  throw std::invalid_argument("unknown structure kind: " + s);
}

ConvexGradientBody describe(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                            const ScalarField& u) {
  if (u.values.size() != X.size())
    throw std::invalid_argument("field size does not match space");
  switch (desc.kind) {
    case StructureKind::graph:
      return finite_pair_body(X, u, /*scale_by_distance=*/false, /*adjacent_only=*/true);
    case StructureKind::hajlasz:
      return finite_pair_body(X, u, /*scale_by_distance=*/true, /*adjacent_only=*/false);
    case StructureKind::trivial:
      return PointwiseFloorBody{ScalarField{std::vector<double>(X.size(), 0.0)}};
    case StructureKind::interval_derivative:
      throw std::invalid_argument("interval_derivative needs an interval field");
  }
  throw std::logic_error("unknown structure kind");
}

CellPolyField derivative_magnitude(const PiecewisePolyField& u) {
  // Sign-refine u' so each cell carries a single signed polynomial.
  std::vector<double> cuts;
  for (std::size_t j = 0; j < u.grid().cell_count(); ++j) {
    const Poly du = poly::derivative(u.cell_poly(j));
    for (double r : poly::real_roots(du, u.grid().cell_left(j), u.grid().cell_right(j)))
      cuts.push_back(r);
  }
  const IntervalGridSpace g = u.grid().refined_with(cuts);
  const PiecewisePolyField ur = u.on_refined(g);
  std::vector<Poly> cells(g.cell_count());
  for (std::size_t j = 0; j < cells.size(); ++j) {
    Poly du = poly::derivative(ur.cell_poly(j));
    const double mid = 0.5 * (g.cell_left(j) + g.cell_right(j));
    if (poly::eval(du, mid) < 0.0) du = poly::scale(du, -1.0);
    cells[j] = poly::trimmed(du);
  }
  return CellPolyField(g, std::move(cells));
}

ConvexGradientBody describe(const DStructureDescriptor& desc, const PiecewisePolyField& u) {
  switch (desc.kind) {
    case StructureKind::interval_derivative:
      return PointwiseFloorBody{derivative_magnitude(u)};
    case StructureKind::trivial:
      return PointwiseFloorBody{CellPolyField::constant(u.grid(), 0.0)};
    case StructureKind::graph:
    case StructureKind::hajlasz:
      throw std::invalid_argument(to_string(desc.kind) + " needs a finite metric space");
  }
  throw std::logic_error("unknown structure kind");
}

MembershipReport membership(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                            const ScalarField& u, const ScalarField& g, double tol) {
  if (g.values.size() != X.size())
    throw std::invalid_argument("candidate size does not match space");
  MembershipReport rep{true, 0.0, ""};
  const auto note_violation = [&](double amount, const std::string& what) {
    if (amount > rep.worst_violation) {
      rep.worst_violation = amount;
      rep.worst_constraint = what;
    }
  };
  for (std::size_t i = 0; i < X.size(); ++i)
    if (g.values[i] < -tol)
      note_violation(-g.values[i], "nonnegativity at index " + std::to_string(i));
  const ConvexGradientBody body = describe(desc, X, u);
  if (const auto* lin = std::get_if<LinearConstraintsBody>(&body)) {
    for (const auto& c : lin->constraints) {
      double lhs = 0.0;
      for (const auto& [idx, coeff] : c.support) lhs += coeff * g.values[idx];
      if (lhs < c.bound - tol) note_violation(c.bound - lhs, "pair " + c.label);
    }
  } else {
    const auto& floor = std::get<ScalarField>(std::get<PointwiseFloorBody>(body).floor);
    for (std::size_t i = 0; i < X.size(); ++i)
      if (g.values[i] < floor.values[i] - tol)
        note_violation(floor.values[i] - g.values[i], "floor at index " + std::to_string(i));
  }
  rep.member = rep.worst_violation <= tol;
  return rep;
}

MembershipReport membership(const DStructureDescriptor& desc, const PiecewisePolyField& u,
                            const CellPolyField& g, double tol) {
  const ConvexGradientBody body = describe(desc, u);
  const auto& floor = std::get<CellPolyField>(std::get<PointwiseFloorBody>(body).floor);
  const IntervalGridSpace grid = common_grid(floor.grid(), g.grid());
  const CellPolyField fr = floor.on_refined(grid), gr = g.on_refined(grid);
  MembershipReport rep{true, 0.0, ""};
  for (std::size_t j = 0; j < grid.cell_count(); ++j) {
    const Poly slack = poly::sub(gr.cell_poly(j), fr.cell_poly(j));
    const double worst = -poly::min_on(slack, grid.cell_left(j), grid.cell_right(j));
    if (worst > rep.worst_violation) {
      rep.worst_violation = worst;
      rep.worst_constraint = "floor on cell [" + std::to_string(grid.cell_left(j)) + ", " +
                             std::to_string(grid.cell_right(j)) + "]";
    }
  }
  rep.member = rep.worst_violation <= tol;
  return rep;
}

ScalarField floor_of(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                     const ScalarField& u) {
  if (!desc.claims_pointwise_local)
    throw std::logic_error("floor_of needs a structure with a pointwise minimal element");
  const ConvexGradientBody body = describe(desc, X, u);
  return std::get<ScalarField>(std::get<PointwiseFloorBody>(body).floor);
}

CellPolyField floor_of(const DStructureDescriptor& desc, const PiecewisePolyField& u) {
  if (!desc.claims_pointwise_local)
    throw std::logic_error("floor_of needs a structure with a pointwise minimal element");
  const ConvexGradientBody body = describe(desc, u);
  return std::get<CellPolyField>(std::get<PointwiseFloorBody>(body).floor);
}

}  // namespace dstruct
