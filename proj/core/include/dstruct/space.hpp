#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dstruct/poly.hpp"

namespace dstruct {

// Equality tolerance for values and polynomial coefficients throughout.
inline constexpr double kEqTol = 1e-9;

using ValidationReport = std::vector<std::string>;

// Finite metric measure space: points with a metric matrix and strictly
// positive weights.  An optional adjacency list marks the pairs a graph
// structure constrains; when absent every pair is treated as adjacent.
struct FiniteMetricSpace {
  std::vector<std::string> point_ids;
  std::vector<double> dist;     // row-major size() x size()
  std::vector<double> weights;  // strictly positive
  std::optional<std::vector<std::pair<std::size_t, std::size_t>>> edges;

  std::size_t size() const { return point_ids.size(); }
  double d(std::size_t i, std::size_t j) const { return dist[i * size() + j]; }
  double w(std::size_t i) const { return weights[i]; }

  // Pairs a structure may constrain: the edge list if present, else all i<j.
  std::vector<std::pair<std::size_t, std::size_t>> constrained_pairs() const;
};

// Symmetry, triangle inequality, zero diagonal, positivity off the diagonal,
// positive weights, edge indices in range.  Empty report means valid.
ValidationReport validate_space(const FiniteMetricSpace& X);

// Partition of [0, 1] into cells by ascending breakpoints; Lebesgue measure.
struct IntervalGridSpace {
  std::vector<double> breakpoints;  // 0 = t_0 < ... < t_n = 1

  static IntervalGridSpace uniform(std::size_t cells);

  std::size_t cell_count() const { return breakpoints.size() - 1; }
  double cell_left(std::size_t j) const { return breakpoints[j]; }
  double cell_right(std::size_t j) const { return breakpoints[j + 1]; }
  double cell_measure(std::size_t j) const { return breakpoints[j + 1] - breakpoints[j]; }
  std::size_t cell_of(double x) const;

  // Merged breakpoint set; points closer than 1e-12 to an existing breakpoint
  // are dropped so refinement never creates degenerate cells.
  IntervalGridSpace refined_with(const std::vector<double>& extra) const;
  bool same_breakpoints(const IntervalGridSpace& o) const;
};

ValidationReport validate_space(const IntervalGridSpace& I);

// One value per point of a FiniteMetricSpace.
struct ScalarField {
  std::vector<double> values;
};

double lipschitz_constant(const FiniteMetricSpace& X, const ScalarField& u);
double lp_norm(const FiniteMetricSpace& X, const ScalarField& u, double p);

// Subset of points (finite model) or cells (interval model), sorted unique.
struct CellSet {
  std::vector<std::size_t> indices;

  static CellSet of(std::vector<std::size_t> idx);
  bool contains(std::size_t i) const;
  std::size_t size() const { return indices.size(); }
};

// Continuous piecewise polynomial on an interval grid.  Cell polynomials are
// kept in the global coordinate, so refining the grid never changes them.
class PiecewisePolyField {
 public:
  // Throws std::invalid_argument on degree > poly::kMaxDegree or a jump
  // larger than kEqTol at an interior breakpoint.
  PiecewisePolyField(IntervalGridSpace grid, std::vector<poly::Poly> cells);

  static PiecewisePolyField constant(const IntervalGridSpace& grid, double c);
  static PiecewisePolyField coordinate(const IntervalGridSpace& grid);
  // Piecewise linear interpolant of values at the grid breakpoints.
  static PiecewisePolyField from_node_values(const IntervalGridSpace& grid,
                                             const std::vector<double>& node_values);

  const IntervalGridSpace& grid() const { return grid_; }
  const poly::Poly& cell_poly(std::size_t j) const { return cells_[j]; }
  double eval(double x) const;
  int degree() const;
  bool is_piecewise_linear() const { return degree() <= 1; }

  // Same function on a finer grid (every breakpoint of grid_ must survive).
  PiecewisePolyField on_refined(const IntervalGridSpace& finer) const;

 private:
  IntervalGridSpace grid_;
  std::vector<poly::Poly> cells_;
};

// Per-cell polynomial data without a continuity requirement; used for
// gradients, pointwise floors, and cotangent slope fields.
class CellPolyField {
 public:
  CellPolyField(IntervalGridSpace grid, std::vector<poly::Poly> cells);

  static CellPolyField constant(const IntervalGridSpace& grid, double c);
  static CellPolyField from_cell_values(const IntervalGridSpace& grid,
                                        const std::vector<double>& cell_values);

  const IntervalGridSpace& grid() const { return grid_; }
  const poly::Poly& cell_poly(std::size_t j) const { return cells_[j]; }
  double eval_in_cell(std::size_t j, double x) const { return poly::eval(cells_[j], x); }
  std::size_t cell_count() const { return cells_.size(); }

  CellPolyField on_refined(const IntervalGridSpace& finer) const;

 private:
  IntervalGridSpace grid_;
  std::vector<poly::Poly> cells_;
};

double lp_norm(const PiecewisePolyField& u, double p);
double lp_norm(const CellPolyField& g, double p);
double lp_norm_on(const CellPolyField& g, double p, const CellSet& cells);

double lipschitz_constant(const PiecewisePolyField& u);

// Common grid for two fields (union of breakpoints).
IntervalGridSpace common_grid(const IntervalGridSpace& a, const IntervalGridSpace& b);

PiecewisePolyField field_add(const PiecewisePolyField& a, const PiecewisePolyField& b);
PiecewisePolyField field_sub(const PiecewisePolyField& a, const PiecewisePolyField& b);
PiecewisePolyField field_scale(const PiecewisePolyField& a, double s);
PiecewisePolyField field_mul(const PiecewisePolyField& a, const PiecewisePolyField& b);
// max/min require piecewise linear arguments; the result grid is refined at
// the crossings so the output is again piecewise linear.
PiecewisePolyField field_max(const PiecewisePolyField& a, const PiecewisePolyField& b);
PiecewisePolyField field_min(const PiecewisePolyField& a, const PiecewisePolyField& b);

ScalarField field_add(const ScalarField& a, const ScalarField& b);
ScalarField field_sub(const ScalarField& a, const ScalarField& b);
ScalarField field_scale(const ScalarField& a, double s);
ScalarField field_mul(const ScalarField& a, const ScalarField& b);
ScalarField field_max(const ScalarField& a, const ScalarField& b);
ScalarField field_min(const ScalarField& a, const ScalarField& b);
ScalarField field_abs(const ScalarField& a);

CellPolyField cell_add(const CellPolyField& a, const CellPolyField& b);
CellPolyField cell_scale(const CellPolyField& a, double s);
// Pointwise max/min of per-cell data; arguments must be piecewise constant.
CellPolyField cell_max(const CellPolyField& a, const CellPolyField& b);
CellPolyField cell_min(const CellPolyField& a, const CellPolyField& b);

// Globally Lipschitz piecewise linear map on the real line.
class PiecewiseLinearMap {
 public:
  // n interior breakpoints (ascending) and n+1 (slope, intercept) pieces;
  // adjacent pieces must agree at the shared breakpoint within kEqTol.
  PiecewiseLinearMap(std::vector<double> breakpoints, std::vector<double> slopes,
                     std::vector<double> intercepts);

  static PiecewiseLinearMap affine(double slope, double intercept);
  static PiecewiseLinearMap abs_value();
  static PiecewiseLinearMap positive_part();

  double operator()(double t) const;
  // Slope of the piece to the right of t (left of t at the last breakpoint).
  double slope_at(double t) const;
  double lipschitz() const;
  std::size_t piece_count() const { return slopes_.size(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> slopes_, intercepts_;
};

ScalarField compose_pl(const PiecewiseLinearMap& phi, const ScalarField& u);
// Requires u piecewise linear; the grid is refined at the preimages of phi's
// breakpoints so each output cell is again affine.
PiecewisePolyField compose_pl(const PiecewiseLinearMap& phi, const PiecewisePolyField& u);

// Refines so u has constant sign per cell and reports that sign (-1, 0, +1).
struct SignSplit {
  PiecewisePolyField field;
  std::vector<int> cell_sign;
};
SignSplit sign_split(const PiecewisePolyField& u);

// Per-part constant field over a partition of points or cells.
struct SimpleField {
  std::vector<CellSet> parts;
  std::vector<double> values;

  static SimpleField indicator(const CellSet& inside, std::size_t total);
  double value_at(std::size_t index) const;
};

}  // namespace dstruct
