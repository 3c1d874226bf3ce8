#include "dstruct/space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dstruct {

namespace {

using poly::Poly;

std::string point_name(const FiniteMetricSpace& X, std::size_t i) {
  return i < X.point_ids.size() ? X.point_ids[i] : std::to_string(i);
}

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> FiniteMetricSpace::constrained_pairs() const {
  if (edges) return *edges;
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j) all.emplace_back(i, j);
  return all;
}

ValidationReport validate_space(const FiniteMetricSpace& X) {
  ValidationReport issues;
  const std::size_t n = X.size();
  if (n == 0) issues.push_back("space has no points");
  if (X.dist.size() != n * n) issues.push_back("distance matrix is not size n x n");
  if (X.weights.size() != n) issues.push_back("weight vector is not size n");
  if (!issues.empty()) return issues;

  for (std::size_t i = 0; i < n; ++i) {
    if (!(X.w(i) > 0.0))
      issues.push_back("weight of " + point_name(X, i) + " is not strictly positive");
    if (std::abs(X.d(i, i)) > kEqTol)
      issues.push_back("nonzero diagonal distance at " + point_name(X, i));
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(X.d(i, j) - X.d(j, i)) > kEqTol)
        issues.push_back("asymmetric distance between " + point_name(X, i) + " and " +
                         point_name(X, j));
      if (!(X.d(i, j) > 0.0))
        issues.push_back("non-positive distance between " + point_name(X, i) + " and " +
                         point_name(X, j));
    }
  }
  const auto triangle_violation = [&]() -> std::optional<std::string> {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (X.d(i, k) > X.d(i, j) + X.d(j, k) + kEqTol)
            return "triangle inequality fails at (" + point_name(X, i) + ", " +
                   point_name(X, j) + ", " + point_name(X, k) + ")";
    return std::nullopt;
  };
  if (auto bad = triangle_violation()) issues.push_back(*bad);
  if (X.edges)
    for (const auto& [i, j] : *X.edges)
      if (i >= n || j >= n || i == j) {
        issues.push_back("edge with out-of-range or equal endpoints");
        break;
      }
  return issues;
}

IntervalGridSpace IntervalGridSpace::uniform(std::size_t cells) {
  require(cells >= 1, "uniform grid needs at least one cell");
  IntervalGridSpace g;
  g.breakpoints.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    g.breakpoints[i] = static_cast<double>(i) / static_cast<double>(cells);
  g.breakpoints.front() = 0.0;
  g.breakpoints.back() = 1.0;
  return g;
}

std::size_t IntervalGridSpace::cell_of(double x) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  std::size_t j = it == breakpoints.begin() ? 0 : static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  return std::min(j, cell_count() - 1);
}

IntervalGridSpace IntervalGridSpace::refined_with(const std::vector<double>& extra) const {
  std::vector<double> merged = breakpoints;
  for (double x : extra) {
    if (x <= 0.0 || x >= 1.0) continue;
    merged.push_back(x);
  }
  std::sort(merged.begin(), merged.end());
  std::vector<double> out;
  for (double x : merged)
    if (out.empty() || x - out.back() > 1e-12) out.push_back(x);
  out.back() = 1.0;
  IntervalGridSpace g;
  g.breakpoints = std::move(out);
  return g;
}

bool IntervalGridSpace::same_breakpoints(const IntervalGridSpace& o) const {
  if (breakpoints.size() != o.breakpoints.size()) return false;
  for (std::size_t i = 0; i < breakpoints.size(); ++i)
    if (std::abs(breakpoints[i] - o.breakpoints[i]) > 1e-12) return false;
  return true;
}

ValidationReport validate_space(const IntervalGridSpace& I) {
  ValidationReport issues;
  if (I.breakpoints.size() < 2) {
    issues.push_back("grid needs at least two breakpoints");
    return issues;
  }
  if (std::abs(I.breakpoints.front()) > kEqTol) issues.push_back("grid does not start at 0");
  if (std::abs(I.breakpoints.back() - 1.0) > kEqTol) issues.push_back("grid does not end at 1");
  for (std::size_t i = 0; i + 1 < I.breakpoints.size(); ++i)
    if (!(I.breakpoints[i + 1] > I.breakpoints[i])) {
      issues.push_back("breakpoints are not strictly increasing");
      break;
    }
  return issues;
}

double lipschitz_constant(const FiniteMetricSpace& X, const ScalarField& u) {
  require(u.values.size() == X.size(), "field size does not match space");
  double lip = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = i + 1; j < X.size(); ++j)
      if (X.d(i, j) > 0.0)
        lip = std::max(lip, std::abs(u.values[i] - u.values[j]) / X.d(i, j));
  return lip;
}

double lp_norm(const FiniteMetricSpace& X, const ScalarField& u, double p) {
  require(p >= 1.0, "lp_norm needs p >= 1");
  require(u.values.size() == X.size(), "field size does not match space");
  double s = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i)
    s += X.w(i) * std::pow(std::abs(u.values[i]), p);
  return std::pow(s, 1.0 / p);
}

CellSet CellSet::of(std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return CellSet{std::move(idx)};
}

bool CellSet::contains(std::size_t i) const {
  return std::binary_search(indices.begin(), indices.end(), i);
}

PiecewisePolyField::PiecewisePolyField(IntervalGridSpace grid, std::vector<Poly> cells)
    : grid_(std::move(grid)), cells_(std::move(cells)) {
  require(validate_space(grid_).empty(), "invalid interval grid");
  require(cells_.size() == grid_.cell_count(), "cell count does not match grid");
  for (const auto& q : cells_)
    require(poly::degree(q) <= poly::kMaxDegree, "cell degree exceeds the cap");
  for (std::size_t j = 0; j + 1 < cells_.size(); ++j) {
    const double t = grid_.breakpoints[j + 1];
    require(std::abs(poly::eval(cells_[j], t) - poly::eval(cells_[j + 1], t)) <= kEqTol,
            "field is discontinuous at an interior breakpoint");
  }
}

PiecewisePolyField PiecewisePolyField::constant(const IntervalGridSpace& grid, double c) {
  return PiecewisePolyField(grid, std::vector<Poly>(grid.cell_count(), Poly{c}));
}

PiecewisePolyField PiecewisePolyField::coordinate(const IntervalGridSpace& grid) {
  return PiecewisePolyField(grid, std::vector<Poly>(grid.cell_count(), Poly{0.0, 1.0}));
}

PiecewisePolyField PiecewisePolyField::from_node_values(const IntervalGridSpace& grid,
                                                        const std::vector<double>& node_values) {
  require(node_values.size() == grid.breakpoints.size(),
          "need one value per grid breakpoint");
  std::vector<Poly> cells(grid.cell_count());
  for (std::size_t j = 0; j < grid.cell_count(); ++j) {
    const double t0 = grid.cell_left(j), t1 = grid.cell_right(j);
    const double slope = (node_values[j + 1] - node_values[j]) / (t1 - t0);
    cells[j] = Poly{node_values[j] - slope * t0, slope};
  }
  return PiecewisePolyField(grid, std::move(cells));
}

double PiecewisePolyField::eval(double x) const {
  return poly::eval(cells_[grid_.cell_of(x)], x);
}

int PiecewisePolyField::degree() const {
  int d = -1;
  for (const auto& q : cells_) d = std::max(d, poly::degree(q));
  return d;
}

namespace {

// Checks that every breakpoint of coarse appears in finer.
void require_refines(const IntervalGridSpace& finer, const IntervalGridSpace& coarse) {
  for (double t : coarse.breakpoints) {
    auto it = std::lower_bound(finer.breakpoints.begin(), finer.breakpoints.end(), t - 1e-12);
    require(it != finer.breakpoints.end() && std::abs(*it - t) <= 1e-12,
            "grid is not a refinement");
  }
}

std::vector<Poly> rebin(const IntervalGridSpace& finer, const IntervalGridSpace& coarse,
                        const std::vector<Poly>& cells) {
  require_refines(finer, coarse);
  std::vector<Poly> out(finer.cell_count());
  for (std::size_t j = 0; j < finer.cell_count(); ++j) {
    const double mid = 0.5 * (finer.cell_left(j) + finer.cell_right(j));
    out[j] = cells[coarse.cell_of(mid)];
  }
  return out;
}

}  // namespace

PiecewisePolyField PiecewisePolyField::on_refined(const IntervalGridSpace& finer) const {
  return PiecewisePolyField(finer, rebin(finer, grid_, cells_));
}

CellPolyField::CellPolyField(IntervalGridSpace grid, std::vector<Poly> cells)
    : grid_(std::move(grid)), cells_(std::move(cells)) {
  require(validate_space(grid_).empty(), "invalid interval grid");
  require(cells_.size() == grid_.cell_count(), "cell count does not match grid");
  for (const auto& q : cells_)
    require(poly::degree(q) <= poly::kMaxDegree, "cell degree exceeds the cap");
}

CellPolyField CellPolyField::constant(const IntervalGridSpace& grid, double c) {
  return CellPolyField(grid, std::vector<Poly>(grid.cell_count(), Poly{c}));
}

CellPolyField CellPolyField::from_cell_values(const IntervalGridSpace& grid,
                                              const std::vector<double>& cell_values) {
  require(cell_values.size() == grid.cell_count(), "need one value per cell");
  std::vector<Poly> cells(grid.cell_count());
  for (std::size_t j = 0; j < cells.size(); ++j) cells[j] = Poly{cell_values[j]};
  return CellPolyField(grid, std::move(cells));
}

CellPolyField CellPolyField::on_refined(const IntervalGridSpace& finer) const {
  return CellPolyField(finer, rebin(finer, grid_, cells_));
}

double lp_norm(const PiecewisePolyField& u, double p) {
  double s = 0.0;
  for (std::size_t j = 0; j < u.grid().cell_count(); ++j)
    s += poly::integral_abs_pow(u.cell_poly(j), u.grid().cell_left(j), u.grid().cell_right(j), p);
  return std::pow(s, 1.0 / p);
}

double lp_norm(const CellPolyField& g, double p) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.cell_count(); ++j)
    s += poly::integral_abs_pow(g.cell_poly(j), g.grid().cell_left(j), g.grid().cell_right(j), p);
  return std::pow(s, 1.0 / p);
}

double lp_norm_on(const CellPolyField& g, double p, const CellSet& cells) {
  double s = 0.0;
  for (std::size_t j : cells.indices)
    s += poly::integral_abs_pow(g.cell_poly(j), g.grid().cell_left(j), g.grid().cell_right(j), p);
  return std::pow(s, 1.0 / p);
}

double lipschitz_constant(const PiecewisePolyField& u) {
  double lip = 0.0;
  for (std::size_t j = 0; j < u.grid().cell_count(); ++j)
    lip = std::max(lip, poly::max_abs_on(poly::derivative(u.cell_poly(j)),
                                         u.grid().cell_left(j), u.grid().cell_right(j)));
  return lip;
}

IntervalGridSpace common_grid(const IntervalGridSpace& a, const IntervalGridSpace& b) {
  return a.refined_with(b.breakpoints);
}

namespace {

template <typename Op>
PiecewisePolyField zip_fields(const PiecewisePolyField& a, const PiecewisePolyField& b, Op op) {
  const IntervalGridSpace g = common_grid(a.grid(), b.grid());
  const PiecewisePolyField ar = a.on_refined(g), br = b.on_refined(g);
  std::vector<Poly> cells(g.cell_count());
  for (std::size_t j = 0; j < cells.size(); ++j) cells[j] = op(ar.cell_poly(j), br.cell_poly(j));
  return PiecewisePolyField(g, std::move(cells));
}

PiecewisePolyField pl_extremum(const PiecewisePolyField& a, const PiecewisePolyField& b,
                               bool take_max) {
  require(a.is_piecewise_linear() && b.is_piecewise_linear(),
          "max/min needs piecewise linear fields");
  IntervalGridSpace g = common_grid(a.grid(), b.grid());
  PiecewisePolyField ar = a.on_refined(g), br = b.on_refined(g);
  std::vector<double> crossings;
  for (std::size_t j = 0; j < g.cell_count(); ++j) {
    const Poly diff = poly::sub(ar.cell_poly(j), br.cell_poly(j));
    for (double r : poly::real_roots(diff, g.cell_left(j), g.cell_right(j)))
      crossings.push_back(r);
  }
  g = g.refined_with(crossings);
  ar = a.on_refined(g);
  br = b.on_refined(g);
  std::vector<Poly> cells(g.cell_count());
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const double mid = 0.5 * (g.cell_left(j) + g.cell_right(j));
    const bool a_wins =
        (poly::eval(ar.cell_poly(j), mid) >= poly::eval(br.cell_poly(j), mid)) == take_max;
    cells[j] = a_wins ? ar.cell_poly(j) : br.cell_poly(j);
  }
  return PiecewisePolyField(g, std::move(cells));
}

void require_same_size(const ScalarField& a, const ScalarField& b) {
  require(a.values.size() == b.values.size(), "field sizes do not match");
}

}  // namespace

PiecewisePolyField field_add(const PiecewisePolyField& a, const PiecewisePolyField& b) {
  return zip_fields(a, b, [](const Poly& x, const Poly& y) { return poly::add(x, y); });
}

PiecewisePolyField field_sub(const PiecewisePolyField& a, const PiecewisePolyField& b) {
  return zip_fields(a, b, [](const Poly& x, const Poly& y) { return poly::sub(x, y); });
}

PiecewisePolyField field_scale(const PiecewisePolyField& a, double s) {
  std::vector<Poly> cells(a.grid().cell_count());
  for (std::size_t j = 0; j < cells.size(); ++j) cells[j] = poly::scale(a.cell_poly(j), s);
  return PiecewisePolyField(a.grid(), std::move(cells));
}

PiecewisePolyField field_mul(const PiecewisePolyField& a, const PiecewisePolyField& b) {
  return zip_fields(a, b, [](const Poly& x, const Poly& y) { return poly::mul(x, y); });
}

PiecewisePolyField field_max(const PiecewisePolyField& a, const PiecewisePolyField& b) {
  return pl_extremum(a, b, true);
}

PiecewisePolyField field_min(const PiecewisePolyField& a, const PiecewisePolyField& b) {
  return pl_extremum(a, b, false);
}

ScalarField field_add(const ScalarField& a, const ScalarField& b) {
  require_same_size(a, b);
  ScalarField r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] += b.values[i];
  return r;
}

ScalarField field_sub(const ScalarField& a, const ScalarField& b) {
  return field_add(a, field_scale(b, -1.0));
}

ScalarField field_scale(const ScalarField& a, double s) {
  ScalarField r = a;
  for (double& v : r.values) v *= s;
  return r;
}

ScalarField field_mul(const ScalarField& a, const ScalarField& b) {
  require_same_size(a, b);
  ScalarField r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] *= b.values[i];
  return r;
}

ScalarField field_max(const ScalarField& a, const ScalarField& b) {
  require_same_size(a, b);
  ScalarField r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = std::max(r.values[i], b.values[i]);
  return r;
}

ScalarField field_min(const ScalarField& a, const ScalarField& b) {
  require_same_size(a, b);
  ScalarField r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = std::min(r.values[i], b.values[i]);
  return r;
}

ScalarField field_abs(const ScalarField& a) {
  ScalarField r = a;
  for (double& v : r.values) v = std::abs(v);
  return r;
}

CellPolyField cell_add(const CellPolyField& a, const CellPolyField& b) {
  const IntervalGridSpace g = common_grid(a.grid(), b.grid());
  const CellPolyField ar = a.on_refined(g), br = b.on_refined(g);
  std::vector<Poly> cells(g.cell_count());
  for (std::size_t j = 0; j < cells.size(); ++j)
    cells[j] = poly::add(ar.cell_poly(j), br.cell_poly(j));
  return CellPolyField(g, std::move(cells));
}

CellPolyField cell_scale(const CellPolyField& a, double s) {
  std::vector<Poly> cells(a.cell_count());
  for (std::size_t j = 0; j < cells.size(); ++j) cells[j] = poly::scale(a.cell_poly(j), s);
  return CellPolyField(a.grid(), std::move(cells));
}

namespace {

CellPolyField cell_extremum(const CellPolyField& a, const CellPolyField& b, bool take_max) {
  const IntervalGridSpace g = common_grid(a.grid(), b.grid());
  const CellPolyField ar = a.on_refined(g), br = b.on_refined(g);
  std::vector<Poly> cells(g.cell_count());
  for (std::size_t j = 0; j < cells.size(); ++j) {
    require(poly::degree(ar.cell_poly(j)) <= 0 && poly::degree(br.cell_poly(j)) <= 0,
            "cell max/min needs piecewise constant data");
    const double x = ar.cell_poly(j).empty() ? 0.0 : ar.cell_poly(j)[0];
    const double y = br.cell_poly(j).empty() ? 0.0 : br.cell_poly(j)[0];
    cells[j] = Poly{take_max ? std::max(x, y) : std::min(x, y)};
  }
  return CellPolyField(g, std::move(cells));
}

}  // namespace

CellPolyField cell_max(const CellPolyField& a, const CellPolyField& b) {
  return cell_extremum(a, b, true);
}

CellPolyField cell_min(const CellPolyField& a, const CellPolyField& b) {
  return cell_extremum(a, b, false);
}

PiecewiseLinearMap::PiecewiseLinearMap(std::vector<double> breakpoints,
                                       std::vector<double> slopes,
                                       std::vector<double> intercepts)
    : breakpoints_(std::move(breakpoints)),
      slopes_(std::move(slopes)),
      intercepts_(std::move(intercepts)) {
  require(slopes_.size() == breakpoints_.size() + 1 && intercepts_.size() == slopes_.size(),
          "need one more piece than breakpoints");
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i)
    require(breakpoints_[i] < breakpoints_[i + 1], "map breakpoints must be ascending");
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const double t = breakpoints_[i];
    require(std::abs((slopes_[i] * t + intercepts_[i]) -
                     (slopes_[i + 1] * t + intercepts_[i + 1])) <= kEqTol,
            "map is discontinuous at a breakpoint");
  }
}

PiecewiseLinearMap PiecewiseLinearMap::affine(double slope, double intercept) {
  return PiecewiseLinearMap({}, {slope}, {intercept});
}

PiecewiseLinearMap PiecewiseLinearMap::abs_value() {
  return PiecewiseLinearMap({0.0}, {-1.0, 1.0}, {0.0, 0.0});
}

PiecewiseLinearMap PiecewiseLinearMap::positive_part() {
  return PiecewiseLinearMap({0.0}, {0.0, 1.0}, {0.0, 0.0});
}

double PiecewiseLinearMap::operator()(double t) const {
  const std::size_t i = static_cast<std::size_t>(
      std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t) - breakpoints_.begin());
  return slopes_[i] * t + intercepts_[i];
}

double PiecewiseLinearMap::slope_at(double t) const {
  const std::size_t i = static_cast<std::size_t>(
      std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t) - breakpoints_.begin());
  return slopes_[i];
}

double PiecewiseLinearMap::lipschitz() const {
  double lip = 0.0;
  for (double s : slopes_) lip = std::max(lip, std::abs(s));
  return lip;
}

ScalarField compose_pl(const PiecewiseLinearMap& phi, const ScalarField& u) {
  ScalarField r = u;
  for (double& v : r.values) v = phi(v);
  return r;
}

PiecewisePolyField compose_pl(const PiecewiseLinearMap& phi, const PiecewisePolyField& u) {
  require(u.is_piecewise_linear(), "composition needs a piecewise linear field");
  std::vector<double> cuts;
  for (std::size_t j = 0; j < u.grid().cell_count(); ++j) {
    const Poly& q = u.cell_poly(j);
    const double c1 = q.size() > 1 ? q[1] : 0.0;
    if (c1 == 0.0) continue;
    const double c0 = q.empty() ? 0.0 : q[0];
    for (double bp : phi.breakpoints()) {
      const double t = (bp - c0) / c1;
      if (t > u.grid().cell_left(j) && t < u.grid().cell_right(j)) cuts.push_back(t);
    }
  }
  const IntervalGridSpace g = u.grid().refined_with(cuts);
  const PiecewisePolyField ur = u.on_refined(g);
  std::vector<Poly> cells(g.cell_count());
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const double mid_val = poly::eval(ur.cell_poly(j), 0.5 * (g.cell_left(j) + g.cell_right(j)));
    const double s = phi.slope_at(mid_val);
    const double b = phi(mid_val) - s * mid_val;
    cells[j] = poly::add(poly::scale(ur.cell_poly(j), s), Poly{b});
  }
  return PiecewisePolyField(g, std::move(cells));
}

SignSplit sign_split(const PiecewisePolyField& u) {
  std::vector<double> cuts;
  for (std::size_t j = 0; j < u.grid().cell_count(); ++j)
    for (double r : poly::real_roots(u.cell_poly(j), u.grid().cell_left(j), u.grid().cell_right(j)))
      cuts.push_back(r);
  const IntervalGridSpace g = u.grid().refined_with(cuts);
  PiecewisePolyField ur = u.on_refined(g);
  std::vector<int> sign(g.cell_count());
  for (std::size_t j = 0; j < sign.size(); ++j) {
    if (poly::is_zero(ur.cell_poly(j), 1e-13)) {
      sign[j] = 0;
      continue;
    }
    const double v = poly::eval(ur.cell_poly(j), 0.5 * (g.cell_left(j) + g.cell_right(j)));
    sign[j] = v > 1e-13 ? 1 : (v < -1e-13 ? -1 : 0);
  }
  return SignSplit{std::move(ur), std::move(sign)};
}

SimpleField SimpleField::indicator(const CellSet& inside, std::size_t total) {
  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < total; ++i)
    if (!inside.contains(i)) outside.push_back(i);
  SimpleField f;
  f.parts.push_back(inside);
  f.values.push_back(1.0);
  if (!outside.empty()) {
    f.parts.push_back(CellSet::of(std::move(outside)));
    f.values.push_back(0.0);
  }
  return f;
}

double SimpleField::value_at(std::size_t index) const {
  for (std::size_t k = 0; k < parts.size(); ++k)
    if (parts[k].contains(index)) return values[k];
  throw std::out_of_range("index not covered by the simple field partition");
}

}  // namespace dstruct
