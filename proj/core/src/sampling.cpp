#include "dstruct/sampling.hpp"

namespace dstruct::sampling {

std::vector<double> uniform_values(TrialRng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

CellSet random_cells(TrialRng& rng, std::size_t n) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i)
    if (rng.coin()) idx.push_back(i);
  if (idx.empty()) idx.push_back(rng.index(n));
  if (idx.size() == n && n > 1) idx.erase(idx.begin() + static_cast<long>(rng.index(n)));
  return CellSet::of(std::move(idx));
}

PiecewisePolyField random_pl_field(TrialRng& rng, const IntervalGridSpace& grid) {
  std::vector<double> nodes = uniform_values(rng, grid.breakpoints.size());
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (rng.coin(0.15)) nodes[i] = nodes[i - 1];
  if (rng.coin(0.2)) nodes[rng.index(nodes.size())] = 0.0;
  return PiecewisePolyField::from_node_values(grid, nodes);
}

PiecewisePolyField constant_on_cells(TrialRng& rng, const IntervalGridSpace& grid,
                                     const CellSet& B, double c) {
  std::vector<double> nodes = uniform_values(rng, grid.breakpoints.size());
  for (std::size_t j : B.indices) {
    nodes[j] = c;
    nodes[j + 1] = c;
  }
  return PiecewisePolyField::from_node_values(grid, nodes);
}

PiecewiseLinearMap random_pl_map(TrialRng& rng) {
  switch (rng.index(4)) {
    case 0: return PiecewiseLinearMap::abs_value();
    case 1: return PiecewiseLinearMap::positive_part();
    case 2: return PiecewiseLinearMap::affine(rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 1.0));
    default: {
      const double b0 = rng.uniform(-1.5, -0.1), b1 = rng.uniform(0.1, 1.5);
      const double s0 = rng.uniform(-2.0, 2.0), s1 = rng.uniform(-2.0, 2.0),
                   s2 = rng.uniform(-2.0, 2.0);
      const double i0 = rng.uniform(-1.0, 1.0);
      const double i1 = (s0 - s1) * b0 + i0;
      const double i2 = (s1 - s2) * b1 + i1;
      return PiecewiseLinearMap({b0, b1}, {s0, s1, s2}, {i0, i1, i2});
    }
  }
}

}  // namespace dstruct::sampling
