#pragma once

#include <cstddef>
#include <vector>

#include "dstruct/rng.hpp"
#include "dstruct/space.hpp"

namespace dstruct::sampling {

// Uniform draws in [lo, hi].
std::vector<double> uniform_values(TrialRng& rng, std::size_t n, double lo = -2.0,
                                   double hi = 2.0);

// Nonempty random subset of {0, ..., n-1}, proper whenever n > 1.
CellSet random_cells(TrialRng& rng, std::size_t n);

// Piecewise linear field with random nodes; occasionally repeats a node to
// produce an exact flat and pins one node to zero to exercise sign splits.
PiecewisePolyField random_pl_field(TrialRng& rng, const IntervalGridSpace& grid);

// Random piecewise linear field forced to the exact value c on the cells of B.
PiecewisePolyField constant_on_cells(TrialRng& rng, const IntervalGridSpace& grid,
                                     const CellSet& B, double c);

// One of: absolute value, positive part, a random affine map, or a random
// continuous map with two breakpoints.
PiecewiseLinearMap random_pl_map(TrialRng& rng);

}  // namespace dstruct::sampling
