#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dstruct/checker.hpp"
#include "dstruct/dstructure.hpp"
#include "dstruct/space.hpp"

namespace dstruct {

// Slope coefficients below this are treated as zero when comparing
// differentials of interval fields.
inline constexpr double kSlopeEqTol = 1e-9;

// One piece of a pre-cotangent element: a set of cells and the function whose
// differential governs them.
struct PcmPart {
  CellSet cells;
  PiecewisePolyField u;
};

// Formal sum of differentials restricted to the pieces of a partition.  Parts
// must tile the grid: pairwise disjoint cell sets whose union covers every
// cell.  Construction refines all part functions onto one common grid and
// re-indexes the cell sets accordingly.
class PcmElement {
 public:
  PcmElement(const IntervalGridSpace& grid, std::vector<PcmPart> parts);

  const IntervalGridSpace& grid() const { return grid_; }
  const std::vector<PcmPart>& parts() const { return parts_; }

  // Index of the part whose cell set contains the given cell.
  std::size_t part_of(std::size_t cell) const;

  PcmElement on_refined(const IntervalGridSpace& finer) const;

 private:
  IntervalGridSpace grid_;
  std::vector<PcmPart> parts_;
};

// Concrete target of the representation map: one signed slope polynomial per
// cell.  For piecewise linear inputs every slope is a constant.
class CotangentElement {
 public:
  CotangentElement(IntervalGridSpace grid, std::vector<poly::Poly> slopes);

  const IntervalGridSpace& grid() const { return grid_; }
  const std::vector<poly::Poly>& slopes() const { return slopes_; }
  std::size_t cell_count() const { return slopes_.size(); }

  CotangentElement on_refined(const IntervalGridSpace& finer) const;

 private:
  IntervalGridSpace grid_;
  std::vector<poly::Poly> slopes_;
};

// Largest pointwise gap between two slope fields over the whole interval.
double sup_distance(const CotangentElement& a, const CotangentElement& b);

// Module of differentials over a structure on the interval model.  The
// constructor runs the full locality suite and refuses any structure that
// fails it, so every operation below may assume pointwise locality.
class CotangentModule {
 public:
  CotangentModule(const DStructureDescriptor& desc, const IntervalGridSpace& grid,
                  const CheckOptions& gate_opts = {});

  const DStructureDescriptor& structure() const { return desc_; }
  const IntervalGridSpace& grid() const { return grid_; }
  const std::vector<CheckReport>& gate_reports() const { return gate_; }

  // du as the one-part element covering the whole interval.
  PcmElement differential(const PiecewisePolyField& u) const;

  // True when the difference of the governing functions has vanishing
  // pseudo-gradient on every intersection cell.
  bool equivalent(const PcmElement& a, const PcmElement& b) const;

  PcmElement add(const PcmElement& a, const PcmElement& b) const;
  PcmElement scale(double alpha, const PcmElement& a) const;

  // Multiplication by a simple function whose parts index the cells of
  // h_grid.  Every cell of the result must be covered by some part of h.
  PcmElement smul(const SimpleField& h, const IntervalGridSpace& h_grid,
                  const PcmElement& a) const;

  // Per-cell magnitude: on each piece, the minimal pseudo-gradient of the
  // governing function.
  CellPolyField pointwise_norm(const PcmElement& a) const;

  // Lp norm of the pointwise norm.
  double module_norm(const PcmElement& a, double p) const;

  // Representation map onto per-cell signed slopes; the trivial structure
  // collapses onto the zero field.
  CotangentElement canonical_iso(const PcmElement& a) const;

  // Certifies that the representation map is well defined on equivalence
  // classes, linear, norm preserving, compatible with the differential, and
  // onto the slope fields.
  CheckReport uniqueness_audit(const CheckOptions& opts) const;

  // Per-element normed module laws: |h a| = |h||a|, homogeneity, the triangle
  // inequality, and the agreement of module_norm with the Lp norm of the
  // pointwise norm.
  CheckReport verify_module_identities(const CheckOptions& opts) const;

  // Closure of the differential along one constructed sequence: if u_n
  // converges and the slopes of du_n converge to those of target, then the
  // differential of the extrapolated limit must be equivalent to target.
  CheckReport verify_closure(const std::vector<PiecewisePolyField>& u_seq,
                             const PcmElement& target, const CheckOptions& opts = {}) const;

  // Twenty constructed sequences, including adversarial ones whose premise
  // must be detected as failing.
  CheckReport closure_suite(const CheckOptions& opts) const;

  // Differential calculus: signed chain rule, the Leibniz coefficient
  // identity, and vanishing on level-set preimages.
  CheckReport verify_calculus_d(const CheckOptions& opts) const;

 private:
  DStructureDescriptor desc_;
  IntervalGridSpace grid_;
  std::vector<CheckReport> gate_;
};

}  // namespace dstruct
