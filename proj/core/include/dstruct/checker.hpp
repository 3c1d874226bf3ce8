#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dstruct/rng.hpp"
#include "dstruct/solver.hpp"

namespace dstruct {

enum class Verdict { holds_on_sample, fails_with_witness };

enum class Axiom { A1, A2, A3, A4, A5 };

enum class LocalityProperty { L1, L2, L3, L4, L5, timoshin, shanmugalingam };

std::string to_string(Axiom a);
std::string to_string(LocalityProperty p);
Axiom axiom_from_string(const std::string& s);
LocalityProperty locality_from_string(const std::string& s);

// A failed inequality with enough payload to replay it: named vectors hold
// point values or per-cell constants, index sets hold subsets, and margin is
// the amount by which the inequality failed.
struct Witness {
  std::string description;
  double margin = 0.0;
  int trial = -1;
  std::map<std::string, std::vector<double>> vectors;
  std::map<std::string, std::vector<std::size_t>> index_sets;
};

struct CheckReport {
  std::string property;
  int trials = 0;
  int passes = 0;
  Verdict verdict = Verdict::holds_on_sample;
  std::optional<Witness> witness;  // present iff verdict == fails_with_witness
  std::string note;
  std::map<std::string, double> metrics;

  bool passed() const { return verdict == Verdict::holds_on_sample; }
};

struct CheckOptions {
  int trials = 100;
  std::uint64_t seed = 42;
  double p = 2.0;
  double tol = kMembershipTol;
};

// Shared trial engine: runs fn once per trial with TrialRng(opts.seed, t),
// splitting trials across DSTRUCT_THREADS workers, and replays every failing
// trial from its seed before reporting it.  The lowest failing trial index
// wins, so the outcome never depends on the thread count.  fn returns a
// witness to fail the trial and nullopt to pass it.
CheckReport run_property_trials(
    std::string property, const CheckOptions& opts,
    const std::function<std::optional<Witness>(TrialRng&, int)>& fn);

// Every failing trial is replayed from its seed before being reported, and
// trials run in parallel when DSTRUCT_THREADS allows; the outcome does not
// depend on the thread count because trial t always uses TrialRng(seed, t).
CheckReport check_axiom(const DStructureDescriptor& desc, const FiniteMetricSpace& X, Axiom a,
                        const CheckOptions& opts = {});
CheckReport check_axiom(const DStructureDescriptor& desc, const IntervalGridSpace& grid, Axiom a,
                        const CheckOptions& opts = {});

CheckReport check_locality(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                           LocalityProperty prop, const CheckOptions& opts = {});
CheckReport check_locality(const DStructureDescriptor& desc, const IntervalGridSpace& grid,
                           LocalityProperty prop, const CheckOptions& opts = {});

struct ImplicationEntry {
  std::vector<std::string> premises;
  std::string conclusion;
  bool premises_hold;
  bool conclusion_holds;
  bool contradiction;  // premises held on sample yet the conclusion failed
};

struct ImplicationAudit {
  std::vector<CheckReport> locality;  // the seven property reports
  std::vector<ImplicationEntry> entries;
  bool consistent;
};

ImplicationAudit audit_implications(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                                    const CheckOptions& opts = {});
ImplicationAudit audit_implications(const DStructureDescriptor& desc,
                                    const IntervalGridSpace& grid,
                                    const CheckOptions& opts = {});

// Builds the path graph on the requested vertex count with counting measure,
// the function u(x_i) = i, and B = {x_0}; confirms that the restricted energy
// vanishes (an explicit member of D[u] is zero on B) while the minimal
// pseudo-gradient stays strictly positive at x_0.  Vertex counts below two
// make the construction collapse, so they are reported as skipped.
// metrics: restricted_energy, certificate_violation, du_at_base.
CheckReport reproduce_counterexample(double p = 2.0, std::size_t vertices = 2);

// Derivative calculus on the interval model: chain rule equality for
// piecewise linear post-compositions, the product inequality, and vanishing
// on preimages of single values; all checked per refined cell.
CheckReport check_calculus_Du(const DStructureDescriptor& desc, const IntervalGridSpace& grid,
                              const CheckOptions& opts = {});

}  // namespace dstruct
