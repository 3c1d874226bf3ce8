#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dstruct/cotangent.hpp"
#include "dstruct/sampling.hpp"

using namespace dstruct;
using poly::Poly;

namespace {

CheckOptions quick(int trials) {
  CheckOptions o;
  o.trials = trials;
  return o;
}

CotangentModule make_module(const DStructureDescriptor& desc, std::size_t cells) {
  return CotangentModule(desc, IntervalGridSpace::uniform(cells), quick(25));
}

CotangentElement slopes_of(const CotangentModule& mod, const PiecewisePolyField& u) {
  return mod.canonical_iso(mod.differential(u));
}

CotangentElement constant_slopes(const IntervalGridSpace& grid, std::vector<double> s) {
  std::vector<Poly> polys;
  polys.reserve(s.size());
  for (double v : s) polys.push_back(v == 0.0 ? Poly{} : Poly{v});
  return CotangentElement(grid, std::move(polys));
}

bool mentions(const std::string& text, const std::string& phrase) {
  return text.find(phrase) != std::string::npos;
}

}  // namespace

TEST_CASE("module construction demands an interval structure") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(4);
  CHECK_THROWS_AS(CotangentModule(DStructureDescriptor::graph(), grid, quick(5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(CotangentModule(DStructureDescriptor::hajlasz(), grid, quick(5)),
                  std::invalid_argument);
}

TEST_CASE("locality gate records seven passing reports") {
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 4);
  REQUIRE(mod.gate_reports().size() == 7);
  CHECK(mod.gate_reports().front().property == "L1");
  CHECK(mod.gate_reports().back().property == "shanmugalingam");
  for (const auto& rep : mod.gate_reports()) CHECK(rep.passed());
}

TEST_CASE("differential of simple fields has the expected slopes and norms") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(4);
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 4);

  const auto x = PiecewisePolyField::coordinate(grid);
  CHECK(sup_distance(slopes_of(mod, x), constant_slopes(grid, {1, 1, 1, 1})) <= 1e-12);
  CHECK(mod.module_norm(mod.differential(x), 2.0) == doctest::Approx(1.0).epsilon(1e-9));

  const IntervalGridSpace halves = IntervalGridSpace::uniform(2);
  const auto hat = PiecewisePolyField::from_node_values(halves, {0.0, 1.0, 0.0});
  CHECK(sup_distance(slopes_of(mod, hat), constant_slopes(halves, {2, -2})) <= 1e-12);
  CHECK(mod.module_norm(mod.differential(hat), 2.0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(mod.module_norm(mod.differential(hat), 3.0) == doctest::Approx(2.0).epsilon(1e-9));

  // Quadratic input: the slope field is 2x and the norm integral is exact.
  const auto sq = PiecewisePolyField(halves, {Poly{0, 0, 1}, Poly{0, 0, 1}});
  const CotangentElement dsq = slopes_of(mod, sq);
  CHECK(sup_distance(dsq, CotangentElement(halves, {Poly{0, 2}, Poly{0, 2}})) <= 1e-12);
  CHECK(mod.module_norm(mod.differential(sq), 2.0) ==
        doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("equivalence ignores constants and partition layout") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(4);
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 4);
  const auto x = PiecewisePolyField::coordinate(grid);

  const PcmElement dx = mod.differential(x);
  CHECK(mod.equivalent(dx, mod.differential(field_add(x, PiecewisePolyField::constant(grid, 7.0)))));
  CHECK_FALSE(mod.equivalent(dx, mod.differential(field_scale(x, 2.0))));

  // Same class written over a two-part partition with per-part constant shifts.
  std::vector<PcmPart> parts;
  parts.push_back(PcmPart{CellSet::of({0, 1}), x});
  parts.push_back(PcmPart{CellSet::of({2, 3}),
                          field_add(x, PiecewisePolyField::constant(grid, 3.0))});
  const PcmElement split(grid, std::move(parts));
  CHECK(mod.equivalent(split, dx));
  CHECK(sup_distance(mod.canonical_iso(split), mod.canonical_iso(dx)) <= 1e-12);

  // Operations respect the class: adding the same element to both
  // representatives lands in one class.
  const auto hat = PiecewisePolyField::from_node_values(grid, {0.0, 1.0, 0.0, 1.0, 0.0});
  const PcmElement dh = mod.differential(hat);
  CHECK(mod.equivalent(mod.add(split, dh), mod.add(dx, dh)));
}

TEST_CASE("opposite slopes cancel to the zero class") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(3);
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 3);
  const auto x = PiecewisePolyField::coordinate(grid);
  const auto one_minus_x = field_sub(PiecewisePolyField::constant(grid, 1.0), x);

  const PcmElement sum = mod.add(mod.differential(x), mod.differential(one_minus_x));
  CHECK(mod.equivalent(sum, mod.differential(PiecewisePolyField::constant(grid, 0.0))));
  CHECK(mod.module_norm(sum, 2.0) <= 1e-12);
  CHECK(sup_distance(mod.canonical_iso(sum), constant_slopes(grid, {0, 0, 0})) <= 1e-12);
}

TEST_CASE("differential is linear") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(5);
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 5);
  TrialRng rng(3, 0);
  const auto u = sampling::random_pl_field(rng, grid);
  const auto v = sampling::random_pl_field(rng, grid);

  const double d_add = sup_distance(
      mod.canonical_iso(mod.add(mod.differential(u), mod.differential(v))),
      slopes_of(mod, field_add(u, v)));
  CHECK(d_add <= 1e-12);

  const double alpha = -1.75;
  const double d_scale = sup_distance(mod.canonical_iso(mod.scale(alpha, mod.differential(u))),
                                      slopes_of(mod, field_scale(u, alpha)));
  CHECK(d_scale <= 1e-12);
}

TEST_CASE("multiplication by an indicator cuts the slope field") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(4);
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 4);
  const auto x = PiecewisePolyField::coordinate(grid);

  const SimpleField h = SimpleField::indicator(CellSet::of({0, 1}), grid.cell_count());
  const PcmElement cut = mod.smul(h, grid, mod.differential(x));
  CHECK(sup_distance(mod.canonical_iso(cut), constant_slopes(grid, {1, 1, 0, 0})) <= 1e-12);
  CHECK(mod.module_norm(cut, 2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));

  CHECK(mod.module_norm(mod.scale(-1.0, cut), 2.0) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
}

TEST_CASE("construction normalizes parts onto a common grid") {
  const IntervalGridSpace halves = IntervalGridSpace::uniform(2);
  const IntervalGridSpace quarters = IntervalGridSpace::uniform(4);
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 4);

  std::vector<PcmPart> parts;
  parts.push_back(PcmPart{CellSet::of({0}), PiecewisePolyField::coordinate(quarters)});
  parts.push_back(PcmPart{CellSet::of({1}), PiecewisePolyField::constant(halves, 1.0)});
  const PcmElement a(halves, std::move(parts));

  CHECK(a.grid().cell_count() == 4);
  CHECK(sup_distance(mod.canonical_iso(a), constant_slopes(quarters, {1, 1, 0, 0})) <= 1e-12);

  const PcmElement finer = a.on_refined(a.grid().refined_with({0.3}));
  CHECK(finer.grid().cell_count() == 5);
  CHECK(mod.equivalent(a, finer));
  CHECK(sup_distance(mod.canonical_iso(a), mod.canonical_iso(finer)) <= 1e-12);
}

TEST_CASE("malformed partitions and slope fields are rejected") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(2);
  const auto x = PiecewisePolyField::coordinate(grid);

  CHECK_THROWS_AS(PcmElement(grid, {}), std::invalid_argument);
  CHECK_THROWS_AS(PcmElement(grid, {PcmPart{CellSet::of({0}), x}}), std::invalid_argument);
  CHECK_THROWS_AS(PcmElement(grid, {PcmPart{CellSet::of({0, 1}), x},
                                    PcmPart{CellSet::of({1}), x}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(PcmElement(grid, {PcmPart{CellSet::of({0, 5}), x}}), std::invalid_argument);
  CHECK_THROWS_AS(CotangentElement(grid, {Poly{1}}), std::invalid_argument);
}

TEST_CASE("simple multiplier must cover the element") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(2);
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 2);
  SimpleField h;
  h.parts = {CellSet::of({0})};
  h.values = {2.0};
  CHECK_THROWS_AS(mod.smul(h, grid, mod.differential(PiecewisePolyField::coordinate(grid))),
                  std::out_of_range);
}

TEST_CASE("module norm requires an exponent strictly inside (1, infinity)") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(2);
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 2);
  const PcmElement dx = mod.differential(PiecewisePolyField::coordinate(grid));
  CHECK_THROWS_AS(mod.module_norm(dx, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(mod.module_norm(dx, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(mod.module_norm(dx, std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("trivial structure collapses the module to zero") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(4);
  const CotangentModule mod = make_module(DStructureDescriptor::trivial(), 4);
  const auto x = PiecewisePolyField::coordinate(grid);
  const auto hat = PiecewisePolyField::from_node_values(grid, {0.0, 1.0, 0.0, 1.0, 0.0});

  CHECK(sup_distance(slopes_of(mod, x), constant_slopes(grid, {0, 0, 0, 0})) <= 1e-12);
  CHECK(mod.equivalent(mod.differential(x), mod.differential(hat)));
  CHECK(mod.module_norm(mod.differential(hat), 2.0) <= 1e-12);
}

TEST_CASE("per-cell slope fields are reachable from one-cell restrictions") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(3);
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 3);
  const std::vector<double> target = {2.0, -1.0, 0.5};

  std::vector<PcmPart> parts;
  for (std::size_t j = 0; j < target.size(); ++j)
    parts.push_back(PcmPart{CellSet::of({j}),
                            field_scale(PiecewisePolyField::coordinate(grid), target[j])});
  const PcmElement a(grid, std::move(parts));
  CHECK(sup_distance(mod.canonical_iso(a), constant_slopes(grid, target)) <= 1e-12);
}

TEST_CASE("closure accepts converging sequences and flags stalled ones") {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(6);
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 6);
  TrialRng rng(11, 0);
  const auto u = sampling::random_pl_field(rng, grid);
  const auto w = sampling::random_pl_field(rng, grid);

  std::vector<PiecewisePolyField> seq;
  for (int n : {1, 2, 4, 8}) seq.push_back(field_add(u, field_scale(w, 1.0 / n)));

  SUBCASE("converging sequence with the right target") {
    const CheckReport rep = mod.verify_closure(seq, mod.differential(u));
    CHECK(rep.passed());
    CHECK(rep.metrics.at("premise") == 1.0);
    CHECK(mentions(rep.note, "premise holds"));
    CHECK(rep.metrics.at("conclusion_margin") <= 1e-9);
  }

  SUBCASE("slopes that stall away from the target fail the premise") {
    const auto x = PiecewisePolyField::coordinate(grid);
    std::vector<PiecewisePolyField> drift;
    for (int n : {1, 2, 4, 8})
      drift.push_back(field_add(x, field_scale(
          PiecewisePolyField::from_node_values(
              grid, {0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0}), 1.0 / n)));
    const CheckReport rep = mod.verify_closure(drift, mod.differential(field_scale(x, 3.0)));
    CHECK(rep.passed());
    CHECK(rep.metrics.at("premise") == 0.0);
    CHECK(mentions(rep.note, "premise fails"));
  }

  SUBCASE("constant sequences converge to themselves") {
    const std::vector<PiecewisePolyField> flat(3, u);
    const CheckReport rep = mod.verify_closure(flat, mod.differential(u));
    CHECK(rep.passed());
    CHECK(rep.metrics.at("premise") == 1.0);
  }

  SUBCASE("fewer than two terms is a usage error") {
    CHECK_THROWS_AS(mod.verify_closure({u}, mod.differential(u)), std::invalid_argument);
  }
}

TEST_CASE("audits pass for both interval structures") {
  for (const auto& desc :
       {DStructureDescriptor::interval_derivative(), DStructureDescriptor::trivial()}) {
    CAPTURE(to_string(desc.kind));
    const CotangentModule mod = make_module(desc, 8);
    const CheckOptions opts = quick(60);

    const CheckReport uniq = mod.uniqueness_audit(opts);
    CHECK(uniq.passed());
    CHECK(uniq.passes == uniq.trials);

    const CheckReport laws = mod.verify_module_identities(opts);
    CHECK(laws.passed());

    const CheckReport closure = mod.closure_suite(opts);
    CHECK(closure.passed());
    CHECK(closure.trials == 20);

    const CheckReport calc = mod.verify_calculus_d(opts);
    CHECK(calc.passed());
  }
}

TEST_CASE("audits are deterministic in the seed") {
  const CotangentModule mod = make_module(DStructureDescriptor::interval_derivative(), 8);
  CheckOptions opts = quick(30);
  opts.seed = 5;
  const CheckReport a = mod.uniqueness_audit(opts);
  const CheckReport b = mod.uniqueness_audit(opts);
  CHECK(a.passes == b.passes);
  CHECK(a.passed() == b.passed());
}
