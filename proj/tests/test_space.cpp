#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dstruct/rng.hpp"
#include "dstruct/space.hpp"

using namespace dstruct;
using poly::Poly;

namespace {

FiniteMetricSpace two_points() {
  FiniteMetricSpace X;
  X.point_ids = {"a", "b"};
  X.dist = {0.0, 1.0, 1.0, 0.0};
  X.weights = {1.0, 1.0};
  X.edges = {{{0, 1}}};
  return X;
}

}  // namespace

TEST_CASE("polynomial basics") {
  const Poly q{0.21, -1.0, 1.0};  // (x - 0.3)(x - 0.7)
  CHECK(poly::eval(q, 0.3) == doctest::Approx(0.0).epsilon(1e-12));
  const auto roots = poly::real_roots(q, 0.0, 1.0);
  REQUIRE(roots.size() == 2);
  CHECK(roots[0] == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(roots[1] == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(poly::min_on(q, 0.0, 1.0) == doctest::Approx(-0.04).epsilon(1e-12));
  CHECK(poly::max_on(q, 0.0, 1.0) == doctest::Approx(0.21).epsilon(1e-12));
  CHECK(poly::integral(poly::mul(q, q), 0.0, 1.0) ==
        doctest::Approx(poly::integral_abs_pow(q, 0.0, 1.0, 2.0)).epsilon(1e-12));
}

TEST_CASE("integral of |2x-1|^p") {
  const Poly q{-1.0, 2.0};
  CHECK(poly::integral_abs_pow(q, 0.0, 1.0, 2.0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(poly::integral_abs_pow(q, 0.0, 1.0, 3.0) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(poly::integral_abs_pow(q, 0.0, 1.0, 1.5) == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("finite space validation") {
  FiniteMetricSpace X = two_points();
  CHECK(validate_space(X).empty());
  X.dist[1] = 2.0;  // asymmetric
  CHECK(!validate_space(X).empty());
  X = two_points();
  X.weights[0] = 0.0;
  CHECK(!validate_space(X).empty());

  FiniteMetricSpace T;
  T.point_ids = {"a", "b", "c"};
  T.dist = {0, 1, 5, 1, 0, 1, 5, 1, 0};  // d(a,c) > d(a,b) + d(b,c)
  T.weights = {1, 1, 1};
  bool triangle_flagged = false;
  for (const auto& s : validate_space(T))
    triangle_flagged = triangle_flagged || s.find("triangle") != std::string::npos;
  CHECK(triangle_flagged);
}

TEST_CASE("finite lipschitz and lp norm") {
  const FiniteMetricSpace X = two_points();
  const ScalarField u{{0.0, 1.0}};
  CHECK(lipschitz_constant(X, u) == doctest::Approx(1.0));
  CHECK(lp_norm(X, u, 2.0) == doctest::Approx(1.0));
  CHECK(lp_norm(X, ScalarField{{3.0, -4.0}}, 2.0) == doctest::Approx(5.0));
}

TEST_CASE("interval grid") {
  const IntervalGridSpace g = IntervalGridSpace::uniform(4);
  CHECK(validate_space(g).empty());
  CHECK(g.cell_count() == 4);
  CHECK(g.cell_of(0.3) == 1);
  CHECK(g.cell_of(1.0) == 3);
  const IntervalGridSpace r = g.refined_with({0.1, 0.25, 0.6});
  CHECK(r.cell_count() == 6);  // 0.25 already present
}

TEST_CASE("piecewise field construction and continuity") {
  const IntervalGridSpace g = IntervalGridSpace::uniform(2);
  CHECK_THROWS_AS(PiecewisePolyField(g, {Poly{0.0}, Poly{1.0}}), std::invalid_argument);
  const auto hat = PiecewisePolyField::from_node_values(g, {0.0, 0.5, 0.0});
  CHECK(hat.eval(0.25) == doctest::Approx(0.25));
  CHECK(hat.eval(0.75) == doctest::Approx(0.25));
  CHECK(lipschitz_constant(hat) == doctest::Approx(1.0));
  CHECK(lp_norm(hat, 2.0) == doctest::Approx(std::sqrt(1.0 / 12)).epsilon(1e-12));
}

TEST_CASE("lp norm is refinement invariant") {
  const auto u = PiecewisePolyField::from_node_values(IntervalGridSpace::uniform(3),
                                                      {0.0, 1.4, -0.7, 0.3});
  const double base = lp_norm(u, 2.0);
  const auto fine = u.on_refined(u.grid().refined_with({0.05, 0.41, 0.77, 0.9}));
  CHECK(lp_norm(fine, 2.0) == doctest::Approx(base).epsilon(1e-13));
  CHECK(lp_norm(fine, 3.0) == doctest::Approx(lp_norm(u, 3.0)).epsilon(1e-12));
}

TEST_CASE("field algebra on the interval") {
  const IntervalGridSpace g = IntervalGridSpace::uniform(1);
  const auto x = PiecewisePolyField::coordinate(g);
  const auto one_minus_x = PiecewisePolyField::from_node_values(g, {1.0, 0.0});
  const auto mx = field_max(x, one_minus_x);
  CHECK(mx.eval(0.25) == doctest::Approx(0.75));
  CHECK(mx.eval(0.75) == doctest::Approx(0.75));
  const auto mn = field_min(x, one_minus_x);
  CHECK(mn.eval(0.25) == doctest::Approx(0.25));
  // max + min = sum of the arguments
  const auto sum_direct = field_add(x, one_minus_x);
  const auto sum_lattice = field_add(mx, mn);
  for (double t : {0.1, 0.5, 0.9})
    CHECK(sum_lattice.eval(t) == doctest::Approx(sum_direct.eval(t)).epsilon(1e-12));
  const auto prod = field_mul(x, x);
  CHECK(prod.eval(0.5) == doctest::Approx(0.25));
}

TEST_CASE("pl composition") {
  const auto u = PiecewisePolyField::from_node_values(IntervalGridSpace::uniform(1), {-1.0, 1.0});
  const auto abs_u = compose_pl(PiecewiseLinearMap::abs_value(), u);
  CHECK(abs_u.eval(0.0) == doctest::Approx(1.0));
  CHECK(abs_u.eval(0.5) == doctest::Approx(0.0));
  CHECK(abs_u.eval(0.75) == doctest::Approx(0.5));
  CHECK(abs_u.grid().cell_count() == 2);  // refined at the zero crossing

  const ScalarField v{{-2.0, 0.5}};
  const auto pos = compose_pl(PiecewiseLinearMap::positive_part(), v);
  CHECK(pos.values[0] == doctest::Approx(0.0));
  CHECK(pos.values[1] == doctest::Approx(0.5));
}

TEST_CASE("sign split") {
  const auto u = PiecewisePolyField::from_node_values(IntervalGridSpace::uniform(1), {-0.3, 0.7});
  const SignSplit s = sign_split(u);
  REQUIRE(s.cell_sign.size() == 2);
  CHECK(s.cell_sign[0] == -1);
  CHECK(s.cell_sign[1] == 1);
  CHECK(s.field.grid().breakpoints[1] == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("simple fields") {
  const SimpleField ind = SimpleField::indicator(CellSet::of({0, 2}), 4);
  CHECK(ind.value_at(0) == 1.0);
  CHECK(ind.value_at(1) == 0.0);
  CHECK(ind.value_at(3) == 0.0);
}

TEST_CASE("pl map basics") {
  const auto phi = PiecewiseLinearMap::abs_value();
  CHECK(phi(-2.0) == doctest::Approx(2.0));
  CHECK(phi.lipschitz() == doctest::Approx(1.0));
  CHECK_THROWS_AS(PiecewiseLinearMap({0.0}, {1.0, 1.0}, {0.0, 5.0}), std::invalid_argument);
}

TEST_CASE("composition lipschitz bound holds on random fields") {
  for (int trial = 0; trial < 50; ++trial) {
    TrialRng rng(2024, static_cast<std::uint64_t>(trial));
    const std::size_t cells = 1 + rng.index(8);
    std::vector<double> nodes(cells + 1);
    for (double& v : nodes) v = rng.uniform(-2.0, 2.0);
    const auto u = PiecewisePolyField::from_node_values(IntervalGridSpace::uniform(cells), nodes);
    const auto phi = rng.coin() ? PiecewiseLinearMap::abs_value()
                                : PiecewiseLinearMap::affine(rng.uniform(-2.0, 2.0), 0.3);
    const auto comp = compose_pl(phi, u);
    CHECK(lipschitz_constant(comp) <= phi.lipschitz() * lipschitz_constant(u) + 1e-9);
  }
}
