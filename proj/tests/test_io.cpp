#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "dstruct/io.hpp"

using namespace dstruct;
using io::Json;

namespace {

FiniteMetricSpace as_finite(const io::AnySpace& s) { return std::get<FiniteMetricSpace>(s); }

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("finite space survives a json round trip") {
  const FiniteMetricSpace X = io::make_path(4);
  const Json j = io::to_json(X);
  CHECK(j.at("kind") == "graph");
  const FiniteMetricSpace Y = as_finite(io::space_from_json(j));
  CHECK(Y.point_ids == X.point_ids);
  CHECK(Y.dist == X.dist);
  CHECK(Y.weights == X.weights);
  REQUIRE(Y.edges.has_value());
  CHECK(*Y.edges == *X.edges);

  FiniteMetricSpace no_edges = X;
  no_edges.edges.reset();
  CHECK(io::to_json(no_edges).at("kind") == "finite_metric");
  CHECK_FALSE(as_finite(io::space_from_json(io::to_json(no_edges))).edges.has_value());
}

TEST_CASE("interval grid survives a json round trip") {
  const IntervalGridSpace I = IntervalGridSpace::uniform(4).refined_with({0.1});
  const Json j = io::to_json(I);
  CHECK(j.at("kind") == "interval_grid");
  const auto K = std::get<IntervalGridSpace>(io::space_from_json(j));
  CHECK(K.same_breakpoints(I));
}

TEST_CASE("malformed space documents are rejected") {
  CHECK_THROWS_AS(io::space_from_json(Json{{"points", Json::array()}}), std::invalid_argument);
  CHECK_THROWS_AS(io::space_from_json(Json{{"kind", "hyperbolic"}}), std::invalid_argument);

  // Triangle inequality violation is caught at ingestion.
  Json j = io::to_json(io::make_path(3));
  j["dist"][0][2] = 9.0;
  j["dist"][2][0] = 9.0;
  CHECK_THROWS_AS(io::space_from_json(j), std::invalid_argument);

  Json neg = io::to_json(io::make_path(2));
  neg["weights"][0] = 0.0;
  CHECK_THROWS_AS(io::space_from_json(neg), std::invalid_argument);
}

TEST_CASE("fields load against their space") {
  const Json j{{"values", {0.0, 1.0, 0.5}}};
  CHECK(io::scalar_field_from_json(j, 3).values[1] == 1.0);
  CHECK_THROWS_AS(io::scalar_field_from_json(j, 4), std::invalid_argument);

  const IntervalGridSpace grid = IntervalGridSpace::uniform(2);
  const auto hat = io::poly_field_from_json(Json{{"values", {0.0, 1.0, 0.0}}}, grid);
  CHECK(hat.eval(0.5) == doctest::Approx(1.0));
  CHECK(hat.eval(0.25) == doctest::Approx(0.5));

  const auto sq = io::poly_field_from_json(
      Json{{"cells", {Json{{"coeffs", {0.0, 0.0, 1.0}}}, Json{{"coeffs", {0.0, 0.0, 1.0}}}}}},
      grid);
  CHECK(sq.eval(0.5) == doctest::Approx(0.25));
  CHECK_THROWS_AS(io::poly_field_from_json(Json{{"values", {0.0, 1.0}}}, grid),
                  std::invalid_argument);
  CHECK_THROWS_AS(io::poly_field_from_json(Json::object(), grid), std::invalid_argument);

  // Round trip through the cell representation.
  const auto back = io::poly_field_from_json(io::to_json(hat), hat.grid());
  CHECK(back.eval(0.5) == doctest::Approx(1.0));
}

TEST_CASE("descriptor json names the kind and the locality claim") {
  for (const auto& desc :
       {DStructureDescriptor::graph(), DStructureDescriptor::hajlasz(),
        DStructureDescriptor::interval_derivative(), DStructureDescriptor::trivial()}) {
    const DStructureDescriptor back = io::descriptor_from_json(io::to_json(desc));
    CHECK(back.kind == desc.kind);
    CHECK(back.claims_pointwise_local == desc.claims_pointwise_local);
  }
  // The claim defaults per kind when absent.
  CHECK(io::descriptor_from_json(Json{{"kind", "trivial"}}).claims_pointwise_local);
  CHECK_FALSE(io::descriptor_from_json(Json{{"kind", "graph"}}).claims_pointwise_local);
  CHECK_THROWS(io::descriptor_from_json(Json{{"kind", "mystery"}}));
}

TEST_CASE("bodies export as constraint lists") {
  const FiniteMetricSpace X = io::make_path(3);
  const ScalarField u{{0.0, 1.0, 3.0}};
  const Json lin = io::to_json(describe(DStructureDescriptor::graph(), X, u));
  CHECK(lin.at("type") == "linear_constraints");
  CHECK(lin.at("constraints").size() == 2);
  CHECK(lin.at("constraints")[1].at("bound") == doctest::Approx(2.0));

  const Json floor =
      io::to_json(describe(DStructureDescriptor::interval_derivative(),
                           PiecewisePolyField::coordinate(IntervalGridSpace::uniform(2))));
  CHECK(floor.at("type") == "pointwise_floor");
  CHECK(floor.at("floor").at("cells").size() == 2);
}

TEST_CASE("generated graphs carry the shortest path metric") {
  const FiniteMetricSpace cycle = io::make_cycle(5);
  CHECK(cycle.d(0, 2) == 2.0);
  CHECK(cycle.d(0, 4) == 1.0);
  CHECK(cycle.edges->size() == 5);

  const FiniteMetricSpace star = io::make_star(4);
  CHECK(star.d(0, 3) == 1.0);
  CHECK(star.d(1, 2) == 2.0);

  const FiniteMetricSpace complete = io::make_complete(4);
  CHECK(complete.d(1, 3) == 1.0);
  CHECK(complete.edges->size() == 6);

  const FiniteMetricSpace grid = io::make_grid(2, 3);
  CHECK(grid.size() == 6);
  CHECK(grid.d(0, 5) == 3.0);  // corner to corner is the Manhattan distance

  for (const auto& X : {cycle, star, complete, grid}) CHECK(validate_space(X).empty());
}

TEST_CASE("random geometric graphs are deterministic in the seed") {
  const FiniteMetricSpace a = io::make_random_geometric(8, 0.5, 7);
  const FiniteMetricSpace b = io::make_random_geometric(8, 0.5, 7);
  CHECK(a.dist == b.dist);
  CHECK(*a.edges == *b.edges);
  CHECK(validate_space(a).empty());

  const FiniteMetricSpace c = io::make_random_geometric(8, 0.5, 8);
  CHECK(a.dist != c.dist);
}

TEST_CASE("report payload text is byte stable") {
  const FiniteMetricSpace X = io::make_path(3);
  const auto run = [&] {
    return io::payload_text(
        io::to_json(check_locality(DStructureDescriptor::graph(), X, LocalityProperty::L5)));
  };
  const std::string first = run();
  CHECK(first == run());
  CHECK(first.find("fails_with_witness") != std::string::npos);
  CHECK(first.back() == '\n');
}

TEST_CASE("report files carry payload and meta and leave no temp files") {
  TempFile file("dstruct_io_report.json");
  io::write_report_file(file.path, Json{{"answer", 42}}, io::standard_meta());
  const Json j = io::read_json_file(file.path);
  CHECK(j.at("payload").at("answer") == 42);
  CHECK(j.at("meta").contains("written_at"));
  CHECK_FALSE(std::filesystem::exists(file.path + ".tmp"));

  CHECK_THROWS_AS(io::read_json_file(file.path + ".missing"), std::invalid_argument);

  // Plain documents (spaces, fields) are written unwrapped.
  TempFile plain("dstruct_io_space.json");
  io::write_json_file(plain.path, io::to_json(io::make_path(2)));
  CHECK(io::read_json_file(plain.path).at("kind") == "graph");
}

TEST_CASE("minimization results serialize for both models") {
  const FiniteMetricSpace X = io::make_path(2);
  const auto fin = kkt_oracle(DStructureDescriptor::graph(), X, ScalarField{{0.0, 1.0}});
  const Json jf = io::to_json(fin);
  CHECK(jf.at("energy") == doctest::Approx(0.5));
  CHECK(jf.at("g_star").at("values").size() == 2);

  const auto grid = IntervalGridSpace::uniform(2);
  const auto iv = minimal_pseudo_gradient(DStructureDescriptor::interval_derivative(),
                                          PiecewisePolyField::coordinate(grid), 2.0);
  const Json ji = io::to_json(iv);
  CHECK(ji.at("converged") == true);
  CHECK(ji.at("g_star").at("cells").size() == 2);
}
