#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include <json.hpp>

#include "dstruct/checker.hpp"
#include "dstruct/cotangent.hpp"
#include "dstruct/solver.hpp"

namespace dstruct::io {

// Backed by std::map, so keys serialize in sorted order and identical inputs
// always produce identical text.
using Json = nlohmann::json;

using AnySpace = std::variant<FiniteMetricSpace, IntervalGridSpace>;

// Space files carry a "kind" tag: "graph" when an edge list is present,
// "finite_metric" otherwise, "interval_grid" for the interval model.
Json to_json(const FiniteMetricSpace& X);
Json to_json(const IntervalGridSpace& I);

// Throws std::invalid_argument on a malformed document or a space that fails
// validation.
AnySpace space_from_json(const Json& j);

Json to_json(const ScalarField& u);
Json to_json(const PiecewisePolyField& u);
Json to_json(const CellPolyField& g);

ScalarField scalar_field_from_json(const Json& j, std::size_t expect_points);
// Accepts {"values": [...]} as node values of the piecewise linear
// interpolant, or {"cells": [{"coeffs": [...]}, ...]} for arbitrary pieces.
PiecewisePolyField poly_field_from_json(const Json& j, const IntervalGridSpace& grid);
CellPolyField cell_field_from_json(const Json& j, const IntervalGridSpace& grid);

Json to_json(const DStructureDescriptor& desc);
DStructureDescriptor descriptor_from_json(const Json& j);

// Constraint-list dump of a membership body, consumable by external solvers.
Json to_json(const ConvexGradientBody& body);

Json to_json(const Witness& w);
Json to_json(const CheckReport& rep);
Json to_json(const ImplicationAudit& audit);
Json to_json(const MinimizationResult& r);
Json to_json(const CotangentElement& e);

// Canonical report text: two-space indentation, sorted keys, trailing
// newline.  Equal payloads produce equal bytes.
std::string payload_text(const Json& payload);

// Writes {"meta": meta, "payload": payload} via a temporary file and an
// atomic rename; everything volatile (timestamps) belongs in meta.
void write_report_file(const std::string& path, const Json& payload, const Json& meta);

// Plain document written the same atomic way (space and field files).
void write_json_file(const std::string& path, const Json& doc);

// Throws std::invalid_argument when the file is missing or not JSON.
Json read_json_file(const std::string& path);

// Timestamp plus tool version; the only part of a report file that may
// differ between identical runs.
Json standard_meta();

// Generators: unit weights and the shortest-path metric of the unit-length
// edge set.
FiniteMetricSpace make_path(std::size_t n);
FiniteMetricSpace make_cycle(std::size_t n);     // n >= 3
FiniteMetricSpace make_star(std::size_t n);      // n >= 2, vertex 0 is the hub
FiniteMetricSpace make_complete(std::size_t n);
FiniteMetricSpace make_grid(std::size_t rows, std::size_t cols);
// Points drawn uniformly in the unit square, edges below the radius,
// Euclidean metric (finite even when the graph is disconnected).
FiniteMetricSpace make_random_geometric(std::size_t n, double radius, std::uint64_t seed);

}  // namespace dstruct::io
