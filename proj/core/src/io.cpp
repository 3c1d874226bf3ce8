#include "dstruct/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <queue>
#include <stdexcept>

#include "dstruct/rng.hpp"

namespace dstruct::io {

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

const Json& field_at(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

std::vector<double> double_list(const Json& j, const char* key) {
  const Json& arr = field_at(j, key);
  if (!arr.is_array()) bad(std::string("\"") + key + "\" must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) bad(std::string("\"") + key + "\" must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

void require_valid(const FiniteMetricSpace& X) {
  const ValidationReport problems = validate_space(X);
  if (problems.empty()) return;
  std::string msg = "invalid space:";
  for (const auto& p : problems) msg += " " + p + ";";
  bad(msg);
}

void require_valid(const IntervalGridSpace& I) {
  const ValidationReport problems = validate_space(I);
  if (problems.empty()) return;
  std::string msg = "invalid grid:";
  for (const auto& p : problems) msg += " " + p + ";";
  bad(msg);
}

FiniteMetricSpace finite_from_json(const Json& j, bool expect_edges) {
  FiniteMetricSpace X;
  for (const auto& p : field_at(j, "points")) X.point_ids.push_back(p.get<std::string>());
  const std::size_t n = X.point_ids.size();
  const Json& rows = field_at(j, "dist");
  if (rows.size() != n) bad("\"dist\" must have one row per point");
  for (const auto& row : rows) {
    if (row.size() != n) bad("\"dist\" rows must have one entry per point");
    for (const auto& v : row) X.dist.push_back(v.get<double>());
  }
  X.weights = double_list(j, "weights");
  if (X.weights.size() != n) bad("\"weights\" must have one entry per point");
  if (expect_edges || j.contains("edges")) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& e : field_at(j, "edges")) {
      if (!e.is_array() || e.size() != 2) bad("\"edges\" entries must be pairs");
      edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
    X.edges = std::move(edges);
  }
  require_valid(X);
  return X;
}

// All-pairs shortest path over unit-length edges; generators only build
// connected graphs, so every distance is finite.
FiniteMetricSpace from_edges(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges) {
  FiniteMetricSpace X;
  for (std::size_t i = 0; i < n; ++i) X.point_ids.push_back("v" + std::to_string(i));
  X.weights.assign(n, 1.0);
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  X.dist.assign(n * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<int> hop(n, -1);
    std::queue<std::size_t> q;
    hop[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t x = q.front();
      q.pop();
      for (std::size_t y : adj[x])
        if (hop[y] < 0) {
          hop[y] = hop[x] + 1;
          q.push(y);
        }
    }
    for (std::size_t t = 0; t < n; ++t) X.dist[s * n + t] = static_cast<double>(hop[t]);
  }
  X.edges = std::move(edges);
  return X;
}

Json json_poly(const poly::Poly& q) { return Json{{"coeffs", q}}; }

poly::Poly poly_from(const Json& j) {
  poly::Poly q;
  for (const auto& c : field_at(j, "coeffs")) q.push_back(c.get<double>());
  return q;
}

std::string verdict_name(Verdict v) {
  return v == Verdict::holds_on_sample ? "holds_on_sample" : "fails_with_witness";
}

}  // namespace

Json to_json(const FiniteMetricSpace& X) {
  Json j;
  j["kind"] = X.edges ? "graph" : "finite_metric";
  j["points"] = X.point_ids;
  Json rows = Json::array();
  for (std::size_t i = 0; i < X.size(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < X.size(); ++k) row.push_back(X.d(i, k));
    rows.push_back(std::move(row));
  }
  j["dist"] = std::move(rows);
  j["weights"] = X.weights;
  if (X.edges) {
    Json edges = Json::array();
    for (const auto& [a, b] : *X.edges) edges.push_back(Json::array({a, b}));
    j["edges"] = std::move(edges);
  }
  return j;
}

Json to_json(const IntervalGridSpace& I) {
  return Json{{"kind", "interval_grid"}, {"breakpoints", I.breakpoints}};
}

AnySpace space_from_json(const Json& j) {
  const std::string kind = field_at(j, "kind").get<std::string>();
  if (kind == "graph") return finite_from_json(j, true);
  if (kind == "finite_metric") return finite_from_json(j, false);
  if (kind == "interval_grid") {
    IntervalGridSpace I{double_list(j, "breakpoints")};
    require_valid(I);
    return I;
  }
  bad("unknown space kind \"" + kind + "\"");
}

Json to_json(const ScalarField& u) { return Json{{"values", u.values}}; }

Json to_json(const PiecewisePolyField& u) {
  Json cells = Json::array();
  for (std::size_t j = 0; j < u.grid().cell_count(); ++j) cells.push_back(json_poly(u.cell_poly(j)));
  return Json{{"breakpoints", u.grid().breakpoints}, {"cells", std::move(cells)}};
}

Json to_json(const CellPolyField& g) {
  Json cells = Json::array();
  for (std::size_t j = 0; j < g.cell_count(); ++j) cells.push_back(json_poly(g.cell_poly(j)));
  return Json{{"breakpoints", g.grid().breakpoints}, {"cells", std::move(cells)}};
}

ScalarField scalar_field_from_json(const Json& j, std::size_t expect_points) {
  ScalarField u{double_list(j, "values")};
  if (u.values.size() != expect_points)
    bad("field has " + std::to_string(u.values.size()) + " values but the space has " +
        std::to_string(expect_points) + " points");
  return u;
}

PiecewisePolyField poly_field_from_json(const Json& j, const IntervalGridSpace& grid) {
  if (j.contains("values")) {
    const std::vector<double> nodes = double_list(j, "values");
    if (nodes.size() != grid.breakpoints.size())
      bad("field has " + std::to_string(nodes.size()) + " node values but the grid has " +
          std::to_string(grid.breakpoints.size()) + " breakpoints");
    return PiecewisePolyField::from_node_values(grid, nodes);
  }
  if (j.contains("cells")) {
    const Json& cells = j.at("cells");
    if (cells.size() != grid.cell_count())
      bad("field has " + std::to_string(cells.size()) + " cells but the grid has " +
          std::to_string(grid.cell_count()));
    std::vector<poly::Poly> polys;
    for (const auto& c : cells) polys.push_back(poly_from(c));
    return PiecewisePolyField(grid, std::move(polys));
  }
  bad("field needs \"values\" or \"cells\"");
}

CellPolyField cell_field_from_json(const Json& j, const IntervalGridSpace& grid) {
  const Json& cells = field_at(j, "cells");
  if (cells.size() != grid.cell_count())
    bad("field has " + std::to_string(cells.size()) + " cells but the grid has " +
        std::to_string(grid.cell_count()));
  std::vector<poly::Poly> polys;
  for (const auto& c : cells) polys.push_back(poly_from(c));
  return CellPolyField(grid, std::move(polys));
}

Json to_json(const DStructureDescriptor& desc) {
  return Json{{"kind", to_string(desc.kind)}, {"pointwise_local", desc.claims_pointwise_local}};
}

DStructureDescriptor descriptor_from_json(const Json& j) {
  const StructureKind kind = structure_kind_from_string(field_at(j, "kind").get<std::string>());
  const bool default_local =
      kind == StructureKind::trivial || kind == StructureKind::interval_derivative;
  return {kind, j.value("pointwise_local", default_local)};
}

Json to_json(const ConvexGradientBody& body) {
  if (const auto* lin = std::get_if<LinearConstraintsBody>(&body)) {
    Json rows = Json::array();
    for (const auto& c : lin->constraints) {
      Json support = Json::array();
      for (const auto& [idx, coeff] : c.support) support.push_back(Json::array({idx, coeff}));
      rows.push_back(Json{{"support", std::move(support)}, {"bound", c.bound}, {"label", c.label}});
    }
    return Json{{"type", "linear_constraints"},
                {"n_points", lin->n_points},
                {"constraints", std::move(rows)}};
  }
  const auto& floor = std::get<PointwiseFloorBody>(body).floor;
  if (const auto* s = std::get_if<ScalarField>(&floor))
    return Json{{"type", "pointwise_floor"}, {"floor", to_json(*s)}};
  return Json{{"type", "pointwise_floor"}, {"floor", to_json(std::get<CellPolyField>(floor))}};
}

Json to_json(const Witness& w) {
  Json j{{"description", w.description}, {"margin", w.margin}, {"trial", w.trial}};
  Json vectors = Json::object();
  for (const auto& [name, values] : w.vectors) vectors[name] = values;
  Json sets = Json::object();
  for (const auto& [name, idx] : w.index_sets) sets[name] = idx;
  j["vectors"] = std::move(vectors);
  j["index_sets"] = std::move(sets);
  return j;
}

Json to_json(const CheckReport& rep) {
  Json j{{"property", rep.property},
         {"trials", rep.trials},
         {"passes", rep.passes},
         {"verdict", verdict_name(rep.verdict)},
         {"note", rep.note}};
  if (rep.witness) j["witness"] = to_json(*rep.witness);
  Json metrics = Json::object();
  for (const auto& [name, v] : rep.metrics) metrics[name] = v;
  j["metrics"] = std::move(metrics);
  return j;
}

Json to_json(const ImplicationAudit& audit) {
  Json locality = Json::array();
  for (const auto& rep : audit.locality) locality.push_back(to_json(rep));
  Json entries = Json::array();
  for (const auto& e : audit.entries)
    entries.push_back(Json{{"premises", e.premises},
                           {"conclusion", e.conclusion},
                           {"premises_hold", e.premises_hold},
                           {"conclusion_holds", e.conclusion_holds},
                           {"contradiction", e.contradiction}});
  return Json{{"locality", std::move(locality)},
              {"entries", std::move(entries)},
              {"consistent", audit.consistent}};
}

Json to_json(const MinimizationResult& r) {
  Json j{{"energy", r.energy},
         {"iterations", r.iterations},
         {"primal_residual", r.primal_residual},
         {"dual_gap", r.dual_gap},
         {"converged", r.converged}};
  if (const auto* s = std::get_if<ScalarField>(&r.g_star))
    j["g_star"] = to_json(*s);
  else
    j["g_star"] = to_json(std::get<CellPolyField>(r.g_star));
  return j;
}

Json to_json(const CotangentElement& e) {
  Json slopes = Json::array();
  for (const auto& q : e.slopes()) slopes.push_back(q);
  return Json{{"breakpoints", e.grid().breakpoints}, {"slopes", std::move(slopes)}};
}

std::string payload_text(const Json& payload) { return payload.dump(2) + "\n"; }

namespace {

void atomic_write(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << text;
    if (!out.flush()) throw std::runtime_error("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_report_file(const std::string& path, const Json& payload, const Json& meta) {
  atomic_write(path, payload_text(Json{{"meta", meta}, {"payload", payload}}));
}

void write_json_file(const std::string& path, const Json& doc) {
  atomic_write(path, payload_text(doc));
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot read " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) bad(path + " is not valid JSON");
  return j;
}

Json standard_meta() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return Json{{"written_at", stamp}, {"tool", "dstruct 0.1.0"}};
}

FiniteMetricSpace make_path(std::size_t n) {
  if (n < 1) bad("path needs at least one vertex");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return from_edges(n, std::move(edges));
}

FiniteMetricSpace make_cycle(std::size_t n) {
  if (n < 3) bad("cycle needs at least three vertices");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  edges.emplace_back(0, n - 1);
  return from_edges(n, std::move(edges));
}

FiniteMetricSpace make_star(std::size_t n) {
  if (n < 2) bad("star needs at least two vertices");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(0, i);
  return from_edges(n, std::move(edges));
}

FiniteMetricSpace make_complete(std::size_t n) {
  if (n < 2) bad("complete graph needs at least two vertices");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return from_edges(n, std::move(edges));
}

FiniteMetricSpace make_grid(std::size_t rows, std::size_t cols) {
  if (rows < 1 || cols < 1) bad("grid needs positive dimensions");
  const auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  return from_edges(rows * cols, std::move(edges));
}

FiniteMetricSpace make_random_geometric(std::size_t n, double radius, std::uint64_t seed) {
  if (n < 1) bad("random geometric graph needs at least one vertex");
  if (!(radius > 0.0)) bad("random geometric graph needs a positive radius");
  TrialRng rng(seed, 0);
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = rng.uniform(0.0, 1.0);
    ys[i] = rng.uniform(0.0, 1.0);
  }
  FiniteMetricSpace X;
  for (std::size_t i = 0; i < n; ++i) X.point_ids.push_back("v" + std::to_string(i));
  X.weights.assign(n, 1.0);
  X.dist.assign(n * n, 0.0);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = std::hypot(xs[i] - xs[j], ys[i] - ys[j]);
      X.dist[i * n + j] = d;
      if (i < j && d <= radius) edges.emplace_back(i, j);
    }
  X.edges = std::move(edges);
  require_valid(X);
  return X;
}

}  // namespace dstruct::io
