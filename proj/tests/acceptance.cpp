// Release gate: every shipped claim about the library, exercised end to end
// with pinned seeds, tolerances, and runtime budgets.  One line per
// criterion; exit 0 only when all of them pass.  Pass a path argument to
// dump the criterion payloads as JSON.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dstruct/io.hpp"

using namespace dstruct;
using io::Json;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  Json payload;

  void require(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(6) << v;
  return out.str();
}

// 1. The stored counterexample: restricted energy vanishes while the minimal
// pseudo-gradient stays at one half on the base vertex.
Outcome criterion_counterexample() {
  Outcome out;
  const CheckReport rep = reproduce_counterexample(2.0, 2);
  out.require(rep.passed(), "reproduction failed: " + rep.note);
  out.require(rep.metrics.at("restricted_energy") <= 1e-8, "restricted energy above 1e-8");
  out.require(rep.metrics.at("certificate_violation") <= 1e-9, "certificate not a member");
  out.require(std::abs(rep.metrics.at("du_at_base") - 0.5) <= 1e-6, "Du at base off 0.5");
  if (out.ok)
    out.detail = "restricted energy " + fmt(rep.metrics.at("restricted_energy")) +
                 ", Du(base) = " + fmt(rep.metrics.at("du_at_base"));
  out.payload = io::to_json(rep);
  return out;
}

// 2. Iterative solver against the exact active-set oracle over every small
// graph family, 100 seeded functions each.
Outcome criterion_solver_oracle() {
  Outcome out;
  std::vector<FiniteMetricSpace> graphs;
  for (std::size_t n = 2; n <= 5; ++n) graphs.push_back(io::make_path(n));
  for (std::size_t n = 3; n <= 5; ++n) graphs.push_back(io::make_cycle(n));
  for (std::size_t n = 3; n <= 5; ++n) graphs.push_back(io::make_star(n));
  for (std::size_t n = 3; n <= 5; ++n) graphs.push_back(io::make_complete(n));

  const DStructureDescriptor desc = DStructureDescriptor::graph();
  double worst_energy = 0.0, worst_g = 0.0;
  int solves = 0;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const FiniteMetricSpace& X = graphs[gi];
    for (int t = 0; t < 100; ++t) {
      TrialRng rng(42, gi * 100 + static_cast<std::size_t>(t));
      ScalarField u;
      u.values.resize(X.size());
      for (double& v : u.values) v = rng.uniform(-2.0, 2.0);

      const MinimizationResult exact = kkt_oracle(desc, X, u);
      const MinimizationResult solved = minimal_pseudo_gradient(desc, X, u, 2.0);
      ++solves;

      const double rel = std::abs(solved.energy - exact.energy) /
                         std::max(1.0, std::abs(exact.energy));
      worst_energy = std::max(worst_energy, rel);
      for (std::size_t i = 0; i < X.size(); ++i)
        worst_g = std::max(worst_g, std::abs(solved.g_finite().values[i] -
                                             exact.g_finite().values[i]));
    }
  }
  out.require(worst_energy <= 1e-6, "energy relative error " + fmt(worst_energy) + " above 1e-6");
  out.require(worst_g <= 1e-5, "gradient sup error " + fmt(worst_g) + " above 1e-5");
  if (out.ok)
    out.detail = std::to_string(solves) + " solves, worst energy rel " + fmt(worst_energy) +
                 ", worst g sup " + fmt(worst_g);
  out.payload = Json{{"graphs", graphs.size()},
                     {"solves", solves},
                     {"worst_energy_rel", worst_energy},
                     {"worst_g_sup", worst_g}};
  return out;
}

// 3. Hand-derived minimizers on the two- and three-point paths.
Outcome criterion_fixtures() {
  Outcome out;
  struct Fixture {
    std::string name;
    DStructureDescriptor desc;
    std::size_t vertices;
    std::vector<double> u, g_expect;
    double energy_expect;
  };
  const std::vector<Fixture> fixtures = {
      {"P2 graph", DStructureDescriptor::graph(), 2, {0, 1}, {0.5, 0.5}, 0.5},
      {"P3 graph", DStructureDescriptor::graph(), 3, {0, 1, 2},
       {1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0}, 2.0 / 3.0},
      {"P3 hajlasz", DStructureDescriptor::hajlasz(), 3, {0, 1, 2}, {0.5, 0.5, 0.5}, 0.75},
  };
  Json rows = Json::array();
  for (const auto& f : fixtures) {
    const FiniteMetricSpace X = io::make_path(f.vertices);
    const ScalarField u{f.u};
    for (const bool use_oracle : {true, false}) {
      const MinimizationResult r = use_oracle ? kkt_oracle(f.desc, X, u)
                                              : minimal_pseudo_gradient(f.desc, X, u, 2.0);
      const std::string how = use_oracle ? " (oracle)" : " (solver)";
      out.require(std::abs(r.energy - f.energy_expect) <= 1e-6,
                  f.name + how + " energy " + fmt(r.energy));
      for (std::size_t i = 0; i < f.g_expect.size(); ++i)
        out.require(std::abs(r.g_finite().values[i] - f.g_expect[i]) <= 1e-6,
                    f.name + how + " g[" + std::to_string(i) + "]");
      if (use_oracle) rows.push_back(Json{{"name", f.name}, {"result", io::to_json(r)}});
    }
  }
  if (out.ok) out.detail = "3 fixtures, oracle and solver within 1e-6";
  out.payload = std::move(rows);
  return out;
}

// 4. Axioms A1-A5 across all four structures, 100 trials each at seed 42.
Outcome criterion_axioms() {
  Outcome out;
  const FiniteMetricSpace X = io::make_path(4);
  const IntervalGridSpace grid = IntervalGridSpace::uniform(6);
  CheckOptions opts;  // 100 trials, seed 42
  Json rows = Json::array();
  int suites = 0;
  const auto run = [&](const DStructureDescriptor& desc, const auto& model,
                       const std::string& host) {
    for (Axiom a : {Axiom::A1, Axiom::A2, Axiom::A3, Axiom::A4, Axiom::A5}) {
      const CheckReport rep = check_axiom(desc, model, a, opts);
      out.require(rep.passed() && rep.passes == rep.trials,
                  to_string(desc.kind) + "/" + host + " " + rep.property +
                      (rep.witness ? ": " + rep.witness->description : ""));
      rows.push_back(io::to_json(rep));
      ++suites;
    }
  };
  run(DStructureDescriptor::graph(), X, "path4");
  run(DStructureDescriptor::hajlasz(), X, "path4");
  run(DStructureDescriptor::trivial(), X, "path4");
  run(DStructureDescriptor::interval_derivative(), grid, "interval6");
  run(DStructureDescriptor::trivial(), grid, "interval6");
  if (out.ok) out.detail = std::to_string(suites) + " suites, zero witnesses";
  out.payload = std::move(rows);
  return out;
}

// 5. The locality lattice: graph passes L1 only, with re-verifiable
// witnesses for the other six; the derivative structure passes all seven;
// no structure contradicts the implication lattice.
Outcome criterion_locality() {
  Outcome out;
  const FiniteMetricSpace P3 = io::make_path(3);
  const IntervalGridSpace grid = IntervalGridSpace::uniform(6);
  CheckOptions opts;
  Json payload = Json::object();

  const ImplicationAudit graph_audit =
      audit_implications(DStructureDescriptor::graph(), P3, opts);
  for (const auto& rep : graph_audit.locality) {
    if (rep.property == "L1")
      out.require(rep.passed(), "graph L1 failed");
    else
      out.require(!rep.passed() && rep.witness.has_value(),
                  "graph " + rep.property + " produced no witness");
  }
  out.require(graph_audit.consistent, "graph lattice contradiction");
  payload["graph_audit"] = io::to_json(graph_audit);

  // The two-point witnesses, re-verified through solver and membership.
  const FiniteMetricSpace P2 = io::make_path(2);
  const DStructureDescriptor G = DStructureDescriptor::graph();
  const ScalarField u01{{0.0, 1.0}};
  const ScalarField du = kkt_oracle(G, P2, u01).g_finite();
  Json witnesses = Json::array();

  const double l2_margin = du.values[0];  // Du on the constancy set {v0}
  out.require(l2_margin >= 0.1, "L2 witness margin " + fmt(l2_margin));
  witnesses.push_back(Json{{"property", "L2"}, {"margin", l2_margin}});

  const ScalarField lopsided{{1.0, 0.0}};
  out.require(membership(G, P2, u01, lopsided).member, "L5 witness g not a member");
  const double l5_margin = du.values[1] - lopsided.values[1];
  out.require(l5_margin >= 0.1, "L5 witness margin " + fmt(l5_margin));
  witnesses.push_back(Json{{"property", "L5"}, {"margin", l5_margin}});

  const ScalarField u_flat{{0.0, 0.0}}, g_flat{{0.0, 0.0}}, g_half{{0.5, 0.5}};
  out.require(membership(G, P2, u_flat, g_flat).member, "shanmugalingam g1 not a member");
  out.require(membership(G, P2, u01, g_half).member, "shanmugalingam g2 not a member");
  const ScalarField glued{{g_flat.values[0], g_half.values[1]}};  // u1 = u2 on B = {v0}
  const MembershipReport glued_rep = membership(G, P2, u01, glued);
  out.require(!glued_rep.member && glued_rep.worst_violation >= 0.1,
              "shanmugalingam witness margin " + fmt(glued_rep.worst_violation));
  witnesses.push_back(Json{{"property", "shanmugalingam"},
                           {"margin", glued_rep.worst_violation}});
  payload["p2_witnesses"] = std::move(witnesses);

  const ImplicationAudit iv_audit =
      audit_implications(DStructureDescriptor::interval_derivative(), grid, opts);
  for (const auto& rep : iv_audit.locality)
    out.require(rep.passed(), "interval_derivative " + rep.property + " failed");
  out.require(iv_audit.consistent, "interval_derivative lattice contradiction");
  payload["interval_audit"] = io::to_json(iv_audit);

  const std::pair<std::string, ImplicationAudit> others[] = {
      {"hajlasz", audit_implications(DStructureDescriptor::hajlasz(), P3, opts)},
      {"trivial_finite", audit_implications(DStructureDescriptor::trivial(), P3, opts)},
      {"trivial_interval", audit_implications(DStructureDescriptor::trivial(), grid, opts)}};
  for (const auto& [name, audit] : others) {
    out.require(audit.consistent, name + " lattice contradiction");
    payload[name + "_consistent"] = audit.consistent;
  }

  if (out.ok) out.detail = "graph L1-only with witnesses, interval passes seven, no contradictions";
  out.payload = std::move(payload);
  return out;
}

// 6. Calculus rules for the minimal pseudo-gradient on the interval model,
// randomized plus the three stated fixtures.
Outcome criterion_calculus() {
  Outcome out;
  const IntervalGridSpace grid = IntervalGridSpace::uniform(8);
  CheckOptions opts;
  const CheckReport rep =
      check_calculus_Du(DStructureDescriptor::interval_derivative(), grid, opts);
  out.require(rep.passed() && rep.passes == rep.trials,
              "randomized calculus trials failed" +
                  (rep.witness ? ": " + rep.witness->description : ""));

  // Flat piece: u constant at one half on the right half of the interval.
  const IntervalGridSpace halves{{0.0, 0.5, 1.0}};
  const auto u_flat = PiecewisePolyField::from_node_values(halves, {0.0, 0.5, 0.5});
  const CellPolyField du_flat =
      floor_of(DStructureDescriptor::interval_derivative(), u_flat);
  const std::size_t right = du_flat.grid().cell_of(0.75);
  out.require(poly::max_abs_on(du_flat.cell_poly(right), 0.5, 1.0) <= 1e-12,
              "Du survives on the flat piece");

  // Chain rule through the absolute value: slopes become exactly one.
  const auto shifted = field_sub(PiecewisePolyField::coordinate(halves),
                                 PiecewisePolyField::constant(halves, 0.5));
  const CellPolyField d_abs = derivative_magnitude(compose_pl(PiecewiseLinearMap::abs_value(),
                                                              shifted));
  for (std::size_t j = 0; j < d_abs.cell_count(); ++j)
    out.require(poly::max_abs_on(poly::sub(d_abs.cell_poly(j), poly::Poly{1.0}),
                                 d_abs.grid().cell_left(j),
                                 d_abs.grid().cell_right(j)) <= 1e-9,
                "chain rule fixture residual in cell " + std::to_string(j));

  // Leibniz bound: |(x(1-x))'| = |1-2x| never exceeds x + (1-x) = 1.
  const auto x = PiecewisePolyField::coordinate(halves);
  const auto prod = field_mul(x, field_sub(PiecewisePolyField::constant(halves, 1.0), x));
  for (std::size_t j = 0; j < prod.grid().cell_count(); ++j)
    out.require(poly::max_abs_on(poly::derivative(prod.cell_poly(j)),
                                 prod.grid().cell_left(j),
                                 prod.grid().cell_right(j)) <= 1.0 + 1e-12,
                "Leibniz fixture bound in cell " + std::to_string(j));

  if (out.ok) out.detail = "100 randomized trials plus flat/chain/Leibniz fixtures";
  out.payload = io::to_json(rep);
  return out;
}

// 7. Cotangent module suites on the 64-cell grid.
Outcome criterion_cotangent() {
  Outcome out;
  CheckOptions opts;
  opts.trials = 200;
  opts.seed = 7;
  opts.p = 2.0;
  const CotangentModule mod(DStructureDescriptor::interval_derivative(),
                            IntervalGridSpace::uniform(64), opts);
  Json payload = Json::object();
  Json gate = Json::array();
  for (const auto& rep : mod.gate_reports()) gate.push_back(io::to_json(rep));
  payload["gate"] = std::move(gate);

  const CheckReport uniq = mod.uniqueness_audit(opts);
  const CheckReport laws = mod.verify_module_identities(opts);
  const CheckReport closure = mod.closure_suite(opts);
  const CheckReport calc = mod.verify_calculus_d(opts);
  const std::pair<std::string, const CheckReport*> suites[] = {{"uniqueness", &uniq},
                                                               {"module_identities", &laws},
                                                               {"closure_suite", &closure},
                                                               {"calculus_d", &calc}};
  for (const auto& [name, rep] : suites) {
    out.require(rep->passed(),
                name + " failed" + (rep->witness ? ": " + rep->witness->description : ""));
    payload[name] = io::to_json(*rep);
  }
  out.require(closure.trials == 20, "closure suite must run 20 sequences");
  if (out.ok) out.detail = "gate + four suites, 200 trials at seed 7, grid 64";
  out.payload = std::move(payload);
  return out;
}

struct Criterion {
  std::string title;
  double time_limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"counterexample reproduction", 1.0, criterion_counterexample},
      {"solver matches the exact oracle", 60.0, criterion_solver_oracle},
      {"analytic fixtures", 60.0, criterion_fixtures},
      {"axiom suites", 120.0, criterion_axioms},
      {"locality lattice", 120.0, criterion_locality},
      {"calculus rules", 60.0, criterion_calculus},
      {"cotangent module", 60.0, criterion_cotangent},
  };

  bool all_ok = true;
  std::vector<std::string> first_texts;
  Json dump = Json::object();

  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out = criteria[i].run();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > criteria[i].time_limit_s) {
      out.ok = false;
      out.detail += (out.detail.empty() ? "" : "; ") + std::string("runtime ") + fmt(seconds) +
                    " s above the " + fmt(criteria[i].time_limit_s) + " s budget";
    }
    first_texts.push_back(io::payload_text(out.payload));
    dump["criterion_" + std::to_string(i + 1)] = out.payload;
    all_ok = all_ok && out.ok;
    std::cout << (out.ok ? "[PASS] " : "[FAIL] ") << (i + 1) << ". " << criteria[i].title
              << ": " << out.detail << " (" << std::fixed << std::setprecision(2) << seconds
              << " s)" << std::defaultfloat << "\n";
  }

  // 8. Determinism: the full battery repeated must serialize identically.
  {
    const auto start = std::chrono::steady_clock::now();
    bool identical = true;
    for (std::size_t i = 0; i < criteria.size(); ++i)
      identical = identical && io::payload_text(criteria[i].run().payload) == first_texts[i];
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all_ok = all_ok && identical;
    std::cout << (identical ? "[PASS] " : "[FAIL] ") << criteria.size() + 1
              << ". determinism: "
              << (identical ? "repeated runs serialize byte-identically"
                            : "payloads differ between runs")
              << " (" << std::fixed << std::setprecision(2) << seconds << " s)"
              << std::defaultfloat << "\n";
  }

  std::cout << (all_ok ? "acceptance: all criteria passed" : "acceptance: FAILURES above")
            << "\n";
  if (argc > 1) io::write_report_file(argv[1], dump, io::standard_meta());
  return all_ok ? 0 : 1;
}
