#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "dstruct/io.hpp"

using namespace dstruct;
using io::Json;

namespace {

std::string verdict_text(const CheckReport& rep) {
  return rep.passed() ? "holds_on_sample" : "fails_with_witness";
}

void print_report(const CheckReport& rep) {
  std::cout << std::left << std::setw(22) << rep.property << std::right << std::setw(7)
            << rep.trials << std::setw(8) << rep.passes << "  " << verdict_text(rep) << "\n";
  if (rep.witness)
    std::cout << "  witness (trial " << rep.witness->trial << ", margin " << std::scientific
              << std::setprecision(3) << rep.witness->margin << std::defaultfloat
              << "): " << rep.witness->description << "\n";
  if (!rep.note.empty()) std::cout << "  note: " << rep.note << "\n";
}

void print_header() {
  std::cout << std::left << std::setw(22) << "property" << std::right << std::setw(7) << "trials"
            << std::setw(8) << "passes" << "  verdict\n";
}

void maybe_write(const std::string& out, const Json& payload) {
  if (out.empty()) return;
  io::write_report_file(out, payload, io::standard_meta());
  std::cout << "report written to " << out << "\n";
}

CellSet parse_subset(const std::string& csv, std::size_t limit) {
  std::vector<std::size_t> idx;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const unsigned long v = std::stoul(item, &pos);
    if (pos != item.size()) throw std::invalid_argument("subset entry \"" + item + "\" is not an index");
    if (v >= limit)
      throw std::invalid_argument("subset index " + item + " is out of range (limit " +
                                  std::to_string(limit) + ")");
    idx.push_back(v);
  }
  if (idx.empty()) throw std::invalid_argument("subset must list at least one index");
  return CellSet::of(std::move(idx));
}

std::size_t space_units(const io::AnySpace& space) {
  if (const auto* X = std::get_if<FiniteMetricSpace>(&space)) return X->size();
  return std::get<IntervalGridSpace>(space).cell_count();
}

struct CommonArgs {
  std::string space_path, function_path, structure = "graph", out;
  double p = 2.0;
  double tol = kMembershipTol;
  int trials = 100;
  std::uint64_t seed = 42;

  DStructureDescriptor descriptor() const {
    return io::descriptor_from_json(Json{{"kind", structure}});
  }
  CheckOptions check_options() const {
    CheckOptions o;
    o.trials = trials;
    o.seed = seed;
    o.p = p;
    o.tol = tol;
    return o;
  }
  Json config(const std::string& subcommand) const {
    Json j{{"subcommand", subcommand}, {"structure", structure}, {"p", p}, {"tol", tol},
           {"trials", trials}, {"seed", seed}};
    if (!space_path.empty()) j["space"] = space_path;
    if (!function_path.empty()) j["function"] = function_path;
    return j;
  }
};

int run_minimize(const CommonArgs& a) {
  const io::AnySpace space = io::space_from_json(io::read_json_file(a.space_path));
  const Json fj = io::read_json_file(a.function_path);
  SolveOptions sopts;
  sopts.tol = a.tol;
  sopts.seed = a.seed;
  const DStructureDescriptor desc = a.descriptor();
  MinimizationResult result =
      std::holds_alternative<FiniteMetricSpace>(space)
          ? minimal_pseudo_gradient(desc, std::get<FiniteMetricSpace>(space),
                                    io::scalar_field_from_json(fj, space_units(space)), a.p, sopts)
          : minimal_pseudo_gradient(
                desc, io::poly_field_from_json(fj, std::get<IntervalGridSpace>(space)), a.p,
                sopts);

  std::cout << std::left << std::setw(18) << "energy" << std::setprecision(12) << result.energy
            << "\n"
            << std::setw(18) << "iterations" << result.iterations << "\n"
            << std::setw(18) << "primal_residual" << result.primal_residual << "\n"
            << std::setw(18) << "dual_gap" << result.dual_gap << "\n"
            << std::setw(18) << "converged" << (result.converged ? "yes" : "no") << "\n";
  Json payload{{"config", a.config("minimize")}, {"result", io::to_json(result)}};
  maybe_write(a.out, payload);
  return result.converged ? 0 : 1;
}

int run_energy(const CommonArgs& a, const std::string& subset_csv) {
  const io::AnySpace space = io::space_from_json(io::read_json_file(a.space_path));
  const Json fj = io::read_json_file(a.function_path);
  const DStructureDescriptor desc = a.descriptor();
  const std::size_t units = space_units(space);
  CellSet B;
  if (subset_csv.empty()) {
    for (std::size_t i = 0; i < units; ++i) B.indices.push_back(i);
  } else {
    B = parse_subset(subset_csv, units);
  }
  SolveOptions sopts;
  sopts.tol = a.tol;
  const double value =
      std::holds_alternative<FiniteMetricSpace>(space)
          ? dirichlet_energy(desc, std::get<FiniteMetricSpace>(space),
                             io::scalar_field_from_json(fj, units), a.p, B, sopts)
          : dirichlet_energy(desc,
                             io::poly_field_from_json(fj, std::get<IntervalGridSpace>(space)),
                             a.p, B, sopts);
  std::cout << std::left << std::setw(18) << "energy" << std::setprecision(12) << value << "\n";
  Json config = a.config("energy");
  config["subset"] = B.indices;
  maybe_write(a.out, Json{{"config", config}, {"energy", value}});
  return 0;
}

int run_check(const CommonArgs& a, const std::string& prop) {
  const io::AnySpace space = io::space_from_json(io::read_json_file(a.space_path));
  const DStructureDescriptor desc = a.descriptor();
  const CheckOptions opts = a.check_options();

  std::optional<Axiom> axiom;
  std::optional<LocalityProperty> locality;
  try {
    axiom = axiom_from_string(prop);
  } catch (const std::invalid_argument&) {
    locality = locality_from_string(prop);  // throws for unknown names
  }

  const CheckReport rep = std::visit(
      [&](const auto& model) {
        return axiom ? check_axiom(desc, model, *axiom, opts)
                     : check_locality(desc, model, *locality, opts);
      },
      space);

  print_header();
  print_report(rep);
  Json config = a.config("check");
  config["prop"] = prop;
  maybe_write(a.out, Json{{"config", config}, {"report", io::to_json(rep)}});
  return rep.passed() ? 0 : 1;
}

int run_audit(const CommonArgs& a) {
  const io::AnySpace space = io::space_from_json(io::read_json_file(a.space_path));
  const DStructureDescriptor desc = a.descriptor();
  const ImplicationAudit audit = std::visit(
      [&](const auto& model) { return audit_implications(desc, model, a.check_options()); },
      space);

  print_header();
  for (const auto& rep : audit.locality) print_report(rep);
  for (const auto& e : audit.entries)
    if (e.contradiction) {
      std::string premises;
      for (const auto& p : e.premises) premises += (premises.empty() ? "" : ", ") + p;
      std::cout << "contradiction: {" << premises << "} held but " << e.conclusion
                << " failed\n";
    }
  std::cout << "lattice " << (audit.consistent ? "consistent" : "CONTRADICTED") << "\n";
  maybe_write(a.out, Json{{"config", a.config("audit")}, {"audit", io::to_json(audit)}});
  return audit.consistent ? 0 : 1;
}

int run_cotangent_verify(const CommonArgs& a, std::size_t grid_cells) {
  const IntervalGridSpace grid = IntervalGridSpace::uniform(grid_cells);
  const DStructureDescriptor desc = a.descriptor();
  const CheckOptions opts = a.check_options();

  // Run the locality gate separately first so a non-local structure still
  // produces a full report instead of a bare error.
  std::vector<CheckReport> gate;
  for (LocalityProperty prop :
       {LocalityProperty::L1, LocalityProperty::L2, LocalityProperty::L3, LocalityProperty::L4,
        LocalityProperty::L5, LocalityProperty::timoshin, LocalityProperty::shanmugalingam})
    gate.push_back(check_locality(desc, grid, prop, opts));

  print_header();
  Json gate_json = Json::array();
  bool gate_ok = true;
  for (const auto& rep : gate) {
    print_report(rep);
    gate_json.push_back(io::to_json(rep));
    gate_ok = gate_ok && rep.passed();
  }
  Json config = a.config("cotangent verify");
  config["grid"] = grid_cells;
  if (!gate_ok) {
    std::cout << "structure is not pointwise local; module suites skipped\n";
    maybe_write(a.out, Json{{"config", config}, {"gate", gate_json}});
    return 1;
  }

  const CotangentModule mod(desc, grid, opts);
  const CheckReport uniqueness = mod.uniqueness_audit(opts);
  const CheckReport identities = mod.verify_module_identities(opts);
  const CheckReport closure = mod.closure_suite(opts);
  const CheckReport calculus = mod.verify_calculus_d(opts);
  bool all = true;
  for (const auto& rep : {uniqueness, identities, closure, calculus}) {
    print_report(rep);
    all = all && rep.passed();
  }
  maybe_write(a.out, Json{{"config", config},
                          {"gate", gate_json},
                          {"uniqueness", io::to_json(uniqueness)},
                          {"module_identities", io::to_json(identities)},
                          {"closure_suite", io::to_json(closure)},
                          {"calculus_d", io::to_json(calculus)}});
  return all ? 0 : 1;
}

int run_repro(const CommonArgs& a, const std::string& target, std::size_t vertices) {
  if (target != "l1-not-l2")
    throw std::invalid_argument("unknown reproduction target \"" + target + "\"");
  const CheckReport rep = reproduce_counterexample(a.p, vertices);
  print_header();
  print_report(rep);
  for (const auto& [name, value] : rep.metrics)
    std::cout << "  " << std::left << std::setw(26) << name << std::setprecision(12) << value
              << "\n";
  Json config = a.config("repro");
  config["target"] = target;
  config["vertices"] = vertices;
  maybe_write(a.out, Json{{"config", config}, {"report", io::to_json(rep)}});
  return rep.passed() ? 0 : 1;
}

struct GenerateArgs {
  std::string kind = "path", out;
  std::size_t n = 5, rows = 2, cols = 2, cells = 8;
  double radius = 0.5;
  std::uint64_t seed = 42;
};

int run_generate(const GenerateArgs& g) {
  Json doc;
  if (g.kind == "path") doc = io::to_json(io::make_path(g.n));
  else if (g.kind == "cycle") doc = io::to_json(io::make_cycle(g.n));
  else if (g.kind == "star") doc = io::to_json(io::make_star(g.n));
  else if (g.kind == "complete") doc = io::to_json(io::make_complete(g.n));
  else if (g.kind == "grid") doc = io::to_json(io::make_grid(g.rows, g.cols));
  else if (g.kind == "random_geometric")
    doc = io::to_json(io::make_random_geometric(g.n, g.radius, g.seed));
  else if (g.kind == "interval") doc = io::to_json(IntervalGridSpace::uniform(g.cells));
  else throw std::invalid_argument("unknown space kind \"" + g.kind + "\"");
  io::write_json_file(g.out, doc);
  std::cout << "wrote " << g.out << " (kind=" << doc.at("kind").get<std::string>() << ")\n";
  return 0;
}

void add_common(CLI::App* cmd, CommonArgs& a, bool with_space, bool with_function) {
  if (with_space) cmd->add_option("--space", a.space_path, "Space JSON file")->required();
  if (with_function)
    cmd->add_option("--function", a.function_path, "Field JSON file")->required();
  cmd->add_option("--structure", a.structure, "graph|hajlasz|interval_derivative|trivial");
  cmd->add_option("--p", a.p, "Energy exponent in (1, infinity)");
  cmd->add_option("--tol", a.tol, "Membership / solver tolerance");
  cmd->add_option("--trials", a.trials, "Randomized trials");
  cmd->add_option("--seed", a.seed, "Seed for randomized trials");
  cmd->add_option("--out", a.out, "Write the report JSON here");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sobolev D-structures: solvers, axiom checks, cotangent module"};
  app.require_subcommand(1);
  int code = 0;

  CommonArgs margs;
  auto* minimize = app.add_subcommand("minimize", "Minimal pseudo-gradient of a function");
  add_common(minimize, margs, true, true);
  minimize->callback([&] { code = run_minimize(margs); });

  CommonArgs eargs;
  std::string subset;
  auto* energy = app.add_subcommand("energy", "Restricted p-energy over a subset");
  add_common(energy, eargs, true, true);
  energy->add_option("--subset", subset, "Comma separated point/cell indices (default: all)");
  energy->callback([&] { code = run_energy(eargs, subset); });

  CommonArgs cargs;
  std::string prop = "A1";
  auto* check = app.add_subcommand("check", "Run one axiom or locality property");
  add_common(check, cargs, true, false);
  check->add_option("--prop", prop, "A1..A5, L1..L5, timoshin, shanmugalingam")->required();
  check->callback([&] { code = run_check(cargs, prop); });

  CommonArgs aargs;
  auto* audit = app.add_subcommand("audit", "All locality properties plus the implication lattice");
  add_common(audit, aargs, true, false);
  audit->callback([&] { code = run_audit(aargs); });

  CommonArgs vargs;
  vargs.structure = "interval_derivative";
  std::size_t grid_cells = 64;
  auto* cot = app.add_subcommand("cotangent", "Cotangent module suites");
  cot->require_subcommand(1);
  auto* verify = cot->add_subcommand("verify", "Gate, audits, closure, calculus");
  add_common(verify, vargs, false, false);
  verify->add_option("--grid", grid_cells, "Uniform grid cell count");
  verify->callback([&] { code = run_cotangent_verify(vargs, grid_cells); });

  CommonArgs rargs;
  std::string target;
  std::size_t vertices = 2;
  auto* repro = app.add_subcommand("repro", "Reproduce a stored counterexample");
  repro->add_option("target", target, "Counterexample name (l1-not-l2)")->required();
  repro->add_option("--p", rargs.p, "Energy exponent");
  repro->add_option("--vertices", vertices, "Path graph size");
  repro->add_option("--out", rargs.out, "Write the report JSON here");
  repro->callback([&] { code = run_repro(rargs, target, vertices); });

  GenerateArgs gargs;
  auto* generate = app.add_subcommand("generate", "Write a space JSON file");
  generate->add_option("--kind", gargs.kind,
                       "path|cycle|star|complete|grid|random_geometric|interval");
  generate->add_option("--n", gargs.n, "Vertex count");
  generate->add_option("--rows", gargs.rows, "Grid rows");
  generate->add_option("--cols", gargs.cols, "Grid columns");
  generate->add_option("--radius", gargs.radius, "Connection radius");
  generate->add_option("--seed", gargs.seed, "Seed for random placements");
  generate->add_option("--cells", gargs.cells, "Interval cell count");
  generate->add_option("--out", gargs.out, "Output path")->required();
  generate->callback([&] { code = run_generate(gargs); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // help exits clean, everything else is a config error
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return code;
}
