#include "dstruct/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dstruct {

namespace {

struct Row {
  std::vector<std::pair<std::size_t, double>> support;
  double bound;
};

struct AscentOut {
  std::vector<double> g;
  double energy;
  int iterations;
  double primal_residual;
  double dual_gap;
  bool converged;
};

double energy_of(const std::vector<double>& g, const std::vector<double>& w, double p) {
  double e = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) e += w[x] * std::pow(g[x], p);
  return e;
}

// Raises single coordinates until every row holds exactly; increasing g never
// breaks a satisfied row, so one pass suffices.
void make_feasible(std::vector<double>& g, const std::vector<Row>& rows,
                   const std::vector<double>& w, double p) {
  for (const auto& row : rows) {
    double lhs = 0.0;
    for (const auto& [x, a] : row.support) lhs += a * g[x];
    if (lhs >= row.bound) continue;
    const double needed = row.bound - lhs;
    std::size_t best = row.support.front().first;
    double best_cost = -1.0, best_delta = 0.0;
    for (const auto& [x, a] : row.support) {
      const double delta = needed / a;
      const double cost = w[x] * (std::pow(g[x] + delta, p) - std::pow(g[x], p));
      if (best_cost < 0.0 || cost < best_cost) {
        best_cost = cost;
        best = x;
        best_delta = delta;
      }
    }
    g[best] += best_delta;
  }
}

AscentOut dual_ascent(const std::vector<Row>& all_rows, const std::vector<double>& w, double p,
                      const SolveOptions& opts) {
  const std::size_t n = w.size();
  std::vector<Row> rows;
  double max_bound = 0.0;
  for (const auto& r : all_rows)
    if (r.bound > 0.0) {
      if (r.support.empty()) throw std::runtime_error("infeasible constraint with empty support");
      rows.push_back(r);
      max_bound = std::max(max_bound, r.bound);
    }
  AscentOut out{std::vector<double>(n, 0.0), 0.0, 0, 0.0, 0.0, true};
  if (rows.empty()) return out;

  // Step scale from the dual Hessian bound: row sums of A diag(1/(2w)) A^T.
  double row_sum_max = 0.0;
  {
    std::vector<double> col_sum(n, 0.0);
    for (const auto& r : rows)
      for (const auto& [x, a] : r.support) col_sum[x] += a;
    for (const auto& r : rows) {
      double s = 0.0;
      for (const auto& [x, a] : r.support) s += a * col_sum[x] / (2.0 * w[x]);
      row_sum_max = std::max(row_sum_max, s);
    }
  }
  const double c = 1.0 / row_sum_max;
  const double inv_exp = 1.0 / (p - 1.0);

  std::vector<double> lambda(rows.size(), 0.0), t(n, 0.0), g(n, 0.0), r(rows.size(), 0.0);
  const auto primal_from_dual = [&] {
    for (std::size_t x = 0; x < n; ++x) {
      const double num = std::max(0.0, t[x]) / (p * w[x]);
      g[x] = p == 2.0 ? num : std::pow(num, inv_exp);
    }
  };
  const auto residuals = [&] {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double lhs = 0.0;
      for (const auto& [x, a] : rows[i].support) lhs += a * g[x];
      r[i] = rows[i].bound - lhs;
    }
  };

  double prev_energy = -1.0;
  int k = 0;
  for (k = 1; k <= opts.max_iter; ++k) {
    primal_from_dual();
    residuals();
    const double alpha = c / std::sqrt(static_cast<double>(k));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double next = std::max(0.0, lambda[i] + alpha * r[i]);
      const double delta = next - lambda[i];
      if (delta != 0.0) {
        lambda[i] = next;
        for (const auto& [x, a] : rows[i].support) t[x] += delta * a;
      }
    }
    if (k % 100 == 0) {
      primal_from_dual();
      residuals();
      double viol = 0.0;
      for (double ri : r) viol = std::max(viol, ri);
      const double energy = energy_of(g, w, p);
      const double stall = std::abs(energy - prev_energy) / std::max(energy, 1e-12);
      if (viol <= opts.tol * (1.0 + max_bound) && prev_energy >= 0.0 && stall <= opts.tol) {
        out.dual_gap = stall;
        break;
      }
      prev_energy = energy;
    }
  }
  out.converged = k <= opts.max_iter;
  out.iterations = std::min(k, opts.max_iter);

  primal_from_dual();
  make_feasible(g, rows, w, p);
  residuals();
  for (double ri : r) out.primal_residual = std::max(out.primal_residual, ri);
  out.energy = energy_of(g, w, p);
  out.g = std::move(g);
  return out;
}

std::vector<Row> rows_of(const LinearConstraintsBody& body) {
  std::vector<Row> rows;
  rows.reserve(body.constraints.size());
  for (const auto& c : body.constraints) rows.push_back(Row{c.support, c.bound});
  return rows;
}

void require_solver_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw std::invalid_argument("minimization needs p in (1, inf)");
}

double floor_energy(const FiniteMetricSpace& X, const ScalarField& floor, double p) {
  double e = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i)
    e += X.w(i) * std::pow(std::abs(floor.values[i]), p);
  return e;
}

double floor_energy(const CellPolyField& floor, double p) {
  double e = 0.0;
  for (std::size_t j = 0; j < floor.cell_count(); ++j)
    e += poly::integral_abs_pow(floor.cell_poly(j), floor.grid().cell_left(j),
                                floor.grid().cell_right(j), p);
  return e;
}

// Dense symmetric solve with partial pivoting; nullopt when singular.
std::optional<std::vector<double>> solve_dense(std::vector<std::vector<double>> K,
                                               std::vector<double> rhs) {
  const std::size_t m = rhs.size();
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r2 = col + 1; r2 < m; ++r2)
      if (std::abs(K[r2][col]) > std::abs(K[piv][col])) piv = r2;
    if (std::abs(K[piv][col]) < 1e-12) return std::nullopt;
    std::swap(K[piv], K[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r2 = col + 1; r2 < m; ++r2) {
      const double f = K[r2][col] / K[col][col];
      if (f == 0.0) continue;
      for (std::size_t c2 = col; c2 < m; ++c2) K[r2][c2] -= f * K[col][c2];
      rhs[r2] -= f * rhs[col];
    }
  }
  std::vector<double> x(m);
  for (std::size_t row = m; row-- > 0;) {
    double s = rhs[row];
    for (std::size_t c2 = row + 1; c2 < m; ++c2) s -= K[row][c2] * x[c2];
    x[row] = s / K[row][row];
  }
  return x;
}

}  // namespace

MinimizationResult minimal_pseudo_gradient(const DStructureDescriptor& desc,
                                           const FiniteMetricSpace& X, const ScalarField& u,
                                           double p, const SolveOptions& opts) {
  require_solver_p(p);
  const ConvexGradientBody body = describe(desc, X, u);
  if (const auto* fb = std::get_if<PointwiseFloorBody>(&body)) {
    const auto& floor = std::get<ScalarField>(fb->floor);
    return MinimizationResult{floor, floor_energy(X, floor, p), 0, 0.0, 0.0, true};
  }
  AscentOut out = dual_ascent(rows_of(std::get<LinearConstraintsBody>(body)), X.weights, p, opts);
  return MinimizationResult{ScalarField{std::move(out.g)}, out.energy,       out.iterations,
                            out.primal_residual,           out.dual_gap,     out.converged};
}

MinimizationResult minimal_pseudo_gradient(const DStructureDescriptor& desc,
                                           const PiecewisePolyField& u, double p,
                                           const SolveOptions&) {
  require_solver_p(p);
  const ConvexGradientBody body = describe(desc, u);
  const auto& floor = std::get<CellPolyField>(std::get<PointwiseFloorBody>(body).floor);
  return MinimizationResult{floor, floor_energy(floor, p), 0, 0.0, 0.0, true};
}

MinimizationResult kkt_oracle(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                              const ScalarField& u, double p) {
  if (p != 2.0) throw std::invalid_argument("kkt_oracle supports p = 2 only");
  const ConvexGradientBody body = describe(desc, X, u);
  if (const auto* fb = std::get_if<PointwiseFloorBody>(&body)) {
    const auto& floor = std::get<ScalarField>(fb->floor);
    return MinimizationResult{floor, floor_energy(X, floor, 2.0), 0, 0.0, 0.0, true};
  }
  std::vector<Row> rows = rows_of(std::get<LinearConstraintsBody>(body));
  std::erase_if(rows, [](const Row& r) { return r.bound <= 0.0; });
  const std::size_t m = rows.size(), n = X.size();
  if (m > 12) throw std::invalid_argument("kkt_oracle supports at most 12 active constraints");

  std::vector<double> best_g(n, 0.0);
  double best_e = m == 0 ? 0.0 : -1.0;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<std::size_t> S;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) S.push_back(i);
    // K = A_S diag(1/(2w)) A_S^T, and K lambda = b_S at stationarity.
    std::vector<std::vector<double>> K(S.size(), std::vector<double>(S.size(), 0.0));
    std::vector<double> rhs(S.size());
    for (std::size_t a = 0; a < S.size(); ++a) {
      rhs[a] = rows[S[a]].bound;
      for (std::size_t b = 0; b < S.size(); ++b)
        for (const auto& [xi, ci] : rows[S[a]].support)
          for (const auto& [xj, cj] : rows[S[b]].support)
            if (xi == xj) K[a][b] += ci * cj / (2.0 * X.w(xi));
    }
    const auto lam = solve_dense(K, rhs);
    if (!lam) continue;
    if (std::any_of(lam->begin(), lam->end(), [](double v) { return v < -1e-10; })) continue;
    std::vector<double> g(n, 0.0);
    for (std::size_t a = 0; a < S.size(); ++a)
      for (const auto& [x, cx] : rows[S[a]].support)
        g[x] += std::max(0.0, (*lam)[a]) * cx / (2.0 * X.w(x));
    bool feasible = true;
    for (const auto& row : rows) {
      double lhs = 0.0;
      for (const auto& [x, a] : row.support) lhs += a * g[x];
      if (lhs < row.bound - 1e-9) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    const double e = energy_of(g, X.weights, 2.0);
    if (best_e < 0.0 || e < best_e) {
      best_e = e;
      best_g = std::move(g);
    }
  }
  if (best_e < 0.0) throw std::runtime_error("kkt_oracle found no feasible stationary point");
  return MinimizationResult{ScalarField{std::move(best_g)}, best_e, 0, 0.0, 0.0, true};
}

double dirichlet_energy(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                        const ScalarField& u, double p, const CellSet& B,
                        const SolveOptions& opts) {
  require_solver_p(p);
  for (std::size_t i : B.indices)
    if (i >= X.size()) throw std::invalid_argument("restriction set index out of range");
  const ConvexGradientBody body = describe(desc, X, u);
  if (const auto* fb = std::get_if<PointwiseFloorBody>(&body)) {
    const auto& floor = std::get<ScalarField>(fb->floor);
    double e = 0.0;
    for (std::size_t i : B.indices) e += X.w(i) * std::pow(std::abs(floor.values[i]), p);
    return e;
  }
  // Re-index the rows fully supported in B onto B's coordinates.
  std::vector<std::size_t> to_local(X.size(), static_cast<std::size_t>(-1));
  std::vector<double> wB;
  for (std::size_t k = 0; k < B.indices.size(); ++k) {
    to_local[B.indices[k]] = k;
    wB.push_back(X.w(B.indices[k]));
  }
  std::vector<Row> reduced;
  for (const auto& c : std::get<LinearConstraintsBody>(body).constraints) {
    Row r;
    r.bound = c.bound;
    bool inside = true;
    for (const auto& [x, a] : c.support) {
      if (to_local[x] == static_cast<std::size_t>(-1)) {
        inside = false;
        break;
      }
      r.support.emplace_back(to_local[x], a);
    }
    if (inside) reduced.push_back(std::move(r));
  }
  return dual_ascent(reduced, wB, p, opts).energy;
}

double dirichlet_energy(const DStructureDescriptor& desc, const PiecewisePolyField& u, double p,
                        const CellSet& B_cells, const SolveOptions&) {
  require_solver_p(p);
  for (std::size_t j : B_cells.indices)
    if (j >= u.grid().cell_count()) throw std::invalid_argument("restriction cell out of range");
  const ConvexGradientBody body = describe(desc, u);
  const auto& floor = std::get<CellPolyField>(std::get<PointwiseFloorBody>(body).floor);
  double e = 0.0;
  for (std::size_t j = 0; j < floor.cell_count(); ++j) {
    const double mid = 0.5 * (floor.grid().cell_left(j) + floor.grid().cell_right(j));
    if (!B_cells.contains(u.grid().cell_of(mid))) continue;
    e += poly::integral_abs_pow(floor.cell_poly(j), floor.grid().cell_left(j),
                                floor.grid().cell_right(j), p);
  }
  return e;
}

double sobolev_norm(const DStructureDescriptor& desc, const FiniteMetricSpace& X,
                    const ScalarField& u, double p, const SolveOptions& opts) {
  const double lp = lp_norm(X, u, p);
  const double energy = minimal_pseudo_gradient(desc, X, u, p, opts).energy;
  return std::pow(std::pow(lp, p) + energy, 1.0 / p);
}

double sobolev_norm(const DStructureDescriptor& desc, const PiecewisePolyField& u, double p,
                    const SolveOptions& opts) {
  const double lp = lp_norm(u, p);
  const double energy = minimal_pseudo_gradient(desc, u, p, opts).energy;
  return std::pow(std::pow(lp, p) + energy, 1.0 / p);
}

}  // namespace dstruct
