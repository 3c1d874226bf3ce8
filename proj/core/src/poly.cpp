#include "dstruct/poly.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace dstruct::poly {

namespace {

// 15-point Gauss-Legendre rule on [-1, 1]; exact through degree 29.
constexpr int kGlPoints = 15;
constexpr double kGlNode[kGlPoints] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0,                 0.2011940939974345,
    0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGlWeight[kGlPoints] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

double gl15(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < kGlPoints; ++i) s += kGlWeight[i] * f(mid + half * kGlNode[i]);
  return s * half;
}

double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                   double whole, double rel_tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl15(f, a, mid), right = gl15(f, mid, b);
  const double refined = left + right;
  if (depth <= 0 || std::abs(refined - whole) <= rel_tol * std::abs(refined) + 1e-300)
    return refined;
  return adaptive_gl(f, a, mid, left, rel_tol, depth - 1) +
         adaptive_gl(f, mid, b, right, rel_tol, depth - 1);
}

// Bisection on a monotone bracket; lo/hi need not be ordered by sign.
double bisect_root(const Poly& q, double lo, double hi) {
  double flo = eval(q, lo), fhi = eval(q, hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi), fm = eval(q, mid);
    if (fm == 0.0) return mid;
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double eval(const Poly& q, double x) {
  double v = 0.0;
  for (std::size_t i = q.size(); i-- > 0;) v = v * x + q[i];
  return v;
}

int degree(const Poly& q) {
  for (std::size_t i = q.size(); i-- > 0;)
    if (q[i] != 0.0) return static_cast<int>(i);
  return -1;
}

Poly trimmed(Poly q, double eps) {
  double mx = 0.0;
  for (double c : q) mx = std::max(mx, std::abs(c));
  const double cut = mx * eps;
  while (!q.empty() && std::abs(q.back()) <= cut) q.pop_back();
  return q;
}

bool is_zero(const Poly& q, double tol) {
  for (double c : q)
    if (std::abs(c) > tol) return false;
  return true;
}

Poly add(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return r;
}

Poly sub(const Poly& a, const Poly& b) { return add(a, scale(b, -1.0)); }

Poly scale(const Poly& a, double s) {
  Poly r = a;
  for (double& c : r) c *= s;
  return r;
}

Poly mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly pow(const Poly& a, int k) {
  if (k < 0) throw std::invalid_argument("poly::pow: negative exponent");
  Poly r{1.0};
  for (int i = 0; i < k; ++i) r = mul(r, a);
  return r;
}

Poly derivative(const Poly& q) {
  if (q.size() <= 1) return {};
  Poly r(q.size() - 1);
  for (std::size_t i = 1; i < q.size(); ++i) r[i - 1] = q[i] * static_cast<double>(i);
  return r;
}

Poly antiderivative(const Poly& q) {
  Poly r(q.size() + 1, 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) r[i + 1] = q[i] / static_cast<double>(i + 1);
  return r;
}

double integral(const Poly& q, double a, double b) {
  const Poly F = antiderivative(q);
  return eval(F, b) - eval(F, a);
}

std::vector<double> real_roots(const Poly& q, double a, double b) {
  const Poly t = trimmed(q);
  const int deg = degree(t);
  std::vector<double> roots;
  if (deg <= 0) return roots;
  if (deg == 1) {
    const double r = -t[0] / t[1];
    if (r >= a && r <= b) roots.push_back(r);
    return roots;
  }
  // Critical points split [a, b] into monotone brackets.
  std::vector<double> knots = real_roots(derivative(t), a, b);
  knots.insert(knots.begin(), a);
  knots.push_back(b);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double lo = knots[i], hi = knots[i + 1];
    if (hi <= lo) continue;
    const double flo = eval(t, lo), fhi = eval(t, hi);
    if (flo == 0.0) roots.push_back(lo);
    if ((flo < 0.0) != (fhi < 0.0) && flo != 0.0 && fhi != 0.0)
      roots.push_back(bisect_root(t, lo, hi));
  }
  if (eval(t, b) == 0.0) roots.push_back(b);
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-13; }),
              roots.end());
  return roots;
}

double min_on(const Poly& q, double a, double b) {
  double m = std::min(eval(q, a), eval(q, b));
  for (double r : real_roots(derivative(q), a, b)) m = std::min(m, eval(q, r));
  return m;
}

double max_on(const Poly& q, double a, double b) {
  double m = std::max(eval(q, a), eval(q, b));
  for (double r : real_roots(derivative(q), a, b)) m = std::max(m, eval(q, r));
  return m;
}

double max_abs_on(const Poly& q, double a, double b) {
  return std::max(std::abs(min_on(q, a, b)), std::abs(max_on(q, a, b)));
}

double integral_abs_pow(const Poly& q, double a, double b, double p) {
  if (b <= a) return 0.0;
  if (p < 1.0) throw std::invalid_argument("integral_abs_pow: p must be >= 1");
  if (is_zero(q)) return 0.0;
  const bool integer_p = std::abs(p - std::round(p)) < 1e-12;
  const int ip = static_cast<int>(std::round(p));
  if (integer_p && ip % 2 == 0) return integral(pow(q, ip), a, b);

  std::vector<double> cuts = real_roots(q, a, b);
  cuts.insert(cuts.begin(), a);
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (hi - lo < 1e-15) continue;
    const double sgn = eval(q, 0.5 * (lo + hi)) >= 0.0 ? 1.0 : -1.0;
    if (integer_p) {
      // On a sign-constant piece |q|^p = sgn^p q^p, and p is odd here.
      total += sgn * integral(pow(q, ip), lo, hi);
    } else {
      auto f = [&](double x) { return std::pow(std::abs(eval(q, x)), p); };
      total += adaptive_gl(f, lo, hi, gl15(f, lo, hi), 1e-10, 30);
    }
  }
  return total;
}

}  // namespace dstruct::poly
