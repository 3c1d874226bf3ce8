#pragma once

#include <vector>

namespace dstruct::poly {

// Dense univariate polynomial, coefficients in ascending degree order.
// The empty vector is the zero polynomial.
using Poly = std::vector<double>;

// Degrees above this are rejected by the interval-model field types; products
// and powers used by the calculus checks stay well below it.
inline constexpr int kMaxDegree = 8;

double eval(const Poly& q, double x);
int degree(const Poly& q);

// Drops trailing coefficients with |c| <= eps relative to the largest |c|.
Poly trimmed(Poly q, double eps = 1e-14);
bool is_zero(const Poly& q, double tol = 1e-14);

Poly add(const Poly& a, const Poly& b);
Poly sub(const Poly& a, const Poly& b);
Poly scale(const Poly& a, double s);
Poly mul(const Poly& a, const Poly& b);
Poly pow(const Poly& a, int k);
Poly derivative(const Poly& q);
Poly antiderivative(const Poly& q);

// Exact integral over [a, b].
double integral(const Poly& q, double a, double b);

// q(r) = 0 with a <= r <= b, ascending, deduplicated.  The zero polynomial
// yields no roots; callers must test is_zero first when that case matters.
std::vector<double> real_roots(const Poly& q, double a, double b);

double min_on(const Poly& q, double a, double b);
double max_on(const Poly& q, double a, double b);
double max_abs_on(const Poly& q, double a, double b);

// Integral of |q|^p over [a, b] for p >= 1.  Exact for even integer p;
// otherwise the interval is split at the roots of q and each signed piece is
// integrated by adaptive Gauss-Legendre to relative tolerance 1e-10 (exact in
// practice for integer p, where the integrand is again a polynomial).
double integral_abs_pow(const Poly& q, double a, double b, double p);

}  // namespace dstruct::poly
