#pragma once

#include <functional>

namespace subgauss {

using Fn1D = std::function<double(double)>;

// Adaptive Gauss-Kronrod 7-15 on a finite interval. Splits the worst
// interval until the summed error estimate meets rel_tol (relative to the
// accumulated integral) or abs_tol.
double integrate(const Fn1D& f, double a, double b, double rel_tol = 1e-11,
                 double abs_tol = 0.0, int max_intervals = 4000);

// log of integral of exp(log_f) over [a,b], computed with max-rescaling so
// that sharply peaked integrands (p-th moments with p up to the dimension)
// never overflow. log_f may return -inf.
double log_integral_exp(const Fn1D& log_f, double a, double b,
                        double rel_tol = 1e-11);

// log of the p-th absolute moment of a density given by its log-pdf on
// [a,b]: log of integral of |t|^p exp(log_pdf(t)) dt. Splits at zero.
double log_abs_moment(const Fn1D& log_pdf, double a, double b, double p,
                      double rel_tol = 1e-11);

// (integral of |t|^p pdf)^{1/p}.
double lp_norm_from_density(const Fn1D& log_pdf, double a, double b, double p,
                            double rel_tol = 1e-11);

// Standard normal upper tail P(N > x).
double normal_upper_tail(double x);

// Digamma function, series with recurrence (used by test oracles).
double digamma(double x);

}  // namespace subgauss
