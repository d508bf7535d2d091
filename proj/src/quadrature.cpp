#include "subgauss/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "subgauss/errors.hpp"

namespace subgauss {

namespace {

// QUADPACK dqk15 nodes and weights.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

Interval gk15(const Fn1D& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        resk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    Interval out;
    out.a = a;
    out.b = b;
    out.value = resk * h;
    out.error = std::abs((resk - resg) * h);
    return out;
}

}  // namespace

double integrate(const Fn1D& f, double a, double b, double rel_tol,
                 double abs_tol, int max_intervals) {
    if (!(a < b)) {
        if (a == b) return 0.0;
        throw InvalidParam("integrate: empty interval");
    }
    std::priority_queue<Interval> heap;
    heap.push(gk15(f, a, b));
    double total = heap.top().value;
    double err = heap.top().error;
    int n = 1;
    while (n < max_intervals) {
        const double goal = std::max(abs_tol, rel_tol * std::abs(total));
        if (err <= goal) break;
        Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // fp exhausted
            heap.push(worst);
            break;
        }
        Interval left = gk15(f, worst.a, mid);
        Interval right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n;
    }
    return total;
}

double log_integral_exp(const Fn1D& log_f, double a, double b, double rel_tol) {
    if (!(a < b)) throw InvalidParam("log_integral_exp: empty interval");
    // Locate the scale by a scan; the grid only needs to find the order of
    // magnitude, the adaptive pass does the accurate work.
    constexpr int kScan = 1024;
    double gmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i) {
        const double t = a + (b - a) * (static_cast<double>(i) / kScan);
        const double g = log_f(t);
        if (std::isfinite(g) && g > gmax) gmax = g;
    }
    if (!std::isfinite(gmax)) return -std::numeric_limits<double>::infinity();
    const double shift = gmax;
    const double integral = integrate(
        [&](double t) {
            const double g = log_f(t);
            return std::isfinite(g) ? std::exp(g - shift) : 0.0;
        },
        a, b, rel_tol);
    if (integral <= 0.0) return -std::numeric_limits<double>::infinity();
    return shift + std::log(integral);
}

double log_abs_moment(const Fn1D& log_pdf, double a, double b, double p,
                      double rel_tol) {
    if (p < 0.0) throw InvalidParam("log_abs_moment: p must be nonnegative");
    Fn1D g;
    if (p == 0.0) {
        g = [&](double t) { return log_pdf(t); };
    } else {
        g = [&, p](double t) {
            if (t == 0.0) return -std::numeric_limits<double>::infinity();
            return p * std::log(std::abs(t)) + log_pdf(t);
        };
    }
    if (a < 0.0 && b > 0.0) {
        const double left = log_integral_exp(g, a, 0.0, rel_tol);
        const double right = log_integral_exp(g, 0.0, b, rel_tol);
        const double m = std::max(left, right);
        if (!std::isfinite(m)) return m;
        return m + std::log(std::exp(left - m) + std::exp(right - m));
    }
    return log_integral_exp(g, a, b, rel_tol);
}

double lp_norm_from_density(const Fn1D& log_pdf, double a, double b, double p,
                            double rel_tol) {
    if (p <= 0.0) throw InvalidParam("lp_norm_from_density: p must be positive");
    return std::exp(log_abs_moment(log_pdf, a, b, p, rel_tol) / p);
}

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double digamma(double x) {
    if (x <= 0.0) throw InvalidParam("digamma: x must be positive");
    double result = 0.0;
    while (x < 12.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 -
                      inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
    return result;
}

}  // namespace subgauss
