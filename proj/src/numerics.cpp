#include "iscc/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace iscc::numerics {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;

void check(const Tolerance& tol) {
    if (!(tol.abs_tol > 0.0)) throw std::domain_error("Tolerance: abs_tol must be > 0");
    if (tol.max_iter < 1) throw std::domain_error("Tolerance: max_iter must be >= 1");
}

}  // namespace

double q(double x) {
    if (!std::isfinite(x)) throw std::domain_error("q: input must be finite");
    if (x > 38.0) return 0.0;
    if (x < -38.0) return 1.0;
    return std::clamp(0.5 * std::erfc(x * kInvSqrt2), 0.0, 1.0);
}

SearchResult golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                Tolerance tol) {
    check(tol);
    if (!(lo < hi)) throw std::domain_error("golden_section_max: requires lo < hi");

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    int iter = 0;
    while (b - a > tol.abs_tol && iter < tol.max_iter) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
        ++iter;
    }
    const double x = 0.5 * (a + b);
    return {x, f(x), b - a <= tol.abs_tol};
}

double bisect_monotone(const std::function<double(double)>& f, double target, double lo, double hi,
                       Tolerance tol) {
    check(tol);
    if (!(lo < hi)) throw std::domain_error("bisect_monotone: requires lo < hi");

    double glo = f(lo) - target;
    double ghi = f(hi) - target;
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo < 0.0) == (ghi < 0.0))
        throw BracketError("bisect_monotone: target not bracketed by [lo, hi]");

    int iter = 0;
    while (hi - lo > tol.abs_tol && iter < tol.max_iter) {
        const double mid = 0.5 * (lo + hi);
        const double g = f(mid) - target;
        if (g == 0.0) return mid;
        if ((g < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = g;
        } else {
            hi = mid;
        }
        ++iter;
    }
    return 0.5 * (lo + hi);
}

}  // namespace iscc::numerics
