#pragma once

// Minimal double-double arithmetic for compensated 2x2 matrix products.
// Error-free transforms via fma; enough precision to keep unit-determinant
// chains honest when many cells multiply up.

#include <cmath>
#include <complex>

namespace gtspec::detail {

struct dd {
    double hi = 0.0, lo = 0.0;
};

inline dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline dd two_prod(double a, double b) {
    double p = a * b;
    double err = std::fma(a, b, -p);
    return {p, err};
}

inline dd quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline dd add(dd a, dd b) {
    dd s = two_sum(a.hi, b.hi);
    double lo = s.lo + a.lo + b.lo;
    return quick_two_sum(s.hi, lo);
}

inline dd sub(dd a, dd b) { return add(a, {-b.hi, -b.lo}); }

inline dd mul(dd a, dd b) {
    dd p = two_prod(a.hi, b.hi);
    double lo = p.lo + a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, lo);
}

inline dd from(double x) { return {x, 0.0}; }
inline double to_double(dd x) { return x.hi + x.lo; }

struct ddc {
    dd re, im;
};

inline ddc from(std::complex<double> z) { return {from(z.real()), from(z.imag())}; }
inline std::complex<double> to_complex(ddc z) { return {to_double(z.re), to_double(z.im)}; }

inline ddc add(ddc a, ddc b) { return {add(a.re, b.re), add(a.im, b.im)}; }
inline ddc sub(ddc a, ddc b) { return {sub(a.re, b.re), sub(a.im, b.im)}; }

inline ddc mul(ddc a, ddc b) {
    return {sub(mul(a.re, b.re), mul(a.im, b.im)),
            add(mul(a.re, b.im), mul(a.im, b.re))};
}

struct Mat2dd {
    ddc m11, m12, m21, m22;
};

inline Mat2dd mul(const Mat2dd& a, const Mat2dd& b) {
    return {add(mul(a.m11, b.m11), mul(a.m12, b.m21)),
            add(mul(a.m11, b.m12), mul(a.m12, b.m22)),
            add(mul(a.m21, b.m11), mul(a.m22, b.m21)),
            add(mul(a.m21, b.m12), mul(a.m22, b.m22))};
}

} // namespace gtspec::detail
