// Scalar types. Deep Moran cylinders shrink far below double resolution, so that
// module evaluates the same geometry templates with a 100-digit binary float.
#pragma once

#include <array>
#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace rstp {

using HighReal = boost::multiprecision::cpp_bin_float_100;

template <class T>
using PointT = std::array<T, 2>;

using Point = PointT<double>;
using HighPoint = PointT<HighReal>;

inline double to_double(double x) { return x; }
inline double to_double(const HighReal& x) { return x.convert_to<double>(); }

inline Point to_double(const HighPoint& p) { return {to_double(p[0]), to_double(p[1])}; }
inline Point to_double(const Point& p) { return p; }

template <class T>
PointT<T> lift(const Point& p)
{
    return {T(p[0]), T(p[1])};
}

inline double expm1_of(double x) { return std::expm1(x); }
inline double log1p_of(double x) { return std::log1p(x); }

inline HighReal expm1_of(const HighReal& x)
{
    if (abs(x) < HighReal(1e-6)) {
        // Taylor series; 20 terms are exact to far beyond 100 digits at |x| < 1e-6
        HighReal term = x;
        HighReal sum = x;
        for (int k = 2; k < 20; ++k) {
            term *= x / k;
            sum += term;
        }
        return sum;
    }
    return exp(x) - 1;
}

inline HighReal log1p_of(const HighReal& x)
{
    if (abs(x) < HighReal(1e-6)) {
        HighReal term = x;
        HighReal sum = x;
        for (int k = 2; k < 20; ++k) {
            term *= -x;
            sum += term / k;
        }
        return sum;
    }
    return log(1 + x);
}

// Euclidean distance in the first `dim` coordinates, returned as double.
template <class T>
double distance(const PointT<T>& a, const PointT<T>& b, int dim)
{
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = to_double(T(a[i] - b[i]));
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace rstp
