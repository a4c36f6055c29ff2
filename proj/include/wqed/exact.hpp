// exact.hpp — exact integer/rational combinatorics and log-space helpers.
//
// Combinatorial coefficients entering the dark-state algebra span many orders
// of magnitude; products of binomials and ladder norms are kept in exact
// arithmetic up to n = 64 and evaluated in log space beyond that.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace wqed::exact {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Largest n for which norms and probability weights are computed in exact
// rational arithmetic before the single conversion to double.
inline constexpr int kExactLimit = 64;

inline BigInt binomial(long n, long k) {
    if (k < 0 || n < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt r = 1;
    for (long i = 0; i < k; ++i) {
        r *= (n - i);
        r /= (i + 1);  // exact: binom(n,i)*(n-i) = binom(n,i+1)*(i+1)
    }
    return r;
}

inline BigInt factorial(long n) {
    if (n < 0) throw std::invalid_argument("factorial: negative argument");
    BigInt r = 1;
    for (long i = 2; i <= n; ++i) r *= i;
    return r;
}

// n * (n-1) * ... * (n-k+1)
inline BigInt falling_factorial(long n, long k) {
    if (k < 0) throw std::invalid_argument("falling_factorial: negative k");
    BigInt r = 1;
    for (long i = 0; i < k; ++i) r *= (n - i);
    return r;
}

inline double to_double(const BigRat& r) { return r.convert_to<double>(); }
inline double to_double(const BigInt& i) { return i.convert_to<double>(); }

inline double log_factorial(double n) { return std::lgamma(n + 1.0); }

inline double log_binomial(double n, double k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

// log(n * (n-1) * ... * (n-k+1))
inline double log_falling_factorial(double n, double k) {
    return log_factorial(n) - log_factorial(n - k);
}

// Compensated accumulation (Kahan-Neumaier).
struct KahanSum {
    double sum{0.0};
    double comp{0.0};

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// log(sum_i exp(v_i)) with the usual max shift; -inf entries are skipped.
inline double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    KahanSum s;
    for (double x : v) s.add(std::exp(x - m));
    return m + std::log(s.value());
}

}  // namespace wqed::exact
