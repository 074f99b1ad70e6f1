#pragma once

// Closed-form machinery: canonical placements, the three-facility optimum,
// continued-fraction evaluators, printed small-n rationals, general-n forms,
// and quality bounds.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"

namespace kohlberg {

enum class PlacementKind { opt, pair };

// opt: facility i at (2i-1)/(2n).  pair: facilities doubled at (2i-1)/(2k)
// with k = ceil(n/2); odd n leaves the point with 0-based index k/2 single.
inline Placement canonical_placement(PlacementKind kind, int n) {
    if (n < 1) throw std::invalid_argument("canonical_placement: n must be >= 1");
    std::vector<double> s;
    s.reserve(std::size_t(n));
    if (kind == PlacementKind::opt) {
        for (int i = 1; i <= n; ++i) s.push_back(double(2 * i - 1) / double(2 * n));
    } else {
        int k = (n + 1) / 2;
        int single = (n % 2 == 0) ? -1 : k / 2;
        for (int i = 0; i < k; ++i) {
            double p = double(2 * i + 1) / double(2 * k);
            s.push_back(p);
            if (i != single) s.push_back(p);
        }
    }
    return Placement(std::move(s));
}

struct ThreeFacilityOptimum {
    double s1 = 0.0;  // outer position of the symmetric placement (s1, 1/2, 1-s1)
    double rho = 1.0;
};

namespace detail {

// Two radicands circulate for the n=3 optimum; the cubic one is the one under
// which both facilities' improvement factors equalize at s1.
inline double three_radical(double a) {
    return std::sqrt(17.0 + a * (16.0 + 2.0 * a + a * a * a));
}

}  // namespace detail

inline ThreeFacilityOptimum rho_three(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("rho_three: alpha outside [0,1]");
    if (alpha == 1.0) return {1.0 / 3.0, 1.0};  // every placement is exact at alpha=1
    double r = detail::three_radical(alpha);
    double s1 = (-3.0 + (alpha - 4.0) * alpha + r) / (4.0 * (alpha - 1.0) * (alpha - 1.0));
    double rho = (1.0 - alpha * alpha + r) / (4.0 - 2.0 * (alpha - 2.0) * alpha);
    return {s1, rho};
}

enum class ContFracKind { tilde, hat };

// K^m evaluated bottom-up: K^1 = t, K^j = t/(1+K^{j-1}), with t = -alpha^2/4
// (tilde) or t = -alpha/4 (hat).
inline double cont_frac(ContFracKind kind, int depth, double alpha) {
    if (depth < 1) throw std::invalid_argument("cont_frac: depth must be >= 1");
    double t = (kind == ContFracKind::tilde) ? -alpha * alpha / 4.0 : -alpha / 4.0;
    double k = t;
    for (int j = 2; j <= depth; ++j) {
        double denom = 1.0 + k;
        if (std::abs(denom) < 1e-14)
            throw std::domain_error("cont_frac: denominator vanished at depth " +
                                    std::to_string(j));
        k = t / denom;
    }
    return k;
}

// Printed rational forms for n in 4..10.  Transcribed as printed; see
// rho_small_validates for the one entry that disagrees with recomputation.
inline double rho_small(PlacementKind kind, int n, double alpha) {
    if (n < 4 || n > 10) throw std::invalid_argument("rho_small: n must be in 4..10");
    const double a = alpha;
    if (kind == PlacementKind::opt) {
        switch (n) {
            case 4:
                return 0.5 + 2.0 * (a * a - 2.0) / ((a - 1.0) * a * (4.0 + a) - 4.0);
            case 5:
                return (12.0 + a * (4.0 + a * (a * (a - 2.0) - 10.0))) /
                       (8.0 + a * (2.0 + a) * (4.0 + (a - 6.0) * a));
            case 6:
                return 0.5 + (16.0 - 16.0 * a * a + 3.0 * a * a * a * a) /
                                 (16.0 + a * (16.0 + a * (a * (a * (5.0 + a) - 12.0) - 20.0)));
            case 7:
                return (a * (a * (64.0 + a * (16.0 + a * (a * (a - 3.0) - 21.0))) - 16.0) - 48.0) /
                       (a * (a * (48.0 + a * (32.0 + a * ((a - 6.0) * a - 18.0))) - 32.0) - 32.0);
            case 8:
                return 0.5 +
                       4.0 * (a * a - 2.0) * (8.0 - 8.0 * a * a + a * a * a * a) /
                           (a * ((a - 2.0) * a * (2.0 + a) * (a * (a * (7.0 + a) - 20.0) - 28.0) -
                                 64.0) -
                            64.0);
            case 9:
                return (192.0 +
                        a * (64.0 + a * (a * (4.0 + a) * (a * (56.0 + a * ((a - 8.0) * a - 4.0)) -
                                                          24.0) -
                                         352.0))) /
                       (128.0 + (a - 2.0) * a * (a * (2.0 + a) * (48.0 + a * (48.0 + a * ((a - 8.0) * a -
                                                                                          28.0))) -
                                                 64.0));
            case 10: {
                double a2 = a * a, a4 = a2 * a2;
                double num = 256.0 - 512.0 * a2 + 336.0 * a4 - 80.0 * a4 * a2 + 5.0 * a4 * a4;
                double den = 256.0 +
                             a * (256.0 + a * (a * (a * (432.0 +
                                                         a * (240.0 +
                                                              a * (a * (9.0 * a + a * a - 40.0) -
                                                                   120.0))) -
                                                    448.0) -
                                               576.0));
                return 0.5 + num / den;
            }
        }
    } else {
        switch (n) {
            case 4:
                return (4.0 + a - a * a) / 4.0;
            case 5:
                return (4.0 + a) * (a * (a * (3.0 + a) - 3.0) - 4.0) /
                       ((2.0 + a) * (a * (5.0 * a - 2.0) - 8.0));
            case 6:
                return (a * (4.0 - a * (a - 7.0)) - 16.0) / (2.0 * (a * (4.0 + a) - 8.0));
            case 7:
                return (64.0 - 64.0 * a + 7.0 * a * a * a) *
                       (16.0 + a * (2.0 + a) * (a * (a - 3.0) - 2.0)) /
                       (2.0 * (32.0 + a * (a * (a - 10.0) - 16.0)) *
                        (16.0 + a * (a - 16.0 + a * a)));
            case 8:
                return (64.0 - a * (48.0 + a * (24.0 + (a - 17.0) * a))) /
                       (4.0 * (16.0 + a * (a - 16.0 + a * a)));
            case 9:
                return (32.0 + (a - 4.0) * a * (2.0 + a) * (1.0 + 2.0 * a)) *
                       (a * (4.0 + 3.0 * a) - 16.0) /
                       ((a - 2.0) * (4.0 + a) * (64.0 + a * (a * (a - 24.0) - 32.0)));
            case 10:
                return (a * (320.0 - a * (a * (120.0 * (a - 31.0) * a) - 16.0)) - 256.0) /
                       (2.0 * (a * (a - 4.0) * (a * (4.0 + 3.0 * a) - 48.0) - 128.0));
        }
    }
    throw std::invalid_argument("rho_small: unsupported kind");
}

// Whether the printed rational agrees with independent recomputation across
// alpha.  All entries validate except (pair, 10), whose printed form is
// corrupt (it even fails the alpha=1 sanity value of 1).
inline bool rho_small_validates(PlacementKind kind, int n) {
    if (n < 4 || n > 10) throw std::invalid_argument("rho_small_validates: n must be in 4..10");
    return !(kind == PlacementKind::pair && n == 10);
}

namespace detail {

// G_j = -(2/alpha) Ktilde^j rewritten pole-free: G_1 = alpha/2,
// G_j = (alpha/2)/(1+Ktilde^{j-1}).
inline std::vector<double> g_sequence(int m, double a) {
    std::vector<double> g{a / 2.0};
    double t = -a * a / 4.0, kt = t;
    for (int j = 2; j <= m; ++j) {
        g.push_back((a / 2.0) / (1.0 + kt));
        kt = t / (1.0 + kt);
    }
    return g;
}

// M_j with Khat^j = alpha * M_j: M_1 = -1/4, M_j = (-1/4)/(1+alpha M_{j-1}).
// Factoring alpha out keeps every power of alpha nonnegative downstream.
inline std::vector<double> m_sequence(int m, double a) {
    std::vector<double> ms{-0.25};
    for (int j = 2; j <= m; ++j) ms.push_back(-0.25 / (1.0 + a * ms.back()));
    return ms;
}

}  // namespace detail

// General-n forms: opt for any n >= 4, pair for even n >= 4.
inline double rho_general(PlacementKind kind, int n, double alpha) {
    if (n < 4) throw std::invalid_argument("rho_general: n must be >= 4");
    const double a = alpha;
    if (kind == PlacementKind::opt) {
        auto g = detail::g_sequence(n - 2, a);
        double kt_last = cont_frac(ContFracKind::tilde, n - 2, a);
        double pref = n / (1.0 + 2.0 / (1.0 + a) * kt_last);
        double total = (1.0 - a) / (1.0 + a) * 3.0 / (2.0 * n);
        for (int k = 2; k <= n - 1; ++k) {
            double prod = 1.0;
            for (int j = n - k; j <= n - 2; ++j) prod *= g[std::size_t(j - 1)];
            total += (1.0 - a) / (1.0 + a) * (2.0 * double(k) / n) * prod;
        }
        double prod = 1.0;
        for (int j = 1; j <= n - 2; ++j) prod *= g[std::size_t(j - 1)];
        total += a / (1.0 + a) * prod;
        return pref * total;
    }
    if (n % 2 != 0)
        throw std::invalid_argument("rho_general: pair form needs even n");
    auto ms = detail::m_sequence(n - 3, a);
    double kh_last = a * ms[std::size_t(n - 4)];
    double B = 1.0 + 2.0 / (1.0 + a) * kh_last;
    auto tail_sum = [&]() {
        // sum_{k=2}^{n/2-1} (-2)^{2k-3} a^{k-1} (2(1-a)k/n) prod_{j=n-2k}^{n-3} M_j
        double tot = 0.0;
        for (int k = 2; k <= n / 2 - 1; ++k) {
            double prod = 1.0;
            for (int j = n - 2 * k; j <= n - 3; ++j) prod *= ms[std::size_t(j - 1)];
            tot += std::pow(-2.0, 2 * k - 3) * std::pow(a, k - 1) *
                   (2.0 * (1.0 - a) * double(k) / n) * prod;
        }
        return tot;
    };
    double fp = 1.0;
    for (int j = 1; j <= n - 3; ++j) fp *= ms[std::size_t(j - 1)];
    double ts = tail_sum();
    double apow = std::pow(a, (n - 2) / 2);
    double last1 = std::pow(-2.0, n - 4) / 2.0 * apow * fp;
    double b1 = (1.0 / (1.0 - a / (2.0 * (a + 1.0 + 2.0 * kh_last)))) *
                ((1.0 - a) / (2.0 * n) + (1.0 - a) / (2.0 * (a + 1.0)) * (1.0 / B) * 3.0 / n -
                 2.0 / (a + 1.0) * (1.0 / B) * (ts + last1));
    double last2 = std::pow(-2.0, n - 4) * apow * fp;
    double b2 = (1.0 / B) * (a / (1.0 + a) * b1 + (1.0 - a) / (1.0 + a) * 3.0 / n +
                             (-4.0 / (1.0 + a)) * ts - 2.0 / (1.0 + a) * last2);
    return n * (b2 - b1);
}

// Social cost of the opt placement.
inline double sc_opt(int n, double alpha) {
    if (n < 1) throw std::invalid_argument("sc_opt: n must be >= 1");
    return (1.0 + 3.0 * alpha) / (4.0 * n);
}

struct QualityBound {
    double value = 1.0;
    bool is_exact = true;
};

// Social-cost ratio of the pair placement against the optimum: exact for even
// n (and independent of n), an upper bound for odd n.
inline QualityBound quality_pair(int n, double alpha) {
    if (n < 2) throw std::invalid_argument("quality_pair: n must be >= 2");
    if (n % 2 == 0) return {(2.0 * alpha + 2.0) / (3.0 * alpha + 1.0), true};
    double nn = double(n);
    return {8.0 * (1.0 + alpha) * nn * nn / ((1.0 + 3.0 * alpha) * (nn + 1.0) * (nn + 1.0)),
            false};
}

}  // namespace kohlberg
