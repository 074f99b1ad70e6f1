#pragma once

// Continuous-model machinery: the unique proper client equilibrium for a
// placement (convex potential minimization over monotone borders), facility
// deviation utilities, best responses as suprema, and approximation factors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "model.hpp"

namespace kohlberg {

struct SolverOptions {
    double tol = 1e-10;
    int max_sweeps = 100000;
};

struct EquilibriumSolution {
    Borders borders;
    std::vector<double> residuals;  // signed indifference residuals at interior borders
    int iterations = 0;
    bool converged = false;
};

namespace detail {

// d/dx of the two-interval slice of the potential at border x between
// facilities at si <= sj with outer borders lo, hi:
//   (1-a)(|si-x| - |sj-x|) + a(2x - lo - hi)
inline double border_residual(double x, double si, double sj, double lo, double hi,
                              double alpha) {
    return (1.0 - alpha) * (std::abs(si - x) - std::abs(sj - x)) +
           alpha * (2.0 * x - lo - hi);
}

// Exact scalar minimizer of the convex piecewise-quadratic slice, before
// clamping to [lo, hi].  The residual is nondecreasing in x, so the root of
// the middle linear piece decides which piece holds the minimum.
inline double border_update(double si, double sj, double lo, double hi, double alpha) {
    if (alpha == 0.0) {
        // co-located: the slice is flat on [lo,hi]; take the canonical midpoint
        if (si == sj) return 0.5 * (lo + hi);
        return 0.5 * (si + sj);
    }
    double xm = 0.5 * ((1.0 - alpha) * (si + sj) + alpha * (lo + hi));
    if (xm < si) return (alpha * (lo + hi) + (1.0 - alpha) * (sj - si)) / (2.0 * alpha);
    if (xm > sj) return (alpha * (lo + hi) - (1.0 - alpha) * (sj - si)) / (2.0 * alpha);
    return xm;
}

// Cyclic coordinate descent on interior borders of `full` (size n+1, endpoints
// fixed at 0 and 1).  Returns sweeps used; -1 when the budget ran out.
inline int descend_borders(std::vector<double>& full, const std::vector<double>& s,
                           double alpha, const SolverOptions& opt) {
    const std::size_t n = s.size();
    if (n == 1) return 0;
    if (alpha == 1.0) {  // loads must equalize regardless of positions
        for (std::size_t i = 0; i <= n; ++i) full[i] = double(i) / double(n);
        full[0] = 0.0;
        full[n] = 1.0;
        return 0;
    }
    const double move_tol = opt.tol * 0.25;
    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        double moved = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            double lo = full[i - 1], hi = full[i + 1];
            double x = border_update(s[i - 1], s[i], lo, hi, alpha);
            x = std::clamp(x, lo, hi);
            moved = std::max(moved, std::abs(x - full[i]));
            full[i] = x;
        }
        if (moved < move_tol) return sweep;
    }
    return -1;
}

inline std::vector<double> collect_residuals(const std::vector<double>& full,
                                             const std::vector<double>& s, double alpha) {
    std::vector<double> r;
    if (s.size() < 2) return r;
    r.reserve(s.size() - 1);
    for (std::size_t i = 1; i < s.size(); ++i)
        r.push_back(border_residual(full[i], s[i - 1], s[i], full[i - 1], full[i + 1], alpha));
    return r;
}

// KKT check: interior borders need |r| <= tol; borders clamped against a
// neighbor only need the one-sided inequality.
inline bool residuals_ok(const std::vector<double>& full, const std::vector<double>& r,
                         double tol) {
    for (std::size_t i = 1; i + 1 < full.size(); ++i) {
        double lo = full[i - 1], hi = full[i + 1], x = full[i];
        double res = r[i - 1];
        bool at_lo = (x <= lo), at_hi = (x >= hi);
        if (at_lo && res >= -tol) continue;
        if (at_hi && res <= tol) continue;
        if (std::abs(res) <= tol) continue;
        return false;
    }
    return true;
}

}  // namespace detail

inline EquilibriumSolution solve_client_equilibrium(const Placement& s, double alpha,
                                                    const SolverOptions& opt = {},
                                                    const std::vector<double>* warm = nullptr) {
    const std::size_t n = s.size();
    std::vector<double> full;
    if (warm && warm->size() == n + 1) {
        full = *warm;
        full[0] = 0.0;
        full[n] = 1.0;
    } else {
        full.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) full[i] = double(i) / double(n);
    }
    int sweeps = detail::descend_borders(full, s.positions(), alpha, opt);
    EquilibriumSolution sol{Borders(std::move(full)), {}, 0, false};
    sol.residuals = detail::collect_residuals(sol.borders.beta, s.positions(), alpha);
    sol.iterations = sweeps < 0 ? opt.max_sweeps : sweeps;
    sol.converged = sweeps >= 0 && detail::residuals_ok(sol.borders.beta, sol.residuals, opt.tol);
    return sol;
}

struct BestResponseSide {
    enum Value { interior, left_limit, right_limit };
};

struct BestResponse {
    double location = 0.0;
    double sup_utility = 0.0;
    bool attained = true;
    BestResponseSide::Value side = BestResponseSide::interior;
};

namespace detail {

// Scratch buffers reused across the many re-solves of a best-response scan.
struct DeviationScratch {
    std::vector<double> others;    // competitor positions, sorted
    std::vector<double> arranged;  // others with the deviator inserted
    std::vector<double> warm;      // border warm start carried between solves
};

inline void fill_others(const Placement& s, std::size_t i, DeviationScratch& sc) {
    sc.others.clear();
    for (std::size_t j = 0; j < s.size(); ++j)
        if (j != i) sc.others.push_back(s[j]);
}

// Load of the deviator at x against sc.others; also leaves the solved borders
// in sc.warm and reports the deviator's slot via k_out.
inline double deviator_load(DeviationScratch& sc, double x, double alpha,
                            const SolverOptions& opt, std::size_t* k_out = nullptr) {
    const std::size_t n = sc.others.size() + 1;
    auto it = std::upper_bound(sc.others.begin(), sc.others.end(), x);
    std::size_t k = std::size_t(it - sc.others.begin());
    sc.arranged.clear();
    sc.arranged.reserve(n);
    sc.arranged.insert(sc.arranged.end(), sc.others.begin(), it);
    sc.arranged.push_back(x);
    sc.arranged.insert(sc.arranged.end(), it, sc.others.end());
    if (sc.warm.size() != n + 1) {
        sc.warm.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) sc.warm[i] = double(i) / double(n);
    }
    sc.warm.front() = 0.0;
    sc.warm.back() = 1.0;
    detail::descend_borders(sc.warm, sc.arranged, alpha, opt);
    if (k_out) *k_out = k;
    return sc.warm[k + 1] - sc.warm[k];
}

}  // namespace detail

inline double deviation_utility(const Placement& s, std::size_t i, double new_location,
                                double alpha, const SolverOptions& opt = {}) {
    if (!(new_location >= 0.0 && new_location <= 1.0))
        throw std::invalid_argument("deviation_utility: location outside [0,1]");
    detail::DeviationScratch sc;
    detail::fill_others(s, i, sc);
    return detail::deviator_load(sc, new_location, alpha, opt);
}

// Supremum of deviation_utility over [0,1]: uniform grid scan, golden-section
// refinement of each in-segment bracket, a fixed-point polish that lands on
// the deviator's own border (utility peaks are border kinks), and one-sided
// limits at competitor locations where utility is discontinuous.
inline BestResponse best_response(const Placement& s, std::size_t i, double alpha,
                                  int grid = 128, const SolverOptions& opt = {}) {
    if (grid < 64) throw std::invalid_argument("best_response: grid must be >= 64");
    detail::DeviationScratch sc;
    detail::fill_others(s, i, sc);

    std::vector<double> cuts{0.0};
    for (double c : sc.others)
        if (c != cuts.back()) cuts.push_back(c);
    if (cuts.back() != 1.0) cuts.push_back(1.0);

    std::vector<double> xs;
    xs.reserve(std::size_t(grid) + cuts.size() + 2);
    for (int g = 0; g <= grid; ++g) xs.push_back(double(g) / double(grid));
    for (double c : cuts) xs.push_back(c);
    xs.push_back(s[i]);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::vector<double> us(xs.size());
    for (std::size_t m = 0; m < xs.size(); ++m) us[m] = detail::deviator_load(sc, xs[m], alpha, opt);

    double best_u = -1.0, best_x = 0.0;
    auto consider = [&](double u, double x) {
        if (u > best_u + 1e-15 || (u > best_u - 1e-15 && x < best_x)) {
            best_u = u;
            best_x = x;
        }
    };
    for (std::size_t m = 0; m < xs.size(); ++m) consider(us[m], xs[m]);

    // golden refinement of every in-segment local maximum bracket; a guard
    // band at competitor positions keeps the attained search off the open
    // boundary so a genuine one-sided limit can still win below
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    const double band = 1e-9;
    auto is_rival = [&](double c) {
        return std::binary_search(sc.others.begin(), sc.others.end(), c);
    };
    std::size_t seg = 0;
    for (std::size_t m = 0; m < xs.size(); ++m) {
        while (seg + 2 < cuts.size() && xs[m] > cuts[seg + 1]) ++seg;
        if (m == 0 || m + 1 == xs.size()) continue;
        if (us[m] < us[m - 1] || us[m] < us[m + 1]) continue;
        double seg_lo = cuts[seg] + (is_rival(cuts[seg]) ? band : 0.0);
        double seg_hi = cuts[seg + 1] - (is_rival(cuts[seg + 1]) ? band : 0.0);
        double gl = std::max(xs[m - 1], seg_lo);
        double gr = std::min(xs[m + 1], seg_hi);
        if (gr - gl < 1e-13) continue;
        double c = gr - phi * (gr - gl), d = gl + phi * (gr - gl);
        double fc = detail::deviator_load(sc, c, alpha, opt);
        double fd = detail::deviator_load(sc, d, alpha, opt);
        while (gr - gl > 1e-12) {
            if (fc > fd) {
                gr = d;
                d = c;
                fd = fc;
                c = gr - phi * (gr - gl);
                fc = detail::deviator_load(sc, c, alpha, opt);
            } else {
                gl = c;
                c = d;
                fc = fd;
                d = gl + phi * (gr - gl);
                fd = detail::deviator_load(sc, d, alpha, opt);
            }
        }
        consider(fc, c);
        consider(fd, d);

    }

    // border-consistent polish: optima pinned to the deviator's own interval
    // border live between grid points, so every cut segment is searched from
    // several starts on both sides instead of trusting the scan to bracket
    // them
    for (std::size_t t = 0; t + 1 < cuts.size(); ++t) {
        double seg_lo = cuts[t] + (is_rival(cuts[t]) ? band : 0.0);
        double seg_hi = cuts[t + 1] - (is_rival(cuts[t + 1]) ? band : 0.0);
        double w = seg_hi - seg_lo;
        if (w < 1e-13) continue;
        for (int side = 0; side <= 1; ++side) {
            for (double frac : {0.25, 0.5, 0.75}) {
                double x = seg_lo + frac * w;
                for (int it = 0; it < 80; ++it) {
                    std::size_t k = 0;
                    detail::deviator_load(sc, x, alpha, opt, &k);
                    double nx = std::clamp(sc.warm[k + std::size_t(side)], seg_lo, seg_hi);
                    if (std::abs(nx - x) < 1e-14) {
                        x = nx;
                        break;
                    }
                    x = nx;
                }
                consider(detail::deviator_load(sc, x, alpha, opt), x);
            }
        }
    }

    BestResponse out{best_x, best_u, true, BestResponseSide::interior};

    // one-sided limits at competitor locations (the supremum may not be attained)
    const double e1 = 1e-6, e2 = 1e-8;
    std::vector<double> distinct(sc.others);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (double c : distinct) {
        for (int sgn : {-1, +1}) {
            double x1 = c + sgn * e1, x2 = c + sgn * e2;
            if (x1 < 0.0 || x1 > 1.0 || x2 < 0.0 || x2 > 1.0) continue;
            double u1 = detail::deviator_load(sc, x1, alpha, opt);
            double u2 = detail::deviator_load(sc, x2, alpha, opt);
            double u0 = u2 + (u2 - u1) * e2 / (e1 - e2);
            if (u0 > out.sup_utility + 1e-12) {
                out.sup_utility = u0;
                out.location = c;
                out.attained = false;
                out.side = sgn < 0 ? BestResponseSide::left_limit : BestResponseSide::right_limit;
            }
        }
    }
    return out;
}

struct FacilityImprovement {
    std::size_t facility = 0;  // index in sorted order
    double current_utility = 0.0;
    BestResponse best;
    double improvement_factor = 1.0;
};

struct ImprovementReport {
    std::vector<FacilityImprovement> per_facility;
    double rho = 1.0;
    std::size_t argmax_facility = 0;  // lowest index attaining rho
};

inline ImprovementReport improvement_factors(const Placement& s, double alpha, int grid = 128,
                                             const SolverOptions& opt = {}) {
    auto eq = solve_client_equilibrium(s, alpha, opt);
    auto loads = eq.borders.loads();
    ImprovementReport rep;
    rep.per_facility.reserve(s.size());
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
        FacilityImprovement fi;
        fi.facility = i;
        fi.current_utility = loads[i];
        fi.best = best_response(s, i, alpha, grid, opt);
        // staying put is itself a deviation, so the supremum never drops below
        // the current load
        if (fi.best.sup_utility < loads[i]) {
            fi.best.sup_utility = loads[i];
            fi.best.location = s[i];
            fi.best.attained = true;
            fi.best.side = BestResponseSide::interior;
        }
        if (loads[i] > 0.0)
            fi.improvement_factor = fi.best.sup_utility / loads[i];
        else
            fi.improvement_factor = fi.best.sup_utility > 0.0 ? inf : 1.0;
        rep.per_facility.push_back(fi);
    }
    rep.rho = 1.0;
    rep.argmax_facility = 0;
    for (std::size_t i = 0; i < rep.per_facility.size(); ++i) {
        double f = rep.per_facility[i].improvement_factor;
        if (f > rep.rho) {
            rep.rho = f;
            rep.argmax_facility = i;
        }
    }
    return rep;
}

inline double approximation_factor(const Placement& s, double alpha, int grid = 128,
                                   const SolverOptions& opt = {}) {
    return improvement_factors(s, alpha, grid, opt).rho;
}

}  // namespace kohlberg
