#pragma once

// Core types for spatial competition with congestion on the unit interval:
// clients on [0,1] pay (1-alpha)*distance + alpha*load of their facility.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace kohlberg {

struct ModelParams {
    int n = 1;
    double alpha = 0.0;

    void validate() const {
        if (n < 1) throw std::invalid_argument("ModelParams: n must be >= 1");
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw std::invalid_argument("ModelParams: alpha must be in [0,1]");
    }
};

// Sorted facility positions.  Construction sorts and keeps the permutation so
// deviations can be reported against the caller's original indexing.
class Placement {
  public:
    explicit Placement(std::vector<double> positions) : pos_(std::move(positions)) {
        if (pos_.empty()) throw std::invalid_argument("Placement: empty");
        for (double p : pos_)
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("Placement: position outside [0,1]");
        perm_.resize(pos_.size());
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        std::stable_sort(perm_.begin(), perm_.end(),
                         [&](std::size_t a, std::size_t b) { return pos_[a] < pos_[b]; });
        std::vector<double> sorted(pos_.size());
        for (std::size_t i = 0; i < pos_.size(); ++i) sorted[i] = pos_[perm_[i]];
        pos_ = std::move(sorted);
    }

    std::size_t size() const { return pos_.size(); }
    double operator[](std::size_t i) const { return pos_[i]; }
    const std::vector<double>& positions() const { return pos_; }
    // original index of the facility now at sorted slot i
    std::size_t original_index(std::size_t i) const { return perm_[i]; }

  private:
    std::vector<double> pos_;
    std::vector<std::size_t> perm_;
};

// Interval breakpoints 0 = beta_0 <= ... <= beta_n = 1 of a proper client
// mapping; facility i serves [beta_i, beta_{i+1}].
struct Borders {
    std::vector<double> beta;

    explicit Borders(std::vector<double> b) : beta(std::move(b)) { validate(); }
    static Borders uniform(std::size_t n) {
        std::vector<double> b(n + 1);
        for (std::size_t i = 0; i <= n; ++i) b[i] = double(i) / double(n);
        b[0] = 0.0;
        b[n] = 1.0;
        return Borders(std::move(b));
    }

    void validate() const {
        if (beta.size() < 2) throw std::invalid_argument("Borders: need n+1 entries");
        if (beta.front() != 0.0 || beta.back() != 1.0)
            throw std::invalid_argument("Borders: must span [0,1]");
        for (std::size_t i = 1; i < beta.size(); ++i)
            if (beta[i] < beta[i - 1]) throw std::invalid_argument("Borders: not monotone");
    }

    std::size_t facilities() const { return beta.size() - 1; }

    std::vector<double> loads() const {
        std::vector<double> l(facilities());
        for (std::size_t i = 0; i < l.size(); ++i) l[i] = beta[i + 1] - beta[i];
        return l;
    }
};

inline std::vector<double> loads_from_borders(const Borders& b) { return b.loads(); }

struct CostBreakdown {
    double distance_term = 0.0;    // (1-alpha) * |s_i - z|
    double congestion_term = 0.0;  // alpha * load_i
    double total = 0.0;
};

inline CostBreakdown client_cost(double z, std::size_t facility, const Placement& s,
                                 const std::vector<double>& loads, double alpha) {
    if (facility >= s.size() || facility >= loads.size())
        throw std::out_of_range("client_cost: facility index");
    CostBreakdown c;
    c.distance_term = (1.0 - alpha) * std::abs(s[facility] - z);
    c.congestion_term = alpha * loads[facility];
    c.total = c.distance_term + c.congestion_term;
    return c;
}

// int_a^b |s-x| dx, exact piecewise-quadratic antiderivative
inline double interval_distance_integral(double s, double a, double b) {
    auto F = [s](double x) { return 0.5 * (x - s) * std::abs(x - s); };
    return F(b) - F(a);
}

// Phi = (1-alpha) * sum_i int_{I_i} |s_i - x| dx + alpha * sum_i load_i^2 / 2.
// Client best-response dynamics descend this; its minimizer over monotone
// borders is the unique proper client equilibrium.
inline double potential(const Placement& s, const Borders& b, double alpha) {
    if (s.size() != b.facilities()) throw std::invalid_argument("potential: size mismatch");
    double dist = 0.0, cong = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double l = b.beta[i + 1] - b.beta[i];
        dist += interval_distance_integral(s[i], b.beta[i], b.beta[i + 1]);
        cong += l * l * 0.5;
    }
    return (1.0 - alpha) * dist + alpha * cong;
}

// SC = int_0^1 C_z dz = (1-alpha) * sum int dist + alpha * sum load_i^2
inline double social_cost(const Placement& s, const Borders& b, double alpha) {
    if (s.size() != b.facilities()) throw std::invalid_argument("social_cost: size mismatch");
    double dist = 0.0, cong = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double l = b.beta[i + 1] - b.beta[i];
        dist += interval_distance_integral(s[i], b.beta[i], b.beta[i + 1]);
        cong += l * l;
    }
    return (1.0 - alpha) * dist + alpha * cong;
}

inline Placement reflect(const Placement& s) {
    std::vector<double> r(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) r[i] = 1.0 - s[s.size() - 1 - i];
    return Placement(std::move(r));
}

inline Borders reflect(const Borders& b) {
    std::vector<double> r(b.beta.size());
    for (std::size_t i = 0; i < b.beta.size(); ++i) r[i] = 1.0 - b.beta[b.beta.size() - 1 - i];
    r.front() = 0.0;
    r.back() = 1.0;
    return Borders(std::move(r));
}

}  // namespace kohlberg
