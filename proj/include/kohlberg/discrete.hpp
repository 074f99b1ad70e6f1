#pragma once

// Discretized model: P clients on grid midpoints, facilities on grid slots,
// round-robin better-response dynamics for clients, and empirical improvement
// factors obtained by scanning all slots for one facility.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "model.hpp"

namespace kohlberg {

struct ClientGrid {
    int P = 1;
    explicit ClientGrid(int clients) : P(clients) {
        if (clients < 1) throw std::invalid_argument("ClientGrid: P must be >= 1");
    }
    double position(int j) const { return (double(j) + 0.5) / double(P); }
};

// Nearest grid slot to x; an exact midpoint between two slots rounds down.
inline int nearest_slot(double x, int P) {
    double t = x * double(P) - 0.5;
    double f = std::floor(t);
    int j = int(f) + ((t - f) > 0.5 ? 1 : 0);
    return std::clamp(j, 0, P - 1);
}

struct DiscretePlacement {
    int P = 1;
    std::vector<int> slots;  // one per facility, each in [0, P)

    DiscretePlacement(int clients, std::vector<int> facility_slots)
        : P(clients), slots(std::move(facility_slots)) {
        if (P < 1) throw std::invalid_argument("DiscretePlacement: P must be >= 1");
        if (slots.empty()) throw std::invalid_argument("DiscretePlacement: no facilities");
        for (int s : slots)
            if (s < 0 || s >= P)
                throw std::invalid_argument("DiscretePlacement: slot outside grid");
    }
    DiscretePlacement(const Placement& s, int clients)
        : P(clients) {
        if (P < 1) throw std::invalid_argument("DiscretePlacement: P must be >= 1");
        slots.reserve(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) slots.push_back(nearest_slot(s[i], P));
    }
    std::size_t n() const { return slots.size(); }
    double position(std::size_t f) const { return (double(slots[f]) + 0.5) / double(P); }
    std::vector<double> positions() const {
        std::vector<double> out(slots.size());
        for (std::size_t f = 0; f < slots.size(); ++f) out[f] = position(f);
        return out;
    }
};

struct SimConfig {
    int max_rounds = 0;  // 0 means 50*P
    bool use_runs_pass = true;
};

struct AssignmentResult {
    std::vector<int> assignment;  // client -> facility index
    std::vector<int> counts;      // facility -> client count
    int rounds = 0;
    bool converged = false;

    std::vector<double> loads(int P) const {
        std::vector<double> out(counts.size());
        for (std::size_t f = 0; f < counts.size(); ++f) out[f] = double(counts[f]) / double(P);
        return out;
    }
};

namespace detail {

// Effective cost of client z joining facility f, with cnt the facility's
// client count after the join.
inline double join_cost(double z, double pos, int cnt, int P, double alpha) {
    return (1.0 - alpha) * std::abs(pos - z) + alpha * double(cnt) / double(P);
}

// One round-robin pass over clients in ascending order.  A client moves only
// on strict improvement; among equally cheap targets the lowest facility
// index wins.  Returns the number of moves.
inline int naive_pass(std::vector<int>& assign, std::vector<int>& counts,
                      const std::vector<double>& pos, int P, double alpha) {
    const std::size_t n = pos.size();
    int moves = 0;
    for (int j = 0; j < P; ++j) {
        double z = (double(j) + 0.5) / double(P);
        int cur = assign[std::size_t(j)];
        double stay = join_cost(z, pos[std::size_t(cur)], counts[std::size_t(cur)], P, alpha);
        int best = -1;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < n; ++f) {
            if (int(f) == cur) continue;
            double c = join_cost(z, pos[f], counts[f] + 1, P, alpha);
            if (c < best_cost) {
                best_cost = c;
                best = int(f);
            }
        }
        if (best >= 0 && best_cost < stay) {
            counts[std::size_t(cur)] -= 1;
            counts[std::size_t(best)] += 1;
            assign[std::size_t(j)] = best;
            ++moves;
        }
    }
    return moves;
}

// Runs-based pass with identical semantics.  The assignment is held as a
// start->facility map; within a run the switch predicate against any fixed
// target is monotone in the client position, so the earliest mover is found
// by an exact binary search instead of touching every client.
struct RunsState {
    std::map<int, int> runs;  // start index -> facility
    std::vector<int> counts;
    int P = 0;

    void from_assignment(const std::vector<int>& assign, std::size_t n) {
        P = int(assign.size());
        runs.clear();
        counts.assign(n, 0);
        for (int j = 0; j < P; ++j) {
            counts[std::size_t(assign[std::size_t(j)])] += 1;
            if (j == 0 || assign[std::size_t(j)] != assign[std::size_t(j - 1)])
                runs[j] = assign[std::size_t(j)];
        }
    }
    std::vector<int> to_assignment() const {
        std::vector<int> assign(static_cast<std::size_t>(P));
        auto it = runs.begin();
        for (int j = 0; j < P; ++j) {
            auto nx = std::next(it);
            while (nx != runs.end() && nx->first <= j) {
                it = nx;
                nx = std::next(it);
            }
            assign[std::size_t(j)] = it->second;
        }
        return assign;
    }
    int facility_at(int j) const {
        auto it = runs.upper_bound(j);
        return std::prev(it)->second;
    }

    // Rewrite every maximal span of runs sharing one facility position into
    // per-facility contiguous chunks in facility order.  Loads and client
    // costs are untouched (the facilities are co-located), but interleaving
    // left behind by churn between co-located facilities is flattened, which
    // keeps the map near one run per facility.
    void canonicalize_groups(const std::vector<double>& pos) {
        auto it = runs.begin();
        while (it != runs.end()) {
            auto sp_begin = it;
            double p = pos[std::size_t(it->second)];
            auto sp_end = std::next(it);
            while (sp_end != runs.end() && pos[std::size_t(sp_end->second)] == p) ++sp_end;
            if (std::distance(sp_begin, sp_end) <= 1) {
                it = sp_end;
                continue;
            }
            int start = sp_begin->first;
            int stop = (sp_end == runs.end()) ? P : sp_end->first;
            std::vector<std::pair<int, int>> fc;  // facility -> client count in span
            for (auto r = sp_begin; r != sp_end; ++r) {
                auto nx = std::next(r);
                int e = (nx == runs.end()) ? P : nx->first;
                bool found = false;
                for (auto& [f, c] : fc)
                    if (f == r->second) {
                        c += e - r->first;
                        found = true;
                    }
                if (!found) fc.push_back({r->second, e - r->first});
            }
            std::sort(fc.begin(), fc.end());
            runs.erase(sp_begin, sp_end);
            int at = start;
            for (auto& [f, c] : fc)
                if (c > 0) {
                    runs[at] = f;
                    at += c;
                }
            it = runs.lower_bound(stop);
        }
    }
};

inline int runs_pass(RunsState& st, const std::vector<double>& pos, double alpha) {
    const int P = st.P;
    const std::size_t n = pos.size();
    int moves = 0;
    int j = 0;
    while (j < P) {
        auto it = std::prev(st.runs.upper_bound(j));
        int cur = it->second;
        auto nx = std::next(it);
        int run_end = (nx == st.runs.end()) ? P - 1 : nx->first - 1;

        // would client at index q leave cur for f right now?
        auto beats = [&](int q, std::size_t f) {
            double z = (double(q) + 0.5) / double(P);
            double stay = join_cost(z, pos[std::size_t(cur)], st.counts[std::size_t(cur)], P, alpha);
            return join_cost(z, pos[f], st.counts[f] + 1, P, alpha) < stay;
        };

        int earliest = P;
        for (std::size_t f = 0; f < n; ++f) {
            if (int(f) == cur) continue;
            if (pos[f] <= pos[std::size_t(cur)]) {
                // predicate can only turn off as z grows: check the run head
                if (beats(j, f)) earliest = j;
            } else {
                // predicate can only turn on as z grows: binary search
                if (!beats(run_end, f)) continue;
                int lo = j, hi = run_end;  // invariant: beats(hi), first true in (lo-1, hi]
                if (beats(lo, f)) {
                    hi = lo;
                } else {
                    while (hi - lo > 1) {
                        int mid = lo + (hi - lo) / 2;
                        if (beats(mid, f))
                            hi = mid;
                        else
                            lo = mid;
                    }
                }
                earliest = std::min(earliest, hi);
            }
            if (earliest == j) break;
        }

        if (earliest > run_end) {
            j = run_end + 1;
            continue;
        }

        // replay the exact per-client rule at the earliest candidate
        int q = earliest;
        double z = (double(q) + 0.5) / double(P);
        double stay = join_cost(z, pos[std::size_t(cur)], st.counts[std::size_t(cur)], P, alpha);
        int best = -1;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < n; ++f) {
            if (int(f) == cur) continue;
            double c = join_cost(z, pos[f], st.counts[f] + 1, P, alpha);
            if (c < best_cost) {
                best_cost = c;
                best = int(f);
            }
        }
        if (best >= 0 && best_cost < stay) {
            st.counts[std::size_t(cur)] -= 1;
            st.counts[std::size_t(best)] += 1;
            st.runs[q] = best;
            if (q + 1 <= run_end && st.runs.find(q + 1) == st.runs.end()) st.runs[q + 1] = cur;
            // drop boundaries between adjacent runs of one facility so the
            // map stays at one entry per maximal run
            auto canon = [&](int key) {
                auto at = st.runs.find(key);
                if (at == st.runs.end() || at == st.runs.begin()) return;
                if (std::prev(at)->second == at->second) st.runs.erase(at);
            };
            canon(q);
            auto after = st.runs.upper_bound(q);
            if (after != st.runs.end()) canon(after->first);
            ++moves;
        }
        j = q + 1;
    }
    return moves;
}

}  // namespace detail

// Canonical initial assignment: each client goes to the nearest facility
// position; a midpoint tie between distinct positions goes to the lower
// facility index, and a co-located group splits its catchment into contiguous
// chunks left to right, earlier members taking the extra client when the
// split is uneven.
inline std::vector<int> initial_assignment(const DiscretePlacement& dp) {
    const int P = dp.P;
    const std::size_t n = dp.n();
    std::vector<std::size_t> order(n);
    for (std::size_t f = 0; f < n; ++f) order[f] = f;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dp.slots[a] < dp.slots[b];
    });

    // client j sits exactly on slot j, so slot distances are exact integers
    std::vector<int> assign(static_cast<std::size_t>(P), -1);
    std::vector<int> nearest(static_cast<std::size_t>(P));
    for (int j = 0; j < P; ++j) {
        std::size_t best = order[0];
        int best_d = std::abs(dp.slots[best] - j);
        for (std::size_t r = 1; r < n; ++r) {
            std::size_t f = order[r];
            int d = std::abs(dp.slots[f] - j);
            if (d < best_d || (d == best_d && f < best)) {
                best_d = d;
                best = f;
            }
        }
        nearest[std::size_t(j)] = int(best);
    }
    // spread each facility's catchment across its co-located group
    std::size_t r = 0;
    while (r < n) {
        std::size_t r2 = r;
        while (r2 + 1 < n && dp.slots[order[r2 + 1]] == dp.slots[order[r]]) ++r2;
        std::size_t g = r2 - r + 1;
        // clients whose nearest facility lies in this group form one interval
        int lo = P, hi = -1;
        for (int j = 0; j < P; ++j) {
            std::size_t f = std::size_t(nearest[std::size_t(j)]);
            bool in_group = false;
            for (std::size_t t = r; t <= r2; ++t)
                if (order[t] == f) in_group = true;
            if (in_group) {
                lo = std::min(lo, j);
                hi = std::max(hi, j);
            }
        }
        if (hi >= lo) {
            int m = hi - lo + 1;
            int base = m / int(g), rem = m % int(g);
            int at = lo;
            for (std::size_t c = 0; c < g; ++c) {
                int take = base + (int(c) < rem ? 1 : 0);
                for (int t = 0; t < take; ++t) assign[std::size_t(at++)] = int(order[r + c]);
            }
        }
        r = r2 + 1;
    }
    return assign;
}

inline AssignmentResult empirical_client_equilibrium(const DiscretePlacement& dp, double alpha,
                                                     const SimConfig& cfg = {},
                                                     const std::vector<int>* warm = nullptr) {
    const int P = dp.P;
    auto pos = dp.positions();
    std::vector<int> assign = (warm && int(warm->size()) == P) ? *warm : initial_assignment(dp);
    int max_rounds = cfg.max_rounds > 0 ? cfg.max_rounds : 50 * P;

    AssignmentResult out;
    if (cfg.use_runs_pass) {
        detail::RunsState st;
        st.from_assignment(assign, dp.n());
        for (int round = 1; round <= max_rounds; ++round) {
            out.rounds = round;
            if (detail::runs_pass(st, pos, alpha) == 0) {
                out.converged = true;
                break;
            }
        }
        out.assignment = st.to_assignment();
        out.counts = st.counts;
    } else {
        std::vector<int> counts(dp.n(), 0);
        for (int c : assign) counts[std::size_t(c)] += 1;
        for (int round = 1; round <= max_rounds; ++round) {
            out.rounds = round;
            if (detail::naive_pass(assign, counts, pos, P, alpha) == 0) {
                out.converged = true;
                break;
            }
        }
        out.assignment = std::move(assign);
        out.counts = std::move(counts);
    }
    return out;
}

inline double discrete_potential(const DiscretePlacement& dp, const std::vector<int>& assign,
                                 double alpha) {
    const int P = dp.P;
    auto pos = dp.positions();
    std::vector<int> counts(dp.n(), 0);
    double dist = 0.0;
    for (int j = 0; j < P; ++j) {
        int f = assign[std::size_t(j)];
        counts[std::size_t(f)] += 1;
        dist += std::abs(pos[std::size_t(f)] - (double(j) + 0.5) / double(P)) / double(P);
    }
    double cong = 0.0;
    for (int c : counts) {
        double l = double(c) / double(P);
        cong += l * l / 2.0;
    }
    return (1.0 - alpha) * dist + alpha * cong;
}

struct SlotScan {
    int best_slot = 0;
    int best_count = 0;
    int incumbent_slot = 0;
    int incumbent_count = 0;
    double best_load = 0.0;
    double incumbent_load = 0.0;
};

// Best empirical deviation for one facility: try every slot in ascending
// order, rerunning the client dynamics warm-started from the previous
// candidate's rest point; ties keep the lowest slot.
inline SlotScan facility_slot_scan(const DiscretePlacement& dp, std::size_t f, double alpha,
                                   const SimConfig& cfg = {}) {
    if (f >= dp.n()) throw std::invalid_argument("facility_slot_scan: facility out of range");
    auto incumbent = empirical_client_equilibrium(dp, alpha, cfg);
    SlotScan out;
    out.incumbent_slot = dp.slots[f];
    out.incumbent_count = incumbent.counts[f];
    out.best_count = -1;
    DiscretePlacement moved = dp;
    const int max_rounds = cfg.max_rounds > 0 ? cfg.max_rounds : 50 * dp.P;
    if (cfg.use_runs_pass) {
        detail::RunsState st;
        st.from_assignment(incumbent.assignment, dp.n());
        auto pos = moved.positions();
        st.canonicalize_groups(pos);
        for (int c = 0; c < dp.P; ++c) {
            moved.slots[f] = c;
            pos[f] = moved.position(f);
            for (int round = 1; round <= max_rounds; ++round)
                if (detail::runs_pass(st, pos, alpha) == 0) break;
            if (st.counts[f] > out.best_count) {
                out.best_count = st.counts[f];
                out.best_slot = c;
            }
            st.canonicalize_groups(pos);
        }
    } else {
        // identical candidate trajectory to the runs path, including the
        // between-candidate canonicalization
        auto canonize = [&](std::vector<int>& a) {
            detail::RunsState t;
            t.from_assignment(a, dp.n());
            t.canonicalize_groups(moved.positions());
            a = t.to_assignment();
        };
        std::vector<int> warm = incumbent.assignment;
        canonize(warm);
        for (int c = 0; c < dp.P; ++c) {
            moved.slots[f] = c;
            auto res = empirical_client_equilibrium(moved, alpha, cfg, &warm);
            warm = res.assignment;
            canonize(warm);
            if (res.counts[f] > out.best_count) {
                out.best_count = res.counts[f];
                out.best_slot = c;
            }
        }
    }
    out.best_load = double(out.best_count) / double(dp.P);
    out.incumbent_load = double(out.incumbent_count) / double(dp.P);
    return out;
}

struct EmpiricalImprovement {
    std::vector<double> factors;
    double rho = 1.0;
    std::size_t argmax_facility = 0;
};

inline EmpiricalImprovement improvement_factors_empirical(const DiscretePlacement& dp,
                                                          double alpha,
                                                          const SimConfig& cfg = {}) {
    EmpiricalImprovement out;
    out.factors.reserve(dp.n());
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < dp.n(); ++f) {
        auto scan = facility_slot_scan(dp, f, alpha, cfg);
        double factor;
        if (scan.incumbent_load > 0.0)
            factor = std::max(1.0, scan.best_load / scan.incumbent_load);
        else
            factor = scan.best_load > 0.0 ? inf : 1.0;
        out.factors.push_back(factor);
    }
    out.rho = 1.0;
    for (std::size_t f = 0; f < out.factors.size(); ++f) {
        if (out.factors[f] > out.rho) {
            out.rho = out.factors[f];
            out.argmax_facility = f;
        }
    }
    return out;
}

}  // namespace kohlberg
