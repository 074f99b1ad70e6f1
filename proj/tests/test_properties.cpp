#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "kohlberg/continuous.hpp"
#include "kohlberg/experiments.hpp"

using namespace kohlberg;

namespace {

struct Instance {
    Placement p;
    double alpha;
};

Instance draw(std::mt19937& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int n = 1 + int(rng() % 6);
    std::vector<double> pos(static_cast<std::size_t>(n));
    for (double& x : pos) x = U(rng);
    // deliberate degeneracies: duplicated points and boundary placements
    if (n >= 2 && rng() % 4 == 0) pos[1] = pos[0];
    if (n >= 3 && rng() % 8 == 0) pos[2] = pos[0];
    if (rng() % 16 == 0) pos[0] = 0.0;
    if (rng() % 16 == 0) pos.back() = 1.0;
    double alpha = U(rng);
    if (rng() % 10 == 0) alpha = (rng() % 2) ? 0.0 : 1.0;
    return {Placement(std::move(pos)), alpha};
}

}  // namespace

TEST_CASE("randomized instances: equilibrium, symmetry, and factor properties") {
    std::mt19937 rng(20260822);
    std::uniform_real_distribution<double> D(-0.03, 0.03);
    int checked = 0;

    for (int t = 0; t < 500; ++t) {
        auto inst = draw(rng);
        const auto& p = inst.p;
        const double alpha = inst.alpha;
        INFO("instance " << t << ": n=" << p.size() << " alpha=" << alpha);

        auto sol = solve_client_equilibrium(p, alpha);
        REQUIRE(sol.converged);
        for (std::size_t i = 1; i < sol.borders.beta.size(); ++i)
            REQUIRE(sol.borders.beta[i] >= sol.borders.beta[i - 1]);

        // the client equilibrium is a local minimum of the convex potential
        double base = potential(p, sol.borders, alpha);
        for (int k = 0; k < 6; ++k) {
            auto beta = sol.borders.beta;
            for (std::size_t i = 1; i + 1 < beta.size(); ++i) beta[i] += D(rng);
            std::sort(beta.begin(), beta.end());
            for (double& b : beta) b = std::clamp(b, 0.0, 1.0);
            beta.front() = 0.0;
            beta.back() = 1.0;
            REQUIRE(potential(p, Borders(std::move(beta)), alpha) >= base - 1e-9);
        }

        // solving the mirrored instance mirrors the borders
        auto rsol = solve_client_equilibrium(reflect(p), alpha);
        REQUIRE(rsol.converged);
        for (std::size_t i = 0; i < sol.borders.beta.size(); ++i)
            REQUIRE(std::abs(rsol.borders.beta[i] +
                             sol.borders.beta[sol.borders.beta.size() - 1 - i] - 1.0) < 1e-7);

        // pure-distance and pure-congestion limits pin the borders exactly
        // at alpha=0 every border between distinct positions is their midpoint
        auto zero = solve_client_equilibrium(p, 0.0);
        for (std::size_t i = 1; i < p.size(); ++i)
            if (p[i] > p[i - 1])
                REQUIRE(std::abs(zero.borders.beta[i] - 0.5 * (p[i - 1] + p[i])) < 1e-8);
        auto one = solve_client_equilibrium(p, 1.0);
        for (std::size_t i = 0; i <= p.size(); ++i)
            REQUIRE(std::abs(one.borders.beta[i] - double(i) / double(p.size())) < 1e-10);

        // no facility can shrink by deviating, and the factors mirror
        auto rep = improvement_factors(p, alpha, 64);
        REQUIRE(rep.rho >= 1.0);
        for (const auto& fi : rep.per_facility) REQUIRE(fi.improvement_factor >= 1.0);
        double rrho = approximation_factor(reflect(p), alpha, 64);
        REQUIRE(std::abs(rep.rho - rrho) < 1e-6);

        ++checked;
    }
    CHECK(checked == 500);
}

TEST_CASE("parallel sweeps are deterministic") {
    SweepSpec spec;
    spec.n_values = {4, 6};
    spec.alpha_step = 0.25;
    spec.kind = PlacementKind::pair;
    spec.engine = "discrete";
    spec.precision = {true, 100};
    spec.timing = false;
    spec.workers = 1;
    auto one = to_csv(run_sweep(spec));
    spec.workers = 3;
    auto three = to_csv(run_sweep(spec));
    spec.workers = 3;
    auto again = to_csv(run_sweep(spec));
    CHECK(one == three);
    CHECK(three == again);
}
