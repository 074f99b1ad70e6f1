// CLI for equilibria in spatial competition with congestion: exact solves,
// approximation factors, sweeps, figure datasets, conjecture checks, and the
// n=3 placement scan.  Exit codes: 0 ok, 2 sanity-bound failure, 1 usage/IO.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kohlberg/experiments.hpp"

namespace {

using namespace kohlberg;

std::vector<int> parse_n_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto dots = tok.find("..");
        if (dots != std::string::npos) {
            int a = std::stoi(tok.substr(0, dots));
            int b = std::stoi(tok.substr(dots + 2));
            for (int n = a; n <= b; ++n) out.push_back(n);
        } else if (!tok.empty()) {
            out.push_back(std::stoi(tok));
        }
    }
    if (out.empty()) throw CLI::ValidationError("--n", "empty n list");
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

// "NNN" is a fixed client count, "NNNn" scales with the facility count
PrecisionRule parse_precision(const std::string& text) {
    if (text.empty()) throw CLI::ValidationError("--precision", "empty value");
    PrecisionRule rule;
    std::string digits = text;
    if (digits.back() == 'n' || digits.back() == 'N') {
        rule.scaled = true;
        digits.pop_back();
    } else {
        rule.scaled = false;
    }
    rule.value = std::stoi(digits);
    return rule;
}

PlacementKind parse_kind(const std::string& text) {
    if (text == "opt") return PlacementKind::opt;
    if (text == "pair") return PlacementKind::pair;
    throw CLI::ValidationError("--kind", "expected opt or pair");
}

void emit_rows(const std::vector<ResultRow>& rows, const std::string& format,
               const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << (format == "json" ? to_json(rows) : to_csv(rows));
    } else {
        export_rows(rows, format, out_path);
        std::cout << rows.size() << " rows -> " << out_path << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"equilibria in spatial competition with congestion on [0,1]"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "flat key = value configuration file");

    double alpha = 0.5;
    std::string n_text = "10";
    std::string kind_text = "pair";
    std::string precision_text = "250n";
    std::string engine = "continuous";
    std::string out_path;
    std::string format = "csv";
    int workers = 1;
    bool no_timing = false;
    int grid = 128;
    double alpha_start = 0.0, alpha_stop = 1.0, alpha_step = 0.05;
    std::string positions_text;
    std::string alphas_text = "0.1,0.5,0.9";

    app.add_option("--alpha", alpha, "congestion weight in [0,1]");
    app.add_option("--n", n_text, "facility count, list (8,10,20) or range (4..30)");
    app.add_option("--kind", kind_text, "placement family: opt or pair");
    app.add_option("--precision", precision_text, "client count: NNN fixed or NNNn scaled");
    app.add_option("--engine", engine, "continuous, discrete, or closed-form");
    app.add_option("--out", out_path, "output file (stdout when omitted)");
    app.add_option("--format", format, "csv or json");
    app.add_option("--workers", workers, "sweep worker threads");
    app.add_flag("--no-timing", no_timing, "zero the runtime_ms column for byte-stable output");
    app.add_option("--grid", grid, "continuous best-response candidate grid (>= 64)");
    app.add_option("--alpha-start", alpha_start, "sweep grid start");
    app.add_option("--alpha-stop", alpha_stop, "sweep grid stop");
    app.add_option("--alpha-step", alpha_step, "sweep grid step");
    app.add_option("--positions", positions_text, "explicit facility positions, comma-separated");
    app.add_option("--alphas", alphas_text, "alpha list for conjecture checks");

    auto* cmd_solve = app.add_subcommand("solve", "client equilibrium for one placement");
    auto* cmd_rho = app.add_subcommand("rho", "approximation factor for one placement");
    auto* cmd_sweep = app.add_subcommand("sweep", "rho over an (n, alpha) grid");
    auto* cmd_repro = app.add_subcommand("reproduce", "emit a named figure dataset");
    std::string figure;
    cmd_repro->add_option("figure", figure,
                          "opt-rho, pair-rho, quality, precision, conjecture, or peak")
        ->required();
    auto* cmd_conj = app.add_subcommand("verify-conjectures", "argmax-facility membership checks");
    std::string conj_kinds = "both";
    cmd_conj->add_option("--kinds", conj_kinds, "opt, pair, or both");
    auto* cmd_scan = app.add_subcommand("scan-n3", "grid scan of all 3-facility placements");
    double scan_step = 0.01, scan_alpha = 0.0;
    cmd_scan->add_option("--step", scan_step, "placement grid step (<= 0.02)");
    cmd_scan->add_option("--scan-alpha", scan_alpha, "alpha for the scan");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        auto n_values = parse_n_list(n_text);
        auto kind = parse_kind(kind_text);
        auto precision = parse_precision(precision_text);

        auto make_placement = [&](int n) {
            if (!positions_text.empty()) return Placement(parse_double_list(positions_text));
            return canonical_placement(kind, n);
        };

        if (*cmd_solve) {
            int n = n_values.front();
            if (engine == "discrete") {
                auto p = make_placement(n);
                DiscretePlacement dp(p, precision.resolve(int(p.size())));
                auto res = empirical_client_equilibrium(dp, alpha);
                std::cout << "P=" << dp.P << " alpha=" << alpha << " rounds=" << res.rounds
                          << " converged=" << (res.converged ? "yes" : "no") << "\n";
                std::cout << "slots:";
                for (int s : dp.slots) std::cout << ' ' << s;
                std::cout << "\nloads:";
                for (double l : res.loads(dp.P)) std::cout << ' ' << l;
                std::cout << "\npotential=" << discrete_potential(dp, res.assignment, alpha)
                          << "\n";
            } else if (engine == "continuous") {
                auto p = make_placement(n);
                auto sol = solve_client_equilibrium(p, alpha);
                std::cout << "n=" << p.size() << " alpha=" << alpha
                          << " converged=" << (sol.converged ? "yes" : "no")
                          << " sweeps=" << sol.iterations << "\n";
                std::cout << "positions:";
                for (std::size_t i = 0; i < p.size(); ++i) std::cout << ' ' << p[i];
                std::cout << "\nborders:";
                for (double b : sol.borders.beta) std::cout << ' ' << b;
                std::cout << "\nloads:";
                for (double l : sol.borders.loads()) std::cout << ' ' << l;
                std::cout << "\npotential=" << potential(p, sol.borders, alpha) << "\n";
            } else {
                std::cerr << "solve: engine must be continuous or discrete\n";
                return 1;
            }
            return 0;
        }

        if (*cmd_rho) {
            if (engine != "continuous" && engine != "discrete" && engine != "closed-form") {
                std::cerr << "rho: engine must be continuous, discrete, or closed-form\n";
                return 1;
            }
            int n = n_values.front();
            std::vector<ResultRow> rows;
            ResultRow base;
            base.n = n;
            base.alpha = alpha;
            base.engine = engine;
            if (engine == "closed-form") {
                double rho = 0.0;
                if (detail::closed_form_rho(kind, n, alpha, &rho)) {
                    base.improvement_factor = rho;
                    base.rho = rho;
                } else {
                    base.status = "no-closed-form";
                }
                rows.push_back(base);
            } else if (engine == "continuous") {
                auto p = make_placement(n);
                base.n = int(p.size());
                auto rep = improvement_factors(p, alpha, grid);
                base.improvement_factor = rep.rho;
                base.rho = rep.rho;
                rows.push_back(base);
                for (std::size_t f = 0; f < rep.per_facility.size(); ++f) {
                    ResultRow r = base;
                    r.facility_index = int(f) + 1;
                    r.improvement_factor = rep.per_facility[f].improvement_factor;
                    rows.push_back(r);
                }
            } else {
                auto p = make_placement(n);
                base.n = int(p.size());
                DiscretePlacement dp(p, precision.resolve(int(p.size())));
                auto rep = improvement_factors_empirical(dp, alpha);
                base.P = dp.P;
                base.improvement_factor = rep.rho;
                base.rho = rep.rho;
                rows.push_back(base);
                for (std::size_t f = 0; f < rep.factors.size(); ++f) {
                    ResultRow r = base;
                    r.facility_index = int(f) + 1;
                    r.improvement_factor = rep.factors[f];
                    rows.push_back(r);
                }
            }
            emit_rows(rows, format, out_path);
            return 0;
        }

        if (*cmd_sweep) {
            SweepSpec spec;
            spec.n_values = n_values;
            spec.alpha_start = alpha_start;
            spec.alpha_stop = alpha_stop;
            spec.alpha_step = alpha_step;
            spec.precision = precision;
            spec.kind = kind;
            spec.engine = engine;
            spec.workers = workers;
            spec.grid = grid;
            spec.timing = !no_timing;
            auto rows = run_sweep(spec);
            emit_rows(rows, format, out_path);
            return 0;
        }

        if (*cmd_repro) {
            SweepSpec base;
            if (app.count("--n") > 0) base.n_values = n_values;
            base.alpha_step = alpha_step;
            base.precision = precision;
            base.workers = workers;
            base.grid = grid;
            base.timing = !no_timing;
            auto fig = reproduce_figure(figure, base);
            emit_rows(fig.rows, format, out_path);
            if (!fig.sanity_ok) {
                std::cerr << "sanity bounds violated:\n" << fig.sanity_report;
                return 2;
            }
            return 0;
        }

        if (*cmd_conj) {
            auto alphas = parse_double_list(alphas_text);
            std::vector<PlacementKind> kinds;
            if (conj_kinds == "both") {
                kinds = {PlacementKind::opt, PlacementKind::pair};
            } else {
                kinds = {parse_kind(conj_kinds)};
            }
            std::vector<ResultRow> rows;
            int membership_failures = 0;
            for (auto k : kinds) {
                auto rep = verify_conjectures(k, n_values, alphas, precision);
                for (const auto& cell : rep.cells)
                    if (!cell.membership_ok) ++membership_failures;
                std::cout << (k == PlacementKind::opt ? "opt" : "pair") << ": "
                          << rep.passed << " passed, " << rep.failed << " flagged of "
                          << rep.cells.size() << " cells\n";
                for (auto& r : rep.rows) {
                    if (no_timing) r.runtime_ms = 0.0;
                    rows.push_back(std::move(r));
                }
            }
            if (!out_path.empty()) emit_rows(rows, format, out_path);
            if (membership_failures > 0) {
                std::cerr << membership_failures << " cells violate the argmax membership\n";
                return 2;
            }
            return 0;
        }

        if (*cmd_scan) {
            double a = cmd_scan->count("--scan-alpha") ? scan_alpha : 0.0;
            auto res = scan_n3_lower_bound(scan_step, a, grid);
            std::ostringstream line;
            line << "min_rho=" << detail::g9(res.min_rho) << " argmin=(" << detail::g9(res.argmin[0])
                 << ", " << detail::g9(res.argmin[1]) << ", " << detail::g9(res.argmin[2])
                 << ") placements=" << res.placements << " alpha=" << detail::g9(a) << "\n";
            std::cout << line.str();
            if (!out_path.empty()) {
                std::ofstream f(out_path, std::ios::binary);
                if (!f) throw std::runtime_error("cannot open " + out_path);
                f << line.str();
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
