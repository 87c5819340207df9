// delayosc: closed-form solver and verification harness for the linear
// oscillator with pure delay, xdd(t) - Omega^2 x(t - 2 tau) = f(t).
//
// Subcommands:
//   solve        export trajectories (closed_form | mild_form | step_oracle |
//                classical) as CSV
//   dexp         tabulate the delayed exponential and the fundamental
//                solutions x1, x2
//   bounds       check the delayed-exponential approximation bounds and the
//                per-segment a priori estimate
//   convergence  tau -> 0 error table against the no-delay oscillator with
//                fitted log-log slope
//
// Exit codes: 0 success, 1 I/O failure, 2 config/usage error, 3 solver error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "delayosc/analysis.hpp"
#include "delayosc/classical.hpp"
#include "delayosc/csv_io.hpp"
#include "delayosc/delay_solver.hpp"
#include "delayosc/delayed_exp.hpp"
#include "delayosc/errors.hpp"
#include "delayosc/scenario.hpp"
#include "delayosc/step_oracle.hpp"

namespace {

using namespace delayosc;

std::string resolve_output(const std::string& path) {
    const char* dir = std::getenv("DELAYOSC_OUTPUT_DIR");
    if (dir != nullptr && !std::filesystem::path(path).is_absolute()) {
        return (std::filesystem::path(dir) / path).string();
    }
    return path;
}

std::vector<double> sample_grid(double a, double b, int points, double tau,
                                const std::vector<double>& extra_knots) {
    std::vector<double> grid;
    for (int i = 0; i <= points; ++i) {
        grid.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(points));
    }
    for (long k = static_cast<long>(std::ceil(a / tau - 1e-12)); k * tau <= b + 1e-12 * tau; ++k) {
        const double t = static_cast<double>(k) * tau;
        if (t >= a && t <= b) {
            grid.push_back(t);
        }
    }
    for (double t : extra_knots) {
        if (t >= a && t <= b) {
            grid.push_back(t);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

void append_rows(CsvBuilder& csv, const std::vector<double>& grid, const std::string& source,
                 const std::function<Vector(double)>& value, const std::function<Vector(double)>& deriv) {
    for (double t : grid) {
        std::vector<std::string> cells;
        cells.push_back(CsvBuilder::cell(t));
        const Vector x = value(t);
        const Vector dx = deriv(t);
        for (Index i = 0; i < x.size(); ++i) {
            cells.push_back(CsvBuilder::cell(x(i)));
        }
        for (Index i = 0; i < dx.size(); ++i) {
            cells.push_back(CsvBuilder::cell(dx(i)));
        }
        cells.push_back(source);
        csv.row(cells);
    }
}

int cmd_solve(const std::string& config_path, const std::string& output_path,
              const std::string& sources_flag) {
    const ScenarioConfig cfg = load_scenario(config_path);

    static const std::vector<std::string> known = {"closed_form", "mild_form", "step_oracle", "classical"};
    std::set<std::string> wanted;
    std::stringstream ss(sources_flag);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (std::find(known.begin(), known.end(), item) == known.end()) {
            throw ConfigError("sources: unknown source \"" + item + "\"");
        }
        wanted.insert(item);
    }
    if (wanted.empty()) {
        throw ConfigError("sources: at least one source is required");
    }

    const Index dim = cfg.omega.rows();
    CsvBuilder csv;
    std::vector<std::string> header = {"t"};
    for (Index i = 1; i <= dim; ++i) {
        header.push_back("x_" + std::to_string(i));
    }
    for (Index i = 1; i <= dim; ++i) {
        header.push_back("dx_" + std::to_string(i));
    }
    header.push_back("source");
    csv.header(header);

    const DelayProblem problem = make_delay_problem(cfg);
    const std::vector<double> delay_grid =
        sample_grid(-2.0 * cfg.tau, cfg.horizon, cfg.grid_points, cfg.tau, cfg.forcing_kinks);

    for (const std::string& source : known) {
        if (wanted.count(source) == 0) {
            continue;
        }
        if (source == "closed_form" || source == "mild_form") {
            Trajectory traj(problem,
                            source == "closed_form" ? TrajectorySource::closed_form
                                                    : TrajectorySource::mild_form,
                            cfg.mild_form, cfg.quadrature);
            append_rows(csv, delay_grid, source, [&](double t) { return traj.value(t); },
                        [&](double t) { return traj.deriv(t); });
        } else if (source == "step_oracle") {
            const int n_segments = std::max(1, static_cast<int>(std::floor(
                                                   cfg.horizon / (2.0 * cfg.tau) + 1e-9)));
            OracleTrajectory oracle(
                integrate_segments(problem, n_segments, 2.0 * cfg.tau / 512.0, cfg.quadrature));
            std::vector<double> grid = sample_grid(-2.0 * cfg.tau, oracle.t_max(), cfg.grid_points,
                                                   cfg.tau, cfg.forcing_kinks);
            append_rows(csv, grid, source, [&](double t) { return oracle.value(t); },
                        [&](double t) { return oracle.deriv(t); });
        } else {
            const ClassicalProblem classical = make_classical_problem(cfg);
            std::vector<double> grid =
                sample_grid(0.0, cfg.horizon, cfg.grid_points, cfg.tau, cfg.forcing_kinks);
            append_rows(csv, grid, source,
                        [&](double t) { return classical_solution(classical, t, cfg.quadrature); },
                        [&](double t) { return classical_velocity(classical, t, cfg.quadrature); });
        }
    }
    write_file_atomic(resolve_output(output_path), csv.str());
    return 0;
}

int cmd_dexp(const std::string& omega_flag, double tau, double t_min, double t_max, int samples,
             const std::string& output_path) {
    if (!(tau > 0.0)) {
        throw ConfigError("tau: must be positive");
    }
    if (t_min > t_max) {
        throw ConfigError("t-min: must not exceed t-max");
    }
    if (samples < 2) {
        throw ConfigError("samples: must be >= 2");
    }
    json omega_json;
    try {
        omega_json = json::parse(omega_flag);
    } catch (const json::exception&) {
        omega_json = omega_flag;  // "diag:[...]" shorthand arrives as a plain string
    }
    const Matrix omega = detail::parse_omega(omega_json);
    const Index n = omega.rows();
    DelayedExpEvaluator ev(Operator(omega), tau);

    CsvBuilder csv;
    std::vector<std::string> header = {"t"};
    for (const char* part : {"exp", "x1", "x2"}) {
        for (Index r = 1; r <= n; ++r) {
            for (Index c = 1; c <= n; ++c) {
                header.push_back(std::string(part) + "_" + std::to_string(r) + "_" + std::to_string(c));
            }
        }
    }
    csv.header(header);
    for (int i = 0; i < samples; ++i) {
        const double t =
            t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(samples - 1);
        const Matrix e = delayed_exp(ev, t);
        const Matrix x1 = fundamental_x1(ev, t);
        const Matrix x2 = fundamental_x2(ev, t);
        std::vector<std::string> cells = {CsvBuilder::cell(t)};
        for (const Matrix* m : {&e, &x1, &x2}) {
            for (Index r = 0; r < n; ++r) {
                for (Index c = 0; c < n; ++c) {
                    cells.push_back(CsvBuilder::cell((*m)(r, c)));
                }
            }
        }
        csv.row(cells);
    }
    write_file_atomic(resolve_output(output_path), csv.str());
    return 0;
}

int cmd_bounds(const std::string& config_path, const std::string& output_path) {
    const ScenarioConfig cfg = load_scenario(config_path);
    const double tau0 = cfg.require_tau0();
    const Operator omega{cfg.omega};
    const double T = cfg.horizon;
    const int grid = std::max(16, cfg.grid_points);

    CsvBuilder csv;
    csv.header({"check", "tau", "observed", "bound", "satisfied"});
    auto flag = [](bool ok) { return std::string(ok ? "true" : "false"); };

    const BoundsConstants constants = bounds_constants(omega, cfg.tau, tau0, T);
    for (auto [name, value] : std::initializer_list<std::pair<const char*, double>>{
             {"constant_alpha", constants.alpha},
             {"constant_beta", constants.beta},
             {"constant_delta", constants.delta},
             {"constant_kappa", constants.kappa}}) {
        csv.row({name, CsvBuilder::cell(cfg.tau), CsvBuilder::cell(value), CsvBuilder::cell(value),
                 "true"});
    }

    const BoundCheckRow lemma = lemma_check(omega, cfg.tau, tau0, T, grid);
    csv.row({"lemma", CsvBuilder::cell(lemma.tau), CsvBuilder::cell(lemma.observed),
             CsvBuilder::cell(lemma.bound), flag(lemma.satisfied)});
    for (double gamma : {0.0, cfg.tau, 2.0 * cfg.tau}) {
        const BoundCheckRow row = corollary_check(omega, cfg.tau, tau0, gamma, T, grid);
        csv.row({"corollary_gamma_" + format_g17(gamma), CsvBuilder::cell(row.tau),
                 CsvBuilder::cell(row.observed), CsvBuilder::cell(row.bound), flag(row.satisfied)});
    }

    const DelayProblem problem = make_delay_problem(cfg);
    const int n_segments = std::max(1, static_cast<int>(std::floor(T / (2.0 * cfg.tau) + 1e-9)));
    const AprioriReport report =
        apriori_check(problem, integrate_segments(problem, n_segments, 2.0 * cfg.tau / 512.0));
    for (const AprioriReport::Row& row : report.per_segment) {
        csv.row({"apriori_n" + std::to_string(row.n), CsvBuilder::cell(cfg.tau),
                 CsvBuilder::cell(row.observed), CsvBuilder::cell(row.bound), flag(row.satisfied)});
    }
    write_file_atomic(resolve_output(output_path), csv.str());
    return 0;
}

int cmd_convergence(const std::string& config_path, const std::string& taus_flag,
                    const std::string& output_path) {
    const ScenarioConfig cfg = load_scenario(config_path);
    std::vector<double> taus = cfg.taus;
    if (!taus_flag.empty()) {
        taus.clear();
        std::stringstream ss(taus_flag);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                taus.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("taus: cannot parse \"" + item + "\" as a number");
            }
        }
    }
    if (taus.size() < 3) {
        throw ConfigError("taus: need >= 3 tau values for slope");
    }
    const double tau0 = cfg.require_tau0();
    const ClassicalProblem base = make_classical_problem(cfg);
    const ConvergenceTable table = solution_convergence_study(
        base, taus, make_history_builder(cfg), std::max(512, cfg.grid_points), tau0, cfg.quadrature);

    CsvBuilder csv;
    csv.header({"tau", "err_c0", "err_c1", "lemma_bound", "c0_bound", "c1_bound", "satisfied"});
    for (const ConvergenceRow& row : table.rows) {
        csv.row({CsvBuilder::cell(row.tau), CsvBuilder::cell(row.sup_error_c0),
                 CsvBuilder::cell(row.sup_error_c1), CsvBuilder::cell(row.lemma_bound),
                 CsvBuilder::cell(row.c0_bound), CsvBuilder::cell(row.c1_bound),
                 row.satisfied ? "true" : "false"});
    }
    if (table.exact_agreement) {
        csv.row({"slope", "ExactAgreement"});
    } else if (table.fitted_slope) {
        csv.row({"slope", CsvBuilder::cell(*table.fitted_slope)});
    } else {
        csv.row({"slope", "Undefined"});
    }
    write_file_atomic(resolve_output(output_path), csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-form solver for the linear oscillator with pure delay"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_path;
    std::string sources = "closed_form,mild_form,step_oracle,classical";
    std::string omega_flag;
    std::string taus_flag;
    double tau = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    int samples = 501;

    CLI::App* solve = app.add_subcommand("solve", "Export solution trajectories as CSV");
    solve->add_option("--config", config_path, "Scenario config file (JSON)")->required();
    solve->add_option("--output", output_path, "Output CSV path")->required();
    solve->add_option("--sources", sources,
                      "Comma list of closed_form, mild_form, step_oracle, classical");

    CLI::App* dexp = app.add_subcommand("dexp", "Tabulate exp_tau, x1 and x2");
    dexp->add_option("--omega", omega_flag, "Matrix as nested JSON arrays or \"diag:[...]\"")->required();
    dexp->add_option("--tau", tau, "Delay parameter tau > 0")->required();
    dexp->add_option("--t-min", t_min, "Start of the tabulated range")->required();
    dexp->add_option("--t-max", t_max, "End of the tabulated range")->required();
    dexp->add_option("--samples", samples, "Number of rows (uniform in t)");
    dexp->add_option("--output", output_path, "Output CSV path")->required();

    CLI::App* bounds = app.add_subcommand("bounds", "Approximation-bound and a priori checks");
    bounds->add_option("--config", config_path, "Scenario config file (JSON)")->required();
    bounds->add_option("--output", output_path, "Output CSV path")->required();

    CLI::App* convergence = app.add_subcommand("convergence", "tau -> 0 convergence table");
    convergence->add_option("--config", config_path, "Scenario config file (JSON)")->required();
    convergence->add_option("--taus", taus_flag, "Comma list of tau values (>= 3)");
    convergence->add_option("--output", output_path, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (solve->parsed()) {
            return cmd_solve(config_path, output_path, sources);
        }
        if (dexp->parsed()) {
            return cmd_dexp(omega_flag, tau, t_min, t_max, samples, output_path);
        }
        if (bounds->parsed()) {
            return cmd_bounds(config_path, output_path);
        }
        return cmd_convergence(config_path, taus_flag, output_path);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
}
