#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "delayosc/analysis.hpp"
#include "delayosc/classical.hpp"
#include "delayosc/delay_solver.hpp"
#include "delayosc/errors.hpp"
#include "delayosc/history.hpp"
#include "delayosc/operator.hpp"
#include "delayosc/quadrature.hpp"
#include "delayosc/types.hpp"

namespace delayosc {

using json = nlohmann::json;

enum class HistoryKind { polynomial, trig, samples };
enum class ForcingKind { zero, constant, polynomial, trig };
enum class ConvergenceFamily { linear, history_scaled };

/// Declarative scenario: everything a CLI run needs to assemble a
/// DelayProblem, its classical counterpart and the analysis drivers.
struct ScenarioConfig {
    Matrix omega;
    double tau = 0.0;
    std::optional<double> tau0;
    double horizon = 0.0;

    HistoryKind history_kind = HistoryKind::polynomial;
    std::vector<Vector> history_coefficients;  // polynomial
    Vector history_amplitude;                  // trig
    double history_frequency = 1.0;
    double history_phase = 0.0;
    std::vector<Vector> history_values;  // samples
    std::vector<Vector> history_derivs;

    ForcingKind forcing_kind = ForcingKind::zero;
    Vector forcing_value;                      // constant
    std::vector<Vector> forcing_coefficients;  // polynomial
    Vector forcing_amplitude;                  // trig
    double forcing_frequency = 1.0;
    double forcing_phase = 0.0;
    std::vector<double> forcing_kinks;

    std::optional<Vector> x0;
    std::optional<Vector> x1;
    std::vector<double> taus;

    int grid_points = 512;
    QuadratureRule quadrature;
    MildForm mild_form = MildForm::derived;
    ConvergenceFamily family = ConvergenceFamily::linear;

    /// tau0 is only needed by the bounds machinery; commands that use it
    /// reject configs lacking the field.
    [[nodiscard]] double require_tau0() const {
        if (!tau0) {
            throw ConfigError("tau0: required field is missing");
        }
        return *tau0;
    }
};

namespace detail {

inline Vector parse_vector(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(field + ": expected a non-empty array of numbers");
    }
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw ConfigError(field + "[" + std::to_string(i) + "]: expected a number");
        }
        v(static_cast<Index>(i)) = j[i].get<double>();
    }
    return v;
}

inline std::vector<Vector> parse_vector_list(const json& j, const std::string& field, Index dim) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(field + ": expected a non-empty array");
    }
    std::vector<Vector> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string slot = field + "[" + std::to_string(i) + "]";
        Vector v = j[i].is_number() ? Vector::Constant(1, j[i].get<double>()) : parse_vector(j[i], slot);
        if (v.size() != dim) {
            throw ConfigError(slot + ": expected dimension " + std::to_string(dim) + ", got " +
                              std::to_string(v.size()));
        }
        out.push_back(std::move(v));
    }
    return out;
}

inline Matrix parse_omega(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        const std::string prefix = "diag:";
        if (s.rfind(prefix, 0) != 0) {
            throw ConfigError("omega: string form must be \"diag:[...]\"");
        }
        json d;
        try {
            d = json::parse(s.substr(prefix.size()));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("omega: bad diag payload: ") + e.what());
        }
        Vector diag = parse_vector(d, "omega.diag");
        return Matrix(diag.asDiagonal());
    }
    if (!j.is_array() || j.empty()) {
        throw ConfigError("omega: expected a nested array or \"diag:[...]\"");
    }
    const auto n = static_cast<Index>(j.size());
    Matrix m(n, n);
    for (Index r = 0; r < n; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != n) {
            throw ConfigError("omega: row " + std::to_string(r) + " must have " + std::to_string(n) +
                              " entries");
        }
        for (Index c = 0; c < n; ++c) {
            const json& cell = row[static_cast<std::size_t>(c)];
            if (!cell.is_number()) {
                throw ConfigError("omega[" + std::to_string(r) + "][" + std::to_string(c) +
                                  "]: expected a number");
            }
            m(r, c) = cell.get<double>();
        }
    }
    return m;
}

inline double require_positive(const json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_number()) {
        throw ConfigError(field + ": required numeric field is missing");
    }
    const double v = j[field].get<double>();
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(field + ": must be positive and finite, got " + std::to_string(v));
    }
    return v;
}

}  // namespace detail

[[nodiscard]] inline ScenarioConfig parse_scenario(const json& j) {
    ScenarioConfig cfg;
    if (!j.contains("omega")) {
        throw ConfigError("omega: required field is missing");
    }
    cfg.omega = detail::parse_omega(j["omega"]);
    const Index dim = cfg.omega.rows();
    cfg.tau = detail::require_positive(j, "tau");
    cfg.horizon = detail::require_positive(j, "horizon");
    if (j.contains("tau0")) {
        cfg.tau0 = detail::require_positive(j, "tau0");
    }

    if (!j.contains("history") || !j["history"].is_object()) {
        throw ConfigError("history: required object is missing");
    }
    const json& h = j["history"];
    const std::string hkind = h.value("kind", "");
    if (hkind == "polynomial") {
        cfg.history_kind = HistoryKind::polynomial;
        if (!h.contains("coefficients")) {
            throw ConfigError("history.coefficients: required for kind \"polynomial\"");
        }
        cfg.history_coefficients = detail::parse_vector_list(h["coefficients"], "history.coefficients", dim);
    } else if (hkind == "trig") {
        cfg.history_kind = HistoryKind::trig;
        if (!h.contains("amplitude")) {
            throw ConfigError("history.amplitude: required for kind \"trig\"");
        }
        cfg.history_amplitude = h["amplitude"].is_number()
                                    ? Vector(Vector::Constant(1, h["amplitude"].get<double>()))
                                    : detail::parse_vector(h["amplitude"], "history.amplitude");
        if (cfg.history_amplitude.size() != dim) {
            throw ConfigError("history.amplitude: expected dimension " + std::to_string(dim));
        }
        cfg.history_frequency = h.value("frequency", 1.0);
        cfg.history_phase = h.value("phase", 0.0);
    } else if (hkind == "samples") {
        cfg.history_kind = HistoryKind::samples;
        if (!h.contains("values") || !h.contains("derivs")) {
            throw ConfigError("history.values/history.derivs: required for kind \"samples\"");
        }
        cfg.history_values = detail::parse_vector_list(h["values"], "history.values", dim);
        cfg.history_derivs = detail::parse_vector_list(h["derivs"], "history.derivs", dim);
    } else {
        throw ConfigError("history.kind: expected \"polynomial\", \"trig\" or \"samples\", got \"" +
                          hkind + "\"");
    }

    const json& f = j.contains("forcing") ? j["forcing"] : json{{"kind", "zero"}};
    if (!f.is_object()) {
        throw ConfigError("forcing: expected an object");
    }
    const std::string fkind = f.value("kind", "zero");
    if (fkind == "zero") {
        cfg.forcing_kind = ForcingKind::zero;
    } else if (fkind == "constant") {
        cfg.forcing_kind = ForcingKind::constant;
        if (!f.contains("value")) {
            throw ConfigError("forcing.value: required for kind \"constant\"");
        }
        cfg.forcing_value = f["value"].is_number() ? Vector(Vector::Constant(1, f["value"].get<double>()))
                                                   : detail::parse_vector(f["value"], "forcing.value");
        if (cfg.forcing_value.size() != dim) {
            throw ConfigError("forcing.value: expected dimension " + std::to_string(dim));
        }
    } else if (fkind == "polynomial") {
        cfg.forcing_kind = ForcingKind::polynomial;
        if (!f.contains("coefficients")) {
            throw ConfigError("forcing.coefficients: required for kind \"polynomial\"");
        }
        cfg.forcing_coefficients = detail::parse_vector_list(f["coefficients"], "forcing.coefficients", dim);
    } else if (fkind == "trig") {
        cfg.forcing_kind = ForcingKind::trig;
        if (!f.contains("amplitude")) {
            throw ConfigError("forcing.amplitude: required for kind \"trig\"");
        }
        cfg.forcing_amplitude = f["amplitude"].is_number()
                                    ? Vector(Vector::Constant(1, f["amplitude"].get<double>()))
                                    : detail::parse_vector(f["amplitude"], "forcing.amplitude");
        if (cfg.forcing_amplitude.size() != dim) {
            throw ConfigError("forcing.amplitude: expected dimension " + std::to_string(dim));
        }
        cfg.forcing_frequency = f.value("frequency", 1.0);
        cfg.forcing_phase = f.value("phase", 0.0);
    } else {
        throw ConfigError("forcing.kind: expected \"zero\", \"constant\", \"polynomial\" or \"trig\", got \"" +
                          fkind + "\"");
    }
    if (f.contains("kinks")) {
        for (std::size_t i = 0; i < f["kinks"].size(); ++i) {
            cfg.forcing_kinks.push_back(f["kinks"][i].get<double>());
        }
    }

    if (j.contains("x0")) {
        Vector v = detail::parse_vector(j["x0"], "x0");
        if (v.size() != dim) {
            throw ConfigError("x0: expected dimension " + std::to_string(dim));
        }
        cfg.x0 = v;
    }
    if (j.contains("x1")) {
        Vector v = detail::parse_vector(j["x1"], "x1");
        if (v.size() != dim) {
            throw ConfigError("x1: expected dimension " + std::to_string(dim));
        }
        cfg.x1 = v;
    }
    if (j.contains("taus")) {
        for (std::size_t i = 0; i < j["taus"].size(); ++i) {
            cfg.taus.push_back(j["taus"][i].get<double>());
        }
    }

    cfg.grid_points = j.value("grid_points", 512);
    if (cfg.grid_points < 2) {
        throw ConfigError("grid_points: must be >= 2");
    }
    if (j.contains("quadrature")) {
        const json& q = j["quadrature"];
        const std::string scheme = q.value("scheme", "gauss-legendre");
        if (scheme == "gauss-legendre") {
            cfg.quadrature.scheme = QuadScheme::gauss_legendre;
        } else if (scheme == "simpson") {
            cfg.quadrature.scheme = QuadScheme::simpson;
        } else {
            throw ConfigError("quadrature.scheme: expected \"gauss-legendre\" or \"simpson\"");
        }
        cfg.quadrature.nodes_per_cell = q.value("nodes_per_cell", 8);
        try {
            cfg.quadrature.validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("quadrature.nodes_per_cell: ") + e.what());
        }
    }
    if (j.contains("variant")) {
        const std::string form = j["variant"].value("mild_form", "derived");
        if (form == "paper") {
            cfg.mild_form = MildForm::paper;
        } else if (form == "derived") {
            cfg.mild_form = MildForm::derived;
        } else {
            throw ConfigError("variant.mild_form: expected \"paper\" or \"derived\", got \"" + form + "\"");
        }
    }
    if (j.contains("convergence")) {
        const std::string family = j["convergence"].value("family", "linear");
        if (family == "linear") {
            cfg.family = ConvergenceFamily::linear;
        } else if (family == "history_scaled") {
            cfg.family = ConvergenceFamily::history_scaled;
        } else {
            throw ConfigError("convergence.family: expected \"linear\" or \"history_scaled\"");
        }
    }
    return cfg;
}

[[nodiscard]] inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file: " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse failure in ") + path + ": " + e.what());
    }
    return parse_scenario(j);
}

/// Normalized serialization; parse_scenario(scenario_to_json(cfg)) builds an
/// identical problem.
[[nodiscard]] inline json scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    json omega = json::array();
    for (Index r = 0; r < cfg.omega.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < cfg.omega.cols(); ++c) {
            row.push_back(cfg.omega(r, c));
        }
        omega.push_back(row);
    }
    j["omega"] = omega;
    j["tau"] = cfg.tau;
    if (cfg.tau0) {
        j["tau0"] = *cfg.tau0;
    }
    j["horizon"] = cfg.horizon;

    auto vec_to_json = [](const Vector& v) {
        json a = json::array();
        for (Index i = 0; i < v.size(); ++i) {
            a.push_back(v(i));
        }
        return a;
    };
    auto list_to_json = [&](const std::vector<Vector>& list) {
        json a = json::array();
        for (const Vector& v : list) {
            a.push_back(vec_to_json(v));
        }
        return a;
    };

    json h;
    switch (cfg.history_kind) {
        case HistoryKind::polynomial:
            h["kind"] = "polynomial";
            h["coefficients"] = list_to_json(cfg.history_coefficients);
            break;
        case HistoryKind::trig:
            h["kind"] = "trig";
            h["amplitude"] = vec_to_json(cfg.history_amplitude);
            h["frequency"] = cfg.history_frequency;
            h["phase"] = cfg.history_phase;
            break;
        case HistoryKind::samples:
            h["kind"] = "samples";
            h["values"] = list_to_json(cfg.history_values);
            h["derivs"] = list_to_json(cfg.history_derivs);
            break;
    }
    j["history"] = h;

    json f;
    switch (cfg.forcing_kind) {
        case ForcingKind::zero:
            f["kind"] = "zero";
            break;
        case ForcingKind::constant:
            f["kind"] = "constant";
            f["value"] = vec_to_json(cfg.forcing_value);
            break;
        case ForcingKind::polynomial:
            f["kind"] = "polynomial";
            f["coefficients"] = list_to_json(cfg.forcing_coefficients);
            break;
        case ForcingKind::trig:
            f["kind"] = "trig";
            f["amplitude"] = vec_to_json(cfg.forcing_amplitude);
            f["frequency"] = cfg.forcing_frequency;
            f["phase"] = cfg.forcing_phase;
            break;
    }
    if (!cfg.forcing_kinks.empty()) {
        f["kinks"] = cfg.forcing_kinks;
    }
    j["forcing"] = f;

    if (cfg.x0) {
        j["x0"] = vec_to_json(*cfg.x0);
    }
    if (cfg.x1) {
        j["x1"] = vec_to_json(*cfg.x1);
    }
    if (!cfg.taus.empty()) {
        j["taus"] = cfg.taus;
    }
    j["grid_points"] = cfg.grid_points;
    j["quadrature"] = {
        {"scheme", cfg.quadrature.scheme == QuadScheme::gauss_legendre ? "gauss-legendre" : "simpson"},
        {"nodes_per_cell", cfg.quadrature.nodes_per_cell}};
    j["variant"] = {{"mild_form", cfg.mild_form == MildForm::paper ? "paper" : "derived"}};
    j["convergence"] = {
        {"family", cfg.family == ConvergenceFamily::linear ? "linear" : "history_scaled"}};
    return j;
}

/// Instantiate the configured history on [-2 tau, 0] for the given tau.
[[nodiscard]] inline HistoryFunction make_history(const ScenarioConfig& cfg, double tau) {
    const Index dim = cfg.omega.rows();
    switch (cfg.history_kind) {
        case HistoryKind::polynomial: {
            const auto coeffs = cfg.history_coefficients;
            auto eval = [coeffs, dim](double t, int order) {
                Vector acc = Vector::Zero(dim);
                for (std::size_t i = 0; i < coeffs.size(); ++i) {
                    const auto p = static_cast<int>(i);
                    double factor = 1.0;
                    for (int d = 0; d < order; ++d) {
                        factor *= static_cast<double>(p - d);
                    }
                    if (factor == 0.0) {
                        continue;
                    }
                    acc += coeffs[i] * (factor * std::pow(t, p - order));
                }
                return acc;
            };
            return HistoryFunction::analytic(
                tau, dim, [eval](double t) { return eval(t, 0); }, [eval](double t) { return eval(t, 1); },
                [eval](double t) { return eval(t, 2); });
        }
        case HistoryKind::trig: {
            const Vector amp = cfg.history_amplitude;
            const double w = cfg.history_frequency;
            const double ph = cfg.history_phase;
            return HistoryFunction::analytic(
                tau, dim, [amp, w, ph](double t) { return Vector(amp * std::sin(w * t + ph)); },
                [amp, w, ph](double t) { return Vector(amp * (w * std::cos(w * t + ph))); },
                [amp, w, ph](double t) { return Vector(amp * (-w * w * std::sin(w * t + ph))); });
        }
        case HistoryKind::samples:
        default:
            return HistoryFunction::sampled(tau, cfg.history_values, cfg.history_derivs);
    }
}

[[nodiscard]] inline ForcingFunction make_forcing(const ScenarioConfig& cfg) {
    const Index dim = cfg.omega.rows();
    switch (cfg.forcing_kind) {
        case ForcingKind::zero:
            return ForcingFunction::zero(dim);
        case ForcingKind::constant: {
            const Vector v = cfg.forcing_value;
            return ForcingFunction::from(dim, [v](double) { return v; }, cfg.forcing_kinks);
        }
        case ForcingKind::polynomial: {
            const auto coeffs = cfg.forcing_coefficients;
            return ForcingFunction::from(
                dim,
                [coeffs, dim](double t) {
                    Vector acc = Vector::Zero(dim);
                    double power = 1.0;
                    for (const Vector& c : coeffs) {
                        acc += c * power;
                        power *= t;
                    }
                    return acc;
                },
                cfg.forcing_kinks);
        }
        case ForcingKind::trig:
        default: {
            const Vector amp = cfg.forcing_amplitude;
            const double w = cfg.forcing_frequency;
            const double ph = cfg.forcing_phase;
            return ForcingFunction::from(
                dim, [amp, w, ph](double t) { return Vector(amp * std::sin(w * t + ph)); },
                cfg.forcing_kinks);
        }
    }
}

[[nodiscard]] inline DelayProblem make_delay_problem(const ScenarioConfig& cfg) {
    return DelayProblem(Operator(cfg.omega), cfg.tau, make_history(cfg, cfg.tau), make_forcing(cfg),
                        cfg.horizon);
}

/// Classical comparison problem: x0 / x1 default to phi(0) / phi'(0).
[[nodiscard]] inline ClassicalProblem make_classical_problem(const ScenarioConfig& cfg) {
    HistoryFunction phi = make_history(cfg, cfg.tau);
    const Vector x0 = cfg.x0 ? *cfg.x0 : phi.value(0.0);
    const Vector x1 = cfg.x1 ? *cfg.x1 : phi.deriv1(0.0);
    return ClassicalProblem(Operator(cfg.omega), x0, x1, make_forcing(cfg), cfg.horizon);
}

/// The tau-family for convergence studies: the linear consistent history by
/// default, or the configured analytic history re-instantiated per tau.
[[nodiscard]] inline HistoryBuilder make_history_builder(const ScenarioConfig& cfg) {
    if (cfg.family == ConvergenceFamily::linear) {
        const ClassicalProblem base = make_classical_problem(cfg);
        return linear_consistent_history(base.x0, base.x1);
    }
    if (cfg.history_kind == HistoryKind::samples) {
        throw ConfigError("convergence.family: \"history_scaled\" is not available for sampled histories");
    }
    return [cfg](double tau) { return make_history(cfg, tau); };
}

}  // namespace delayosc
