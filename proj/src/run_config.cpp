#include "specflow/run_config.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "specflow/outputs.hpp"
#include "specflow/verify.hpp"

namespace specflow {

namespace {

using nlohmann::json;

struct ErrorList {
    std::vector<std::string> messages;

    void add(const std::string& msg) { messages.push_back(msg); }
    bool empty() const { return messages.empty(); }

    [[noreturn]] void raise() const {
        std::string joined = "invalid configuration:";
        for (const auto& m : messages) joined += "\n  - " + m;
        throw ConfigError(joined);
    }
};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& section,
                ErrorList& errors) {
    if (!obj.is_object()) {
        errors.add("section '" + section + "' must be an object");
        return;
    }
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            errors.add("unknown key '" + section + "." + it.key() + "'");
}

double number_or(const json& obj, const char* key, double fallback, const std::string& section,
                 ErrorList& errors) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) {
        errors.add("'" + section + "." + key + "' must be a number");
        return fallback;
    }
    return obj[key].get<double>();
}

int integer_or(const json& obj, const char* key, int fallback, const std::string& section,
               ErrorList& errors) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) {
        errors.add("'" + section + "." + key + "' must be an integer");
        return fallback;
    }
    return obj[key].get<int>();
}

std::string string_or(const json& obj, const char* key, const std::string& fallback,
                      const std::string& section, ErrorList& errors) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) {
        errors.add("'" + section + "." + key + "' must be a string");
        return fallback;
    }
    return obj[key].get<std::string>();
}

OperatorSpec parse_operator(const json& j, const std::string& section, ErrorList& errors) {
    OperatorSpec spec;
    if (!j.is_object()) {
        errors.add("section '" + section + "' must be an object");
        return spec;
    }
    const std::string kind = string_or(j, "kind", "path_dirichlet", section, errors);
    if (kind == "path_dirichlet" || kind == "path_neumann" || kind == "grid2d_dirichlet") {
        check_keys(j, {"kind", "n", "h"}, section, errors);
        spec.kind = kind == "path_dirichlet"    ? OperatorKind::path_dirichlet
                    : kind == "path_neumann"    ? OperatorKind::path_neumann
                                                : OperatorKind::grid2d_dirichlet;
        spec.n = integer_or(j, "n", 1, section, errors);
        spec.h = number_or(j, "h", 1.0, section, errors);
        if (spec.n < 1) errors.add("'" + section + ".n' must be >= 1");
        if (!(spec.h > 0.0)) errors.add("'" + section + ".h' must be > 0");
    } else if (kind == "weighted_edge") {
        check_keys(j, {"kind", "n", "h", "edge_coeffs"}, section, errors);
        spec.kind = OperatorKind::weighted_edge;
        spec.n = integer_or(j, "n", 1, section, errors);
        spec.h = number_or(j, "h", 1.0, section, errors);
        if (j.contains("edge_coeffs") && j["edge_coeffs"].is_array()) {
            const auto& arr = j["edge_coeffs"];
            spec.edge_coeffs.resize(arr.size());
            for (std::size_t i = 0; i < arr.size(); ++i)
                spec.edge_coeffs(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
        } else {
            errors.add("'" + section + ".edge_coeffs' must be an array of n+1 numbers");
        }
    } else if (kind == "fractional") {
        check_keys(j, {"kind", "s", "base"}, section, errors);
        spec.kind = OperatorKind::fractional;
        spec.s = number_or(j, "s", 0.5, section, errors);
        if (!(spec.s > 0.0 && spec.s < 1.0))
            errors.add("'" + section + ".s' must lie in (0,1)");
        if (j.contains("base"))
            spec.base = std::make_shared<OperatorSpec>(
                parse_operator(j["base"], section + ".base", errors));
        else
            errors.add("'" + section + "' fractional operator needs a 'base'");
        if (spec.base) {
            spec.n = spec.base->n;
            spec.h = spec.base->h;
        }
    } else if (kind == "dense") {
        check_keys(j, {"kind", "matrix_file"}, section, errors);
        spec.kind = OperatorKind::dense;
        spec.matrix_file = string_or(j, "matrix_file", "", section, errors);
        if (spec.matrix_file.empty()) {
            errors.add("'" + section + ".matrix_file' is required for a dense operator");
        } else {
            try {
                spec.matrix = load_dense_matrix(spec.matrix_file);
                spec.n = static_cast<int>(spec.matrix.rows());
            } catch (const std::exception& e) {
                errors.add(e.what());
            }
        }
    } else {
        errors.add("'" + section + ".kind' unknown operator kind '" + kind + "'");
    }
    return spec;
}

json operator_echo(const OperatorSpec& spec) {
    json j;
    j["kind"] = to_string(spec.kind);
    switch (spec.kind) {
        case OperatorKind::path_dirichlet:
        case OperatorKind::path_neumann:
        case OperatorKind::grid2d_dirichlet:
            j["n"] = spec.n;
            j["h"] = spec.h;
            break;
        case OperatorKind::weighted_edge: {
            j["n"] = spec.n;
            j["h"] = spec.h;
            std::vector<double> coeffs(spec.edge_coeffs.begin(), spec.edge_coeffs.end());
            j["edge_coeffs"] = coeffs;
            break;
        }
        case OperatorKind::fractional:
            j["s"] = spec.s;
            if (spec.base) j["base"] = operator_echo(*spec.base);
            break;
        case OperatorKind::dense:
            j["matrix_file"] = spec.matrix_file;
            break;
    }
    return j;
}

int resolved_objective_depth(const RunConfig::ObjectiveSpec& o, ErrorList* errors) {
    if (o.J > 0) return o.J;
    if (o.name == "sum_first_k" || o.name == "elementary_symmetric_2") return o.k;
    if (o.name == "sqrt_product_mix" || o.name == "sum_square_product") return 3;
    if (o.name == "gap_penalty") return o.j;
    if (errors) errors->add("unknown objective name '" + o.name + "'");
    return 1;
}

Vector tilt_vector(const RunConfig::ConstraintSpec& c, int d) {
    if (c.tilt.empty()) return Vector::Zero(d);
    if (c.tilt.size() == 1) return Vector::Constant(d, c.tilt.front());
    if (static_cast<int>(c.tilt.size()) != d)
        throw ConfigError("constraint.tilt must have size 1 or d");
    return Eigen::Map<const Vector>(c.tilt.data(), d);
}

ConstraintFunctional make_constraint(const RunConfig& cfg, int d) {
    const auto& c = cfg.constraint;
    if (c.kind == "box_mean") return ConstraintFunctional::box_mean(c.V_minus, c.V_plus, c.v0);
    if (c.kind == "psi_budget") {
        const PsiKind psi = c.psi == "inverse_power" ? PsiKind::inverse_power
                                                     : PsiKind::exponential;
        return ConstraintFunctional::psi_budget(psi, c.beta, c.budget);
    }
    if (c.kind == "tilted_box")
        return ConstraintFunctional::tilted_box(c.V_minus, c.V_plus, tilt_vector(c, d), c.theta);
    throw ConfigError("unknown constraint kind '" + c.kind + "'");
}

SpectralObjective make_objective(const RunConfig& cfg) {
    const auto& o = cfg.objective;
    const int J = resolved_objective_depth(o, nullptr);
    SpectralObjective obj = [&]() {
        if (o.name == "sum_first_k") return SpectralObjective::sum_first_k(o.k, J);
        if (o.name == "elementary_symmetric_2")
            return SpectralObjective::elementary_symmetric_2(o.k, J);
        if (o.name == "sqrt_product_mix") return SpectralObjective::sqrt_product_mix(J);
        if (o.name == "sum_square_product") return SpectralObjective::sum_square_product(J);
        if (o.name == "gap_penalty") return SpectralObjective::gap_penalty(o.j, J);
        throw ConfigError("unknown objective name '" + o.name + "'");
    }();
    obj.growth_A = o.growth_A;
    return obj;
}

Vector load_column(const std::string& path, int expected) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::vector<double> values;
    double x;
    while (in >> x) values.push_back(x);
    if (static_cast<int>(values.size()) != expected)
        throw ConfigError("'" + path + "' holds " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(expected));
    return Eigen::Map<const Vector>(values.data(), expected);
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.normalized == b.normalized;
}

RunConfig parse_config_json(const json& j) {
    ErrorList errors;
    RunConfig cfg;

    check_keys(j, {"operator", "measure", "objective", "constraint", "flow", "initial",
                   "output_dir"},
               "", errors);

    if (j.contains("operator"))
        cfg.operator_spec = parse_operator(j["operator"], "operator", errors);
    else
        errors.add("missing section 'operator'");

    if (j.contains("measure")) {
        const json& m = j["measure"];
        check_keys(m, {"uniform", "file"}, "measure", errors);
        if (m.contains("uniform") && m.contains("file"))
            errors.add("measure: give either 'uniform' or 'file', not both");
        cfg.measure_uniform = number_or(m, "uniform", 1.0, "measure", errors);
        cfg.measure_file = string_or(m, "file", "", "measure", errors);
        if (!(cfg.measure_uniform > 0.0)) errors.add("'measure.uniform' must be > 0");
    }

    if (j.contains("objective")) {
        const json& o = j["objective"];
        check_keys(o, {"name", "k", "j", "J", "growth_A"}, "objective", errors);
        cfg.objective.name = string_or(o, "name", "sum_first_k", "objective", errors);
        cfg.objective.k = integer_or(o, "k", 1, "objective", errors);
        cfg.objective.j = integer_or(o, "j", 2, "objective", errors);
        cfg.objective.J = integer_or(o, "J", 0, "objective", errors);
        cfg.objective.growth_A = number_or(o, "growth_A",
                                           std::numeric_limits<double>::quiet_NaN(), "objective",
                                           errors);
    }

    if (j.contains("constraint")) {
        const json& c = j["constraint"];
        check_keys(c, {"kind", "V_minus", "V_plus", "v0", "psi", "beta", "budget", "theta",
                       "tilt"},
                   "constraint", errors);
        cfg.constraint.kind = string_or(c, "kind", "box_mean", "constraint", errors);
        cfg.constraint.V_minus = number_or(c, "V_minus", -1.0, "constraint", errors);
        cfg.constraint.V_plus = number_or(c, "V_plus", 1.0, "constraint", errors);
        cfg.constraint.v0 = number_or(c, "v0", 0.0, "constraint", errors);
        cfg.constraint.psi = string_or(c, "psi", "exponential", "constraint", errors);
        cfg.constraint.beta = number_or(c, "beta", 1.0, "constraint", errors);
        cfg.constraint.budget = number_or(c, "budget", 0.5, "constraint", errors);
        cfg.constraint.theta = number_or(c, "theta", 0.0, "constraint", errors);
        if (c.contains("tilt")) {
            if (c["tilt"].is_number())
                cfg.constraint.tilt = {c["tilt"].get<double>()};
            else if (c["tilt"].is_array())
                cfg.constraint.tilt = c["tilt"].get<std::vector<double>>();
            else
                errors.add("'constraint.tilt' must be a number or an array");
        }
    }

    if (j.contains("flow")) {
        const json& f = j["flow"];
        check_keys(f, {"tau", "T", "inner_max_iters", "inner_tol", "cluster_rel_tol",
                       "cluster_abs_tol", "record_every", "seed", "stationarity_probes"},
                   "flow", errors);
        cfg.flow.tau = number_or(f, "tau", 0.01, "flow", errors);
        cfg.flow.T = number_or(f, "T", 1.0, "flow", errors);
        cfg.flow.inner_max_iters = integer_or(f, "inner_max_iters", 200, "flow", errors);
        cfg.flow.inner_tol = number_or(f, "inner_tol", 1e-10, "flow", errors);
        cfg.flow.cluster_tol.rel_tol = number_or(f, "cluster_rel_tol", 1e-8, "flow", errors);
        cfg.flow.cluster_tol.abs_tol = number_or(f, "cluster_abs_tol", 1e-10, "flow", errors);
        cfg.flow.record_every = integer_or(f, "record_every", 1, "flow", errors);
        if (f.contains("seed") && f["seed"].is_number_integer() &&
            f["seed"].get<std::int64_t>() >= 0)
            cfg.flow.seed = f["seed"].get<std::uint64_t>();
        else if (f.contains("seed"))
            errors.add("'flow.seed' must be a nonnegative integer");
        cfg.flow.stationarity_probes =
            integer_or(f, "stationarity_probes", 200, "flow", errors);
    }

    if (j.contains("initial")) {
        const json& i = j["initial"];
        check_keys(i, {"kind", "value", "path"}, "initial", errors);
        cfg.initial.kind = string_or(i, "kind", "constant", "initial", errors);
        cfg.initial.value = number_or(i, "value", 0.0, "initial", errors);
        cfg.initial.path = string_or(i, "path", "", "initial", errors);
        if (cfg.initial.kind != "constant" && cfg.initial.kind != "file" &&
            cfg.initial.kind != "random")
            errors.add("'initial.kind' must be one of constant|file|random");
    }

    cfg.output_dir = string_or(j, "output_dir", "out", "", errors);

    // Range and compatibility checks (collected, not short-circuited).
    if (!(cfg.flow.tau > 0.0)) errors.add("'flow.tau' must be > 0");
    if (!(cfg.flow.T > 0.0)) errors.add("'flow.T' must be > 0");
    if (cfg.flow.inner_max_iters < 1) errors.add("'flow.inner_max_iters' must be >= 1");
    if (cfg.flow.record_every < 1) errors.add("'flow.record_every' must be >= 1");
    if (cfg.flow.tau * cfg.constraint.theta >= 1.0)
        errors.add("needs tau * theta < 1 (got tau = " + std::to_string(cfg.flow.tau) +
                   ", theta = " + std::to_string(cfg.constraint.theta) + ")");

    const int d = cfg.operator_spec.dimension();
    const int J = resolved_objective_depth(cfg.objective, &errors);
    if (J + 1 > d)
        errors.add("objective depth J = " + std::to_string(J) + " needs J+1 <= d = " +
                   std::to_string(d) + " eigenvalues");

    // Constraint factories own the feasibility-window checks.
    if (errors.empty()) {
        try {
            const ConstraintFunctional K = make_constraint(cfg, d);
            const SpectralObjective obj = make_objective(cfg);
            if (obj.needs_positive_spectrum) {
                // lambda_min = alpha + V_min must be positive; alpha needs
                // the assembled operator.
                SpacePtr space = cfg.measure_file.empty()
                                     ? MeasureSpace::uniform(d, cfg.measure_uniform)
                                     : std::make_shared<const MeasureSpace>(
                                           load_column(cfg.measure_file, d));
                const BilinearForm form = build_operator(cfg.operator_spec, space);
                if (form.alpha() + K.V_min() <= 0.0)
                    errors.add("objective '" + obj.name +
                               "' needs alpha + V_min > 0, got " +
                               std::to_string(form.alpha() + K.V_min()));
            }
        } catch (const std::exception& e) {
            errors.add(e.what());
        }
    }

    if (!errors.empty()) errors.raise();

    // Canonical echo; reparsing it yields an equal configuration.
    json echo;
    echo["operator"] = operator_echo(cfg.operator_spec);
    if (cfg.measure_file.empty())
        echo["measure"] = {{"uniform", cfg.measure_uniform}};
    else
        echo["measure"] = {{"file", cfg.measure_file}};
    echo["objective"] = {{"name", cfg.objective.name}, {"k", cfg.objective.k},
                         {"j", cfg.objective.j}, {"J", resolved_objective_depth(cfg.objective, nullptr)}};
    if (!std::isnan(cfg.objective.growth_A)) echo["objective"]["growth_A"] = cfg.objective.growth_A;
    echo["constraint"] = {{"kind", cfg.constraint.kind}};
    if (cfg.constraint.kind == "psi_budget") {
        echo["constraint"]["psi"] = cfg.constraint.psi;
        echo["constraint"]["beta"] = cfg.constraint.beta;
        echo["constraint"]["budget"] = cfg.constraint.budget;
    } else {
        echo["constraint"]["V_minus"] = cfg.constraint.V_minus;
        echo["constraint"]["V_plus"] = cfg.constraint.V_plus;
        if (cfg.constraint.kind == "box_mean") echo["constraint"]["v0"] = cfg.constraint.v0;
        if (cfg.constraint.kind == "tilted_box") {
            echo["constraint"]["theta"] = cfg.constraint.theta;
            echo["constraint"]["tilt"] = cfg.constraint.tilt;
        }
    }
    echo["flow"] = {{"tau", cfg.flow.tau},
                    {"T", cfg.flow.T},
                    {"inner_max_iters", cfg.flow.inner_max_iters},
                    {"inner_tol", cfg.flow.inner_tol},
                    {"cluster_rel_tol", cfg.flow.cluster_tol.rel_tol},
                    {"cluster_abs_tol", cfg.flow.cluster_tol.abs_tol},
                    {"record_every", cfg.flow.record_every},
                    {"seed", cfg.flow.seed},
                    {"stationarity_probes", cfg.flow.stationarity_probes}};
    echo["initial"] = {{"kind", cfg.initial.kind}};
    if (cfg.initial.kind == "constant") echo["initial"]["value"] = cfg.initial.value;
    if (cfg.initial.kind == "file") echo["initial"]["path"] = cfg.initial.path;
    echo["output_dir"] = cfg.output_dir;
    cfg.normalized = std::move(echo);
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config_json(j);
}

Instance build_instance(const RunConfig& cfg) {
    const int d = cfg.operator_spec.dimension();
    SpacePtr space = cfg.measure_file.empty()
                         ? MeasureSpace::uniform(d, cfg.measure_uniform)
                         : std::make_shared<const MeasureSpace>(load_column(cfg.measure_file, d));
    BilinearForm form = build_operator(cfg.operator_spec, space);
    ConstraintFunctional K = make_constraint(cfg, d);
    SpectralObjective obj = make_objective(cfg);

    Vector v0;
    if (cfg.initial.kind == "constant") {
        v0 = Vector::Constant(d, cfg.initial.value);
    } else if (cfg.initial.kind == "file") {
        v0 = load_column(cfg.initial.path, d);
    } else {
        std::mt19937_64 rng(cfg.flow.seed);
        v0 = K.sample_domain(*space, rng, false);
    }
    PotentialField V0(v0, space, K.V_min());
    if (!std::isfinite(K.value(V0)))
        throw ConfigError("initial potential is not in the constraint domain");
    return Instance{space, std::move(form), std::move(K), std::move(obj), std::move(V0)};
}

namespace {

PropertyReport structural_condition_report(const BilinearForm& form, const ConstraintFunctional& K,
                                           const SpectralObjective& obj, std::uint64_t seed) {
    const double lambda_min = form.alpha() + K.V_min();
    const auto points = structural_sample_points(obj.J, lambda_min, 10.0, 50, seed);
    const StructuralReport rep = check_structural(obj, points);
    PropertyReport r{"structural_condition",
                     "grad phi stays ordered across eigenvalue ties and its last partial "
                     "derivative is nonnegative",
                     static_cast<int>(points.size()),
                     rep.worst_violation,
                     1e-10,
                     rep.pass ? Verdict::pass : Verdict::fail,
                     seed};
    return r;
}

json report_json(const PropertyReport& r) {
    return json{{"name", r.name},          {"statement", r.statement},
                {"samples", r.samples},    {"worst_violation", r.worst_violation},
                {"tolerance", r.tolerance}, {"verdict", to_string(r.verdict)},
                {"seed", r.seed}};
}

}  // namespace

int run_command(const RunConfig& cfg, RunMode mode, bool gnuplot) {
    try {
        Instance inst = build_instance(cfg);
        if (mode == RunMode::flow) {
            const auto t0 = std::chrono::steady_clock::now();
            FlowTrajectory traj = run_flow(inst.form, inst.K, inst.objective, inst.V0, cfg.flow);
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            for (const auto& w : traj.warnings) std::cerr << "warning: " << w << "\n";
            EmitInfo info = emit_outputs(traj, cfg.output_dir, cfg, wall, gnuplot);
            std::cerr << "flow: " << traj.step_count() << " steps, terminal F = "
                      << traj.steps.back().F << ", wrote " << info.files.size() << " files to "
                      << cfg.output_dir << "\n";
            return 0;
        }

        // verify mode
        SuiteOptions opts;
        opts.samples = 100;
        opts.J = std::min(inst.objective.J + 1, inst.form.size() - 1);
        opts.seed = cfg.flow.seed;
        opts.cluster_tol = cfg.flow.cluster_tol;
        std::vector<PropertyReport> reports = spectral_suite(inst.form, inst.K, opts);
        reports.push_back(structural_condition_report(inst.form, inst.K, inst.objective,
                                                      cfg.flow.seed + 17));
        reports.push_back(frame_invariance_check(inst.form, inst.V0, 100, cfg.flow.seed + 29,
                                                 cfg.flow.cluster_tol));
        const double lambda_min = inst.form.alpha() + inst.K.V_min();
        reports.push_back(resolvent_relation_check(inst.form, inst.V0,
                                                   std::abs(lambda_min) + 1.0,
                                                   cfg.flow.cluster_tol));
        reports.push_back(gradient_fd_check(inst.form, inst.objective, inst.V0, 1e-6,
                                            cfg.flow.seed + 43, cfg.flow.cluster_tol));
        reports.push_back(
            growth_floor_check(inst.objective, lambda_min, 200, cfg.flow.seed + 53));

        json out = json::array();
        for (const auto& r : reports) {
            out.push_back(report_json(r));
            std::cerr << r.name << ": " << to_string(r.verdict) << " (worst violation "
                      << r.worst_violation << ", tolerance " << r.tolerance << ", samples "
                      << r.samples << ")\n";
        }
        std::filesystem::create_directories(cfg.output_dir);
        std::ofstream rep(cfg.output_dir + "/verify_report.json");
        rep << out.dump(2) << "\n";
        return all_passed(reports) ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace specflow
