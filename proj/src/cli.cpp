#include "ssn/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ssn/analysis.hpp"
#include "ssn/fields.hpp"
#include "ssn/random.hpp"

namespace ssn::cli {

namespace {

const std::vector<std::string> kAllAnalyses = {"order",        "semismooth-scan",
                                               "kantorovich",  "kp",
                                               "lipschitz",    "regularity"};

/// 17 significant digits: enough to round-trip any double exactly.
std::string fmt(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string fmt_point(const ManifoldPoint& p) {
    std::string out = "(";
    for (int i = 0; i < p.coords().size(); ++i) {
        if (i > 0) out += ", ";
        out += fmt(p.coords()(i));
    }
    return out + ")";
}

std::string manifold_name(const ManifoldKind& kind) {
    std::ostringstream os;
    os << (kind.family() == ManifoldFamily::Sphere ? "sphere" : "euclidean") << ":"
       << kind.dimension();
    return os.str();
}

int config_error(const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return 1;
}

std::optional<ManifoldKind> parse_manifold(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        return std::nullopt;
    }
    const std::string family = text.substr(0, colon);
    int dim = 0;
    try {
        dim = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (dim < 1) {
        return std::nullopt;
    }
    if (family == "sphere") return ManifoldKind::sphere(dim);
    if (family == "euclidean") return ManifoldKind::euclidean(dim);
    return std::nullopt;
}

std::optional<SelectionRule> parse_selection(const std::string& text) {
    if (text == "midpoint") return SelectionRule::midpoint();
    if (text == "lower") return SelectionRule::lower();
    if (text == "upper") return SelectionRule::upper();
    if (text.rfind("random:", 0) == 0) {
        try {
            return SelectionRule::random_vertex(std::stoull(text.substr(7)));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::string selection_name(const SelectionRule& rule) {
    switch (rule.kind) {
        case SelectionRule::Kind::Midpoint: return "midpoint";
        case SelectionRule::Kind::LowerEndpoint: return "lower";
        case SelectionRule::Kind::UpperEndpoint: return "upper";
        case SelectionRule::Kind::RandomVertex: return "random:" + std::to_string(rule.seed);
    }
    return "midpoint";
}

struct StartSpec {
    bool is_auto = false;
    double auto_distance = 0.1;
    std::uint64_t auto_seed = 0;
    Vector coords;
};

std::optional<StartSpec> parse_start(const std::string& text, std::uint64_t default_seed) {
    StartSpec parsed;
    if (text.empty()) {
        parsed.is_auto = true;
        parsed.auto_seed = default_seed;
        return parsed;
    }
    if (text.rfind("auto:", 0) == 0) {
        parsed.is_auto = true;
        parsed.auto_seed = default_seed;
        std::stringstream ss(text.substr(5));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) return std::nullopt;
            const std::string key = item.substr(0, eq);
            const std::string value = item.substr(eq + 1);
            try {
                if (key == "distance") {
                    parsed.auto_distance = std::stod(value);
                } else if (key == "seed") {
                    parsed.auto_seed = std::stoull(value);
                } else {
                    return std::nullopt;
                }
            } catch (const std::exception&) {
                return std::nullopt;
            }
        }
        return parsed;
    }
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    if (values.empty()) return std::nullopt;
    parsed.coords = Eigen::Map<const Vector>(values.data(), static_cast<long>(values.size()));
    return parsed;
}

void write_trace_csv(const std::string& path, const NewtonTrace& trace,
                     const std::optional<ManifoldPoint>& solution) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open trace output '" + path + "'");
    }
    const int ambient = trace.iterates.front().coords().size();
    os << "iter";
    for (int i = 0; i < ambient; ++i) {
        os << ",x" << i;
    }
    os << ",field_norm,step_norm,dist_to_solution\n";
    for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
        os << k;
        for (int i = 0; i < ambient; ++i) {
            os << "," << fmt(trace.iterates[k].coords()(i));
        }
        os << "," << fmt(trace.field_norms[k]);
        // step_norm on row k is the step leaving iterate k; final row prints 0.
        os << "," << fmt(k < trace.step_norms.size() ? trace.step_norms[k] : 0.0);
        os << ","
           << (solution ? fmt(distance(trace.iterates[k], *solution))
                        : std::string("nan"));
        os << "\n";
    }
}

/// Known solution if the field has one, otherwise the final iterate of a
/// max-precision run from p0.
std::optional<ManifoldPoint> resolve_solution(const VectorField& field,
                                              const ManifoldPoint& p0,
                                              const SelectionRule& rule) {
    if (field.exact_solution()) {
        return field.exact_solution();
    }
    SolverConfig cfg;
    cfg.max_iters = 100;
    cfg.tol_field = 1e-14;
    cfg.selection = rule;
    const NewtonTrace trace = newton_solve(field, p0, cfg);
    if (trace.field_norms.back() > 1e-10) {
        return std::nullopt;
    }
    return trace.final_point();
}

void report_order(std::ostream& os, const NewtonTrace& trace,
                  const std::optional<ManifoldPoint>& solution) {
    os << "[order]\n";
    if (!solution) {
        os << "status = no-solution-available\n\n";
        return;
    }
    os << "solution = " << fmt_point(*solution) << "\n";
    try {
        const OrderEstimate estimate = estimate_order(trace, *solution);
        os << "status = ok\n";
        os << "quotients =";
        for (const double q : estimate.orders) {
            os << " " << fmt(q);
        }
        os << "\n";
        os << "final_order = " << fmt(estimate.final_order) << "\n";
        os << "superlinear = " << (estimate.superlinear ? "true" : "false") << "\n";
    } catch (const InsufficientDataError& e) {
        os << "status = insufficient-data (" << e.what() << ")\n";
    }
    os << "\n";
}

void report_scan(std::ostream& os, const VectorField& field,
                 const std::optional<ManifoldPoint>& solution, const SelectionRule& rule,
                 std::uint64_t seed) {
    os << "[semismooth-scan]\n";
    if (!solution) {
        os << "status = no-solution-available\n\n";
        return;
    }
    try {
        const SemismoothScan scan =
            semismooth_scan(field, *solution, {1e-1, 1e-2, 1e-3, 1e-4}, 64, rule, seed);
        os << "status = ok\n";
        os << "center = " << fmt_point(scan.center) << "\n";
        os << "radii =";
        for (const double r : scan.radii) os << " " << fmt(r);
        os << "\n";
        os << "residuals =";
        for (const double r : scan.residuals) os << " " << fmt(r);
        os << "\n";
        os << "fitted_mu = " << fmt(scan.fitted_mu) << "\n";
        os << "fitted_eps = " << fmt(scan.fitted_eps) << "\n";
        os << "exceeds_scan_precision = " << (scan.exceeds_scan_precision ? "true" : "false")
           << "\n";
        os << "mu_exceeds_semismooth_cap = "
           << (scan.mu_exceeds_semismooth_cap ? "true" : "false") << "\n";
    } catch (const std::exception& e) {
        os << "status = error (" << e.what() << ")\n";
    }
    os << "\n";
}

void report_kantorovich(std::ostream& os, const VectorField& field, const ManifoldPoint& p0,
                        const NewtonTrace& trace, const SelectionRule& rule,
                        std::uint64_t seed) {
    os << "[kantorovich]\n";
    try {
        const KantorovichInputs inputs = measure_kantorovich_inputs(field, p0, rule, seed);
        os << "lambda0 = " << fmt(inputs.lambda0) << "\n";
        os << "eps = " << fmt(inputs.eps) << "\n";
        os << "eps_reverse = " << fmt(inputs.eps_reverse) << "\n";
        os << "delta_bar = " << fmt(inputs.suggested_delta_bar) << "\n";
        if (inputs.suggested_delta_bar == 0.0) {
            os << "status = infeasible (eps*lambda0 >= 1/2 with measured constants)\n\n";
            return;
        }
        const KantorovichCertificate cert = kantorovich_check(
            field, p0, inputs.suggested_delta_bar, inputs.eps, inputs.lambda0);
        os << "status = ok\n";
        os << "field_norm_p0 = " << fmt(cert.field_norm_p0) << "\n";
        os << "condition1 = " << (cert.cond1 ? "true" : "false")
           << "   # eps*lambda0 < 1/2\n";
        os << "condition2 = " << (cert.cond2 && *cert.cond2 ? "true" : "false")
           << "   # lambda0*|X(p0)|/(1-2*eps*lambda0) <= delta_bar\n";
        if (cert.predicted_error_coeff) {
            const double coeff = *cert.predicted_error_coeff;
            os << "predicted_error_coeff = " << fmt(coeff) << "\n";
            // A-posteriori check of d(p_k, p*) <= coeff * d(p_k, p_{k-1}) along
            // the experiment trace.
            double max_ratio = 0.0;
            bool holds = true;
            for (std::size_t k = 1; k < trace.iterates.size(); ++k) {
                const double step = distance(trace.iterates[k], trace.iterates[k - 1]);
                const double err = distance(trace.iterates[k], inputs.solution);
                if (step <= 0.0) {
                    if (err > 0.0) holds = false;
                    continue;
                }
                max_ratio = std::max(max_ratio, err / step);
                if (err > coeff * step) holds = false;
            }
            os << "error_bound_max_ratio = " << fmt(max_ratio) << "\n";
            os << "error_bound_holds = " << (holds ? "true" : "false") << "\n";
        }
        if (inputs.eps_reverse * inputs.lambda0 < 1.0) {
            const double t = inputs.eps_reverse * inputs.lambda0;
            os << "uniqueness_contraction = " << fmt(t / (1.0 - t))
               << "   # below one supports uniqueness in the ball\n";
        }
    } catch (const std::exception& e) {
        os << "status = error (" << e.what() << ")\n";
    }
    os << "\n";
}

void report_kp(std::ostream& os, const ManifoldPoint& p0, std::uint64_t seed) {
    os << "[kp]\n";
    os << "status = ok\n";
    os << "samples = 10000\n";
    os << "kp_estimate = " << fmt(estimate_kp(p0.kind(), p0, 10000, seed)) << "\n\n";
}

void report_lipschitz(std::ostream& os, const VectorField& field, const ManifoldPoint& p0,
                      std::uint64_t seed) {
    os << "[lipschitz]\n";
    const double radius = 0.5;
    const double estimate = estimate_lipschitz(field, p0, radius, 2000, seed);
    os << "status = ok\n";
    os << "center = " << fmt_point(p0) << "\n";
    os << "radius = " << fmt(radius) << "\n";
    os << "samples = 2000\n";
    os << "lipschitz_lower_bound = " << fmt(estimate) << "\n";
    os << "metric_lipschitz_bound = " << fmt(lipschitz_to_metric(estimate)) << "\n\n";
}

void report_regularity(std::ostream& os, const VectorField& field,
                       const std::optional<ManifoldPoint>& solution, std::uint64_t seed) {
    os << "[regularity]\n";
    if (!solution) {
        os << "status = no-solution-available\n\n";
        return;
    }
    try {
        const double lambda = max_inverse_norm(field, *solution, seed);
        const double eps = 0.5 / lambda;
        const std::vector<double> radii = {0.001, 0.01, 0.05, 0.1, 0.25, 0.5};
        const double passing =
            regularity_radius_probe(field, *solution, eps, radii, 200, seed);
        os << "status = ok\n";
        os << "lambda_star = " << fmt(lambda) << "\n";
        os << "eps = " << fmt(eps) << "\n";
        os << "inverse_norm_bound = " << fmt(lambda / (1.0 - eps * lambda)) << "\n";
        os << "radii =";
        for (const double r : radii) os << " " << fmt(r);
        os << "\n";
        os << "largest_passing_radius = " << fmt(passing) << "\n";
    } catch (const SingularOperatorError& e) {
        os << "status = not-regular (" << e.what() << ")\n";
    }
    os << "\n";
}

int experiment_exit_code(TerminationReason reason) {
    switch (reason) {
        case TerminationReason::FieldTolerance:
        case TerminationReason::StepTolerance:
            return 0;
        case TerminationReason::SingularElement:
            return 2;
        case TerminationReason::MaxIters:
            return 3;
    }
    return 1;
}

std::string trimmed(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

struct ConfigFileArgs {
    std::vector<std::string> args;
    std::string error;
};

/// Turns `key = value` lines into trailing --key value pairs, skipping keys
/// already given on the command line so explicit flags win.
ConfigFileArgs load_config_args(const std::string& path,
                                const std::vector<std::string>& given) {
    ConfigFileArgs out;
    std::ifstream is(path);
    if (!is) {
        out.error = "cannot read config file '" + path + "'";
        return out;
    }
    const auto already_given = [&](const std::string& key) {
        const std::string flag = "--" + key;
        for (const auto& arg : given) {
            if (arg == flag || arg.rfind(flag + "=", 0) == 0) return true;
        }
        return false;
    };
    std::string line;
    int line_number = 0;
    while (std::getline(is, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trimmed(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string key = eq == std::string::npos ? "" : trimmed(line.substr(0, eq));
        if (key.empty()) {
            out.error = "malformed config line " + std::to_string(line_number) + " in '" +
                        path + "': expected key = value";
            return out;
        }
        if (key == "config") continue;
        std::string value = trimmed(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (!already_given(key)) {
            out.args.push_back("--" + key);
            out.args.push_back(value);
        }
    }
    return out;
}

} // namespace

int run_experiment(const ExperimentConfig& cfg) {
    const BatteryEntry* entry = find_battery_field(cfg.field_id);
    if (entry == nullptr) {
        return config_error("unknown field '" + cfg.field_id + "'");
    }
    const VectorField& field = *entry->field;
    if (cfg.manifold && !(*cfg.manifold == field.manifold())) {
        return config_error("manifold '" + manifold_name(*cfg.manifold) +
                            "' does not match field '" + cfg.field_id + "' on " +
                            manifold_name(field.manifold()));
    }
    for (const std::string& name : cfg.analyses) {
        if (std::find(kAllAnalyses.begin(), kAllAnalyses.end(), name) == kAllAnalyses.end()) {
            return config_error("unknown analysis '" + name + "'");
        }
    }

    const auto parsed = parse_start(cfg.start, cfg.seed);
    if (!parsed) {
        return config_error("malformed start '" + cfg.start + "'");
    }
    std::optional<ManifoldPoint> p0;
    if (parsed->is_auto) {
        const auto solution = field.exact_solution();
        if (!solution) {
            return config_error("start 'auto' needs a field with a known solution");
        }
        Rng rng(parsed->auto_seed);
        p0 = exp_map(*solution, parsed->auto_distance * random_unit_tangent(rng, *solution));
    } else {
        try {
            p0 = ManifoldPoint(field.manifold(), parsed->coords);
        } catch (const ContractError& e) {
            return config_error(std::string("start: ") + e.what());
        }
    }

    NewtonTrace trace;
    try {
        trace = newton_solve(field, *p0, cfg.solver);
    } catch (const ContractError& e) {
        return config_error(e.what());
    }

    const std::string base = cfg.out.empty() ? cfg.field_id : cfg.out;
    const std::filesystem::path trace_path = base + ".trace.csv";
    if (trace_path.has_parent_path()) {
        std::filesystem::create_directories(trace_path.parent_path());
    }
    const std::optional<ManifoldPoint> solution = field.exact_solution();
    write_trace_csv(trace_path.string(), trace, solution);

    if (!cfg.analyses.empty()) {
        const std::optional<ManifoldPoint> star =
            resolve_solution(field, *p0, cfg.solver.selection);
        std::ofstream os(base + ".report.txt", std::ios::binary);
        os << "# analysis report\n";
        os << "field = " << cfg.field_id << "\n";
        os << "manifold = " << manifold_name(field.manifold()) << "\n";
        os << "start = " << fmt_point(*p0) << "\n";
        os << "selection = " << selection_name(cfg.solver.selection) << "\n";
        os << "seed = " << cfg.seed << "\n";
        os << "termination = " << to_string(trace.termination) << "\n\n";
        for (const std::string& name : cfg.analyses) {
            if (name == "order") {
                report_order(os, trace, star);
            } else if (name == "semismooth-scan") {
                report_scan(os, field, star, cfg.solver.selection, cfg.seed);
            } else if (name == "kantorovich") {
                report_kantorovich(os, field, *p0, trace, cfg.solver.selection, cfg.seed);
            } else if (name == "kp") {
                report_kp(os, *p0, cfg.seed);
            } else if (name == "lipschitz") {
                report_lipschitz(os, field, *p0, cfg.seed);
            } else if (name == "regularity") {
                report_regularity(os, field, star, cfg.seed);
            }
        }
    }

    std::cout << cfg.field_id << ": termination=" << to_string(trace.termination)
              << " steps=" << trace.step_norms.size()
              << " field_norm=" << fmt(trace.field_norms.back());
    if (solution) {
        std::cout << " dist_to_solution=" << fmt(distance(trace.final_point(), *solution));
    }
    std::cout << " trace=" << trace_path.string() << "\n";
    return experiment_exit_code(trace.termination);
}

std::string list_fields() {
    std::ostringstream os;
    os << "id            manifold      expected_mu  solution\n";
    for (const BatteryEntry& entry : test_battery()) {
        std::string id = entry.id;
        id.resize(14, ' ');
        std::string manifold = manifold_name(entry.field->manifold());
        manifold.resize(14, ' ');
        os << id << manifold << fmt(entry.expected_mu) << "            ";
        if (entry.field->exact_solution()) {
            os << fmt_point(*entry.field->exact_solution());
        } else {
            os << "unknown";
        }
        os << "\n    " << entry.planting << "\n";
    }
    return os.str();
}

int run_main(int argc, const char* const* argv) {
    // Experiment files are plain `key = value` lines mirroring the long flags;
    // they are expanded here into trailing arguments so command-line flags
    // keep precedence.
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc));
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        }
    }
    if (!config_path.empty()) {
        ConfigFileArgs injected = load_config_args(config_path, args);
        if (!injected.error.empty()) {
            return config_error(injected.error);
        }
        args.insert(args.end(), injected.args.begin(), injected.args.end());
    }

    CLI::App app{"semismooth Newton solver and diagnostics for vector fields on "
                 "the sphere and flat space"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string manifold_text;
    std::string selection_text = "midpoint";
    std::string analyses_text;
    std::string config_text;

    const auto add_experiment_options = [&](CLI::App* cmd, bool with_analyses) {
        cmd->add_option("--field", cfg.field_id, "battery field id")->required();
        cmd->add_option("--manifold", manifold_text,
                        "expected manifold, e.g. sphere:1 or euclidean:2");
        cmd->add_option("--start", cfg.start,
                        "comma-separated coordinates or auto:distance=<r>,seed=<s>");
        cmd->add_option("--tol-field", cfg.solver.tol_field, "stop on field norm");
        cmd->add_option("--tol-step", cfg.solver.tol_step, "stop on step norm");
        cmd->add_option("--max-iters", cfg.solver.max_iters, "iteration cap");
        cmd->add_option("--singular-threshold", cfg.solver.singular_threshold,
                        "minimum acceptable smallest singular value");
        cmd->add_option("--selection", selection_text,
                        "derivative element rule: midpoint|lower|upper|random:<seed>");
        if (with_analyses) {
            cmd->add_option("--analyses", analyses_text,
                            "comma-separated subset of order,semismooth-scan,kantorovich,"
                            "kp,lipschitz,regularity (default: all)");
        }
        cmd->add_option("--out", cfg.out, "artifact base path (default: field id)");
        cmd->add_option("--seed", cfg.seed, "seed for samplers and auto starts");
        cmd->add_option("--config", config_text,
                        "key = value experiment file; flags override it");
    };

    CLI::App* solve = app.add_subcommand("solve", "run the Newton iteration");
    add_experiment_options(solve, false);
    CLI::App* analyze =
        app.add_subcommand("analyze", "run the Newton iteration plus diagnostics");
    add_experiment_options(analyze, true);
    app.add_subcommand("list-fields", "print the battery instances");
    CLI::App* batch =
        app.add_subcommand("batch", "run every .cfg experiment file in a directory");
    std::string batch_dir;
    batch->add_option("dir", batch_dir, "directory of .cfg files")->required();

    std::vector<const char*> parse_argv = {"ssn"};
    for (const std::string& arg : args) {
        parse_argv.push_back(arg.c_str());
    }
    try {
        app.parse(static_cast<int>(parse_argv.size()), parse_argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (app.got_subcommand("list-fields")) {
        std::cout << list_fields();
        return 0;
    }
    if (app.got_subcommand("batch")) {
        std::vector<std::filesystem::path> files;
        std::error_code ec;
        for (const auto& item : std::filesystem::directory_iterator(batch_dir, ec)) {
            if (item.path().extension() == ".cfg") {
                files.push_back(item.path());
            }
        }
        if (ec) {
            return config_error("batch: cannot read directory '" + batch_dir + "'");
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            return config_error("batch: no .cfg files in '" + batch_dir + "'");
        }
        int worst = 0;
        for (const auto& file : files) {
            std::cout << "== " << file.string() << "\n";
            const std::string file_str = file.string();
            const char* args[] = {"ssn", "analyze", "--config", file_str.c_str()};
            worst = std::max(worst, run_main(4, args));
        }
        return worst;
    }

    if (!manifold_text.empty()) {
        const auto kind = parse_manifold(manifold_text);
        if (!kind) {
            return config_error("malformed manifold '" + manifold_text +
                                "' (expected sphere:<n> or euclidean:<n>)");
        }
        cfg.manifold = kind;
    }
    const auto rule = parse_selection(selection_text);
    if (!rule) {
        return config_error("malformed selection '" + selection_text + "'");
    }
    cfg.solver.selection = *rule;

    if (app.got_subcommand("analyze")) {
        if (analyses_text.empty()) {
            cfg.analyses = kAllAnalyses;
        } else {
            std::stringstream ss(analyses_text);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) cfg.analyses.push_back(item);
            }
        }
    }
    return run_experiment(cfg);
}

} // namespace ssn::cli
