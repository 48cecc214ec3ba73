#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pc2/io.hpp"
#include "pc2/problem.hpp"
#include "pc2/solver.hpp"

namespace pc2 {

using json = nlohmann::json;

/// Config/model file problem with location info where available.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FitMethod { kkt, lar_kkt, lar, ols };

inline std::string to_string(FitMethod m) {
    switch (m) {
        case FitMethod::kkt: return "kkt";
        case FitMethod::lar_kkt: return "lar-kkt";
        case FitMethod::lar: return "lar";
        case FitMethod::ols: return "ols";
    }
    return "?";
}

inline FitMethod fit_method_from_string(const std::string& s) {
    if (s == "kkt") return FitMethod::kkt;
    if (s == "lar-kkt") return FitMethod::lar_kkt;
    if (s == "lar") return FitMethod::lar;
    if (s == "ols") return FitMethod::ols;
    throw ConfigError("unknown fit method '" + s + "' (expected kkt, lar-kkt, lar or ols)");
}

/// Parsed problem configuration: the problem itself, how to fit it, optional
/// inline training data (physical coordinates), and output paths.
struct ProblemConfig {
    ProblemSpec problem;
    FitMethod method = FitMethod::kkt;
    FitOptions options;
    std::optional<Eigen::MatrixXd> data_inputs;  // physical coordinates
    std::optional<Eigen::VectorXd> data_outputs;
    std::string output_model;  // empty = stdout-only fit
};

// --------------------------------------------------------------------------
// json -> internal
// --------------------------------------------------------------------------

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(where + ": missing required key '" + key + "'");
    return *it;
}

inline Expression parse_config_expression(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected an expression string");
    try {
        return Expression::parse(j.get<std::string>());
    } catch (const ExpressionParseError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline std::vector<int> parse_orders(const json& j, const ProblemSpec& problem,
                                     const std::string& where) {
    std::vector<int> orders(problem.dimension(), 0);
    if (j.is_null()) return orders;
    if (!j.is_object()) throw ConfigError(where + ": 'orders' must map variable names to integers");
    for (const auto& [name, value] : j.items()) {
        const int idx = problem.find_variable(name);
        if (idx < 0) throw ConfigError(where + ": undeclared identifier '" + name + "' in orders");
        if (!value.is_number_integer() || value.get<int>() < 0)
            throw ConfigError(where + ": derivative order for '" + name +
                              "' must be a non-negative integer");
        orders[idx] = value.get<int>();
    }
    return orders;
}

inline OperatorTerm parse_term(const json& j, const ProblemSpec& problem,
                               const std::string& where) {
    OperatorTerm term;
    term.coeff = j.contains("coeff") ? parse_config_expression(j["coeff"], where + ".coeff")
                                     : Expression::parse("1");
    term.orders = parse_orders(j.contains("orders") ? j["orders"] : json(), problem, where);
    return term;
}

inline LinearOperator parse_operator(const json& j, const ProblemSpec& problem,
                                     const std::string& where) {
    LinearOperator op;
    if (j.contains("terms")) {
        if (!j["terms"].is_array() || j["terms"].empty())
            throw ConfigError(where + ": 'terms' must be a non-empty array");
        for (std::size_t i = 0; i < j["terms"].size(); ++i)
            op.terms.push_back(
                parse_term(j["terms"][i], problem, where + ".terms[" + std::to_string(i) + "]"));
    } else {
        // single-term shorthand: coeff + orders at the operator level
        op.terms.push_back(parse_term(j, problem, where));
    }
    if (j.contains("rhs")) op.rhs = parse_config_expression(j["rhs"], where + ".rhs");
    return op;
}

}  // namespace detail

inline ProblemSpec problem_from_json(const json& j) {
    ProblemSpec problem;
    const json& vars = detail::require(j, "variables", "config");
    if (!vars.is_array() || vars.empty())
        throw ConfigError("config: 'variables' must be a non-empty array");
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const json& v = vars[i];
        const std::string where = "variables[" + std::to_string(i) + "]";
        Variable var;
        var.name = detail::require(v, "name", where).get<std::string>();
        const std::string role = detail::require(v, "role", where).get<std::string>();
        const json& bounds = detail::require(v, "bounds", where);
        if (!bounds.is_array() || bounds.size() != 2)
            throw ConfigError(where + ": 'bounds' must be [min, max]");
        const double lo = bounds[0].get<double>();
        const double hi = bounds[1].get<double>();
        if (!(lo < hi)) throw ConfigError(where + ": bounds must satisfy min < max");
        if (role == "deterministic")
            var.transform = VariableTransform::deterministic(lo, hi);
        else if (role == "random")
            var.transform = VariableTransform::random_uniform(lo, hi);
        else
            throw ConfigError(where + ": role must be 'deterministic' or 'random'");
        problem.variables.push_back(std::move(var));
    }

    problem.pde = detail::parse_operator(detail::require(j, "pde", "config"), problem, "pde");
    if (j.contains("bc")) {
        const json& bcs = j["bc"];
        if (!bcs.is_array()) throw ConfigError("config: 'bc' must be an array");
        for (std::size_t i = 0; i < bcs.size(); ++i) {
            const std::string where = "bc[" + std::to_string(i) + "]";
            const json& b = bcs[i];
            BoundaryCondition bc;
            bc.op = detail::parse_operator(b, problem, where);
            bc.location.assign(problem.dimension(), std::nullopt);
            const json& loc = detail::require(b, "location", where);
            if (!loc.is_object())
                throw ConfigError(where + ": 'location' must map variable names to values");
            for (const auto& [name, value] : loc.items()) {
                const int idx = problem.find_variable(name);
                if (idx < 0)
                    throw ConfigError(where + ": undeclared identifier '" + name + "' in location");
                bc.location[idx] = value.get<double>();
            }
            problem.bcs.push_back(std::move(bc));
        }
    }
    if (j.contains("reference") && j["reference"].contains("solution"))
        problem.reference =
            detail::parse_config_expression(j["reference"]["solution"], "reference.solution");

    try {
        problem.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return problem;
}

inline ProblemConfig config_from_json(const json& j) {
    ProblemConfig cfg;
    cfg.problem = problem_from_json(j);

    const json& fit = detail::require(j, "fit", "config");
    cfg.method = fit_method_from_string(
        detail::require(fit, "method", "fit").get<std::string>());
    FitOptions& opt = cfg.options;
    if (fit.contains("p") && fit.contains("p_range"))
        throw ConfigError("fit: give either 'p' or 'p_range', not both");
    if (fit.contains("p")) {
        opt.p_values = {fit["p"].get<int>()};
    } else if (fit.contains("p_range")) {
        const json& pr = fit["p_range"];
        if (!pr.is_array() || pr.size() != 2 || pr[0].get<int>() > pr[1].get<int>())
            throw ConfigError("fit: 'p_range' must be [lo, hi] with lo <= hi");
        opt.p_values.clear();
        for (int p = pr[0].get<int>(); p <= pr[1].get<int>(); ++p) opt.p_values.push_back(p);
    } else {
        throw ConfigError("fit: missing 'p' or 'p_range'");
    }
    opt.n_sim = fit.value("n_sim", 0);
    opt.n_bc = fit.value("n_bc", static_cast<int>(cfg.problem.bcs.size()));
    opt.seed = fit.value("seed", std::uint64_t{42});
    opt.patience = fit.value("patience", 3);
    if (fit.contains("virtual_sampler")) {
        const std::string s = fit["virtual_sampler"].get<std::string>();
        if (s == "mc") opt.virtual_sampler = Sampler::mc;
        else if (s == "lhs") opt.virtual_sampler = Sampler::lhs;
        else throw ConfigError("fit: virtual_sampler must be 'mc' or 'lhs'");
    }
    if (fit.contains("nonlinear")) {
        const json& nl = fit["nonlinear"];
        opt.nonlinear.n_iter = nl.value("n_iter", 20);
        opt.nonlinear.tol = nl.value("tol", 1e-10);
        if (nl.contains("linearization")) {
            const std::string s = nl["linearization"].get<std::string>();
            if (s == "coefficient") opt.nonlinear.linearization = Linearization::coefficient;
            else if (s == "rhs") opt.nonlinear.linearization = Linearization::rhs;
            else throw ConfigError("fit: nonlinear.linearization must be 'coefficient' or 'rhs'");
        }
    }
    if (opt.n_sim < 0) throw ConfigError("fit: n_sim must be >= 0");

    if (j.contains("data")) {
        const json& d = j["data"];
        const json& inputs = detail::require(d, "inputs", "data");
        const json& outputs = detail::require(d, "outputs", "data");
        if (!inputs.is_array() || !outputs.is_array() || inputs.size() != outputs.size())
            throw ConfigError("data: 'inputs' and 'outputs' must be arrays of equal length");
        Eigen::MatrixXd x(inputs.size(), cfg.problem.dimension());
        Eigen::VectorXd y(outputs.size());
        for (std::size_t r = 0; r < inputs.size(); ++r) {
            if (!inputs[r].is_array() ||
                static_cast<int>(inputs[r].size()) != cfg.problem.dimension())
                throw ConfigError("data: input row " + std::to_string(r) +
                                  " does not match the variable count");
            for (int c = 0; c < cfg.problem.dimension(); ++c)
                x(static_cast<Eigen::Index>(r), c) = inputs[r][c].get<double>();
            y(static_cast<Eigen::Index>(r)) = outputs[r].get<double>();
        }
        cfg.data_inputs = std::move(x);
        cfg.data_outputs = std::move(y);
    }

    if (j.contains("output")) cfg.output_model = j["output"].value("model", "");
    return cfg;
}

/// Parse a config document, reporting syntax errors with line/column.
inline ProblemConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
    }
    return config_from_json(j);
}

// --------------------------------------------------------------------------
// internal -> json (canonical form)
// --------------------------------------------------------------------------

inline json operator_to_json(const ProblemSpec& problem, const LinearOperator& op) {
    json j;
    j["terms"] = json::array();
    for (const auto& term : op.terms) {
        json t;
        t["coeff"] = term.coeff.print();
        t["orders"] = json::object();
        for (int i = 0; i < problem.dimension(); ++i)
            if (term.orders[i] != 0) t["orders"][problem.variables[i].name] = term.orders[i];
        j["terms"].push_back(std::move(t));
    }
    if (!op.rhs.empty()) j["rhs"] = op.rhs.print();
    return j;
}

inline json problem_to_json(const ProblemSpec& problem) {
    json j;
    j["variables"] = json::array();
    for (const auto& v : problem.variables) {
        json var;
        var["name"] = v.name;
        var["role"] = v.role() == VariableRole::deterministic ? "deterministic" : "random";
        var["bounds"] = {v.transform.lower, v.transform.upper};
        j["variables"].push_back(std::move(var));
    }
    j["pde"] = operator_to_json(problem, problem.pde);
    j["bc"] = json::array();
    for (const auto& bc : problem.bcs) {
        json b = operator_to_json(problem, bc.op);
        b["location"] = json::object();
        for (int i = 0; i < problem.dimension(); ++i)
            if (bc.location[i]) b["location"][problem.variables[i].name] = *bc.location[i];
        j["bc"].push_back(std::move(b));
    }
    if (problem.reference) j["reference"]["solution"] = problem.reference->print();
    return j;
}

inline json config_to_json(const ProblemConfig& cfg) {
    json j = problem_to_json(cfg.problem);
    json fit;
    fit["method"] = to_string(cfg.method);
    if (cfg.options.p_values.size() == 1) {
        fit["p"] = cfg.options.p_values.front();
    } else {
        fit["p_range"] = {cfg.options.p_values.front(), cfg.options.p_values.back()};
    }
    fit["n_sim"] = cfg.options.n_sim;
    fit["n_bc"] = cfg.options.n_bc;
    fit["seed"] = cfg.options.seed;
    fit["patience"] = cfg.options.patience;
    fit["virtual_sampler"] = cfg.options.virtual_sampler == Sampler::mc ? "mc" : "lhs";
    json nl;
    nl["n_iter"] = cfg.options.nonlinear.n_iter;
    nl["tol"] = cfg.options.nonlinear.tol;
    nl["linearization"] =
        cfg.options.nonlinear.linearization == Linearization::coefficient ? "coefficient" : "rhs";
    fit["nonlinear"] = std::move(nl);
    j["fit"] = std::move(fit);
    if (cfg.data_inputs) {
        json d;
        d["inputs"] = json::array();
        d["outputs"] = json::array();
        for (Eigen::Index r = 0; r < cfg.data_inputs->rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < cfg.data_inputs->cols(); ++c)
                row.push_back((*cfg.data_inputs)(r, c));
            d["inputs"].push_back(std::move(row));
            d["outputs"].push_back((*cfg.data_outputs)(r));
        }
        j["data"] = std::move(d);
    }
    if (!cfg.output_model.empty()) j["output"]["model"] = cfg.output_model;
    return j;
}

// --------------------------------------------------------------------------
// fit dispatch
// --------------------------------------------------------------------------

/// Experimental design for a config: inline data when present, otherwise an
/// LHS draw over the full box with outputs from the reference solution.
inline TrainingData training_data_from_config(const ProblemConfig& cfg) {
    TrainingData data;
    const int dim = cfg.problem.dimension();
    if (cfg.data_inputs) {
        data.inputs.resize(cfg.data_inputs->rows(), dim);
        for (Eigen::Index r = 0; r < cfg.data_inputs->rows(); ++r)
            for (int c = 0; c < dim; ++c)
                data.inputs(r, c) =
                    cfg.problem.variables[c].transform.to_standard((*cfg.data_inputs)(r, c));
        data.outputs = *cfg.data_outputs;
        return data;
    }
    const int n = cfg.options.n_sim;
    data.inputs = sample_lhs(n, dim, derive_seed(cfg.options.seed,
                                                 seed_stream::experimental_design));
    data.outputs.resize(n);
    if (n == 0) return data;
    if (!cfg.problem.reference)
        throw ConfigError("fit: n_sim > 0 needs either inline data or a reference solution "
                          "to evaluate the experimental design");
    std::vector<std::string> names;
    std::vector<double> values;
    for (int r = 0; r < n; ++r) {
        names.clear();
        values.clear();
        for (int i = 0; i < dim; ++i) {
            names.push_back(cfg.problem.variables[i].name);
            values.push_back(cfg.problem.variables[i].transform.from_standard(data.inputs(r, i)));
        }
        data.outputs(r) = cfg.problem.reference->eval(EvalEnv{names, values, std::nullopt});
    }
    return data;
}

/// Runs the configured fit: method dispatch plus nonlinear detection.
inline FitResult fit_from_config(const ProblemConfig& cfg) {
    const TrainingData data = training_data_from_config(cfg);
    switch (cfg.method) {
        case FitMethod::kkt:
            if (cfg.options.p_values.size() == 1)
                return fit_constrained(cfg.problem, data, cfg.options.p_values.front(),
                                       cfg.options);
            return fit_kkt_adaptive(cfg.problem, data, cfg.options);
        case FitMethod::lar_kkt: return fit_lar_kkt(cfg.problem, data, cfg.options);
        case FitMethod::lar: return fit_lar_unconstrained(cfg.problem, data, cfg.options);
        case FitMethod::ols: {
            FitResult out;
            out.model = fit_ols(data, multi_index_set(cfg.problem.dimension(),
                                                      cfg.options.p_values.back()),
                                cfg.problem.variables);
            out.report.p_selected = cfg.options.p_values.back();
            const ScoreContext ctx = ScoreContext::make(cfg.problem, cfg.options);
            apply_score(out.report, internal_score(out.model, cfg.problem, data, ctx));
            return out;
        }
    }
    throw ConfigError("unreachable fit method");
}

}  // namespace pc2
