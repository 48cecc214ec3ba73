#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pc2/config.hpp"
#include "pc2/io.hpp"
#include "pc2/model.hpp"

namespace pc2 {

struct ModelIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kModelFormatVersion = 1;

/// Self-describing model document: the problem it was fitted to, the basis
/// multi-indices, the coefficients (full precision) and fit metadata.
inline json model_to_json(const Pc2Model& model, const ProblemSpec& problem) {
    json j;
    j["format"] = "pc2-model";
    j["version"] = kModelFormatVersion;
    j["problem"] = problem_to_json(problem);
    json basis;
    basis["dimension"] = model.basis.dimension;
    basis["max_degree"] = model.basis.max_degree;
    basis["indices"] = json::array();
    for (const auto& mi : model.basis.indices) basis["indices"].push_back(mi.degrees);
    j["basis"] = std::move(basis);
    j["coefficients"] = json::array();
    for (Eigen::Index i = 0; i < model.coefficients.size(); ++i)
        j["coefficients"].push_back(model.coefficients(i));
    json meta;
    meta["method"] = model.meta.method;
    meta["p_selected"] = model.meta.p_selected;
    meta["seed"] = model.meta.seed;
    meta["n_sim"] = model.meta.n_sim;
    meta["n_bc"] = model.meta.n_bc;
    meta["n_virtual"] = model.meta.n_virtual;
    meta["iterations"] = model.meta.iterations;
    meta["rank_deficient"] = model.meta.rank_deficient;
    meta["lar_fallback"] = model.meta.lar_fallback;
    meta["virtual_resamples"] = model.meta.virtual_resamples;
    j["meta"] = std::move(meta);
    return j;
}

struct LoadedModel {
    Pc2Model model;
    ProblemSpec problem;
};

inline LoadedModel model_from_json(const json& j) {
    if (!j.contains("format") || j["format"] != "pc2-model")
        throw ModelIoError("not a model file (missing 'format': 'pc2-model')");
    if (!j.contains("version") || j["version"].get<int>() != kModelFormatVersion)
        throw ModelIoError("unsupported model file version");
    LoadedModel out;
    out.problem = problem_from_json(j.at("problem"));
    out.model.variables = out.problem.variables;

    const json& basis = j.at("basis");
    out.model.basis.dimension = basis.at("dimension").get<int>();
    out.model.basis.max_degree = basis.at("max_degree").get<int>();
    if (out.model.basis.dimension != out.problem.dimension())
        throw ModelIoError("basis dimension does not match the problem variables");
    for (const auto& row : basis.at("indices")) {
        MultiIndex mi;
        mi.degrees = row.get<std::vector<int>>();
        if (mi.dimension() != out.model.basis.dimension)
            throw ModelIoError("multi-index dimension mismatch in model file");
        out.model.basis.indices.push_back(std::move(mi));
    }
    const json& coeffs = j.at("coefficients");
    if (static_cast<int>(coeffs.size()) != out.model.basis.size())
        throw ModelIoError("coefficient count does not match the basis size");
    out.model.coefficients.resize(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        out.model.coefficients(static_cast<Eigen::Index>(i)) = coeffs[i].get<double>();

    if (j.contains("meta")) {
        const json& meta = j["meta"];
        out.model.meta.method = meta.value("method", "");
        out.model.meta.p_selected = meta.value("p_selected", 0);
        out.model.meta.seed = meta.value("seed", std::uint64_t{0});
        out.model.meta.n_sim = meta.value("n_sim", 0);
        out.model.meta.n_bc = meta.value("n_bc", 0);
        out.model.meta.n_virtual = meta.value("n_virtual", 0);
        out.model.meta.iterations = meta.value("iterations", 0);
        out.model.meta.rank_deficient = meta.value("rank_deficient", false);
        out.model.meta.lar_fallback = meta.value("lar_fallback", false);
        out.model.meta.virtual_resamples = meta.value("virtual_resamples", 0);
    }
    return out;
}

inline void save_model(const Pc2Model& model, const ProblemSpec& problem,
                       const std::filesystem::path& path) {
    atomic_write_file(path, model_to_json(model, problem).dump(2) + "\n");
}

inline LoadedModel load_model(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ModelIoError("cannot parse model file '" + path.string() + "': " + e.what());
    }
    return model_from_json(j);
}

}  // namespace pc2
