// Command-line front end: fit problems from config files, evaluate and
// post-process fitted models, run the built-in benchmark studies.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pc2/pc2.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolver = 2;
constexpr int kExitIo = 3;

void print_report(const pc2::FitReport& report) {
    std::printf("p_selected: %d\n", report.p_selected);
    std::printf("basis terms: %zu\n", report.selected_positions.size());
    std::printf("r2_u: %s\n", pc2::format_double(report.r2_u).c_str());
    std::printf("r2_L: %s\n", pc2::format_double(report.r2_l).c_str());
    std::printf("r2_B: %s\n", pc2::format_double(report.r2_b).c_str());
    std::printf("r2: %s\n", pc2::format_double(report.r2).c_str());
    std::printf("constraint_residual_inf: %s\n",
                pc2::format_double(report.constraint_residual_inf).c_str());
    if (report.iterations > 0) std::printf("iterations: %d\n", report.iterations);
    if (report.candidates_evaluated > 0)
        std::printf("candidates_evaluated: %d\n", report.candidates_evaluated);
    if (report.virtual_resamples > 0)
        std::printf("virtual_resamples: %d\n", report.virtual_resamples);
    if (report.lar_fallback) std::printf("lar_fallback: 1\n");
}

int cmd_fit(const std::string& config_path, const std::string& output_override) {
    const pc2::ProblemConfig cfg = pc2::parse_config(pc2::read_file(config_path));
    const pc2::FitResult fr = pc2::fit_from_config(cfg);
    print_report(fr.report);
    std::string out_path = !output_override.empty() ? output_override : cfg.output_model;
    if (out_path.empty()) out_path = fs::path(config_path).stem().string() + ".model.json";
    pc2::save_model(fr.model, cfg.problem, out_path);
    std::printf("model: %s\n", out_path.c_str());
    return kExitOk;
}

std::vector<std::vector<double>> read_points_csv(const std::string& path, int dim) {
    const std::string text = pc2::read_file(path);
    std::vector<std::vector<double>> pts;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        // skip a header line (non-numeric first field)
        std::vector<double> row;
        std::size_t p = 0;
        bool numeric = true;
        while (p <= line.size()) {
            std::size_t comma = line.find(',', p);
            if (comma == std::string::npos) comma = line.size();
            const std::string field = line.substr(p, comma - p);
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str()) {
                numeric = false;
                break;
            }
            row.push_back(v);
            p = comma + 1;
            if (comma == line.size()) break;
        }
        if (!numeric) {
            if (lineno == 1) continue;  // header
            throw pc2::IoError("points file '" + path + "': non-numeric value on line " +
                               std::to_string(lineno));
        }
        if (static_cast<int>(row.size()) != dim)
            throw pc2::IoError("points file '" + path + "': line " + std::to_string(lineno) +
                               " has " + std::to_string(row.size()) + " fields, expected " +
                               std::to_string(dim));
        pts.push_back(std::move(row));
    }
    return pts;
}

int cmd_eval(const std::string& model_path, const std::string& points_path, int grid_n,
             bool with_residual, const std::string& out_path) {
    const pc2::LoadedModel loaded = pc2::load_model(model_path);
    const int dim = loaded.model.dimension();

    std::vector<std::vector<double>> pts;
    if (!points_path.empty()) {
        pts = read_points_csv(points_path, dim);
    } else {
        // per-dimension equispaced grid over the fitted box
        std::vector<int> idx(dim, 0);
        const long total = static_cast<long>(std::pow(grid_n, dim));
        for (long k = 0; k < total; ++k) {
            std::vector<double> p(dim);
            for (int i = 0; i < dim; ++i) {
                const auto& t = loaded.model.variables[i].transform;
                p[i] = t.lower + (t.upper - t.lower) * idx[i] / std::max(1, grid_n - 1);
            }
            pts.push_back(std::move(p));
            for (int i = 0; i < dim; ++i) {
                if (++idx[i] < grid_n) break;
                idx[i] = 0;
            }
        }
    }

    std::string csv;
    for (const auto& v : loaded.model.variables) csv += v.name + ',';
    csv += "value";
    if (with_residual) csv += ",residual";
    csv += ",extrapolated\n";
    for (const auto& p : pts) {
        for (double x : p) csv += pc2::format_double(x) + ',';
        csv += pc2::format_double(loaded.model.evaluate(p));
        if (with_residual) {
            const auto xi = loaded.model.to_standard(p);
            csv += ',' + pc2::format_double(
                             pc2::residual(loaded.problem.pde, loaded.model, loaded.problem, xi));
        }
        csv += loaded.model.is_extrapolating(p) ? ",1\n" : ",0\n";
    }
    if (out_path.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        pc2::atomic_write_file(out_path, csv);
        std::printf("wrote %s\n", out_path.c_str());
    }
    return kExitOk;
}

int cmd_uq(const std::string& model_path, int grid_n, const std::string& prefix, bool sobol) {
    const pc2::LoadedModel loaded = pc2::load_model(model_path);
    const auto random_dims = [&] {
        std::vector<int> out;
        for (int i = 0; i < loaded.model.dimension(); ++i)
            if (loaded.model.variables[i].role() == pc2::VariableRole::random) out.push_back(i);
        return out;
    }();
    if (random_dims.empty())
        throw pc2::UqError("model has no random variables; uq post-processing needs at least one "
                           "(declare variables with role 'random')");

    std::vector<int> det_dims;
    for (int i = 0; i < loaded.model.dimension(); ++i)
        if (loaded.model.variables[i].role() == pc2::VariableRole::deterministic)
            det_dims.push_back(i);

    if (det_dims.empty()) {
        std::printf("mean: %s\n", pc2::format_double(pc2::global_mean(loaded.model)).c_str());
        std::printf("variance: %s\n",
                    pc2::format_double(pc2::global_variance(loaded.model)).c_str());
        if (sobol)
            for (std::size_t i = 0; i < random_dims.size(); ++i)
                std::printf("sobol_%s: %s\n", loaded.model.variables[random_dims[i]].name.c_str(),
                            pc2::format_double(
                                pc2::sobol_first_order(loaded.model, static_cast<int>(i)))
                                .c_str());
        return kExitOk;
    }
    if (det_dims.size() > 2)
        throw pc2::UqError("grid output supports at most two deterministic variables");

    // grid over the deterministic box
    const int nx = grid_n;
    const int nt = det_dims.size() == 2 ? grid_n : 1;
    std::string mean_csv, pm_csv, var_csv, sobol_csv;
    auto header = [&](bool pm) {
        std::string h;
        for (int d : det_dims) h += loaded.model.variables[d].name + ',';
        return h + (pm ? "mean_minus_sigma,mean_plus_sigma\n" : "value\n");
    };
    mean_csv = header(false);
    pm_csv = header(true);
    var_csv = header(false);
    if (sobol) {
        for (int d : det_dims) sobol_csv += loaded.model.variables[d].name + ',';
        for (std::size_t i = 0; i < random_dims.size(); ++i)
            sobol_csv += "sobol_" + loaded.model.variables[random_dims[i]].name +
                         (i + 1 < random_dims.size() ? "," : "\n");
    }
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nt; ++j) {
            std::vector<double> pt;
            std::string coords;
            const auto& t0 = loaded.model.variables[det_dims[0]].transform;
            pt.push_back(t0.lower + (t0.upper - t0.lower) * i / std::max(1, nx - 1));
            coords += pc2::format_double(pt.back()) + ',';
            if (det_dims.size() == 2) {
                const auto& t1 = loaded.model.variables[det_dims[1]].transform;
                pt.push_back(t1.lower + (t1.upper - t1.lower) * j / std::max(1, nt - 1));
                coords += pc2::format_double(pt.back()) + ',';
            }
            const pc2::ReducedPce red = pc2::reduce_at(loaded.model, pt);
            const double mean = red.mean();
            const double var = red.variance();
            const double sigma = std::sqrt(std::max(0.0, var));
            mean_csv += coords + pc2::format_double(mean) + '\n';
            pm_csv += coords + pc2::format_double(mean - sigma) + ',' +
                      pc2::format_double(mean + sigma) + '\n';
            var_csv += coords + pc2::format_double(var) + '\n';
            if (sobol) {
                sobol_csv += coords.substr(0, coords.size());
                for (std::size_t k = 0; k < random_dims.size(); ++k) {
                    double s = std::numeric_limits<double>::quiet_NaN();
                    if (var > 0) s = pc2::sobol_first_order(red, static_cast<int>(k));
                    sobol_csv += pc2::format_double(s) +
                                 (k + 1 < random_dims.size() ? "," : "\n");
                }
            }
        }
    }
    pc2::atomic_write_file(prefix + "_mean.csv", mean_csv);
    pc2::atomic_write_file(prefix + "_mean_pm_sigma.csv", pm_csv);
    pc2::atomic_write_file(prefix + "_variance.csv", var_csv);
    std::printf("wrote %s_mean.csv %s_mean_pm_sigma.csv %s_variance.csv\n", prefix.c_str(),
                prefix.c_str(), prefix.c_str());
    if (sobol) {
        pc2::atomic_write_file(prefix + "_sobol.csv", sobol_csv);
        std::printf("wrote %s_sobol.csv\n", prefix.c_str());
    }
    return kExitOk;
}

int cmd_bench(const std::vector<std::string>& case_ids, pc2::ConvergenceOptions opt,
              const std::string& outdir, int heat_grid) {
    std::vector<std::string> ids = case_ids;
    if (ids.size() == 1 && ids[0] == "all") ids = pc2::builtin_case_ids();
    fs::create_directories(outdir);
    for (const auto& id : ids) {
        const pc2::BenchmarkCase c = pc2::builtin_case(id);
        if (id == "heat_uq") {
            const int p = opt.p_values.empty() ? c.default_p_values.front() : opt.p_values.front();
            const int n_bc = opt.n_bc >= 0 ? opt.n_bc : c.default_n_bc;
            const pc2::HeatUqResult r = pc2::run_heat_uq(n_bc, p, opt.base_seed, heat_grid);
            const std::pair<const char*, const pc2::FieldTable*> fields[] = {
                {"mean", &r.mean},
                {"mean_minus_sigma", &r.mean_minus_sigma},
                {"mean_plus_sigma", &r.mean_plus_sigma},
                {"variance", &r.variance},
                {"oracle_mean", &r.oracle_mean},
                {"oracle_variance", &r.oracle_variance},
                {"abs_diff_mean", &r.abs_diff_mean},
                {"abs_diff_variance", &r.abs_diff_variance}};
            for (const auto& [name, table] : fields)
                pc2::atomic_write_file(outdir + "/" + id + "_" + name + ".csv", table->to_csv());
            std::printf("%s: wrote 8 field tables to %s/\n", id.c_str(), outdir.c_str());
            continue;
        }
        const pc2::ConvergenceReport report = pc2::run_convergence(c, opt);
        pc2::atomic_write_file(outdir + "/" + id + "_trials.csv", pc2::trial_csv(report));
        pc2::atomic_write_file(outdir + "/" + id + "_aggregate.csv", pc2::aggregate_csv(report));
        std::printf("%s: wrote %s/%s_trials.csv and %s/%s_aggregate.csv\n", id.c_str(),
                    outdir.c_str(), id.c_str(), outdir.c_str(), id.c_str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-constrained polynomial chaos: fit, evaluate, post-process, benchmark"};
    app.require_subcommand(1);

    // fit
    std::string fit_config, fit_output;
    auto* fit = app.add_subcommand("fit", "Fit a model from a problem config");
    fit->add_option("config", fit_config, "problem config (JSON)")->required();
    fit->add_option("-o,--output", fit_output, "model output path (overrides config)");

    // eval
    std::string eval_model, eval_points, eval_out;
    int eval_grid = 11;
    bool eval_residual = false;
    auto* ev = app.add_subcommand("eval", "Evaluate a fitted model");
    ev->add_option("model", eval_model, "model file")->required();
    ev->add_option("--points", eval_points, "CSV of evaluation points (one row per point)");
    ev->add_option("--grid", eval_grid, "per-dimension grid size when no points file is given");
    ev->add_flag("--residual", eval_residual, "append the PDE residual column");
    ev->add_option("-o,--output", eval_out, "output CSV (default: stdout)");

    // uq
    std::string uq_model, uq_prefix = "uq";
    int uq_grid = 101;
    bool uq_sobol = false;
    auto* uq = app.add_subcommand("uq", "Moments / local statistics of a fitted model");
    uq->add_option("model", uq_model, "model file")->required();
    uq->add_option("--grid", uq_grid, "grid size over the deterministic variables");
    uq->add_option("--prefix", uq_prefix, "output file prefix");
    uq->add_flag("--sobol", uq_sobol, "also emit first-order Sobol indices");

    // bench
    std::vector<std::string> bench_cases;
    std::string bench_outdir = "bench_out";
    pc2::ConvergenceOptions bopt;
    int heat_grid = 41;
    std::vector<int> nsim_grid, p_range;
    auto* bench = app.add_subcommand("bench", "Run built-in benchmark studies");
    bench->add_option("cases", bench_cases, "case ids (or 'all')")->required();
    bench->add_option("--trials", bopt.trials, "replications per cell (default 20)");
    bench->add_option("--seed", bopt.base_seed, "base seed");
    bench->add_option("--jobs", bopt.jobs, "parallel trial workers");
    bench->add_option("--nsim-grid", nsim_grid, "override the n_sim grid");
    bench->add_option("--p-range", p_range, "override candidate degrees (list)");
    bench->add_option("--n-bc", bopt.n_bc, "override the boundary budget");
    bench->add_option("--methods", bopt.methods, "methods to run (kkt lar-kkt lar)");
    bench->add_option("--outdir", bench_outdir, "output directory");
    bench->add_option("--heat-grid", heat_grid, "field grid size for heat_uq");
    bench->add_flag("--timing", bopt.timing,
                    "record wall-clock fit times (makes outputs non-reproducible)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*fit) return cmd_fit(fit_config, fit_output);
        if (*ev) return cmd_eval(eval_model, eval_points, eval_grid, eval_residual, eval_out);
        if (*uq) return cmd_uq(uq_model, uq_grid, uq_prefix, uq_sobol);
        if (*bench) {
            bopt.n_sim_grid = nsim_grid;
            bopt.p_values = p_range;
            return cmd_bench(bench_cases, bopt, bench_outdir, heat_grid);
        }
    } catch (const pc2::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const pc2::ExpressionParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const pc2::SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    } catch (const pc2::DesignError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    } catch (const pc2::UqError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const pc2::BenchError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const pc2::ModelIoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const pc2::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
