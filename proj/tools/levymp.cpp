// levymp: command-line front end.  Options come from an optional JSON config
// file; flags given on the command line override it.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include <levymp/cli.hpp>

using levymp::cli::RunConfig;

namespace {

std::vector<levymp::ExactNumber> split_exact(const std::string& s, const std::string& field) {
    std::vector<levymp::ExactNumber> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(levymp::parse_exact(item));
        } catch (const levymp::DomainError& e) {
            throw levymp::ConfigError(field, e.what());
        }
    }
    if (out.empty()) throw levymp::ConfigError(field, "empty list");
    return out;
}

std::vector<double> split_numbers(const std::string& s, const std::string& field) {
    std::vector<double> v;
    for (auto& x : split_exact(s, field)) v.push_back(x.value);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"levymp: multiple points of operator semistable Levy processes"};
    app.set_help_all_flag("--help-all");

    std::string command, config_file, matrix, alphas, ladder, beta_grid, case_label, direction, output;
    int k = 0, scan_k = 0;
    std::uint64_t seed = 0, samples = 0, m_max = 0, n_steps = 0, n_paths = 0;
    double scale_c = 0, horizon = 0, eps = 0, min_sep = 0, perturb = 0, fixed = 0, tol = 0;
    bool strict = false;

    app.add_option("command", command, "analyze | dim | exists | verify-prop31 | verify-prop42 | verify-threshold | "
                                       "verify-intersection | simulate | scaling-check")
        ->required();
    app.add_option("--config", config_file, "JSON config file");
    app.add_option("--matrix", matrix, "exponent matrix as JSON, e.g. [[0.75,0],[1,0.75]]");
    app.add_option("--alphas", alphas, "comma separated alphas, rationals allowed (4/3)");
    app.add_option("--case", case_label, "case label for --alphas (A1_diag, A1_rot, A2, B1, B2, B3, D1)");
    app.add_option("--k", k, "multiplicity");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--samples", samples, "Monte Carlo samples per ladder point");
    app.add_option("--ladder", ladder, "comma separated ladder values");
    app.add_option("--direction", direction, "q_axis | r_axis | diagonal");
    app.add_option("--fixed", fixed, "fixed coordinate for axis ladders");
    app.add_option("--beta-grid", beta_grid, "comma separated beta values");
    app.add_option("--m-max", m_max, "largest series cutoff");
    app.add_option("--scale-c", scale_c, "scale factor c");
    app.add_option("--T", horizon, "time horizon");
    app.add_option("--n-steps", n_steps, "time steps");
    app.add_option("--paths", n_paths, "number of paths for scaling checks");
    app.add_option("--scan-k", scan_k, "scan simulated path for k-fold close approaches");
    app.add_option("--eps", eps, "close-approach box size");
    app.add_option("--min-sep", min_sep, "minimum time separation in a tuple");
    app.add_option("--perturb", perturb, "add this multiple of the identity to B (negative control)");
    app.add_option("--tol", tol, "threshold bisection tolerance");
    app.add_option("--output,-o", output, "output directory");
    app.add_flag("--strict", strict, "exit 3 on inconclusive verdicts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : levymp::cli::exit_invalid;
    }

    RunConfig cfg;
    try {
        if (!config_file.empty()) {
            std::ifstream f(config_file);
            if (!f) throw levymp::ConfigError("--config", "cannot open " + config_file);
            levymp::json j;
            try {
                j = levymp::json::parse(f);
            } catch (const levymp::json::parse_error& e) {
                throw levymp::ConfigError("--config", e.what());
            }
            levymp::cli::apply_json(cfg, j);
        }
        cfg.command = command;
        if (app.count("--matrix") && app.count("--alphas"))
            throw levymp::ConfigError("--matrix/--alphas", "supply exactly one of matrix and alphas");
        if (app.count("--matrix")) {
            levymp::json j;
            try {
                j = levymp::json::parse(matrix);
            } catch (const levymp::json::parse_error& e) {
                throw levymp::ConfigError("--matrix", e.what());
            }
            cfg.matrix = levymp::cli::parse_matrix(j, "--matrix");
            cfg.alphas.reset();
        }
        if (app.count("--alphas")) {
            cfg.alphas = split_exact(alphas, "--alphas");
            cfg.matrix.reset();
        }
        if (app.count("--case")) cfg.case_label = case_label;
        if (app.count("--k")) cfg.k = k;
        if (app.count("--seed")) cfg.seed = seed;
        if (app.count("--samples")) cfg.samples = samples;
        if (app.count("--ladder")) cfg.ladder = split_numbers(ladder, "--ladder");
        if (app.count("--direction")) cfg.direction = direction;
        if (app.count("--fixed")) cfg.fixed = fixed;
        if (app.count("--beta-grid")) cfg.beta_grid = split_numbers(beta_grid, "--beta-grid");
        if (app.count("--m-max")) cfg.m_max = m_max;
        if (app.count("--scale-c")) cfg.scale_c = scale_c;
        if (app.count("--T")) cfg.horizon = horizon;
        if (app.count("--n-steps")) cfg.n_steps = n_steps;
        if (app.count("--paths")) cfg.n_paths = n_paths;
        if (app.count("--scan-k")) cfg.scan_k = scan_k;
        if (app.count("--eps")) cfg.eps = eps;
        if (app.count("--min-sep")) cfg.min_sep = min_sep;
        if (app.count("--perturb")) cfg.perturb = perturb;
        if (app.count("--tol")) cfg.tolerances.threshold = tol;
        if (app.count("--output")) cfg.output_path = output;
        if (app.count("--strict")) cfg.strict = strict;
    } catch (const levymp::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return levymp::cli::exit_invalid;
    }
    return levymp::cli::run(cfg, std::cout, std::cerr);
}
