// scatlab command-line tool: simulate fixed-angle far-field datasets, run the
// fixed-point recovery, sweep the (m, l, N) experiments, and plot reports.
//
// Subcommands:
//   generate    simulate a dataset for example 1 or 2
//   recover     run the recovery on a dataset file
//   experiment  run an (n, m, l) sweep and write a CSV report
//   plot        render a report as an SVG error plot
//
// A JSON config file (--config) may supply any flag; command-line values win.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scatlab/forward.hpp"
#include "scatlab/inversion.hpp"
#include "scatlab/lab.hpp"

namespace {

// CLI11 config reader for flat JSON files; nested objects map to
// subcommand.option names.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        nlohmann::json j;
        for (const CLI::Option* opt : app->get_options({})) {
            if (!opt->get_lnames().empty() && opt->get_configurable()) {
                const std::string name = opt->get_lnames()[0];
                if (opt->count() > 0)
                    j[name] = opt->results().at(0);
                else if (default_also)
                    j[name] = opt->get_default_str();
            }
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        input >> j;
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static void collect(const nlohmann::json& j, std::vector<std::string> parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.value().is_object()) {
                auto deeper = parents;
                deeper.push_back(it.key());
                collect(it.value(), deeper, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = it.key();
            if (it.value().is_array()) {
                for (const auto& v : it.value()) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(it.value()));
            }
            items.push_back(std::move(item));
        }
    }

    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }
};

scatlab::Vec2 parse_theta0(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("--theta0", "expected X,Y");
    try {
        const double x = std::stod(text.substr(0, comma));
        const double y = std::stod(text.substr(comma + 1));
        return {x, y};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--theta0", "expected numeric X,Y");
    }
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) values.push_back(std::stoi(token));
    }
    if (values.empty()) throw CLI::ValidationError("list", "expected comma-separated integers");
    return values;
}

scatlab::PotentialSpec example_potential(int example) {
    return example == 1 ? scatlab::PotentialSpec::example1() : scatlab::PotentialSpec::example2();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D fixed-angle scattering laboratory"};
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file; command-line flags override it");
    app.fallthrough();   // lets --config appear after the subcommand as well
    app.require_subcommand(1);

    // ---- generate -----------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "simulate a fixed-angle dataset");
    gen->configurable();
    int gen_example = 1, gen_n = 32, gen_fine = 2, gen_threads = 0;
    double gen_kmax = 0.0, gen_tol = 1e-8;
    std::string gen_theta0 = "0,1", gen_out;
    gen->add_option("--example", gen_example, "test potential (1 or 2)")
        ->check(CLI::IsMember({1, 2}));
    gen->add_option("--n", gen_n, "inverse-grid points per axis")->required();
    gen->add_option("--theta0", gen_theta0, "incident direction X,Y (default 0,1)");
    gen->add_option("--fine", gen_fine, "data mesh refinement factor (default 2)");
    gen->add_option("--kmax", gen_kmax, "wavenumber cap (default: grid Nyquist)");
    gen->add_option("--tol", gen_tol, "direct solver tolerance (default 1e-8)");
    gen->add_option("--out", gen_out, "output dataset path (.csv)")->required();
    gen->add_option("--threads", gen_threads, "worker threads (default: all cores)");

    // ---- recover ------------------------------------------------------------
    auto* rec = app.add_subcommand("recover", "recover a potential from a dataset");
    rec->configurable();
    std::string rec_data, rec_out, rec_algorithm = "new";
    int rec_m = 2, rec_l = 6, rec_threads = 0;
    bool rec_trace = false;
    double rec_rinner = 1.9, rec_router = 2.08, rec_stop = 0.0;
    rec->add_option("--data", rec_data, "dataset path (.csv)")->required();
    rec->add_option("--m", rec_m, "Born-series depth (default 2)");
    rec->add_option("--l", rec_l, "fixed-point iterations (default 6)");
    rec->add_option("--algorithm", rec_algorithm, "new | bcr (default new)")
        ->check(CLI::IsMember({"new", "bcr"}));
    rec->add_flag("--trace", rec_trace, "write every iterate, not just the last");
    rec->add_option("--out", rec_out, "output raster path (.csv)")->required();
    rec->add_option("--rinner", rec_rinner, "cutoff plateau radius (default 1.9)");
    rec->add_option("--router", rec_router, "cutoff support radius (default 2.08)");
    rec->add_option("--stop-tol", rec_stop, "relative Cauchy stop (default 0 = run all)");
    rec->add_option("--threads", rec_threads, "worker threads (default: all cores)");

    // ---- experiment -----------------------------------------------------------
    auto* exp = app.add_subcommand("experiment", "run an (n, m, l) error sweep");
    exp->configurable();
    int exp_example = 1, exp_l = 6, exp_threads = 0;
    std::string exp_n, exp_m = "1,2,3,4", exp_tier = "quick", exp_report, exp_cache = "cache";
    std::string exp_algorithms = "new";
    exp->add_option("--example", exp_example, "test potential (1 or 2)")
        ->check(CLI::IsMember({1, 2}));
    exp->add_option("--n", exp_n, "mesh list, e.g. 32,64 (default from tier)");
    exp->add_option("--m", exp_m, "Born-series depths (default 1,2,3,4)");
    exp->add_option("--l", exp_l, "fixed-point iterations (default 6)");
    exp->add_option("--tier", exp_tier, "quick (n=32) | full (32,64) | paper (32,64,128)")
        ->check(CLI::IsMember({"quick", "full", "paper"}));
    exp->add_option("--report", exp_report, "output CSV report path")->required();
    exp->add_option("--algorithms", exp_algorithms, "comma list of new,bcr,born (default new)");
    exp->add_option("--cache", exp_cache, "dataset/row cache directory (default cache/)");
    exp->add_option("--threads", exp_threads, "worker threads (default: all cores)");

    // ---- plot ---------------------------------------------------------------
    auto* plt = app.add_subcommand("plot", "render a report as an SVG plot");
    plt->configurable();
    std::string plt_report, plt_x = "l", plt_out;
    plt->add_option("--report", plt_report, "report CSV path")->required();
    plt->add_option("--x", plt_x, "x axis: l or n (default l)")
        ->check(CLI::IsMember({"l", "n"}));
    plt->add_option("--out", plt_out, "output SVG path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const scatlab::GridSpec spec = scatlab::make_grid(gen_n);
            scatlab::DatasetOptions opts;
            opts.threads = gen_threads;
            const auto d = scatlab::generate_dataset(example_potential(gen_example), spec,
                                                     parse_theta0(gen_theta0), gen_fine,
                                                     gen_kmax, gen_tol, opts);
            scatlab::write_dataset(d, gen_out);
            std::printf("wrote %s: %zu records, %zu correction-omitted bins%s\n",
                        gen_out.c_str(), d.records.size(), d.omitted.size(),
                        d.inverse_crime ? " [inverse crime: fine_factor = 1]" : "");
        } else if (rec->parsed()) {
            const auto d = scatlab::read_dataset(rec_data);
            scatlab::RecoveryParams params;
            params.m = rec_m;
            params.l_max = rec_l;
            params.stop_tol = rec_stop;
            params.cutoff = scatlab::make_cutoff(d.inverse_spec, rec_rinner, rec_router);
            params.threads = rec_threads;
            const auto start = std::chrono::steady_clock::now();
            const scatlab::RecoveryTrace trace =
                rec_algorithm == "bcr" ? scatlab::bcr_recover(d, rec_l, d.tol, params)
                                       : scatlab::recover(d, params);
            const std::chrono::duration<double> total =
                std::chrono::steady_clock::now() - start;

            scatlab::write_field(trace.iterates.back(), rec_out);
            if (rec_trace) {
                for (std::size_t l = 0; l < trace.iterates.size(); ++l) {
                    std::ostringstream path;
                    path << rec_out << ".l" << (l + 1) << ".csv";
                    scatlab::write_field(trace.iterates[l], path.str());
                }
            }
            nlohmann::json meta;
            meta["algorithm"] = rec_algorithm;
            meta["m"] = rec_m;
            meta["l_max"] = rec_l;
            meta["timings"] = {{"total_seconds", total.count()},
                               {"per_iteration_seconds", trace.iter_seconds}};
            meta["cauchy_norms"] = trace.cauchy_norms;
            meta["imag_norms"] = trace.imag_norms;
            meta["omitted_fraction"] =
                static_cast<double>(d.omitted.size()) /
                static_cast<double>(d.records.size() + d.omitted.size());
            meta["sobolev_half_norm"] = scatlab::sobolev_norm(trace.iterates.back(), 0.5);
            if (trace.solver_failures > 0) meta["solver_failures"] = trace.solver_failures;
            std::ofstream mout(rec_out + ".meta.json");
            mout << meta.dump(2) << '\n';
            std::printf("wrote %s (+ metadata); final Cauchy norm %.3e\n", rec_out.c_str(),
                        trace.cauchy_norms.empty() ? 0.0 : trace.cauchy_norms.back());
        } else if (exp->parsed()) {
            std::vector<int> n_list;
            if (!exp_n.empty())
                n_list = parse_int_list(exp_n);
            else if (exp_tier == "quick")
                n_list = {32};
            else if (exp_tier == "full")
                n_list = {32, 64};
            else
                n_list = {32, 64, 128};
            scatlab::ExperimentConfig cfg;
            cfg.cache_dir = exp_cache;
            cfg.threads = exp_threads;
            std::stringstream algs(exp_algorithms);
            cfg.algorithms.clear();
            std::string token;
            while (std::getline(algs, token, ','))
                if (!token.empty()) cfg.algorithms.push_back(token);
            const auto rows = scatlab::run_experiment(exp_example, n_list,
                                                      parse_int_list(exp_m), exp_l, cfg);
            scatlab::write_report(rows, exp_report);
            std::printf("wrote %s: %zu rows\n", exp_report.c_str(), rows.size());
        } else if (plt->parsed()) {
            const auto rows = scatlab::read_report(plt_report);
            scatlab::emit_plot(rows, plt_out, plt_x);
            std::printf("wrote %s\n", plt_out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
