// jocot: experiment runner for trinity-network noisy-label training.
//
//   jocot run --config exp.ini [--method M] [--noise K] [--rates 0.2,0.4] [--seeds 1,2,3] [--out DIR]
//   jocot synth --classes 12 --per-class 600 --separation S --out data.csv
//   jocot inspect --result result.json

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jocot/config.hpp"
#include "jocot/data.hpp"
#include "jocot/errors.hpp"
#include "jocot/experiment.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& method, const std::string& noise,
                const std::string& rates, const std::string& seeds, const std::string& out,
                const std::vector<std::string>& settings) {
    jocot::ExperimentConfig config =
        config_path.empty() ? jocot::ExperimentConfig{} : jocot::load_config(config_path);
    // Flags take precedence over the file.
    if (!method.empty()) jocot::apply_setting(config, "experiment", "methods", method);
    if (!noise.empty()) jocot::apply_setting(config, "experiment", "noise", noise);
    if (!rates.empty()) jocot::apply_setting(config, "experiment", "rates", rates);
    if (!seeds.empty()) jocot::apply_setting(config, "experiment", "seeds", seeds);
    if (!out.empty()) jocot::apply_setting(config, "experiment", "out", out);
    for (const auto& s : settings) {
        const auto eq = s.find('=');
        const auto dot = s.rfind('.', eq);
        if (eq == std::string::npos || dot == std::string::npos)
            throw jocot::ConfigError("--set expects section.key=value, got '" + s + "'");
        jocot::apply_setting(config, s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
    }

    const jocot::ExperimentResult result = jocot::run_experiment(config);
    jocot::emit_metrics(result, config.out_dir);
    std::cout << jocot::render_table(result);
    std::cout << "wrote " << config.out_dir.string() << "/summary.csv\n";
    return result.all_succeeded() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noisy-label learning with two teacher modules and a consensus-trained student"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment grid");
    std::string config_path, method, noise, rates, seeds, out;
    std::vector<std::string> settings;
    run->add_option("--config", config_path, "Experiment config file");
    run->add_option("--method", method, "jocot, coteaching, coteachingplus, jocor or ce_baseline (comma list)");
    run->add_option("--noise", noise, "pairflip or symmetric (comma list)");
    run->add_option("--rates", rates, "Noise rates, e.g. 0.2,0.4");
    run->add_option("--seeds", seeds, "Seeds, e.g. 1,2,3");
    run->add_option("--out", out, "Output directory");
    run->add_option("--set", settings, "Override any config key: section.key=value");

    auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian-cluster dataset as CSV");
    int classes = 12;
    std::size_t per_class = 600;
    int dim = jocot::kSkeletonFeatureDim;
    double separation = 3.0;
    std::uint64_t seed = 2024;
    std::string synth_out;
    synth->add_option("--classes", classes)->check(CLI::Range(2, 1 << 20));
    synth->add_option("--per-class", per_class)->check(CLI::PositiveNumber);
    synth->add_option("--dim", dim)->check(CLI::Range(2, 1 << 20));
    synth->add_option("--separation", separation)->check(CLI::PositiveNumber);
    synth->add_option("--seed", seed);
    synth->add_option("--out", synth_out)->required();

    auto* inspect = app.add_subcommand("inspect", "Print the summary table of a result.json");
    std::string result_path;
    inspect->add_option("--result", result_path)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return run_command(config_path, method, noise, rates, seeds, out, settings);
        if (*synth) {
            jocot::write_csv(jocot::synthesize(classes, per_class, dim, separation, seed), synth_out);
            std::cout << "wrote " << static_cast<std::size_t>(classes) * per_class << " samples to " << synth_out
                      << '\n';
            return 0;
        }
        if (*inspect) {
            const auto result = jocot::load_result(result_path);
            std::cout << result.version << '\n' << jocot::render_table(result);
            return result.all_succeeded() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
