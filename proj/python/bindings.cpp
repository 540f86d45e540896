#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "jocot/config.hpp"
#include "jocot/errors.hpp"
#include "jocot/experiment.hpp"
#include "jocot/losses.hpp"
#include "jocot/noise.hpp"
#include "jocot/selection.hpp"

namespace py = pybind11;

namespace {

std::vector<std::size_t> select_small_loss(const std::vector<double>& losses, double keep_fraction,
                                           const std::vector<std::size_t>& indices) {
    if (!indices.empty() && indices.size() != losses.size())
        throw jocot::ArgumentError("indices and losses differ in length");
    std::vector<jocot::IndexedLoss> items;
    for (std::size_t i = 0; i < losses.size(); ++i) items.push_back({indices.empty() ? i : indices[i], losses[i]});
    return jocot::small_loss_select(items, keep_fraction).indices();
}

py::dict run_experiment_text(const std::string& config_text, const std::string& out_dir) {
    jocot::ExperimentConfig config = jocot::parse_config(config_text);
    if (!out_dir.empty()) config.out_dir = out_dir;
    std::string text;
    {
        py::gil_scoped_release release;
        jocot::ExperimentResult result = jocot::run_experiment(config);
        if (!out_dir.empty()) jocot::emit_metrics(result, config.out_dir);
        text = nlohmann::json(result).dump();
    }
    py::module_ json = py::module_::import("json");
    return json.attr("loads")(text);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Trinity-network noisy-label learning (two teacher modules + consensus-trained student)";
    m.attr("__version__") = jocot::kArtifactVersion;

    py::register_exception<jocot::ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<jocot::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<jocot::UndefinedMetricError>(m, "UndefinedMetricError", PyExc_ArithmeticError);

    m.def("remember_rate", &jocot::remember_rate, py::arg("epoch"), py::arg("num_gradual_T"), py::arg("tau"));

    m.def(
        "per_sample_ce", [](const std::vector<double>& probs, int label) { return jocot::per_sample_ce(probs, label); },
        py::arg("probs"), py::arg("label"));
    m.def(
        "symmetric_kl",
        [](const std::vector<double>& p, const std::vector<double>& q) { return jocot::symmetric_kl(p, q); },
        py::arg("p"), py::arg("q"));
    m.def(
        "jocor_per_sample_loss",
        [](const std::vector<double>& p1, const std::vector<double>& p2, int label, double lambda_weight) {
            return jocot::jocor_per_sample_loss({p1, p2}, label, lambda_weight);
        },
        py::arg("probs_net1"), py::arg("probs_net2"), py::arg("label"), py::arg("lambda_weight"));

    m.def(
        "build_noise_matrix",
        [](const std::string& kind, double rate, int num_classes) {
            return jocot::build_noise_matrix(jocot::parse_noise_kind(kind), rate, num_classes).rows;
        },
        py::arg("kind"), py::arg("rate"), py::arg("num_classes"));
    m.def(
        "inject_noise",
        [](const std::vector<int>& labels, const std::string& kind, double rate, int num_classes, std::uint64_t seed) {
            const auto matrix = jocot::build_noise_matrix(jocot::parse_noise_kind(kind), rate, num_classes);
            const auto mask = jocot::inject_noise(labels, matrix, seed);
            return py::make_tuple(mask.noisy_labels, std::vector<bool>(mask.flipped));
        },
        py::arg("labels"), py::arg("kind"), py::arg("rate"), py::arg("num_classes"), py::arg("seed"),
        "Returns (noisy_labels, flipped).");

    m.def("small_loss_select", &select_small_loss, py::arg("losses"), py::arg("keep_fraction"),
          py::arg("indices") = std::vector<std::size_t>{});
    m.def(
        "consensus",
        [](const std::vector<std::size_t>& p1, const std::vector<std::size_t>& p2, const std::vector<std::size_t>& q1,
           const std::vector<std::size_t>& q2) {
            const auto ip = jocot::inner_consensus(jocot::SelectionSet(p1), jocot::SelectionSet(p2));
            const auto iq = jocot::inner_consensus(jocot::SelectionSet(q1), jocot::SelectionSet(q2));
            return jocot::outer_consensus(ip, iq).indices();
        },
        py::arg("p1"), py::arg("p2"), py::arg("q1"), py::arg("q2"));

    m.def(
        "synthesize_csv",
        [](const std::filesystem::path& path, int classes, std::size_t per_class, int dim, double separation,
           std::uint64_t seed) {
            jocot::write_csv(jocot::synthesize(classes, per_class, dim, separation, seed), path);
        },
        py::arg("path"), py::arg("classes") = 12, py::arg("per_class") = 600, py::arg("dim") = 51,
        py::arg("separation") = 3.0, py::arg("seed") = 2024);

    m.def("run_experiment", &run_experiment_text, py::arg("config_text"), py::arg("out_dir") = std::string(),
          "Runs a grid described in config-file syntax; returns the result as a dict.");
}
