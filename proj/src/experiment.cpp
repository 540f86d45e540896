#include "jocot/experiment.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "jocot/checkpoint.hpp"
#include "jocot/errors.hpp"

namespace jocot {

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string CellResult::name() const {
    return to_string(method) + "_" + to_string(noise_kind) + "_" + format_real(rate) + "_s" + std::to_string(seed);
}

bool ExperimentResult::all_succeeded() const {
    for (const auto& c : cells)
        if (c.error) return false;
    return true;
}

PreparedData prepare_data(const DataSource& source) {
    LabeledDataset full = source.kind == DataSource::Kind::csv
                              ? load_csv(source.path, source.dim)
                              : synthesize(source.classes, source.per_class, source.dim, source.separation, source.seed);
    if (source.rebalance_per_class > 0) full = rebalance(full, source.rebalance_per_class, mix_seed(source.seed, 1));
    SplitSpec spec = source.split;
    spec.seed = mix_seed(source.seed, 2);
    PreparedData out{split(full, spec)};
    if (source.standardize) {
        const Standardizer s = Standardizer::fit(out.splits.train);
        out.splits.train = s.apply(out.splits.train);
        out.splits.test = s.apply(out.splits.test);
        out.splits.val = s.apply(out.splits.val);
    }
    return out;
}

namespace {

TeacherKind teacher_kind(Method m) {
    switch (m) {
        case Method::coteaching: return TeacherKind::coteaching;
        case Method::coteachingplus: return TeacherKind::coteachingplus;
        case Method::jocor: return TeacherKind::jocor;
        default: throw std::logic_error("not a single-module method");
    }
}

SelectionSet everything(std::size_t n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return SelectionSet(std::move(all), SelectionScope::final);
}

}  // namespace

CellResult run_cell(Method method, NoiseKind kind, double rate, std::uint64_t seed, const ExperimentConfig& config,
                    const PreparedData& data) {
    const auto& [train, test, val] = data.splits;
    CellResult cell;
    cell.method = method;
    cell.noise_kind = kind;
    cell.rate = rate;
    cell.seed = seed;
    cell.train_size = train.size();

    const TrainConfig tc = config.train_for(kind, rate, seed);
    tc.validate();
    const NoiseMatrix matrix = build_noise_matrix(kind, rate, train.num_classes);
    const NoiseMask mask = inject_noise(train.labels, matrix, mix_seed(seed, streams::noise));
    const LabeledDataset noisy = train.with_labels(mask.noisy_labels);
    cell.realized_noise = mask.flipped_fraction();
    const bool has_flips = mask.num_flipped() > 0;

    Monitor monitor;
    monitor.mask = &mask;
    monitor.test = &test;
    std::optional<Checkpoint> checkpoint;

    if (method == Method::jocot) {
        TeacherRun teachers = train_teachers(tc, noisy, monitor);
        StudentRun student = train_student(noisy, teachers.clean_set, val, tc, monitor);
        cell.test_accuracy = evaluate(student.params, test);
        cell.best_epoch = student.best_epoch;
        cell.clean_set_size = teachers.clean_set.size();
        cell.noisy_label_precision = teachers.epochs.back().noisy_label_precision;
        for (std::size_t e = 0; e < teachers.epochs.size(); ++e) {
            EpochMetrics m = teachers.epochs[e];
            m.test_accuracy = student.epochs[e].test_accuracy;
            cell.epochs.push_back(m);
        }
        checkpoint = Checkpoint{student.final_network, student.final_shuffle};
    } else if (method == Method::ce_baseline) {
        StudentRun student = train_student(noisy, everything(noisy.size()), val, tc, monitor);
        cell.test_accuracy = evaluate(student.params, test);
        cell.best_epoch = student.best_epoch;
        cell.clean_set_size = noisy.size();
        // Nothing is flagged as noisy.
        if (has_flips) cell.noisy_label_precision = 0.0;
        for (EpochMetrics m : student.epochs) {
            m.noisy_label_precision = cell.noisy_label_precision;
            m.remember_rate = 1.0;
            cell.epochs.push_back(m);
        }
        checkpoint = Checkpoint{student.final_network, student.final_shuffle};
    } else {
        ModuleRun run = train_module(teacher_kind(method), tc, noisy, val, monitor);
        cell.test_accuracy = evaluate(run.best_net1, test);
        cell.best_epoch = run.best_epoch;
        cell.clean_set_size = run.clean_set.size();
        cell.noisy_label_precision = run.epochs.back().noisy_label_precision;
        cell.epochs = run.epochs;
        checkpoint = Checkpoint{run.state.net1, std::nullopt};
    }

    if (config.save_checkpoints && checkpoint) {
        std::filesystem::create_directories(config.out_dir);
        save_checkpoint(*checkpoint, config.out_dir / ("model_" + cell.name() + ".ckpt"));
    }
    return cell;
}

std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells) {
    std::vector<SummaryRow> rows;
    std::vector<std::size_t> precision_counts;
    for (const auto& c : cells) {
        if (c.error) continue;
        std::size_t k = 0;
        while (k < rows.size() &&
               !(rows[k].method == c.method && rows[k].noise_kind == c.noise_kind && rows[k].rate == c.rate))
            ++k;
        if (k == rows.size()) {
            rows.push_back({c.method, c.noise_kind, c.rate, 0, 0.0, std::nullopt, 0.0});
            precision_counts.push_back(0);
        }
        SummaryRow& r = rows[k];
        r.seeds += 1;
        r.test_accuracy += c.test_accuracy;
        r.clean_set_size += static_cast<double>(c.clean_set_size);
        if (c.noisy_label_precision) {
            r.noisy_label_precision = r.noisy_label_precision.value_or(0.0) + *c.noisy_label_precision;
            precision_counts[k] += 1;
        }
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto n = static_cast<double>(rows[k].seeds);
        rows[k].test_accuracy /= n;
        rows[k].clean_set_size /= n;
        if (rows[k].noisy_label_precision)
            *rows[k].noisy_label_precision /= static_cast<double>(precision_counts[k]);
    }
    return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    return run_experiment(config, prepare_data(config.data));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const PreparedData& data) {
    config.validate();
    ExperimentResult result;
    result.config_text = render_config(config);
    for (Method method : config.methods)
        for (NoiseKind kind : config.noise_kinds)
            for (double rate : config.rates)
                for (std::uint64_t seed : config.seeds) {
                    try {
                        result.cells.push_back(run_cell(method, kind, rate, seed, config, data));
                    } catch (const std::exception& e) {
                        CellResult failed;
                        failed.method = method;
                        failed.noise_kind = kind;
                        failed.rate = rate;
                        failed.seed = seed;
                        failed.error = e.what();
                        std::cerr << "cell " << failed.name() << " failed: " << e.what() << '\n';
                        result.cells.push_back(std::move(failed));
                    }
                }
    result.summary = summarize(result.cells);
    return result;
}

namespace {

std::string opt_text(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string summary_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "method,noise_kind,rate,seed,test_acc,noisy_precision,clean_set_size\n";
    for (const auto& c : result.cells) {
        if (c.error) continue;
        out << to_string(c.method) << ',' << to_string(c.noise_kind) << ',' << format_real(c.rate) << ',' << c.seed
            << ',' << format_real(c.test_accuracy) << ',' << opt_text(c.noisy_label_precision) << ','
            << c.clean_set_size << '\n';
    }
    return out.str();
}

std::string epochs_csv(const CellResult& cell) {
    std::ostringstream out;
    out << "epoch,test_acc,noisy_precision,remember_rate,lr\n";
    for (const auto& m : cell.epochs)
        out << m.epoch << ',' << opt_text(m.test_accuracy) << ',' << opt_text(m.noisy_label_precision) << ','
            << format_real(m.remember_rate) << ',' << format_real(m.lr) << '\n';
    return out.str();
}

void emit_metrics(const ExperimentResult& result, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    write_text(out_dir / "summary.csv", summary_csv(result));

    std::ostringstream mean;
    mean << "method,noise_kind,rate,seeds,test_acc,noisy_precision,clean_set_size\n";
    for (const auto& r : result.summary)
        mean << to_string(r.method) << ',' << to_string(r.noise_kind) << ',' << format_real(r.rate) << ',' << r.seeds
             << ',' << format_real(r.test_accuracy) << ',' << opt_text(r.noisy_label_precision) << ','
             << format_real(r.clean_set_size) << '\n';
    write_text(out_dir / "summary_mean.csv", mean.str());

    for (const auto& c : result.cells)
        if (!c.error) write_text(out_dir / ("epochs_" + c.name() + ".csv"), epochs_csv(c));
    write_text(out_dir / "result.json", nlohmann::json(result).dump(2) + "\n");
}

std::string render_table(const ExperimentResult& result) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-15s %-10s %6s %6s %12s %14s %12s\n", "method", "noise", "rate", "seeds",
                  "test_acc(%)", "noisy_prec(%)", "clean_size");
    out << line;
    for (const auto& r : result.summary) {
        char prec[32] = "-";
        if (r.noisy_label_precision) std::snprintf(prec, sizeof(prec), "%.2f", 100.0 * *r.noisy_label_precision);
        std::snprintf(line, sizeof(line), "%-15s %-10s %6.2f %6zu %12.2f %14s %12.1f\n", to_string(r.method).c_str(),
                      to_string(r.noise_kind).c_str(), r.rate, r.seeds, 100.0 * r.test_accuracy, prec,
                      r.clean_set_size);
        out << line;
    }
    for (const auto& c : result.cells)
        if (c.error) out << "FAILED " << c.name() << ": " << *c.error << '\n';
    return out.str();
}

namespace {

template <typename T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
    if (v)
        j[key] = *v;
    else
        j[key] = nullptr;
}

template <typename T>
std::optional<T> get_optional(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

}  // namespace

void to_json(nlohmann::json& j, const EpochMetrics& m) {
    j = {{"epoch", m.epoch},
         {"remember_rate", m.remember_rate},
         {"lr", m.lr},
         {"mean_selected_loss", m.mean_selected_loss},
         {"clean_set_size", m.clean_set_size}};
    put_optional(j, "test_accuracy", m.test_accuracy);
    put_optional(j, "noisy_label_precision", m.noisy_label_precision);
}

void from_json(const nlohmann::json& j, EpochMetrics& m) {
    m.epoch = j.at("epoch").get<int>();
    m.remember_rate = j.at("remember_rate").get<double>();
    m.lr = j.at("lr").get<double>();
    m.mean_selected_loss = j.at("mean_selected_loss").get<double>();
    m.clean_set_size = j.at("clean_set_size").get<std::size_t>();
    m.test_accuracy = get_optional<double>(j, "test_accuracy");
    m.noisy_label_precision = get_optional<double>(j, "noisy_label_precision");
}

void to_json(nlohmann::json& j, const CellResult& c) {
    j = {{"method", to_string(c.method)},
         {"noise_kind", to_string(c.noise_kind)},
         {"rate", c.rate},
         {"seed", c.seed},
         {"test_accuracy", c.test_accuracy},
         {"clean_set_size", c.clean_set_size},
         {"train_size", c.train_size},
         {"realized_noise", c.realized_noise},
         {"best_epoch", c.best_epoch},
         {"epochs", c.epochs}};
    put_optional(j, "noisy_label_precision", c.noisy_label_precision);
    put_optional(j, "error", c.error);
}

void from_json(const nlohmann::json& j, CellResult& c) {
    c.method = parse_method(j.at("method").get<std::string>());
    c.noise_kind = parse_noise_kind(j.at("noise_kind").get<std::string>());
    c.rate = j.at("rate").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.test_accuracy = j.at("test_accuracy").get<double>();
    c.clean_set_size = j.at("clean_set_size").get<std::size_t>();
    c.train_size = j.at("train_size").get<std::size_t>();
    c.realized_noise = j.at("realized_noise").get<double>();
    c.best_epoch = j.at("best_epoch").get<int>();
    c.epochs = j.at("epochs").get<std::vector<EpochMetrics>>();
    c.noisy_label_precision = get_optional<double>(j, "noisy_label_precision");
    c.error = get_optional<std::string>(j, "error");
}

void to_json(nlohmann::json& j, const SummaryRow& s) {
    j = {{"method", to_string(s.method)},
         {"noise_kind", to_string(s.noise_kind)},
         {"rate", s.rate},
         {"seeds", s.seeds},
         {"test_accuracy", s.test_accuracy},
         {"clean_set_size", s.clean_set_size}};
    put_optional(j, "noisy_label_precision", s.noisy_label_precision);
}

void from_json(const nlohmann::json& j, SummaryRow& s) {
    s.method = parse_method(j.at("method").get<std::string>());
    s.noise_kind = parse_noise_kind(j.at("noise_kind").get<std::string>());
    s.rate = j.at("rate").get<double>();
    s.seeds = j.at("seeds").get<std::size_t>();
    s.test_accuracy = j.at("test_accuracy").get<double>();
    s.clean_set_size = j.at("clean_set_size").get<double>();
    s.noisy_label_precision = get_optional<double>(j, "noisy_label_precision");
}

void to_json(nlohmann::json& j, const ExperimentResult& r) {
    j = {{"version", r.version}, {"config", r.config_text}, {"cells", r.cells}, {"summary", r.summary}};
}

void from_json(const nlohmann::json& j, ExperimentResult& r) {
    r.version = j.at("version").get<std::string>();
    r.config_text = j.at("config").get<std::string>();
    r.cells = j.at("cells").get<std::vector<CellResult>>();
    r.summary = j.at("summary").get<std::vector<SummaryRow>>();
}

ExperimentResult load_result(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in).get<ExperimentResult>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

}  // namespace jocot
