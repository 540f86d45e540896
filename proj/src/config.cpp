#include "jocot/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "jocot/errors.hpp"

namespace jocot {

std::string to_string(Method method) {
    switch (method) {
        case Method::jocot: return "jocot";
        case Method::coteaching: return "coteaching";
        case Method::coteachingplus: return "coteachingplus";
        case Method::jocor: return "jocor";
        case Method::ce_baseline: return "ce_baseline";
    }
    return "unknown";
}

Method parse_method(const std::string& text) {
    for (Method m : {Method::jocot, Method::coteaching, Method::coteachingplus, Method::jocor, Method::ce_baseline})
        if (to_string(m) == text) return m;
    throw ConfigError("unknown method '" + text + "'");
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

double to_real(const std::string& key, const std::string& value) {
    double v = 0.0;
    const std::string t = trim(value);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError("'" + key + "': expected a real, got '" + value + "'");
    return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& value) {
    Int v{};
    const std::string t = trim(value);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("'" + key + "': expected an integer, got '" + value + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    const std::string t = trim(value);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError("'" + key + "': expected a boolean, got '" + value + "'");
}

std::string real_text(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + fmt(items[i]);
    return out;
}

// "train.0.4" / "train.symmetric.0.4" -> override header, empty optional otherwise.
bool parse_override_section(const std::string& section, CellOverride& out) {
    if (section.rfind("train.", 0) != 0) return false;
    std::string rest = section.substr(6);
    for (const char* kind : {"pairflip.", "symmetric."}) {
        const std::string prefix(kind);
        if (rest.rfind(prefix, 0) == 0) {
            out.noise_kind = prefix.substr(0, prefix.size() - 1);
            rest = rest.substr(prefix.size());
            break;
        }
    }
    out.rate = to_real("[" + section + "]", rest);
    return true;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(to_real("list", item));
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(text)) out.push_back(to_int<std::uint64_t>("seeds", item));
    return out;
}

void apply_train_key(TrainConfig& t, const std::string& key, const std::string& value) {
    if (key == "base_lr" || key == "lr") t.base_lr = to_real(key, value);
    else if (key == "batch_size") t.batch_size = to_int<int>(key, value);
    else if (key == "total_epochs" || key == "epochs") t.total_epochs = to_int<int>(key, value);
    else if (key == "decay_start_epoch") t.decay_start_epoch = to_int<int>(key, value);
    else if (key == "lambda" || key == "lambda_weight") t.lambda_weight = to_real(key, value);
    else if (key == "num_gradual_T" || key == "num_gradual") t.num_gradual_T = to_int<int>(key, value);
    else if (key == "tau" || key == "noise_rate_tau") t.noise_rate_tau = to_real(key, value);
    else if (key == "seed") t.seed = to_int<std::uint64_t>(key, value);
    else if (key == "hidden") {
        t.hidden_dims.clear();
        for (const auto& item : split_list(value)) t.hidden_dims.push_back(to_int<int>(key, item));
    } else if (key == "beta1") t.adam.beta1 = to_real(key, value);
    else if (key == "beta2") t.adam.beta2 = to_real(key, value);
    else if (key == "epsilon") t.adam.epsilon = to_real(key, value);
    else if (key == "shared_ranking") t.jocor_shared_ranking = to_bool(key, value);
    else throw ConfigError("unknown train key '" + key + "'");
}

void apply_setting(ExperimentConfig& c, const std::string& section, const std::string& key, const std::string& value) {
    const std::string where = section + "." + key;
    if (section == "data") {
        DataSource& d = c.data;
        if (key == "source") {
            const std::string v = trim(value);
            if (v == "synthetic") d.kind = DataSource::Kind::synthetic;
            else if (v == "csv") d.kind = DataSource::Kind::csv;
            else throw ConfigError("'data.source' must be synthetic or csv");
        } else if (key == "path") {
            d.path = trim(value);
            d.kind = DataSource::Kind::csv;
        } else if (key == "classes") d.classes = to_int<int>(where, value);
        else if (key == "per_class") d.per_class = to_int<std::size_t>(where, value);
        else if (key == "dim") d.dim = to_int<int>(where, value);
        else if (key == "separation") d.separation = to_real(where, value);
        else if (key == "seed") d.seed = to_int<std::uint64_t>(where, value);
        else if (key == "rebalance") d.rebalance_per_class = to_int<std::size_t>(where, value);
        else if (key == "standardize") d.standardize = to_bool(where, value);
        else if (key == "train_frac") d.split.train_frac = to_real(where, value);
        else if (key == "test_frac") d.split.test_frac = to_real(where, value);
        else if (key == "val_frac") d.split.val_frac = to_real(where, value);
        else throw ConfigError("unknown key '" + where + "'");
    } else if (section == "experiment") {
        if (key == "method" || key == "methods") {
            c.methods.clear();
            for (const auto& m : split_list(value)) c.methods.push_back(parse_method(m));
        } else if (key == "noise") {
            c.noise_kinds.clear();
            try {
                for (const auto& k : split_list(value)) c.noise_kinds.push_back(parse_noise_kind(k));
            } catch (const ArgumentError& e) {
                throw ConfigError(e.what());
            }
        } else if (key == "rates") c.rates = parse_real_list(value);
        else if (key == "seeds") c.seeds = parse_seed_list(value);
        else if (key == "out") c.out_dir = trim(value);
        else if (key == "save_checkpoints") c.save_checkpoints = to_bool(where, value);
        else throw ConfigError("unknown key '" + where + "'");
    } else if (section == "train") {
        if (key == "tau" || key == "noise_rate_tau" || key == "seed")
            throw ConfigError("'" + key + "' is set per cell; use [experiment] seeds or a [train.<rate>] section");
        apply_train_key(c.train, key, value);
    } else {
        CellOverride header;
        if (!parse_override_section(section, header)) throw ConfigError("unknown section [" + section + "]");
        TrainConfig scratch;
        apply_train_key(scratch, key, value);  // validates the key name and value
        for (auto& o : c.overrides) {
            if (o.noise_kind == header.noise_kind && o.rate == header.rate) {
                o.values.emplace_back(key, trim(value));
                return;
            }
        }
        header.values.emplace_back(key, trim(value));
        c.overrides.push_back(std::move(header));
    }
}

TrainConfig ExperimentConfig::train_for(NoiseKind kind, double rate, std::uint64_t seed) const {
    TrainConfig t = train;
    t.seed = seed;
    t.noise_rate_tau = rate;
    // Kind-agnostic overrides first so kind-specific ones win.
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& o : overrides) {
            const bool specific = !o.noise_kind.empty();
            if (specific != (pass == 1) || o.rate != rate) continue;
            if (specific && o.noise_kind != to_string(kind)) continue;
            for (const auto& [k, v] : o.values) apply_train_key(t, k, v);
        }
    return t;
}

void ExperimentConfig::validate() const {
    if (methods.empty()) throw ConfigError("no methods configured");
    if (noise_kinds.empty()) throw ConfigError("no noise kinds configured");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    for (double r : rates)
        if (!(r >= 0.0 && r < 1.0)) throw ConfigError("noise rates must lie in [0, 1)");
    if (data.kind == DataSource::Kind::csv && data.path.empty()) throw ConfigError("data.path is required for csv");
    if (data.kind == DataSource::Kind::synthetic && (data.classes < 2 || data.per_class == 0 || data.dim < 2 ||
                                                     !(data.separation > 0.0)))
        throw ConfigError("invalid synthetic data parameters");
    TrainConfig probe = train;
    probe.noise_rate_tau = 0.0;
    probe.validate();
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside a section");
        try {
            apply_setting(c, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string render_config(const ExperimentConfig& c) {
    std::ostringstream out;
    const DataSource& d = c.data;
    out << "[data]\n";
    out << "source = " << (d.kind == DataSource::Kind::csv ? "csv" : "synthetic") << '\n';
    if (d.kind == DataSource::Kind::csv) out << "path = " << d.path.string() << '\n';
    out << "classes = " << d.classes << '\n'
        << "per_class = " << d.per_class << '\n'
        << "dim = " << d.dim << '\n'
        << "separation = " << real_text(d.separation) << '\n'
        << "seed = " << d.seed << '\n'
        << "rebalance = " << d.rebalance_per_class << '\n'
        << "standardize = " << (d.standardize ? "true" : "false") << '\n'
        << "train_frac = " << real_text(d.split.train_frac) << '\n'
        << "test_frac = " << real_text(d.split.test_frac) << '\n'
        << "val_frac = " << real_text(d.split.val_frac) << '\n';
    out << "\n[experiment]\n";
    out << "methods = " << join(c.methods, [](Method m) { return to_string(m); }) << '\n';
    out << "noise = " << join(c.noise_kinds, [](NoiseKind k) { return to_string(k); }) << '\n';
    out << "rates = " << join(c.rates, real_text) << '\n';
    out << "seeds = " << join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }) << '\n';
    out << "out = " << c.out_dir.string() << '\n';
    out << "save_checkpoints = " << (c.save_checkpoints ? "true" : "false") << '\n';
    const TrainConfig& t = c.train;
    out << "\n[train]\n";
    out << "base_lr = " << real_text(t.base_lr) << '\n'
        << "batch_size = " << t.batch_size << '\n'
        << "total_epochs = " << t.total_epochs << '\n'
        << "decay_start_epoch = " << t.decay_start_epoch << '\n'
        << "lambda = " << real_text(t.lambda_weight) << '\n'
        << "num_gradual_T = " << t.num_gradual_T << '\n'
        << "hidden = " << join(t.hidden_dims, [](int h) { return std::to_string(h); }) << '\n'
        << "beta1 = " << real_text(t.adam.beta1) << '\n'
        << "beta2 = " << real_text(t.adam.beta2) << '\n'
        << "epsilon = " << real_text(t.adam.epsilon) << '\n'
        << "shared_ranking = " << (t.jocor_shared_ranking ? "true" : "false") << '\n';
    for (const auto& o : c.overrides) {
        out << "\n[train." << (o.noise_kind.empty() ? "" : o.noise_kind + ".") << real_text(o.rate) << "]\n";
        for (const auto& [k, v] : o.values) out << k << " = " << v << '\n';
    }
    return out.str();
}

}  // namespace jocot
