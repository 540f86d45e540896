#include "jocot/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "jocot/errors.hpp"

namespace jocot {

namespace {

std::string hex(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

void write_values(std::ostream& out, const char* tag, const ModelParams& p) {
    out << tag;
    ModelParams copy = p;
    copy.for_each([&](double& v) { out << ' ' << hex(v); });
    out << '\n';
}

void expect(std::istream& in, const std::string& word, const std::filesystem::path& path) {
    std::string got;
    if (!(in >> got) || got != word)
        throw SchemaError(path.string() + ": expected '" + word + "', found '" + got + "'");
}

double read_real(std::istream& in, const std::filesystem::path& path) {
    std::string token;
    if (!(in >> token)) throw SchemaError(path.string() + ": truncated checkpoint");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) throw SchemaError(path.string() + ": bad real '" + token + "'");
    return v;
}

void read_values(std::istream& in, const char* tag, ModelParams& p, const std::filesystem::path& path) {
    expect(in, tag, path);
    p.for_each([&](double& v) { v = read_real(in, path); });
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const Network& net = checkpoint.network;
    out << "jocot-checkpoint " << kCheckpointVersion << '\n';
    out << "layers " << net.params.layer_dims.size();
    for (int d : net.params.layer_dims) out << ' ' << d;
    out << '\n';
    out << "adam " << hex(net.optimizer.beta1) << ' ' << hex(net.optimizer.beta2) << ' '
        << hex(net.optimizer.epsilon) << ' ' << net.optimizer.step_count << '\n';
    out << "rng " << (checkpoint.rng ? checkpoint.rng->state() : std::string("none")) << '\n';
    write_values(out, "params", net.params);
    write_values(out, "first_moment", net.optimizer.first_moment);
    write_values(out, "second_moment", net.optimizer.second_moment);
    out << "end\n";
    if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(file, line)) throw SchemaError(path.string() + ": empty checkpoint");
    {
        std::istringstream head(line);
        int version = 0;
        expect(head, "jocot-checkpoint", path);
        if (!(head >> version) || version != kCheckpointVersion)
            throw SchemaError(path.string() + ": unsupported checkpoint version");
    }
    Checkpoint ck;
    std::getline(file, line);
    std::istringstream layers(line);
    expect(layers, "layers", path);
    std::size_t count = 0;
    if (!(layers >> count) || count < 2) throw SchemaError(path.string() + ": bad layer count");
    std::vector<int> dims(count);
    for (int& d : dims)
        if (!(layers >> d) || d <= 0) throw SchemaError(path.string() + ": bad layer dim");

    std::getline(file, line);
    std::istringstream adam(line);
    expect(adam, "adam", path);
    AdamSettings settings;
    settings.beta1 = read_real(adam, path);
    settings.beta2 = read_real(adam, path);
    settings.epsilon = read_real(adam, path);
    std::uint64_t steps = 0;
    if (!(adam >> steps)) throw SchemaError(path.string() + ": bad step count");

    std::getline(file, line);
    if (line.rfind("rng ", 0) != 0) throw SchemaError(path.string() + ": missing rng line");
    const std::string rng_state = line.substr(4);
    if (rng_state != "none") {
        Rng rng(0);
        rng.set_state(rng_state);
        ck.rng = rng;
    }

    ck.network.params = ModelParams::zeros(dims);
    ck.network.optimizer = OptimizerState::for_params(ck.network.params, settings);
    ck.network.optimizer.step_count = steps;
    read_values(file, "params", ck.network.params, path);
    read_values(file, "first_moment", ck.network.optimizer.first_moment, path);
    read_values(file, "second_moment", ck.network.optimizer.second_moment, path);
    expect(file, "end", path);
    return ck;
}

}  // namespace jocot
