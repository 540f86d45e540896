#pragma once

#include <filesystem>
#include <optional>

#include "jocot/net.hpp"
#include "jocot/rng.hpp"

namespace jocot {

/// Version written on the first line of every checkpoint.
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    Network network;
    std::optional<Rng> rng;
};

/// Text checkpoint. Layout:
///
///     jocot-checkpoint 1
///     layers <count> <dim>...
///     adam <beta1> <beta2> <epsilon> <step_count>
///     rng <engine state> | rng none
///     params <values>
///     first_moment <values>
///     second_moment <values>
///     end
///
/// Reals are hexadecimal floats so a load reproduces every bit. Values are
/// per layer: weights row-major, then bias.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace jocot
