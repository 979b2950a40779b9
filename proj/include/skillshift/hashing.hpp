#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace skillshift {

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t value);

/// Counter-based seed derivation: folds each path element into the master
/// seed. The same (master, path) always yields the same seed.
std::uint64_t derive_seed(std::uint64_t master, const std::vector<std::uint64_t>& path);

/// Uniform integer in [0, bound) drawn from a 64-bit engine seeded with
/// `seed`. Uses rejection sampling so the result is identical on every
/// standard library.
std::uint64_t uniform_index(std::uint64_t seed, std::uint64_t bound);

}  // namespace skillshift
