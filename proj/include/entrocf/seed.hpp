#pragma once

#include <cstdint>

namespace entrocf {

// SplitMix64 finalizer. Used to derive decorrelated child seeds from a master
// seed and a stream counter, so that model i of an ensemble always gets the
// same stream regardless of how many models are built.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(mix64(master) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

// Named sub-streams so that unrelated consumers of one master seed never
// collide.
enum class SeedStream : std::uint64_t {
  kInit = 1,
  kShuffle = 2,
  kDrop = 3,
  kReference = 4,
  kSplit = 5,
  kSubsample = 6,
  kSynthetic = 7,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream s,
                                    std::uint64_t index = 0) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(s)), index);
}

}  // namespace entrocf
