#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace clrl {

using Rng = std::mt19937_64;

// splitmix64 step; used to mix tags into child-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a child seed from a root seed and a tag path. Distinct tag paths
// give statistically independent streams, so consumers can draw from their
// own stream without perturbing anyone else's.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(root);
  for (std::uint64_t t : tags) {
    s = splitmix64(s ^ splitmix64(t));
  }
  return s;
}

inline Rng make_stream(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
  return Rng(derive_seed(root, tags));
}

// Stream tags used by the experiment harness. Keeping them centralized makes
// the "adding an agent never changes another agent's draws" guarantee easy to
// audit.
namespace stream {
inline constexpr std::uint64_t kEnv = 1;
inline constexpr std::uint64_t kAgentStep = 2;
inline constexpr std::uint64_t kDiagnostics = 3;
}  // namespace stream

}  // namespace clrl
