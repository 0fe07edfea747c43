#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace agvsl {

using Rng = std::mt19937_64;

// Named random streams. Every draw in a run comes from a stream derived from
// (seed, name, index), so toggling one feature leaves the other streams intact.
class RngStreams
{
public:
  explicit RngStreams (std::uint64_t seed) : m_seed (seed) {}

  Rng Stream (std::string_view name, std::uint64_t index = 0) const;

  std::uint64_t Seed () const { return m_seed; }

private:
  std::uint64_t m_seed;
};

// FNV-1a; stable across platforms, unlike std::hash.
constexpr std::uint64_t
HashName (std::string_view name)
{
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : name)
    {
      h ^= static_cast<unsigned char> (c);
      h *= 1099511628211ULL;
    }
  return h;
}

inline Rng
RngStreams::Stream (std::string_view name, std::uint64_t index) const
{
  const std::uint64_t h = HashName (name);
  std::seed_seq seq{static_cast<std::uint32_t> (m_seed), static_cast<std::uint32_t> (m_seed >> 32),
                    static_cast<std::uint32_t> (h), static_cast<std::uint32_t> (h >> 32),
                    static_cast<std::uint32_t> (index), static_cast<std::uint32_t> (index >> 32)};
  return Rng (seq);
}

inline double
Uniform01 (Rng &rng)
{
  return std::uniform_real_distribution<double> (0.0, 1.0) (rng);
}

inline std::int64_t
UniformInt (Rng &rng, std::int64_t lo, std::int64_t hi)
{
  return std::uniform_int_distribution<std::int64_t> (lo, hi) (rng);
}

} // namespace agvsl
