#pragma once

// Counter-based random numbers. A draw is a pure function of its key, so
// results do not depend on evaluation order or thread scheduling.

#include <cstdint>
#include <initializer_list>

namespace sigwave {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Hash an ordered key tuple into one 64-bit word.
std::uint64_t hash_key(std::initializer_list<std::uint64_t> parts);

/// Small generator seeded from a hashed key; successive calls walk a
/// splitmix64 sequence.
class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t key) : state_(key) {}
  KeyedRng(std::initializer_list<std::uint64_t> parts) : state_(hash_key(parts)) {}

  std::uint64_t next_u64();
  /// Uniform in (0, 1).
  double uniform();
  /// Standard normal (Box–Muller; caches the second variate).
  double normal();

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Stream kinds that partition the key space.
enum class StreamKind : std::uint64_t {
  space_time_noise = 1,
  initial_position = 2,
  initial_velocity = 3,
  mala_proposal = 4,
  mala_accept = 5,
  trial_field = 6,
  generic = 7,
};

}  // namespace sigwave
