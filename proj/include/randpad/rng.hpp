#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace randpad {

/// Deterministic generator whose seed is a pure function of
/// (global seed, purpose tag, epoch, sample index).
///
/// Two streams built from the same four inputs produce identical draws no
/// matter which worker builds them or in what order.
class RngStream {
 public:
  RngStream(std::uint64_t global_seed, std::string_view purpose, std::uint64_t epoch = 0,
            std::uint64_t sample_index = 0);

  /// Uniform integer in [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  bool bernoulli(double p);

  std::mt19937_64& engine() { return engine_; }

  static std::uint64_t derive(std::uint64_t global_seed, std::string_view purpose,
                              std::uint64_t epoch, std::uint64_t sample_index);

 private:
  std::mt19937_64 engine_;
};

}  // namespace randpad
