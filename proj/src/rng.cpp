#include "randpad/rng.hpp"

namespace randpad {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t RngStream::derive(std::uint64_t global_seed, std::string_view purpose,
                                std::uint64_t epoch, std::uint64_t sample_index) {
  std::uint64_t h = splitmix64(global_seed);
  h = splitmix64(h ^ fnv1a(purpose));
  h = splitmix64(h ^ epoch);
  return splitmix64(h ^ sample_index);
}

RngStream::RngStream(std::uint64_t global_seed, std::string_view purpose, std::uint64_t epoch,
                     std::uint64_t sample_index)
    : engine_(derive(global_seed, purpose, epoch, sample_index)) {}

std::uint64_t RngStream::uniform_index(std::uint64_t bound) {
  return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
}

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double RngStream::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

bool RngStream::bernoulli(double p) { return uniform() < p; }

}  // namespace randpad
