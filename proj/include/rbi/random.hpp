#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "rbi/prob.hpp"

namespace rbi {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Engine for an independent stream (e.g. one episode or one replica) derived
/// from a base seed, so results do not depend on how work is scheduled.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  return Engine(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

inline double uniform01(Engine& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double uniform(Engine& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_index(Engine& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Inverse-CDF draw; falls back to the last positive entry on round-off.
inline std::size_t sample_categorical(std::span<const double> probs, Engine& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t last = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = i;
    if (u < acc) return i;
  }
  if (last == probs.size()) throw std::invalid_argument("sample_categorical: no positive mass");
  return last;
}

/// Flat Dirichlet sample (normalized unit exponentials).
inline std::vector<double> dirichlet_flat(std::size_t n, Engine& rng) {
  std::vector<double> x(n);
  double sum = 0.0;
  for (double& v : x) {
    v = -std::log1p(-uniform01(rng));
    sum += v;
  }
  for (double& v : x) v /= sum;
  return x;
}

inline ProbVector random_prob_vector(std::size_t n, Engine& rng) { return ProbVector(dirichlet_flat(n, rng)); }

}  // namespace rbi
