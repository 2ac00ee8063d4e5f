#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rauq/error.hpp"
#include "rauq/trace.hpp"

namespace rauq {

struct SyntheticOptions {
  std::size_t num_layers = 4;
  std::size_t num_heads = 4;
  std::size_t min_len = 3;
  std::size_t max_len = 12;
  std::size_t k_window = 2;
  // Fixed prompt length; drawn from [1, 4] per trace when unset.
  std::optional<std::int64_t> prompt_len;
  // Slope of token probability against quality. Zero leaves the attention
  // head as the only informative signal.
  double prob_slope = 0.05;
};

namespace detail {

// mt19937_64 output is fixed by the standard; the distributions are not, so
// uniform draws are built by hand to keep files identical across platforms.
class SyntheticRng {
 public:
  explicit SyntheticRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::size_t index(std::size_t bound) {
    return std::min(static_cast<std::size_t>(uniform() * static_cast<double>(bound)), bound - 1);
  }

 private:
  std::mt19937_64 engine_;
};

// Quality labels cluster near 0 (wrong) and 1 (right).
inline constexpr double kQualitySpread = 0.1;
// Planted head: consecutive attention rises linearly with quality.
inline constexpr double kPlantedBase = 0.45;
inline constexpr double kPlantedSlope = 0.5;
inline constexpr double kPlantedJitter = 0.04;
// Every other head, and the planted head at signal 0.
inline constexpr double kNoiseCeiling = 0.3;
// Attention further back than the previous token carries no signal.
inline constexpr double kFarCeiling = 0.05;
// Token probabilities: strong noise around a fixed centre.
inline constexpr double kProbCentre = 0.7;
inline constexpr double kProbNoise = 0.15;
inline constexpr double kProbMin = 0.05;

}  // namespace detail

// The planted head of each layer for a given seed.
inline std::vector<std::size_t> synthetic_designated_heads(std::uint64_t seed, const SyntheticOptions& opts = {}) {
  detail::SyntheticRng rng(seed);
  std::vector<std::size_t> heads(opts.num_layers);
  for (auto& h : heads) h = rng.index(opts.num_heads);
  return heads;
}

// Deterministic traces where one head per layer carries consecutive
// attention that tracks the quality label with strength `signal`.
inline std::vector<GenerationTrace> gen_synthetic(std::size_t n, std::uint64_t seed, double signal,
                                                  const SyntheticOptions& opts = {}) {
  if (n < 2) throw ContractError("gen_synthetic needs n >= 2");
  if (!(signal >= 0.0 && signal <= 1.0)) throw ContractError("signal must lie in [0, 1]");
  if (opts.num_layers < 1 || opts.num_heads < 1 || opts.k_window < 1 || opts.min_len < 1 ||
      opts.max_len < opts.min_len) {
    throw ContractError("invalid synthetic shape");
  }
  if (opts.prompt_len && *opts.prompt_len < 0) throw ContractError("prompt_len must be non-negative");

  detail::SyntheticRng rng(seed);
  std::vector<std::size_t> designated(opts.num_layers);
  for (auto& h : designated) h = rng.index(opts.num_heads);

  std::vector<GenerationTrace> out;
  out.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    GenerationTrace t;
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%06zu", r);
    t.id = id;
    t.task = "synthetic";
    const bool correct = rng.uniform() < 0.5;
    const double quality = correct ? 1.0 - detail::kQualitySpread * rng.uniform() : detail::kQualitySpread * rng.uniform();
    const std::size_t len = opts.min_len + rng.index(opts.max_len - opts.min_len + 1);
    const std::int64_t prompt = static_cast<std::int64_t>(1 + rng.index(4));
    t.prompt_len = opts.prompt_len.value_or(prompt);
    t.quality = quality;

    for (std::size_t i = 0; i < len; ++i) {
      t.tokens.push_back("tok" + std::to_string(i));
      const double p = detail::kProbCentre + opts.prob_slope * (quality - 0.5) +
                       detail::kProbNoise * (2.0 * rng.uniform() - 1.0);
      t.probs.push_back(static_cast<float>(std::clamp(p, detail::kProbMin, 1.0)));
    }

    t.allocate_attention(opts.num_layers, opts.num_heads, opts.k_window);
    for (std::size_t l = 0; l < opts.num_layers; ++l) {
      for (std::size_t h = 0; h < opts.num_heads; ++h) {
        for (std::size_t i = 0; i < len; ++i) {
          // Draw everything unconditionally so the stream does not depend
          // on signal or on which positions are addressable.
          const double noise = detail::kNoiseCeiling * rng.uniform();
          const double jitter = detail::kPlantedJitter * (2.0 * rng.uniform() - 1.0);
          double a = noise;
          if (h == designated[l]) {
            const double planted = std::clamp(detail::kPlantedBase + detail::kPlantedSlope * quality + jitter, 0.0, 1.0);
            a = signal * planted + (1.0 - signal) * noise;
          }
          t.attention(l, h, i, 1) = t.addressable(i, 1) ? static_cast<float>(a) : kUndefinedAttention;
          for (std::size_t k = 2; k <= opts.k_window; ++k) {
            const double far = detail::kFarCeiling * rng.uniform();
            t.attention(l, h, i, k) = t.addressable(i, k) ? static_cast<float>(far) : kUndefinedAttention;
          }
        }
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace rauq
