#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rauq/trace.hpp"

namespace rauq::testing {

// L=1, H=2, N=3, k_window=1, prompt_len=2.
// Consecutive attention inside the answer: head 0 (0.5, 0.4), head 1 (0.2, 0.9).
// First-token attention to the last prompt token: head 0 0.3, head 1 0.6.
inline GenerationTrace worked_trace() {
  GenerationTrace t;
  t.id = "worked";
  t.task = "qa";
  t.prompt_len = 2;
  t.tokens = {"Paris", "is", "nice"};
  t.probs = {0.9f, 0.8f, 0.7f};
  t.allocate_attention(1, 2, 1);
  t.attention(0, 0, 0, 1) = 0.3f;
  t.attention(0, 0, 1, 1) = 0.5f;
  t.attention(0, 0, 2, 1) = 0.4f;
  t.attention(0, 1, 0, 1) = 0.6f;
  t.attention(0, 1, 1, 1) = 0.2f;
  t.attention(0, 1, 2, 1) = 0.9f;
  t.quality = 0.5;
  return t;
}

struct RandomTraceShape {
  std::size_t max_layers = 4;
  std::size_t max_heads = 4;
  std::size_t max_len = 16;
  std::size_t max_window = 3;
  std::int64_t max_prompt = 3;
};

// Any valid trace: random shape, probabilities in (0, 1], attention in
// [0, 1] with sentinels exactly where the offset precedes the prompt.
inline GenerationTrace random_trace(std::mt19937_64& rng, const RandomTraceShape& shape = {}, std::string id = "r") {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GenerationTrace t;
  t.id = std::move(id);
  t.task = "prop";
  t.prompt_len = static_cast<std::int64_t>(pick(0, static_cast<std::size_t>(shape.max_prompt)));
  const std::size_t n = pick(1, shape.max_len);
  for (std::size_t i = 0; i < n; ++i) {
    t.tokens.push_back("t" + std::to_string(i));
    // Occasionally tiny, to exercise the log floor.
    const double p = unit(rng) < 0.05 ? 1e-30 : 1.0 - unit(rng);
    t.probs.push_back(std::max(static_cast<float>(p), 1e-37f));
  }
  t.allocate_attention(pick(1, shape.max_layers), pick(1, shape.max_heads), pick(1, shape.max_window));
  for (std::size_t l = 0; l < t.num_layers; ++l)
    for (std::size_t h = 0; h < t.num_heads; ++h)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 1; k <= t.k_window; ++k) {
          const double roll = unit(rng);
          const float a = roll < 0.03 ? 0.0f : roll < 0.06 ? 1.0f : static_cast<float>(unit(rng));
          t.attention(l, h, i, k) = t.addressable(i, k) ? a : kUndefinedAttention;
        }
  if (unit(rng) < 0.8) t.quality = unit(rng);
  return t;
}

}  // namespace rauq::testing
