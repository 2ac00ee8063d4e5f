#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rauq/error.hpp"

namespace rauq {

inline constexpr const char* kSchemaVersion = "rauq-trace/1";

// Marks attention entries whose source position lies before the prompt.
inline constexpr float kUndefinedAttention = -1.0f;

struct TraceFileHeader {
  std::string schema_version = kSchemaVersion;
  std::string model_name;
  std::string notes;

  bool operator==(const TraceFileHeader&) const = default;
};

// One generated sequence with its token probabilities and a window of
// attention weights from every generated token back to its k_window
// predecessors, for every layer and head.
//
// Attention is stored row-major as [layer][head][token][offset-1]. Offsets
// reaching into the prompt are stored; offsets reaching before the prompt
// hold kUndefinedAttention.
struct GenerationTrace {
  std::string id;
  std::string task;
  std::int64_t prompt_len = 0;
  std::vector<std::string> tokens;
  std::vector<float> probs;
  std::size_t num_layers = 0;
  std::size_t num_heads = 0;
  std::size_t k_window = 1;
  std::vector<float> attn;
  std::optional<double> quality;

  std::size_t length() const noexcept { return tokens.size(); }

  // Resizes `attn` to [num_layers][num_heads][length()][k_window] with
  // every entry set to `fill`.
  void allocate_attention(std::size_t layers, std::size_t heads, std::size_t window, float fill = 0.0f) {
    num_layers = layers;
    num_heads = heads;
    k_window = window;
    attn.assign(layers * heads * length() * window, fill);
  }

  std::size_t attention_index(std::size_t layer, std::size_t head, std::size_t token,
                              std::size_t offset) const noexcept {
    return ((layer * num_heads + head) * length() + token) * k_window + (offset - 1);
  }

  // Attention from generated token `token` (0-based) to the token `offset`
  // positions earlier, offset in [1, k_window].
  float attention(std::size_t layer, std::size_t head, std::size_t token, std::size_t offset) const noexcept {
    return attn[attention_index(layer, head, token, offset)];
  }
  float& attention(std::size_t layer, std::size_t head, std::size_t token, std::size_t offset) noexcept {
    return attn[attention_index(layer, head, token, offset)];
  }

  // True when token - offset addresses a prompt or answer position.
  bool addressable(std::size_t token, std::size_t offset) const noexcept {
    return static_cast<std::int64_t>(token) - static_cast<std::int64_t>(offset) >= -prompt_len;
  }

  bool operator==(const GenerationTrace&) const = default;
};

// Throws ValidationError naming the first field that breaks an invariant.
inline void validate(const GenerationTrace& t) {
  const std::size_t n = t.length();
  if (n == 0) throw ValidationError("tokens", "at least one generated token is required");
  if (t.probs.size() != n) {
    throw ValidationError("probs", "length " + std::to_string(t.probs.size()) + " does not match " +
                                       std::to_string(n) + " tokens");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const float p = t.probs[i];
    if (!(p > 0.0f && p <= 1.0f)) {
      throw ValidationError("probs", "entry " + std::to_string(i) + " outside (0, 1]");
    }
  }
  if (t.prompt_len < 0) throw ValidationError("prompt_len", "must be non-negative");
  if (t.k_window < 1) throw ValidationError("k_window", "must be at least 1");
  if (t.num_layers < 1) throw ValidationError("attn", "at least one layer is required");
  if (t.num_heads < 1) throw ValidationError("attn", "at least one head is required");
  if (t.attn.size() != t.num_layers * t.num_heads * n * t.k_window) {
    throw ValidationError("attn", "size does not match [L][H][N][k_window]");
  }
  for (std::size_t l = 0; l < t.num_layers; ++l) {
    for (std::size_t h = 0; h < t.num_heads; ++h) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 1; k <= t.k_window; ++k) {
          const float a = t.attention(l, h, i, k);
          const bool ok = t.addressable(i, k) ? (a >= 0.0f && a <= 1.0f) : (a == kUndefinedAttention);
          if (!ok) {
            throw ValidationError("attn", "entry [" + std::to_string(l) + "][" + std::to_string(h) + "][" +
                                              std::to_string(i) + "][" + std::to_string(k - 1) + "] = " +
                                              std::to_string(a) +
                                              (t.addressable(i, k) ? " outside [0, 1]" : " must be -1 (before prompt)"));
          }
        }
      }
    }
  }
  if (t.quality && !std::isfinite(*t.quality)) throw ValidationError("quality", "must be finite");
}

}  // namespace rauq
