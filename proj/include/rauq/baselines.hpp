#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rauq/config.hpp"
#include "rauq/core.hpp"
#include "rauq/stats.hpp"
#include "rauq/trace.hpp"

namespace rauq {

enum class BaselineId { msp, perplexity, attn_score_original, attn_score_gen_only, attn_score_gen_selected };

namespace detail {

inline constexpr std::array<std::pair<std::string_view, BaselineId>, 5> kBaselineNames{{
    {"msp", BaselineId::msp},
    {"perplexity", BaselineId::perplexity},
    {"attn_score_original", BaselineId::attn_score_original},
    {"attn_score_gen_only", BaselineId::attn_score_gen_only},
    {"attn_score_gen_selected", BaselineId::attn_score_gen_selected},
}};

}  // namespace detail

inline BaselineId parse_baseline(std::string_view s) { return detail::parse_enum(s, detail::kBaselineNames, "baseline"); }
inline std::string_view to_string(BaselineId v) { return detail::enum_name(v, detail::kBaselineNames); }

// Negative log sequence probability. Rank-equivalent to 1 - MSP and stable
// for long sequences.
inline double msp_score(const GenerationTrace& t, double log_floor = 1e-12) {
  return -stats::sum_log_floored(std::span<const float>(t.probs), log_floor);
}

// Length-normalised negative log-likelihood.
inline double perplexity_score(const GenerationTrace& t, double log_floor = 1e-12) {
  return stats::neg_mean_log(std::span<const float>(t.probs), log_floor);
}

// Attention Score: negative mean log attention to the preceding token.
//
//   original      every defined consecutive entry, including the first
//                 token's attention to the last prompt token; averaged
//                 over heads, then over the configured layers
//   gen_only      only entries whose predecessor is generated
//   gen_selected  gen_only restricted to each layer's selected head, then
//                 reduced with cfg.layer_agg
inline double attention_score(const GenerationTrace& t, BaselineId variant, const RauqConfig& cfg = {}) {
  cfg.validate();
  const auto layers = cfg.layers.resolve(t.num_layers);
  const std::size_t n = t.length();
  const double floor = cfg.log_floor;

  if (variant == BaselineId::attn_score_gen_selected) {
    if (n < 2) throw DataError("trace \"" + t.id + "\": attn_score_gen_selected needs at least two tokens");
    const auto sel = select_heads(t, layers);
    std::vector<double> per_layer;
    per_layer.reserve(layers.size());
    for (std::size_t j = 0; j < layers.size(); ++j) {
      double sum = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        sum += std::log(std::max(static_cast<double>(detail::consecutive_attention(t, layers[j], sel.heads[j], i)), floor));
      }
      per_layer.push_back(-sum / static_cast<double>(n - 1));
    }
    return aggregate_layers(per_layer, cfg.layer_agg);
  }

  if (variant != BaselineId::attn_score_original && variant != BaselineId::attn_score_gen_only) {
    throw ConfigError("attention_score called with non-attention baseline \"" + std::string(to_string(variant)) + "\"");
  }
  const bool with_prompt = variant == BaselineId::attn_score_original && t.prompt_len > 0;
  const std::size_t first = with_prompt ? 0 : 1;
  if (first >= n) {
    throw DataError("trace \"" + t.id + "\": no defined consecutive attention for " + std::string(to_string(variant)));
  }
  double layer_sum = 0.0;
  for (auto l : layers) {
    double head_sum = 0.0;
    for (std::size_t h = 0; h < t.num_heads; ++h) {
      double sum = 0.0;
      for (std::size_t i = first; i < n; ++i) {
        sum += std::log(std::max(static_cast<double>(detail::consecutive_attention(t, l, h, i)), floor));
      }
      head_sum += -sum / static_cast<double>(n - first);
    }
    layer_sum += head_sum / static_cast<double>(t.num_heads);
  }
  return layer_sum / static_cast<double>(layers.size());
}

inline double baseline_score(const GenerationTrace& t, BaselineId id, const RauqConfig& cfg = {}) {
  switch (id) {
    case BaselineId::msp: return msp_score(t, cfg.log_floor);
    case BaselineId::perplexity: return perplexity_score(t, cfg.log_floor);
    default: return attention_score(t, id, cfg);
  }
}

// A scoring method by name: "rauq" or any baseline id.
class Method {
 public:
  static Method parse(std::string_view name) {
    if (name == "rauq") return Method(std::string(name), false, BaselineId::msp);
    return Method(std::string(name), true, parse_baseline(name));
  }

  const std::string& name() const noexcept { return name_; }

  double score(const GenerationTrace& t, const RauqConfig& cfg) const {
    return is_baseline_ ? baseline_score(t, baseline_, cfg) : rauq_score(t, cfg);
  }

 private:
  Method(std::string name, bool is_baseline, BaselineId id)
      : name_(std::move(name)), is_baseline_(is_baseline), baseline_(id) {}

  std::string name_;
  bool is_baseline_;
  BaselineId baseline_;
};

}  // namespace rauq
