#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rauq/config.hpp"
#include "rauq/error.hpp"
#include "rauq/stats.hpp"
#include "rauq/trace.hpp"

namespace rauq {

// The uncertainty-aware head of each requested layer: the head paying the
// most average attention to the immediately preceding generated token.
struct HeadSelection {
  std::vector<std::size_t> layers;
  // heads[j] is the selected head of layers[j].
  std::vector<std::size_t> heads;
  // head_means[j][h]: mean consecutive attention of head h in layers[j].
  // NaN when degenerate.
  std::vector<std::vector<double>> head_means;
  // Fewer than two tokens, so there is no consecutive pair to average.
  bool degenerate = false;
};

struct LayerScores {
  HeadSelection selection;
  // confidences[j][i]: confidence of token i under layers[j].
  std::vector<std::vector<double>> confidences;
  std::vector<double> uncertainties;
};

namespace detail {

inline float consecutive_attention(const GenerationTrace& t, std::size_t layer, std::size_t head, std::size_t token) {
  const float a = t.attention(layer, head, token, 1);
  if (a == kUndefinedAttention) {
    throw DataError("trace \"" + t.id + "\": undefined consecutive attention at layer " + std::to_string(layer) +
                    ", head " + std::to_string(head) + ", token " + std::to_string(token));
  }
  return a;
}

}  // namespace detail

inline HeadSelection select_heads(const GenerationTrace& t, std::span<const std::size_t> layers) {
  HeadSelection sel;
  sel.layers.assign(layers.begin(), layers.end());
  sel.heads.assign(layers.size(), 0);
  sel.head_means.assign(layers.size(), std::vector<double>(t.num_heads, stats::nan));
  for (auto l : layers) {
    if (l >= t.num_layers) {
      throw BoundsError("layer " + std::to_string(l) + " out of range for " + std::to_string(t.num_layers) +
                        " layers");
    }
  }
  const std::size_t n = t.length();
  if (n < 2) {
    sel.degenerate = true;
    return sel;
  }
  for (std::size_t j = 0; j < layers.size(); ++j) {
    auto& means = sel.head_means[j];
    for (std::size_t h = 0; h < t.num_heads; ++h) {
      double sum = 0.0;
      for (std::size_t i = 1; i < n; ++i) sum += detail::consecutive_attention(t, layers[j], h, i);
      means[h] = sum / static_cast<double>(n - 1);
    }
    // max_element keeps the first maximum, i.e. the lowest head index.
    sel.heads[j] = static_cast<std::size_t>(std::max_element(means.begin(), means.end()) - means.begin());
  }
  return sel;
}

// Per-layer token confidences for the layers of `sel`.
inline std::vector<std::vector<double>> token_confidences(const GenerationTrace& t, const HeadSelection& sel,
                                                          const RauqConfig& cfg) {
  const std::size_t n = t.length();
  const double alpha = cfg.alpha;
  const double carry = 1.0 - alpha;
  std::vector<std::vector<double>> out(sel.layers.size(), std::vector<double>(n));
  for (std::size_t j = 0; j < sel.layers.size(); ++j) {
    const std::size_t layer = sel.layers[j];
    const std::size_t head = sel.heads[j];
    auto& c = out[j];
    c[0] = t.probs[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double p = t.probs[i];
      double next = 0.0;
      switch (cfg.recurrence) {
        case Recurrence::rauq:
          next = alpha * p + carry * detail::consecutive_attention(t, layer, head, i) * c[i - 1];
          break;
        case Recurrence::no_attention:
          next = alpha * p + carry * c[i - 1];
          break;
        case Recurrence::no_recurrence:
          next = alpha * p + carry * detail::consecutive_attention(t, layer, head, i);
          break;
        case Recurrence::prev_prob:
          next = alpha * p + carry * detail::consecutive_attention(t, layer, head, i) * t.probs[i - 1];
          break;
        case Recurrence::prob_times_attn:
          next = p * detail::consecutive_attention(t, layer, head, i);
          break;
      }
      // A convex blend of values in [0, 1] can round one ulp past 1.
      c[i] = std::min(next, 1.0);
    }
  }
  return out;
}

inline double layer_uncertainty(std::span<const double> confidences, const RauqConfig& cfg) {
  if (confidences.empty()) throw ContractError("layer_uncertainty needs at least one confidence");
  switch (cfg.token_agg) {
    case TokenAgg::mean_log:
      return stats::neg_mean_log(confidences, cfg.log_floor);
    case TokenAgg::sum_log:
      return -stats::sum_log_floored(confidences, cfg.log_floor);
    case TokenAgg::mean:
      return -stats::mean(confidences);
    case TokenAgg::median:
      return -stats::median(confidences);
  }
  return stats::nan;
}

inline double aggregate_layers(std::span<const double> uncertainties, LayerAgg agg) {
  switch (agg) {
    case LayerAgg::max: return stats::max(uncertainties);
    case LayerAgg::mean: return stats::mean(uncertainties);
    case LayerAgg::median: return stats::median(uncertainties);
  }
  return stats::nan;
}

// Head selection, confidences and per-layer uncertainties over the
// configured layer set.
inline LayerScores score_layers(const GenerationTrace& t, const RauqConfig& cfg) {
  cfg.validate();
  const auto layers = cfg.layers.resolve(t.num_layers);
  LayerScores s;
  s.selection = select_heads(t, layers);
  s.confidences = token_confidences(t, s.selection, cfg);
  s.uncertainties.reserve(layers.size());
  for (const auto& c : s.confidences) s.uncertainties.push_back(layer_uncertainty(c, cfg));
  return s;
}

// Sequence-level uncertainty; higher means more likely wrong.
inline double rauq_score(const GenerationTrace& t, const RauqConfig& cfg = {}) {
  const auto s = score_layers(t, cfg);
  return aggregate_layers(s.uncertainties, cfg.layer_agg);
}

}  // namespace rauq
