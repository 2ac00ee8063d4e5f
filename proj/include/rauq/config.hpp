#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rauq/error.hpp"

namespace rauq {

// How token-level confidences are reduced to one per-layer uncertainty.
enum class TokenAgg { mean_log, mean, median, sum_log };

// How per-layer uncertainties are reduced to the sequence score.
enum class LayerAgg { max, mean, median };

// Confidence update rule. `rauq` is the full recurrent blend; the others are
// the ablations of it.
enum class Recurrence { rauq, no_attention, no_recurrence, prev_prob, prob_times_attn };

namespace detail {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<std::pair<std::string_view, Enum>, N>& names,
                std::string_view what) {
  for (const auto& [name, value] : names) {
    if (name == text) return value;
  }
  std::string known;
  for (const auto& [name, value] : names) {
    if (!known.empty()) known += ", ";
    known += name;
  }
  throw ConfigError("unknown " + std::string(what) + " \"" + std::string(text) + "\" (expected one of: " + known + ")");
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum value, const std::array<std::pair<std::string_view, Enum>, N>& names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

inline constexpr std::array<std::pair<std::string_view, TokenAgg>, 4> kTokenAggNames{{
    {"mean_log", TokenAgg::mean_log},
    {"mean", TokenAgg::mean},
    {"median", TokenAgg::median},
    {"sum_log", TokenAgg::sum_log},
}};

inline constexpr std::array<std::pair<std::string_view, LayerAgg>, 3> kLayerAggNames{{
    {"max", LayerAgg::max},
    {"mean", LayerAgg::mean},
    {"median", LayerAgg::median},
}};

inline constexpr std::array<std::pair<std::string_view, Recurrence>, 5> kRecurrenceNames{{
    {"rauq", Recurrence::rauq},
    {"no_attention", Recurrence::no_attention},
    {"no_recurrence", Recurrence::no_recurrence},
    {"prev_prob", Recurrence::prev_prob},
    {"prob_times_attn", Recurrence::prob_times_attn},
}};

}  // namespace detail

inline TokenAgg parse_token_agg(std::string_view s) { return detail::parse_enum(s, detail::kTokenAggNames, "token aggregation"); }
inline LayerAgg parse_layer_agg(std::string_view s) { return detail::parse_enum(s, detail::kLayerAggNames, "layer aggregation"); }
inline Recurrence parse_recurrence(std::string_view s) { return detail::parse_enum(s, detail::kRecurrenceNames, "recurrence"); }

inline std::string_view to_string(TokenAgg v) { return detail::enum_name(v, detail::kTokenAggNames); }
inline std::string_view to_string(LayerAgg v) { return detail::enum_name(v, detail::kLayerAggNames); }
inline std::string_view to_string(Recurrence v) { return detail::enum_name(v, detail::kRecurrenceNames); }

// Which layers contribute to the sequence score.
class LayerPolicy {
 public:
  enum class Kind { middle_third, all, explicit_list };

  LayerPolicy() = default;

  static LayerPolicy middle_third() { return LayerPolicy(Kind::middle_third, {}); }
  static LayerPolicy all() { return LayerPolicy(Kind::all, {}); }
  static LayerPolicy of(std::vector<std::size_t> layers) {
    if (layers.empty()) throw ConfigError("explicit layer list is empty");
    auto sorted = layers;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("explicit layer list has duplicates");
    }
    return LayerPolicy(Kind::explicit_list, std::move(layers));
  }

  // Accepts "middle-third", "all", or a comma-separated index list.
  static LayerPolicy parse(std::string_view text) {
    if (text == "middle-third" || text == "middle_third") return middle_third();
    if (text == "all") return all();
    std::vector<std::size_t> layers;
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      std::size_t value = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
      if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
        throw ConfigError("bad layer list \"" + std::string(text) + "\"");
      }
      layers.push_back(value);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return of(std::move(layers));
  }

  Kind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& explicit_layers() const noexcept { return layers_; }

  // Layer indices for a model with `num_layers` layers. The middle third is
  // [floor(L/3), floor(2L/3)), widened to one layer when that is empty.
  std::vector<std::size_t> resolve(std::size_t num_layers) const {
    std::vector<std::size_t> out;
    switch (kind_) {
      case Kind::middle_third: {
        const std::size_t lo = num_layers / 3;
        const std::size_t hi = std::max(2 * num_layers / 3, std::min(lo + 1, num_layers));
        for (std::size_t l = lo; l < hi; ++l) out.push_back(l);
        break;
      }
      case Kind::all:
        for (std::size_t l = 0; l < num_layers; ++l) out.push_back(l);
        break;
      case Kind::explicit_list:
        for (auto l : layers_) {
          if (l >= num_layers) {
            throw BoundsError("layer " + std::to_string(l) + " out of range for " + std::to_string(num_layers) +
                              " layers");
          }
        }
        out = layers_;
        break;
    }
    return out;
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::middle_third: return "middle-third";
      case Kind::all: return "all";
      case Kind::explicit_list: break;
    }
    std::string s;
    for (auto l : layers_) {
      if (!s.empty()) s += ',';
      s += std::to_string(l);
    }
    return s;
  }

 private:
  LayerPolicy(Kind kind, std::vector<std::size_t> layers) : kind_(kind), layers_(std::move(layers)) {}

  Kind kind_ = Kind::middle_third;
  std::vector<std::size_t> layers_;
};

struct RauqConfig {
  // Weight of the current token probability against the attention-carried
  // previous confidence.
  double alpha = 0.2;
  LayerPolicy layers = LayerPolicy::middle_third();
  TokenAgg token_agg = TokenAgg::mean_log;
  LayerAgg layer_agg = LayerAgg::max;
  Recurrence recurrence = Recurrence::rauq;
  // Confidences are clamped to this before taking a logarithm.
  double log_floor = 1e-12;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (!(log_floor > 0.0 && log_floor < 1.0)) throw ConfigError("log_floor must lie in (0, 1)");
  }
};

}  // namespace rauq
