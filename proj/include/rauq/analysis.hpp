#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rauq/core.hpp"
#include "rauq/error.hpp"
#include "rauq/stats.hpp"
#include "rauq/trace.hpp"

namespace rauq {

// Mean attention of every head in one layer to the immediately preceding
// generated token.
struct HeadStats {
  std::size_t layer = 0;
  std::vector<double> means;
  std::size_t token_count = 0;
};

enum class HeadMode { selected, pooled };

inline std::string_view to_string(HeadMode m) { return m == HeadMode::selected ? "selected" : "pooled"; }

// Correct-vs-incorrect comparison of mean consecutive attention.
struct GroupContrast {
  std::size_t layer = 0;
  HeadMode mode = HeadMode::selected;
  double mean_correct = 0.0;
  double mean_incorrect = 0.0;
  double diff = 0.0;
  std::size_t n_correct = 0;
  std::size_t n_incorrect = 0;
};

struct QualityAttentionPair {
  std::string trace_id;
  double quality = 0.0;
  double selected_mean = 0.0;
};

inline HeadStats head_means(const GenerationTrace& t, std::size_t layer) {
  if (t.length() < 2) throw DataError("trace \"" + t.id + "\": head means need at least two tokens");
  const std::size_t layers[] = {layer};
  auto sel = select_heads(t, layers);
  return HeadStats{layer, std::move(sel.head_means[0]), t.length() - 1};
}

namespace detail {

inline double quality_of(const GenerationTrace& t) {
  if (!t.quality) throw ContractError("trace \"" + t.id + "\" has no quality label");
  return *t.quality;
}

inline double selected_or_pooled(const HeadStats& s, HeadMode mode) {
  // Selected head = argmax of the means, so its mean is the maximum.
  return mode == HeadMode::selected ? stats::max(s.means) : stats::mean(s.means);
}

}  // namespace detail

// Splits traces into incorrect (quality < lo) and correct (quality > hi)
// and compares their mean consecutive attention per layer, either through
// each trace's selected head or averaged over all heads. Single-token traces
// carry no consecutive attention and are skipped.
inline std::vector<GroupContrast> group_contrast(std::span<const GenerationTrace> traces,
                                                 std::span<const std::size_t> layers, HeadMode mode, double lo,
                                                 double hi) {
  std::vector<GroupContrast> out;
  for (auto layer : layers) {
    double sum_correct = 0.0, sum_incorrect = 0.0;
    std::size_t n_correct = 0, n_incorrect = 0;
    for (const auto& t : traces) {
      const double q = detail::quality_of(t);
      if (t.length() < 2 || !(q < lo || q > hi)) continue;
      const double v = detail::selected_or_pooled(head_means(t, layer), mode);
      if (q < lo) {
        sum_incorrect += v;
        ++n_incorrect;
      } else {
        sum_correct += v;
        ++n_correct;
      }
    }
    if (n_incorrect == 0) throw ContractError("no traces with quality below lo = " + std::to_string(lo));
    if (n_correct == 0) throw ContractError("no traces with quality above hi = " + std::to_string(hi));
    GroupContrast c;
    c.layer = layer;
    c.mode = mode;
    c.mean_correct = sum_correct / static_cast<double>(n_correct);
    c.mean_incorrect = sum_incorrect / static_cast<double>(n_incorrect);
    c.diff = c.mean_correct - c.mean_incorrect;
    c.n_correct = n_correct;
    c.n_incorrect = n_incorrect;
    out.push_back(c);
  }
  return out;
}

// For k = 1..k_max, correct-minus-incorrect difference of the selected
// head's mean attention to the k-th preceding generated token. An entry is
// NaN when no trace has a token k positions into the answer.
inline std::vector<double> kth_preceding_contrast(std::span<const GenerationTrace> traces, std::size_t layer,
                                                  std::size_t k_max, double lo, double hi) {
  if (k_max < 1) throw ContractError("k_max must be at least 1");
  std::vector<double> sum_correct(k_max, 0.0), sum_incorrect(k_max, 0.0);
  std::vector<std::size_t> n_correct(k_max, 0), n_incorrect(k_max, 0);
  bool any_correct = false, any_incorrect = false;
  for (const auto& t : traces) {
    if (t.k_window < k_max) {
      throw DataError("trace \"" + t.id + "\" has k_window " + std::to_string(t.k_window) + " < k_max " +
                      std::to_string(k_max));
    }
    const double q = detail::quality_of(t);
    if (!(q < lo || q > hi) || t.length() < 2) continue;
    const bool correct = q > hi;
    (correct ? any_correct : any_incorrect) = true;
    const std::size_t layers[] = {layer};
    const std::size_t head = select_heads(t, layers).heads[0];
    for (std::size_t k = 1; k <= k_max; ++k) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t i = k; i < t.length(); ++i) {
        const float a = t.attention(layer, head, i, k);
        if (a == kUndefinedAttention) continue;
        sum += a;
        ++count;
      }
      if (count == 0) continue;
      const double mean = sum / static_cast<double>(count);
      if (correct) {
        sum_correct[k - 1] += mean;
        ++n_correct[k - 1];
      } else {
        sum_incorrect[k - 1] += mean;
        ++n_incorrect[k - 1];
      }
    }
  }
  if (!any_incorrect) throw ContractError("no traces with quality below lo = " + std::to_string(lo));
  if (!any_correct) throw ContractError("no traces with quality above hi = " + std::to_string(hi));
  std::vector<double> diffs(k_max, stats::nan);
  for (std::size_t k = 0; k < k_max; ++k) {
    if (n_correct[k] == 0 || n_incorrect[k] == 0) continue;
    diffs[k] = sum_correct[k] / static_cast<double>(n_correct[k]) -
               sum_incorrect[k] / static_cast<double>(n_incorrect[k]);
  }
  return diffs;
}

// Raw (quality, selected-head mean attention) pairs for a scatter plot.
inline std::vector<QualityAttentionPair> quality_attention_pairs(std::span<const GenerationTrace> traces,
                                                                 std::size_t layer) {
  std::vector<QualityAttentionPair> out;
  for (const auto& t : traces) {
    const double q = detail::quality_of(t);
    if (t.length() < 2) continue;
    out.push_back({t.id, q, stats::max(head_means(t, layer).means)});
  }
  return out;
}

}  // namespace rauq
