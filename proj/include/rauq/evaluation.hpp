#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rauq/error.hpp"

namespace rauq {

struct ScoreRecord {
  std::string trace_id;
  std::string method;
  double uncertainty = 0.0;
  double quality = 0.0;
};

struct CurvePoint {
  double rejection_fraction = 0.0;
  double mean_quality = 0.0;

  bool operator==(const CurvePoint&) const = default;
};

struct EvalReport {
  std::string method;
  std::size_t n = 0;
  double prr = 0.0;
  std::optional<double> roc_auc;
  std::vector<CurvePoint> curve;
};

enum class RejectionOrder {
  by_uncertainty,  // most uncertain rejected first
  oracle,          // lowest quality rejected first
  antioracle,      // highest quality rejected first
};

namespace detail {

// Indices in rejection order; ties fall back to ascending trace_id.
inline std::vector<std::size_t> rejection_ranking(std::span<const ScoreRecord> records, RejectionOrder order) {
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto key_less = [&](std::size_t a, std::size_t b) {
    const auto& ra = records[a];
    const auto& rb = records[b];
    switch (order) {
      case RejectionOrder::by_uncertainty:
        if (ra.uncertainty != rb.uncertainty) return ra.uncertainty > rb.uncertainty;
        break;
      case RejectionOrder::oracle:
        if (ra.quality != rb.quality) return ra.quality < rb.quality;
        break;
      case RejectionOrder::antioracle:
        if (ra.quality != rb.quality) return ra.quality > rb.quality;
        break;
    }
    if (ra.trace_id != rb.trace_id) return ra.trace_id < rb.trace_id;
    return a < b;
  };
  std::sort(idx.begin(), idx.end(), key_less);
  return idx;
}

inline double total_quality(std::span<const ScoreRecord> records) {
  double total = 0.0;
  for (const auto& r : records) total += r.quality;
  return total;
}

}  // namespace detail

// Mean quality of the retained records after rejecting m = 0..floor(n/2)
// records in the given order. Point m sits at fraction m/n.
inline std::vector<CurvePoint> rejection_curve(std::span<const ScoreRecord> records, RejectionOrder order) {
  const std::size_t n = records.size();
  if (n < 2) throw ContractError("rejection curve needs at least two records");
  const auto ranking = detail::rejection_ranking(records, order);
  const double total = detail::total_quality(records);
  std::vector<CurvePoint> curve;
  curve.reserve(n / 2 + 1);
  double rejected = 0.0;
  for (std::size_t m = 0; m <= n / 2; ++m) {
    if (m > 0) rejected += records[ranking[m - 1]].quality;
    const double retained = m == 0 ? total : total - rejected;
    curve.push_back({static_cast<double>(m) / static_cast<double>(n), retained / static_cast<double>(n - m)});
  }
  return curve;
}

namespace detail {

// Rectangle-sum area between a curve and the flat random-rejection line.
inline double area_over_random(std::span<const CurvePoint> curve, double mean_quality) {
  double area = 0.0;
  for (const auto& p : curve) area += p.mean_quality - mean_quality;
  return area;
}

}  // namespace detail

// Prediction rejection ratio over the first half of the rejection curve:
// 1 for the oracle ranking, about 0 for a random one, negative when worse.
inline double prr(std::span<const ScoreRecord> records) {
  const std::size_t n = records.size();
  if (n < 2) throw ContractError("PRR needs at least two records");
  const double mean = detail::total_quality(records) / static_cast<double>(n);
  const auto oracle = rejection_curve(records, RejectionOrder::oracle);
  const double oracle_area = detail::area_over_random(oracle, mean);
  if (!(oracle_area > 0.0)) throw ContractError("PRR undefined: oracle curve is flat (all qualities equal)");
  const auto curve = rejection_curve(records, RejectionOrder::by_uncertainty);
  return detail::area_over_random(curve, mean) / oracle_area;
}

// ROC-AUC of the uncertainty as a detector of low quality
// (positive = quality < threshold), via the rank-sum with midranks.
inline double roc_auc(std::span<const ScoreRecord> records, double threshold) {
  const std::size_t n = records.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return records[a].uncertainty < records[b].uncertainty; });
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && records[idx[end]].uncertainty == records[idx[start]].uncertainty) ++end;
    // Ranks are 1-based; a tie block shares the average of its ranks.
    const double midrank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) {
      if (records[idx[k]].quality < threshold) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    start = end;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw ContractError("ROC-AUC undefined: threshold " + std::to_string(threshold) + " leaves a single class");
  }
  const double np = static_cast<double>(positives);
  const double nn = static_cast<double>(negatives);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

inline EvalReport evaluate(std::span<const ScoreRecord> records, std::optional<double> roc_threshold = std::nullopt) {
  EvalReport r;
  r.method = records.empty() ? std::string{} : records.front().method;
  r.n = records.size();
  r.prr = prr(records);
  if (roc_threshold) r.roc_auc = roc_auc(records, *roc_threshold);
  r.curve = rejection_curve(records, RejectionOrder::by_uncertainty);
  return r;
}

}  // namespace rauq
