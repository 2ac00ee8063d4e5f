#pragma once

// Literal, loop-by-loop evaluation of the scoring formulas on plain nested
// vectors. Shares no code with the library so it can check it.

#include <cmath>
#include <string>
#include <vector>

#include "rauq/trace.hpp"

namespace rauq::oracle {

struct Plain {
  std::vector<double> probs;
  // consecutive[l][h][i] = attention from token i to token i-1 (i >= 1).
  std::vector<std::vector<std::vector<double>>> consecutive;
};

// Copies through the flat buffer with explicit index arithmetic.
inline Plain from_trace(const GenerationTrace& t) {
  Plain p;
  for (float x : t.probs) p.probs.push_back(x);
  const std::size_t n = t.tokens.size();
  p.consecutive.resize(t.num_layers);
  for (std::size_t l = 0; l < t.num_layers; ++l) {
    p.consecutive[l].resize(t.num_heads);
    for (std::size_t h = 0; h < t.num_heads; ++h) {
      p.consecutive[l][h].assign(n, 0.0);
      for (std::size_t i = 1; i < n; ++i) {
        const std::size_t flat = l * t.num_heads * n * t.k_window + h * n * t.k_window + i * t.k_window + 0;
        p.consecutive[l][h][i] = t.attn[flat];
      }
    }
  }
  return p;
}

// 1-based notation: h_l = argmax_h (1/(N-1)) sum_{i=2..N} a_{i,i-1}.
inline int select_head(const Plain& p, int layer) {
  const int n = static_cast<int>(p.probs.size());
  if (n < 2) return 0;
  int best = 0;
  double best_mean = -1.0;
  for (int h = 0; h < static_cast<int>(p.consecutive[layer].size()); ++h) {
    double s = 0.0;
    for (int i = 2; i <= n; ++i) s += p.consecutive[layer][h][i - 1];
    const double mean = s / (n - 1);
    if (mean > best_mean) {
      best_mean = mean;
      best = h;
    }
  }
  return best;
}

inline std::vector<double> confidences(const Plain& p, int layer, double alpha) {
  const int n = static_cast<int>(p.probs.size());
  const int h = select_head(p, layer);
  std::vector<double> c(n + 1);  // 1-based
  c[1] = p.probs[0];
  for (int i = 2; i <= n; ++i) {
    c[i] = alpha * p.probs[i - 1] + (1.0 - alpha) * p.consecutive[layer][h][i - 1] * c[i - 1];
  }
  return std::vector<double>(c.begin() + 1, c.end());
}

inline double layer_score(const Plain& p, int layer, double alpha, double floor = 1e-12) {
  const auto c = confidences(p, layer, alpha);
  double s = 0.0;
  for (double x : c) s += std::log(x < floor ? floor : x);
  return -s / static_cast<double>(c.size());
}

inline double score(const Plain& p, const std::vector<int>& layers, double alpha) {
  double best = -INFINITY;
  for (int l : layers) {
    const double u = layer_score(p, l, alpha);
    if (u > best) best = u;
  }
  return best;
}

}  // namespace rauq::oracle
