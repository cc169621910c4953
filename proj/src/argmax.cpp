#include "batchts/argmax.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <vector>

namespace batchts {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kInvSqrt2 = 0.70710678118654752440084436210484903928;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438187;
constexpr double kBandSigmas = 8.0;  // Phi(-8) ~ 6e-16, below every tolerance here

GaussLegendreRule make_gauss_legendre(int order) {
  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n(x).
    double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

struct PanelWorkspace {
  // Scratch matrices sized (nodes x arms), reused across panels.
  Eigen::ArrayXd x, w;
  Eigen::ArrayXXd cdf, pdf, prefix, suffix;
};

// Contribution of one panel [a, b] to every q_i, under the given GL rule.
Eigen::ArrayXd panel_contribution(double a, double b, const GaussLegendreRule& rule,
                                  const Eigen::ArrayXd& means,
                                  const Eigen::ArrayXd& stddevs,
                                  PanelWorkspace& ws) {
  const double mid = 0.5 * (a + b);
  const double halfwidth = 0.5 * (b - a);
  const Eigen::Index n = rule.nodes.size();
  const Eigen::Index num_arms = means.size();
  ws.x = mid + halfwidth * rule.nodes;
  ws.w = halfwidth * rule.weights;
  ws.cdf.resize(n, num_arms);
  ws.pdf.resize(n, num_arms);
  for (Eigen::Index j = 0; j < num_arms; ++j) {
    const Eigen::ArrayXd z = (ws.x - means[j]) / stddevs[j];
    ws.cdf.col(j) = z.unaryExpr([](double v) { return 0.5 * std::erfc(-v * kInvSqrt2); });
    ws.pdf.col(j) = (-0.5 * z.square()).exp() * (kInvSqrt2Pi / stddevs[j]);
  }
  ws.prefix.resize(n, num_arms + 1);
  ws.suffix.resize(n, num_arms + 1);
  ws.prefix.col(0).setOnes();
  ws.suffix.col(num_arms).setOnes();
  for (Eigen::Index j = 0; j < num_arms; ++j) {
    ws.prefix.col(j + 1) = ws.prefix.col(j) * ws.cdf.col(j);
    ws.suffix.col(num_arms - 1 - j) = ws.suffix.col(num_arms - j) * ws.cdf.col(num_arms - 1 - j);
  }
  Eigen::ArrayXd contrib(num_arms);
  for (Eigen::Index i = 0; i < num_arms; ++i) {
    contrib[i] = (ws.w * ws.pdf.col(i) * ws.prefix.col(i) * ws.suffix.col(i + 1)).sum();
  }
  return contrib;
}

// Absolute per-panel acceptance threshold. Leaf counts stay small (tens), so
// the summed quadrature error lands far below the 1e-8 agreement targets.
constexpr double kPanelTol = 1e-13;

struct PanelRules {
  const GaussLegendreRule& coarse;
  const GaussLegendreRule& fine;
};

void integrate_panel(double a, double b, double span, int depth, const PanelRules& rules,
                     const Eigen::ArrayXd& means, const Eigen::ArrayXd& stddevs,
                     PanelWorkspace& ws, Eigen::ArrayXd& total) {
  const Eigen::ArrayXd coarse = panel_contribution(a, b, rules.coarse, means, stddevs, ws);
  const Eigen::ArrayXd fine = panel_contribution(a, b, rules.fine, means, stddevs, ws);
  const double err = (fine - coarse).abs().maxCoeff();
  if (err <= kPanelTol || depth >= 24 || (b - a) <= 1e-12 * span) {
    total += fine;
    return;
  }
  const double mid = 0.5 * (a + b);
  integrate_panel(a, mid, span, depth + 1, rules, means, stddevs, ws, total);
  integrate_panel(mid, b, span, depth + 1, rules, means, stddevs, ws, total);
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int order) {
  if (order < 1) throw UsageError("gauss_legendre order must be positive");
  static std::mutex mutex;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make_gauss_legendre(order)).first;
  return it->second;
}

double argmax_probability_two(const GaussianBelief& first, const GaussianBelief& second) {
  if (!(first.variance > 0.0) || !(second.variance > 0.0)) {
    throw UsageError("belief variances must be positive");
  }
  return std_normal_cdf((first.mean - second.mean) /
                        std::sqrt(first.variance + second.variance));
}

Eigen::ArrayXd argmax_probabilities(std::span<const GaussianBelief> beliefs) {
  const Eigen::Index num_arms = static_cast<Eigen::Index>(beliefs.size());
  if (num_arms < 2) throw UsageError("argmax_probabilities needs at least 2 beliefs");
  for (const auto& b : beliefs) {
    if (!std::isfinite(b.mean) || !(b.variance > 0.0) || !std::isfinite(b.variance)) {
      throw UsageError("beliefs require finite means and positive variances");
    }
  }

  // Canonical arm order makes the result exactly permutation-equivariant:
  // the quadrature always sees the beliefs sorted by (mean, variance).
  std::vector<Eigen::Index> order(num_arms);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (beliefs[a].mean != beliefs[b].mean) return beliefs[a].mean < beliefs[b].mean;
    return beliefs[a].variance < beliefs[b].variance;
  });
  Eigen::ArrayXd means(num_arms), stddevs(num_arms);
  for (Eigen::Index k = 0; k < num_arms; ++k) {
    means[k] = beliefs[order[k]].mean;
    stddevs[k] = beliefs[order[k]].stddev();
  }

  const double lo = (means - kBandSigmas * stddevs).minCoeff();
  const double hi = (means + kBandSigmas * stddevs).maxCoeff();
  const double span = hi - lo;

  // Panel seeds: a uniform base grid, plus the mean and band edges of every
  // belief too narrow for the base grid to resolve. Adaptive bisection below
  // catches anything the seeding misses.
  constexpr int kBasePanels = 8;
  std::vector<double> cuts;
  cuts.reserve(2 * kBasePanels + 3 * static_cast<std::size_t>(num_arms));
  for (int k = 0; k <= kBasePanels; ++k) {
    cuts.push_back(lo + span * static_cast<double>(k) / kBasePanels);
  }
  for (Eigen::Index j = 0; j < num_arms; ++j) {
    if (stddevs[j] * 16.0 < span) {
      cuts.push_back(means[j] - kBandSigmas * stddevs[j]);
      cuts.push_back(means[j]);
      cuts.push_back(means[j] + kBandSigmas * stddevs[j]);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double a, double b) { return b - a < 1e-12 * span; }),
             cuts.end());
  cuts.front() = lo;
  cuts.back() = hi;

  Eigen::ArrayXd sorted_q = Eigen::ArrayXd::Zero(num_arms);
  PanelWorkspace ws;
  const PanelRules rules{gauss_legendre(24), gauss_legendre(48)};
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] <= cuts[k]) continue;
    integrate_panel(cuts[k], cuts[k + 1], span, 0, rules, means, stddevs, ws, sorted_q);
  }

  Eigen::ArrayXd q(num_arms);
  for (Eigen::Index k = 0; k < num_arms; ++k) {
    q[order[k]] = std::clamp(sorted_q[k], 0.0, 1.0);
  }
  return q;
}

Eigen::ArrayXd argmax_probabilities_mc(std::span<const GaussianBelief> beliefs,
                                       std::int64_t samples, RandomStream& rng) {
  const Eigen::Index num_arms = static_cast<Eigen::Index>(beliefs.size());
  if (num_arms < 1) throw UsageError("argmax_probabilities_mc needs at least 1 belief");
  if (samples < 1) throw UsageError("argmax_probabilities_mc needs samples >= 1");
  Eigen::ArrayXd stddevs(num_arms);
  for (Eigen::Index j = 0; j < num_arms; ++j) stddevs[j] = beliefs[j].stddev();
  std::vector<std::int64_t> wins(static_cast<std::size_t>(num_arms), 0);
  for (std::int64_t s = 0; s < samples; ++s) {
    Eigen::Index best = 0;
    double best_value = beliefs[0].mean + stddevs[0] * rng.normal();
    for (Eigen::Index j = 1; j < num_arms; ++j) {
      const double value = beliefs[j].mean + stddevs[j] * rng.normal();
      if (value > best_value) {  // strict: ties stay with the lowest index
        best_value = value;
        best = j;
      }
    }
    ++wins[static_cast<std::size_t>(best)];
  }
  Eigen::ArrayXd freq(num_arms);
  for (Eigen::Index j = 0; j < num_arms; ++j) {
    freq[j] = static_cast<double>(wins[static_cast<std::size_t>(j)]) /
              static_cast<double>(samples);
  }
  return freq;
}

}  // namespace batchts
