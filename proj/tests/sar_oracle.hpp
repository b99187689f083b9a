#pragma once

// Straight-line re-implementation of the re-weighting formulas on raw
// vectors. Deliberately shares no code with the library so it can serve as an
// independent check.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct Result {
  std::vector<double> sigma, tau, scores, weights;
  double gamma = 0.0;
  double subject = 0.0;
};

// x: rows of the latent; styles: pooled style vectors.
inline Result sar(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& styles,
                  double kappa, double gamma_min, double gamma_max, double delta, double subject_fraction) {
  const std::size_t hw = x.size();
  const std::size_t c = x[0].size();
  const std::size_t n = styles.size();

  auto cos = [](const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      ab += a[k] * b[k];
      aa += a[k] * a[k];
      bb += b[k] * b[k];
    }
    if (aa == 0 || bb == 0) return 0.0;
    double v = ab / (std::sqrt(aa) * std::sqrt(bb));
    return v > 1 ? 1.0 : (v < -1 ? -1.0 : v);
  };

  std::vector<double> mean(c, 0.0);
  for (const auto& row : x)
    for (std::size_t k = 0; k < c; ++k) mean[k] += row[k] / static_cast<double>(hw);

  Result r;
  for (const auto& s : styles) {
    r.sigma.push_back(cos(mean, s));
    double t = 0;
    for (const auto& row : x) t += cos(row, s);
    r.tau.push_back(t / static_cast<double>(hw));
  }

  double ds = 0, dt = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      ds = std::max(ds, std::fabs(r.sigma[a] - r.sigma[b]));
      dt = std::max(dt, std::fabs(r.tau[a] - r.tau[b]));
    }
  double g = n < 2 ? gamma_min : 1.0 + kappa * ds + dt;
  g = g < gamma_min ? gamma_min : (g > gamma_max ? gamma_max : g);
  r.gamma = g;

  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double sn = 0;
    for (double v : styles[i]) sn += v * v;
    sn = std::sqrt(sn);
    r.scores.push_back((1 + r.sigma[i]) * (1 + r.tau[i]) / (1 + std::pow(sn, g)));
    total += r.scores.back();
  }
  double wsum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r.weights.push_back(r.scores[i] / (total + delta));
    wsum += r.weights.back();
  }
  r.subject = subject_fraction;
  for (auto& w : r.weights) w = wsum > 0 ? (1 - subject_fraction) * w / wsum : (1 - subject_fraction) / n;
  return r;
}

}  // namespace oracle
