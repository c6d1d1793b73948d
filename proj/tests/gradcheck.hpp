#pragma once

// Central finite-difference oracle for the tagger loss.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "somd/tagger.hpp"

namespace somd::testing {

struct GradInstance {
  ModelParams params;
  std::vector<Example> batch;
  std::vector<double> weights;
};

// At most 50 distinct features, 2-6 classes, some IGNORE targets.
inline GradInstance random_grad_instance(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.5, 5.0);
  const std::size_t k = 2 + rng() % 5;
  std::vector<std::string> classes;
  for (std::size_t c = 0; c < k; ++c) classes.push_back("c" + std::to_string(c));
  GradInstance g{ModelParams(classes), {}, {}};

  const std::size_t pool_size = 5 + rng() % 46;
  std::vector<std::uint32_t> pool;
  for (std::size_t i = 0; i < pool_size; ++i) pool.push_back(static_cast<std::uint32_t>(rng() & kFeatureMask));
  for (std::uint32_t id : pool) {
    double* row = g.params.weights.get_or_create(id);
    for (std::size_t c = 0; c < k; ++c) row[c] = normal(rng);
  }
  for (double& b : g.params.bias) b = normal(rng);

  const std::size_t n = 1 + rng() % 8;
  for (std::size_t i = 0; i < n; ++i) {
    Example ex;
    const std::size_t nf = 1 + rng() % 6;
    for (std::size_t f = 0; f < nf; ++f) ex.features.ids.push_back(pool[rng() % pool.size()]);
    std::sort(ex.features.ids.begin(), ex.features.ids.end());
    ex.features.ids.erase(std::unique(ex.features.ids.begin(), ex.features.ids.end()), ex.features.ids.end());
    if (i == 0 || rng() % 4 != 0) ex.target = rng() % k;
    g.batch.push_back(std::move(ex));
  }
  if (rng() % 3 != 0)
    for (std::size_t c = 0; c < k; ++c) g.weights.push_back(weight(rng));
  return g;
}

struct GradCheck {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst = 0.0;
};

// Compares every weight and bias coordinate against (L(p+h) - L(p-h)) / 2h.
inline GradCheck check_gradient(const GradInstance& g, double step = 1e-5, double tol = 1e-4) {
  GradCheck out;
  const LossAndGradient analytic = loss_and_gradient(g.params, g.batch, g.weights);
  const std::size_t k = g.params.num_classes();

  auto compare = [&](double a, auto&& perturb) {
    ModelParams plus = g.params, minus = g.params;
    perturb(plus, step);
    perturb(minus, -step);
    const double numeric = (loss_and_gradient(plus, g.batch, g.weights).loss -
                            loss_and_gradient(minus, g.batch, g.weights).loss) /
                           (2 * step);
    if (std::abs(a) <= 1e-8 && std::abs(numeric) <= 1e-8) return;
    const double rel = std::abs(a - numeric) / std::max(std::abs(a), std::abs(numeric));
    ++out.checked;
    out.worst = std::max(out.worst, rel);
    if (rel > tol) ++out.failures;
  };

  for (std::uint32_t id : g.params.weights.sorted_ids()) {
    const double* grow = analytic.gradient.weights.find(id);
    for (std::size_t c = 0; c < k; ++c)
      compare(grow ? grow[c] : 0.0, [&](ModelParams& p, double d) { p.weights.find(id)[c] += d; });
  }
  for (std::size_t c = 0; c < k; ++c)
    compare(analytic.gradient.bias[c], [&](ModelParams& p, double d) { p.bias[c] += d; });
  return out;
}

}  // namespace somd::testing
