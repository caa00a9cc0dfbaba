#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace tempograph {

struct NelderMeadOptions {
  int max_iterations = 2000;
  double f_tolerance = 1e-12;
  double initial_step = 0.1;
};

template <typename Scalar>
struct NelderMeadResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar value;
  int iterations;
};

/// Downhill simplex minimisation of `f` starting at `x0` (standard
/// reflection / expansion / contraction / shrink coefficients 1, 2, 0.5, 0.5).
template <typename Scalar, typename F>
NelderMeadResult<Scalar> nelder_mead(F&& f, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x0,
                                     const NelderMeadOptions& opt = {}) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = x0.size();
  std::vector<Vec> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<Scalar> values(static_cast<std::size_t>(n + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& v = simplex[static_cast<std::size_t>(i + 1)];
    v[i] += x0[i] != Scalar(0) ? Scalar(opt.initial_step) * std::abs(x0[i]) : Scalar(opt.initial_step);
  }
  for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = f(simplex[i]);

  std::vector<std::size_t> order(simplex.size());
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    if (std::abs(values[worst] - values[best]) <= Scalar(opt.f_tolerance) * (std::abs(values[best]) + Scalar(1e-30))) {
      break;
    }

    Vec centroid = Vec::Zero(n);
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<Scalar>(n);

    const Vec reflected = centroid + (centroid - simplex[worst]);
    const Scalar fr = f(reflected);
    if (fr < values[best]) {
      const Vec expanded = centroid + Scalar(2) * (centroid - simplex[worst]);
      const Scalar fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Vec contracted = outside ? Vec(centroid + Scalar(0.5) * (reflected - centroid))
                                   : Vec(centroid + Scalar(0.5) * (simplex[worst] - centroid));
    const Scalar fc = f(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + Scalar(0.5) * (simplex[i] - simplex[best]);
      values[i] = f(simplex[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], values[best], it};
}

}  // namespace tempograph
