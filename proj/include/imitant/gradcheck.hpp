#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "imitant/graph.hpp"
#include "imitant/rng.hpp"

namespace imitant {

// Central-difference validation of reverse-mode gradients. The numeric side
// re-evaluates the function on no-grad graphs, so it is independent of every
// backward rule it checks.

using GraphFn = std::function<Var(Graph&, const std::vector<Var>&)>;

namespace detail {

inline double eval_scalar(const GraphFn& f, const std::vector<Tensor>& inputs) {
  Graph g(/*grad_enabled=*/false);
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& t : inputs) vars.push_back(g.constant(t));
  Var out = f(g, vars);
  return out.val().item();
}

}  // namespace detail

// Max over coordinates of |analytic - numeric| / max(1, |numeric|).
// coord_budget < 0 checks every coordinate; otherwise a deterministic random
// subset of that size per input is checked (rng required).
inline double grad_check(const GraphFn& f, const std::vector<Tensor>& inputs, double h,
                         int coord_budget = -1, Rng* rng = nullptr) {
  IMITANT_CHECK(h > 0.0, "grad_check: step must be positive");
  Graph g;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& t : inputs) vars.push_back(g.input(t));
  Var out = f(g, vars);
  IMITANT_CHECK(out.val().numel() == 1, "grad_check: function must be scalar-valued");
  g.backward(out);

  double max_err = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Tensor* analytic = g.has_grad(vars[i]) ? &g.grad(vars[i]) : nullptr;
    std::vector<std::int64_t> coords;
    const std::int64_t n = inputs[i].numel();
    if (coord_budget < 0 || coord_budget >= n) {
      for (std::int64_t c = 0; c < n; ++c) coords.push_back(c);
    } else {
      IMITANT_CHECK(rng != nullptr, "grad_check: sampled mode needs an rng");
      for (int c = 0; c < coord_budget; ++c) {
        coords.push_back(static_cast<std::int64_t>(rng->next_below(static_cast<std::uint64_t>(n))));
      }
    }
    std::vector<Tensor> probe = inputs;
    for (std::int64_t c : coords) {
      const double orig = probe[i].at(c);
      probe[i].at(c) = orig + h;
      const double fp = detail::eval_scalar(f, probe);
      probe[i].at(c) = orig - h;
      const double fm = detail::eval_scalar(f, probe);
      probe[i].at(c) = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic != nullptr ? analytic->at(c) : 0.0;
      IMITANT_CHECK(std::isfinite(a) && std::isfinite(numeric),
                    "grad_check: non-finite gradient at input ", i, " coord ", c);
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

// Same check for a loss over a ParamStore: loss_fn builds the loss on a
// fresh graph each call, leasing whatever parameters it touches.
inline double grad_check_params(const std::function<Var(Graph&)>& loss_fn, ParamStore& params,
                                double h, int coord_budget_per_param = -1, Rng* rng = nullptr) {
  params.zero_grads();
  {
    Graph g;
    Var loss = loss_fn(g);
    g.backward(loss);
    g.collect_param_grads();
  }
  auto eval = [&]() {
    Graph g(/*grad_enabled=*/false);
    return loss_fn(g).val().item();
  };
  double max_err = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = params.at(pi);
    const std::int64_t n = p.value.numel();
    std::vector<std::int64_t> coords;
    if (coord_budget_per_param < 0 || coord_budget_per_param >= n) {
      for (std::int64_t c = 0; c < n; ++c) coords.push_back(c);
    } else {
      IMITANT_CHECK(rng != nullptr, "grad_check_params: sampled mode needs an rng");
      for (int c = 0; c < coord_budget_per_param; ++c) {
        coords.push_back(static_cast<std::int64_t>(rng->next_below(static_cast<std::uint64_t>(n))));
      }
    }
    for (std::int64_t c : coords) {
      const double orig = p.value.at(c);
      p.value.at(c) = orig + h;
      const double fp = eval();
      p.value.at(c) = orig - h;
      const double fm = eval();
      p.value.at(c) = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double analytic = p.grad.at(c);
      IMITANT_CHECK(std::isfinite(analytic) && std::isfinite(numeric),
                    "grad_check_params: non-finite gradient for ", p.name, " coord ", c);
      const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace imitant
