#include "qstab/shaping.hpp"

#include <cmath>

#include "qstab/errors.hpp"

namespace qstab {

CostVariant cost_variant_from_label(std::string_view label) {
  if (label == "identity") return CostVariant::identity;
  if (label == "reciprocal") return CostVariant::reciprocal;
  if (label == "exp_next") return CostVariant::exp_next;
  if (label == "exp_current")
    throw ConfigError(
        "cost_variant exp_current is not implemented (its state-plus-action "
        "argument is ambiguous); use exp_next");
  throw ConfigError("unknown cost_variant: " + std::string(label) +
                    " (expected identity|reciprocal|exp_next)");
}

std::string_view cost_variant_label(CostVariant v) {
  switch (v) {
    case CostVariant::identity: return "identity";
    case CostVariant::reciprocal: return "reciprocal";
    case CostVariant::exp_next: return "exp_next";
  }
  return "?";
}

double lyapunov_value(const State& s, double p) {
  if (!(p > 0.0)) throw ContractError("lyapunov_value: p must be positive");
  double sum = 0.0;
  if (p == 1.0) {
    for (int q : s.queues) sum += q;
  } else if (p == 2.0) {
    for (int q : s.queues) sum += static_cast<double>(q) * q;
  } else {
    for (int q : s.queues) sum += std::pow(static_cast<double>(q), p);
  }
  return sum;
}

double optimality_cost_variant(double c, const State& next, CostVariant v) {
  switch (v) {
    case CostVariant::identity:
      return c;
    case CostVariant::reciprocal:
      return -1.0 / (c + 1.0);
    case CostVariant::exp_next: {
      double sq = 0.0;
      for (int q : next.queues) sq += static_cast<double>(q) * q;
      return -std::exp(-sq);
    }
  }
  throw ConfigError("optimality_cost_variant: unknown variant");
}

double shaped_cost(const State& s, const State& next, double c,
                   const ShapingSpec& spec) {
  double v = optimality_cost_variant(c, next, spec.variant);
  if (spec.enabled)
    v += lyapunov_value(next, spec.lyapunov_p) -
         lyapunov_value(s, spec.lyapunov_p);
  return v;
}

double telescoped_shaped_sum(std::span<const TransitionRecord> trajectory,
                             const ShapingSpec& spec) {
  double sum = 0.0;
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    if (t > 0 && !(trajectory[t - 1].next == trajectory[t].s))
      throw ContractError("telescoped_shaped_sum: trajectory not consecutive");
    sum += shaped_cost(trajectory[t].s, trajectory[t].next,
                       trajectory[t].true_cost, spec);
  }
  return sum;
}

std::string shaping_advice(const ShapingSpec& spec) {
  if (spec.enabled && spec.lyapunov_p == 1.0 &&
      spec.variant == CostVariant::identity)
    return "lyapunov_p = 1 with the identity cost: the drift term is bounded "
           "in [-1, 1] and an unbounded cost can dilute it; consider "
           "cost_variant = reciprocal";
  return {};
}

}  // namespace qstab
