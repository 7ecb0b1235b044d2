#pragma once

#include <span>
#include <string>
#include <string_view>

#include "qstab/state.hpp"

namespace qstab {

// What to do with the raw optimality cost before adding the energy drift.
//   identity    c
//   reciprocal  -1/(c+1)
//   exp_next    -exp(-||next queues||_2^2)
enum class CostVariant { identity, reciprocal, exp_next };

CostVariant cost_variant_from_label(std::string_view label);
std::string_view cost_variant_label(CostVariant v);

struct ShapingSpec {
  double lyapunov_p = 2.0;  // energy exponent, > 0
  CostVariant variant = CostVariant::identity;
  bool enabled = true;      // when false the shaped cost is just variant(c)
};

// Energy of a state: sum_i queues[i]^p. Connectivity flags carry no energy.
double lyapunov_value(const State& s, double p);

double optimality_cost_variant(double c, const State& next, CostVariant v);

// variant(c) + [energy(next) - energy(s)] when enabled.
double shaped_cost(const State& s, const State& next, double c,
                   const ShapingSpec& spec);

struct TransitionRecord {
  State s;
  double true_cost = 0.0;
  State next;
};

// Sum of shaped costs over a consecutive trajectory. Each record's next state
// must equal the following record's state (ContractError otherwise). The
// result equals sum_t variant(c_t) + energy(s_end) - energy(s_start) exactly,
// up to float roundoff; tests hold this to 1e-9 relative.
double telescoped_shaped_sum(std::span<const TransitionRecord> trajectory,
                             const ShapingSpec& spec);

// Non-empty when a spec combination is known to train poorly: with p = 1 the
// drift lives in [-1, 1] and an unbounded identity cost drowns it, so the
// reciprocal variant is recommended. Never applied automatically.
std::string shaping_advice(const ShapingSpec& spec);

}  // namespace qstab
