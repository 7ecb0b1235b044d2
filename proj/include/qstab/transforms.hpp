#pragma once

#include <string_view>
#include <vector>

#include "qstab/state.hpp"

namespace qstab {

// Coordinate-wise compressive bijections applied to observations before the
// policy/critic see them. Costs always use the raw state.
enum class TransformKind { identity, symsqrt, symloge, symsigmoid };

// Config labels: id, ss, sl, sig.
TransformKind transform_from_label(std::string_view label);
std::string_view transform_label(TransformKind kind);

// symsqrt(x)  = sign(x)(sqrt(|x|+1) - 1)
// symloge(x)  = sign(x) ln(|x|+1)
// symsigmoid(x) = sign(x) / (1 + e^-|x|)      (value 0 at x = 0)
// Throws ContractError on non-finite input.
double apply_transform(TransformKind kind, double x);

// Inverse of the forward map. Throws ContractError outside the range
// (|y| >= 1 for symsigmoid) or on non-finite input.
double inverse_transform(TransformKind kind, double y);

// Every coordinate (queues then flags) transformed independently.
std::vector<double> transform_state(TransformKind kind, const State& s);
void transform_state(TransformKind kind, const State& s,
                     std::vector<double>& out);

}  // namespace qstab
