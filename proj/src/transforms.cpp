#include "qstab/transforms.hpp"

#include <cmath>
#include <string>

#include "qstab/errors.hpp"

namespace qstab {

namespace {
double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace

TransformKind transform_from_label(std::string_view label) {
  if (label == "id") return TransformKind::identity;
  if (label == "ss") return TransformKind::symsqrt;
  if (label == "sl") return TransformKind::symloge;
  if (label == "sig") return TransformKind::symsigmoid;
  throw ConfigError("unknown state_transform label: " + std::string(label) +
                    " (expected id|ss|sl|sig)");
}

std::string_view transform_label(TransformKind kind) {
  switch (kind) {
    case TransformKind::identity: return "id";
    case TransformKind::symsqrt: return "ss";
    case TransformKind::symloge: return "sl";
    case TransformKind::symsigmoid: return "sig";
  }
  return "?";
}

double apply_transform(TransformKind kind, double x) {
  if (!std::isfinite(x)) throw ContractError("apply_transform: non-finite input");
  switch (kind) {
    case TransformKind::identity:
      return x;
    case TransformKind::symsqrt:
      return sign(x) * (std::sqrt(std::abs(x) + 1.0) - 1.0);
    case TransformKind::symloge:
      return sign(x) * std::log1p(std::abs(x));
    case TransformKind::symsigmoid: {
      // 1 - b/(1+b) with b = e^-|x| keeps the result correctly rounded in the
      // saturating tail, where 1/(1+b) would add avoidable ulp noise
      const double b = std::exp(-std::abs(x));
      return sign(x) * (1.0 - b / (1.0 + b));
    }
  }
  return x;
}

double inverse_transform(TransformKind kind, double y) {
  if (!std::isfinite(y)) throw ContractError("inverse_transform: non-finite input");
  switch (kind) {
    case TransformKind::identity:
      return y;
    case TransformKind::symsqrt: {
      const double a = std::abs(y) + 1.0;
      return sign(y) * (a * a - 1.0);
    }
    case TransformKind::symloge:
      return sign(y) * std::expm1(std::abs(y));
    case TransformKind::symsigmoid: {
      if (std::abs(y) >= 1.0)
        throw ContractError("inverse_transform: |y| >= 1 outside symsigmoid range");
      if (y == 0.0) return 0.0;
      const double a = std::abs(y);
      return sign(y) * std::log(a / (1.0 - a));
    }
  }
  return y;
}

void transform_state(TransformKind kind, const State& s,
                     std::vector<double>& out) {
  out.clear();
  out.reserve(s.queues.size() + s.flags.size());
  for (int q : s.queues) out.push_back(apply_transform(kind, q));
  for (int f : s.flags) out.push_back(apply_transform(kind, f));
}

std::vector<double> transform_state(TransformKind kind, const State& s) {
  std::vector<double> out;
  transform_state(kind, s, out);
  return out;
}

}  // namespace qstab
