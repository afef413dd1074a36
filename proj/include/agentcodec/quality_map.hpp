#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "agentcodec/errors.hpp"

namespace agentcodec {

/// A named one-dimensional map on [0,1], used both as the synthetic
/// channel's refinement dynamics and as the object of the fixed-point
/// threshold analysis.
///
/// Families:
///   identity            f(q) = q
///   power (p)           f(q) = q^p
///   linear (a, b)       f(q) = clamp(a*q + b)
///   logistic (k, x0)    f(q) = 1 / (1 + exp(-k (q - x0)))
///   toward (target, r)  f(q) = q + r * (target - q)
struct QualityMap {
  std::string kind = "identity";
  std::vector<double> parameters;

  static QualityMap identity() { return {"identity", {}}; }
  static QualityMap power(double p) { return {"power", {p}}; }
  static QualityMap linear(double a, double b) { return {"linear", {a, b}}; }
  static QualityMap logistic(double k, double x0) { return {"logistic", {k, x0}}; }
  static QualityMap toward(double target, double rate) { return {"toward", {target, rate}}; }

  double operator()(double q) const { return eval(q); }

  double eval(double q) const {
    q = clamp01(q);
    if (kind == "identity") return q;
    if (kind == "power") {
      require(1);
      return std::pow(q, parameters[0]);
    }
    if (kind == "linear") {
      require(2);
      return clamp01(parameters[0] * q + parameters[1]);
    }
    if (kind == "logistic") {
      require(2);
      return 1.0 / (1.0 + std::exp(-parameters[0] * (q - parameters[1])));
    }
    if (kind == "toward") {
      require(2);
      return clamp01(q + parameters[1] * (parameters[0] - q));
    }
    throw ValidationError("unknown quality map kind: " + kind);
  }

  /// Central-difference derivative, diagnostics only.
  double derivative(double q, double step = 1e-5) const {
    return (eval(q + step) - eval(q - step)) / (2.0 * step);
  }

  static double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

 private:
  void require(std::size_t n) const {
    if (parameters.size() < n)
      throw ValidationError("quality map '" + kind + "' needs " + std::to_string(n) +
                            " parameters");
  }
};

/// Parses "power:0.5", "linear:0.9,0.05", "identity", ...
QualityMap parse_quality_map(const std::string& text);

}  // namespace agentcodec
