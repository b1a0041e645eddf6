/**
 * @file oracles.hpp
 * @brief Closed-form profile families used as ground truth.
 */
#pragma once

#include <optional>
#include <string_view>

#include "plap/params.hpp"
#include "plap/systems.hpp"

namespace plap {

enum class OracleKind { U_flat, barenblatt, p_harmonic, quadratic, alpha_zero, n1_special };

[[nodiscard]] std::string_view to_string(OracleKind kind);

/// `alpha` is read only by U_flat; every other family fixes alpha itself.
/// `sign` multiplies U_flat and selects the sign of w' for alpha_zero.
struct OracleSpec {
  OracleKind kind = OracleKind::barenblatt;
  int N = 1;
  double p = 3.0;
  int eps = 1;
  double K = 1.0;
  double alpha = 0.0;
  int sign = 1;
};

class Oracle {
 public:
  /// Throws ParamError when the family does not exist for the given data.
  explicit Oracle(const OracleSpec& spec);

  [[nodiscard]] const OracleSpec& spec() const { return spec_; }
  [[nodiscard]] double alpha() const { return params_.alpha; }
  /// Parameters of the family. alpha may be 0 for alpha_zero, so they are
  /// not passed through validate().
  [[nodiscard]] const ProblemParams& params() const { return params_; }

  [[nodiscard]] ProfileSample sample(double r) const;
  [[nodiscard]] PhaseState phase(double r) const { return from_profile(sample(r), params_); }

  /// Radius where the profile meets zero with vanishing slope: the edge of
  /// the support when eps = 1, of the hole when eps = -1.
  [[nodiscard]] std::optional<double> edge() const { return edge_; }

 private:
  [[nodiscard]] double dw_alpha_zero(double r) const;

  OracleSpec spec_;
  ProblemParams params_;
  std::optional<double> edge_;
};

}  // namespace plap
