/**
 * @file params.hpp
 * @brief Problem parameters and the constants derived from them.
 */
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace plap {

/// Raised when (N, p, alpha, eps) violate the admissible parameter set.
class ParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ProblemParams {
  int N = 1;
  double p = 3.0;
  double alpha = 1.0;
  int eps = 1;
};

/// Throws ParamError when N < 1, p <= 2, alpha == 0, eps not in {-1, 1}, or a
/// value is not finite.
void validate(const ProblemParams& params);

struct DerivedConstants {
  double gamma = 0.0;
  double eta = 0.0;
  double p_prime = 0.0;
  double beta = 0.0;
  double alpha_star = 0.0;
  double alpha_p = 0.0;
  double alpha_1 = 0.0;
  std::optional<double> alpha_2;
  std::optional<double> ell;            // only when eps * (alpha + gamma) < 0
  std::optional<double> nu_alpha;       // only when alpha != -gamma
  std::optional<double> discriminant;   // of the linearization at M_ell
  double C_U = 0.0;
};

[[nodiscard]] DerivedConstants derive_constants(const ProblemParams& params);

/// Same without the alpha != 0 check, for the closed-form alpha = 0 family.
[[nodiscard]] DerivedConstants derive_constants_unchecked(const ProblemParams& params);

/// Constants that depend only on (N, p); used by closed-form families that
/// admit alpha = 0.
[[nodiscard]] double gamma_of(double p);
[[nodiscard]] double eta_of(int N, double p);

[[nodiscard]] std::string describe(const ProblemParams& params);

}  // namespace plap
