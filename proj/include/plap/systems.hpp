/**
 * @file systems.hpp
 * @brief The autonomous planar system S, its companion charts Q, P, R, R_beta,
 *        coordinate changes and the first integrals of the profile equation.
 *
 * A profile w(r) of
 *   (|w'|^{p-2} w')' + (N-1)/r |w'|^{p-2} w' + eps (r w' + alpha w) = 0
 * is encoded with tau = ln r as
 *   y = r^{-gamma} w,   Y = -r^{(1-gamma)(p-1)} |w'|^{p-2} w'.
 */
#pragma once

#include <array>
#include <stdexcept>
#include <string_view>

#include "plap/params.hpp"

namespace plap {

/// Raised when a chart or field is evaluated outside its domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Chart { S, Q, P, R, R_beta };

[[nodiscard]] std::string_view to_string(Chart chart);

using Vec2 = std::array<double, 2>;

struct PhaseState {
  double tau = 0.0;
  double y = 0.0;
  double Y = 0.0;
};

/// Point of a chart. `time` is tau for S, Q, P and nu for R, R_beta; `tau`
/// always holds the logarithmic radius. Q, P, R identify (y, Y) with
/// (-y, -Y), so `sign` records the sign of y needed to invert.
struct ChartState {
  Chart chart = Chart::S;
  Vec2 x{};
  double time = 0.0;
  double tau = 0.0;
  int sign = 1;
};

struct ProfileSample {
  double r = 0.0;
  double w = 0.0;
  double dw = 0.0;
};

/// sign(x) |x|^e
[[nodiscard]] double signed_pow(double x, double e);

/// The inverse of Y -> |.|^{p-2}. : sign(Y) |Y|^{1/(p-1)}.
[[nodiscard]] double phi_inv(double Y, double p);

/// Vector field of `chart` at `x`, differentiated in the chart's time.
[[nodiscard]] Vec2 field(Chart chart, const Vec2& x, const ProblemParams& params);

/// Same, reusing precomputed constants.
[[nodiscard]] Vec2 field(Chart chart, const Vec2& x, const ProblemParams& params,
                         const DerivedConstants& c);

/// Divergence of the S field, -2 gamma - N - eps |Y|^{(2-p)/(p-1)}/(p-1).
[[nodiscard]] double divergence_S(double Y, const ProblemParams& params,
                                  const DerivedConstants& c);

[[nodiscard]] ChartState convert(const PhaseState& s, Chart target, const ProblemParams& params);
[[nodiscard]] PhaseState to_phase(const ChartState& c, const ProblemParams& params);

[[nodiscard]] ProfileSample to_profile(const PhaseState& s, const ProblemParams& params);
[[nodiscard]] PhaseState from_profile(const ProfileSample& w, const ProblemParams& params);

/// r^N (w + eps r^{-1} |w'|^{p-2} w'); its derivative is r^{N-1} (N - alpha) w.
[[nodiscard]] double J_N(const ProfileSample& w, const ProblemParams& params);
/// Same quantity from phase coordinates: r^{N+gamma} (y - eps Y).
[[nodiscard]] double J_N(const PhaseState& s, const ProblemParams& params);
/// r^{alpha - N} J_N.
[[nodiscard]] double J_alpha(const ProfileSample& w, const ProblemParams& params);

/// |w'|^p / p' + alpha w^2 / 2, non-increasing in r when eps = 1.
[[nodiscard]] double energy(const ProfileSample& w, const ProblemParams& params);

/// Stationary point M_ell = (ell, -(gamma ell)^{p-1}) of S, when it exists.
[[nodiscard]] std::array<double, 2> M_ell(const ProblemParams& params);

}  // namespace plap
