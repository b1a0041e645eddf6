/**
 * @file trajectories.hpp
 * @brief Special trajectories launched from local invariant manifolds.
 *
 * Every shot starts in the chart where its stationary point is hyperbolic or
 * has a computable graph, leaves a small box around it, and hands off to S.
 * The returned trajectory holds S samples on both legs.
 */
#pragma once

#include <optional>
#include <string_view>

#include "plap/integrate.hpp"

namespace plap {

enum class SpecialKind { T_r, T_eps, T_alpha, T_eta, T_u, T_plus, T_minus };

[[nodiscard]] std::string_view to_string(SpecialKind kind);
[[nodiscard]] std::optional<SpecialKind> parse_special_kind(std::string_view name);

struct ShootConfig {
  /// Manifold offset. Center-manifold launches (T_alpha) use 1e3 times this,
  /// since their approach is algebraic rather than exponential.
  double delta = 1e-7;
  IntegrationConfig integration;
  /// Repeat the launch with delta / 2 and report the distance between arcs.
  bool consistency_check = true;
  /// tau-length of the arc compared after the hand-off.
  double consistency_window = 5.0;
};

struct Shot {
  SpecialKind kind = SpecialKind::T_r;
  Trajectory trajectory;
  double delta = 0.0;       ///< offset actually used at the launch point
  double launch_tau = 0.0;  ///< tau at the launch point
  double handoff_tau = 0.0; ///< tau where S takes over
  /// Largest relative distance from the delta / 2 arc to this one.
  std::optional<double> consistency_gap;
};

/// True when the kind names a single orbit for these parameters.
[[nodiscard]] bool is_unique_kind(SpecialKind kind, const ProblemParams& params);

/// T_r normalized so that w(0) = a.
[[nodiscard]] Shot shoot_regular(const ProblemParams& params, const ShootConfig& config = {},
                                 double a = 1.0);

/// T_eps with its double zero at r = r_bar.
[[nodiscard]] Shot shoot_double_zero(const ProblemParams& params, double r_bar = 1.0,
                                     const ShootConfig& config = {});

/// T_alpha, normalized so that r^alpha w -> 1 at the A_alpha end (alpha != -gamma).
[[nodiscard]] Shot shoot_T_alpha(const ProblemParams& params, const ShootConfig& config = {});

/// T_u (p > N) or the canonical member of T_eta (p < N), normalized so that
/// r^eta w -> 1 as r -> 0.
[[nodiscard]] Shot shoot_T_eta_or_u(const ProblemParams& params, const ShootConfig& config = {});

/// T_+ / T_- for p > N: w(0) = a, -r^{(N-1)/(p-1)} w' -> c; the sign of c picks the branch.
/// For p = N, c > 0 plays the role of k in w ~ k |ln r| and a is unused.
[[nodiscard]] Shot shoot_T_pm(const ProblemParams& params, double a, double c,
                              const ShootConfig& config = {});

/// psi on the T_+/- graph at `zeta`, in the frame w(0) = 1 (p > N), or with
/// k = c (p = N). Exposed for checking against direct chart integration.
[[nodiscard]] double t_pm_graph_psi(const ProblemParams& params, double c, double zeta);

/// Dispatch by kind; `a` and `c` are only read by T_r (a) and T_+/- (a, c).
[[nodiscard]] Shot shoot(SpecialKind kind, const ProblemParams& params, const ShootConfig& config = {},
                         double a = 1.0, double c = 1.0);

/// Largest distance from points of `b` with tau in [tau_lo, tau_hi] to the
/// orbit of `a`, each relative to max(1, |point|).
[[nodiscard]] double arc_distance(const Trajectory& a, const Trajectory& b, double tau_lo, double tau_hi);

}  // namespace plap
