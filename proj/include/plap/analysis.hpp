/**
 * @file analysis.hpp
 * @brief Stationary points, limit cycles, asymptotic labels, zero counts, the
 *        connection function phi(alpha), the critical exponent and regimes.
 */
#pragma once

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/integrate.hpp"
#include "plap/trajectories.hpp"

namespace plap {

/// Raised when a construction cannot produce the requested quantity, for
/// instance a connection gap whose trajectory never reaches the crossing line.
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LocalType { saddle, sink_node, sink_spiral, source_node, source_spiral, weak_source, center_like };
[[nodiscard]] std::string_view to_string(LocalType t);

struct StationaryPointInfo {
  std::string name;  ///< "origin", "M_ell", "minus_M_ell"
  Vec2 location{};
  /// NaN for the origin, where S is not differentiable.
  std::array<std::complex<double>, 2> eigenvalues{};
  LocalType local_type = LocalType::center_like;
  std::optional<std::array<Vec2, 2>> eigenvectors;  ///< real eigenvalues only
  /// |lambda^2 + (2 gamma + N + nu) lambda + p'(N + gamma)| for the Jacobian
  /// eigenvalues, relative to the largest of the three terms.
  double residual = 0.0;
};

/// The origin always; +-M_ell when eps (gamma + alpha) < 0.
[[nodiscard]] std::vector<StationaryPointInfo> classify_stationary_points(const ProblemParams& params);

/// y^2 / 2 + |Y|^{p'} / (p' |alpha|); eventually at most 1 / (|alpha| gamma)
/// when eps = -1 and alpha < 0.
[[nodiscard]] double nmo_radius(const PhaseState& s, const ProblemParams& params);

/// Strict sign changes of y with tau in [tau_lo, tau_hi].
[[nodiscard]] int count_sign_changes(const Trajectory& tr, double tau_lo, double tau_hi);
[[nodiscard]] int count_sign_changes(const Trajectory& tr);

/// Sign changes of y on the orbit through `seed`, integrated `span` units of
/// tau in both directions.
[[nodiscard]] int count_orbit_zeros(const ProblemParams& params, const PhaseState& seed, double span,
                                    const IntegrationConfig& config = {});

enum class CycleStability { attracting, repelling, undetermined };
[[nodiscard]] std::string_view to_string(CycleStability s);

struct CycleInfo {
  /// Section: the ray {y = section_y} restricted to Y beyond the anchor
  /// (positive Y axis around the origin, Y < -(gamma ell)^{p-1} around M_ell).
  bool around_origin = true;
  double section_y = 0.0;
  double fixed_point = 0.0;  ///< Y on the section
  double return_gap = 0.0;   ///< |P(x*) - x*| after refinement
  double period_tau = 0.0;
  CycleStability stability = CycleStability::undetermined;
  /// Mean divergence over one period in forward tau.
  double floquet_mean = 0.0;
  std::vector<PhaseState> orbit;
  int crossings_used = 0;
  /// Trajectory the cycle was found on; set by classify_regime.
  std::string source;
};

/// Symmetric Hausdorff distance between two sampled orbits in the (y, Y)
/// plane, each sample measured against the other orbit's polyline.
[[nodiscard]] double hausdorff_distance(const std::vector<PhaseState>& a, const std::vector<PhaseState>& b);

struct CycleConfig {
  int min_crossings = 10;
  double gap_tol = 1e-8;
  int max_secant = 40;
  /// Tolerances for the return-map evaluations.
  double rel_tol = 1e-12;
  double abs_tol = 1e-15;
};

/// Limit cycle approached by the construction end of `tr`, refined by a
/// secant iteration on the return map.
[[nodiscard]] std::optional<CycleInfo> detect_limit_cycle(const Trajectory& tr, const ProblemParams& params,
                                                          const CycleConfig& config = {});

/// Label of the tau -> +infinity end (end = 1) or tau -> -infinity end (end = -1).
/// AsymptoticLabel::unresolved when no detector fires.
[[nodiscard]] AsymptoticLabel asymptotic_label(const Trajectory& tr, int end = 1);

struct PhiConfig {
  double delta = 1e-7;
  /// tau budget for each leg; the crossing comes a few units after launch.
  double tau_span = 30.0;
  long max_steps = 20'000;
};

struct PhiValue {
  double phi = 0.0;
  double S0 = 0.0;  ///< T_eps on L
  double S1 = 0.0;  ///< T_alpha on L
  PhaseState at0;
  PhaseState at1;
};

/// phi(alpha) = S0 - S1 on the line g = 1 / gamma of the R_beta chart, for
/// eps = -1. Requires -gamma < alpha < 0. Throws AnalysisError if a leg does
/// not reach the line.
[[nodiscard]] PhiValue phi_detail(int N, double p, double alpha, const PhiConfig& config = {});
[[nodiscard]] double phi_of_alpha(int N, double p, double alpha, const PhiConfig& config = {});

struct AlphaCConfig {
  double tol = 1e-4;
  /// For N = 1 the closed form alpha_p is returned unless this is set.
  bool force_bisection = false;
  PhiConfig phi;
};

struct AlphaCResult {
  double value = 0.0;
  double lo = 0.0;  ///< certified bracket: phi(lo) > 0 > phi(hi)
  double hi = 0.0;
  double phi_lo = 0.0;
  double phi_hi = 0.0;
  int evaluations = 0;
  bool closed_form = false;
};

/// Throws AnalysisError carrying both endpoint values when phi has the same
/// sign at the ends of the bracket.
[[nodiscard]] AlphaCResult find_alpha_c(int N, double p, const AlphaCConfig& config = {});

enum class CheckStatus { pass, fail, untested };
[[nodiscard]] std::string_view to_string(CheckStatus s);

struct Check {
  std::string clause;
  std::string source_theorem;
  CheckStatus status = CheckStatus::untested;
  std::string detail;
};

struct TrajectoryDigest {
  SpecialKind kind = SpecialKind::T_r;
  AsymptoticLabel label_start = AsymptoticLabel::unresolved;
  AsymptoticLabel label_end = AsymptoticLabel::unresolved;
  int zero_count = 0;
  Termination termination = Termination::time_limit;
  double tau_min = 0.0;
  double tau_max = 0.0;
};

struct RegimeConfig {
  double tau_budget = 200.0;
  ShootConfig shoot;
  AlphaCConfig alpha_c;
  CycleConfig cycle;
};

struct RegimeReport {
  ProblemParams params;
  DerivedConstants constants;
  std::vector<StationaryPointInfo> stationary_points;
  std::vector<TrajectoryDigest> digests;
  std::vector<CycleInfo> cycles;
  /// Distance between the cycles reached by T_r and T_eps (sou, orb). Whether
  /// they coincide is not decided.
  std::optional<double> cycle_distance;
  std::optional<double> phi_value;
  std::optional<std::array<double, 2>> alpha_c_bracket;
  std::string theorem_tag;
  std::vector<Check> checks;
  std::vector<std::string> notes;
};

/// Governing theorem tag from (eps, alpha) and the constants. alpha_c is only
/// read for eps = -1 and alpha_star < alpha < -p'.
[[nodiscard]] std::string regime_tag(const ProblemParams& params, std::optional<double> alpha_c);

[[nodiscard]] RegimeReport classify_regime(const ProblemParams& params, const RegimeConfig& config = {});

}  // namespace plap
