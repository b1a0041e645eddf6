/**
 * @file integrate.hpp
 * @brief Adaptive integration of S and its charts with event location.
 *
 * S is only Hoelder continuous on the axis Y = 0. Inside the thin band
 * |Y| <= band_rel |y|^{p-1} the integrator switches to u = sign(Y)|Y|^{1/(p-1)}
 * as independent variable, where y, tau and the divergence integral are
 * smooth, and records a Y_zero_crossing at u = 0.
 */
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plap/dopri5.hpp"
#include "plap/params.hpp"
#include "plap/systems.hpp"

namespace plap {

struct IntegrationConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double max_time_span = 200.0;
  long max_steps = 1'000'000;
  double band_rel = 1e-6;
  double capture_rel = 1e-6;
  /// S integration stops as escape when max(|y|, |Y|) grows past this.
  double escape_bound = 1e12;
  /// Include the divergence integral in the error norm.
  bool track_divergence = false;
};

enum class Direction : int { forward = 1, backward = -1 };

enum class EventKind {
  y_zero_crossing,
  Y_zero_crossing,
  section_crossing,
  stationary_capture,
  escape_to_infinity,
  double_zero_capture,
};
[[nodiscard]] std::string_view to_string(EventKind kind);

struct Event {
  EventKind kind = EventKind::y_zero_crossing;
  double tau = 0.0;
  double y = 0.0;
  double Y = 0.0;
  int tag = -1;         ///< section id, or stationary point id for captures
  double aux = 0.0;     ///< divergence integral at the event
  Vec2 chart_x{};       ///< chart coordinates for sections of non-S charts
  double time = 0.0;    ///< chart time (nu for R charts)
};

/// Section a x0 + b x1 = c in the coordinates of the integrated chart.
/// orientation: +1 counts crossings where the value increases with tau,
/// -1 where it decreases, 0 both. `accept` can restrict to a half-line.
struct SectionSpec {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  int orientation = 0;
  bool terminal = false;
  int terminal_count = 1;
  int tag = 0;
  std::function<bool(const Vec2&)> accept;
};

struct EventSpecs {
  std::vector<SectionSpec> sections;
  bool capture = true;
};

enum class Termination {
  time_limit,
  stationary_capture,
  double_zero,
  escape,
  section,
  max_steps,
  step_underflow,
  non_finite,
  chart_exit,
  origin_unmatched,
};
[[nodiscard]] std::string_view to_string(Termination t);

/// Ids used in capture events.
enum StationaryId : int { kOrigin = 0, kMell = 1, kMinusMell = 2 };

enum class AsymptoticLabel {
  A_r,
  A_alpha,
  A_gamma,
  L_eta,
  L_plus,
  L_minus,
  M_ell,
  minus_M_ell,
  origin,
  cycle,
  oscillating_sign,
  escape,
  unresolved,
};
[[nodiscard]] std::string_view to_string(AsymptoticLabel label);

/// Continuous extension of one step. Kinds:
///   S:     (y, Y, I) against tau
///   band:  (y, tau, I) against u = sign(Y)|Y|^{1/(p-1)}
///   chart: (x0, x1, tau) against tau (Q, P) or nu (R, R_beta)
struct DenseSegment {
  enum class Kind { S, band, chart } kind = Kind::S;
  Chart chart = Chart::S;
  int sign = 1;
  double tau_lo = 0.0;
  double tau_hi = 0.0;
  detail::Dp5Dense<3> dense;
};

struct Trajectory {
  ProblemParams params;
  Chart chart = Chart::S;
  int direction = 1;
  std::vector<PhaseState> samples;       ///< increasing tau
  std::vector<ChartState> chart_samples; ///< increasing tau, non-S charts only
  std::vector<DenseSegment> segments;    ///< increasing tau
  std::vector<Event> events;             ///< increasing tau
  Termination termination = Termination::time_limit;
  std::string diagnostic;
  bool origin_pass = false;       ///< came close to (0, 0) off the known cones
  bool extended_by_zero = false;  ///< ended in a double zero and may be continued by 0
  std::optional<AsymptoticLabel> label_start;
  std::optional<AsymptoticLabel> label_end;

  [[nodiscard]] bool empty() const { return samples.empty(); }
  [[nodiscard]] double tau_min() const { return samples.front().tau; }
  [[nodiscard]] double tau_max() const { return samples.back().tau; }
  /// Sample where the construction ended (last in construction order).
  [[nodiscard]] const PhaseState& terminal() const {
    return direction > 0 ? samples.back() : samples.front();
  }
  /// Dense evaluation; nullopt outside the covered range.
  [[nodiscard]] std::optional<PhaseState> state_at(double tau) const;
  [[nodiscard]] std::vector<Event> events_of(EventKind kind) const;
};

/// Integrates from `initial` (any chart) in the given direction of the
/// chart's time. Phase samples are reported in S coordinates.
[[nodiscard]] Trajectory integrate(const ProblemParams& params, const ChartState& initial,
                                   Direction dir, const IntegrationConfig& config = {},
                                   const EventSpecs& events = {});

/// Convenience for S.
[[nodiscard]] Trajectory integrate(const ProblemParams& params, const PhaseState& initial,
                                   Direction dir, const IntegrationConfig& config = {},
                                   const EventSpecs& events = {});

struct CaptureResult {
  bool captured = false;
  int id = -1;               ///< StationaryId
  bool double_zero = false;  ///< reached (0, 0) along the double-zero cone
  bool unmatched = false;    ///< near (0, 0) but on neither known cone
};

/// Capture test at S-state (y, Y) for integration direction `dir`.
[[nodiscard]] CaptureResult capture_test(double y, double Y, const ProblemParams& params,
                                         Direction dir, const IntegrationConfig& config = {});

/// Appends `tail` (which must start where `head` ends in tau) to `head`.
void append(Trajectory& head, const Trajectory& tail);

}  // namespace plap
