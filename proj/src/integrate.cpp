#include "plap/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plap {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::y_zero_crossing: return "y_zero_crossing";
    case EventKind::Y_zero_crossing: return "Y_zero_crossing";
    case EventKind::section_crossing: return "section_crossing";
    case EventKind::stationary_capture: return "stationary_capture";
    case EventKind::escape_to_infinity: return "escape_to_infinity";
    case EventKind::double_zero_capture: return "double_zero_capture";
  }
  return "?";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::time_limit: return "time_limit";
    case Termination::stationary_capture: return "stationary_capture";
    case Termination::double_zero: return "double_zero";
    case Termination::escape: return "escape";
    case Termination::section: return "section";
    case Termination::max_steps: return "max_steps";
    case Termination::step_underflow: return "step_underflow";
    case Termination::non_finite: return "non_finite";
    case Termination::chart_exit: return "chart_exit";
    case Termination::origin_unmatched: return "origin_unmatched";
  }
  return "?";
}

std::string_view to_string(AsymptoticLabel label) {
  switch (label) {
    case AsymptoticLabel::A_r: return "A_r";
    case AsymptoticLabel::A_alpha: return "A_alpha";
    case AsymptoticLabel::A_gamma: return "A_gamma";
    case AsymptoticLabel::L_eta: return "L_eta";
    case AsymptoticLabel::L_plus: return "L_plus";
    case AsymptoticLabel::L_minus: return "L_minus";
    case AsymptoticLabel::M_ell: return "M_ell";
    case AsymptoticLabel::minus_M_ell: return "minus_M_ell";
    case AsymptoticLabel::origin: return "origin";
    case AsymptoticLabel::cycle: return "cycle";
    case AsymptoticLabel::oscillating_sign: return "oscillating_sign";
    case AsymptoticLabel::escape: return "escape";
    case AsymptoticLabel::unresolved: return "unresolved";
  }
  return "?";
}

namespace {

using S3 = detail::State<3>;
using Dense3 = detail::Dp5Dense<3>;

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

/// Bisection for the first sign change of f on [0, 1] given f(a) and f(b) of
/// opposite signs; returns theta to ~1e-13.
template <class F>
double bisect(F&& f, double a, double b, double fa) {
  for (int i = 0; i < 60 && b - a > 1e-14; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (sgn(fm) == sgn(fa) && fm != 0.0) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

constexpr int kScan = 8;

/// First theta in (0, 1] where f changes sign relative to f(0), by scanning
/// kScan sub-intervals then bisecting. Returns nullopt when no change is seen.
template <class F>
std::optional<double> first_root(F&& f) {
  double a = 0.0;
  double fa = f(0.0);
  for (int k = 1; k <= kScan; ++k) {
    const double b = static_cast<double>(k) / kScan;
    const double fb = f(b);
    if (fa == 0.0) return a;
    if (sgn(fb) != sgn(fa)) return bisect(f, a, b, fa);
    a = b;
    fa = fb;
  }
  return std::nullopt;
}

void finalize(Trajectory& tr) {
  auto by_tau = [](const auto& a, const auto& b) { return a.tau < b.tau; };
  if (tr.direction < 0) {
    std::reverse(tr.samples.begin(), tr.samples.end());
    std::reverse(tr.chart_samples.begin(), tr.chart_samples.end());
    std::reverse(tr.segments.begin(), tr.segments.end());
    std::reverse(tr.events.begin(), tr.events.end());
  }
  std::stable_sort(tr.events.begin(), tr.events.end(), by_tau);
}

double dense_tau(const DenseSegment& s, double theta) {
  switch (s.kind) {
    case DenseSegment::Kind::S: return s.dense.t0 + theta * s.dense.h;
    case DenseSegment::Kind::band: return s.dense.component(1, theta);
    case DenseSegment::Kind::chart:
      if (s.chart == Chart::Q || s.chart == Chart::P) return s.dense.t0 + theta * s.dense.h;
      return s.dense.component(2, theta);
  }
  return 0.0;
}

DenseSegment make_segment(DenseSegment::Kind kind, Chart chart, int sign, const Dense3& d) {
  DenseSegment seg;
  seg.kind = kind;
  seg.chart = chart;
  seg.sign = sign;
  seg.dense = d;
  const double a = dense_tau(seg, 0.0), b = dense_tau(seg, 1.0);
  seg.tau_lo = std::min(a, b);
  seg.tau_hi = std::max(a, b);
  return seg;
}

// ---------------------------------------------------------------------------
// S chart
// ---------------------------------------------------------------------------

class SIntegrator {
 public:
  SIntegrator(const ProblemParams& pr, const IntegrationConfig& cfg, Direction dir, const EventSpecs& ev)
      : pr_(pr), c_(derive_constants(pr)), cfg_(cfg), d_(static_cast<int>(dir)), ev_(ev) {
    counts_.assign(ev_.sections.size(), 0);
    if (c_.ell) scale_ = std::hypot(*c_.ell, std::pow(c_.gamma * *c_.ell, pr_.p - 1.0));
  }

  Trajectory run(const PhaseState& init) {
    tr_.params = pr_;
    tr_.chart = Chart::S;
    tr_.direction = d_;
    double tau = init.tau;
    S3 x{init.y, init.Y, 0.0};
    const double tau_end = tau + d_ * cfg_.max_time_span;
    push_sample(tau, x);

    if (ev_.capture) {
      const auto cap = capture_test(x[0], x[1], pr_, Direction(d_), cfg_);
      if (cap.captured && cap.id != kOrigin) {
        record_capture(tau, x, cap);
        return done();
      }
    }

    double h = initial_step(x);
    S3 f0 = field3(x);
    bool pending_band = false;
    bool skip_band = false;
    long steps = 0;

    while (true) {
      if (++steps > cfg_.max_steps) {
        tr_.termination = Termination::max_steps;
        break;
      }
      const double left = tau_end - tau;
      if (left * d_ <= 1e-13 * std::max(1.0, std::abs(tau))) {
        tr_.termination = Termination::time_limit;
        break;
      }

      if (!skip_band && !pending_band && std::abs(x[1]) <= band(x[0])) {
        const int rc = cross_band(tau, x);
        skip_band = true;  // one regular step out of the band before checking again
        if (rc == kCrossed) {
          f0 = field3(x);
          if (stop_) break;
          continue;
        }
        if (rc == kNearOrigin) tr_.origin_pass = true;
      }

      if (std::abs(h) > std::abs(left)) h = left;
      auto st = detail::dp5_step<3>([this](double, const S3& z) { return field3(z); }, tau, x, f0, h,
                                    cfg_.abs_tol, cfg_.rel_tol, cfg_.track_divergence ? 3 : 2);
      if (st.err > 1.0) {
        h *= st.finite ? pi_.rejected(st.err) : 0.1;
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(tau))) {
          tr_.termination = Termination::step_underflow;
          tr_.diagnostic = "step size underflow at tau = " + std::to_string(tau);
          break;
        }
        continue;
      }

      if (!skip_band && !pending_band) {
        if (auto theta = band_entry(st.dense, x)) {
          if (*theta * std::abs(h) > 1e-13 * std::max(1.0, std::abs(tau))) {
            h *= *theta;
            pending_band = true;
            continue;
          }
          // already at the band edge: cross from here
          const int rc = cross_band(tau, x);
          skip_band = true;
          if (rc == kCrossed) {
            f0 = field3(x);
            if (stop_) break;
            continue;
          }
        }
      }

      // accept
      const double tau1 = tau + h;
      handle_step_events(st.dense, x, st.y1);
      if (stop_ && stop_theta_ < 1.0) {
        // keep the dense output from running past a terminal section
        st = detail::dp5_step<3>([this](double, const S3& z) { return field3(z); }, tau, x, f0, h * stop_theta_,
                                 cfg_.abs_tol, cfg_.rel_tol, 3);
      }
      tr_.segments.push_back(make_segment(DenseSegment::Kind::S, Chart::S, 1, st.dense));
      if (stop_) break;
      const double size_before = std::max(std::abs(x[0]), std::abs(x[1]));
      tau = tau1;
      x = st.y1;
      f0 = st.f1;
      push_sample(tau, x);
      h *= pi_.accepted(st.err);
      skip_band = false;

      if (!std::isfinite(x[0]) || !std::isfinite(x[1])) {
        tr_.termination = Termination::non_finite;
        break;
      }
      // Near r = 0 the S coordinates of regular orbits are huge and shrinking;
      // only growth past the bound counts as escape.
      const double size = std::max(std::abs(x[0]), std::abs(x[1]));
      if (size > cfg_.escape_bound && size > size_before) {
        add_event(EventKind::escape_to_infinity, tau, x, -1);
        tr_.termination = Termination::escape;
        break;
      }
      if (ev_.capture) {
        const auto cap = capture_test(x[0], x[1], pr_, Direction(d_), cfg_);
        if (cap.captured || cap.unmatched) {
          record_capture(tau, x, cap);
          break;
        }
      }
      if (pending_band) {
        pending_band = false;
        if (std::abs(x[1]) <= 4.0 * band(x[0])) {
          const int rc = cross_band(tau, x);
          skip_band = true;
          if (rc == kCrossed) {
            f0 = field3(x);
            if (stop_) break;
          } else if (rc == kNearOrigin) {
            tr_.origin_pass = true;
          }
        }
      }
    }
    return done();
  }

 private:
  static constexpr int kCrossed = 0, kLeaving = 1, kNearOrigin = 2, kNotTransversal = 3;

  Trajectory done() {
    finalize(tr_);
    return std::move(tr_);
  }

  /// Half-width of the band around Y = 0. Inside it Y' is dominated by
  /// eps alpha y, which keeps the crossing transversal.
  double band(double y) const {
    const double ay = std::max(std::abs(y), 1e-300);
    return cfg_.band_rel * std::min(std::pow(ay, pr_.p - 1.0), ay);
  }

  double initial_step(const S3& x) const {
    const auto f = field3(x);
    const double fn = std::max(std::abs(f[0]), std::abs(f[1]));
    const double xn = std::max({std::abs(x[0]), std::abs(x[1]), 1e-12});
    double h = 1e-3 * xn / std::max(fn, 1e-300);
    h = std::clamp(h, 1e-10, 0.05);
    return d_ * h;
  }

  /// Field with the divergence integrand as third component.
  S3 field3(const S3& x) const {
    const double u = phi_inv(x[1], pr_.p);
    const double e = pr_.eps;
    const double Ya = std::max(std::abs(x[1]), band(x[0]));
    const double div = -2.0 * c_.gamma - pr_.N -
                       e * std::pow(Ya, (2.0 - pr_.p) / (pr_.p - 1.0)) / (pr_.p - 1.0);
    return {-c_.gamma * x[0] - u, -(c_.gamma + pr_.N) * x[1] + e * (pr_.alpha * x[0] - u), div};
  }

  void push_sample(double tau, const S3& x) { tr_.samples.push_back({tau, x[0], x[1]}); }

  void add_event(EventKind k, double tau, const S3& x, int tag) {
    Event e;
    e.kind = k;
    e.tau = tau;
    e.time = tau;
    e.y = x[0];
    e.Y = x[1];
    e.tag = tag;
    e.aux = x[2];
    e.chart_x = {x[0], x[1]};
    tr_.events.push_back(e);
  }

  void record_capture(double tau, const S3& x, const CaptureResult& cap) {
    if (cap.double_zero) {
      // on the double-zero cone dg/dtau -> (p-2)/(p-1) with g = -y / phi_inv(Y)
      const double g = -x[0] / phi_inv(x[1], pr_.p);
      const double tau_bar = tau - g * (pr_.p - 1.0) / (pr_.p - 2.0);
      add_event(EventKind::double_zero_capture, tau_bar, {0.0, 0.0, x[2]}, kOrigin);
      if ((tau_bar - tau) * d_ > 0.0) push_sample(tau_bar, {0.0, 0.0, x[2]});
      tr_.termination = Termination::double_zero;
      tr_.extended_by_zero = (pr_.eps == 1 && d_ == 1) || (pr_.eps == -1 && d_ == -1);
    } else if (cap.captured) {
      add_event(EventKind::stationary_capture, tau, x, cap.id);
      tr_.termination = Termination::stationary_capture;
    } else {
      tr_.termination = Termination::origin_unmatched;
      tr_.origin_pass = true;
      tr_.diagnostic = "reached a neighbourhood of (0, 0) off the known cones";
    }
  }

  /// Theta of the first entry into the band within a trial step, if any.
  std::optional<double> band_entry(const Dense3& dn, const S3& x0) const {
    const int s0 = sgn(x0[1]);
    if (s0 == 0) return std::nullopt;
    auto g = [&](double th) {
      const double y = dn.component(0, th), Y = dn.component(1, th);
      return s0 * Y - band(y);
    };
    if (g(0.0) <= 0.0) return std::nullopt;
    return first_root(g);
  }

  void handle_step_events(const Dense3& dn, const S3& x0, const S3& x1) {
    (void)x1;
    // zeros of y
    auto yf = [&](double th) { return dn.component(0, th); };
    double a = 0.0, fa = x0[0];
    for (int k = 1; k <= kScan; ++k) {
      const double b = static_cast<double>(k) / kScan;
      const double fb = yf(b);
      if (fa != 0.0 && fb != 0.0 && sgn(fa) != sgn(fb)) {
        const double th = bisect(yf, a, b, fa);
        const auto z = dn.at(th);
        add_event(EventKind::y_zero_crossing, dn.t0 + th * dn.h, {0.0, z[1], z[2]}, -1);
      }
      if (fb != 0.0) fa = fb;
      a = b;
    }
    // a sign change of Y inside a regular step (band bypassed near the origin)
    if (sgn(x0[1]) != 0 && sgn(x1[1]) != 0 && sgn(x0[1]) != sgn(x1[1])) {
      auto Yf = [&](double th) { return dn.component(1, th); };
      const double th = bisect(Yf, 0.0, 1.0, x0[1]);
      const auto z = dn.at(th);
      add_event(EventKind::Y_zero_crossing, dn.t0 + th * dn.h, {z[0], 0.0, z[2]}, -1);
    }
    // sections
    for (std::size_t i = 0; i < ev_.sections.size(); ++i) {
      const auto& sec = ev_.sections[i];
      auto vf = [&](double th) {
        const auto z = dn.at(th);
        return sec.a * z[0] + sec.b * z[1] - sec.c;
      };
      double sa = 0.0, va = vf(0.0);
      for (int k = 1; k <= kScan; ++k) {
        const double sb = static_cast<double>(k) / kScan;
        const double vb = vf(sb);
        if (va != 0.0 && sgn(va) != sgn(vb) && vb != 0.0) {
          const double th = bisect(vf, sa, sb, va);
          // orientation with respect to increasing tau
          const int rising = sgn(vb - va) * d_;
          const auto z = dn.at(th);
          const bool ok = (sec.orientation == 0 || sec.orientation == rising) &&
                          (!sec.accept || sec.accept({z[0], z[1]}));
          if (ok) {
            const double tau = dn.t0 + th * dn.h;
            add_event(EventKind::section_crossing, tau, z, sec.tag);
            if (sec.terminal && ++counts_[i] >= sec.terminal_count) {
              tr_.termination = Termination::section;
              stop_ = true;
              stop_theta_ = th;
              push_sample(tau, z);
              return;
            }
          }
        }
        if (vb != 0.0) {
          va = vb;
          sa = sb;
        }
      }
    }
  }

  /// Integrates through the band in the u-chart. Updates (tau, x) on success.
  int cross_band(double& tau, S3& x) {
    const double p = pr_.p;
    const double e = pr_.eps;
    const double y0 = x[0];
    const double u0 = phi_inv(x[1], p);
    const double lead = e * pr_.alpha * y0;
    if (std::abs(lead) < 8.0 * (std::abs(u0) + (c_.gamma + pr_.N) * std::abs(x[1]))) {
      return std::hypot(x[0], x[1]) < 1e-3 * scale_ ? kNearOrigin : kNotTransversal;
    }
    const int exit_side = sgn(d_ * lead);
    auto Ydot = [&](double y, double u) {
      return -(c_.gamma + pr_.N) * signed_pow(u, p - 1.0) + e * (pr_.alpha * y - u);
    };
    // state (y, tau, I) against u
    auto fu = [&](double u, const S3& z) -> S3 {
      const double yd = Ydot(z[0], u);
      const double dt = (p - 1.0) * std::pow(std::abs(u), p - 2.0) / yd;
      return {(-c_.gamma * z[0] - u) * dt, dt, (-2.0 * c_.gamma - pr_.N) * dt - e / yd};
    };
    S3 z{y0, tau, x[2]};
    const double atol = cfg_.abs_tol * 1e-2, rtol = cfg_.rel_tol * 1e-2;
    auto on_step = [&](const Dense3& dn, const S3& z1) {
      tr_.segments.push_back(make_segment(DenseSegment::Kind::band, Chart::S, 1, dn));
      tr_.samples.push_back({z1[1], z1[0], signed_pow(dn.t0 + dn.h, p - 1.0)});
    };
    const std::size_t nerr = cfg_.track_divergence ? 3 : 2;
    if (sgn(u0) == exit_side) {
      if (std::abs(x[1]) > band(y0)) return kLeaving;
      const double u1 = exit_side * phi_inv(band(y0), p);
      if (!detail::dp5_solve<3>(fu, u0, u1, z, atol, rtol, on_step, nerr)) return kNearOrigin;
    } else {
      if (u0 != 0.0 && !detail::dp5_solve<3>(fu, u0, 0.0, z, atol, rtol, on_step, nerr)) return kNearOrigin;
      add_event(EventKind::Y_zero_crossing, z[1], {z[0], 0.0, z[2]}, -1);
      const double u1 = exit_side * phi_inv(band(z[0]), p);
      if (!detail::dp5_solve<3>(fu, 0.0, u1, z, atol, rtol, on_step, nerr)) return kNearOrigin;
    }
    if ((z[1] - tau) * d_ < 0.0) {
      tr_.diagnostic = "band crossing ran against the integration direction";
    }
    tau = z[1];
    x = {z[0], signed_pow(phi_inv(band(z[0]), p) * exit_side, p - 1.0), z[2]};
    if (!tr_.samples.empty()) tr_.samples.back().Y = x[1];
    return kCrossed;
  }

  ProblemParams pr_;
  DerivedConstants c_;
  IntegrationConfig cfg_;
  int d_;
  EventSpecs ev_;
  std::vector<int> counts_;
  detail::PiController pi_;
  Trajectory tr_;
  bool stop_ = false;
  double stop_theta_ = 1.0;
  double scale_ = 1.0;
};

// ---------------------------------------------------------------------------
// Q, P, R, R_beta
// ---------------------------------------------------------------------------

class ChartIntegrator {
 public:
  ChartIntegrator(const ProblemParams& pr, const IntegrationConfig& cfg, Direction dir, const EventSpecs& ev,
                  Chart chart, int sign)
      : pr_(pr), c_(derive_constants(pr)), cfg_(cfg), d_(static_cast<int>(dir)), ev_(ev), chart_(chart),
        sign_(sign) {
    counts_.assign(ev_.sections.size(), 0);
  }

  Trajectory run(const ChartState& init) {
    tr_.params = pr_;
    tr_.chart = chart_;
    tr_.direction = d_;
    double t = init.time;
    S3 x{init.x[0], init.x[1], init.tau};
    const double t_end = t + d_ * cfg_.max_time_span;
    push(t, x);
    S3 f0;
    try {
      f0 = f(x);
    } catch (const DomainError& err) {
      tr_.termination = Termination::chart_exit;
      tr_.diagnostic = err.what();
      return done();
    }
    double h = d_ * std::clamp(1e-3 * std::max({std::abs(x[0]), std::abs(x[1]), 1e-8}) /
                                   std::max({std::abs(f0[0]), std::abs(f0[1]), 1e-300}),
                               1e-10, 0.05);
    long steps = 0;
    while (true) {
      if (++steps > cfg_.max_steps) {
        tr_.termination = Termination::max_steps;
        break;
      }
      const double left = t_end - t;
      if (left * d_ <= 1e-13 * std::max(1.0, std::abs(t))) {
        tr_.termination = Termination::time_limit;
        break;
      }
      if (std::abs(h) > std::abs(left)) h = left;
      detail::Dp5Step<3> st;
      try {
        st = detail::dp5_step<3>([this](double, const S3& z) { return f(z); }, t, x, f0, h, cfg_.abs_tol,
                                 cfg_.rel_tol, 2);
      } catch (const DomainError&) {
        st.err = INFINITY;
        st.finite = false;
      }
      if (st.err > 1.0) {
        h *= st.finite ? pi_.rejected(st.err) : 0.1;
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
          tr_.termination = Termination::step_underflow;
          break;
        }
        continue;
      }
      if (sections(st.dense)) {
        if (stop_theta_ < 1.0) {
          st = detail::dp5_step<3>([this](double, const S3& z) { return f(z); }, t, x, f0, h * stop_theta_,
                                   cfg_.abs_tol, cfg_.rel_tol, 2);
        }
        tr_.segments.push_back(make_segment(DenseSegment::Kind::chart, chart_, sign_, st.dense));
        break;
      }
      tr_.segments.push_back(make_segment(DenseSegment::Kind::chart, chart_, sign_, st.dense));
      t += h;
      x = st.y1;
      f0 = st.f1;
      push(t, x);
      h *= pi_.accepted(st.err);
      if (std::abs(x[0]) > cfg_.escape_bound || std::abs(x[1]) > cfg_.escape_bound) {
        tr_.termination = Termination::escape;
        Event e;
        e.kind = EventKind::escape_to_infinity;
        e.time = t;
        e.tau = x[2];
        e.chart_x = {x[0], x[1]};
        tr_.events.push_back(e);
        break;
      }
    }
    return done();
  }

 private:
  Trajectory done() {
    finalize(tr_);
    return std::move(tr_);
  }

  S3 f(const S3& x) const {
    const auto v = field(chart_, {x[0], x[1]}, pr_, c_);
    double dtau = 1.0;
    if (chart_ == Chart::R) dtau = x[0] * x[1];
    if (chart_ == Chart::R_beta) dtau = x[0] * x[1] * c_.beta;
    return {v[0], v[1], dtau};
  }

  void push(double t, const S3& x) {
    ChartState cs{chart_, {x[0], x[1]}, t, x[2], sign_};
    tr_.chart_samples.push_back(cs);
    try {
      tr_.samples.push_back(to_phase(cs, pr_));
    } catch (const DomainError&) {
      tr_.samples.push_back({x[2], NAN, NAN});
    }
  }

  bool sections(const Dense3& dn) {
    for (std::size_t i = 0; i < ev_.sections.size(); ++i) {
      const auto& sec = ev_.sections[i];
      auto vf = [&](double th) {
        const auto z = dn.at(th);
        return sec.a * z[0] + sec.b * z[1] - sec.c;
      };
      double sa = 0.0, va = vf(0.0);
      for (int k = 1; k <= kScan; ++k) {
        const double sb = static_cast<double>(k) / kScan;
        const double vb = vf(sb);
        if (va != 0.0 && vb != 0.0 && sgn(va) != sgn(vb)) {
          const double th = bisect(vf, sa, sb, va);
          const auto z = dn.at(th);
          const int rising = sgn(vb - va) * sgn(dn.component(2, 1.0) - dn.component(2, 0.0));
          const bool ok = (sec.orientation == 0 || sec.orientation == rising) &&
                          (!sec.accept || sec.accept({z[0], z[1]}));
          if (ok) {
            Event e;
            e.kind = EventKind::section_crossing;
            e.time = dn.t0 + th * dn.h;
            e.tau = z[2];
            e.chart_x = {z[0], z[1]};
            e.tag = sec.tag;
            try {
              const auto ph = to_phase({chart_, e.chart_x, e.time, e.tau, sign_}, pr_);
              e.y = ph.y;
              e.Y = ph.Y;
            } catch (const DomainError&) {
            }
            tr_.events.push_back(e);
            if (sec.terminal && ++counts_[i] >= sec.terminal_count) {
              tr_.termination = Termination::section;
              stop_theta_ = th;
              push(e.time, z);
              return true;
            }
          }
        }
        if (vb != 0.0) {
          va = vb;
          sa = sb;
        }
      }
    }
    return false;
  }

  ProblemParams pr_;
  DerivedConstants c_;
  IntegrationConfig cfg_;
  int d_;
  EventSpecs ev_;
  Chart chart_;
  int sign_;
  std::vector<int> counts_;
  detail::PiController pi_;
  Trajectory tr_;
  double stop_theta_ = 1.0;
};

}  // namespace

CaptureResult capture_test(double y, double Y, const ProblemParams& pr, Direction dir,
                           const IntegrationConfig& cfg) {
  CaptureResult out;
  const auto c = derive_constants(pr);
  const int d = static_cast<int>(dir);
  double scale = 1.0;
  if (c.ell) {
    const double my = *c.ell, mY = -std::pow(c.gamma * *c.ell, pr.p - 1.0);
    scale = std::hypot(my, mY);
    const double trace = -(2.0 * c.gamma + pr.N + *c.nu_alpha);  // sum of eigenvalues
    const bool attracting = (d > 0 && trace < 0.0) || (d < 0 && trace > 0.0);
    if (attracting) {
      if (std::hypot(y - my, Y - mY) < cfg.capture_rel * scale) return {true, kMell, false, false};
      if (std::hypot(y + my, Y + mY) < cfg.capture_rel * scale) return {true, kMinusMell, false, false};
    }
  }
  // The cone zeta = alpha is the stationary point A' = (-1/alpha, 0) of R.
  // In S its approach is stiff, so capture it at R-distance 1e-3 from the
  // tangent of the center manifold, g - gA = k s, when A' attracts:
  // transversally if eps d > 0, along the cone if d (alpha + gamma) > 0.
  if (y != 0.0 && Y != 0.0 && pr.eps * d > 0) {
    const double ag = pr.alpha + c.gamma;
    const bool along = std::abs(ag) < 1e-12 * c.gamma || d * ag > 0.0;
    const double s = -Y / y, g = -y / phi_inv(Y, pr.p), gA = -1.0 / pr.alpha;
    const double k = pr.eps * (pr.p - 1.0) * (c.eta - pr.alpha) / (pr.alpha * pr.alpha);
    if (along && std::abs(s) < 1e-3 && std::abs(g - gA - k * s) < 1e-3 * std::max(1.0, std::abs(gA)) &&
        std::hypot(y, Y) < scale) {
      return {true, kOrigin, false, false};
    }
  }
  const double rad = cfg.capture_rel * scale;
  if (std::hypot(y, Y) >= rad || y == 0.0) return out;
  const auto f = field(Chart::S, {y, Y}, pr, c);
  if (d * (y * f[0] + Y * f[1]) >= 0.0) return out;  // not moving inward
  const double sg = Y / y;
  const double zeta = phi_inv(Y, pr.p) / y;
  if (std::abs(sg - pr.eps) < 0.25) return {true, kOrigin, true, false};
  if (std::abs(zeta - pr.alpha) < 0.25 * std::max(1.0, std::abs(pr.alpha))) return {true, kOrigin, false, false};
  out.unmatched = true;
  return out;
}

Trajectory integrate(const ProblemParams& params, const ChartState& initial, Direction dir,
                     const IntegrationConfig& config, const EventSpecs& events) {
  validate(params);
  if (initial.chart == Chart::S) {
    return SIntegrator(params, config, dir, events).run({initial.tau, initial.x[0], initial.x[1]});
  }
  return ChartIntegrator(params, config, dir, events, initial.chart, initial.sign).run(initial);
}

Trajectory integrate(const ProblemParams& params, const PhaseState& initial, Direction dir,
                     const IntegrationConfig& config, const EventSpecs& events) {
  validate(params);
  return SIntegrator(params, config, dir, events).run(initial);
}

std::optional<PhaseState> Trajectory::state_at(double tau) const {
  if (segments.empty()) return std::nullopt;
  auto it = std::lower_bound(segments.begin(), segments.end(), tau,
                             [](const DenseSegment& s, double t) { return s.tau_hi < t; });
  if (it == segments.end()) return std::nullopt;
  const auto& s = *it;
  if (tau < s.tau_lo - 1e-12 * std::max(1.0, std::abs(tau))) return std::nullopt;
  double theta;
  const bool linear = s.kind == DenseSegment::Kind::S ||
                      (s.kind == DenseSegment::Kind::chart && (s.chart == Chart::Q || s.chart == Chart::P));
  if (linear) {
    theta = s.dense.h == 0.0 ? 0.0 : (tau - s.dense.t0) / s.dense.h;
  } else {
    auto g = [&](double th) { return dense_tau(s, th) - tau; };
    const double g0 = g(0.0), g1 = g(1.0);
    if (g0 == 0.0) theta = 0.0;
    else if (g1 == 0.0 || sgn(g0) == sgn(g1)) theta = std::abs(g0) < std::abs(g1) ? 0.0 : 1.0;
    else theta = bisect(g, 0.0, 1.0, g0);
  }
  theta = std::clamp(theta, 0.0, 1.0);
  const auto z = s.dense.at(theta);
  switch (s.kind) {
    case DenseSegment::Kind::S: return PhaseState{tau, z[0], z[1]};
    case DenseSegment::Kind::band: {
      const double u = s.dense.t0 + theta * s.dense.h;
      return PhaseState{tau, z[0], signed_pow(u, params.p - 1.0)};
    }
    case DenseSegment::Kind::chart:
      try {
        auto ph = to_phase({s.chart, {z[0], z[1]}, 0.0, tau, s.sign}, params);
        ph.tau = tau;
        return ph;
      } catch (const DomainError&) {
        return std::nullopt;
      }
  }
  return std::nullopt;
}

std::vector<Event> Trajectory::events_of(EventKind kind) const {
  std::vector<Event> out;
  for (const auto& e : events)
    if (e.kind == kind) out.push_back(e);
  return out;
}

void append(Trajectory& head, const Trajectory& tail) {
  auto by_tau = [](const auto& a, const auto& b) { return a.tau < b.tau; };
  for (const auto& s : tail.samples) {
    const bool dup = std::any_of(head.samples.end() - std::min<std::ptrdiff_t>(2, head.samples.size()),
                                 head.samples.end(), [&](const PhaseState& q) { return q.tau == s.tau; });
    if (!dup) head.samples.push_back(s);
  }
  std::stable_sort(head.samples.begin(), head.samples.end(), by_tau);
  head.chart_samples.insert(head.chart_samples.end(), tail.chart_samples.begin(), tail.chart_samples.end());
  std::stable_sort(head.chart_samples.begin(), head.chart_samples.end(), by_tau);
  head.segments.insert(head.segments.end(), tail.segments.begin(), tail.segments.end());
  std::stable_sort(head.segments.begin(), head.segments.end(),
                   [](const DenseSegment& a, const DenseSegment& b) { return a.tau_lo < b.tau_lo; });
  head.events.insert(head.events.end(), tail.events.begin(), tail.events.end());
  std::stable_sort(head.events.begin(), head.events.end(), by_tau);
  head.origin_pass = head.origin_pass || tail.origin_pass;
}

}  // namespace plap
