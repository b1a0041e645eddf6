#include "plap/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plap/dopri5.hpp"

namespace plap {

std::string_view to_string(SpecialKind kind) {
  switch (kind) {
    case SpecialKind::T_r: return "T_r";
    case SpecialKind::T_eps: return "T_eps";
    case SpecialKind::T_alpha: return "T_alpha";
    case SpecialKind::T_eta: return "T_eta";
    case SpecialKind::T_u: return "T_u";
    case SpecialKind::T_plus: return "T_plus";
    case SpecialKind::T_minus: return "T_minus";
  }
  return "?";
}

std::optional<SpecialKind> parse_special_kind(std::string_view name) {
  for (auto k : {SpecialKind::T_r, SpecialKind::T_eps, SpecialKind::T_alpha, SpecialKind::T_eta,
                 SpecialKind::T_u, SpecialKind::T_plus, SpecialKind::T_minus}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

/// Terminal sections bounding a box in chart coordinates.
EventSpecs box(double lo0, double hi0, double lo1, double hi1) {
  EventSpecs ev;
  ev.capture = false;
  auto add = [&](double a, double b, double c) {
    SectionSpec s;
    s.a = a;
    s.b = b;
    s.c = c;
    s.terminal = true;
    s.tag = static_cast<int>(ev.sections.size());
    ev.sections.push_back(s);
  };
  if (std::isfinite(lo0)) add(1, 0, lo0);
  if (std::isfinite(hi0)) add(1, 0, hi0);
  if (std::isfinite(lo1)) add(0, 1, lo1);
  if (std::isfinite(hi1)) add(0, 1, hi1);
  return ev;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Scalar ODE dx/dt = f(t, x) from t0 to t1.
template <class F>
double solve_scalar(F&& f, double t0, double t1, double x0) {
  detail::State<1> x{x0};
  const bool ok = detail::dp5_solve<1>(
      [&](double t, const detail::State<1>& z) { return detail::State<1>{f(t, z[0])}; }, t0, t1, x, 1e-14,
      1e-12, [](const auto&, const auto&) {});
  if (!ok) throw DomainError("graph function integration failed");
  return x[0];
}

void drop_nonfinite(Trajectory& tr) {
  auto bad = [](const PhaseState& s) { return !std::isfinite(s.y) || !std::isfinite(s.Y); };
  tr.samples.erase(std::remove_if(tr.samples.begin(), tr.samples.end(), bad), tr.samples.end());
}

struct Launch {
  ChartState start;
  Direction chart_dir = Direction::forward;  ///< in the chart's own time
  int tau_dir = 1;
  EventSpecs exit;
  double chart_span = 200.0;
  /// Chart-time span integrated backwards from the launch point, or 0.
  double approach_span = 0.0;
};

/// Chart leg until the exit box, then S for the remaining tau budget.
Shot fly(const ProblemParams& pr, const ShootConfig& cfg, const Launch& L, SpecialKind kind) {
  Shot out;
  out.kind = kind;
  out.launch_tau = L.start.tau;
  IntegrationConfig ccfg = cfg.integration;
  ccfg.max_time_span = L.chart_span;
  ccfg.abs_tol = 1e-300;  // chart coordinates start many decades below 1
  Trajectory head = integrate(pr, L.start, L.chart_dir, ccfg, L.exit);
  drop_nonfinite(head);
  if (head.samples.empty()) throw DomainError("launch point is outside the chart domain");
  const PhaseState hand = L.tau_dir > 0 ? head.samples.back() : head.samples.front();
  out.handoff_tau = hand.tau;

  IntegrationConfig scfg = cfg.integration;
  scfg.max_time_span = std::max(cfg.integration.max_time_span - std::abs(hand.tau - L.start.tau), 1e-6);
  const Trajectory tail = integrate(pr, hand, Direction(L.tau_dir), scfg);

  head.chart = Chart::S;
  head.direction = L.tau_dir;
  append(head, tail);
  head.termination = tail.termination;
  head.diagnostic = tail.diagnostic;
  head.extended_by_zero = tail.extended_by_zero;
  head.origin_pass = head.origin_pass || tail.origin_pass;
  if (L.approach_span > 0.0) {
    // the approach to the launch point, integrated where it is stable
    ccfg.max_time_span = L.approach_span;
    EventSpecs none;
    none.capture = false;
    Trajectory pre = integrate(pr, L.start, Direction(-static_cast<int>(L.chart_dir)), ccfg, none);
    drop_nonfinite(pre);
    append(head, pre);
  }
  out.trajectory = std::move(head);
  return out;
}

template <class Build>
Shot with_consistency(const ShootConfig& cfg, Build&& build) {
  Shot shot = build(cfg.delta);
  if (!cfg.consistency_check) return shot;
  const Shot half = build(0.5 * cfg.delta);
  const auto& tr = shot.trajectory;
  const int d = tr.direction;
  double lo = shot.handoff_tau, hi = shot.handoff_tau + d * cfg.consistency_window;
  if (lo > hi) std::swap(lo, hi);
  lo = std::max(lo, std::max(tr.tau_min(), half.trajectory.tau_min()));
  hi = std::min(hi, std::min(tr.tau_max(), half.trajectory.tau_max()));
  shot.consistency_gap = lo < hi ? arc_distance(tr, half.trajectory, lo, hi) : 0.0;
  return shot;
}

}  // namespace

bool is_unique_kind(SpecialKind kind, const ProblemParams& pr) {
  switch (kind) {
    case SpecialKind::T_r:
    case SpecialKind::T_eps:
    case SpecialKind::T_u:
    case SpecialKind::T_plus:
    case SpecialKind::T_minus: return true;
    case SpecialKind::T_alpha: return pr.eps * (gamma_of(pr.p) + pr.alpha) < 0.0;
    case SpecialKind::T_eta: return false;
  }
  return false;
}

// T_r: Q saddle (0, eps alpha / N), unstable eigenvalue p', slope
// eps (alpha - N) / (N (N + p')). Near r = 0, w = a - w zeta / p' + ...
Shot shoot_regular(const ProblemParams& pr, const ShootConfig& cfg, double a) {
  validate(pr);
  if (!(a > 0.0)) throw ParamError("a must be positive");
  const auto c = derive_constants(pr);
  const double s0 = pr.eps * pr.alpha / pr.N;
  const double slope = pr.eps * (pr.alpha - pr.N) / (pr.N * (pr.N + c.p_prime));
  return with_consistency(cfg, [&](double delta) {
    const double z0 = sgn(pr.eps * pr.alpha) * delta;
    Launch L;
    L.start = {Chart::Q, {z0, s0 + slope * z0}, 0.0, 0.0, 1};
    const double y0 = to_phase(L.start, pr).y;
    L.start.tau = std::log(a / (y0 * (1.0 + z0 / c.p_prime))) / c.gamma;
    L.start.time = L.start.tau;
    L.exit = box(-0.05, 0.05, -kInf, kInf);
    L.chart_span = 60.0;
    Shot s = fly(pr, cfg, L, SpecialKind::T_r);
    s.delta = delta;
    s.trajectory.label_start = AsymptoticLabel::A_r;
    return s;
  });
}

// T_eps: R saddle (0, -eps), eigenvalue -eps (p-2)/(p-1) along
// ((2p-3)/(p-1), eps (N - alpha)). tau - tau_bar follows from dtau/dg on the
// linear manifold, integrated by two-point Gauss.
Shot shoot_double_zero(const ProblemParams& pr, double r_bar, const ShootConfig& cfg) {
  validate(pr);
  if (!(r_bar > 0.0)) throw ParamError("r_bar must be positive");
  const auto c = derive_constants(pr);
  const int e = pr.eps;
  const double k = e * (pr.N - pr.alpha) * (pr.p - 1.0) / (2.0 * pr.p - 3.0);
  const double tau_bar = std::log(r_bar);
  auto dtau_dg = [&](double g) {
    const double s = -e + k * g;
    return s / (s * (1.0 + c.eta * g) + e * (1.0 + pr.alpha * g) / (pr.p - 1.0));
  };
  return with_consistency(cfg, [&](double delta) {
    const double g0 = -e * delta;
    const double q = 0.5 / std::sqrt(3.0);
    const double tau0 = tau_bar + 0.5 * g0 * (dtau_dg(g0 * (0.5 - q)) + dtau_dg(g0 * (0.5 + q)));
    Launch L;
    L.start = {Chart::R, {g0, -e + k * g0}, 0.0, tau0, 1};
    L.chart_dir = Direction(-e);
    L.tau_dir = -e;
    L.exit = e > 0 ? box(-0.05, kInf, -kInf, kInf) : box(-kInf, 0.05, -kInf, kInf);
    L.chart_span = 200.0;
    Shot s = fly(pr, cfg, L, SpecialKind::T_eps);
    s.delta = delta;
    auto& tr = s.trajectory;
    Event ev;
    ev.kind = EventKind::double_zero_capture;
    ev.tau = tau_bar;
    ev.tag = kOrigin;
    tr.events.insert(std::upper_bound(tr.events.begin(), tr.events.end(), ev,
                                      [](const Event& a, const Event& b) { return a.tau < b.tau; }),
                     ev);
    if (e > 0) tr.samples.push_back({tau_bar, 0.0, 0.0});
    else tr.samples.insert(tr.samples.begin(), {tau_bar, 0.0, 0.0});
    tr.extended_by_zero = true;
    if (e > 0) tr.label_end = AsymptoticLabel::origin;
    else tr.label_start = AsymptoticLabel::origin;
    return s;
  });
}

// T_alpha: R point A' = (-1/alpha, 0) with transverse eigenvalue -eps/(p-1)
// and a center direction ((p-1)(eta - alpha), eps alpha^2). On the center
// manifold ds/dnu = beta s^2 / alpha, so |s| grows for nu -> -sign(alpha+gamma).
Shot shoot_T_alpha(const ProblemParams& pr, const ShootConfig& cfg) {
  validate(pr);
  const auto c = derive_constants(pr);
  const double al = pr.alpha;
  const double ga = c.gamma;
  const bool critical = std::abs(al + ga) < 1e-12 * ga;
  const int d = critical ? -pr.eps : -sgn(al + ga);
  const double slope = pr.eps * (pr.p - 1.0) * (c.eta - al) / (al * al);  // dg/ds
  ShootConfig run = cfg;
  const double scale = critical ? 1e-3 / cfg.delta : 1e3;
  return with_consistency(run, [&](double delta) {
    const double s0 = -sgn(al) * scale * delta;
    Launch L;
    L.start = {Chart::R, {-1.0 / al + slope * s0, s0}, 0.0, 0.0, 1};
    const double y0 = to_phase(L.start, pr).y;
    if (!critical) L.start.tau = -std::log(y0) / (al + ga);
    L.chart_dir = Direction(d);
    L.tau_dir = d;
    const double gA = -1.0 / al, w = 0.5 / std::abs(al);
    L.exit = box(gA - w, gA + w, s0 > 0 ? -kInf : -0.05, s0 > 0 ? 0.05 : kInf);
    const double rate = critical ? 1.0 : std::abs(c.beta / al);
    // Not unique: the launch point repels transversally in the direction of
    // integration, so the approach to A' is added. Along it
    // tau - tau0 ~ ln(1 + rate |s0| nu) / (rate |alpha|); aim for half a unit.
    if (!is_unique_kind(SpecialKind::T_alpha, pr)) {
      const double target = std::expm1(0.5 * rate * std::abs(al)) / (rate * std::abs(s0));
      L.approach_span = std::min(target, 3e5);
    }
    L.chart_span = critical ? 100.0 / (s0 * s0) : 20.0 / (rate * std::abs(s0)) + 200.0;
    Shot s = fly(pr, cfg, L, SpecialKind::T_alpha);
    s.delta = std::abs(s0);
    if (d > 0) s.trajectory.label_start = AsymptoticLabel::A_alpha;
    else s.trajectory.label_end = AsymptoticLabel::A_alpha;
    return s;
  });
}

// T_u / T_eta: P point (eta, 0) with eigenvalues eta along (1, 0) and N - eta
// along (eta eps (alpha - eta) / ((p-1)(N - 2 eta)), 1).
Shot shoot_T_eta_or_u(const ProblemParams& pr, const ShootConfig& cfg) {
  validate(pr);
  if (pr.p == pr.N) throw ParamError("T_eta / T_u need p != N");
  const auto c = derive_constants(pr);
  const double eta = c.eta;
  const double den = (pr.p - 1.0) * (pr.N - 2.0 * eta);
  const double v = std::abs(den) < 1e-12 ? 0.0 : eta * pr.eps * (pr.alpha - eta) / den;
  const bool unstable_only = pr.p > pr.N;
  Vec2 dir;
  if (unstable_only) {
    dir = {-v, -1.0};  // y > 0 with w increasing: psi < 0
  } else {
    const double n = std::hypot(v, 1.0);
    dir = {1.0 + v / n, 1.0 / n};
  }
  const double n = std::hypot(dir[0], dir[1]);
  dir = {dir[0] / n, dir[1] / n};
  const SpecialKind kind = unstable_only ? SpecialKind::T_u : SpecialKind::T_eta;
  return with_consistency(cfg, [&](double delta) {
    Launch L;
    L.start = {Chart::P, {eta + delta * dir[0], delta * dir[1]}, 0.0, 0.0, 1};
    const double y0 = to_phase(L.start, pr).y;
    L.start.tau = -std::log(y0) / (c.gamma + eta);
    L.start.time = L.start.tau;
    const double w = 0.5 * std::max(1.0, std::abs(eta));
    L.exit = box(eta - w, eta + w, -0.05, 0.05);
    L.chart_span = 60.0 / std::min(std::abs(eta) > 0 ? std::abs(eta) : 1.0, pr.N - eta);
    Shot s = fly(pr, cfg, L, kind);
    s.delta = delta;
    s.trajectory.label_start = AsymptoticLabel::L_eta;
    return s;
  });
}

namespace {

struct Graph {
  const ProblemParams& pr;
  double p, al, kappa, aeta, c;
  int e, N;

  Graph(const ProblemParams& params, double cc)
      : pr(params), p(params.p), al(params.alpha), kappa(0), aeta(0), c(cc), e(params.eps), N(params.N) {
    if (p != N) {
      aeta = -eta_of(N, p);
      kappa = N / aeta;
    }
  }

  // p = N: V = psi zeta e^{N/zeta}, V(0) = k^{2-p}
  double dV(double z, double V) const {
    const double E = std::exp(-N / z);
    if (E == 0.0) return 0.0;
    return -e * V * V * E * (al - z) * (N + (N - 2.0) * z) / (z * z * ((N - 1.0) * z * z + e * (al - z) * V * E));
  }
  // p > N: psi = |c|^{1-p-kappa} |zeta|^{kappa-1} zeta v^kappa, v(0) = 1
  double psi_over_zeta(double z, double v) const {
    return std::pow(std::abs(c), 1.0 - p - kappa) * std::pow(std::abs(z), kappa - 1.0) * std::pow(v, kappa);
  }
  double dv(double z, double v) const {
    const double pz = psi_over_zeta(z, v);
    const double num = (kappa + 1.0) * (p - 1.0) - e * (p - 1.0 + kappa) * (z - al) * pz;
    const double den = (p - 1.0) * (z + aeta) + e * (al - z) * pz * z;
    return -(v / kappa) * num / den;
  }
  double psi(double z) const {
    if (p == N) {
      const double V = solve_scalar([this](double t, double x) { return dV(t, x); }, 0.0, z, std::pow(c, 2.0 - p));
      return V * std::exp(-N / z) / z;
    }
    const double v = solve_scalar([this](double t, double x) { return dv(t, x); }, 0.0, z, 1.0);
    return psi_over_zeta(z, v) * z;
  }
};

}  // namespace

double t_pm_graph_psi(const ProblemParams& pr, double c, double zeta) {
  validate(pr);
  if (pr.p < pr.N) throw ParamError("T_+/- need p >= N");
  if (c == 0.0 || (pr.p == pr.N && c < 0.0)) throw ParamError("invalid T_+/- parameter");
  if (zeta == 0.0 || (pr.p == pr.N && zeta < 0.0) || (pr.p > pr.N && zeta * c < 0.0))
    throw DomainError("zeta is off the graph");
  return Graph(pr, c).psi(zeta);
}

// T_+/-: launched from the graph at small zeta, where the profile limits
// hold to far better than the requested accuracy.
Shot shoot_T_pm(const ProblemParams& pr, double a, double cc, const ShootConfig& cfg) {
  validate(pr);
  if (pr.p < pr.N) throw ParamError("T_+/- need p >= N");
  if (cc == 0.0) throw ParamError("c must be nonzero");
  const auto c = derive_constants(pr);
  const double p = pr.p;
  ShootConfig one = cfg;
  one.consistency_check = false;  // the launch is on the graph, not offset from a point

  if (p == pr.N) {
    if (cc < 0.0) throw ParamError("for p = N the parameter k must be positive");
    const double k = cc;
    const double z1 = 0.05;
    const double psi1 = Graph(pr, k).psi(z1);
    Launch L;
    L.start = {Chart::P, {z1, psi1}, 0.0, 0.0, 1};
    const auto ph = to_phase(L.start, pr);
    // Y -> k^{p-1} e^{-gamma (p-1) tau}
    L.start.tau = -std::log((ph.y / psi1) / std::pow(k, p - 1.0)) / (c.gamma * (p - 1.0));
    L.start.time = L.start.tau;
    L.exit = box(-kInf, 0.2, -0.05, 0.05);
    L.chart_span = 100.0;
    Shot s = fly(pr, one, L, SpecialKind::T_plus);
    s.delta = z1;
    s.trajectory.label_start = AsymptoticLabel::L_plus;
    return s;
  }

  if (!(a > 0.0)) throw ParamError("a must be positive");
  const double aeta = -c.eta;
  // a = 1 frame; w(r, a) = a w(a^{-1/gamma} r, 1) shifts tau by ln(a)/gamma
  const double c1 = cc * std::pow(a, aeta / c.gamma - 1.0);
  const double z1 = c1 * std::pow(1e-10, aeta);
  const double psi1 = Graph(pr, c1).psi(z1);
  const SpecialKind kind = cc > 0 ? SpecialKind::T_plus : SpecialKind::T_minus;
  Launch L;
  L.start = {Chart::P, {z1, psi1}, 0.0, 0.0, 1};
  const auto ph = to_phase(L.start, pr);
  // w = a (1 - zeta/|eta|) + ...
  L.start.tau = (std::log(a) - std::log(ph.y * (1.0 + z1 / aeta))) / c.gamma;
  L.start.time = L.start.tau;
  L.exit = box(-0.05, 0.05, -0.05, 0.05);
  L.chart_span = 100.0;
  Shot s = fly(pr, one, L, kind);
  s.delta = std::abs(z1);
  s.trajectory.label_start = cc > 0 ? AsymptoticLabel::L_plus : AsymptoticLabel::L_minus;
  return s;
}

Shot shoot(SpecialKind kind, const ProblemParams& pr, const ShootConfig& cfg, double a, double c) {
  switch (kind) {
    case SpecialKind::T_r: return shoot_regular(pr, cfg, a);
    case SpecialKind::T_eps: return shoot_double_zero(pr, 1.0, cfg);
    case SpecialKind::T_alpha: return shoot_T_alpha(pr, cfg);
    case SpecialKind::T_eta:
      if (pr.p >= pr.N) throw ParamError("T_eta needs p < N");
      return shoot_T_eta_or_u(pr, cfg);
    case SpecialKind::T_u:
      if (pr.p <= pr.N) throw ParamError("T_u needs p > N");
      return shoot_T_eta_or_u(pr, cfg);
    case SpecialKind::T_plus: return shoot_T_pm(pr, a, std::abs(c), cfg);
    case SpecialKind::T_minus:
      if (pr.p == pr.N) throw ParamError("T_minus needs p > N");
      return shoot_T_pm(pr, a, -std::abs(c), cfg);
  }
  throw ParamError("unknown trajectory kind");
}

double arc_distance(const Trajectory& A, const Trajectory& B, double tau_lo, double tau_hi) {
  std::vector<PhaseState> pts;
  for (const auto& s : B.samples)
    if (s.tau >= tau_lo && s.tau <= tau_hi && std::isfinite(s.y)) pts.push_back(s);
  if (pts.empty() || A.samples.size() < 2) return 0.0;
  const std::size_t stride = std::max<std::size_t>(1, pts.size() / 200);
  auto dist = [](const PhaseState& u, const PhaseState& b) {
    return std::hypot(u.y - b.y, u.Y - b.Y) / std::max(1.0, std::hypot(b.y, b.Y));
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); i += stride) {
    const auto& b = pts[i];
    std::size_t best = 0;
    double bd = kInf;
    for (std::size_t j = 0; j < A.samples.size(); ++j) {
      const double dj = dist(A.samples[j], b);
      if (dj < bd) {
        bd = dj;
        best = j;
      }
    }
    // refine on the dense output between the neighbouring samples
    double lo = A.samples[best == 0 ? 0 : best - 1].tau;
    double hi = A.samples[std::min(best + 1, A.samples.size() - 1)].tau;
    auto f = [&](double t) {
      const auto s = A.state_at(t);
      return s ? dist(*s, b) : kInf;
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = f(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = f(x2);
      }
    }
    worst = std::max(worst, std::min({bd, f1, f2}));
  }
  return worst;
}

}  // namespace plap
