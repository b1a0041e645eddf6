#include "plap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace plap {

std::string_view to_string(LocalType t) {
  switch (t) {
    case LocalType::saddle: return "saddle";
    case LocalType::sink_node: return "sink_node";
    case LocalType::sink_spiral: return "sink_spiral";
    case LocalType::source_node: return "source_node";
    case LocalType::source_spiral: return "source_spiral";
    case LocalType::weak_source: return "weak_source";
    case LocalType::center_like: return "center_like";
  }
  return "?";
}

std::string_view to_string(CycleStability s) {
  switch (s) {
    case CycleStability::attracting: return "attracting";
    case CycleStability::repelling: return "repelling";
    case CycleStability::undetermined: return "undetermined";
  }
  return "?";
}

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::untested: return "untested";
  }
  return "?";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

bool near(double a, double b, double tol = 1e-3) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

/// Samples in the order they were constructed.
std::vector<PhaseState> construction_order(const Trajectory& tr) {
  std::vector<PhaseState> out = tr.samples;
  if (tr.direction < 0) std::reverse(out.begin(), out.end());
  return out;
}

/// Root of f along the dense output between two samples, by bisection in tau.
template <class F>
std::optional<PhaseState> refine(const Trajectory& tr, const PhaseState& a, const PhaseState& b, F&& f) {
  double lo = a.tau, hi = b.tau;
  double flo = f(a);
  std::optional<PhaseState> best;
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (lo + hi);
    const auto s = tr.state_at(m);
    if (!s) return std::nullopt;
    best = s;
    const double fm = f(*s);
    if (fm == 0.0) break;
    if (sgn(fm) == sgn(flo)) {
      lo = m;
      flo = fm;
    } else {
      hi = m;
    }
    if (std::abs(hi - lo) <= 1e-15 * std::max(1.0, std::abs(m))) break;
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stationary points
// ---------------------------------------------------------------------------

std::vector<StationaryPointInfo> classify_stationary_points(const ProblemParams& pr) {
  const auto c = derive_constants(pr);
  std::vector<StationaryPointInfo> out;

  StationaryPointInfo origin;
  origin.name = "origin";
  origin.eigenvalues = {std::complex<double>(kNaN, kNaN), std::complex<double>(kNaN, kNaN)};
  origin.residual = kNaN;
  out.push_back(origin);

  if (!c.ell) return out;
  const double l = *c.ell;
  const double g = c.gamma;
  const double p = pr.p;
  const double YM = -std::pow(g * l, p - 1.0);

  // Jacobian of S at M_ell; d phi_inv / dY = |Y|^{(2-p)/(p-1)} / (p-1)
  const double q = std::pow(g * l, 2.0 - p) / (p - 1.0);
  const double j00 = -g, j01 = -q, j10 = pr.eps * pr.alpha, j11 = -(g + pr.N) - pr.eps * q;
  const double tr = j00 + j11, det = j00 * j11 - j01 * j10;
  const std::complex<double> root = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
  const std::array<std::complex<double>, 2> lam = {0.5 * (tr - root), 0.5 * (tr + root)};

  const double b = 2.0 * g + pr.N + *c.nu_alpha;
  const double c0 = c.p_prime * (pr.N + g);
  double res = 0.0;
  for (const auto& z : lam) {
    const double size = std::max({std::norm(z), std::abs(b * z), c0});
    res = std::max(res, std::abs(z * z + b * z + c0) / size);
  }

  LocalType type;
  const bool node = *c.discriminant >= 0.0;
  if (std::abs(b) <= 1e-12 * (2.0 * g + pr.N)) {
    type = pr.eps < 0 ? LocalType::weak_source : LocalType::center_like;
  } else if (b > 0.0) {
    type = node ? LocalType::sink_node : LocalType::sink_spiral;
  } else {
    type = node ? LocalType::source_node : LocalType::source_spiral;
  }

  std::optional<std::array<Vec2, 2>> vecs;
  if (node) {
    std::array<Vec2, 2> v{};
    for (int k = 0; k < 2; ++k) {
      const double a0 = q, a1 = -g - lam[k].real();
      const double n = std::hypot(a0, a1);
      v[k] = {a0 / n, a1 / n};
    }
    vecs = v;
  }

  StationaryPointInfo m;
  m.name = "M_ell";
  m.location = {l, YM};
  m.eigenvalues = lam;
  m.local_type = type;
  m.eigenvectors = vecs;
  m.residual = res;
  out.push_back(m);
  m.name = "minus_M_ell";
  m.location = {-l, -YM};
  out.push_back(m);
  return out;
}

double nmo_radius(const PhaseState& s, const ProblemParams& pr) {
  const double pp = pr.p / (pr.p - 1.0);
  return 0.5 * s.y * s.y + std::pow(std::abs(s.Y), pp) / (pp * std::abs(pr.alpha));
}

// ---------------------------------------------------------------------------
// Zeros
// ---------------------------------------------------------------------------

int count_sign_changes(const Trajectory& tr, double tau_lo, double tau_hi) {
  if (tau_lo > tau_hi) std::swap(tau_lo, tau_hi);
  int n = 0;
  for (const auto& e : tr.events) {
    if (e.kind == EventKind::y_zero_crossing && e.tau >= tau_lo && e.tau <= tau_hi) ++n;
  }
  return n;
}

int count_sign_changes(const Trajectory& tr) {
  if (tr.empty()) return 0;
  return count_sign_changes(tr, tr.tau_min(), tr.tau_max());
}

int count_orbit_zeros(const ProblemParams& pr, const PhaseState& seed, double span, const IntegrationConfig& cfg) {
  IntegrationConfig ic = cfg;
  ic.max_time_span = span;
  int n = 0;
  for (auto dir : {Direction::forward, Direction::backward}) {
    const Trajectory t = integrate(pr, seed, dir, ic);
    n += count_sign_changes(t);
  }
  // a seed on y = 0 is reported by neither leg
  return seed.y == 0.0 ? n + 1 : n;
}

// ---------------------------------------------------------------------------
// Limit cycles
// ---------------------------------------------------------------------------

namespace {

struct Section {
  bool around_origin = true;
  double y = 0.0;
  int side = 1;          ///< sign of y on the M_ell side
  double Y_bound = 0.0;  ///< side * Y must stay below this (M_ell case)

  bool accepts(double Y) const { return around_origin ? Y > 0.0 : side * Y < Y_bound; }
};

struct Return {
  double Y = 0.0;
  double tau = 0.0;
  double div = 0.0;
  Trajectory run;
};

std::optional<Return> return_map(const ProblemParams& pr, const Section& sec, double Y0, double tau0, int dir,
                                 double span, const CycleConfig& cfg) {
  EventSpecs ev;
  SectionSpec s;
  s.a = 1.0;
  s.b = 0.0;
  s.c = sec.y;
  s.terminal = true;
  s.accept = [sec](const Vec2& z) { return sec.accepts(z[1]); };
  ev.sections.push_back(s);
  IntegrationConfig ic;
  ic.rel_tol = cfg.rel_tol;
  ic.abs_tol = cfg.abs_tol;
  ic.max_time_span = span;
  ic.track_divergence = true;
  Trajectory run = integrate(pr, PhaseState{tau0, sec.y, Y0}, Direction(dir), ic, ev);
  if (run.termination != Termination::section) return std::nullopt;
  const auto evs = run.events_of(EventKind::section_crossing);
  if (evs.empty()) return std::nullopt;
  const Event& e = dir > 0 ? evs.back() : evs.front();
  return Return{e.Y, e.tau, e.aux, std::move(run)};
}

}  // namespace

std::optional<CycleInfo> detect_limit_cycle(const Trajectory& tr, const ProblemParams& pr, const CycleConfig& cfg) {
  if (tr.samples.size() < 3) return std::nullopt;
  if (tr.termination == Termination::stationary_capture || tr.termination == Termination::double_zero ||
      tr.termination == Termination::escape) {
    return std::nullopt;
  }
  const auto c = derive_constants(pr);
  const int d = tr.direction;

  // crossings in construction order
  std::vector<PhaseState> xs;
  Section sec;
  for (const auto& e : tr.events) {
    if (e.kind == EventKind::y_zero_crossing && e.Y > 0.0) xs.push_back({e.tau, 0.0, e.Y});
  }
  if (static_cast<int>(xs.size()) >= cfg.min_crossings) {
    if (d < 0) std::reverse(xs.begin(), xs.end());
  } else {
    xs.clear();
    if (!c.ell) return std::nullopt;
    sec.around_origin = false;
    sec.side = sgn(tr.terminal().y) < 0 ? -1 : 1;
    sec.y = sec.side * *c.ell;
    sec.Y_bound = -std::pow(c.gamma * *c.ell, pr.p - 1.0);
    const auto ord = construction_order(tr);
    auto f = [&](const PhaseState& s) { return s.y - sec.y; };
    for (std::size_t k = 0; k + 1 < ord.size(); ++k) {
      const double fa = f(ord[k]), fb = f(ord[k + 1]);
      if (fa == 0.0 || sgn(fa) == sgn(fb)) continue;
      auto hit = refine(tr, ord[k], ord[k + 1], f);
      if (hit && sec.accepts(hit->Y)) xs.push_back(*hit);
    }
    if (static_cast<int>(xs.size()) < cfg.min_crossings) return std::nullopt;
  }

  // successive return distances must shrink
  const std::size_t n = xs.size();
  std::vector<double> gaps;
  for (std::size_t k = n - 5; k + 1 < n; ++k) gaps.push_back(std::abs(xs[k + 1].Y - xs[k].Y));
  if (!(gaps.back() <= cfg.gap_tol || gaps.back() < gaps.front())) return std::nullopt;

  const double period_est = std::abs(xs[n - 1].tau - xs[n - 2].tau);
  const double span = std::max(20.0 * period_est, 50.0);
  const double tau0 = xs.back().tau;
  const double scale = std::max(1e-300, std::abs(xs.back().Y));
  auto valid = [&](double Y) {
    if (!sec.accepts(Y)) return false;
    if (sec.around_origin) return Y > 1e-6 * scale;
    return std::abs(sec.side * Y - sec.Y_bound) > 1e-6 * std::abs(sec.Y_bound);
  };

  double x0 = xs.back().Y;
  auto r0 = return_map(pr, sec, x0, tau0, d, span, cfg);
  if (!r0 || !valid(r0->Y)) return std::nullopt;
  double F0 = r0->Y - x0;
  double x1 = r0->Y;
  auto r1 = return_map(pr, sec, x1, tau0, d, span, cfg);
  if (!r1) return std::nullopt;
  double F1 = r1->Y - x1;
  for (int it = 0; it < cfg.max_secant; ++it) {
    if (std::abs(F1) <= 0.1 * cfg.gap_tol * std::max(1.0, std::abs(x1))) break;
    const double slope = (F1 - F0) / (x1 - x0);
    if (!std::isfinite(slope) || slope == 0.0) return std::nullopt;
    double x2 = x1 - F1 / slope;
    for (int h = 0; h < 60 && !valid(x2); ++h) x2 = 0.5 * (x1 + x2);
    if (!valid(x2)) return std::nullopt;
    auto r2 = return_map(pr, sec, x2, tau0, d, span, cfg);
    if (!r2) return std::nullopt;
    x0 = x1;
    F0 = F1;
    x1 = x2;
    F1 = r2->Y - x2;
    r1 = std::move(r2);
    if (x1 == x0) break;
  }
  if (!valid(x1)) return std::nullopt;
  const double gap = std::abs(F1);
  if (gap > cfg.gap_tol) return std::nullopt;

  CycleInfo out;
  out.around_origin = sec.around_origin;
  out.section_y = sec.y;
  out.fixed_point = x1;
  out.return_gap = gap;
  out.period_tau = std::abs(r1->tau - tau0);
  // r1->div accumulates the divergence in the integration direction of tau
  out.floquet_mean = d * r1->div / out.period_tau;
  if (out.floquet_mean < -1e-9) out.stability = CycleStability::attracting;
  else if (out.floquet_mean > 1e-9) out.stability = CycleStability::repelling;
  out.orbit = r1->run.samples;
  out.crossings_used = static_cast<int>(n);
  return out;
}

// ---------------------------------------------------------------------------
// Asymptotic labels
// ---------------------------------------------------------------------------

AsymptoticLabel asymptotic_label(const Trajectory& tr, int end) {
  if (tr.empty()) return AsymptoticLabel::unresolved;
  end = end >= 0 ? 1 : -1;
  const ProblemParams& pr = tr.params;
  const auto c = derive_constants(pr);
  const bool built_here = end == tr.direction;
  const auto& preset = end > 0 ? tr.label_end : tr.label_start;
  if (!built_here && preset) return *preset;

  if (built_here) {
    switch (tr.termination) {
      case Termination::double_zero: return AsymptoticLabel::origin;
      case Termination::stationary_capture: {
        const auto caps = tr.events_of(EventKind::stationary_capture);
        if (!caps.empty()) {
          const int id = (end > 0 ? caps.back() : caps.front()).tag;
          if (id == kMell || id == kMinusMell) return AsymptoticLabel::A_gamma;
          if (id == kOrigin) return AsymptoticLabel::A_alpha;
        }
        break;
      }
      default: break;
    }
    if (preset) return *preset;
  }

  const double span = tr.tau_max() - tr.tau_min();
  const double w = 0.2 * span;
  const double lo = end > 0 ? tr.tau_max() - w : tr.tau_min();
  const double hi = end > 0 ? tr.tau_max() : tr.tau_min() + w;
  if (count_sign_changes(tr, lo, hi) >= 4) return AsymptoticLabel::oscillating_sign;
  if (built_here && detect_limit_cycle(tr, pr)) return AsymptoticLabel::cycle;

  const PhaseState& s = end > 0 ? tr.samples.back() : tr.samples.front();
  if (s.y == 0.0 || s.Y == 0.0) return AsymptoticLabel::unresolved;
  const double zeta = phi_inv(s.Y, pr.p) / s.y;
  const double sigma = s.Y / s.y;
  const double psi = s.y / s.Y;
  const double a = pr.alpha, e = pr.eps, g = c.gamma;
  if (near(zeta, -g) && near(sigma, e * (a + g) / (pr.N + g))) return AsymptoticLabel::A_gamma;
  if (near(zeta, 0.0) && near(sigma, e * a / pr.N)) return AsymptoticLabel::A_r;
  if (near(zeta, a) && std::abs(sigma) <= 1e-3) return AsymptoticLabel::A_alpha;
  if (std::abs(psi) <= 1e-3) {
    if (pr.p != pr.N && near(zeta, c.eta)) return AsymptoticLabel::L_eta;
    if (near(zeta, 0.0)) return psi > 0.0 ? AsymptoticLabel::L_plus : AsymptoticLabel::L_minus;
  }
  if (built_here && tr.termination == Termination::escape) return AsymptoticLabel::escape;
  return AsymptoticLabel::unresolved;
}

// ---------------------------------------------------------------------------
// Connection function and critical exponent
// ---------------------------------------------------------------------------

namespace {

/// First crossing of L = {zeta = -gamma} (g = 1/gamma) in construction order.
std::optional<PhaseState> first_on_L(const Trajectory& tr, double gamma) {
  const double p = tr.params.p;
  auto f = [&](const PhaseState& s) { return gamma * s.y + phi_inv(s.Y, p); };
  const auto ord = construction_order(tr);
  for (std::size_t k = 0; k + 1 < ord.size(); ++k) {
    const auto& a = ord[k];
    const auto& b = ord[k + 1];
    if (a.y == 0.0 && a.Y == 0.0) continue;
    const double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (sgn(fa) != sgn(fb) && fb != 0.0) return refine(tr, a, b, f);
  }
  return std::nullopt;
}

}  // namespace

PhiValue phi_detail(int N, double p, double alpha, const PhiConfig& cfg) {
  const ProblemParams pr{N, p, alpha, -1};
  validate(pr);
  const auto c = derive_constants(pr);
  if (!(alpha < 0.0 && alpha + c.gamma > 0.0)) {
    throw AnalysisError("phi(alpha) needs -gamma < alpha < 0");
  }
  ShootConfig sc;
  sc.delta = cfg.delta;
  sc.consistency_check = false;
  sc.integration.max_time_span = cfg.tau_span;
  sc.integration.max_steps = cfg.max_steps;

  const Shot te = shoot_double_zero(pr, 1.0, sc);
  const Shot ta = shoot_T_alpha(pr, sc);
  const auto h0 = first_on_L(te.trajectory, c.gamma);
  const auto h1 = first_on_L(ta.trajectory, c.gamma);
  std::ostringstream msg;
  if (!h0) msg << "T_eps leaves before reaching g = 1/gamma (alpha = " << alpha << ")";
  if (!h1) msg << (h0 ? "" : "; ") << "T_alpha leaves before reaching g = 1/gamma (alpha = " << alpha << ")";
  if (!h0 || !h1) throw AnalysisError(msg.str());

  PhiValue out;
  out.at0 = *h0;
  out.at1 = *h1;
  out.S0 = -(h0->Y / h0->y) / c.beta;
  out.S1 = -(h1->Y / h1->y) / c.beta;
  out.phi = out.S0 - out.S1;
  return out;
}

double phi_of_alpha(int N, double p, double alpha, const PhiConfig& cfg) {
  return phi_detail(N, p, alpha, cfg).phi;
}

AlphaCResult find_alpha_c(int N, double p, const AlphaCConfig& cfg) {
  const ProblemParams probe{N, p, -1.0, -1};
  validate(probe);
  const auto c = derive_constants_unchecked(probe);
  AlphaCResult out;
  if (N == 1 && !cfg.force_bisection) {
    out.value = out.lo = out.hi = c.alpha_p;
    out.closed_form = true;
    return out;
  }
  // For N = 1 alpha_c = alpha_p sits on the lower end, so start from alpha_star.
  double lo = N == 1 ? c.alpha_star : std::max(c.alpha_star, c.alpha_p);
  double hi = -c.p_prime;
  if (c.alpha_2) hi = std::min(hi, *c.alpha_2);
  if (!(lo < hi)) throw AnalysisError("empty bracket for alpha_c");
  const double w = hi - lo;
  lo += 1e-4 * w;
  hi -= 1e-4 * w;

  double flo = phi_of_alpha(N, p, lo, cfg.phi);
  double fhi = phi_of_alpha(N, p, hi, cfg.phi);
  out.evaluations = 2;
  if (!(flo > 0.0 && fhi < 0.0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "phi does not change sign on the bracket: phi(" << lo << ") = " << flo << ", phi(" << hi
        << ") = " << fhi;
    throw AnalysisError(msg.str());
  }
  while (hi - lo > cfg.tol) {
    const double m = 0.5 * (lo + hi);
    const double fm = phi_of_alpha(N, p, m, cfg.phi);
    ++out.evaluations;
    if (fm > 0.0) {
      lo = m;
      flo = fm;
    } else {
      hi = m;
      fhi = fm;
    }
  }
  out.lo = lo;
  out.hi = hi;
  out.phi_lo = flo;
  out.phi_hi = fhi;
  out.value = 0.5 * (lo + hi);
  return out;
}

// ---------------------------------------------------------------------------
// Regimes
// ---------------------------------------------------------------------------

std::string regime_tag(const ProblemParams& pr, std::optional<double> alpha_c) {
  const auto c = derive_constants(pr);
  const double a = pr.alpha;
  if (pr.eps > 0) return a >= -c.gamma ? "pin" : "mel";
  if (a <= -c.gamma) return "osc";
  if (a > 0.0) return "int";
  if (a >= -c.p_prime) return "pom";
  if (a <= c.alpha_star) return "sou";
  if (!alpha_c) throw AnalysisError("alpha_c is needed to separate orb from ent");
  return a <= *alpha_c ? "orb" : "ent";
}

double hausdorff_distance(const std::vector<PhaseState>& a, const std::vector<PhaseState>& b) {
  if (a.empty() || b.empty()) throw AnalysisError("Hausdorff distance of an empty orbit");
  auto directed = [](const std::vector<PhaseState>& from, const std::vector<PhaseState>& to) {
    double worst = 0.0;
    for (const auto& s : from) {
      double best = std::hypot(s.y - to.front().y, s.Y - to.front().Y);
      // distance to each chord of the sampled orbit
      for (std::size_t i = 1; i < to.size(); ++i) {
        const double ux = to[i].y - to[i - 1].y, uy = to[i].Y - to[i - 1].Y;
        const double len2 = ux * ux + uy * uy;
        double t = len2 > 0.0 ? ((s.y - to[i - 1].y) * ux + (s.Y - to[i - 1].Y) * uy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(s.y - to[i - 1].y - t * ux, s.Y - to[i - 1].Y - t * uy));
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

namespace {

TrajectoryDigest digest(const Shot& s) {
  TrajectoryDigest d;
  d.kind = s.kind;
  d.label_start = asymptotic_label(s.trajectory, -1);
  d.label_end = asymptotic_label(s.trajectory, 1);
  d.zero_count = count_sign_changes(s.trajectory);
  d.termination = s.trajectory.termination;
  d.tau_min = s.trajectory.tau_min();
  d.tau_max = s.trajectory.tau_max();
  return d;
}

CheckStatus status_of(bool ok) { return ok ? CheckStatus::pass : CheckStatus::fail; }

}  // namespace

RegimeReport classify_regime(const ProblemParams& pr, const RegimeConfig& cfg) {
  RegimeReport rep;
  rep.params = pr;
  rep.constants = derive_constants(pr);
  const auto& c = rep.constants;
  rep.stationary_points = classify_stationary_points(pr);
  const double a = pr.alpha;

  std::optional<double> alpha_c;
  if (pr.eps < 0 && a > c.alpha_star && a < -c.p_prime) {
    try {
      const auto r = find_alpha_c(pr.N, pr.p, cfg.alpha_c);
      alpha_c = r.value;
      rep.alpha_c_bracket = std::array<double, 2>{r.lo, r.hi};
    } catch (const AnalysisError& e) {
      rep.notes.push_back(e.what());
    }
  }
  try {
    rep.theorem_tag = regime_tag(pr, alpha_c);
  } catch (const AnalysisError&) {
    rep.theorem_tag = "boundary-ambiguous";
  }
  for (double k : {-c.gamma, -c.p_prime, c.alpha_star, static_cast<double>(pr.N), c.eta}) {
    if (a == k) rep.notes.push_back("alpha sits on a critical constant; equality branch used");
  }
  if (alpha_c && rep.alpha_c_bracket && a >= (*rep.alpha_c_bracket)[0] && a <= (*rep.alpha_c_bracket)[1] &&
      (*rep.alpha_c_bracket)[0] != (*rep.alpha_c_bracket)[1]) {
    rep.notes.push_back("alpha lies inside the alpha_c bracket; orb / ent split not certified");
  }

  auto add = [&](std::string clause, std::string thm, CheckStatus st, std::string detail = {}) {
    rep.checks.push_back({std::move(clause), std::move(thm), st, std::move(detail)});
  };

  ShootConfig sc = cfg.shoot;
  sc.consistency_check = false;
  sc.integration.max_time_span = cfg.tau_budget;

  const Shot tr_shot = shoot_regular(pr, sc);
  const Trajectory& T_r = tr_shot.trajectory;
  rep.digests.push_back(digest(tr_shot));
  const TrajectoryDigest dr = rep.digests.back();
  const bool no_zero = dr.zero_count == 0 && T_r.termination != Termination::double_zero;
  const std::string& tag = rep.theorem_tag;
  const std::string zeros = "zeros: " + std::to_string(dr.zero_count);

  auto tail_radius_check = [&](const std::string& thm) {
    const double bound = 1.1 / (std::abs(a) * c.gamma);
    const double from = T_r.tau_max() - 0.2 * (T_r.tau_max() - T_r.tau_min());
    double worst = 0.0;
    for (const auto& s : T_r.samples) {
      if (s.tau >= from) worst = std::max(worst, nmo_radius(s, pr));
    }
    add("T_r stays in the bounded region on its tail", thm, status_of(worst <= bound),
        "max R = " + std::to_string(worst) + ", bound = " + std::to_string(bound));
  };
  auto oscillation_check = [&](const std::string& thm) {
    const int n = count_sign_changes(T_r, T_r.tau_max() - 50.0, T_r.tau_max());
    add("T_r oscillates (at least 10 sign changes over a tau-span of 50)", thm, status_of(n >= 10),
        "sign changes: " + std::to_string(n));
  };
  auto cycle_of = [&](const Trajectory& t, SpecialKind kind) {
    auto cyc = detect_limit_cycle(t, pr, cfg.cycle);
    if (cyc) {
      cyc->source = std::string(to_string(kind));
      rep.cycles.push_back(*cyc);
    }
    return cyc;
  };
  // O_r and O_eps are reported side by side with their distance.
  auto cycle_pair = [&](const std::optional<CycleInfo>& o_r) {
    const Shot te = shoot_double_zero(pr, 1.0, sc);
    rep.digests.push_back(digest(te));
    const auto o_eps = cycle_of(te.trajectory, SpecialKind::T_eps);
    if (o_r && o_eps) {
      rep.cycle_distance = hausdorff_distance(o_r->orbit, o_eps->orbit);
      rep.notes.push_back("cycles of T_r and T_eps reported separately; their equality is not decided");
    }
  };
  auto phi_check = [&](bool positive, const std::string& thm) {
    try {
      rep.phi_value = phi_of_alpha(pr.N, pr.p, a, cfg.alpha_c.phi);
      add(positive ? "phi(alpha) > 0" : "phi(alpha) < 0", thm,
          status_of(positive ? *rep.phi_value > 0.0 : *rep.phi_value < 0.0));
    } catch (const AnalysisError& e) {
      add(positive ? "phi(alpha) > 0" : "phi(alpha) < 0", thm, CheckStatus::untested, e.what());
    }
  };

  if (tag == "pin") {
    if (a < pr.N) {
      add("T_r strict constant sign", "pin", status_of(no_zero), zeros);
      add("T_r ends at A_alpha", "pin", status_of(dr.label_end == AsymptoticLabel::A_alpha),
          std::string(to_string(dr.label_end)));
    } else if (a == pr.N) {
      add("T_r has compact support", "pin", status_of(T_r.termination == Termination::double_zero));
    } else {
      add("T_r has at least one simple zero", "pin", status_of(dr.zero_count >= 1), zeros);
    }
  } else if (tag == "mel" || tag == "int") {
    add("T_r strict constant sign", tag, status_of(no_zero), zeros);
    add("T_r converges to M_ell", tag, status_of(dr.label_end == AsymptoticLabel::A_gamma),
        std::string(to_string(dr.label_end)));
  } else if (tag == "pom") {
    if (a != -c.p_prime) {
      add("T_r has exactly one zero", "pom", status_of(dr.zero_count == 1), zeros);
      add("T_r converges to -M_ell or M_ell", "pom", status_of(dr.label_end == AsymptoticLabel::A_gamma),
          std::string(to_string(dr.label_end)));
    } else {
      add("T_r has exactly one zero", "pom", CheckStatus::untested, "alpha = -p'");
    }
    tail_radius_check("pom");
  } else if (tag == "osc") {
    oscillation_check("osc");
    tail_radius_check("osc");
    cycle_of(T_r, SpecialKind::T_r);
    const Shot te = shoot_double_zero(pr, 1.0, sc);
    rep.digests.push_back(digest(te));
    const auto cyc = cycle_of(te.trajectory, SpecialKind::T_eps);
    add("T_eps has limit cycle", "osc", status_of(cyc.has_value()),
        cyc ? "period " + std::to_string(cyc->period_tau) : "no cycle certified");
  } else if (tag == "sou" || tag == "orb" || tag == "ent") {
    const Shot ta = shoot_T_alpha(pr, sc);
    rep.digests.push_back(digest(ta));
    const TrajectoryDigest da = rep.digests.back();
    if (tag == "sou") {
      add("T_alpha converges to M_ell backward", "sou", status_of(da.label_start == AsymptoticLabel::A_gamma),
          std::string(to_string(da.label_start)));
      oscillation_check("sou");
      cycle_pair(cycle_of(T_r, SpecialKind::T_r));
    } else if (tag == "orb") {
      oscillation_check("orb");
      cycle_pair(cycle_of(T_r, SpecialKind::T_r));
      const auto cyc = cycle_of(ta.trajectory, SpecialKind::T_alpha);
      add("T_alpha tends to a cycle around M_ell backward", "orb",
          status_of(cyc.has_value() && !cyc->around_origin), std::string(to_string(da.label_start)));
      phi_check(true, "clin");
    } else {
      add("T_r has at least two zeros", "ent", status_of(dr.zero_count >= 2), zeros);
      phi_check(false, "clin");
    }
    tail_radius_check(tag);
  }
  return rep;
}

}  // namespace plap
