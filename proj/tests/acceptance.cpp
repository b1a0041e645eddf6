// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Each criterion also has to finish inside its runtime budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "plap/analysis.hpp"
#include "plap/oracles.hpp"
#include "plap/trajectories.hpp"

using namespace plap;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ProfileSample profile_at(const Trajectory& tr, double r) {
  const auto s = tr.state_at(std::log(r));
  if (!s) throw std::runtime_error("radius " + fmt(r) + " outside the trajectory");
  return to_profile(*s, tr.params);
}

Outcome critical_exponent() {
  AlphaCConfig cfg;
  cfg.force_bisection = true;
  const auto r = find_alpha_c(1, 3.0, cfg);
  const double err = std::abs(r.value + 2.0);
  return {err <= 1e-3 && !r.closed_form, "bisection alpha_c = " + fmt(r.value) + " after " +
                                             std::to_string(r.evaluations) + " phi evaluations, |alpha_c + 2| = " +
                                             fmt(err)};
}

Outcome hopf_threshold() {
  const double a_star = derive_constants({1, 3.0, -2.2, -1}).alpha_star;
  const double rel = std::abs(a_star + 15.0 / 7.0) / (15.0 / 7.0);
  auto type_at = [](double alpha) {
    for (const auto& s : classify_stationary_points({1, 3.0, alpha, -1}))
      if (s.name == "M_ell") return s.local_type;
    throw std::runtime_error("M_ell missing");
  };
  const auto below = type_at(-2.2), above = type_at(-2.1);
  return {rel <= 1e-12 && below == LocalType::source_spiral && above == LocalType::sink_spiral,
          "alpha_star rel err " + fmt(rel) + ", M_ell at -2.2: " + std::string(to_string(below)) +
              ", at -2.1: " + std::string(to_string(above))};
}

Outcome oracle_fidelity() {
  const Oracle b({OracleKind::barenblatt, 2, 3.0, 1, 1.0});
  const auto tr = integrate(b.params(), b.phase(0.01), Direction::forward);
  const double hi = 0.9 * std::pow(3.0, 2.0 / 3.0);
  double worst = 0.0;
  auto visit = [&](double r) {
    const double exact = std::pow(1.0 - std::pow(r, 1.5) / 3.0, 2.0);
    worst = std::max(worst, std::abs(profile_at(tr, r).w - exact) / exact);
  };
  for (int i = 0; i <= 1000; ++i) visit(0.01 * std::pow(hi / 0.01, i / 1000.0));
  for (const auto& s : tr.samples) {
    const double r = std::exp(s.tau);
    if (r >= 0.01 && r <= hi) visit(r);
  }
  return {worst <= 1e-6, "sup relative error " + fmt(worst) + " on [0.01, " + fmt(hi) + "]"};
}

Outcome double_zero_law() {
  struct Case {
    int N;
    double alpha;
    int eps;
  };
  bool ok = true;
  std::ostringstream os;
  for (const auto& cs : {Case{1, 1.0, 1}, Case{2, -0.5, 1}, Case{1, -1.0, -1}, Case{3, 2.0, -1}}) {
    const ProblemParams pr{cs.N, 3.0, cs.alpha, cs.eps};
    ShootConfig cfg;
    cfg.integration.max_time_span = 3.0;
    const auto tr = shoot_double_zero(pr, 1.0, cfg).trajectory;
    // least squares of ln w against ln d, d = |r - r_bar| in [1e-5, 1e-3]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = 41;
    for (int i = 0; i < n; ++i) {
      const double d = 1e-5 * std::pow(100.0, i / (n - 1.0));
      const double x = std::log(d), y = std::log(std::abs(profile_at(tr, 1.0 - cs.eps * d).w));
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double k = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double amp = std::exp((sy - k * sx) / n);
    const bool good = std::abs(k - 2.0) <= 0.02 && std::abs(amp - 0.25) <= 0.01;
    ok = ok && good;
    os << describe(pr) << ": exponent " << fmt(k) << ", amplitude " << fmt(amp) << "; ";
  }
  return {ok, os.str()};
}

Outcome oscillation_regime() {
  const ProblemParams pr{1, 3.0, -4.0, -1};
  const auto tr = shoot_regular(pr).trajectory;
  const double t1 = tr.tau_max();
  const int zeros = count_sign_changes(tr, t1 - 50.0, t1);
  const auto cycle = detect_limit_cycle(tr, pr);
  const double bound = 1.1 / (4.0 * gamma_of(pr.p));
  double r_max = 0.0;
  for (const auto& s : tr.samples)
    if (s.tau >= t1 - 50.0) r_max = std::max(r_max, nmo_radius(s, pr));
  const double gap = cycle ? cycle->return_gap : INFINITY;
  return {zeros >= 10 && cycle && gap <= 1e-8 && r_max <= bound,
          std::to_string(zeros) + " sign changes over the last 50 tau, cycle gap " + fmt(gap) + ", tail R max " +
              fmt(r_max) + " <= " + fmt(bound)};
}

Outcome sink_convergence() {
  const auto tr = shoot_regular({2, 3.0, -6.0, 1}).trajectory;
  const auto& t = tr.terminal();
  const double dist = std::max(std::abs(t.y - 1.0 / 15.0), std::abs(t.Y + 1.0 / 25.0));
  return {dist <= 1e-4, "terminal (" + fmt(t.y) + ", " + fmt(t.Y) + "), distance " + fmt(dist) + ", termination " +
                            std::string(to_string(tr.termination))};
}

Outcome phi_signs() {
  const double a = phi_of_alpha(1, 3.0, -2.1), b = phi_of_alpha(1, 3.0, -2.0), c = phi_of_alpha(1, 3.0, -1.9);
  return {a > 0.0 && 0.0 > c && a > b && b > c,
          "phi(-2.1) = " + fmt(a) + ", phi(-2) = " + fmt(b) + ", phi(-1.9) = " + fmt(c)};
}

Outcome zero_counts() {
  std::mt19937_64 rng(20261019);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 4);
  auto seed = [&] { return PhaseState{0.0, 2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0}; };
  int bad_a = 0, bad_b = 0, bad_c = 0;
  // eps = 1, alpha <= N: at most one zero
  for (int i = 0; i < 200; ++i) {
    const int N = dim(rng);
    const double p = 2.2 + 2.8 * u(rng);
    double alpha = N - (8.0 + N) * u(rng);
    if (alpha == 0.0) alpha = 0.5;
    if (count_orbit_zeros({N, p, alpha, 1}, seed(), 60.0) > 1) ++bad_a;
  }
  // eps = -1, -p' <= alpha < min(0, eta): at most two zeros
  for (int i = 0; i < 200; ++i) {
    const int N = dim(rng);
    const double p = 2.2 + 2.8 * u(rng);
    const double pp = p / (p - 1.0);
    const double top = std::min(0.0, eta_of(N, p));
    if (!(top > -pp)) { --i; continue; }
    const double alpha = -pp + (top + pp) * u(rng) * 0.999;
    if (count_orbit_zeros({N, p, alpha, -1}, seed(), 60.0) > 2) ++bad_b;
  }
  // T_r with eps = 1, alpha > N: at least one zero
  ShootConfig sc;
  sc.consistency_check = false;
  for (int i = 0; i < 200; ++i) {
    const int N = dim(rng);
    const double p = 2.2 + 2.8 * u(rng);
    const double alpha = N + 1e-3 + 20.0 * u(rng);
    const auto shot = shoot_regular({N, p, alpha, 1}, sc);
    if (count_sign_changes(shot.trajectory) < 1) ++bad_c;
  }
  return {bad_a == 0 && bad_b == 0 && bad_c == 0,
          "violations: eps=1 alpha<=N " + std::to_string(bad_a) + "/200, eps=-1 band " + std::to_string(bad_b) +
              "/200, T_r eps=1 alpha>N " + std::to_string(bad_c) + "/200"};
}

// Profile equation residual of w_xi(r) = xi^{-gamma} w(xi r), with the flux
// derivative taken by a five-point difference of the dense output.
double scaling_residual(const Trajectory& tr, double xi, double r) {
  const auto& pr = tr.params;
  const double g = gamma_of(pr.p);
  auto flux = [&](double rho) {
    const auto w = profile_at(tr, rho);
    return signed_pow(w.dw, pr.p - 1.0);
  };
  const double rho = xi * r, h = 1e-3 * rho;
  const double dA = (flux(rho - 2 * h) - 8 * flux(rho - h) + 8 * flux(rho + h) - flux(rho + 2 * h)) / (12 * h);
  const auto w = profile_at(tr, rho);
  const double k = (1.0 - g) * (pr.p - 1.0);
  const double A_xi = std::pow(xi, k) * signed_pow(w.dw, pr.p - 1.0);
  const double dA_xi = std::pow(xi, k + 1.0) * dA;
  const double w_xi = std::pow(xi, -g) * w.w;
  const double dw_xi = std::pow(xi, 1.0 - g) * w.dw;
  const double terms[] = {dA_xi, (pr.N - 1.0) * A_xi / r, r * dw_xi, pr.alpha * w_xi};
  double scale = 0.0;
  for (double t : terms) scale = std::max(scale, std::abs(t));
  return std::abs(terms[0] + terms[1] + pr.eps * (terms[2] + terms[3])) / scale;
}

Outcome invariant_suite() {
  std::ostringstream os;
  bool ok = true;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // identity chain on random parameters
  double id_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int N = 1 + static_cast<int>(6 * u(rng));
    const double p = 2.05 + 8.0 * u(rng);
    const auto c = derive_constants({N, p, -1.0 - u(rng), u(rng) < 0.5 ? 1 : -1});
    const double a = c.eta + c.gamma, b = (N + c.gamma) / (p - 1.0), d = (N - c.eta) / (p - 2.0);
    id_err = std::max({id_err, std::abs(a - b) / std::abs(b), std::abs(b - d) / std::abs(b)});
  }
  ok = ok && id_err <= 1e-12;
  os << "identity " << fmt(id_err) << "; ";

  // energy is non-increasing along eps = 1 orbits
  int energy_bad = 0;
  IntegrationConfig tight;
  tight.rel_tol = 1e-11;
  tight.abs_tol = 1e-14;
  for (int i = 0; i < 20; ++i) {
    const ProblemParams pr{1 + static_cast<int>(3 * u(rng)), 2.5 + 2.0 * u(rng), -3.0 + 6.0 * u(rng) + 1e-3, 1};
    IntegrationConfig ic = tight;
    ic.max_time_span = 8.0;
    const auto tr = integrate(pr, PhaseState{0.0, 2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0}, Direction::forward, ic);
    double prev = INFINITY;
    for (const auto& s : tr.samples) {
      const double e = energy(to_profile(s, pr), pr);
      if (e > prev + 1e-9 * std::max(1.0, std::abs(prev))) ++energy_bad;
      prev = e;
    }
  }
  ok = ok && energy_bad == 0;
  os << "energy increases " << energy_bad << "; ";

  // J_N at alpha = N over a unit tau span
  double jn = 0.0;
  for (int e : {1, -1}) {
    for (int N : {1, 2, 3}) {
      const ProblemParams pr{N, 3.0, static_cast<double>(N), e};
      IntegrationConfig ic = tight;
      ic.max_time_span = 1.0;
      const PhaseState start{0.0, 1.0, -0.5};
      const double j0 = J_N(start, pr);
      const auto tr = integrate(pr, start, Direction::forward, ic);
      for (const auto& s : tr.samples) jn = std::max(jn, std::abs(J_N(s, pr) - j0) / std::abs(j0));
    }
  }
  ok = ok && jn <= 1e-8;
  os << "J_N drift " << fmt(jn) << "; ";

  // scaling covariance of integrated profiles
  double sc_res = 0.0;
  for (const ProblemParams pr : {ProblemParams{2, 3.0, 1.0, 1}, ProblemParams{1, 3.0, -1.2, -1},
                                 ProblemParams{3, 4.0, -0.5, -1}}) {
    ShootConfig cfg;
    cfg.consistency_check = false;
    cfg.integration = tight;
    cfg.integration.max_time_span = 20.0;
    const auto tr = shoot_regular(pr, cfg).trajectory;
    for (double xi : {0.5, 2.0})
      for (double r : {0.05, 0.1, 0.3, 0.6}) sc_res = std::max(sc_res, scaling_residual(tr, xi, r));
  }
  ok = ok && sc_res <= 1e-8;
  os << "scaling residual " << fmt(sc_res) << "; ";

  // line invariants: sigma = eps at alpha = N, zeta = eta at alpha = eta,
  // zeta + eps N sigma = alpha at alpha = -p'
  double line = 0.0;
  for (int e : {1, -1}) {
    for (int N : {1, 2}) {
      ShootConfig cfg;
      cfg.consistency_check = false;
      cfg.integration = tight;
      cfg.integration.max_time_span = 10.0;
      const ProblemParams bn{N, 3.0, static_cast<double>(N), e};
      for (const auto& s : shoot_regular(bn, cfg).trajectory.samples) {
        if (s.y == 0.0 || std::exp(s.tau) > 2.0) continue;
        line = std::max(line, std::abs(convert(s, Chart::Q, bn).x[1] - e));
      }
      const ProblemParams qd{N, 3.0, -1.5, e};
      for (const auto& s : shoot_regular(qd, cfg).trajectory.samples) {
        if (s.y == 0.0 || std::exp(s.tau) > 1.0) continue;
        const auto q = convert(s, Chart::Q, qd);
        line = std::max(line, std::abs(q.x[0] + e * N * q.x[1] - qd.alpha));
      }
      const Oracle h({OracleKind::p_harmonic, N, 3.0, e, 1.0});
      for (double r : {1e-6, 1e-3, 0.1, 1.0, 10.0})
        line = std::max(line, std::abs(convert(h.phase(r), Chart::Q, h.params()).x[0] - eta_of(N, 3.0)));
    }
  }
  ok = ok && line <= 1e-9;
  os << "line invariants " << fmt(line);
  return {ok, os.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "critical exponent, exact case", 60.0, critical_exponent},
      {2, "Hopf threshold", 1.0, hopf_threshold},
      {3, "oracle fidelity", 1.0, oracle_fidelity},
      {4, "double-zero local law", 5.0, double_zero_law},
      {5, "oscillation regime", 10.0, oscillation_regime},
      {6, "sink convergence", 5.0, sink_convergence},
      {7, "phi monotonicity and signs", 30.0, phi_signs},
      {8, "zero-count properties", 120.0, zero_counts},
      {9, "invariant suite", 60.0, invariant_suite},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.ok && secs <= c.budget_s;
    failures += pass ? 0 : 1;
    std::printf("criterion %d %s: %s (%s; %.2f s of %.0f s)\n", c.id, pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                secs, c.budget_s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
