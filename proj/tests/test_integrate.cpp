#include <doctest.h>

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "plap/integrate.hpp"
#include "plap/oracles.hpp"

using namespace plap;

namespace {

// Independent reference: the profile equation in r for (w, A = |w'|^{p-2} w').
struct ProfileOde {
  ProblemParams pr;
  void operator()(const std::array<double, 2>& x, std::array<double, 2>& dx, double r) const {
    const double dw = signed_pow(x[1], 1.0 / (pr.p - 1.0));
    dx[0] = dw;
    dx[1] = -(pr.N - 1.0) * x[1] / r - pr.eps * (r * dw + pr.alpha * x[0]);
  }
};

ProfileSample reference(const ProblemParams& pr, ProfileSample start, double r_end) {
  using namespace boost::numeric::odeint;
  std::array<double, 2> x{start.w, signed_pow(start.dw, pr.p - 1.0)};
  auto stepper = make_controlled(1e-13, 1e-13, runge_kutta_dopri5<std::array<double, 2>>());
  integrate_adaptive(stepper, ProfileOde{pr}, x, start.r, r_end, (r_end - start.r) * 1e-4);
  return {r_end, x[0], signed_pow(x[1], 1.0 / (pr.p - 1.0))};
}

bool increasing(const Trajectory& tr) {
  for (std::size_t i = 1; i < tr.samples.size(); ++i)
    if (!(tr.samples[i].tau > tr.samples[i - 1].tau)) return false;
  for (std::size_t i = 1; i < tr.events.size(); ++i)
    if (tr.events[i].tau < tr.events[i - 1].tau) return false;
  return true;
}

}  // namespace

TEST_CASE("Barenblatt data is reproduced up to the support edge") {
  const Oracle b({OracleKind::barenblatt, 2, 3.0, 1, 1.0});
  const auto& pr = b.params();
  const double edge = *b.edge();
  const auto tr = integrate(pr, b.phase(0.01), Direction::forward);
  CHECK(increasing(tr));
  CHECK(tr.termination == Termination::double_zero);
  CHECK(tr.extended_by_zero);
  CHECK(std::abs(std::exp(tr.tau_max()) - edge) < 1e-5 * edge);
  const auto dz = tr.events_of(EventKind::double_zero_capture);
  REQUIRE(dz.size() == 1);

  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double r = 0.01 * std::pow(0.9 * edge / 0.01, i / 400.0);
    const auto s = tr.state_at(std::log(r));
    REQUIRE(s.has_value());
    const double w = to_profile(*s, pr).w;
    worst = std::max(worst, std::abs(w - b.sample(r).w) / b.sample(r).w);
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("backward integration retraces Barenblatt") {
  const Oracle b({OracleKind::barenblatt, 1, 4.0, 1, 2.0});
  const auto& pr = b.params();
  IntegrationConfig cfg;
  cfg.max_time_span = std::log(1.0 / 0.02);
  const auto tr = integrate(pr, b.phase(1.0), Direction::backward, cfg);
  CHECK(increasing(tr));
  CHECK(tr.termination == Termination::time_limit);
  CHECK(tr.tau_min() == doctest::Approx(std::log(0.02)).epsilon(1e-12));
  const auto w = to_profile(tr.samples.front(), pr);
  CHECK(std::abs(w.w - b.sample(0.02).w) < 1e-7 * b.sample(0.02).w);
}

TEST_CASE("y zero crossing is located on the quadratic family") {
  const Oracle q({OracleKind::quadratic, 2, 3.0, -1, 0.8});
  const auto& pr = q.params();
  const double pp = 1.5;
  const double root = std::pow(2.0 * std::pow(0.8 * pp, 1.0), 1.0 / pp);
  IntegrationConfig cfg;
  cfg.max_time_span = std::log(3.0 * root / 0.1);
  const auto tr = integrate(pr, q.phase(0.1), Direction::forward, cfg);
  const auto zs = tr.events_of(EventKind::y_zero_crossing);
  REQUIRE(zs.size() == 1);
  CHECK(std::abs(zs[0].tau - std::log(root)) < 1e-8);
  CHECK(tr.events_of(EventKind::Y_zero_crossing).empty());
}

TEST_CASE("crossing Y = 0 agrees with an independent profile integration") {
  for (int e : {1, -1}) {
    for (double p : {2.5, 3.0, 4.0}) {
      const ProblemParams pr{2, p, e > 0 ? 3.0 : -1.5, e};
      const ProfileSample start{1.0, 1.0, 0.8};
      const double r_end = 3.0;
      IntegrationConfig cfg;
      cfg.max_time_span = std::log(r_end);
      cfg.rel_tol = 1e-11;
      cfg.abs_tol = 1e-13;
      EventSpecs ev;
      ev.capture = false;  // eps = 1 orbits settle on the A' cone before r_end
      const auto tr = integrate(pr, from_profile(start, pr), Direction::forward, cfg, ev);
      CAPTURE(e);
      CAPTURE(p);
      CHECK(tr.termination == Termination::time_limit);
      CHECK(tr.events_of(EventKind::Y_zero_crossing).size() >= 1);
      const auto ref = reference(pr, start, r_end);
      const auto got = to_profile(tr.samples.back(), pr);
      CHECK(std::abs(got.w - ref.w) < 1e-7 * std::max(1.0, std::abs(ref.w)));
      CHECK(std::abs(got.dw - ref.dw) < 1e-6 * std::max(1.0, std::abs(ref.dw)));
    }
  }
}

TEST_CASE("J_N is conserved when alpha = N, across axis crossings") {
  for (int e : {1, -1}) {
    const ProblemParams pr{1, 3.0, 1.0, e};
    IntegrationConfig cfg;
    cfg.max_time_span = 1.0;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-14;
    const PhaseState start{0.0, 1.0, -0.5};
    const double j0 = J_N(start, pr);
    const auto tr = integrate(pr, start, Direction::forward, cfg);
    double drift = 0.0;
    for (const auto& s : tr.samples) drift = std::max(drift, std::abs(J_N(s, pr) - j0));
    CHECK(drift <= 1e-8 * std::abs(j0));
  }
}

TEST_CASE("capture at a sink and escape") {
  const ProblemParams pr{2, 3.0, -6.0, 1};
  const auto m = M_ell(pr);
  const auto tr = integrate(pr, PhaseState{0.0, m[0] * 1.01, m[1] * 0.99}, Direction::forward);
  CHECK(tr.termination == Termination::stationary_capture);
  REQUIRE(!tr.events.empty());
  CHECK(tr.events.back().kind == EventKind::stationary_capture);
  CHECK(tr.events.back().tag == kMell);
  CHECK(std::hypot(tr.terminal().y - m[0], tr.terminal().Y - m[1]) < 1e-6 * std::hypot(m[0], m[1]));

  // a sink repels in backward time: no capture there
  CHECK_FALSE(capture_test(m[0], m[1] * (1 + 1e-9), pr, Direction::backward).captured);
  CHECK(capture_test(m[0], m[1] * (1 + 1e-9), pr, Direction::forward).captured);

  // y' = -gamma y - ... makes y blow up backward
  IntegrationConfig cfg;
  const auto esc = integrate(pr, PhaseState{0.0, 5.0, 1.0}, Direction::backward, cfg);
  CHECK(esc.termination == Termination::escape);
  CHECK(esc.events.front().kind == EventKind::escape_to_infinity);
}

TEST_CASE("sections are located with orientation") {
  // around the origin for eps = -1, alpha = -4: the positive Y axis is met
  // with y decreasing
  const ProblemParams pr{1, 3.0, -4.0, -1};
  EventSpecs ev;
  SectionSpec sec;
  sec.a = 1.0;
  sec.b = 0.0;
  sec.c = 0.0;
  sec.orientation = -1;
  sec.accept = [](const Vec2& x) { return x[1] > 0.0; };
  ev.sections.push_back(sec);
  IntegrationConfig cfg;
  cfg.max_time_span = 30.0;
  const auto tr = integrate(pr, PhaseState{0.0, 0.0, 0.1}, Direction::forward, cfg, ev);
  const auto hits = tr.events_of(EventKind::section_crossing);
  CHECK(hits.size() >= 3);
  for (const auto& h : hits) {
    CHECK(std::abs(h.y) < 1e-10);
    CHECK(h.Y > 0.0);
  }
}

TEST_CASE("dense output stays within ten times the relative tolerance") {
  const Oracle b({OracleKind::barenblatt, 3, 3.0, -1, 0.5});
  const auto& pr = b.params();
  IntegrationConfig cfg;
  cfg.max_time_span = 2.0;
  const auto tr = integrate(pr, b.phase(0.5), Direction::forward, cfg);
  double worst = 0.0;
  for (int i = 0; i <= 997; ++i) {
    const double tau = std::log(0.5) + 2.0 * i / 997.0;
    const auto s = tr.state_at(tau);
    REQUIRE(s.has_value());
    const auto ex = b.phase(std::exp(tau));
    worst = std::max(worst, std::abs(s->y - ex.y) / std::abs(ex.y));
  }
  CHECK(worst <= 10.0 * cfg.rel_tol);
}

TEST_CASE("chart integration records chart samples and terminal sections") {
  const ProblemParams pr{1, 3.0, -2.0, -1};
  const auto c = derive_constants(pr);
  // along the invariant line s = 1 + alpha g of chart R
  ChartState start{Chart::R, {0.1, 1.0 + pr.alpha * 0.1}, 0.0, 0.0, 1};
  EventSpecs ev;
  SectionSpec sec;
  sec.a = 1.0;
  sec.c = 1.0 / c.gamma;
  sec.terminal = true;
  ev.sections.push_back(sec);
  const auto tr = integrate(pr, start, Direction::forward, IntegrationConfig{}, ev);
  CHECK(tr.termination == Termination::section);
  REQUIRE(!tr.chart_samples.empty());
  for (const auto& cs : tr.chart_samples) CHECK(std::abs(cs.x[1] - (1.0 + pr.alpha * cs.x[0])) < 1e-8);
  CHECK(std::abs(tr.events.back().chart_x[0] - 1.0 / c.gamma) < 1e-10);
}

// Backward integration amplifies the forward error by the area expansion
// exp(-int div), which exceeds 1e9 on orbits squeezed onto the A_alpha cone.
// The 100 rel_tol allowance is therefore scaled by that factor.
TEST_CASE("property: time reversal returns to the start") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    const ProblemParams pr{1 + i % 3, 3.0 + 0.5 * (i % 4), u(rng) > 0 ? 1.5 : -1.5, i % 2 ? 1 : -1};
    const auto c = derive_constants(pr);
    IntegrationConfig cfg;
    cfg.max_time_span = 2.0;
    const PhaseState start{0.0, u(rng), u(rng)};
    const auto fwd = integrate(pr, start, Direction::forward, cfg);
    if (fwd.termination != Termination::time_limit || !fwd.events_of(EventKind::Y_zero_crossing).empty()) continue;
    const auto back = integrate(pr, fwd.samples.back(), Direction::backward, cfg);
    if (!back.events_of(EventKind::Y_zero_crossing).empty()) continue;
    double div = 0.0;
    for (std::size_t k = 1; k < fwd.samples.size(); ++k) {
      const auto &a = fwd.samples[k - 1], &b = fwd.samples[k];
      div += 0.5 * (divergence_S(a.Y, pr, c) + divergence_S(b.Y, pr, c)) * (b.tau - a.tau);
    }
    const double amplification = std::max(1.0, std::exp(-div));
    const auto& end = back.samples.front();
    CAPTURE(describe(pr));
    CAPTURE(amplification);
    CHECK(end.tau == doctest::Approx(0.0));
    const double scale = std::max({1.0, std::abs(start.y), std::abs(start.Y)});
    CHECK(std::max(std::abs(end.y - start.y), std::abs(end.Y - start.Y)) <=
          100.0 * cfg.rel_tol * scale * amplification);
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("property: halving the tolerances moves terminal states by little") {
  struct Run {
    std::string name;
    std::function<Trajectory(const IntegrationConfig&)> make;
  };
  const Oracle b({OracleKind::barenblatt, 2, 3.0, 1, 1.0});
  const std::vector<Run> runs = {
      {"Barenblatt to its edge", [&](const IntegrationConfig& c) { return integrate(b.params(), b.phase(0.01), Direction::forward, c); }},
      {"sink at M_ell", [](const IntegrationConfig& c) { return integrate({2, 3.0, -6.0, 1}, PhaseState{0.0, 0.3, 0.1}, Direction::forward, c); }},
      {"oscillation, 50 tau",
       [](IntegrationConfig c) {
         c.max_time_span = 50.0;
         return integrate({1, 3.0, -4.0, -1}, PhaseState{0.0, 0.2, 0.0}, Direction::forward, c);
       }},
      {"alpha = -2.1 near M_ell",
       [](IntegrationConfig c) {
         c.max_time_span = 30.0;
         return integrate({1, 3.0, -2.1, -1}, PhaseState{0.0, 0.03, -0.005}, Direction::forward, c);
       }},
  };
  for (const auto& run : runs) {
    IntegrationConfig coarse;
    IntegrationConfig fine = coarse;
    fine.rel_tol /= 2.0;
    fine.abs_tol /= 2.0;
    const auto a = run.make(coarse), c = run.make(fine);
    const auto& ta = a.terminal();
    const auto& tc = c.terminal();
    // Global error estimate of the coarse run: the local tolerances summed over
    // its accepted steps, plus the capture radius when it ends in a capture.
    double estimate = 0.0;
    for (const auto& s : a.samples) estimate += coarse.abs_tol + coarse.rel_tol * std::max(std::abs(s.y), std::abs(s.Y));
    if (a.termination == Termination::stationary_capture)
      estimate += coarse.capture_rel * std::max(std::abs(ta.y), std::abs(ta.Y));
    const double change = std::max(std::abs(ta.y - tc.y), std::abs(ta.Y - tc.Y));
    CAPTURE(run.name);
    CAPTURE(change / estimate);
    CHECK(a.termination == c.termination);
    CHECK(change <= 10.0 * estimate);
  }
}
