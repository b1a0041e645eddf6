#include "plap/systems.hpp"

#include <cmath>

namespace plap {

std::string_view to_string(Chart chart) {
  switch (chart) {
    case Chart::S: return "S";
    case Chart::Q: return "Q";
    case Chart::P: return "P";
    case Chart::R: return "R";
    case Chart::R_beta: return "R_beta";
  }
  return "?";
}

double signed_pow(double x, double e) {
  if (x == 0.0) return 0.0;
  return x > 0.0 ? std::pow(x, e) : -std::pow(-x, e);
}

double phi_inv(double Y, double p) { return signed_pow(Y, 1.0 / (p - 1.0)); }

Vec2 field(Chart chart, const Vec2& x, const ProblemParams& params) {
  return field(chart, x, params, derive_constants(params));
}

Vec2 field(Chart chart, const Vec2& x, const ProblemParams& pr, const DerivedConstants& c) {
  const double e = pr.eps;
  const double a = pr.alpha;
  const double N = pr.N;
  const double pm1 = pr.p - 1.0;
  switch (chart) {
    case Chart::S: {
      const double u = phi_inv(x[1], pr.p);
      return {-c.gamma * x[0] - u, -(c.gamma + N) * x[1] + e * (a * x[0] - u)};
    }
    case Chart::Q: {
      const double z = x[0], sg = x[1];
      if (sg == 0.0) throw DomainError("chart Q is undefined at sigma = 0");
      return {z * (z - c.eta + e * (a - z) / (pm1 * sg)), e * (a - z) + (z - N) * sg};
    }
    case Chart::P: {
      const double z = x[0], ps = x[1];
      return {z * (z - c.eta + e * (a - z) * ps / pm1), ps * (N - z + e * (z - a) * ps)};
    }
    case Chart::R: {
      const double g = x[0], s = x[1];
      return {g * (s * (1.0 + c.eta * g) + e * (1.0 + a * g) / pm1),
              -s * (e * (1.0 + a * g) + (1.0 + N * g) * s)};
    }
    case Chart::R_beta: {
      if (c.beta == 0.0) throw DomainError("chart R_beta needs beta != 0");
      const double g = x[0], S = x[1], b = c.beta;
      const double s = b * S;
      return {g * (s * (1.0 + c.eta * g) + e * (1.0 + a * g) / pm1),
              -S * (e * (1.0 + a * g) + (1.0 + N * g) * s)};
    }
  }
  throw DomainError("unknown chart");
}

double divergence_S(double Y, const ProblemParams& pr, const DerivedConstants& c) {
  const double base = -2.0 * c.gamma - pr.N;
  if (Y == 0.0) return pr.eps > 0 ? -INFINITY : INFINITY;
  return base - pr.eps * std::pow(std::abs(Y), (2.0 - pr.p) / (pr.p - 1.0)) / (pr.p - 1.0);
}

ChartState convert(const PhaseState& s, Chart target, const ProblemParams& pr) {
  ChartState out;
  out.chart = target;
  out.time = s.tau;
  out.tau = s.tau;
  out.sign = s.y < 0.0 ? -1 : 1;
  if (target == Chart::S) {
    out.x = {s.y, s.Y};
    return out;
  }
  if (s.y == 0.0) throw DomainError("chart needs y != 0");
  const double z = phi_inv(s.Y, pr.p) / s.y;
  const double sg = s.Y / s.y;
  switch (target) {
    case Chart::Q: out.x = {z, sg}; return out;
    case Chart::P:
      if (s.Y == 0.0) throw DomainError("chart P needs Y != 0");
      out.x = {z, s.y / s.Y};
      return out;
    case Chart::R:
    case Chart::R_beta: {
      if (s.Y == 0.0) throw DomainError("chart R needs Y != 0");
      out.x = {-1.0 / z, -sg};
      if (target == Chart::R_beta) {
        const double b = pr.alpha * (pr.p - 2.0) + pr.p;
        if (b == 0.0) throw DomainError("chart R_beta needs beta != 0");
        out.x[1] /= b;
      }
      return out;
    }
    default: break;
  }
  throw DomainError("unknown chart");
}

namespace {

PhaseState from_zeta_sigma(double z, double sg, double tau, int sign, double p) {
  if (z == 0.0 || sg == 0.0 || !std::isfinite(z) || !std::isfinite(sg)) {
    throw DomainError("point lies on a chart boundary");
  }
  if ((z > 0.0) != (sg > 0.0)) throw DomainError("zeta and sigma must share a sign");
  const double y = sign * std::pow(std::abs(sg) * std::pow(std::abs(z), 1.0 - p), 1.0 / (p - 2.0));
  return {tau, y, sg * y};
}

}  // namespace

PhaseState to_phase(const ChartState& c, const ProblemParams& pr) {
  switch (c.chart) {
    case Chart::S: return {c.tau, c.x[0], c.x[1]};
    case Chart::Q: return from_zeta_sigma(c.x[0], c.x[1], c.tau, c.sign, pr.p);
    case Chart::P:
      if (c.x[1] == 0.0) throw DomainError("point lies on a chart boundary");
      return from_zeta_sigma(c.x[0], 1.0 / c.x[1], c.tau, c.sign, pr.p);
    case Chart::R:
    case Chart::R_beta: {
      if (c.x[0] == 0.0) throw DomainError("point lies on a chart boundary");
      double s = c.x[1];
      if (c.chart == Chart::R_beta) s *= pr.alpha * (pr.p - 2.0) + pr.p;
      return from_zeta_sigma(-1.0 / c.x[0], -s, c.tau, c.sign, pr.p);
    }
  }
  throw DomainError("unknown chart");
}

ProfileSample to_profile(const PhaseState& s, const ProblemParams& pr) {
  const double g = gamma_of(pr.p);
  const double r = std::exp(s.tau);
  return {r, std::pow(r, g) * s.y, -phi_inv(s.Y, pr.p) * std::pow(r, g - 1.0)};
}

PhaseState from_profile(const ProfileSample& w, const ProblemParams& pr) {
  if (!(w.r > 0.0)) throw DomainError("profile samples need r > 0");
  const double g = gamma_of(pr.p);
  const double flux = signed_pow(w.dw, pr.p - 1.0);
  return {std::log(w.r), std::pow(w.r, -g) * w.w,
          -std::pow(w.r, (1.0 - g) * (pr.p - 1.0)) * flux};
}

double J_N(const ProfileSample& w, const ProblemParams& pr) {
  const double flux = signed_pow(w.dw, pr.p - 1.0);
  return std::pow(w.r, pr.N) * (w.w + pr.eps * flux / w.r);
}

double J_N(const PhaseState& s, const ProblemParams& pr) {
  return std::exp((pr.N + gamma_of(pr.p)) * s.tau) * (s.y - pr.eps * s.Y);
}

double J_alpha(const ProfileSample& w, const ProblemParams& pr) {
  return std::pow(w.r, pr.alpha - pr.N) * J_N(w, pr);
}

double energy(const ProfileSample& w, const ProblemParams& pr) {
  const double pp = pr.p / (pr.p - 1.0);
  return std::pow(std::abs(w.dw), pr.p) / pp + 0.5 * pr.alpha * w.w * w.w;
}

std::array<double, 2> M_ell(const ProblemParams& pr) {
  const auto c = derive_constants(pr);
  if (!c.ell) throw DomainError("M_ell exists only when eps (alpha + gamma) < 0");
  return {*c.ell, -std::pow(c.gamma * *c.ell, pr.p - 1.0)};
}

}  // namespace plap
