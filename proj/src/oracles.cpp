#include "plap/oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace plap {

std::string_view to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::U_flat: return "U_flat";
    case OracleKind::barenblatt: return "barenblatt";
    case OracleKind::p_harmonic: return "p_harmonic";
    case OracleKind::quadratic: return "quadratic";
    case OracleKind::alpha_zero: return "alpha_zero";
    case OracleKind::n1_special: return "n1_special";
  }
  return "?";
}

Oracle::Oracle(const OracleSpec& spec) : spec_(spec) {
  const double p = spec.p;
  const int N = spec.N;
  const int e = spec.eps;
  const double K = spec.K;
  params_ = {N, p, 1.0, e};
  validate(params_);
  if (spec.sign != 1 && spec.sign != -1) throw ParamError("sign must be 1 or -1");

  const double g = gamma_of(p);
  const double eta = eta_of(N, p);
  const double pp = p / (p - 1.0);
  switch (spec.kind) {
    case OracleKind::U_flat:
      params_.alpha = spec.alpha;
      validate(params_);
      if (e * (spec.alpha + g) >= 0.0) throw ParamError("U_flat needs eps (alpha + gamma) < 0");
      break;
    case OracleKind::barenblatt:
      params_.alpha = N;
      if (e == 1 && K <= 0.0) throw ParamError("barenblatt with eps = 1 needs K > 0");
      if (K * e > 0.0) edge_ = std::pow(std::abs(K) * g, 1.0 / pp);
      break;
    case OracleKind::p_harmonic:
      if (eta == 0.0) throw ParamError("p_harmonic needs N != p");
      params_.alpha = eta;
      break;
    case OracleKind::quadratic:
      if (K <= 0.0) throw ParamError("quadratic needs K > 0");
      params_.alpha = -pp;
      break;
    case OracleKind::alpha_zero: {
      params_.alpha = 0.0;
      const double lead = K * (g + N);
      if (e * lead > 0.0) edge_ = std::pow(std::abs(lead), 1.0 / (N - eta));
      if (e == 1 && K <= 0.0) throw ParamError("alpha_zero with eps = 1 needs K > 0");
      break;
    }
    case OracleKind::n1_special: {
      if (N != 1) throw ParamError("n1_special needs N = 1");
      if (K == 0.0) throw ParamError("n1_special needs K != 0");
      const double a = -(p - 1.0) / (p - 2.0);
      params_.alpha = a;
      const double root = -e * std::pow(std::abs(a), p - 1.0) * std::pow(std::abs(K), p) / K;
      if (e == -1 && K < 0.0) throw ParamError("n1_special vanishes identically for eps = -1, K < 0");
      if (root > 0.0) edge_ = root;
      break;
    }
  }
}

double Oracle::dw_alpha_zero(double r) const {
  const double p = spec_.p;
  const int N = spec_.N;
  const double eta = eta_of(N, p);
  const double inner = spec_.K - spec_.eps * std::pow(r, N - eta) / (gamma_of(p) + N);
  if (inner <= 0.0) return 0.0;
  return spec_.sign * std::pow(r, -(eta + 1.0)) * std::pow(inner, 1.0 / (p - 2.0));
}

ProfileSample Oracle::sample(double r) const {
  if (!(r > 0.0)) throw DomainError("oracle samples need r > 0");
  const double p = spec_.p;
  const int N = spec_.N;
  const int e = spec_.eps;
  const double K = spec_.K;
  const double g = gamma_of(p);
  const double pp = p / (p - 1.0);
  const double k = (p - 1.0) / (p - 2.0);
  switch (spec_.kind) {
    case OracleKind::U_flat: {
      const double ell = *derive_constants(params_).ell;
      return {r, spec_.sign * ell * std::pow(r, g), spec_.sign * ell * g * std::pow(r, g - 1.0)};
    }
    case OracleKind::barenblatt: {
      const double inner = K - e * std::pow(r, pp) / g;
      if (inner <= 0.0) return {r, 0.0, 0.0};
      return {r, std::pow(inner, k),
              k * std::pow(inner, k - 1.0) * (-e * pp * std::pow(r, pp - 1.0) / g)};
    }
    case OracleKind::p_harmonic: {
      const double eta = params_.alpha;
      return {r, K * std::pow(r, -eta), -eta * K * std::pow(r, -eta - 1.0)};
    }
    case OracleKind::quadratic: {
      const double w0 = N * std::pow(K * pp, p - 2.0);
      return {r, K * (w0 + e * std::pow(r, pp)), e * K * pp * std::pow(r, pp - 1.0)};
    }
    case OracleKind::alpha_zero: {
      auto integrand = [this](double t) { return dw_alpha_zero(t); };
      double lo = std::min(r, 1.0), hi = std::max(r, 1.0);
      double total = 0.0;
      // split at the edge so the quadrature never straddles the kink
      if (edge_ && *edge_ > lo && *edge_ < hi) {
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, *edge_, 20, 1e-12);
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, *edge_, hi, 20, 1e-12);
      } else if (lo < hi) {
        total = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 20, 1e-12);
      }
      const double w = r < 1.0 ? -total : total;
      return {r, w, dw_alpha_zero(r)};
    }
    case OracleKind::n1_special: {
      const double a = params_.alpha;
      const double inner = K * r + e * std::pow(std::abs(a), p - 1.0) * std::pow(std::abs(K), p);
      if (inner <= 0.0) return {r, 0.0, 0.0};
      return {r, std::pow(inner, k), k * K * std::pow(inner, k - 1.0)};
    }
  }
  throw DomainError("unknown oracle");
}

}  // namespace plap
