#include "plap/params.hpp"

#include <cmath>
#include <sstream>

namespace plap {

void validate(const ProblemParams& params) {
  if (!std::isfinite(params.p) || !std::isfinite(params.alpha)) {
    throw ParamError("parameters must be finite");
  }
  if (params.p <= 2.0) throw ParamError("p must exceed 2");
  if (params.N < 1) throw ParamError("N must be at least 1");
  if (params.alpha == 0.0) throw ParamError("alpha must be nonzero (the self-similar reduction assumes alpha != 0)");
  if (params.eps != 1 && params.eps != -1) throw ParamError("eps must be 1 or -1");
}

double gamma_of(double p) { return p / (p - 2.0); }

double eta_of(int N, double p) { return (N - p) / (p - 1.0); }

DerivedConstants derive_constants(const ProblemParams& params) {
  validate(params);
  return derive_constants_unchecked(params);
}

DerivedConstants derive_constants_unchecked(const ProblemParams& params) {
  ProblemParams probe = params;
  if (probe.alpha == 0.0) probe.alpha = 1.0;
  validate(probe);
  const double p = params.p;
  const double N = params.N;
  const double a = params.alpha;

  DerivedConstants c;
  c.gamma = gamma_of(p);
  c.eta = eta_of(params.N, p);
  c.p_prime = p / (p - 1.0);
  c.beta = a * (p - 2.0) + p;
  c.alpha_p = -(p - 1.0) / (p - 2.0);

  const double g = c.gamma;
  const double top = g * (N + g) / (p - 1.0);
  c.alpha_star = -g + top / (N + 2.0 * g);
  const double root = 2.0 * std::sqrt(c.p_prime * (N + g));
  c.alpha_1 = -g + top / (2.0 * g + N + root);
  if (2.0 * g + N - root > 0.0) c.alpha_2 = -g + top / (2.0 * g + N - root);

  if (params.eps * (a + g) < 0.0) {
    c.ell = std::pow(std::abs(a + g) / (std::pow(g, p - 1.0) * (g + N)), 1.0 / (p - 2.0));
  }
  if (a + g != 0.0) {
    const double nu = -top / (g + a);
    c.nu_alpha = nu;
    const double trace = 2.0 * g + N + nu;
    c.discriminant = trace * trace - 4.0 * c.p_prime * (N + g);
  }
  c.C_U = std::pow((p - 2.0) * std::pow(g, p - 1.0) * (g + N), 1.0 / (2.0 - p));
  return c;
}

std::string describe(const ProblemParams& params) {
  std::ostringstream os;
  os << "N=" << params.N << " p=" << params.p << " alpha=" << params.alpha
     << " eps=" << params.eps;
  return os.str();
}

}  // namespace plap
