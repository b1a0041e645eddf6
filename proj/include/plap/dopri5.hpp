/**
 * @file dopri5.hpp
 * @brief Dormand-Prince 5(4) step with FSAL, dense output and a PI controller.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace plap::detail {

template <std::size_t D>
using State = std::array<double, D>;

/// Continuous extension of one accepted step, t0 + theta h for theta in [0, 1].
template <std::size_t D>
struct Dp5Dense {
  double t0 = 0.0;
  double h = 0.0;
  std::array<State<D>, 5> rc{};

  [[nodiscard]] State<D> at(double theta) const {
    State<D> out{};
    const double t1 = 1.0 - theta;
    for (std::size_t i = 0; i < D; ++i) {
      out[i] = rc[0][i] + theta * (rc[1][i] + t1 * (rc[2][i] + theta * (rc[3][i] + t1 * rc[4][i])));
    }
    return out;
  }
  [[nodiscard]] double component(std::size_t i, double theta) const {
    const double t1 = 1.0 - theta;
    return rc[0][i] + theta * (rc[1][i] + t1 * (rc[2][i] + theta * (rc[3][i] + t1 * rc[4][i])));
  }
};

template <std::size_t D>
struct Dp5Step {
  State<D> y1{};
  State<D> f1{};
  double err = 0.0;
  bool finite = true;
  Dp5Dense<D> dense;
};

/// One trial step of size h from (t, y) with f0 = f(t, y). The error norm is
/// the RMS over the first `n_err` components.
template <std::size_t D, class F>
[[nodiscard]] Dp5Step<D> dp5_step(F&& f, double t, const State<D>& y, const State<D>& f0, double h,
                                  double atol, double rtol, std::size_t n_err = D) {
  constexpr double a21 = 1.0 / 5.0;
  constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                   a54 = -212.0 / 729.0;
  constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                   a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                   a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                   e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                   d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                   d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  State<D> tmp{}, k2{}, k3{}, k4{}, k5{}, k6{};
  const auto& k1 = f0;
  for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  k2 = f(t + h / 5.0, tmp);
  for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  k3 = f(t + 0.3 * h, tmp);
  for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  k4 = f(t + 0.8 * h, tmp);
  for (std::size_t i = 0; i < D; ++i)
    tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  k5 = f(t + 8.0 / 9.0 * h, tmp);
  for (std::size_t i = 0; i < D; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  k6 = f(t + h, tmp);

  Dp5Step<D> out;
  for (std::size_t i = 0; i < D; ++i)
    out.y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
  out.f1 = f(t + h, out.y1);

  double acc = 0.0;
  for (std::size_t i = 0; i < D; ++i) {
    if (!std::isfinite(out.y1[i]) || !std::isfinite(out.f1[i])) out.finite = false;
    if (i >= n_err) continue;
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * out.f1[i]);
    const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(out.y1[i]));
    acc += (e / sc) * (e / sc);
  }
  out.err = std::sqrt(acc / static_cast<double>(std::max<std::size_t>(n_err, 1)));
  if (!out.finite) out.err = INFINITY;

  auto& dn = out.dense;
  dn.t0 = t;
  dn.h = h;
  for (std::size_t i = 0; i < D; ++i) {
    const double diff = out.y1[i] - y[i];
    const double bspl = h * k1[i] - diff;
    dn.rc[0][i] = y[i];
    dn.rc[1][i] = diff;
    dn.rc[2][i] = bspl;
    dn.rc[3][i] = diff - h * out.f1[i] - bspl;
    dn.rc[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * out.f1[i]);
  }
  return out;
}

/// PI step-size controller (Gustafsson), exponents as in Hairer's DOPRI5.
class PiController {
 public:
  /// Factor to apply to h after a step with normalized error `err`.
  [[nodiscard]] double accepted(double err) {
    const double e = std::max(err, 1e-10);
    const double fac11 = std::pow(e, kExpo1);
    double fac = fac11 / std::pow(err_old_, kBeta);
    fac = std::clamp(fac / kSafety, 1.0 / kMaxGrow, 1.0 / kMinShrink);
    err_old_ = std::max(e, 1e-4);
    return 1.0 / fac;
  }
  [[nodiscard]] double rejected(double err) const {
    if (!std::isfinite(err)) return 0.1;
    const double fac11 = std::pow(err, kExpo1);
    return 1.0 / std::min(1.0 / kMinShrink, fac11 / kSafety);
  }
  void reset() { err_old_ = 1e-4; }

 private:
  static constexpr double kBeta = 0.04;
  static constexpr double kExpo1 = 0.2 - kBeta * 0.75;
  static constexpr double kSafety = 0.9;
  static constexpr double kMaxGrow = 10.0;
  static constexpr double kMinShrink = 0.2;
  double err_old_ = 1e-4;
};

/// Integrates an autonomous-in-form system from t0 to t1 with adaptive steps,
/// calling `on_step(dense, y1)` after each accepted step. Returns false when
/// the step size underflows or the state stops being finite.
template <std::size_t D, class F, class OnStep>
bool dp5_solve(F&& f, double t0, double t1, State<D>& y, double atol, double rtol, OnStep&& on_step,
               std::size_t n_err = D, long max_steps = 200000) {
  double t = t0;
  const double span = t1 - t0;
  if (span == 0.0) return true;
  double h = span / 16.0;
  State<D> f0 = f(t, y);
  PiController pi;
  for (long n = 0; n < max_steps; ++n) {
    if ((t1 - t) * span <= 0.0) return true;
    if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;
    auto st = dp5_step<D>(f, t, y, f0, h, atol, rtol, n_err);
    if (st.err > 1.0) {
      h *= st.finite ? pi.rejected(st.err) : 0.1;
      if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(t))) return false;
      continue;
    }
    const bool last = std::abs(t1 - (t + h)) <= 1e-15 * std::max(1.0, std::abs(t1));
    on_step(st.dense, st.y1);
    t = last ? t1 : t + h;
    y = st.y1;
    f0 = st.f1;
    h *= pi.accepted(st.err);
    if (last) return true;
  }
  return false;
}

}  // namespace plap::detail
