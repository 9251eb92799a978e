#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hodc/solver.hpp"

namespace hodc {

/// Per-step comparison of the realized decrease F(x_k) - F(x_{k+1}) against
/// the guaranteed minimum decrease for the recorded M values and given
/// Lipschitz hints.
template <typename Scalar>
struct DescentAudit {
  std::vector<Scalar> per_step_lhs;
  std::vector<Scalar> per_step_rhs;
  std::vector<std::pair<int, Scalar>> violations;  // (k, rhs - lhs)
  bool pass = true;
  bool applicable = true;  // false when some recorded M does not exceed its hint
  std::string note;
};

enum class RateRegime { sublinear, linear, superlinear_observed };

inline const char* to_string(RateRegime r) {
  switch (r) {
    case RateRegime::sublinear: return "sublinear";
    case RateRegime::linear: return "linear";
    case RateRegime::superlinear_observed: return "superlinear_observed";
  }
  return "?";
}

template <typename Scalar>
struct RateFitReport {
  std::optional<Scalar> fitted_exponent;  // slope of log(min residual) vs log k
  Scalar theoretical_exponent = Scalar(0);
  std::optional<RateRegime> regime;
  std::optional<Scalar> geometric_fit_r2;
  std::optional<Scalar> kl_r_estimate;
  bool envelope_checked = false;
  bool envelope_satisfied = true;
  std::string notes;
};

template <typename Scalar>
struct SummabilityReport {
  Scalar lhs_sum = Scalar(0);
  Scalar rhs_cap = Scalar(0);
  bool pass = false;
  std::string note;
};

namespace detail {

template <typename Scalar>
struct LineFit {
  Scalar slope = Scalar(0);
  Scalar intercept = Scalar(0);
  Scalar r2 = Scalar(1);
};

template <typename Scalar>
std::optional<LineFit<Scalar>> fit_line(const std::vector<Scalar>& xs,
                                        const std::vector<Scalar>& ys) {
  const size_t n = xs.size();
  if (n < 2) return std::nullopt;
  Scalar mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= Scalar(n);
  my /= Scalar(n);
  Scalar sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= Scalar(0)) return std::nullopt;
  LineFit<Scalar> fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  Scalar ss_res = 0;
  for (size_t i = 0; i < n; ++i) {
    const Scalar e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += e * e;
  }
  fit.r2 = syy > Scalar(0) ? Scalar(1) - ss_res / syy : Scalar(1);
  return fit;
}

/// x^e with 0^0 = 1 (e is a small integer difference of Taylor degrees).
template <typename Scalar>
Scalar int_pow_signed(Scalar x, int e) {
  if (e == 0) return Scalar(1);
  return std::pow(x, Scalar(e));
}

/// Tail window start index for a sequence of `n` points: keep the last
/// max(10, 30%) entries.
inline size_t tail_start(size_t n) {
  const size_t keep = std::max<size_t>(10, (3 * n + 9) / 10);
  return n > keep ? n - keep : 0;
}

}  // namespace detail

/// Checks eq-style descent per step:
///   F(x_k) - F(x_{k+1}) >= 2 ((M_p - L_p)/(p+1)! (M_q - L_q)/(q+1)!)^{1/2}
///                          |x_{k+1}-x_k|^{(p+q+2)/2} - slack.
template <typename Scalar>
DescentAudit<Scalar> audit_descent(const std::vector<IterationRecord<Scalar>>& trace,
                                   const ModelParams<Scalar>& params, Scalar l_p_f,
                                   Scalar l_q_g, Scalar slack_scale = Scalar(1e-8)) {
  DescentAudit<Scalar> audit;
  if (trace.size() <= 1) {
    audit.note = "no steps to audit";
    return audit;
  }
  const Scalar exponent = Scalar(params.p + params.q + 2) / Scalar(2);
  const Scalar denom =
      detail::factorial<Scalar>(params.p + 1) * detail::factorial<Scalar>(params.q + 1);
  for (size_t i = 1; i < trace.size(); ++i) {
    const auto& prev = trace[i - 1];
    const auto& cur = trace[i];
    if (cur.M_p_used <= l_p_f || cur.M_q_used <= l_q_g) {
      audit.applicable = false;
      audit.pass = false;
      audit.note = "audit inapplicable: recorded M does not exceed the Lipschitz hint at k=" +
                   std::to_string(cur.k);
      return audit;
    }
    const Scalar coeff =
        Scalar(2) * std::sqrt((cur.M_p_used - l_p_f) * (cur.M_q_used - l_q_g) / denom);
    const Scalar lhs = prev.F_value - cur.F_value;
    const Scalar rhs = coeff * std::pow(cur.step_norm, exponent);
    audit.per_step_lhs.push_back(lhs);
    audit.per_step_rhs.push_back(rhs);
    if (lhs < rhs - slack_scale * (Scalar(1) + std::abs(prev.F_value))) {
      audit.violations.emplace_back(cur.k, rhs - lhs);
    }
  }
  audit.pass = audit.violations.empty();
  return audit;
}

/// Sum of step norms to the power (p+q+2)/2 against the telescoped cap
/// (F(x_0) - F_lower) / (2 ((M_p-L_p)/(p+1)! (M_q-L_q)/(q+1)!)^{1/2}).
template <typename Scalar>
SummabilityReport<Scalar> summability_check(const std::vector<IterationRecord<Scalar>>& trace,
                                            const ModelParams<Scalar>& params, Scalar l_p_f,
                                            Scalar l_q_g, Scalar f_lower) {
  SummabilityReport<Scalar> rep;
  if (trace.empty()) {
    rep.note = "empty trace";
    return rep;
  }
  const Scalar exponent = Scalar(params.p + params.q + 2) / Scalar(2);
  const Scalar denom =
      detail::factorial<Scalar>(params.p + 1) * detail::factorial<Scalar>(params.q + 1);
  Scalar coeff_min = std::numeric_limits<Scalar>::infinity();
  for (size_t i = 1; i < trace.size(); ++i) {
    rep.lhs_sum += std::pow(trace[i].step_norm, exponent);
    if (trace[i].M_p_used <= l_p_f || trace[i].M_q_used <= l_q_g) {
      rep.note = "inapplicable: recorded M does not exceed the Lipschitz hint";
      return rep;
    }
    coeff_min = std::min(coeff_min, Scalar(2) * std::sqrt((trace[i].M_p_used - l_p_f) *
                                                          (trace[i].M_q_used - l_q_g) / denom));
  }
  const Scalar f0 = trace.front().F_value;
  if (trace.size() == 1) coeff_min = Scalar(1);
  rep.rhs_cap = (f0 - f_lower) / coeff_min +
                Scalar(1e-8) * (Scalar(1) + std::abs(f0)) +
                Scalar(1e-10) * Scalar(trace.size());
  if (f0 - f_lower < Scalar(0)) {
    rep.pass = false;
    rep.note = "misconfigured: F_lower exceeds F(x_0), cap is negative";
    return rep;
  }
  rep.pass = rep.lhs_sum <= rep.rhs_cap;
  return rep;
}

/// Fits the empirical residual decay exponent, verifies the sublinear rate
/// envelope when hints are available, and classifies the iterate convergence
/// regime from the tail of the trace.
template <typename Scalar>
RateFitReport<Scalar> audit_rate(const std::vector<IterationRecord<Scalar>>& trace,
                                 const ModelParams<Scalar>& params,
                                 std::optional<std::type_identity_t<Scalar>> l_p_f = std::nullopt,
                                 std::optional<std::type_identity_t<Scalar>> l_q_g = std::nullopt,
                                 std::optional<std::type_identity_t<Scalar>> f_star = std::nullopt) {
  if (trace.size() < 10)
    throw InputError("audit_rate: trace has fewer than 10 records");

  RateFitReport<Scalar> rep;
  const int min_pq = std::min(params.p, params.q);
  const Scalar rate_exp = Scalar(2 * min_pq) / Scalar(params.p + params.q + 2);
  rep.theoretical_exponent = -rate_exp;
  auto add_note = [&rep](const std::string& s) {
    if (!rep.notes.empty()) rep.notes += "; ";
    rep.notes += s;
  };

  // running min of the residual bound over steps k = 1..K
  std::vector<Scalar> run_min;
  for (size_t i = 1; i < trace.size(); ++i) {
    const Scalar r = trace[i].residual_bound;
    run_min.push_back(run_min.empty() ? r : std::min(run_min.back(), r));
  }

  // ---- empirical exponent over the tail window
  {
    std::vector<Scalar> xs, ys;
    for (size_t j = detail::tail_start(run_min.size()); j < run_min.size(); ++j) {
      if (run_min[j] > Scalar(0)) {
        xs.push_back(std::log(Scalar(j + 1)));
        ys.push_back(std::log(run_min[j]));
      }
    }
    if (auto fit = detail::fit_line(xs, ys))
      rep.fitted_exponent = fit->slope;
    else
      add_note("degenerate trace: residuals vanish or do not vary, no exponent fit");
  }

  // ---- envelope from trace constants, when hints apply
  if (l_p_f && l_q_g) {
    Scalar c_x = Scalar(0), mp_max = Scalar(0), mq_max = Scalar(0);
    Scalar mp_min = std::numeric_limits<Scalar>::infinity(), mq_min = mp_min;
    for (size_t i = 1; i < trace.size(); ++i) {
      c_x = std::max(c_x, trace[i].step_norm);
      mp_max = std::max(mp_max, trace[i].M_p_used);
      mq_max = std::max(mq_max, trace[i].M_q_used);
      mp_min = std::min(mp_min, trace[i].M_p_used);
      mq_min = std::min(mq_min, trace[i].M_q_used);
    }
    if (mp_min <= *l_p_f || mq_min <= *l_q_g) {
      add_note("envelope skipped: recorded M does not exceed the Lipschitz hint");
    } else if (c_x == Scalar(0)) {
      add_note("envelope skipped: all steps are zero");
    } else {
      const Scalar tf = (*l_p_f + mp_max) / detail::factorial<Scalar>(params.p);
      const Scalar tg = (*l_q_g + mq_max) / detail::factorial<Scalar>(params.q);
      const Scalar c_p_q =
          std::max(tf * detail::int_pow_signed(c_x, params.p - params.q) + tg,
                   tf + tg * detail::int_pow_signed(c_x, params.q - params.p));
      const Scalar denom =
          detail::factorial<Scalar>(params.p + 1) * detail::factorial<Scalar>(params.q + 1);
      const Scalar d =
          std::pow(Scalar(4) * (mp_min - *l_p_f) * (mq_min - *l_q_g) / denom,
                   rate_exp / Scalar(2));
      const Scalar f0 = trace.front().F_value;
      Scalar fs;
      if (f_star) {
        fs = *f_star;
      } else {
        fs = trace.back().F_value;
        for (const auto& r : trace) fs = std::min(fs, r.F_value);
        add_note("envelope uses best observed F as F*");
      }
      if (f0 < fs) {
        add_note("envelope skipped: F* exceeds F(x_0)");
      } else {
        const Scalar c_hat = c_p_q / d * std::pow(f0 - fs, rate_exp);
        rep.envelope_checked = true;
        for (size_t k = 10; k <= run_min.size(); ++k) {
          const Scalar bound = c_hat * std::pow(Scalar(k), -rate_exp);
          if (run_min[k - 1] > bound * (Scalar(1) + Scalar(1e-9)) + Scalar(1e-12)) {
            rep.envelope_satisfied = false;
            add_note("envelope violated at k=" + std::to_string(k));
            break;
          }
        }
      }
    }
  }

  // ---- iterate regime from distances to the final point
  {
    const VectorX<Scalar>& x_inf = trace.back().x;
    std::vector<Scalar> logd;
    for (size_t i = 0; i + 1 < trace.size(); ++i) {
      const Scalar d = (trace[i].x - x_inf).norm();
      if (d > Scalar(1e-13) * (Scalar(1) + x_inf.norm())) logd.push_back(std::log(d));
    }
    const size_t start = detail::tail_start(logd.size());
    std::vector<Scalar> xs, ys;
    for (size_t j = start; j < logd.size(); ++j) {
      xs.push_back(Scalar(j));
      ys.push_back(logd[j]);
    }
    if (xs.size() < 5) {
      add_note("regime not classified: too few nonzero iterate gaps");
    } else {
      const size_t mid = xs.size() / 2;
      const Scalar drop1 = (ys[mid - 1] - ys[0]) / Scalar(mid - 1 == 0 ? 1 : mid - 1);
      const Scalar drop2 = (ys.back() - ys[mid]) / Scalar(xs.size() - 1 - mid);
      const auto fit = detail::fit_line(xs, ys);
      if (drop1 < Scalar(0) && drop2 < Scalar(3) * drop1) {
        rep.regime = RateRegime::superlinear_observed;
      } else if (fit && fit->slope < Scalar(0) && std::exp(fit->slope) < Scalar(0.999) &&
                 fit->r2 >= Scalar(0.9)) {
        rep.regime = RateRegime::linear;
        rep.geometric_fit_r2 = fit->r2;
      } else {
        rep.regime = RateRegime::sublinear;
        if (fit) rep.geometric_fit_r2 = fit->r2;
      }
    }
  }

  // ---- KL exponent fit: log(F - F*) against log(residual), over the tail
  // of the points whose F-gap is still above roundoff
  {
    Scalar fs = f_star ? *f_star : trace.back().F_value;
    if (!f_star)
      for (const auto& r : trace) fs = std::min(fs, r.F_value);
    std::vector<Scalar> all_x, all_y;
    for (size_t i = 1; i < trace.size(); ++i) {
      const Scalar gap = trace[i].F_value - fs;
      const Scalar res = trace[i].residual_bound;
      if (gap > Scalar(1e-12) * (Scalar(1) + std::abs(fs)) && res > Scalar(0)) {
        all_x.push_back(std::log(res));
        all_y.push_back(std::log(gap));
      }
    }
    const size_t start = detail::tail_start(all_x.size());
    std::vector<Scalar> xs(all_x.begin() + start, all_x.end());
    std::vector<Scalar> ys(all_y.begin() + start, all_y.end());
    if (xs.size() >= 5) {
      if (auto fit = detail::fit_line(xs, ys)) rep.kl_r_estimate = fit->slope;
    }
  }

  return rep;
}

}  // namespace hodc
