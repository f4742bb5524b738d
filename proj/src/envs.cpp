#include "cmc/envs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmc {

double PegParams::surface(double x) const {
  return k1s * std::sin(x) + k2s * std::cos(x);
}

double PegParams::surface_slope(double x) const {
  return k1s * std::cos(x) - k2s * std::sin(x);
}

double PegParams::contact_force(double x, double z) const {
  return k_sur * std::min(z - surface(x), 0.0);
}

PegState make_peg_state(double x, double z, const PegParams& p) {
  PegState s;
  s.x = x;
  s.z = z;
  s.regime = z - p.surface(x) <= 0.0 ? Regime::contact : Regime::free_flight;
  return s;
}

namespace {

Mat peg_jac_y(const PegParams& p, double x, bool contact) {
  Mat j(2, 2);
  j(0, 0) = -1.0 / p.tau_x;
  j(0, 1) = 0.0;
  j(1, 0) = contact ? p.k_sur / p.tau_x * p.surface_slope(x) -
                          p.k_sur / p.tau_z * p.surface(x) / x
                    : 0.0;
  j(1, 1) = -1.0 / p.tau_z;
  return j;
}

Mat peg_jac_u(const PegParams& p, double x) {
  Mat j(2, 2);
  j(0, 0) = 1.0 / p.tau_x;
  j(0, 1) = 0.0;
  j(1, 0) = -p.k_sur / p.tau_x * p.surface_slope(x);
  j(1, 1) = p.k_sur / p.tau_z;
  return j;
}

// Contact-regime ydot for y = [x, f] per the displayed model.
Vec peg_f_contact(const PegParams& p, double x, double f, const Vec& u) {
  const double g = p.surface(x);
  const double dg = p.surface_slope(x);
  Vec ydot(2);
  ydot[0] = (-x + u[0]) / p.tau_x;
  ydot[1] = -f / p.tau_z +
            (p.k_sur / p.tau_x * dg * x - p.k_sur / p.tau_z * g) -
            p.k_sur / p.tau_x * dg * u[0] + p.k_sur / p.tau_z * u[1];
  return ydot;
}

}  // namespace

LatentModel peg_latent_model(const PegParams& p) {
  LatentModel m;
  m.dim_y = 2;
  m.dim_u = 2;
  m.f = [p](const Vec& y, const Vec& u, double) -> Vec {
    const bool contact = y[1] < 0.0;
    if (contact) return peg_f_contact(p, y[0], y[1], u);
    Vec ydot(2);
    ydot[0] = (-y[0] + u[0]) / p.tau_x;
    ydot[1] = 0.0;
    return ydot;
  };
  m.jac_y = [p](const Vec& y, const Vec&, double) -> Mat {
    return peg_jac_y(p, y[0], y[1] < 0.0);
  };
  m.jac_u = [p](const Vec& y, const Vec&, double) -> Mat {
    return peg_jac_u(p, y[0]);
  };
  return m;
}

LatentModel peg_error_model(const PegParams& p) {
  LatentModel raw = peg_latent_model(p);
  LatentModel m;
  m.dim_y = 2;
  m.dim_u = 2;
  // e = [x_d - x, f_d - f]; edot = -ydot, so jac_e = jac_y and the input map
  // flips sign.
  m.f = [p, raw](const Vec& e, const Vec& u, double t) -> Vec {
    Vec y(2);
    y[0] = p.x_d - e[0];
    y[1] = p.f_d - e[1];
    return -raw.f(y, u, t);
  };
  m.jac_y = [p, raw](const Vec& e, const Vec& u, double t) -> Mat {
    Vec y(2);
    y[0] = p.x_d - e[0];
    y[1] = p.f_d - e[1];
    return raw.jac_y(y, u, t);
  };
  m.jac_u = [p, raw](const Vec& e, const Vec& u, double t) -> Mat {
    Vec y(2);
    y[0] = p.x_d - e[0];
    y[1] = p.f_d - e[1];
    return -raw.jac_u(y, u, t);
  };
  return m;
}

Vec peg_tracking_error(const PegState& s, const PegParams& p) {
  Vec e(2);
  e[0] = p.x_d - s.x;
  e[1] = p.f_d - p.contact_force(s.x, s.z);
  return e;
}

LoopState loop_init(const ClosedLoop& loop, const Vec& s0) {
  if (loop.dt <= 0.0) throw PreconditionError("loop: dt must be > 0");
  if (s0.size() != loop.plant_dim) {
    throw DimMismatchError("loop_init: plant state dimension mismatch");
  }
  LoopState st;
  st.s = loop.clamp ? loop.clamp(s0) : s0;
  st.ps.s2 = Vec::Zero(loop.latent_dim());
  st.ps.t = 0.0;
  st.bank = loop.bank;
  return st;
}

StepRecord loop_step(const ClosedLoop& loop, LoopState& st) {
  const Vec y = loop.latent_of(st.s);
  const int regime = loop.regime_of ? loop.regime_of(st.s) : 0;
  if (regime != st.regime) {
    auto it = st.cache.find(regime);
    if (it == st.cache.end()) {
      const LatentModel model =
          loop.model_of ? loop.model_of(regime) : LatentModel{};
      const Vec u0 = Vec::Zero(loop.control_dim);
      const TransformPair tp = build_transforms(model, y, u0, st.ps.t);
      it = st.cache.emplace(regime, tp).first;
      ++st.transform_updates;
    }
    st.tp = it->second;
    if (!st.bank.nets.empty() && st.bank.nets.front().constrained()) {
      st.bank = set_flips(st.bank, st.tp.r.diagonal(), st.tp.lambda.diagonal());
    }
    st.regime = regime;
  }

  StepRecord rec;
  rec.t = st.ps.t;
  rec.y = y;
  rec.regime = regime;
  rec.z = st.tp.t_y * y;
  rec.a = policy_forward(st.bank, rec.z, st.ps);
  rec.u = st.tp.t_a * rec.a;

  const PolicyJacobian jac = policy_jacobian(st.bank, rec.z, st.ps);
  rec.c1 = jac.d_s1.cwiseProduct(st.tp.r.diagonal()) + st.tp.lambda.diagonal();
  rec.c2 = jac.d_s2.cwiseProduct(st.tp.r.diagonal());

  const Vec u = rec.u;
  DerivFn deriv = [&loop, &u](double t, const Vec& s) -> Vec {
    Vec ds = loop.plant_deriv(t, s, u);
    if (loop.disturbance) ds += loop.disturbance->d(t, s);
    return ds;
  };
  Vec s_next = rk4_step(deriv, st.ps.t, st.s, loop.dt);
  if (loop.clamp) s_next = loop.clamp(s_next);
  if (!s_next.allFinite() || s_next.norm() > loop.divergence_bound) {
    throw DivergedError("loop_step: plant state exceeded divergence bound");
  }
  st.s = s_next;
  st.ps.s2 += rec.z * loop.dt;
  st.ps.t += loop.dt;
  return rec;
}

Rollout rollout(const ClosedLoop& loop, const Vec& s0, double horizon) {
  if (horizon <= 0.0) throw PreconditionError("rollout: horizon must be > 0");
  LoopState st = loop_init(loop, s0);
  const int steps = static_cast<int>(std::llround(horizon / loop.dt));
  const Vec w = loop.reward_weights.size() == loop.latent_dim()
                    ? loop.reward_weights
                    : Vec::Ones(loop.latent_dim());
  Rollout out;
  out.records.reserve(static_cast<std::size_t>(steps));
  try {
    for (int k = 0; k < steps; ++k) {
      StepRecord rec = loop_step(loop, st);
      out.reward -= loop.dt * w.cwiseProduct(rec.y.cwiseAbs()).sum();
      out.records.push_back(std::move(rec));
    }
  } catch (const DivergedError&) {
    out.diverged = true;
    out.reward = -std::numeric_limits<double>::infinity();
  }
  return out;
}

ClosedLoop make_lti_loop(const LatentLTI& lti, const PolicyBank& bank,
                         double dt) {
  const LatentModel model = lti_model(lti);
  ClosedLoop loop;
  loop.plant_dim = lti.dim();
  loop.control_dim = lti.dim();
  loop.plant_deriv = [model](double t, const Vec& s, const Vec& u) -> Vec {
    return model.f(s, u, t);
  };
  loop.latent_of = [](const Vec& s) { return s; };
  loop.model_of = [model](int) { return model; };
  loop.bank = bank;
  loop.dt = dt;
  return loop;
}

SecondOrderEnv make_second_order_env(const GainSet& gains,
                                     const PolicyBank& bank, double dt,
                                     GainBranch branch) {
  const CompositeSolution sol = solve_composite_gains(gains, branch);
  const int n = gains.dim();
  SecondOrderEnv env;
  env.map = sol.map;
  env.lti = sol.lti;
  env.loop.plant_dim = 2 * n;
  env.loop.control_dim = n;
  env.loop.plant_deriv = [gains, n](double, const Vec& s,
                                    const Vec& u) -> Vec {
    Vec ds(2 * n);
    ds.head(n) = s.tail(n);
    ds.tail(n) = -(gains.kd.cwiseProduct(s.tail(n)) +
                   gains.kp.cwiseProduct(s.head(n)) + u)
                      .cwiseQuotient(gains.lambda_d);
    return ds;
  };
  const CompositeMap map = sol.map;
  env.loop.latent_of = [map, n](const Vec& s) -> Vec {
    return composite_apply(map, s.head(n), s.tail(n));
  };
  const LatentModel model = lti_model(sol.lti);
  env.loop.model_of = [model](int) { return model; };
  env.loop.bank = bank;
  env.loop.dt = dt;
  return env;
}

ClosedLoop make_peg_loop(const PegParams& p, const PolicyBank& bank,
                         double dt) {
  ClosedLoop loop;
  loop.plant_dim = 2;
  loop.control_dim = 2;
  loop.plant_deriv = [p](double, const Vec& s, const Vec& u) -> Vec {
    Vec ds(2);
    ds[0] = (-s[0] + u[0]) / p.tau_x;
    ds[1] = (-s[1] + u[1]) / p.tau_z;
    return ds;
  };
  loop.latent_of = [p](const Vec& s) -> Vec {
    Vec e(2);
    e[0] = p.x_d - s[0];
    e[1] = p.f_d - p.contact_force(s[0], s[1]);
    return e;
  };
  loop.regime_of = [p](const Vec& s) -> int {
    return s[1] - p.surface(s[0]) <= 0.0
               ? static_cast<int>(Regime::contact)
               : static_cast<int>(Regime::free_flight);
  };
  loop.clamp = [p](const Vec& s) -> Vec {
    Vec c(2);
    c[0] = std::clamp(s[0], p.x_min, p.x_max);
    c[1] = std::clamp(s[1], p.z_min, p.z_max);
    return c;
  };
  const LatentModel err = peg_error_model(p);
  loop.model_of = [err, p](int regime) -> LatentModel {
    LatentModel m = err;
    if (regime == static_cast<int>(Regime::free_flight)) {
      // Free flight: evaluate the error-model Jacobians at f = 0.
      m.jac_y = [p](const Vec& e, const Vec&, double) -> Mat {
        return peg_jac_y(p, p.x_d - e[0], false);
      };
      m.jac_u = [p](const Vec& e, const Vec&, double) -> Mat {
        return -peg_jac_u(p, p.x_d - e[0]);
      };
    } else {
      m.jac_y = [p](const Vec& e, const Vec&, double) -> Mat {
        return peg_jac_y(p, p.x_d - e[0], true);
      };
      m.jac_u = [p](const Vec& e, const Vec&, double) -> Mat {
        return -peg_jac_u(p, p.x_d - e[0]);
      };
    }
    return m;
  };
  loop.bank = bank;
  loop.dt = dt;
  return loop;
}

}  // namespace cmc
