#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "cmc/latent.hpp"
#include "cmc/policy.hpp"
#include "cmc/transform.hpp"

namespace cmc {

/// 2D peg-touch task: first-order position servos in x and z, surface
/// profile g(x) = K1s sin(x) + K2s cos(x), penetration force
/// f = K_sur min(z - g(x), 0).
struct PegParams {
  double tau_x = 0.0437;
  double tau_z = 0.01;
  double k_sur = 10.0;
  double k1s = 0.0;
  double k2s = 0.0;
  double x_min = 1.0, x_max = 3.0;
  double z_min = -3.0, z_max = 1.0;
  double x_d = 2.0;
  double f_d = -0.1;

  double surface(double x) const;
  double surface_slope(double x) const;
  double contact_force(double x, double z) const;
};

enum class Regime : int { contact = 0, free_flight = 1 };

struct PegState {
  double x = 0.0;
  double z = 0.0;
  Regime regime = Regime::free_flight;
};

PegState make_peg_state(double x, double z, const PegParams& p);

/// Latent model in y = [x, f]. In contact the dynamics and the (declared
/// approximate) jac_y follow the displayed matrices; in free flight f = 0
/// and jac_y reduces to the two decoupled lags. jac_u keeps the
/// K_sur-coupled lower-triangular form in both regimes.
LatentModel peg_latent_model(const PegParams& p);

/// Goal-shifted model in e = [x_d - x, f_d - f]: same jac_y, negated jac_u.
/// This is what the closed loop drives to zero.
LatentModel peg_error_model(const PegParams& p);

/// e = [x_d - x, f_d - f].
Vec peg_tracking_error(const PegState& s, const PegParams& p);

/// Additive disturbance d(t, s) on the plant derivative, with sup norm.
struct Disturbance {
  double sup_norm = 0.0;
  std::function<Vec(double t, const Vec& s)> d;
};

/// Closed loop: plant in its own state space, latent extraction, per-regime
/// latent models for the transforms, and the policy wiring
/// u = T_a * pi(T_y y, integral of T_y y).
struct ClosedLoop {
  int plant_dim = 0;
  int control_dim = 0;
  std::function<Vec(double t, const Vec& s, const Vec& u)> plant_deriv;
  std::function<Vec(const Vec& s)> latent_of;
  std::function<int(const Vec& s)> regime_of;
  std::function<Vec(const Vec& s)> clamp;
  std::function<LatentModel(int regime)> model_of;
  PolicyBank bank;
  double dt = 1e-3;
  std::optional<Disturbance> disturbance;
  double divergence_bound = 1e6;
  Vec reward_weights;

  int latent_dim() const { return bank.dim(); }
};

struct StepRecord {
  double t = 0.0;
  Vec y, z, a, u;
  int regime = 0;
  Vec c1, c2;
};

/// Mutable per-rollout state: plant state, integral state, cached
/// transforms and the flip-refreshed bank of the current regime.
struct LoopState {
  Vec s;
  PolicyState ps;
  int regime = -1;
  TransformPair tp;
  PolicyBank bank;
  int transform_updates = 0;
  std::map<int, TransformPair> cache;
};

LoopState loop_init(const ClosedLoop& loop, const Vec& s0);

/// One zero-order-hold step: control computed at step start, one RK4 step of
/// the plant, s2 accumulated, transforms and flips refreshed on regime
/// change. Throws DivergedError when the plant state leaves the bound.
StepRecord loop_step(const ClosedLoop& loop, LoopState& st);

struct Rollout {
  std::vector<StepRecord> records;
  double reward = 0.0;
  bool diverged = false;
};

/// Full trajectory with reward = -sum dt * sum_i w_i |y_i|. A diverged
/// episode keeps its partial records and gets reward -infinity.
Rollout rollout(const ClosedLoop& loop, const Vec& s0, double horizon);

ClosedLoop make_lti_loop(const LatentLTI& lti, const PolicyBank& bank,
                         double dt);

struct SecondOrderEnv {
  ClosedLoop loop;
  CompositeMap map;
  LatentLTI lti;
};

/// Second-order error dynamics Lambda_d eddot + K_d edot + K_p e + u = 0
/// with the composite latent y = K1 e + K2 edot. Plant state is [e; edot].
SecondOrderEnv make_second_order_env(const GainSet& gains,
                                     const PolicyBank& bank, double dt,
                                     GainBranch branch = GainBranch::plus);

/// Peg closed loop; plant state is [x; z], clamped to the declared ranges.
ClosedLoop make_peg_loop(const PegParams& p, const PolicyBank& bank,
                         double dt);

}  // namespace cmc
