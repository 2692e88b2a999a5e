#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vpe/data.hpp"
#include "vpe/rng.hpp"

namespace vpe::env {

inline constexpr double kGravity = 10.0;
inline constexpr double kDt = 0.05;
inline constexpr double kMaxSpeed = 8.0;
inline constexpr double kMaxTorque = 2.0;
inline constexpr int kDefaultHorizon = 200;

// One family member: mass drives the dynamics, kappa the action penalty.
struct PendulumParams {
  double mass = 1.0;    // kg, in [0.4, 1.2]
  double kappa = 0.0;   // action-penalty coefficient, in [0.0, 2.0]
};

// psi = 0 is upright; psi wrapped to [-pi, pi], psi_dot clipped to [-8, 8].
struct State {
  double psi = 0.0;
  double psi_dot = 0.0;
};

struct Observation {
  double cos_psi = 1.0;
  double sin_psi = 0.0;
  double psi_dot = 0.0;
};

struct StepResult {
  State next;
  double reward = 0.0;
};

struct RolloutResult {
  double ret = 0.0;
  std::vector<Transition> trajectory;
};

using Policy = std::function<double(const Observation&)>;

double clip(double x, double lo, double hi);

// Wraps any finite angle to [-pi, pi].
double wrap_angle(double psi);

// sin(psi) evaluated as sin(pi - |psi|) on the lower half circle so that the
// downward rest state is an exact fixed point of the dynamics.
double sin_from_upright(double psi);

Observation observe(const State& state);
std::array<double, 3> observation_array(const State& state);

std::vector<PendulumParams> sample_family(std::size_t count, std::uint64_t seed);

double reward(const PendulumParams& params, const State& state, double action);

StepResult step(const PendulumParams& params, const State& state, double action);

State sample_initial_state(Rng& rng);

// Undiscounted rollout. Policy outputs are clipped to the torque bounds.
// If init is empty the start state is drawn as psi ~ U[-pi,pi], psi_dot ~ U[-1,1].
RolloutResult rollout(const Policy& policy, const PendulumParams& params, int horizon,
                      std::optional<State> init, std::uint64_t seed,
                      std::uint32_t mdp_index = 0);

// Family file: JSON array of {mass, kappa}.
void save_family(const std::string& path, const std::vector<PendulumParams>& family);
std::vector<PendulumParams> load_family(const std::string& path);

// Trajectory dump: CSV columns (t, psi, psi_dot, a, r).
void write_trajectory_csv(const std::string& path, const std::vector<Transition>& trajectory);

}  // namespace vpe::env
