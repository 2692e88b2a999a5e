#include "vpe/env.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace vpe::env {

namespace {
constexpr double kPi = std::numbers::pi;
}

double clip(double x, double lo, double hi) {
  if (x < lo) return lo;
  if (x > hi) return hi;
  return x;
}

double wrap_angle(double psi) {
  // remainder(x, 2pi) lands in [-pi, pi] and leaves in-range angles untouched
  return std::remainder(psi, 2.0 * kPi);
}

double sin_from_upright(double psi) {
  const double a = std::abs(psi);
  const double s = a > 0.5 * kPi ? std::sin(kPi - a) : std::sin(a);
  return psi < 0.0 ? -s : s;
}

Observation observe(const State& state) {
  return Observation{std::cos(state.psi), sin_from_upright(state.psi), state.psi_dot};
}

std::array<double, 3> observation_array(const State& state) {
  const Observation o = observe(state);
  return {o.cos_psi, o.sin_psi, o.psi_dot};
}

std::vector<PendulumParams> sample_family(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample_family: count must be >= 1");
  Rng rng(seed);
  std::vector<PendulumParams> family;
  family.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    PendulumParams p;
    p.mass = rng.uniform(0.4, 1.2);
    p.kappa = rng.uniform(0.0, 2.0);
    family.push_back(p);
  }
  return family;
}

double reward(const PendulumParams& params, const State& state, double action) {
  const double a = clip(action, -kMaxTorque, kMaxTorque);
  return -(state.psi * state.psi + 0.1 * state.psi_dot * state.psi_dot +
           params.kappa * a * a);
}

StepResult step(const PendulumParams& params, const State& state, double action) {
  const double a = clip(action, -kMaxTorque, kMaxTorque);
  const double r = reward(params, state, a);
  const double accel = 1.5 * kGravity * sin_from_upright(state.psi) + 3.0 * a / params.mass;
  State next;
  next.psi_dot = clip(state.psi_dot + accel * kDt, -kMaxSpeed, kMaxSpeed);
  next.psi = wrap_angle(state.psi + next.psi_dot * kDt);
  return StepResult{next, r};
}

State sample_initial_state(Rng& rng) {
  State s;
  s.psi = rng.uniform(-kPi, kPi);
  s.psi_dot = rng.uniform(-1.0, 1.0);
  return s;
}

RolloutResult rollout(const Policy& policy, const PendulumParams& params, int horizon,
                      std::optional<State> init, std::uint64_t seed,
                      std::uint32_t mdp_index) {
  if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
  Rng rng(seed);
  State state = init ? *init : sample_initial_state(rng);

  RolloutResult result;
  result.trajectory.reserve(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    const double a = clip(policy(observe(state)), -kMaxTorque, kMaxTorque);
    const StepResult sr = step(params, state, a);

    Transition tr;
    tr.obs = observation_array(state);
    tr.action = a;
    tr.reward = sr.reward;
    tr.next_obs = observation_array(sr.next);
    tr.teacher_next_action = clip(policy(observe(sr.next)), -kMaxTorque, kMaxTorque);
    tr.mdp_index = mdp_index;
    result.trajectory.push_back(tr);

    result.ret += sr.reward;
    state = sr.next;
  }
  return result;
}

void save_family(const std::string& path, const std::vector<PendulumParams>& family) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& p : family) doc.push_back({{"mass", p.mass}, {"kappa", p.kappa}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_family: cannot open " + path);
  out << doc.dump(2) << "\n";
}

std::vector<PendulumParams> load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_family: cannot open " + path);
  nlohmann::json doc;
  in >> doc;
  std::vector<PendulumParams> family;
  for (const auto& item : doc) {
    family.push_back(PendulumParams{item.at("mass").get<double>(),
                                    item.at("kappa").get<double>()});
  }
  return family;
}

void write_trajectory_csv(const std::string& path, const std::vector<Transition>& trajectory) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  out << "t,psi,psi_dot,a,r\n";
  char line[160];
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const auto& tr = trajectory[t];
    const double psi = std::atan2(tr.obs[1], tr.obs[0]);
    std::snprintf(line, sizeof(line), "%zu,%.10g,%.10g,%.10g,%.10g\n", t, psi, tr.obs[2],
                  tr.action, tr.reward);
    out << line;
  }
}

}  // namespace vpe::env
