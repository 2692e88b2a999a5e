#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace vpe {

// One observed tuple from a teacher rollout; the atom of the training set.
// teacher_next_action is the non-exploratory action at next_obs, sampled at
// collection time so TD targets never need live teacher access.
struct Transition {
  std::array<double, 3> obs{};
  double action = 0.0;
  double reward = 0.0;
  std::array<double, 3> next_obs{};
  double teacher_next_action = 0.0;
  std::uint32_t mdp_index = 0;
};

struct Dataset {
  std::vector<Transition> train;
  std::vector<Transition> validation;
  std::uint32_t num_mdps = 0;

  static constexpr std::uint32_t kObsDim = 3;
  static constexpr std::uint32_t kActDim = 1;
};

// Binary transition file: header {magic "VPED", version u32, count u64,
// obs_dim u32, act_dim u32, K u32} followed by packed little-endian float32
// records (obs, action, reward, next_obs, teacher_next_action) and the
// mdp_index as u32.
void save_transitions(const std::string& path, const std::vector<Transition>& transitions,
                      std::uint32_t num_mdps);
std::vector<Transition> load_transitions(const std::string& path, std::uint32_t* num_mdps_out);

void save_dataset(const std::string& train_path, const std::string& val_path,
                  const Dataset& dataset);
Dataset load_dataset(const std::string& train_path, const std::string& val_path);

}  // namespace vpe
