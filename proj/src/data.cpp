#include "vpe/data.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vpe {

namespace {

constexpr char kMagic[4] = {'V', 'P', 'E', 'D'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f32(std::ostream& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  write_u32(out, bits);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double read_f32(std::istream& in) {
  const std::uint32_t bits = read_u32(in);
  float f;
  std::memcpy(&f, &bits, 4);
  return static_cast<double>(f);
}

}  // namespace

void save_transitions(const std::string& path, const std::vector<Transition>& transitions,
                      std::uint32_t num_mdps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_transitions: cannot open " + path);
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u64(out, transitions.size());
  write_u32(out, Dataset::kObsDim);
  write_u32(out, Dataset::kActDim);
  write_u32(out, num_mdps);
  for (const auto& t : transitions) {
    for (double v : t.obs) write_f32(out, v);
    write_f32(out, t.action);
    write_f32(out, t.reward);
    for (double v : t.next_obs) write_f32(out, v);
    write_f32(out, t.teacher_next_action);
    write_u32(out, t.mdp_index);
  }
  if (!out) throw std::runtime_error("save_transitions: write failed for " + path);
}

std::vector<Transition> load_transitions(const std::string& path, std::uint32_t* num_mdps_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_transitions: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_transitions: bad magic in " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kVersion)
    throw std::runtime_error("load_transitions: unsupported version in " + path);
  const std::uint64_t count = read_u64(in);
  const std::uint32_t obs_dim = read_u32(in);
  const std::uint32_t act_dim = read_u32(in);
  const std::uint32_t num_mdps = read_u32(in);
  if (obs_dim != Dataset::kObsDim || act_dim != Dataset::kActDim)
    throw std::runtime_error("load_transitions: unexpected dimensions in " + path);

  std::vector<Transition> transitions(count);
  for (auto& t : transitions) {
    for (double& v : t.obs) v = read_f32(in);
    t.action = read_f32(in);
    t.reward = read_f32(in);
    for (double& v : t.next_obs) v = read_f32(in);
    t.teacher_next_action = read_f32(in);
    t.mdp_index = read_u32(in);
  }
  if (!in) throw std::runtime_error("load_transitions: truncated file " + path);
  if (num_mdps_out) *num_mdps_out = num_mdps;
  return transitions;
}

void save_dataset(const std::string& train_path, const std::string& val_path,
                  const Dataset& dataset) {
  save_transitions(train_path, dataset.train, dataset.num_mdps);
  save_transitions(val_path, dataset.validation, dataset.num_mdps);
}

Dataset load_dataset(const std::string& train_path, const std::string& val_path) {
  Dataset d;
  std::uint32_t k_train = 0;
  std::uint32_t k_val = 0;
  d.train = load_transitions(train_path, &k_train);
  d.validation = load_transitions(val_path, &k_val);
  if (k_train != k_val)
    throw std::runtime_error("load_dataset: train/validation MDP counts disagree");
  d.num_mdps = k_train;
  return d;
}

}  // namespace vpe
