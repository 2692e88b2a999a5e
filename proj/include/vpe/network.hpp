#pragma once

#include <vector>

#include "vpe/rng.hpp"
#include "vpe/tensor.hpp"

namespace vpe::ad {

// x is a row vector, so W is stored input x output.
struct Linear {
  Mat W;
  Mat b;
};

// Linear projection to width, (depth-2)/2 pre-activation residual blocks
// (relu, linear, relu, linear, skip), then a linear head. depth counts linear
// layers and must be even and >= 2.
struct Network {
  int input_dim = 0;
  int output_dim = 0;
  int depth = 0;
  int width = 0;
  std::vector<Linear> layers;

  int num_blocks() const { return (depth - 2) / 2; }
};

Network make_network(int input_dim, int output_dim, int depth, int width, Rng& rng);

std::vector<Mat*> parameters(Network& net);
std::vector<const Mat*> parameters(const Network& net);

// Polyak update: target <- target + tau * (online - target), applied per entry.
void polyak_update(Network& target, const Network& online, double tau);
void polyak_update(Mat& target, const Mat& online, double tau);

// Taped forward for training.
struct TapedParams {
  std::vector<Tensor> leaves;  // W0, b0, W1, b1, ...
};

TapedParams bind_params(Tape& tape, const Network& net, bool trainable);
Tensor apply_network(Tape& tape, const Network& net, const TapedParams& params, Tensor input);

// Tape-free forward for rollouts and target evaluation.
Mat mlp_forward(const Network& net, const Mat& input);

}  // namespace vpe::ad
