#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace vpe::ad {

// Dense row-major matrix. Vectors are 1xN, scalars 1x1.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  static Mat scalar(double v) {
    Mat m(1, 1);
    m.data[0] = v;
    return m;
  }
  static Mat row(std::vector<double> v) {
    Mat m;
    m.rows = 1;
    m.cols = v.size();
    m.data = std::move(v);
    return m;
  }

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return data.size(); }
};

bool all_finite(const Mat& m);

// C += A * B ; C += A * B^T ; C += A^T * B
void gemm_nn(const Mat& a, const Mat& b, Mat& c);
void gemm_nt(const Mat& a, const Mat& b, Mat& c);
void gemm_tn(const Mat& a, const Mat& b, Mat& c);

class Tape;

// Lightweight handle into a tape node.
class Tensor {
 public:
  Tensor() = default;

  std::size_t rows() const;
  std::size_t cols() const;
  const Mat& value() const;
  const Mat& grad() const;  // valid after Tape::backward
  bool requires_grad() const;
  double scalar_value() const;

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records primitive ops in creation order (already topological) and replays
// them in reverse for exact gradients.
class Tape {
 public:
  Tensor leaf(Mat value, bool requires_grad = false);
  Tensor constant(Mat value) { return leaf(std::move(value), false); }
  Tensor scalar(double v) { return leaf(Mat::scalar(v), false); }

  // Forward primitives. add/sub/mul broadcast a 1xN row or 1x1 scalar on the
  // right operand.
  Tensor matmul(Tensor a, Tensor b);
  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor mul(Tensor a, Tensor b);
  Tensor relu(Tensor a);
  Tensor tanh(Tensor a);
  Tensor exp(Tensor a);
  Tensor square(Tensor a);
  Tensor scale(Tensor a, double c);
  Tensor add_scalar(Tensor a, double c);
  Tensor mean_all(Tensor a);
  Tensor sum_all(Tensor a);
  Tensor concat_cols(Tensor a, Tensor b);
  Tensor gather_rows(Tensor a, std::vector<std::size_t> indices);

  // Reverse pass from a scalar loss. Unreached grad-tracked leaves keep zero
  // gradients.
  void backward(Tensor loss);

  void reset();
  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  friend class Tensor;

  enum class Op {
    kLeaf,
    kMatmul,
    kAdd,
    kSub,
    kMul,
    kRelu,
    kTanh,
    kExp,
    kSquare,
    kScale,
    kAddScalar,
    kMeanAll,
    kSumAll,
    kConcatCols,
    kGatherRows,
  };

  struct Node {
    Mat val;
    Mat grad;
    Op op = Op::kLeaf;
    bool requires_grad = false;
    std::size_t parents[2] = {0, 0};
    int num_parents = 0;
    double aux = 0.0;
    std::vector<std::size_t> indices;
  };

  Tensor push(Node node);
  Node& node(std::size_t id) { return nodes_[id]; }
  const Node& node(std::size_t id) const { return nodes_[id]; }
  static void check_same_tape(const Tensor& a, const Tensor& b);

  std::vector<Node> nodes_;
};

}  // namespace vpe::ad
