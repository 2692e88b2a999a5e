#include "vpe/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace vpe::ad {

namespace {

std::string shape_str(const Mat& m) {
  return "[" + std::to_string(m.rows) + "x" + std::to_string(m.cols) + "]";
}

[[noreturn]] void shape_error(const char* op, const Mat& a, const Mat& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_str(a) +
                              " and " + shape_str(b));
}

// Right operand of add/sub/mul may be same-shape, a 1xN row, or a 1x1 scalar.
enum class Broadcast { kNone, kRow, kScalar };

Broadcast broadcast_kind(const char* op, const Mat& a, const Mat& b) {
  if (a.rows == b.rows && a.cols == b.cols) return Broadcast::kNone;
  if (b.rows == 1 && b.cols == 1) return Broadcast::kScalar;
  if (b.rows == 1 && b.cols == a.cols) return Broadcast::kRow;
  shape_error(op, a, b);
}

}  // namespace

bool all_finite(const Mat& m) {
  double s = 0.0;
  for (double v : m.data) s += std::abs(v);
  return std::isfinite(s);
}

void gemm_nn(const Mat& a, const Mat& b, Mat& c) {
  const std::size_t m = a.rows, k = a.cols, n = b.cols;
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = &a.data[i * k];
    double* crow = &c.data[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = &b.data[p * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(const Mat& a, const Mat& b, Mat& c) {
  const std::size_t m = a.rows, k = a.cols, n = b.rows;
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = &a.data[i * k];
    double* crow = &c.data[i * n];
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = &b.data[j * k];
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

void gemm_tn(const Mat& a, const Mat& b, Mat& c) {
  const std::size_t k = a.rows, m = a.cols, n = b.cols;
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = &a.data[p * m];
    const double* brow = &b.data[p * n];
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      double* crow = &c.data[i * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

std::size_t Tensor::rows() const { return tape_->node(id_).val.rows; }
std::size_t Tensor::cols() const { return tape_->node(id_).val.cols; }
const Mat& Tensor::value() const { return tape_->node(id_).val; }
const Mat& Tensor::grad() const { return tape_->node(id_).grad; }
bool Tensor::requires_grad() const { return tape_->node(id_).requires_grad; }

double Tensor::scalar_value() const {
  const Mat& v = value();
  if (v.size() != 1) throw std::invalid_argument("scalar_value: tensor is not 1x1");
  return v.data[0];
}

Tensor Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Tensor(this, nodes_.size() - 1);
}

void Tape::check_same_tape(const Tensor& a, const Tensor& b) {
  if (a.tape_ != b.tape_) throw std::invalid_argument("operands belong to different tapes");
}

Tensor Tape::leaf(Mat value, bool requires_grad) {
  Node n;
  n.val = std::move(value);
  n.op = Op::kLeaf;
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Tensor Tape::matmul(Tensor a, Tensor b) {
  check_same_tape(a, b);
  const Mat& av = node(a.id_).val;
  const Mat& bv = node(b.id_).val;
  if (av.cols != bv.rows) shape_error("matmul", av, bv);
  Node n;
  n.val = Mat(av.rows, bv.cols);
  gemm_nn(av, bv, n.val);
  n.op = Op::kMatmul;
  n.parents[0] = a.id_;
  n.parents[1] = b.id_;
  n.num_parents = 2;
  n.requires_grad = node(a.id_).requires_grad || node(b.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::add(Tensor a, Tensor b) {
  check_same_tape(a, b);
  const Mat& av = node(a.id_).val;
  const Mat& bv = node(b.id_).val;
  const Broadcast bc = broadcast_kind("add", av, bv);
  Node n;
  n.val = av;
  if (bc == Broadcast::kNone) {
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val.data[i] += bv.data[i];
  } else if (bc == Broadcast::kScalar) {
    for (double& v : n.val.data) v += bv.data[0];
  } else {
    for (std::size_t r = 0; r < av.rows; ++r)
      for (std::size_t c = 0; c < av.cols; ++c) n.val.data[r * av.cols + c] += bv.data[c];
  }
  n.op = Op::kAdd;
  n.parents[0] = a.id_;
  n.parents[1] = b.id_;
  n.num_parents = 2;
  n.requires_grad = node(a.id_).requires_grad || node(b.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::sub(Tensor a, Tensor b) {
  check_same_tape(a, b);
  const Mat& av = node(a.id_).val;
  const Mat& bv = node(b.id_).val;
  const Broadcast bc = broadcast_kind("sub", av, bv);
  Node n;
  n.val = av;
  if (bc == Broadcast::kNone) {
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val.data[i] -= bv.data[i];
  } else if (bc == Broadcast::kScalar) {
    for (double& v : n.val.data) v -= bv.data[0];
  } else {
    for (std::size_t r = 0; r < av.rows; ++r)
      for (std::size_t c = 0; c < av.cols; ++c) n.val.data[r * av.cols + c] -= bv.data[c];
  }
  n.op = Op::kSub;
  n.parents[0] = a.id_;
  n.parents[1] = b.id_;
  n.num_parents = 2;
  n.requires_grad = node(a.id_).requires_grad || node(b.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::mul(Tensor a, Tensor b) {
  check_same_tape(a, b);
  const Mat& av = node(a.id_).val;
  const Mat& bv = node(b.id_).val;
  const Broadcast bc = broadcast_kind("mul", av, bv);
  Node n;
  n.val = av;
  if (bc == Broadcast::kNone) {
    for (std::size_t i = 0; i < n.val.size(); ++i) n.val.data[i] *= bv.data[i];
  } else if (bc == Broadcast::kScalar) {
    for (double& v : n.val.data) v *= bv.data[0];
  } else {
    for (std::size_t r = 0; r < av.rows; ++r)
      for (std::size_t c = 0; c < av.cols; ++c) n.val.data[r * av.cols + c] *= bv.data[c];
  }
  n.op = Op::kMul;
  n.parents[0] = a.id_;
  n.parents[1] = b.id_;
  n.num_parents = 2;
  n.requires_grad = node(a.id_).requires_grad || node(b.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::relu(Tensor a) {
  Node n;
  n.val = node(a.id_).val;
  for (double& v : n.val.data) v = v > 0.0 ? v : 0.0;
  n.op = Op::kRelu;
  n.parents[0] = a.id_;
  n.num_parents = 1;
  n.requires_grad = node(a.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::tanh(Tensor a) {
  Node n;
  n.val = node(a.id_).val;
  for (double& v : n.val.data) v = std::tanh(v);
  n.op = Op::kTanh;
  n.parents[0] = a.id_;
  n.num_parents = 1;
  n.requires_grad = node(a.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::exp(Tensor a) {
  Node n;
  n.val = node(a.id_).val;
  for (double& v : n.val.data) v = std::exp(v);
  n.op = Op::kExp;
  n.parents[0] = a.id_;
  n.num_parents = 1;
  n.requires_grad = node(a.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::square(Tensor a) {
  Node n;
  n.val = node(a.id_).val;
  for (double& v : n.val.data) v = v * v;
  n.op = Op::kSquare;
  n.parents[0] = a.id_;
  n.num_parents = 1;
  n.requires_grad = node(a.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::scale(Tensor a, double c) {
  Node n;
  n.val = node(a.id_).val;
  for (double& v : n.val.data) v *= c;
  n.op = Op::kScale;
  n.aux = c;
  n.parents[0] = a.id_;
  n.num_parents = 1;
  n.requires_grad = node(a.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::add_scalar(Tensor a, double c) {
  Node n;
  n.val = node(a.id_).val;
  for (double& v : n.val.data) v += c;
  n.op = Op::kAddScalar;
  n.aux = c;
  n.parents[0] = a.id_;
  n.num_parents = 1;
  n.requires_grad = node(a.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::mean_all(Tensor a) {
  const Mat& av = node(a.id_).val;
  if (av.size() == 0) throw std::invalid_argument("mean_all: empty tensor");
  double s = 0.0;
  for (double v : av.data) s += v;
  Node n;
  n.val = Mat::scalar(s / static_cast<double>(av.size()));
  n.op = Op::kMeanAll;
  n.parents[0] = a.id_;
  n.num_parents = 1;
  n.requires_grad = node(a.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::sum_all(Tensor a) {
  const Mat& av = node(a.id_).val;
  double s = 0.0;
  for (double v : av.data) s += v;
  Node n;
  n.val = Mat::scalar(s);
  n.op = Op::kSumAll;
  n.parents[0] = a.id_;
  n.num_parents = 1;
  n.requires_grad = node(a.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::concat_cols(Tensor a, Tensor b) {
  check_same_tape(a, b);
  const Mat& av = node(a.id_).val;
  const Mat& bv = node(b.id_).val;
  if (av.rows != bv.rows) shape_error("concat_cols", av, bv);
  Node n;
  n.val = Mat(av.rows, av.cols + bv.cols);
  for (std::size_t r = 0; r < av.rows; ++r) {
    for (std::size_t c = 0; c < av.cols; ++c) n.val.at(r, c) = av.at(r, c);
    for (std::size_t c = 0; c < bv.cols; ++c) n.val.at(r, av.cols + c) = bv.at(r, c);
  }
  n.op = Op::kConcatCols;
  n.aux = static_cast<double>(av.cols);
  n.parents[0] = a.id_;
  n.parents[1] = b.id_;
  n.num_parents = 2;
  n.requires_grad = node(a.id_).requires_grad || node(b.id_).requires_grad;
  return push(std::move(n));
}

Tensor Tape::gather_rows(Tensor a, std::vector<std::size_t> indices) {
  const Mat& av = node(a.id_).val;
  Node n;
  n.val = Mat(indices.size(), av.cols);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= av.rows) throw std::invalid_argument("gather_rows: index out of range");
    for (std::size_t c = 0; c < av.cols; ++c) n.val.at(r, c) = av.at(indices[r], c);
  }
  n.op = Op::kGatherRows;
  n.indices = std::move(indices);
  n.parents[0] = a.id_;
  n.num_parents = 1;
  n.requires_grad = node(a.id_).requires_grad;
  return push(std::move(n));
}

void Tape::backward(Tensor loss) {
  if (loss.tape_ != this) throw std::invalid_argument("backward: loss from another tape");
  Node& top = node(loss.id_);
  if (top.val.size() != 1) throw std::invalid_argument("backward: loss must be scalar");

  for (Node& n : nodes_) {
    if (n.requires_grad) n.grad = Mat(n.val.rows, n.val.cols);
  }
  if (!top.requires_grad) return;  // loss does not depend on any tracked leaf
  top.grad.data[0] = 1.0;

  for (std::size_t idx = loss.id_ + 1; idx-- > 0;) {
    Node& n = nodes_[idx];
    if (!n.requires_grad || n.op == Op::kLeaf) continue;

    const Mat& g = n.grad;
    Node& p0 = nodes_[n.parents[0]];
    switch (n.op) {
      case Op::kMatmul: {
        Node& p1 = nodes_[n.parents[1]];
        if (p0.requires_grad) gemm_nt(g, p1.val, p0.grad);
        if (p1.requires_grad) gemm_tn(p0.val, g, p1.grad);
        break;
      }
      case Op::kAdd:
      case Op::kSub: {
        Node& p1 = nodes_[n.parents[1]];
        const double sign = n.op == Op::kSub ? -1.0 : 1.0;
        if (p0.requires_grad)
          for (std::size_t i = 0; i < g.size(); ++i) p0.grad.data[i] += g.data[i];
        if (p1.requires_grad) {
          if (p1.val.rows == g.rows && p1.val.cols == g.cols) {
            for (std::size_t i = 0; i < g.size(); ++i) p1.grad.data[i] += sign * g.data[i];
          } else if (p1.val.size() == 1) {
            double s = 0.0;
            for (double v : g.data) s += v;
            p1.grad.data[0] += sign * s;
          } else {
            for (std::size_t r = 0; r < g.rows; ++r)
              for (std::size_t c = 0; c < g.cols; ++c)
                p1.grad.data[c] += sign * g.at(r, c);
          }
        }
        break;
      }
      case Op::kMul: {
        Node& p1 = nodes_[n.parents[1]];
        const Mat& av = p0.val;
        const Mat& bv = p1.val;
        if (p0.requires_grad) {
          if (bv.rows == g.rows && bv.cols == g.cols) {
            for (std::size_t i = 0; i < g.size(); ++i)
              p0.grad.data[i] += g.data[i] * bv.data[i];
          } else if (bv.size() == 1) {
            for (std::size_t i = 0; i < g.size(); ++i)
              p0.grad.data[i] += g.data[i] * bv.data[0];
          } else {
            for (std::size_t r = 0; r < g.rows; ++r)
              for (std::size_t c = 0; c < g.cols; ++c)
                p0.grad.at(r, c) += g.at(r, c) * bv.data[c];
          }
        }
        if (p1.requires_grad) {
          if (bv.rows == g.rows && bv.cols == g.cols) {
            for (std::size_t i = 0; i < g.size(); ++i)
              p1.grad.data[i] += g.data[i] * av.data[i];
          } else if (bv.size() == 1) {
            double s = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) s += g.data[i] * av.data[i];
            p1.grad.data[0] += s;
          } else {
            for (std::size_t r = 0; r < g.rows; ++r)
              for (std::size_t c = 0; c < g.cols; ++c)
                p1.grad.data[c] += g.at(r, c) * av.at(r, c);
          }
        }
        break;
      }
      case Op::kRelu:
        if (p0.requires_grad)
          for (std::size_t i = 0; i < g.size(); ++i)
            p0.grad.data[i] += p0.val.data[i] > 0.0 ? g.data[i] : 0.0;
        break;
      case Op::kTanh:
        if (p0.requires_grad)
          for (std::size_t i = 0; i < g.size(); ++i)
            p0.grad.data[i] += g.data[i] * (1.0 - n.val.data[i] * n.val.data[i]);
        break;
      case Op::kExp:
        if (p0.requires_grad)
          for (std::size_t i = 0; i < g.size(); ++i)
            p0.grad.data[i] += g.data[i] * n.val.data[i];
        break;
      case Op::kSquare:
        if (p0.requires_grad)
          for (std::size_t i = 0; i < g.size(); ++i)
            p0.grad.data[i] += 2.0 * g.data[i] * p0.val.data[i];
        break;
      case Op::kScale:
        if (p0.requires_grad)
          for (std::size_t i = 0; i < g.size(); ++i) p0.grad.data[i] += n.aux * g.data[i];
        break;
      case Op::kAddScalar:
        if (p0.requires_grad)
          for (std::size_t i = 0; i < g.size(); ++i) p0.grad.data[i] += g.data[i];
        break;
      case Op::kMeanAll:
        if (p0.requires_grad) {
          const double gi = g.data[0] / static_cast<double>(p0.val.size());
          for (double& v : p0.grad.data) v += gi;
        }
        break;
      case Op::kSumAll:
        if (p0.requires_grad)
          for (double& v : p0.grad.data) v += g.data[0];
        break;
      case Op::kConcatCols: {
        Node& p1 = nodes_[n.parents[1]];
        const std::size_t split = static_cast<std::size_t>(n.aux);
        for (std::size_t r = 0; r < g.rows; ++r) {
          if (p0.requires_grad)
            for (std::size_t c = 0; c < split; ++c) p0.grad.at(r, c) += g.at(r, c);
          if (p1.requires_grad)
            for (std::size_t c = split; c < g.cols; ++c)
              p1.grad.at(r, c - split) += g.at(r, c);
        }
        break;
      }
      case Op::kGatherRows:
        if (p0.requires_grad) {
          for (std::size_t r = 0; r < n.indices.size(); ++r)
            for (std::size_t c = 0; c < g.cols; ++c)
              p0.grad.at(n.indices[r], c) += g.at(r, c);
        }
        break;
      case Op::kLeaf:
        break;
    }
  }
}

void Tape::reset() { nodes_.clear(); }

}  // namespace vpe::ad
