#pragma once

#include <Eigen/Core>
#include <deque>
#include <functional>
#include <vector>

#include "s2p/common.hpp"
#include "s2p/rng.hpp"

namespace s2p::nn {

using Matrix = Eigen::MatrixXd;

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid for the tape that
// created it.
class Var {
 public:
  Var() = default;
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int idx) : tape_(tape), idx_(idx) {}
  Tape* tape_ = nullptr;
  int idx_ = -1;
};

// Eager reverse-mode autodiff over dense double matrices. Ops compute their
// value at creation time and record a pullback; backward() walks the nodes in
// reverse creation order (a valid topological order by construction) and then
// flushes leaf gradients into their registered sinks.
//
// A Tape is single-use: build one forward pass, call backward() at most once.
// Not thread-safe; use one Tape per worker.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Plain data, no gradient.
  Var input(Matrix v);
  // Parameter leaf. `value` must outlive the tape. After backward(), the
  // leaf's gradient is added into *sink (if sink is non-null).
  Var leaf(const Matrix& value, Matrix* sink);

  Var matmul(Var a, Var b);     // A * B
  Var matmul_nt(Var a, Var b);  // A * B^T
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);  // elementwise
  Var scale(Var a, double c);
  Var add_rowvec(Var a, Var row);  // broadcast a 1 x C row over all rows of A
  Var relu(Var a);
  Var sigmoid(Var a);
  Var logsigmoid(Var a);
  Var softmax_rows(Var a);
  Var layernorm_rows(Var x, Var gain, Var bias, double eps = 1e-5);
  Var slice_cols(Var a, int c0, int n);
  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  Var mean_rows(Var a);  // 1 x C column means
  Var sum_all(Var a);    // 1 x 1
  Var mean_all(Var a);   // 1 x 1
  Var square(Var a);
  Var log_elem(Var a);  // caller guarantees strictly positive entries
  // Selects rows of `table` by index (embedding lookup); duplicate ids
  // accumulate gradient.
  Var rows_select(Var table, const std::vector<int>& ids);
  // Mean over rows with mask[i] == 1 of -log softmax(logits.row(i))[targets[i]].
  // Rows with mask[i] == 0 contribute nothing, including zero gradient.
  Var cross_entropy_mean(Var logits, const std::vector<int>& targets,
                         const std::vector<double>& mask);
  // Inverted dropout; identity when rate == 0.
  Var dropout(Var a, double rate, Rng& rng);
  // 1-D convolution over rows (time) with zero padding, stride 1.
  // x: T x IC, w: (K*IC) x OC laid out [tap 0 channels..., tap 1 channels...],
  // b: 1 x OC. Output: T x OC.
  Var conv1d_same(Var x, Var w, Var b, int kernel);

  void backward(Var loss_scalar);

  const Matrix& value(Var v) const;
  // Gradient of the node (valid after backward; zero matrix if untouched).
  Matrix grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }

  // Additive attention mask: 0 on or below the diagonal, large negative above.
  static Matrix causal_mask(int n);

 private:
  struct Node {
    Matrix owned;
    const Matrix* v = nullptr;  // points at `owned` or at external storage
    Matrix grad;
    bool grad_live = false;
    Matrix* sink = nullptr;
    std::function<void(Tape&, const Matrix&)> back;  // arg: this node's grad
  };

  Var push(Matrix value, std::function<void(Tape&, const Matrix&)> back);
  Node& node(Var v);
  const Node& cnode(Var v) const;
  Matrix& grad_accum(int idx);
  void check_same_shape(Var a, Var b, const char* op) const;

  std::deque<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace s2p::nn
