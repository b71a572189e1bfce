#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace lakf::ad {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; invalidated by Tape::clear().
class Var {
public:
  Var() = default;
  bool valid() const { return tape_ != nullptr; }
  const Eigen::MatrixXd& value() const;

private:
  friend class Tape;
  Var(Tape* tape, int idx) : tape_(tape), idx_(idx) {}
  Tape* tape_ = nullptr;
  int idx_ = -1;
};

/// Reverse-mode tape over dense matrices. Build the computation forward,
/// then call backward() on a scalar node; gradients accumulate on every
/// node created with grad tracking. Nodes whose inputs are all constants
/// skip gradient bookkeeping entirely, so inference over the same code
/// path costs little more than the raw arithmetic.
class Tape {
public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Value without gradient tracking.
  Var constant(Eigen::MatrixXd v);
  /// Differentiable input (parameter or state carried across steps).
  Var leaf(Eigen::MatrixXd v);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double s);
  Var matmul(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var transpose(Var a);
  /// Vertical stack; all blocks must share a column count.
  Var concat_rows(std::span<const Var> blocks);
  /// Broadcast a column vector over the columns of a matrix: a + b * 1^T.
  Var add_col_broadcast(Var a, Var b);
  /// Mean over columns; M x C -> M x 1.
  Var col_mean(Var a);
  /// Column-major reshape.
  Var reshape(Var a, int rows, int cols);
  Var pick_rows(Var a, std::vector<int> idx);
  /// Rows of `a` placed at `idx` in an out_rows-tall zero matrix.
  Var scatter_rows(Var a, std::vector<int> idx, int out_rows);
  /// max(entry, floor) applied to the listed rows only; clamped entries
  /// pass no gradient.
  Var clamp_min_rows(Var a, std::vector<int> rows, double floor);
  /// Smooth-L1 of (pred - target), summed over entries; returns 1 x 1.
  Var smooth_l1_sum(Var pred, const Eigen::VectorXd& target);

  /// Seed d(root)/d(root) = 1 and sweep the tape in reverse. `root` must
  /// be scalar (1 x 1).
  void backward(Var root);

  /// Gradient accumulated on `v` by the last backward(). Zero matrix if
  /// the node tracks gradients but received none.
  Eigen::MatrixXd grad(Var v) const;

  /// Drop all nodes, keeping allocated capacity where possible.
  void clear();

  std::size_t size() const { return nodes_.size(); }

private:
  friend class Var;
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    bool track = false;
    std::function<void(Tape&)> back;
  };

  const Node& node(Var v) const;
  Eigen::MatrixXd& grad_ref(int idx);
  Var push(Eigen::MatrixXd value, bool track, std::function<void(Tape&)> back);
  void check(Var v, const char* op) const;

  std::vector<Node> nodes_;
};

}  // namespace lakf::ad
