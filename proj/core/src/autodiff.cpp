#include "lakf/autodiff.hpp"

#include <cmath>

#include "lakf/errors.hpp"

namespace lakf::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  throw DomainError("autodiff", std::string(op) + ": shape mismatch (" +
                                    std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ")");
}

}  // namespace

const Eigen::MatrixXd& Var::value() const {
  if (!valid()) throw DomainError("autodiff", "value() on empty Var");
  return tape_->node(*this).value;
}

const Tape::Node& Tape::node(Var v) const {
  check(v, "node");
  return nodes_[v.idx_];
}

void Tape::check(Var v, const char* op) const {
  if (v.tape_ != this || v.idx_ < 0 || v.idx_ >= static_cast<int>(nodes_.size())) {
    throw DomainError("autodiff", std::string(op) + ": Var does not belong to this tape");
  }
}

Eigen::MatrixXd& Tape::grad_ref(int idx) {
  Node& n = nodes_[idx];
  if (n.grad.size() == 0) {
    n.grad = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

Var Tape::push(Eigen::MatrixXd value, bool track, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(value), {}, track, std::move(back)});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Eigen::MatrixXd v) { return push(std::move(v), false, nullptr); }

Var Tape::leaf(Eigen::MatrixXd v) { return push(std::move(v), true, nullptr); }

Var Tape::add(Var a, Var b) {
  check(a, "add");
  check(b, "add");
  const auto& va = nodes_[a.idx_].value;
  const auto& vb = nodes_[b.idx_].value;
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) shape_error("add", va, vb);
  const int ia = a.idx_, ib = b.idx_;
  const bool ta = nodes_[ia].track, tb = nodes_[ib].track;
  nodes_.push_back(Node{va + vb, {}, ta || tb, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta || tb) {
    nodes_[out].back = [ia, ib, out, ta, tb](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      if (ta) t.grad_ref(ia) += g;
      if (tb) t.grad_ref(ib) += g;
    };
  }
  return Var(this, out);
}

Var Tape::sub(Var a, Var b) {
  check(a, "sub");
  check(b, "sub");
  const auto& va = nodes_[a.idx_].value;
  const auto& vb = nodes_[b.idx_].value;
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) shape_error("sub", va, vb);
  const int ia = a.idx_, ib = b.idx_;
  const bool ta = nodes_[ia].track, tb = nodes_[ib].track;
  nodes_.push_back(Node{va - vb, {}, ta || tb, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta || tb) {
    nodes_[out].back = [ia, ib, out, ta, tb](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      if (ta) t.grad_ref(ia) += g;
      if (tb) t.grad_ref(ib) -= g;
    };
  }
  return Var(this, out);
}

Var Tape::scale(Var a, double s) {
  check(a, "scale");
  const int ia = a.idx_;
  const bool ta = nodes_[ia].track;
  nodes_.push_back(Node{nodes_[ia].value * s, {}, ta, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta) {
    nodes_[out].back = [ia, out, s](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      t.grad_ref(ia) += s * g;
    };
  }
  return Var(this, out);
}

Var Tape::matmul(Var a, Var b) {
  check(a, "matmul");
  check(b, "matmul");
  const auto& va = nodes_[a.idx_].value;
  const auto& vb = nodes_[b.idx_].value;
  if (va.cols() != vb.rows()) shape_error("matmul", va, vb);
  const int ia = a.idx_, ib = b.idx_;
  const bool ta = nodes_[ia].track, tb = nodes_[ib].track;
  nodes_.push_back(Node{va * vb, {}, ta || tb, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta || tb) {
    nodes_[out].back = [ia, ib, out, ta, tb](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      if (ta) t.grad_ref(ia) += g * t.nodes_[ib].value.transpose();
      if (tb) t.grad_ref(ib) += t.nodes_[ia].value.transpose() * g;
    };
  }
  return Var(this, out);
}

Var Tape::hadamard(Var a, Var b) {
  check(a, "hadamard");
  check(b, "hadamard");
  const auto& va = nodes_[a.idx_].value;
  const auto& vb = nodes_[b.idx_].value;
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) shape_error("hadamard", va, vb);
  const int ia = a.idx_, ib = b.idx_;
  const bool ta = nodes_[ia].track, tb = nodes_[ib].track;
  nodes_.push_back(Node{va.cwiseProduct(vb), {}, ta || tb, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta || tb) {
    nodes_[out].back = [ia, ib, out, ta, tb](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      if (ta) t.grad_ref(ia) += g.cwiseProduct(t.nodes_[ib].value);
      if (tb) t.grad_ref(ib) += g.cwiseProduct(t.nodes_[ia].value);
    };
  }
  return Var(this, out);
}

Var Tape::tanh(Var a) {
  check(a, "tanh");
  const int ia = a.idx_;
  const bool ta = nodes_[ia].track;
  nodes_.push_back(Node{nodes_[ia].value.array().tanh().matrix(), {}, ta, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta) {
    nodes_[out].back = [ia, out](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      const auto& y = t.nodes_[out].value;
      t.grad_ref(ia) += (g.array() * (1.0 - y.array().square())).matrix();
    };
  }
  return Var(this, out);
}

Var Tape::sigmoid(Var a) {
  check(a, "sigmoid");
  const int ia = a.idx_;
  const bool ta = nodes_[ia].track;
  Eigen::MatrixXd y = (1.0 / (1.0 + (-nodes_[ia].value.array()).exp())).matrix();
  nodes_.push_back(Node{std::move(y), {}, ta, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta) {
    nodes_[out].back = [ia, out](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      const auto& y = t.nodes_[out].value;
      t.grad_ref(ia) += (g.array() * y.array() * (1.0 - y.array())).matrix();
    };
  }
  return Var(this, out);
}

Var Tape::transpose(Var a) {
  check(a, "transpose");
  const int ia = a.idx_;
  const bool ta = nodes_[ia].track;
  nodes_.push_back(Node{nodes_[ia].value.transpose(), {}, ta, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta) {
    nodes_[out].back = [ia, out](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      t.grad_ref(ia) += g.transpose();
    };
  }
  return Var(this, out);
}

Var Tape::concat_rows(std::span<const Var> blocks) {
  if (blocks.empty()) throw DomainError("autodiff", "concat_rows: no blocks");
  Eigen::Index rows = 0;
  const Eigen::Index cols = nodes_[blocks[0].idx_].value.cols();
  bool track = false;
  for (Var b : blocks) {
    check(b, "concat_rows");
    const auto& v = nodes_[b.idx_].value;
    if (v.cols() != cols) shape_error("concat_rows", nodes_[blocks[0].idx_].value, v);
    rows += v.rows();
    track = track || nodes_[b.idx_].track;
  }
  Eigen::MatrixXd out_v(rows, cols);
  Eigen::Index off = 0;
  std::vector<int> idx;
  std::vector<Eigen::Index> offs, sizes;
  idx.reserve(blocks.size());
  for (Var b : blocks) {
    const auto& v = nodes_[b.idx_].value;
    out_v.middleRows(off, v.rows()) = v;
    idx.push_back(b.idx_);
    offs.push_back(off);
    sizes.push_back(v.rows());
    off += v.rows();
  }
  nodes_.push_back(Node{std::move(out_v), {}, track, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (track) {
    nodes_[out].back = [idx = std::move(idx), offs = std::move(offs),
                        sizes = std::move(sizes), out](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (t.nodes_[idx[i]].track) {
          t.grad_ref(idx[i]) += g.middleRows(offs[i], sizes[i]);
        }
      }
    };
  }
  return Var(this, out);
}

Var Tape::add_col_broadcast(Var a, Var b) {
  check(a, "add_col_broadcast");
  check(b, "add_col_broadcast");
  const auto& va = nodes_[a.idx_].value;
  const auto& vb = nodes_[b.idx_].value;
  if (vb.cols() != 1 || va.rows() != vb.rows()) shape_error("add_col_broadcast", va, vb);
  const int ia = a.idx_, ib = b.idx_;
  const bool ta = nodes_[ia].track, tb = nodes_[ib].track;
  nodes_.push_back(Node{va.colwise() + vb.col(0), {}, ta || tb, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta || tb) {
    nodes_[out].back = [ia, ib, out, ta, tb](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      if (ta) t.grad_ref(ia) += g;
      if (tb) t.grad_ref(ib) += g.rowwise().sum();
    };
  }
  return Var(this, out);
}

Var Tape::col_mean(Var a) {
  check(a, "col_mean");
  const int ia = a.idx_;
  const bool ta = nodes_[ia].track;
  const auto& va = nodes_[ia].value;
  const double inv = 1.0 / static_cast<double>(va.cols());
  nodes_.push_back(Node{va.rowwise().mean(), {}, ta, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta) {
    const Eigen::Index cols = va.cols();
    nodes_[out].back = [ia, out, inv, cols](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      t.grad_ref(ia) += inv * g.replicate(1, cols);
    };
  }
  return Var(this, out);
}

Var Tape::reshape(Var a, int rows, int cols) {
  check(a, "reshape");
  const auto& va = nodes_[a.idx_].value;
  if (va.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw DomainError("autodiff", "reshape: element count mismatch");
  }
  const int ia = a.idx_;
  const bool ta = nodes_[ia].track;
  Eigen::MatrixXd v = Eigen::Map<const Eigen::MatrixXd>(va.data(), rows, cols);
  nodes_.push_back(Node{std::move(v), {}, ta, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta) {
    const Eigen::Index r0 = va.rows(), c0 = va.cols();
    nodes_[out].back = [ia, out, r0, c0](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      t.grad_ref(ia) += Eigen::Map<const Eigen::MatrixXd>(g.data(), r0, c0);
    };
  }
  return Var(this, out);
}

Var Tape::pick_rows(Var a, std::vector<int> idx) {
  check(a, "pick_rows");
  const auto& va = nodes_[a.idx_].value;
  Eigen::MatrixXd v(static_cast<Eigen::Index>(idx.size()), va.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= va.rows()) {
      throw DomainError("autodiff", "pick_rows: index out of range");
    }
    v.row(static_cast<Eigen::Index>(i)) = va.row(idx[i]);
  }
  const int ia = a.idx_;
  const bool ta = nodes_[ia].track;
  nodes_.push_back(Node{std::move(v), {}, ta, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta) {
    nodes_[out].back = [ia, out, idx = std::move(idx)](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      Eigen::MatrixXd& ga = t.grad_ref(ia);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        ga.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
      }
    };
  }
  return Var(this, out);
}

Var Tape::scatter_rows(Var a, std::vector<int> idx, int out_rows) {
  check(a, "scatter_rows");
  const auto& va = nodes_[a.idx_].value;
  if (va.rows() != static_cast<Eigen::Index>(idx.size())) {
    throw DomainError("autodiff", "scatter_rows: row/index count mismatch");
  }
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(out_rows, va.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= out_rows) {
      throw DomainError("autodiff", "scatter_rows: index out of range");
    }
    v.row(idx[i]) = va.row(static_cast<Eigen::Index>(i));
  }
  const int ia = a.idx_;
  const bool ta = nodes_[ia].track;
  nodes_.push_back(Node{std::move(v), {}, ta, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta) {
    nodes_[out].back = [ia, out, idx = std::move(idx)](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      Eigen::MatrixXd& ga = t.grad_ref(ia);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        ga.row(static_cast<Eigen::Index>(i)) += g.row(idx[i]);
      }
    };
  }
  return Var(this, out);
}

Var Tape::clamp_min_rows(Var a, std::vector<int> rows, double floor) {
  check(a, "clamp_min_rows");
  const auto& va = nodes_[a.idx_].value;
  Eigen::MatrixXd v = va;
  for (int r : rows) {
    if (r < 0 || r >= va.rows()) {
      throw DomainError("autodiff", "clamp_min_rows: index out of range");
    }
    v.row(r) = v.row(r).cwiseMax(floor);
  }
  const int ia = a.idx_;
  const bool ta = nodes_[ia].track;
  nodes_.push_back(Node{std::move(v), {}, ta, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (ta) {
    nodes_[out].back = [ia, out, rows = std::move(rows), floor](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      Eigen::MatrixXd masked = g;
      const auto& va2 = t.nodes_[ia].value;
      for (int r : rows) {
        for (Eigen::Index c = 0; c < va2.cols(); ++c) {
          if (va2(r, c) < floor) masked(r, c) = 0.0;
        }
      }
      t.grad_ref(ia) += masked;
    };
  }
  return Var(this, out);
}

Var Tape::smooth_l1_sum(Var pred, const Eigen::VectorXd& target) {
  check(pred, "smooth_l1_sum");
  const auto& vp = nodes_[pred.idx_].value;
  if (vp.cols() != 1 || vp.rows() != target.rows()) {
    shape_error("smooth_l1_sum", vp, target);
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < vp.rows(); ++i) {
    const double e = vp(i, 0) - target(i);
    const double ae = std::abs(e);
    total += ae < 1.0 ? 0.5 * e * e : ae - 0.5;
  }
  const int ip = pred.idx_;
  const bool tp = nodes_[ip].track;
  nodes_.push_back(Node{Eigen::MatrixXd::Constant(1, 1, total), {}, tp, nullptr});
  const int out = static_cast<int>(nodes_.size()) - 1;
  if (tp) {
    nodes_[out].back = [ip, out, target](Tape& t) {
      const Eigen::MatrixXd& g = t.nodes_[out].grad;
      if (g.size() == 0) return;
      const double gs = g(0, 0);
      const auto& vp2 = t.nodes_[ip].value;
      Eigen::MatrixXd& gp = t.grad_ref(ip);
      for (Eigen::Index i = 0; i < vp2.rows(); ++i) {
        const double e = vp2(i, 0) - target(i);
        gp(i, 0) += gs * (std::abs(e) < 1.0 ? e : (e > 0.0 ? 1.0 : -1.0));
      }
    };
  }
  return Var(this, out);
}

void Tape::backward(Var root) {
  check(root, "backward");
  const Node& r = nodes_[root.idx_];
  if (r.value.rows() != 1 || r.value.cols() != 1) {
    throw DomainError("autodiff", "backward: root must be scalar");
  }
  if (!r.track) return;  // nothing depends on tracked inputs
  grad_ref(root.idx_)(0, 0) += 1.0;
  for (int i = root.idx_; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.back && n.grad.size() != 0) n.back(*this);
  }
}

Eigen::MatrixXd Tape::grad(Var v) const {
  check(v, "grad");
  const Node& n = nodes_[v.idx_];
  if (n.grad.size() == 0) {
    return Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

void Tape::clear() { nodes_.clear(); }

// Var::value is defined after Tape so the inline friend access compiles.
// (The extra expression in the early definition above is dead code kept
// out; see header.)

}  // namespace lakf::ad
