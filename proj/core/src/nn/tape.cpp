#include "s2p/nn/tape.hpp"

#include <cmath>

namespace s2p::nn {

namespace {
constexpr double kMaskValue = -1e30;

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_logsigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}
}  // namespace

Var Tape::push(Matrix value, std::function<void(Tape&, const Matrix&)> back) {
  Node n;
  n.owned = std::move(value);
  n.v = &n.owned;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  // deque never relocates elements, but `v` was captured before the move.
  nodes_.back().v = &nodes_.back().owned;
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Tape::Node& Tape::node(Var v) {
  if (v.tape_ != this) throw ValidationError("Var used with a foreign tape");
  return nodes_[static_cast<std::size_t>(v.idx_)];
}

const Tape::Node& Tape::cnode(Var v) const {
  if (v.tape_ != this) throw ValidationError("Var used with a foreign tape");
  return nodes_[static_cast<std::size_t>(v.idx_)];
}

Matrix& Tape::grad_accum(int idx) {
  Node& n = nodes_[static_cast<std::size_t>(idx)];
  if (!n.grad_live) {
    n.grad = Matrix::Zero(n.v->rows(), n.v->cols());
    n.grad_live = true;
  }
  return n.grad;
}

const Matrix& Tape::value(Var v) const { return *cnode(v).v; }

Matrix Tape::grad(Var v) const {
  const Node& n = cnode(v);
  if (!n.grad_live) return Matrix::Zero(n.v->rows(), n.v->cols());
  return n.grad;
}

void Tape::check_same_shape(Var a, Var b, const char* op) const {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw ValidationError(std::string(op) + ": shape mismatch " + std::to_string(A.rows()) + "x" +
                          std::to_string(A.cols()) + " vs " + std::to_string(B.rows()) + "x" +
                          std::to_string(B.cols()));
}

Var Tape::input(Matrix v) { return push(std::move(v), nullptr); }

Var Tape::leaf(const Matrix& value, Matrix* sink) {
  Node n;
  n.v = &value;
  n.sink = sink;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.cols() != B.rows())
    throw ValidationError("matmul: inner dimensions disagree: " + std::to_string(A.cols()) +
                          " vs " + std::to_string(B.rows()));
  const int ia = a.idx_, ib = b.idx_;
  return push(A * B, [ia, ib](Tape& t, const Matrix& g) {
    t.grad_accum(ia).noalias() += g * t.nodes_[static_cast<std::size_t>(ib)].v->transpose();
    t.grad_accum(ib).noalias() += t.nodes_[static_cast<std::size_t>(ia)].v->transpose() * g;
  });
}

Var Tape::matmul_nt(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.cols() != B.cols())
    throw ValidationError("matmul_nt: inner dimensions disagree: " + std::to_string(A.cols()) +
                          " vs " + std::to_string(B.cols()));
  const int ia = a.idx_, ib = b.idx_;
  return push(A * B.transpose(), [ia, ib](Tape& t, const Matrix& g) {
    t.grad_accum(ia).noalias() += g * *t.nodes_[static_cast<std::size_t>(ib)].v;
    t.grad_accum(ib).noalias() += g.transpose() * *t.nodes_[static_cast<std::size_t>(ia)].v;
  });
}

Var Tape::add(Var a, Var b) {
  check_same_shape(a, b, "add");
  const int ia = a.idx_, ib = b.idx_;
  return push(value(a) + value(b), [ia, ib](Tape& t, const Matrix& g) {
    t.grad_accum(ia) += g;
    t.grad_accum(ib) += g;
  });
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  const int ia = a.idx_, ib = b.idx_;
  return push(value(a) - value(b), [ia, ib](Tape& t, const Matrix& g) {
    t.grad_accum(ia) += g;
    t.grad_accum(ib) -= g;
  });
}

Var Tape::cmul(Var a, Var b) {
  check_same_shape(a, b, "cmul");
  const int ia = a.idx_, ib = b.idx_;
  return push(value(a).cwiseProduct(value(b)), [ia, ib](Tape& t, const Matrix& g) {
    t.grad_accum(ia) += g.cwiseProduct(*t.nodes_[static_cast<std::size_t>(ib)].v);
    t.grad_accum(ib) += g.cwiseProduct(*t.nodes_[static_cast<std::size_t>(ia)].v);
  });
}

Var Tape::scale(Var a, double c) {
  const int ia = a.idx_;
  return push(value(a) * c, [ia, c](Tape& t, const Matrix& g) { t.grad_accum(ia) += c * g; });
}

Var Tape::add_rowvec(Var a, Var row) {
  const Matrix& A = value(a);
  const Matrix& R = value(row);
  if (R.rows() != 1 || R.cols() != A.cols())
    throw ValidationError("add_rowvec: row must be 1x" + std::to_string(A.cols()));
  const int ia = a.idx_, ir = row.idx_;
  Matrix out = A;
  out.rowwise() += R.row(0);
  return push(std::move(out), [ia, ir](Tape& t, const Matrix& g) {
    t.grad_accum(ia) += g;
    t.grad_accum(ir) += g.colwise().sum();
  });
}

Var Tape::relu(Var a) {
  const Matrix& A = value(a);
  const int ia = a.idx_;
  return push(A.cwiseMax(0.0), [ia](Tape& t, const Matrix& g) {
    const Matrix& x = *t.nodes_[static_cast<std::size_t>(ia)].v;
    t.grad_accum(ia) += g.cwiseProduct((x.array() > 0.0).cast<double>().matrix());
  });
}

Var Tape::sigmoid(Var a) {
  const Matrix& A = value(a);
  Matrix y = A.unaryExpr([](double x) { return stable_sigmoid(x); });
  const int ia = a.idx_;
  const int iy = static_cast<int>(nodes_.size());  // index the new node will get
  return push(std::move(y), [ia, iy](Tape& t, const Matrix& g) {
    const Matrix& yv = *t.nodes_[static_cast<std::size_t>(iy)].v;
    t.grad_accum(ia) += g.cwiseProduct(yv.cwiseProduct((1.0 - yv.array()).matrix()));
  });
}

Var Tape::logsigmoid(Var a) {
  const Matrix& A = value(a);
  Matrix y = A.unaryExpr([](double x) { return stable_logsigmoid(x); });
  const int ia = a.idx_;
  return push(std::move(y), [ia](Tape& t, const Matrix& g) {
    const Matrix& x = *t.nodes_[static_cast<std::size_t>(ia)].v;
    t.grad_accum(ia) += g.cwiseProduct(x.unaryExpr([](double v) { return stable_sigmoid(-v); }));
  });
}

Var Tape::softmax_rows(Var a) {
  const Matrix& A = value(a);
  Matrix y(A.rows(), A.cols());
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    const double mx = A.row(r).maxCoeff();
    Eigen::ArrayXd e = (A.row(r).array() - mx).exp();
    y.row(r) = (e / e.sum()).matrix();
  }
  const int ia = a.idx_;
  const int iy = static_cast<int>(nodes_.size());  // index the new node will get
  return push(std::move(y), [ia, iy](Tape& t, const Matrix& g) {
    const Matrix& yv = *t.nodes_[static_cast<std::size_t>(iy)].v;
    Matrix& ga = t.grad_accum(ia);
    for (Eigen::Index r = 0; r < yv.rows(); ++r) {
      const double s = g.row(r).dot(yv.row(r));
      ga.row(r) += yv.row(r).cwiseProduct((g.row(r).array() - s).matrix());
    }
  });
}

Var Tape::layernorm_rows(Var x, Var gain, Var bias, double eps) {
  const Matrix& X = value(x);
  const Matrix& G = value(gain);
  const Matrix& B = value(bias);
  const Eigen::Index d = X.cols();
  if (G.rows() != 1 || G.cols() != d || B.rows() != 1 || B.cols() != d)
    throw ValidationError("layernorm_rows: gain/bias must be 1x" + std::to_string(d));
  Matrix xhat(X.rows(), d);
  Eigen::VectorXd istd(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const double mu = X.row(r).mean();
    const double var = (X.row(r).array() - mu).square().mean();
    const double is = 1.0 / std::sqrt(var + eps);
    istd(r) = is;
    xhat.row(r) = ((X.row(r).array() - mu) * is).matrix();
  }
  Matrix out = (xhat.array().rowwise() * G.row(0).array()).matrix();
  out.rowwise() += B.row(0);
  const int ix = x.idx_, ig = gain.idx_, ib = bias.idx_;
  return push(std::move(out),
              [ix, ig, ib, xh = std::move(xhat), is = std::move(istd)](Tape& t, const Matrix& g) {
                const Matrix& gain_v = *t.nodes_[static_cast<std::size_t>(ig)].v;
                const Matrix gh = (g.array().rowwise() * gain_v.row(0).array()).matrix();
                Matrix& gx = t.grad_accum(ix);
                for (Eigen::Index r = 0; r < xh.rows(); ++r) {
                  const double m1 = gh.row(r).mean();
                  const double m2 = gh.row(r).cwiseProduct(xh.row(r)).mean();
                  gx.row(r) +=
                      (is(r) * (gh.row(r).array() - m1 - xh.row(r).array() * m2)).matrix();
                }
                t.grad_accum(ig) += g.cwiseProduct(xh).colwise().sum();
                t.grad_accum(ib) += g.colwise().sum();
              });
}

Var Tape::slice_cols(Var a, int c0, int n) {
  const Matrix& A = value(a);
  if (c0 < 0 || n <= 0 || c0 + n > A.cols()) throw ValidationError("slice_cols: out of range");
  const int ia = a.idx_;
  return push(A.middleCols(c0, n), [ia, c0, n](Tape& t, const Matrix& g) {
    t.grad_accum(ia).middleCols(c0, n) += g;
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ValidationError("concat_cols: no inputs");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  std::vector<int> idx;
  std::vector<int> widths;
  for (Var p : parts) {
    const Matrix& M = value(p);
    if (M.rows() != rows) throw ValidationError("concat_cols: row counts disagree");
    idx.push_back(p.idx_);
    widths.push_back(static_cast<int>(M.cols()));
    cols += M.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    const Matrix& M = value(p);
    out.middleCols(c, M.cols()) = M;
    c += M.cols();
  }
  return push(std::move(out), [idx, widths](Tape& t, const Matrix& g) {
    int c = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      t.grad_accum(idx[k]) += g.middleCols(c, widths[k]);
      c += widths[k];
    }
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ValidationError("concat_rows: no inputs");
  const Eigen::Index cols = value(parts[0]).cols();
  Eigen::Index rows = 0;
  std::vector<int> idx;
  std::vector<int> heights;
  for (Var p : parts) {
    const Matrix& M = value(p);
    if (M.cols() != cols) throw ValidationError("concat_rows: column counts disagree");
    idx.push_back(p.idx_);
    heights.push_back(static_cast<int>(M.rows()));
    rows += M.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    const Matrix& M = value(p);
    out.middleRows(r, M.rows()) = M;
    r += M.rows();
  }
  return push(std::move(out), [idx, heights](Tape& t, const Matrix& g) {
    int r = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      t.grad_accum(idx[k]) += g.middleRows(r, heights[k]);
      r += heights[k];
    }
  });
}

Var Tape::mean_rows(Var a) {
  const Matrix& A = value(a);
  const int ia = a.idx_;
  const double inv = 1.0 / static_cast<double>(A.rows());
  Matrix out = A.colwise().mean();
  return push(std::move(out), [ia, inv](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad_accum(ia);
    ga.noalias() += Eigen::VectorXd::Constant(ga.rows(), inv) * g.row(0);
  });
}

Var Tape::sum_all(Var a) {
  const Matrix& A = value(a);
  const int ia = a.idx_;
  Matrix out(1, 1);
  out(0, 0) = A.sum();
  return push(std::move(out), [ia](Tape& t, const Matrix& g) {
    t.grad_accum(ia).array() += g(0, 0);
  });
}

Var Tape::mean_all(Var a) {
  const Matrix& A = value(a);
  const int ia = a.idx_;
  const double inv = 1.0 / static_cast<double>(A.size());
  Matrix out(1, 1);
  out(0, 0) = A.sum() * inv;
  return push(std::move(out), [ia, inv](Tape& t, const Matrix& g) {
    t.grad_accum(ia).array() += g(0, 0) * inv;
  });
}

Var Tape::square(Var a) {
  const Matrix& A = value(a);
  const int ia = a.idx_;
  return push(A.cwiseProduct(A), [ia](Tape& t, const Matrix& g) {
    t.grad_accum(ia) += 2.0 * g.cwiseProduct(*t.nodes_[static_cast<std::size_t>(ia)].v);
  });
}

Var Tape::log_elem(Var a) {
  const Matrix& A = value(a);
  const int ia = a.idx_;
  return push(A.array().log().matrix(), [ia](Tape& t, const Matrix& g) {
    t.grad_accum(ia) += g.cwiseQuotient(*t.nodes_[static_cast<std::size_t>(ia)].v);
  });
}

Var Tape::rows_select(Var table, const std::vector<int>& ids) {
  const Matrix& T = value(table);
  Matrix out(static_cast<Eigen::Index>(ids.size()), T.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= T.rows())
      throw ValidationError("rows_select: id " + std::to_string(ids[i]) + " out of range (table has " +
                            std::to_string(T.rows()) + " rows)");
    out.row(static_cast<Eigen::Index>(i)) = T.row(ids[i]);
  }
  const int it = table.idx_;
  return push(std::move(out), [it, ids](Tape& t, const Matrix& g) {
    Matrix& gt = t.grad_accum(it);
    for (std::size_t i = 0; i < ids.size(); ++i)
      gt.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var Tape::cross_entropy_mean(Var logits, const std::vector<int>& targets,
                             const std::vector<double>& mask) {
  const Matrix& L = value(logits);
  if (static_cast<Eigen::Index>(targets.size()) != L.rows() || targets.size() != mask.size())
    throw ValidationError("cross_entropy_mean: targets/mask length must equal logit rows");
  double mask_total = 0.0;
  for (double m : mask) mask_total += m;
  if (mask_total <= 0.0) throw ValidationError("cross_entropy_mean: no unmasked positions");

  Matrix probs(L.rows(), L.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < L.rows(); ++r) {
    const double mx = L.row(r).maxCoeff();
    Eigen::ArrayXd e = (L.row(r).array() - mx).exp();
    const double z = e.sum();
    probs.row(r) = (e / z).matrix();
    const int t = targets[static_cast<std::size_t>(r)];
    if (t < 0 || t >= L.cols()) throw ValidationError("cross_entropy_mean: target id out of range");
    if (mask[static_cast<std::size_t>(r)] != 0.0)
      loss += mask[static_cast<std::size_t>(r)] * (std::log(z) - (L(r, t) - mx));
  }
  Matrix out(1, 1);
  out(0, 0) = loss / mask_total;
  const int il = logits.idx_;
  return push(std::move(out), [il, targets, mask, mask_total, p = std::move(probs)](
                                  Tape& t, const Matrix& g) {
    Matrix& gl = t.grad_accum(il);
    const double s = g(0, 0) / mask_total;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      const double m = mask[static_cast<std::size_t>(r)];
      if (m == 0.0) continue;
      gl.row(r) += (s * m) * p.row(r);
      gl(r, targets[static_cast<std::size_t>(r)]) -= s * m;
    }
  });
}

Var Tape::dropout(Var a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw ValidationError("dropout: rate must be < 1");
  const Matrix& A = value(a);
  Matrix mask(A.rows(), A.cols());
  const double keep = 1.0 - rate;
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index c = 0; c < A.cols(); ++c)
      mask(r, c) = rng.uniform() < rate ? 0.0 : 1.0 / keep;
  const int ia = a.idx_;
  Matrix out = A.cwiseProduct(mask);
  return push(std::move(out), [ia, m = std::move(mask)](Tape& t, const Matrix& g) {
    t.grad_accum(ia) += g.cwiseProduct(m);
  });
}

Var Tape::conv1d_same(Var x, Var w, Var b, int kernel) {
  const Matrix& X = value(x);
  const Matrix& W = value(w);
  const Matrix& B = value(b);
  const Eigen::Index T = X.rows(), ic = X.cols(), oc = W.cols();
  if (kernel < 1 || kernel % 2 == 0) throw ValidationError("conv1d_same: kernel must be odd");
  if (W.rows() != kernel * ic)
    throw ValidationError("conv1d_same: weight rows must be kernel*in_channels");
  if (B.rows() != 1 || B.cols() != oc) throw ValidationError("conv1d_same: bad bias shape");
  const int half = kernel / 2;
  Matrix out = Matrix::Zero(T, oc);
  for (Eigen::Index t0 = 0; t0 < T; ++t0) {
    for (int k = 0; k < kernel; ++k) {
      const Eigen::Index src = t0 + k - half;
      if (src < 0 || src >= T) continue;
      out.row(t0).noalias() += X.row(src) * W.middleRows(k * ic, ic);
    }
    out.row(t0) += B.row(0);
  }
  const int ix = x.idx_, iw = w.idx_, ib = b.idx_;
  return push(std::move(out), [ix, iw, ib, kernel, half, ic](Tape& t, const Matrix& g) {
    const Matrix& X = *t.nodes_[static_cast<std::size_t>(ix)].v;
    const Matrix& W = *t.nodes_[static_cast<std::size_t>(iw)].v;
    Matrix& gx = t.grad_accum(ix);
    Matrix& gw = t.grad_accum(iw);
    Matrix& gb = t.grad_accum(ib);
    const Eigen::Index T = X.rows();
    for (Eigen::Index t0 = 0; t0 < T; ++t0) {
      for (int k = 0; k < kernel; ++k) {
        const Eigen::Index src = t0 + k - half;
        if (src < 0 || src >= T) continue;
        gx.row(src).noalias() += g.row(t0) * W.middleRows(k * ic, ic).transpose();
        gw.middleRows(k * ic, ic).noalias() += X.row(src).transpose() * g.row(t0);
      }
      gb.row(0) += g.row(t0);
    }
  });
}

void Tape::backward(Var loss_scalar) {
  if (backward_done_) throw ValidationError("Tape::backward called twice");
  backward_done_ = true;
  const Matrix& L = value(loss_scalar);
  if (L.rows() != 1 || L.cols() != 1) throw ValidationError("backward: loss must be 1x1");
  grad_accum(loss_scalar.idx_)(0, 0) = 1.0;
  for (int i = loss_scalar.idx_; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.grad_live || !n.back) continue;
    n.back(*this, n.grad);
  }
  for (Node& n : nodes_) {
    if (n.sink != nullptr && n.grad_live) *n.sink += n.grad;
  }
}

Matrix Tape::causal_mask(int n) {
  Matrix m = Matrix::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = r + 1; c < n; ++c) m(r, c) = kMaskValue;
  return m;
}

}  // namespace s2p::nn
