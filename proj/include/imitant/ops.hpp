#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "imitant/graph.hpp"
#include "imitant/kernels.hpp"
#include "imitant/layout.hpp"
#include "imitant/rng.hpp"

// Differentiable primitives. Each op appends one tape node whose backward
// closure accumulates into the parents' gradient slots; parent values are
// read back from the tape, so only quantities that would otherwise be
// recomputed (softmax outputs, norm statistics, dropout masks) are captured.

namespace imitant {

namespace detail {

inline Graph& same_graph(Var a, Var b) {
  IMITANT_CHECK(a.graph != nullptr && a.graph == b.graph, "vars from different graphs");
  return *a.graph;
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  IMITANT_CHECK(a.same_shape(b), op, ": shape mismatch ", shape_str(a.shape()), " vs ",
                shape_str(b.shape()));
}

}  // namespace detail

inline Var add(Var a, Var b) {
  Graph& g = detail::same_graph(a, b);
  detail::check_same_shape(a.val(), b.val(), "add");
  Tensor out = a.val();
  out.add_(b.val());
  const bool rg = g.requires_grad(a) || g.requires_grad(b);
  const int aid = a.id, bid = b.id;
  return g.emplace(std::move(out), rg,
                   [aid, bid](Graph& gg, int self) {
                     const Tensor& go = gg.grad(self);
                     if (gg.requires_grad({&gg, aid})) gg.grad(aid).add_(go);
                     if (gg.requires_grad({&gg, bid})) gg.grad(bid).add_(go);
                   },
                   "add");
}

inline Var scale(Var a, double c) {
  Graph& g = *a.graph;
  Tensor out = a.val();
  out.scale_(c);
  const int aid = a.id;
  return g.emplace(std::move(out), g.requires_grad(a),
                   [aid, c](Graph& gg, int self) {
                     const Tensor& go = gg.grad(self);
                     Tensor& ga = gg.grad(aid);
                     for (std::int64_t i = 0; i < go.numel(); ++i) ga.at(i) += c * go.at(i);
                   },
                   "scale");
}

// y = x * s with s a scalar (shape [1]) variable
inline Var scale_by(Var x, Var s) {
  Graph& g = detail::same_graph(x, s);
  IMITANT_CHECK(s.val().numel() == 1, "scale_by: scale must be scalar, got ",
                shape_str(s.val().shape()));
  const double sv = s.val().item();
  Tensor out = x.val();
  out.scale_(sv);
  const bool rg = g.requires_grad(x) || g.requires_grad(s);
  const int xid = x.id, sid = s.id;
  return g.emplace(std::move(out), rg,
                   [xid, sid, sv](Graph& gg, int self) {
                     const Tensor& go = gg.grad(self);
                     const Tensor& xv = gg.value(xid);
                     if (gg.requires_grad({&gg, xid})) {
                       Tensor& gx = gg.grad(xid);
                       for (std::int64_t i = 0; i < go.numel(); ++i) gx.at(i) += sv * go.at(i);
                     }
                     if (gg.requires_grad({&gg, sid})) {
                       double acc = 0.0;
                       for (std::int64_t i = 0; i < go.numel(); ++i) acc += go.at(i) * xv.at(i);
                       gg.grad(sid).at(0) += acc;
                     }
                   },
                   "scale_by");
}

inline Var exp(Var a) {
  Graph& g = *a.graph;
  Tensor out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out.at(i) = std::exp(out.at(i));
  const int aid = a.id;
  return g.emplace(std::move(out), g.requires_grad(a),
                   [aid](Graph& gg, int self) {
                     const Tensor& go = gg.grad(self);
                     const Tensor& y = gg.value(self);
                     Tensor& ga = gg.grad(aid);
                     for (std::int64_t i = 0; i < go.numel(); ++i) ga.at(i) += y.at(i) * go.at(i);
                   },
                   "exp");
}

inline Var relu(Var a) {
  Graph& g = *a.graph;
  Tensor out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out.at(i) = out.at(i) > 0.0 ? out.at(i) : 0.0;
  const int aid = a.id;
  return g.emplace(std::move(out), g.requires_grad(a),
                   [aid](Graph& gg, int self) {
                     const Tensor& go = gg.grad(self);
                     const Tensor& x = gg.value(aid);
                     Tensor& ga = gg.grad(aid);
                     for (std::int64_t i = 0; i < go.numel(); ++i) {
                       if (x.at(i) > 0.0) ga.at(i) += go.at(i);
                     }
                   },
                   "relu");
}

// View with a new shape over the same elements.
inline Var reshape(Var a, Shape shape) {
  Graph& g = *a.graph;
  IMITANT_CHECK(shape_numel(shape) == a.val().numel(), "reshape: ", shape_str(a.val().shape()),
                " -> ", shape_str(shape), " changes element count");
  Tensor out(std::move(shape), a.val().vec());
  const int aid = a.id;
  return g.emplace(std::move(out), g.requires_grad(a),
                   [aid](Graph& gg, int self) {
                     const Tensor& go = gg.grad(self);
                     Tensor& ga = gg.grad(aid);
                     for (std::int64_t i = 0; i < go.numel(); ++i) ga.at(i) += go.at(i);
                   },
                   "reshape");
}

// Matrix product with optional operand transposes. Rank-1 operands act as a
// single row. Result is [M x N].
inline Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false) {
  Graph& g = detail::same_graph(a, b);
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  IMITANT_CHECK(A.rank() <= 2 && B.rank() <= 2, "matmul expects matrices, got ",
                shape_str(A.shape()), " and ", shape_str(B.shape()));
  const int M = trans_a ? A.cols() : A.rows();
  const int Ka = trans_a ? A.rows() : A.cols();
  const int Kb = trans_b ? B.cols() : B.rows();
  const int N = trans_b ? B.rows() : B.cols();
  IMITANT_CHECK(Ka == Kb, "matmul: inner extents differ, ", shape_str(A.shape()),
                (trans_a ? "^T" : ""), " * ", shape_str(B.shape()), (trans_b ? "^T" : ""));
  IMITANT_CHECK(!(trans_a && trans_b), "matmul: both operands transposed is unsupported");
  Tensor out({M, N});
  if (!trans_a && !trans_b) {
    mm_nn(A.data(), B.data(), out.data(), M, Ka, N);
  } else if (!trans_a && trans_b) {
    mm_nt(A.data(), B.data(), out.data(), M, Ka, N);
  } else {
    mm_tn(A.data(), B.data(), out.data(), Ka, M, N);  // A[K x M]^T * B[K x N]
  }
  const bool rg = g.requires_grad(a) || g.requires_grad(b);
  const int aid = a.id, bid = b.id;
  return g.emplace(
      std::move(out), rg,
      [aid, bid, trans_a, trans_b, M, Ka, N](Graph& gg, int self) {
        const Tensor& go = gg.grad(self);
        const Tensor& A = gg.value(aid);
        const Tensor& B = gg.value(bid);
        const bool need_a = gg.requires_grad({&gg, aid});
        const bool need_b = gg.requires_grad({&gg, bid});
        if (!trans_a && !trans_b) {
          if (need_a) mm_nt(go.data(), B.data(), gg.grad(aid).data(), M, N, Ka, true);
          if (need_b) mm_tn(A.data(), go.data(), gg.grad(bid).data(), M, Ka, N, true);
        } else if (!trans_a && trans_b) {
          if (need_a) mm_nn(go.data(), B.data(), gg.grad(aid).data(), M, N, Ka, true);
          if (need_b) mm_tn(go.data(), A.data(), gg.grad(bid).data(), M, N, Ka, true);
        } else {  // trans_a
          if (need_a) mm_nt(B.data(), go.data(), gg.grad(aid).data(), Ka, N, M, true);
          if (need_b) mm_nn(A.data(), go.data(), gg.grad(bid).data(), Ka, M, N, true);
        }
      },
      "matmul");
}

// x[R x d] + bias[d] broadcast over rows
inline Var add_bias(Var x, Var bias) {
  Graph& g = detail::same_graph(x, bias);
  const Tensor& X = x.val();
  const Tensor& B = bias.val();
  IMITANT_CHECK(B.rank() == 1 && B.dim(0) == X.cols(), "add_bias: bias ", shape_str(B.shape()),
                " does not match ", shape_str(X.shape()));
  Tensor out = X;
  const int R = X.rows(), C = X.cols();
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) out.at(r, c) += B.at(c);
  }
  const bool rg = g.requires_grad(x) || g.requires_grad(bias);
  const int xid = x.id, bid = bias.id;
  return g.emplace(std::move(out), rg,
                   [xid, bid, R, C](Graph& gg, int self) {
                     const Tensor& go = gg.grad(self);
                     if (gg.requires_grad({&gg, xid})) gg.grad(xid).add_(go);
                     if (gg.requires_grad({&gg, bid})) {
                       Tensor& gb = gg.grad(bid);
                       for (int r = 0; r < R; ++r) {
                         for (int c = 0; c < C; ++c) gb.at(c) += go.at(r, c);
                       }
                     }
                   },
                   "add_bias");
}

// rows of table selected by ids -> [ids.size() x d]
inline Var embedding_gather(Var table, std::vector<int> ids) {
  Graph& g = *table.graph;
  const Tensor& T = table.val();
  IMITANT_CHECK(T.rank() == 2, "embedding_gather: table must be rank 2, got ",
                shape_str(T.shape()));
  const int V = T.rows(), d = T.cols();
  const int R = static_cast<int>(ids.size());
  IMITANT_CHECK(R >= 1, "embedding_gather: empty id list");
  Tensor out({R, d});
  for (int r = 0; r < R; ++r) {
    IMITANT_CHECK(ids[static_cast<std::size_t>(r)] >= 0 && ids[static_cast<std::size_t>(r)] < V,
                  "embedding_gather: id ", ids[static_cast<std::size_t>(r)], " outside table of ",
                  V, " rows");
    const double* src = T.data() + static_cast<std::size_t>(ids[static_cast<std::size_t>(r)]) * d;
    std::copy(src, src + d, out.data() + static_cast<std::size_t>(r) * d);
  }
  const int tid = table.id;
  return g.emplace(std::move(out), g.requires_grad(table),
                   [tid, ids = std::move(ids), d](Graph& gg, int self) {
                     const Tensor& go = gg.grad(self);
                     Tensor& gt = gg.grad(tid);
                     for (std::size_t r = 0; r < ids.size(); ++r) {
                       double* dst = gt.data() + static_cast<std::size_t>(ids[r]) * d;
                       const double* src = go.data() + r * d;
                       for (int c = 0; c < d; ++c) dst[c] += src[c];
                     }
                   },
                   "embedding_gather");
}

// Per-row layer normalization with learned gain/bias over the last axis.
inline Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-6) {
  Graph& g = *x.graph;
  detail::same_graph(x, gain);
  detail::same_graph(x, bias);
  const Tensor& X = x.val();
  const int R = X.rows(), C = X.cols();
  IMITANT_CHECK(gain.val().numel() == C && bias.val().numel() == C, "layer_norm: affine shapes ",
                shape_str(gain.val().shape()), "/", shape_str(bias.val().shape()),
                " do not match input ", shape_str(X.shape()));
  Tensor normalized({R, C});
  Tensor rstd({R});
  for (int r = 0; r < R; ++r) {
    double mean = 0.0, rs = 0.0;
    layer_norm_row(X.data() + static_cast<std::size_t>(r) * C,
                   normalized.data() + static_cast<std::size_t>(r) * C, C, eps, &mean, &rs);
    rstd.at(r) = rs;
  }
  Tensor out({R, C});
  const Tensor& G = gain.val();
  const Tensor& Bv = bias.val();
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) out.at(r, c) = normalized.at(r, c) * G.at(c) + Bv.at(c);
  }
  const bool rg = g.requires_grad(x) || g.requires_grad(gain) || g.requires_grad(bias);
  const int xid = x.id, gid = gain.id, bid = bias.id;
  return g.emplace(
      std::move(out), rg,
      [xid, gid, bid, R, C, normalized = std::move(normalized),
       rstd = std::move(rstd)](Graph& gg, int self) {
        const Tensor& go = gg.grad(self);
        const Tensor& G = gg.value(gid);
        if (gg.requires_grad({&gg, bid})) {
          Tensor& gb = gg.grad(bid);
          for (int r = 0; r < R; ++r) {
            for (int c = 0; c < C; ++c) gb.at(c) += go.at(r, c);
          }
        }
        if (gg.requires_grad({&gg, gid})) {
          Tensor& ggain = gg.grad(gid);
          for (int r = 0; r < R; ++r) {
            for (int c = 0; c < C; ++c) ggain.at(c) += go.at(r, c) * normalized.at(r, c);
          }
        }
        if (gg.requires_grad({&gg, xid})) {
          Tensor& gx = gg.grad(xid);
          for (int r = 0; r < R; ++r) {
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (int c = 0; c < C; ++c) {
              const double dxhat = go.at(r, c) * G.at(c);
              mean_dxhat += dxhat;
              mean_dxhat_xhat += dxhat * normalized.at(r, c);
            }
            mean_dxhat /= C;
            mean_dxhat_xhat /= C;
            for (int c = 0; c < C; ++c) {
              const double dxhat = go.at(r, c) * G.at(c);
              gx.at(r, c) +=
                  rstd.at(r) * (dxhat - mean_dxhat - normalized.at(r, c) * mean_dxhat_xhat);
            }
          }
        }
      },
      "layer_norm");
}

// Stabilized softmax over the last axis (each row sums to 1).
inline Var row_softmax(Var x) {
  Graph& g = *x.graph;
  Tensor out = x.val();
  const int R = out.rows(), C = out.cols();
  for (int r = 0; r < R; ++r) softmax_row(out.data() + static_cast<std::size_t>(r) * C, C);
  const int xid = x.id;
  return g.emplace(std::move(out), g.requires_grad(x),
                   [xid, R, C](Graph& gg, int self) {
                     const Tensor& go = gg.grad(self);
                     const Tensor& p = gg.value(self);
                     Tensor& gx = gg.grad(xid);
                     for (int r = 0; r < R; ++r) {
                       double dot = 0.0;
                       for (int c = 0; c < C; ++c) dot += go.at(r, c) * p.at(r, c);
                       for (int c = 0; c < C; ++c) {
                         gx.at(r, c) += p.at(r, c) * (go.at(r, c) - dot);
                       }
                     }
                   },
                   "row_softmax");
}

// Inverted dropout; rate 0 (or a no-grad graph at inference) passes through.
inline Var dropout(Var x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  IMITANT_CHECK(rate < 1.0, "dropout rate must be < 1, got ", rate);
  Graph& g = *x.graph;
  Tensor mask(x.val().shape());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::int64_t i = 0; i < mask.numel(); ++i) {
    mask.at(i) = rng.next_double() >= rate ? keep_scale : 0.0;
  }
  Tensor out = x.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out.at(i) *= mask.at(i);
  const int xid = x.id;
  return g.emplace(std::move(out), g.requires_grad(x),
                   [xid, mask = std::move(mask)](Graph& gg, int self) {
                     const Tensor& go = gg.grad(self);
                     Tensor& gx = gg.grad(xid);
                     for (std::int64_t i = 0; i < go.numel(); ++i) gx.at(i) += go.at(i) * mask.at(i);
                   },
                   "dropout");
}

inline Var sum(Var x) {
  Graph& g = *x.graph;
  Tensor out = Tensor::scalar(x.val().sum());
  const int xid = x.id;
  return g.emplace(std::move(out), g.requires_grad(x),
                   [xid](Graph& gg, int self) {
                     const double go = gg.grad(self).at(0);
                     Tensor& gx = gg.grad(xid);
                     for (std::int64_t i = 0; i < gx.numel(); ++i) gx.at(i) += go;
                   },
                   "sum");
}

inline Var mean_all(Var x) {
  const auto n = static_cast<double>(x.val().numel());
  return scale(sum(x), 1.0 / n);
}

// Per-sequence mean over valid rows: [B*W x d] -> [B x d].
inline Var masked_mean_rows(Var x, const RowLayout& layout) {
  Graph& g = *x.graph;
  const Tensor& X = x.val();
  IMITANT_CHECK(X.rows() == layout.rows(), "masked_mean_rows: ", X.rows(), " rows vs layout ",
                layout.rows());
  const int d = X.cols();
  Tensor out({layout.batch, d});
  for (int b = 0; b < layout.batch; ++b) {
    const int len = layout.lengths[static_cast<std::size_t>(b)];
    for (int t = 0; t < len; ++t) {
      const double* src = X.data() + (static_cast<std::size_t>(b) * layout.width + t) * d;
      double* dst = out.data() + static_cast<std::size_t>(b) * d;
      for (int c = 0; c < d; ++c) dst[c] += src[c];
    }
    double* dst = out.data() + static_cast<std::size_t>(b) * d;
    for (int c = 0; c < d; ++c) dst[c] /= len;
  }
  const int xid = x.id;
  return g.emplace(std::move(out), g.requires_grad(x),
                   [xid, layout, d](Graph& gg, int self) {
                     const Tensor& go = gg.grad(self);
                     Tensor& gx = gg.grad(xid);
                     for (int b = 0; b < layout.batch; ++b) {
                       const int len = layout.lengths[static_cast<std::size_t>(b)];
                       const double inv = 1.0 / len;
                       for (int t = 0; t < len; ++t) {
                         double* dst =
                             gx.data() + (static_cast<std::size_t>(b) * layout.width + t) * d;
                         const double* src = go.data() + static_cast<std::size_t>(b) * d;
                         for (int c = 0; c < d; ++c) dst[c] += src[c] * inv;
                       }
                     }
                   },
                   "masked_mean_rows");
}

// Mean negative log-likelihood of target ids under row logits, padding
// excluded. valid[r] (when provided) marks rows that count.
inline Var token_cross_entropy(Var logits, const std::vector<int>& targets,
                               const std::vector<unsigned char>& valid) {
  Graph& g = *logits.graph;
  const Tensor& Z = logits.val();
  const int R = Z.rows(), V = Z.cols();
  IMITANT_CHECK(static_cast<int>(targets.size()) == R, "token_cross_entropy: ", targets.size(),
                " targets for ", R, " rows");
  IMITANT_CHECK(valid.empty() || static_cast<int>(valid.size()) == R,
                "token_cross_entropy: mask size ", valid.size(), " vs rows ", R);
  Tensor probs({R, V});
  double nll = 0.0;
  int count = 0;
  std::vector<double> lsm(static_cast<std::size_t>(V));
  for (int r = 0; r < R; ++r) {
    if (!valid.empty() && !valid[static_cast<std::size_t>(r)]) continue;
    const int y = targets[static_cast<std::size_t>(r)];
    IMITANT_CHECK(y >= 0 && y < V, "token_cross_entropy: target id ", y, " outside vocab ", V);
    log_softmax_row(Z.data() + static_cast<std::size_t>(r) * V, lsm.data(), V);
    nll -= lsm[static_cast<std::size_t>(y)];
    for (int v = 0; v < V; ++v) {
      probs.at(r, v) = std::exp(lsm[static_cast<std::size_t>(v)]);
    }
    ++count;
  }
  IMITANT_CHECK(count > 0, "token_cross_entropy: no unpadded positions");
  Tensor out = Tensor::scalar(nll / count);
  const int zid = logits.id;
  return g.emplace(
      std::move(out), g.requires_grad(logits),
      [zid, targets, valid, probs = std::move(probs), count, R, V](Graph& gg, int self) {
        const double go = gg.grad(self).at(0) / count;
        Tensor& gz = gg.grad(zid);
        for (int r = 0; r < R; ++r) {
          if (!valid.empty() && !valid[static_cast<std::size_t>(r)]) continue;
          const int y = targets[static_cast<std::size_t>(r)];
          for (int v = 0; v < V; ++v) {
            gz.at(r, v) += go * (probs.at(r, v) - (v == y ? 1.0 : 0.0));
          }
        }
      },
      "token_cross_entropy");
}

// Mean over valid rows of H(target_r, softmax(logits_r)); with
// `kl` set, the constant sum t*log t term is added so the result is the mean
// KL(target || softmax(logits)). Targets carry no gradient.
inline Var distribution_match_loss(const Tensor& targets, Var logits,
                                   const std::vector<unsigned char>& valid, bool kl) {
  Graph& g = *logits.graph;
  const Tensor& Z = logits.val();
  const int R = Z.rows(), C = Z.cols();
  detail::check_same_shape(targets, Z, "distribution_match_loss");
  IMITANT_CHECK(valid.empty() || static_cast<int>(valid.size()) == R,
                "distribution_match_loss: mask size ", valid.size(), " vs rows ", R);
  Tensor probs({R, C});
  std::vector<double> lsm(static_cast<std::size_t>(C));
  double total = 0.0;
  int count = 0;
  for (int r = 0; r < R; ++r) {
    if (!valid.empty() && !valid[static_cast<std::size_t>(r)]) continue;
    log_softmax_row(Z.data() + static_cast<std::size_t>(r) * C, lsm.data(), C);
    double row = 0.0;
    for (int c = 0; c < C; ++c) {
      const double t = targets.at(r, c);
      if (t > 0.0) {
        row -= t * lsm[static_cast<std::size_t>(c)];
        if (kl) row += t * std::log(t);
      }
      probs.at(r, c) = std::exp(lsm[static_cast<std::size_t>(c)]);
    }
    total += row;
    ++count;
  }
  IMITANT_CHECK(count > 0, "distribution_match_loss: no unpadded positions");
  Tensor out = Tensor::scalar(total / count);
  const int zid = logits.id;
  return g.emplace(std::move(out), g.requires_grad(logits),
                   [zid, targets, valid, probs = std::move(probs), count, R, C](Graph& gg,
                                                                                int self) {
                     const double go = gg.grad(self).at(0) / count;
                     Tensor& gz = gg.grad(zid);
                     for (int r = 0; r < R; ++r) {
                       if (!valid.empty() && !valid[static_cast<std::size_t>(r)]) continue;
                       for (int c = 0; c < C; ++c) {
                         gz.at(r, c) += go * (probs.at(r, c) - targets.at(r, c));
                       }
                     }
                   },
                   "distribution_match_loss");
}

namespace detail {

inline void check_distribution(const Tensor& p, const char* role) {
  double s = 0.0;
  for (std::int64_t i = 0; i < p.numel(); ++i) {
    IMITANT_CHECK(p.at(i) >= 0.0, role, " has negative entry ", p.at(i));
    s += p.at(i);
  }
  IMITANT_CHECK(std::abs(s - 1.0) <= 1e-6, role, " sums to ", s, ", expected 1 within 1e-6");
}

}  // namespace detail

// KL(target || model) over probability vectors, sum over entries with the
// 0*log(0) = 0 convention. `floor_eps > 0` clamps zero model entries before
// the log and reports the clamp count; floor_eps == 0 makes them a hard
// error. Gradient flows to the model only.
inline Var kl_divergence(const Tensor& target, Var model, double floor_eps = 0.0,
                         int* clamp_count = nullptr) {
  Graph& g = *model.graph;
  const Tensor& P = model.val();
  detail::check_same_shape(target, P, "kl_divergence");
  detail::check_distribution(target, "kl target");
  detail::check_distribution(P, "kl model");
  double total = 0.0;
  int clamps = 0;
  for (std::int64_t i = 0; i < P.numel(); ++i) {
    const double t = target.at(i);
    if (t <= 0.0) continue;
    double p = P.at(i);
    if (p < floor_eps) {
      p = floor_eps;
      ++clamps;
    }
    IMITANT_CHECK(p > 0.0, "kl_divergence: model probability 0 at entry ", i,
                  " where target is ", t, " (set floor_eps to clamp)");
    total += t * (std::log(t) - std::log(p));
  }
  if (clamp_count != nullptr) *clamp_count = clamps;
  Tensor out = Tensor::scalar(total);
  const int pid = model.id;
  return g.emplace(std::move(out), g.requires_grad(model),
                   [pid, target, floor_eps](Graph& gg, int self) {
                     const double go = gg.grad(self).at(0);
                     const Tensor& P = gg.value(pid);
                     Tensor& gp = gg.grad(pid);
                     for (std::int64_t i = 0; i < P.numel(); ++i) {
                       const double t = target.at(i);
                       if (t <= 0.0) continue;
                       const double p = P.at(i);
                       if (p < floor_eps) continue;  // clamped entries are flat
                       gp.at(i) += go * (-t / p);
                     }
                   },
                   "kl_divergence");
}

// H(target, model) = -sum target*log(model) = entropy(target) + KL(target || model)
inline Var cross_entropy_dist(const Tensor& target, Var model, double floor_eps = 0.0,
                              int* clamp_count = nullptr) {
  double entropy = 0.0;
  for (std::int64_t i = 0; i < target.numel(); ++i) {
    if (target.at(i) > 0.0) entropy -= target.at(i) * std::log(target.at(i));
  }
  Var kl = kl_divergence(target, model, floor_eps, clamp_count);
  return add(kl, kl.graph->constant(Tensor::scalar(entropy)));
}

}  // namespace imitant
