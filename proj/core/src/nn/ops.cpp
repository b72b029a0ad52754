#include "angkit/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "angkit/errors.hpp"

namespace angkit::nn {

namespace {

void require_same(const Node& a, const Node& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

void require_rank(const Node& a, std::size_t rank, const char* op, const char* arg) {
  if (a.value().rank() != rank)
    throw ShapeError(std::string(op) + ": " + arg + " must have rank " + std::to_string(rank) + ", got " +
                     shape_str(a.shape()));
}

Tensor& grad_of(const Node& n) { return n.impl()->grad; }

}  // namespace

Node matmul(const Node& a, const Node& b) {
  require_rank(a, 2, "matmul", "lhs");
  require_rank(b, 2, "matmul", "rhs");
  const auto n = a.value().dim(0), k = a.value().dim(1), m = b.value().dim(1);
  if (b.value().dim(0) != k)
    throw ShapeError("matmul: shape mismatch " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  Tensor out({n, m});
  const double* A = a.value().ptr();
  const double* B = b.value().ptr();
  double* C = out.ptr();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      for (std::size_t j = 0; j < m; ++j) C[i * m + j] += av * B[p * m + j];
    }
  return make_node("matmul", std::move(out), {a, b}, [a, b, n, k, m](Node::Impl& self) {
    const double* G = self.grad.ptr();
    if (a.requires_grad()) {
      double* GA = grad_of(a).ptr();
      const double* B = b.value().ptr();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += G[i * m + j] * B[p * m + j];
          GA[i * k + p] += acc;
        }
    }
    if (b.requires_grad()) {
      double* GB = grad_of(b).ptr();
      const double* A = a.value().ptr();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A[i * k + p];
          for (std::size_t j = 0; j < m; ++j) GB[p * m + j] += av * G[i * m + j];
        }
    }
  });
}

Node add(const Node& a, const Node& b) {
  require_same(a, b, "add");
  Tensor out = a.value();
  out.add_scaled(b.value());
  return make_node("add", std::move(out), {a, b}, [a, b](Node::Impl& self) {
    if (a.requires_grad()) grad_of(a).add_scaled(self.grad);
    if (b.requires_grad()) grad_of(b).add_scaled(self.grad);
  });
}

Node mul_scalar(const Node& a, double s) {
  Tensor out = a.value();
  for (auto& v : out.data()) v *= s;
  return make_node("mul_scalar", std::move(out), {a}, [a, s](Node::Impl& self) { grad_of(a).add_scaled(self.grad, s); });
}

Node relu(const Node& a) {
  Tensor out = a.value();
  for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
  return make_node("relu", std::move(out), {a}, [a](Node::Impl& self) {
    auto& g = grad_of(a);
    const auto& x = a.value();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Node reshape(const Node& a, Shape shape) {
  if (shape_size(shape) != a.value().size())
    throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  Tensor out(std::move(shape), std::vector<double>(a.value().data().begin(), a.value().data().end()));
  return make_node("reshape", std::move(out), {a}, [a](Node::Impl& self) {
    auto& g = grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Node sum(const Node& a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return make_node("sum", Tensor({1}, std::vector<double>{s}), {a}, [a](Node::Impl& self) {
    const double g0 = self.grad[0];
    for (auto& g : grad_of(a).data()) g += g0;
  });
}

Node slice_channels(const Node& a, std::size_t offset, std::size_t count) {
  if (a.value().rank() < 1 || count == 0 || offset + count > a.value().dim(0))
    throw ShapeError("slice_channels: [" + std::to_string(offset) + ", " + std::to_string(offset + count) +
                     ") out of range for " + shape_str(a.shape()));
  Shape shape = a.shape();
  const auto stride = a.value().size() / shape[0];
  shape[0] = count;
  const auto src = a.value().data().subspan(offset * stride, count * stride);
  Tensor out(std::move(shape), std::vector<double>(src.begin(), src.end()));
  return make_node("slice_channels", std::move(out), {a}, [a, offset, stride](Node::Impl& self) {
    auto g = grad_of(a).data().subspan(offset * stride, self.grad.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Node concat_channels(std::span<const Node> parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no operands");
  Shape shape = parts.front().shape();
  if (shape.empty()) throw ShapeError("concat_channels: scalar operand");
  std::size_t channels = 0;
  for (const auto& p : parts) {
    Shape a = p.shape(), b = shape;
    if (a.empty()) throw ShapeError("concat_channels: scalar operand");
    a[0] = b[0] = 0;
    if (a != b)
      throw ShapeError("concat_channels: shape mismatch " + shape_str(p.shape()) + " vs " +
                       shape_str(parts.front().shape()));
    channels += p.shape()[0];
  }
  shape[0] = channels;
  std::vector<double> data;
  data.reserve(shape_size(shape));
  for (const auto& p : parts) data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  std::vector<Node> parents(parts.begin(), parts.end());
  return make_node("concat_channels", Tensor(std::move(shape), std::move(data)), parents,
                   [parents](Node::Impl& self) {
                     std::size_t off = 0;
                     for (const auto& p : parents) {
                       const auto n = p.value().size();
                       if (p.requires_grad()) {
                         auto& g = grad_of(p);
                         for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[off + i];
                       }
                       off += n;
                     }
                   });
}

Node conv_1x1(const Node& x, const Node& w, const Node& bias) {
  require_rank(x, 4, "conv_1x1", "input");
  require_rank(w, 2, "conv_1x1", "weight");
  require_rank(bias, 1, "conv_1x1", "bias");
  const auto cin = x.value().dim(0);
  const auto cout = w.value().dim(0);
  if (w.value().dim(1) != cin || bias.value().dim(0) != cout)
    throw ShapeError("conv_1x1: shape mismatch input " + shape_str(x.shape()) + ", weight " + shape_str(w.shape()) +
                     ", bias " + shape_str(bias.shape()));
  const auto sites = x.value().size() / cin;
  Shape shape = x.shape();
  shape[0] = cout;
  Tensor out(std::move(shape));
  const double* X = x.value().ptr();
  const double* W = w.value().ptr();
  const double* B = bias.value().ptr();
  double* Y = out.ptr();
  for (std::size_t o = 0; o < cout; ++o) {
    double* y = Y + o * sites;
    std::fill(y, y + sites, B[o]);
    for (std::size_t i = 0; i < cin; ++i) {
      const double wv = W[o * cin + i];
      const double* xi = X + i * sites;
      for (std::size_t s = 0; s < sites; ++s) y[s] += wv * xi[s];
    }
  }
  return make_node("conv_1x1", std::move(out), {x, w, bias}, [x, w, bias, cin, cout, sites](Node::Impl& self) {
    const double* G = self.grad.ptr();
    if (x.requires_grad()) {
      double* GX = grad_of(x).ptr();
      const double* W = w.value().ptr();
      for (std::size_t o = 0; o < cout; ++o) {
        const double* g = G + o * sites;
        for (std::size_t i = 0; i < cin; ++i) {
          const double wv = W[o * cin + i];
          double* gx = GX + i * sites;
          for (std::size_t s = 0; s < sites; ++s) gx[s] += wv * g[s];
        }
      }
    }
    if (w.requires_grad()) {
      double* GW = grad_of(w).ptr();
      const double* X = x.value().ptr();
      for (std::size_t o = 0; o < cout; ++o) {
        const double* g = G + o * sites;
        for (std::size_t i = 0; i < cin; ++i) {
          const double* xi = X + i * sites;
          double acc = 0.0;
          for (std::size_t s = 0; s < sites; ++s) acc += g[s] * xi[s];
          GW[o * cin + i] += acc;
        }
      }
    }
    if (bias.requires_grad()) {
      double* GB = grad_of(bias).ptr();
      for (std::size_t o = 0; o < cout; ++o) {
        const double* g = G + o * sites;
        double acc = 0.0;
        for (std::size_t s = 0; s < sites; ++s) acc += g[s];
        GB[o] += acc;
      }
    }
  });
}

Node graph_aggregate(const Node& x, const Node& adj) {
  require_rank(x, 4, "graph_aggregate", "input");
  require_rank(adj, 2, "graph_aggregate", "adjacency");
  const auto& xs = x.shape();
  const auto joints = xs[2], persons = xs[3];
  if (adj.value().dim(0) != joints || adj.value().dim(1) != joints)
    throw ShapeError("graph_aggregate: shape mismatch input " + shape_str(xs) + ", adjacency " + shape_str(adj.shape()));
  const auto blocks = xs[0] * xs[1];
  const auto block = joints * persons;
  Tensor out(xs);
  const double* X = x.value().ptr();
  const double* A = adj.value().ptr();
  double* Y = out.ptr();
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* xb = X + b * block;
    double* yb = Y + b * block;
    for (std::size_t v = 0; v < joints; ++v)
      for (std::size_t u = 0; u < joints; ++u) {
        const double a = A[v * joints + u];
        if (a == 0.0) continue;
        for (std::size_t m = 0; m < persons; ++m) yb[v * persons + m] += a * xb[u * persons + m];
      }
  }
  return make_node("graph_aggregate", std::move(out), {x, adj},
                   [x, adj, blocks, block, joints, persons](Node::Impl& self) {
                     const double* G = self.grad.ptr();
                     const double* A = adj.value().ptr();
                     const double* X = x.value().ptr();
                     double* GX = x.requires_grad() ? grad_of(x).ptr() : nullptr;
                     double* GA = adj.requires_grad() ? grad_of(adj).ptr() : nullptr;
                     for (std::size_t b = 0; b < blocks; ++b) {
                       const double* gb = G + b * block;
                       const double* xb = X + b * block;
                       for (std::size_t v = 0; v < joints; ++v)
                         for (std::size_t u = 0; u < joints; ++u) {
                           if (GX) {
                             const double a = A[v * joints + u];
                             for (std::size_t m = 0; m < persons; ++m) GX[b * block + u * persons + m] += a * gb[v * persons + m];
                           }
                           if (GA) {
                             double acc = 0.0;
                             for (std::size_t m = 0; m < persons; ++m) acc += gb[v * persons + m] * xb[u * persons + m];
                             GA[v * joints + u] += acc;
                           }
                         }
                     }
                   });
}

Node temporal_conv_3x1(const Node& x, const Node& w, std::size_t dilation) {
  require_rank(x, 4, "temporal_conv_3x1", "input");
  require_rank(w, 2, "temporal_conv_3x1", "weight");
  const auto& xs = x.shape();
  const auto channels = xs[0], frames = xs[1], frame = xs[2] * xs[3];
  if (w.value().dim(0) != channels || w.value().dim(1) != 3)
    throw ShapeError("temporal_conv_3x1: shape mismatch input " + shape_str(xs) + ", weight " + shape_str(w.shape()));
  if (dilation < 1) throw ShapeError("temporal_conv_3x1: dilation must be at least 1");
  const auto d = static_cast<std::ptrdiff_t>(dilation);
  const auto T = static_cast<std::ptrdiff_t>(frames);
  Tensor out(xs);
  const double* X = x.value().ptr();
  const double* W = w.value().ptr();
  double* Y = out.ptr();
  for (std::size_t c = 0; c < channels; ++c)
    for (std::ptrdiff_t t = 0; t < T; ++t) {
      double* y = Y + (c * frames + t) * frame;
      for (std::ptrdiff_t i = -1; i <= 1; ++i) {
        const auto src = t + i * d;
        if (src < 0 || src >= T) continue;
        const double wv = W[c * 3 + (i + 1)];
        const double* xs_ = X + (c * frames + src) * frame;
        for (std::size_t j = 0; j < frame; ++j) y[j] += wv * xs_[j];
      }
    }
  return make_node("temporal_conv_3x1", std::move(out), {x, w}, [x, w, channels, frames, frame, d, T](Node::Impl& self) {
    const double* G = self.grad.ptr();
    const double* X = x.value().ptr();
    const double* W = w.value().ptr();
    double* GX = x.requires_grad() ? grad_of(x).ptr() : nullptr;
    double* GW = w.requires_grad() ? grad_of(w).ptr() : nullptr;
    for (std::size_t c = 0; c < channels; ++c)
      for (std::ptrdiff_t t = 0; t < T; ++t) {
        const double* g = G + (c * frames + t) * frame;
        for (std::ptrdiff_t i = -1; i <= 1; ++i) {
          const auto src = t + i * d;
          if (src < 0 || src >= T) continue;
          if (GX) {
            const double wv = W[c * 3 + (i + 1)];
            double* gx = GX + (c * frames + src) * frame;
            for (std::size_t j = 0; j < frame; ++j) gx[j] += wv * g[j];
          }
          if (GW) {
            const double* xv = X + (c * frames + src) * frame;
            double acc = 0.0;
            for (std::size_t j = 0; j < frame; ++j) acc += g[j] * xv[j];
            GW[c * 3 + (i + 1)] += acc;
          }
        }
      }
  });
}

Node temporal_maxpool_3x1(const Node& x) {
  require_rank(x, 4, "temporal_maxpool_3x1", "input");
  const auto& xs = x.shape();
  const auto channels = xs[0], frames = xs[1], frame = xs[2] * xs[3];
  Tensor out(xs);
  // Flat source index of the winning tap, or -1 when a zero pad won.
  auto winners = std::make_shared<std::vector<std::ptrdiff_t>>(x.value().size(), -1);
  const double* X = x.value().ptr();
  double* Y = out.ptr();
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t j = 0; j < frame; ++j) {
        const auto dst = (c * frames + t) * frame + j;
        double best = 0.0;
        std::ptrdiff_t arg = -2;  // nothing considered yet
        for (int i = -1; i <= 1; ++i) {
          const auto src = static_cast<std::ptrdiff_t>(t) + i;
          double v = 0.0;
          std::ptrdiff_t idx = -1;
          if (src >= 0 && src < static_cast<std::ptrdiff_t>(frames)) {
            idx = static_cast<std::ptrdiff_t>((c * frames + static_cast<std::size_t>(src)) * frame + j);
            v = X[idx];
          }
          if (arg == -2 || v > best) {
            best = v;
            arg = idx;
          }
        }
        Y[dst] = best;
        (*winners)[dst] = arg;
      }
  return make_node("temporal_maxpool_3x1", std::move(out), {x}, [x, winners](Node::Impl& self) {
    auto& g = grad_of(x);
    for (std::size_t i = 0; i < winners->size(); ++i) {
      const auto w = (*winners)[i];
      if (w >= 0) g[static_cast<std::size_t>(w)] += self.grad[i];
    }
  });
}

Node global_avg_pool(const Node& x) {
  require_rank(x, 4, "global_avg_pool", "input");
  const auto channels = x.value().dim(0);
  const auto sites = x.value().size() / channels;
  Tensor out({channels});
  const double* X = x.value().ptr();
  for (std::size_t c = 0; c < channels; ++c) {
    double acc = 0.0;
    for (std::size_t s = 0; s < sites; ++s) acc += X[c * sites + s];
    out[c] = acc / static_cast<double>(sites);
  }
  return make_node("global_avg_pool", std::move(out), {x}, [x, channels, sites](Node::Impl& self) {
    double* g = grad_of(x).ptr();
    const double inv = 1.0 / static_cast<double>(sites);
    for (std::size_t c = 0; c < channels; ++c) {
      const double gc = self.grad[c] * inv;
      for (std::size_t s = 0; s < sites; ++s) g[c * sites + s] += gc;
    }
  });
}

Node linear(const Node& x, const Node& w, const Node& bias) {
  require_rank(x, 1, "linear", "input");
  require_rank(w, 2, "linear", "weight");
  require_rank(bias, 1, "linear", "bias");
  const auto in = x.value().dim(0), out_dim = w.value().dim(0);
  if (w.value().dim(1) != in || bias.value().dim(0) != out_dim)
    throw ShapeError("linear: shape mismatch input " + shape_str(x.shape()) + ", weight " + shape_str(w.shape()) +
                     ", bias " + shape_str(bias.shape()));
  Tensor out({out_dim});
  for (std::size_t k = 0; k < out_dim; ++k) {
    double acc = bias.value()[k];
    for (std::size_t c = 0; c < in; ++c) acc += w.value()[k * in + c] * x.value()[c];
    out[k] = acc;
  }
  return make_node("linear", std::move(out), {x, w, bias}, [x, w, bias, in, out_dim](Node::Impl& self) {
    for (std::size_t k = 0; k < out_dim; ++k) {
      const double g = self.grad[k];
      if (bias.requires_grad()) grad_of(bias)[k] += g;
      for (std::size_t c = 0; c < in; ++c) {
        if (w.requires_grad()) grad_of(w)[k * in + c] += g * x.value()[c];
        if (x.requires_grad()) grad_of(x)[c] += g * w.value()[k * in + c];
      }
    }
  });
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (auto& v : p) {
    v = std::exp(v - mx);
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

LossOutput softmax_cross_entropy(const Node& logits, std::size_t label) {
  require_rank(logits, 1, "softmax_cross_entropy", "logits");
  const auto k = logits.value().dim(0);
  if (k < 2) throw ShapeError("softmax_cross_entropy needs at least 2 classes, got " + std::to_string(k));
  if (label >= k) throw ShapeError("label " + std::to_string(label) + " out of range for " + std::to_string(k) + " classes");
  const auto z = logits.value().data();
  const double mx = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - mx);
  const double log_norm = mx + std::log(total);
  auto probs = softmax(z);
  const double loss = log_norm - z[label];
  auto node = make_node("softmax_cross_entropy", Tensor({1}, std::vector<double>{loss}), {logits},
                        [logits, probs, label](Node::Impl& self) {
                          auto& g = grad_of(logits);
                          const double g0 = self.grad[0];
                          for (std::size_t i = 0; i < probs.size(); ++i)
                            g[i] += g0 * (probs[i] - (i == label ? 1.0 : 0.0));
                        });
  return {std::move(node), std::move(probs)};
}

}  // namespace angkit::nn
