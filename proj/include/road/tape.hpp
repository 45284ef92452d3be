#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "road/gemm.hpp"
#include "road/tensor.hpp"

namespace road {

/// Define-by-run reverse-mode tape. Ops append nodes in topological order;
/// backward() sweeps them once in reverse. Rebuilt every iteration.
template <typename Real>
class Tape {
public:
    using Index = std::int32_t;

    Index input(Tensor<Real> v) {
        bool track = v.requires_grad;
        return push(std::move(v), track, {});
    }

    Index constant(Tensor<Real> v) { return push(std::move(v), false, {}); }

    /// Tracked leaf bound to a named parameter; gradients are collected per
    /// name after backward() and flushed by the caller.
    Index param(const std::string& name, const Tensor<Real>& v) {
        auto it = param_lookup_.find(name);
        if (it != param_lookup_.end()) return it->second;
        Tensor<Real> copy = v;
        Index idx = push(std::move(copy), true, {});
        param_lookup_.emplace(name, idx);
        param_order_.emplace_back(name, idx);
        return idx;
    }

    const Tensor<Real>& value(Index i) const { return nodes_[std::size_t(i)].value; }
    const Tensor<Real>& grad(Index i) const { return nodes_[std::size_t(i)].grad; }
    bool has_grad(Index i) const { return !nodes_[std::size_t(i)].grad.values.empty(); }

    /// (name, grad) pairs in first-use order; empty grads mean untouched.
    const std::vector<std::pair<std::string, Index>>& param_bindings() const {
        return param_order_;
    }

    // ---- ops ------------------------------------------------------------

    /// out = x W + b with x:[B,I], W:[I,O], b:[O]
    Index linear(Index x, Index W, Index b) {
        const auto& xv = value(x);
        const auto& wv = value(W);
        const auto& bv = value(b);
        require(xv.shape.size() == 2 && wv.shape.size() == 2 && bv.shape.size() == 1,
                "linear: rank mismatch");
        const std::int64_t B = xv.shape[0], I = xv.shape[1], O = wv.shape[1];
        require(wv.shape[0] == I && bv.shape[0] == O, "linear: shape mismatch");

        Tensor<Real> out = Tensor<Real>::zeros({B, O});
        for (std::int64_t r = 0; r < B; ++r)
            std::copy(bv.values.begin(), bv.values.end(), out.values.begin() + r * O);
        detail::gemm_nn(B, O, I, xv.data(), wv.data(), out.data());

        return push(std::move(out), tracked(x) || tracked(W) || tracked(b),
                    [x, W, b, B, I, O](Tape& t, Index self) {
                        const auto& dy = t.nodes_[std::size_t(self)].value_grad();
                        if (t.tracked(x)) {
                            auto& dx = t.grad_buf(x);
                            detail::gemm_nt(B, I, O, dy.data(), t.value(W).data(), dx.data(),
                                            t.scratch_);
                        }
                        if (t.tracked(W)) {
                            auto& dw = t.grad_buf(W);
                            detail::gemm_tn(I, O, B, t.value(x).data(), dy.data(), dw.data());
                        }
                        if (t.tracked(b)) {
                            auto& db = t.grad_buf(b);
                            for (std::int64_t r = 0; r < B; ++r)
                                for (std::int64_t j = 0; j < O; ++j)
                                    db.values[std::size_t(j)] += dy.values[std::size_t(r * O + j)];
                        }
                    });
    }

    /// out = sin(omega0 * x)
    Index sine(Index x, Real omega0) {
        const auto& xv = value(x);
        Tensor<Real> out = Tensor<Real>::zeros(xv.shape);
        for (std::size_t i = 0; i < xv.values.size(); ++i)
            out.values[i] = std::sin(omega0 * xv.values[i]);
        return push(std::move(out), tracked(x), [x, omega0](Tape& t, Index self) {
            if (!t.tracked(x)) return;
            const auto& dy = t.nodes_[std::size_t(self)].value_grad();
            const auto& xv = t.value(x);
            auto& dx = t.grad_buf(x);
            for (std::size_t i = 0; i < xv.values.size(); ++i)
                dx.values[i] += dy.values[i] * omega0 * std::cos(omega0 * xv.values[i]);
        });
    }

    Index tanh_(Index x) {
        const auto& xv = value(x);
        Tensor<Real> out = Tensor<Real>::zeros(xv.shape);
        for (std::size_t i = 0; i < xv.values.size(); ++i)
            out.values[i] = std::tanh(xv.values[i]);
        return push(std::move(out), tracked(x), [x](Tape& t, Index self) {
            if (!t.tracked(x)) return;
            const auto& node = t.nodes_[std::size_t(self)];
            const auto& dy = node.grad;
            auto& dx = t.grad_buf(x);
            for (std::size_t i = 0; i < dy.values.size(); ++i) {
                const Real y = node.value.values[i];
                dx.values[i] += dy.values[i] * (Real(1) - y * y);
            }
        });
    }

    /// Row-wise softmax over 2 logits.
    Index softmax2(Index x) {
        const auto& xv = value(x);
        require(xv.cols() == 2, "softmax2: expected [B,2]");
        const std::int64_t B = xv.rows();
        Tensor<Real> out = Tensor<Real>::zeros(xv.shape);
        for (std::int64_t r = 0; r < B; ++r) {
            const Real a = xv.at(r, 0), b = xv.at(r, 1);
            const Real m = a > b ? a : b;
            const Real ea = std::exp(a - m), eb = std::exp(b - m);
            const Real s = ea + eb;
            out.at(r, 0) = ea / s;
            out.at(r, 1) = eb / s;
        }
        return push(std::move(out), tracked(x), [x, B](Tape& t, Index self) {
            if (!t.tracked(x)) return;
            const auto& node = t.nodes_[std::size_t(self)];
            auto& dx = t.grad_buf(x);
            for (std::int64_t r = 0; r < B; ++r) {
                const Real p0 = node.value.at(r, 0), p1 = node.value.at(r, 1);
                const Real g0 = node.grad.at(r, 0), g1 = node.grad.at(r, 1);
                const Real dot = p0 * g0 + p1 * g1;
                dx.at(r, 0) += p0 * (g0 - dot);
                dx.at(r, 1) += p1 * (g1 - dot);
            }
        });
    }

    /// Mean two-class cross entropy from logits; labels in {0,1}.
    Index cross_entropy2(Index logits, std::vector<std::int8_t> labels) {
        const auto& xv = value(logits);
        require(xv.cols() == 2, "cross_entropy2: expected [B,2]");
        const std::int64_t B = xv.rows();
        require(std::int64_t(labels.size()) == B, "cross_entropy2: label count mismatch");
        Real loss = 0;
        for (std::int64_t r = 0; r < B; ++r) {
            const Real a = xv.at(r, 0), b = xv.at(r, 1);
            const Real m = a > b ? a : b;
            const Real lse = m + std::log(std::exp(a - m) + std::exp(b - m));
            loss += lse - (labels[std::size_t(r)] == 0 ? a : b);
        }
        Tensor<Real> out({1}, {loss / Real(B)});
        auto lab = std::make_shared<std::vector<std::int8_t>>(std::move(labels));
        return push(std::move(out), tracked(logits), [logits, B, lab](Tape& t, Index self) {
            if (!t.tracked(logits)) return;
            const Real g = t.nodes_[std::size_t(self)].grad.values[0] / Real(B);
            const auto& xv = t.value(logits);
            auto& dx = t.grad_buf(logits);
            for (std::int64_t r = 0; r < B; ++r) {
                const Real a = xv.at(r, 0), b = xv.at(r, 1);
                const Real m = a > b ? a : b;
                const Real ea = std::exp(a - m), eb = std::exp(b - m);
                const Real s = ea + eb;
                const Real p0 = ea / s, p1 = eb / s;
                const int lbl = (*lab)[std::size_t(r)];
                dx.at(r, 0) += g * (p0 - (lbl == 0 ? Real(1) : Real(0)));
                dx.at(r, 1) += g * (p1 - (lbl == 1 ? Real(1) : Real(0)));
            }
        });
    }

    /// sum((x - target)^2) / rows(x)
    Index l2_loss(Index x, Tensor<Real> target) {
        const auto& xv = value(x);
        require(xv.shape == target.shape, "l2_loss: shape mismatch");
        const std::int64_t R = xv.rows();
        Real acc = 0;
        for (std::size_t i = 0; i < xv.values.size(); ++i) {
            const Real d = xv.values[i] - target.values[i];
            acc += d * d;
        }
        Tensor<Real> out({1}, {acc / Real(R)});
        auto tgt = std::make_shared<Tensor<Real>>(std::move(target));
        return push(std::move(out), tracked(x), [x, R, tgt](Tape& t, Index self) {
            if (!t.tracked(x)) return;
            const Real g = t.nodes_[std::size_t(self)].grad.values[0];
            const auto& xv = t.value(x);
            auto& dx = t.grad_buf(x);
            const Real k = Real(2) * g / Real(R);
            for (std::size_t i = 0; i < xv.values.size(); ++i)
                dx.values[i] += k * (xv.values[i] - tgt->values[i]);
        });
    }

    Index gather_rows(Index x, std::vector<std::int64_t> rows) {
        const auto& xv = value(x);
        const std::int64_t C = xv.cols();
        Tensor<Real> out = Tensor<Real>::zeros({std::int64_t(rows.size()), C});
        for (std::size_t r = 0; r < rows.size(); ++r)
            std::copy_n(xv.data() + rows[r] * C, C, out.data() + std::int64_t(r) * C);
        auto idx = std::make_shared<std::vector<std::int64_t>>(std::move(rows));
        return push(std::move(out), tracked(x), [x, C, idx](Tape& t, Index self) {
            if (!t.tracked(x)) return;
            const auto& dy = t.nodes_[std::size_t(self)].grad;
            auto& dx = t.grad_buf(x);
            for (std::size_t r = 0; r < idx->size(); ++r) {
                const Real* src = dy.data() + std::int64_t(r) * C;
                Real* dst = dx.data() + (*idx)[r] * C;
                for (std::int64_t c = 0; c < C; ++c) dst[c] += src[c];
            }
        });
    }

    Index concat_cols(Index a, Index b) {
        const auto& av = value(a);
        const auto& bv = value(b);
        require(av.rows() == bv.rows(), "concat_cols: row mismatch");
        const std::int64_t R = av.rows(), Ca = av.cols(), Cb = bv.cols();
        Tensor<Real> out = Tensor<Real>::zeros({R, Ca + Cb});
        for (std::int64_t r = 0; r < R; ++r) {
            std::copy_n(av.data() + r * Ca, Ca, out.data() + r * (Ca + Cb));
            std::copy_n(bv.data() + r * Cb, Cb, out.data() + r * (Ca + Cb) + Ca);
        }
        return push(std::move(out), tracked(a) || tracked(b),
                    [a, b, R, Ca, Cb](Tape& t, Index self) {
                        const auto& dy = t.nodes_[std::size_t(self)].grad;
                        if (t.tracked(a)) {
                            auto& da = t.grad_buf(a);
                            for (std::int64_t r = 0; r < R; ++r)
                                for (std::int64_t c = 0; c < Ca; ++c)
                                    da.values[std::size_t(r * Ca + c)] +=
                                        dy.values[std::size_t(r * (Ca + Cb) + c)];
                        }
                        if (t.tracked(b)) {
                            auto& db = t.grad_buf(b);
                            for (std::int64_t r = 0; r < R; ++r)
                                for (std::int64_t c = 0; c < Cb; ++c)
                                    db.values[std::size_t(r * Cb + c)] +=
                                        dy.values[std::size_t(r * (Ca + Cb) + Ca + c)];
                        }
                    });
    }

    Index reshape(Index x, std::vector<std::int64_t> shape) {
        const auto& xv = value(x);
        Tensor<Real> out(std::move(shape), xv.values);
        require(out.numel() == xv.numel(), "reshape: element count mismatch");
        return push(std::move(out), tracked(x), [x](Tape& t, Index self) {
            if (!t.tracked(x)) return;
            const auto& dy = t.nodes_[std::size_t(self)].grad;
            auto& dx = t.grad_buf(x);
            for (std::size_t i = 0; i < dy.values.size(); ++i) dx.values[i] += dy.values[i];
        });
    }

    Index add(Index a, Index b) {
        const auto& av = value(a);
        const auto& bv = value(b);
        require(av.shape == bv.shape, "add: shape mismatch");
        Tensor<Real> out = av;
        out.requires_grad = false;
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += bv.values[i];
        return push(std::move(out), tracked(a) || tracked(b), [a, b](Tape& t, Index self) {
            const auto& dy = t.nodes_[std::size_t(self)].grad;
            for (Index in : {a, b}) {
                if (!t.tracked(in)) continue;
                auto& dx = t.grad_buf(in);
                for (std::size_t i = 0; i < dy.values.size(); ++i) dx.values[i] += dy.values[i];
            }
        });
    }

    Index scale(Index x, Real c) {
        Tensor<Real> out = value(x);
        out.requires_grad = false;
        for (auto& v : out.values) v *= c;
        return push(std::move(out), tracked(x), [x, c](Tape& t, Index self) {
            if (!t.tracked(x)) return;
            const auto& dy = t.nodes_[std::size_t(self)].grad;
            auto& dx = t.grad_buf(x);
            for (std::size_t i = 0; i < dy.values.size(); ++i) dx.values[i] += c * dy.values[i];
        });
    }

    /// out[r,c] = x[r,c] * s[r]  with s:[R,1]
    Index scale_rows(Index x, Index s) {
        const auto& xv = value(x);
        const auto& sv = value(s);
        require(sv.cols() == 1 && sv.rows() == xv.rows(), "scale_rows: shape mismatch");
        const std::int64_t R = xv.rows(), C = xv.cols();
        Tensor<Real> out = Tensor<Real>::zeros(xv.shape);
        for (std::int64_t r = 0; r < R; ++r)
            for (std::int64_t c = 0; c < C; ++c)
                out.values[std::size_t(r * C + c)] =
                    xv.values[std::size_t(r * C + c)] * sv.values[std::size_t(r)];
        return push(std::move(out), tracked(x) || tracked(s), [x, s, R, C](Tape& t, Index self) {
            const auto& dy = t.nodes_[std::size_t(self)].grad;
            if (t.tracked(x)) {
                auto& dx = t.grad_buf(x);
                const auto& sv = t.value(s);
                for (std::int64_t r = 0; r < R; ++r)
                    for (std::int64_t c = 0; c < C; ++c)
                        dx.values[std::size_t(r * C + c)] +=
                            dy.values[std::size_t(r * C + c)] * sv.values[std::size_t(r)];
            }
            if (t.tracked(s)) {
                auto& ds = t.grad_buf(s);
                const auto& xv = t.value(x);
                for (std::int64_t r = 0; r < R; ++r) {
                    Real acc = 0;
                    for (std::int64_t c = 0; c < C; ++c)
                        acc += dy.values[std::size_t(r * C + c)] * xv.values[std::size_t(r * C + c)];
                    ds.values[std::size_t(r)] += acc;
                }
            }
        });
    }

    /// Row-wise projection to unit length.
    Index normalize_rows(Index x) {
        const auto& xv = value(x);
        const std::int64_t R = xv.rows(), C = xv.cols();
        Tensor<Real> out = Tensor<Real>::zeros(xv.shape);
        for (std::int64_t r = 0; r < R; ++r) {
            Real n2 = 0;
            for (std::int64_t c = 0; c < C; ++c) {
                const Real v = xv.values[std::size_t(r * C + c)];
                n2 += v * v;
            }
            const Real n = std::sqrt(n2) + Real(1e-12);
            for (std::int64_t c = 0; c < C; ++c)
                out.values[std::size_t(r * C + c)] = xv.values[std::size_t(r * C + c)] / n;
        }
        return push(std::move(out), tracked(x), [x, R, C](Tape& t, Index self) {
            if (!t.tracked(x)) return;
            const auto& node = t.nodes_[std::size_t(self)];
            const auto& xv = t.value(x);
            auto& dx = t.grad_buf(x);
            for (std::int64_t r = 0; r < R; ++r) {
                Real n2 = 0;
                for (std::int64_t c = 0; c < C; ++c) {
                    const Real v = xv.values[std::size_t(r * C + c)];
                    n2 += v * v;
                }
                const Real n = std::sqrt(n2) + Real(1e-12);
                Real dot = 0;
                for (std::int64_t c = 0; c < C; ++c)
                    dot += node.grad.values[std::size_t(r * C + c)] *
                           node.value.values[std::size_t(r * C + c)];
                for (std::int64_t c = 0; c < C; ++c)
                    dx.values[std::size_t(r * C + c)] +=
                        (node.grad.values[std::size_t(r * C + c)] -
                         node.value.values[std::size_t(r * C + c)] * dot) / n;
            }
        });
    }

    Index sum_all(Index x) {
        const auto& xv = value(x);
        Real acc = 0;
        for (Real v : xv.values) acc += v;
        return push(Tensor<Real>({1}, {acc}), tracked(x), [x](Tape& t, Index self) {
            if (!t.tracked(x)) return;
            const Real g = t.nodes_[std::size_t(self)].grad.values[0];
            auto& dx = t.grad_buf(x);
            for (auto& v : dx.values) v += g;
        });
    }

    // ---- reverse sweep ---------------------------------------------------

    void backward(Index root, Real seed = Real(1)) {
        require(value(root).numel() == 1, "backward: root must be scalar");
        grad_buf(root).values[0] += seed;
        for (Index i = root; i >= 0; --i) {
            auto& n = nodes_[std::size_t(i)];
            if (n.back && !n.grad.values.empty()) n.back(*this, i);
        }
    }

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor<Real> value;
        Tensor<Real> grad;
        std::function<void(Tape&, Index)> back;
        bool track = false;
        const Tensor<Real>& value_grad() const { return grad; }
    };

    bool tracked(Index i) const { return nodes_[std::size_t(i)].track; }

    Tensor<Real>& grad_buf(Index i) {
        auto& n = nodes_[std::size_t(i)];
        if (n.grad.values.empty()) n.grad = Tensor<Real>::zeros(n.value.shape);
        return n.grad;
    }

    Index push(Tensor<Real> v, bool track, std::function<void(Tape&, Index)> back) {
        Node n;
        n.value = std::move(v);
        n.value.requires_grad = false;
        n.track = track;
        if (track) n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return Index(nodes_.size() - 1);
    }

    std::vector<Node> nodes_;
    std::unordered_map<std::string, Index> param_lookup_;
    std::vector<std::pair<std::string, Index>> param_order_;
    std::vector<Real> scratch_;

    friend struct TapeAccess;
};

} // namespace road
