#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "road/tape.hpp"
#include "road/tensor.hpp"

namespace road {

struct AdamConfig {
    double lr = 6e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Named parameter tensors with per-parameter Adam state. Parameters keep
/// insertion order; that order is the archive manifest order.
template <typename Real>
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor<Real> value;
        Tensor<Real> grad;
        Tensor<Real> m;
        Tensor<Real> v;
        std::int64_t step = 0;
        bool touched = false; // grad accumulated since the last optimizer step
    };

    Entry& add(const std::string& name, Tensor<Real> value) {
        require(index_.find(name) == index_.end(), "duplicate parameter: " + name);
        Entry e;
        e.name = name;
        e.grad = Tensor<Real>::zeros(value.shape);
        e.m = Tensor<Real>::zeros(value.shape);
        e.v = Tensor<Real>::zeros(value.shape);
        e.value = std::move(value);
        index_.emplace(name, entries_.size());
        entries_.push_back(std::move(e));
        return entries_.back();
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    Entry& at(const std::string& name) {
        auto it = index_.find(name);
        require(it != index_.end(), "unknown parameter: " + name);
        return entries_[it->second];
    }
    const Entry& at(const std::string& name) const {
        auto it = index_.find(name);
        require(it != index_.end(), "unknown parameter: " + name);
        return entries_[it->second];
    }

    std::size_t size() const { return entries_.size(); }
    Entry& entry(std::size_t i) { return entries_[i]; }
    const Entry& entry(std::size_t i) const { return entries_[i]; }

    void accumulate_grad(const std::string& name, const Tensor<Real>& g) {
        Entry& e = at(name);
        require(e.value.shape == g.shape, "gradient shape mismatch for " + name);
        for (std::size_t i = 0; i < g.values.size(); ++i) e.grad.values[i] += g.values[i];
        e.touched = true;
    }

    /// Flush a tape's parameter gradients in binding order.
    void accumulate_from(const Tape<Real>& tape) {
        for (const auto& [name, idx] : tape.param_bindings())
            if (tape.has_grad(idx)) accumulate_grad(name, tape.grad(idx));
    }

    void zero_grad() {
        for (auto& e : entries_) {
            if (e.touched) e.grad.fill(Real(0));
            e.touched = false;
        }
    }

    /// Standard bias-corrected Adam over every touched parameter.
    void adam_step(const AdamConfig& cfg) {
        for (auto& e : entries_) {
            if (!e.touched) continue;
            for (Real g : e.grad.values)
                require_runtime(std::isfinite(double(g)),
                                "non-finite gradient for parameter " + e.name);
            e.step += 1;
            const double bc1 = 1.0 - std::pow(cfg.beta1, double(e.step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, double(e.step));
            for (std::size_t i = 0; i < e.value.values.size(); ++i) {
                const double g = double(e.grad.values[i]);
                double m = double(e.m.values[i]) * cfg.beta1 + (1.0 - cfg.beta1) * g;
                double v = double(e.v.values[i]) * cfg.beta2 + (1.0 - cfg.beta2) * g * g;
                e.m.values[i] = Real(m);
                e.v.values[i] = Real(v);
                const double mhat = m / bc1;
                const double vhat = v / bc2;
                e.value.values[i] -= Real(cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
            }
            e.grad.fill(Real(0));
            e.touched = false;
        }
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace road
