#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "road/morton.hpp"
#include "road/params.hpp"
#include "road/tape.hpp"
#include "road/tensor.hpp"

namespace road {

/// How a parent latent is combined with the eight regressed child latents.
enum class FusionMode { direct, add, concat };

inline const char* fusion_name(FusionMode f) {
    switch (f) {
        case FusionMode::direct: return "direct";
        case FusionMode::add: return "add";
        case FusionMode::concat: return "concat";
    }
    return "?";
}

inline FusionMode fusion_from_name(const std::string& s) {
    if (s == "direct") return FusionMode::direct;
    if (s == "add") return FusionMode::add;
    if (s == "concat") return FusionMode::concat;
    throw Error(Error::Kind::validation, "unknown fusion mode: " + s);
}

struct ModelConfig {
    int latent_dim = 64;
    int max_lod = 6;
    int hidden = 512;
    FusionMode fusion = FusionMode::direct;
    double omega0 = 30.0;     // sine activation frequency
    int concat_max_lod = 6;   // concat encoders grow linearly with depth

    int latent_dim_at(int lod) const {
        return fusion == FusionMode::concat ? (lod + 1) * latent_dim : latent_dim;
    }
};

/// Per-node outputs: eight child latents (fusion applied), occupancy logits
/// and probability, normalized signed distance, unit surface normal.
template <typename Real>
struct NodeEval {
    std::vector<Real> children; // 8 * child_dim
    std::array<Real, 2> occ_logits{};
    Real occ_prob = 0;
    Real sdf = 0;
    std::array<Real, 3> normal{};
};

/// Latent codebook plus the shared network: a sine-activated encoder per
/// input width, a two-layer sine trunk, and linear projection heads for
/// child latents, occupancy, signed distance and normal.
template <typename Real>
class RoadModel {
public:
    using Index = typename Tape<Real>::Index;

    ModelConfig cfg;
    ParamStore<Real> params;
    std::vector<std::string> shape_ids;

    RoadModel(const ModelConfig& c, std::uint64_t seed) : cfg(c) {
        require(cfg.latent_dim > 0 && cfg.hidden > 0 && cfg.max_lod >= 1, "bad model config");
        if (cfg.fusion == FusionMode::concat)
            require(cfg.max_lod <= cfg.concat_max_lod,
                    "concat fusion beyond configured max LoD (" +
                        std::to_string(cfg.concat_max_lod) + ")");
        Rng rng(seed);
        const int H = cfg.hidden;
        if (cfg.fusion == FusionMode::concat) {
            // one specialized encoder per input LoD
            for (int m = 0; m < cfg.max_lod; ++m)
                add_layer("enc" + std::to_string(m), cfg.latent_dim_at(m), H, rng, true);
        } else {
            add_layer("enc", cfg.latent_dim, H, rng, true);
        }
        add_layer("trunk1", H, H, rng, false);
        add_layer("trunk2", H, H, rng, false);
        add_layer("children", H, 8 * cfg.latent_dim, rng, false);
        add_layer("occ", H, 2, rng, false);
        add_layer("sdf", H, 1, rng, false);
        add_layer("normal", H, 3, rng, false);
        weight_count_ = params.size();
    }

    /// Weight entries precede codebook entries in the store.
    std::size_t weight_count() const { return weight_count_; }

    static std::string latent_name(const std::string& shape_id) { return "z0/" + shape_id; }

    void add_shape(const std::string& id, Tensor<Real> z0) {
        require(!params.contains(latent_name(id)), "duplicate shape id: " + id);
        require(z0.numel() == cfg.latent_dim, "latent dim mismatch for shape " + id);
        z0.shape = {1, cfg.latent_dim};
        params.add(latent_name(id), std::move(z0));
        shape_ids.push_back(id);
    }

    const Tensor<Real>& latent(const std::string& id) const {
        return params.at(latent_name(id)).value;
    }

    // ---- tape graph -------------------------------------------------------

    /// Encoder + trunk on latents at a given LoD: z:[B,dim(lod)] -> h:[B,H].
    Index trunk_tape(Tape<Real>& t, Index z, int lod) const {
        const auto& zv = t.value(z);
        require(zv.cols() == cfg.latent_dim_at(lod),
                "latent width does not match LoD " + std::to_string(lod));
        Index h = t.sine(linear_tape(t, z, encoder_name(lod)), Real(cfg.omega0));
        h = t.sine(linear_tape(t, h, "trunk1"), Real(cfg.omega0));
        h = t.sine(linear_tape(t, h, "trunk2"), Real(cfg.omega0));
        return h;
    }

    Index children_raw_tape(Tape<Real>& t, Index h) const { return linear_tape(t, h, "children"); }
    Index occ_tape(Tape<Real>& t, Index h) const { return linear_tape(t, h, "occ"); }
    Index sdf_tape(Tape<Real>& t, Index h) const { return t.tanh_(linear_tape(t, h, "sdf")); }
    Index normal_tape(Tape<Real>& t, Index h) const {
        return t.normalize_rows(linear_tape(t, h, "normal"));
    }

    /// Apply the fusion rule: parent [P,Dp] + raw children [P,8D] -> [8P,Dc],
    /// rows ordered parent-major with the Morton child index fastest.
    Index fuse_children_tape(Tape<Real>& t, Index parent, Index children_raw, int parent_lod) const {
        const std::int64_t P = t.value(parent).rows();
        Index kids = t.reshape(children_raw, {8 * P, std::int64_t(cfg.latent_dim)});
        if (cfg.fusion == FusionMode::direct) return kids;
        std::vector<std::int64_t> tile(std::size_t(8 * P));
        for (std::int64_t r = 0; r < 8 * P; ++r) tile[std::size_t(r)] = r / 8;
        Index parent_tiled = t.gather_rows(parent, std::move(tile));
        if (cfg.fusion == FusionMode::add) return t.add(parent_tiled, kids);
        require(parent_lod + 1 <= cfg.concat_max_lod,
                "concat fusion beyond configured max LoD");
        return t.concat_cols(parent_tiled, kids);
    }

    // ---- inference (no tape) ----------------------------------------------

    struct Workspace {
        Tensor<Real> h, tmp;
        Tensor<Real> children, occ, sdf, normal, fused;
    };

    /// Encoder + trunk into ws.h for a row-block of latents.
    void trunk_eval(const Real* z, std::int64_t B, int lod, Workspace& ws) const {
        linear_eval(z, B, cfg.latent_dim_at(lod), encoder_name(lod), ws.h);
        sine_inplace(ws.h);
        linear_eval(ws.h.data(), B, cfg.hidden, "trunk1", ws.tmp);
        sine_inplace(ws.tmp);
        linear_eval(ws.tmp.data(), B, cfg.hidden, "trunk2", ws.h);
        sine_inplace(ws.h);
    }

    void children_eval(const Workspace& in, std::int64_t B, Tensor<Real>& out) const {
        linear_eval(in.h.data(), B, cfg.hidden, "children", out);
    }
    void occ_eval(const Workspace& in, std::int64_t B, Tensor<Real>& out) const {
        linear_eval(in.h.data(), B, cfg.hidden, "occ", out);
    }
    void sdf_eval(const Real* h, std::int64_t B, Tensor<Real>& out) const {
        linear_eval(h, B, cfg.hidden, "sdf", out);
        for (auto& v : out.values) v = std::tanh(v);
    }
    void normal_eval(const Real* h, std::int64_t B, Tensor<Real>& out) const {
        linear_eval(h, B, cfg.hidden, "normal", out);
        for (std::int64_t r = 0; r < B; ++r) {
            Real* n = out.data() + r * 3;
            const Real len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) + Real(1e-12);
            n[0] /= len;
            n[1] /= len;
            n[2] /= len;
        }
    }

    /// Fusion on raw inference buffers, layout as in fuse_children_tape.
    void fuse_children_eval(const Real* parent, const Real* children_raw, std::int64_t P,
                            int parent_lod, Tensor<Real>& out) const {
        const int D = cfg.latent_dim;
        const int Dp = cfg.latent_dim_at(parent_lod);
        const int Dc = cfg.latent_dim_at(parent_lod + 1);
        if (cfg.fusion == FusionMode::concat)
            require(parent_lod + 1 <= cfg.concat_max_lod,
                    "concat fusion beyond configured max LoD");
        resize(out, 8 * P, Dc);
        for (std::int64_t p = 0; p < P; ++p) {
            for (int c = 0; c < 8; ++c) {
                Real* dst = out.data() + (p * 8 + c) * Dc;
                const Real* raw = children_raw + p * 8 * D + c * D;
                switch (cfg.fusion) {
                    case FusionMode::direct:
                        std::copy_n(raw, D, dst);
                        break;
                    case FusionMode::add:
                        for (int i = 0; i < D; ++i) dst[i] = parent[p * Dp + i] + raw[i];
                        break;
                    case FusionMode::concat:
                        std::copy_n(parent + p * Dp, Dp, dst);
                        std::copy_n(raw, D, dst + Dp);
                        break;
                }
            }
        }
    }

    /// Full single-node evaluation; the reference traversal and tests use this.
    NodeEval<Real> evaluate(const Real* z, int lod, Workspace& ws) const {
        trunk_eval(z, 1, lod, ws);
        NodeEval<Real> out;
        children_eval(ws, 1, ws.children);
        fuse_children_eval(z, ws.children.data(), 1, lod, ws.fused);
        out.children = ws.fused.values;
        occ_eval(ws, 1, ws.occ);
        out.occ_logits = {ws.occ.values[0], ws.occ.values[1]};
        out.occ_prob = occupancy_probability(ws.occ.values[0], ws.occ.values[1]);
        sdf_eval(ws.h.data(), 1, ws.sdf);
        out.sdf = ws.sdf.values[0];
        normal_eval(ws.h.data(), 1, ws.normal);
        out.normal = {ws.normal.values[0], ws.normal.values[1], ws.normal.values[2]};
        for (Real v : out.children) require_runtime(std::isfinite(double(v)), "non-finite activation");
        return out;
    }

    static Real occupancy_probability(Real logit_empty, Real logit_occupied) {
        const Real m = logit_empty > logit_occupied ? logit_empty : logit_occupied;
        const Real e0 = std::exp(logit_empty - m), e1 = std::exp(logit_occupied - m);
        return e1 / (e0 + e1);
    }

private:
    std::string encoder_name(int lod) const {
        return cfg.fusion == FusionMode::concat ? "enc" + std::to_string(lod) : "enc";
    }

    // SIREN-style init: first layer U(+-1/fan_in), later layers
    // U(+-sqrt(6/fan_in)/omega0), biases U(+-1/sqrt(fan_in)).
    void add_layer(const std::string& name, int fan_in, int fan_out, Rng& rng, bool first) {
        const double wb = first ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / cfg.omega0;
        const double bb = 1.0 / std::sqrt(double(fan_in));
        Tensor<Real> W = Tensor<Real>::zeros({fan_in, fan_out});
        for (auto& v : W.values) v = Real(rng.uniform(-wb, wb));
        Tensor<Real> b = Tensor<Real>::zeros({fan_out});
        for (auto& v : b.values) v = Real(rng.uniform(-bb, bb));
        params.add(name + ".w", std::move(W));
        params.add(name + ".b", std::move(b));
    }

    Index linear_tape(Tape<Real>& t, Index x, const std::string& layer) const {
        Index W = t.param(layer + ".w", params.at(layer + ".w").value);
        Index b = t.param(layer + ".b", params.at(layer + ".b").value);
        return t.linear(x, W, b);
    }

    void linear_eval(const Real* x, std::int64_t B, std::int64_t I, const std::string& layer,
                     Tensor<Real>& out) const {
        const auto& W = params.at(layer + ".w").value;
        const auto& b = params.at(layer + ".b").value;
        require(W.shape[0] == I, "linear_eval: input width mismatch for " + layer);
        const std::int64_t O = W.shape[1];
        resize(out, B, O);
        for (std::int64_t r = 0; r < B; ++r)
            std::copy(b.values.begin(), b.values.end(), out.values.begin() + r * O);
        detail::gemm_nn(B, O, I, x, W.data(), out.data());
    }

    void sine_inplace(Tensor<Real>& t) const {
        const Real w = Real(cfg.omega0);
        for (auto& v : t.values) v = std::sin(w * v);
    }

    static void resize(Tensor<Real>& t, std::int64_t r, std::int64_t c) {
        t.shape = {r, c};
        t.values.assign(std::size_t(r * c), Real(0));
    }

    std::size_t weight_count_ = 0;
};

} // namespace road
