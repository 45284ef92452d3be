#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "road/common.hpp"
#include "road/point_cloud.hpp"
#include "road/tape.hpp"
#include "road/tensor.hpp"

namespace testutil {

using road::OrientedPointCloud;
using road::Rng;
using road::TriMesh;
using road::Vec3;

// ---- finite-difference gradient oracle -------------------------------------

struct GradCheckResult {
    double max_rel_err = 0;
    std::size_t checked = 0;
};

/// Central finite differences against tape gradients in 64-bit. `build` maps
/// leaf indices to a scalar root. Coordinates may be subsampled for speed.
inline GradCheckResult check_gradients(
    std::vector<road::Tensor<double>> leaves,
    const std::function<road::Tape<double>::Index(road::Tape<double>&,
                                                  const std::vector<road::Tape<double>::Index>&)>&
        build,
    std::size_t max_coords_per_leaf = SIZE_MAX, std::uint64_t subsample_seed = 0,
    double h = 1e-6) {
    for (auto& l : leaves) l.requires_grad = true;

    auto eval = [&](const std::vector<road::Tensor<double>>& vals, bool want_grad,
                    std::vector<road::Tensor<double>>* grads) {
        road::Tape<double> tape;
        std::vector<road::Tape<double>::Index> idx;
        for (const auto& v : vals) {
            auto t = v;
            t.requires_grad = want_grad;
            idx.push_back(tape.input(std::move(t)));
        }
        auto root = build(tape, idx);
        const double out = tape.value(root).values[0];
        if (want_grad) {
            tape.backward(root);
            grads->clear();
            for (auto i : idx)
                grads->push_back(tape.has_grad(i) ? tape.grad(i)
                                                  : road::Tensor<double>::zeros(tape.value(i).shape));
        }
        return out;
    };

    std::vector<road::Tensor<double>> analytic;
    eval(leaves, true, &analytic);

    GradCheckResult res;
    Rng pick(subsample_seed);
    for (std::size_t l = 0; l < leaves.size(); ++l) {
        const std::size_t n = leaves[l].values.size();
        std::vector<std::size_t> coords;
        if (n <= max_coords_per_leaf) {
            coords.resize(n);
            for (std::size_t i = 0; i < n; ++i) coords[i] = i;
        } else {
            for (std::size_t i = 0; i < max_coords_per_leaf; ++i)
                coords.push_back(std::size_t(pick.bounded(n)));
        }
        for (std::size_t c : coords) {
            auto plus = leaves;
            auto minus = leaves;
            const double step = h * std::max(1.0, std::abs(leaves[l].values[c]));
            plus[l].values[c] += step;
            minus[l].values[c] -= step;
            const double fd = (eval(plus, false, nullptr) - eval(minus, false, nullptr)) / (2 * step);
            const double a = analytic[l].values[c];
            const double err = std::abs(a - fd) / std::max(1e-4, std::abs(a) + std::abs(fd));
            res.max_rel_err = std::max(res.max_rel_err, err);
            ++res.checked;
        }
    }
    return res;
}

// ---- analytic shapes --------------------------------------------------------

inline OrientedPointCloud make_sphere_cloud(std::size_t n, std::uint64_t seed,
                                            double radius = 0.95, Vec3 center = {0, 0, 0}) {
    Rng rng(seed);
    OrientedPointCloud cloud;
    cloud.shape_id = "sphere";
    cloud.points.reserve(n);
    cloud.normals.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 d{rng.normal(), rng.normal(), rng.normal()};
        while (d.norm() < 1e-6) d = {rng.normal(), rng.normal(), rng.normal()};
        d = d.normalized();
        cloud.points.push_back(road::to_f(center + d * radius));
        cloud.normals.push_back(road::to_f(d));
    }
    return cloud;
}

inline OrientedPointCloud make_torus_cloud(std::size_t n, std::uint64_t seed,
                                           double major = 0.6333, double minor = 0.3167) {
    Rng rng(seed);
    OrientedPointCloud cloud;
    cloud.shape_id = "torus";
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform(0, 2 * M_PI);
        double v;
        // area element is proportional to (major + minor*cos v)
        do {
            v = rng.uniform(0, 2 * M_PI);
        } while (rng.uniform01() >= (major + minor * std::cos(v)) / (major + minor));
        const Vec3 p{(major + minor * std::cos(v)) * std::cos(u),
                     (major + minor * std::cos(v)) * std::sin(u), minor * std::sin(v)};
        const Vec3 nrm{std::cos(v) * std::cos(u), std::cos(v) * std::sin(u), std::sin(v)};
        cloud.points.push_back(road::to_f(p));
        cloud.normals.push_back(road::to_f(nrm));
    }
    return cloud;
}

inline OrientedPointCloud make_box_cloud(std::size_t n, std::uint64_t seed,
                                         Vec3 half = {0.95, 0.95, 0.95}) {
    Rng rng(seed);
    OrientedPointCloud cloud;
    cloud.shape_id = "box";
    const double areas[3] = {half.y * half.z, half.x * half.z, half.x * half.y}; // per axis pair
    const double total = 2 * (areas[0] + areas[1] + areas[2]);
    for (std::size_t i = 0; i < n; ++i) {
        double pick = rng.uniform01() * total;
        int axis = 0;
        double sign = 1;
        for (int a = 0; a < 3; ++a) {
            if (pick < 2 * areas[a]) {
                axis = a;
                sign = pick < areas[a] ? -1.0 : 1.0;
                break;
            }
            pick -= 2 * areas[a];
        }
        Vec3 p{rng.uniform(-half.x, half.x), rng.uniform(-half.y, half.y),
               rng.uniform(-half.z, half.z)};
        Vec3 nrm{0, 0, 0};
        if (axis == 0) { p.x = sign * half.x; nrm.x = sign; }
        if (axis == 1) { p.y = sign * half.y; nrm.y = sign; }
        if (axis == 2) { p.z = sign * half.z; nrm.z = sign; }
        cloud.points.push_back(road::to_f(p));
        cloud.normals.push_back(road::to_f(nrm));
    }
    return cloud;
}

inline OrientedPointCloud make_capsule_cloud(std::size_t n, std::uint64_t seed, double radius = 0.35,
                                             double half_len = 0.6) {
    Rng rng(seed);
    OrientedPointCloud cloud;
    cloud.shape_id = "capsule";
    const double side_area = 2 * M_PI * radius * (2 * half_len);
    const double cap_area = 4 * M_PI * radius * radius;
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform01() * (side_area + cap_area) < side_area) {
            const double a = rng.uniform(0, 2 * M_PI);
            const double z = rng.uniform(-half_len, half_len);
            const Vec3 nrm{std::cos(a), std::sin(a), 0};
            cloud.points.push_back(road::to_f(Vec3{nrm.x * radius, nrm.y * radius, z}));
            cloud.normals.push_back(road::to_f(nrm));
        } else {
            Vec3 d{rng.normal(), rng.normal(), rng.normal()};
            while (d.norm() < 1e-6) d = {rng.normal(), rng.normal(), rng.normal()};
            d = d.normalized();
            const double zc = d.z >= 0 ? half_len : -half_len;
            cloud.points.push_back(road::to_f(Vec3{d.x * radius, d.y * radius, zc + d.z * radius}));
            cloud.normals.push_back(road::to_f(d));
        }
    }
    return cloud;
}

/// Parametric superellipsoid triangle mesh (exponents 1 give an ellipsoid).
inline TriMesh make_superellipsoid_mesh(double a, double b, double c, double e1, double e2,
                                        int res = 96) {
    auto spow = [](double v, double e) {
        return (v >= 0 ? 1.0 : -1.0) * std::pow(std::abs(v), e);
    };
    TriMesh mesh;
    const int nu = res, nv = 2 * res;
    for (int i = 0; i <= nu; ++i) {
        const double eta = -M_PI / 2 + M_PI * i / nu;
        for (int j = 0; j < nv; ++j) {
            const double omega = -M_PI + 2 * M_PI * j / nv;
            const double ce = spow(std::cos(eta), e1), se = spow(std::sin(eta), e1);
            const double cw = spow(std::cos(omega), e2), sw = spow(std::sin(omega), e2);
            mesh.vertices.push_back(road::to_f(Vec3{a * ce * cw, b * ce * sw, c * se}));
        }
    }
    auto vid = [&](int i, int j) { return std::uint32_t(i * nv + (j % nv)); };
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            const auto v00 = vid(i, j), v01 = vid(i, j + 1), v10 = vid(i + 1, j),
                       v11 = vid(i + 1, j + 1);
            mesh.faces.push_back({v00, v01, v11});
            mesh.faces.push_back({v00, v11, v10});
        }
    // drop degenerate pole triangles
    std::vector<std::array<std::uint32_t, 3>> keep;
    for (const auto& f : mesh.faces) {
        const Vec3 p0 = road::to_d(mesh.vertices[f[0]]);
        const Vec3 p1 = road::to_d(mesh.vertices[f[1]]);
        const Vec3 p2 = road::to_d(mesh.vertices[f[2]]);
        if ((p1 - p0).cross(p2 - p0).norm() > 1e-12) keep.push_back(f);
    }
    mesh.faces = std::move(keep);
    return mesh;
}

// ---- analytic unsigned distances (surface oracles) -------------------------

inline double sphere_distance(const Vec3& p, double radius = 0.95) {
    return std::abs(p.norm() - radius);
}

inline double torus_distance(const Vec3& p, double major = 0.6333, double minor = 0.3167) {
    const double q = std::sqrt(p.x * p.x + p.y * p.y) - major;
    return std::abs(std::sqrt(q * q + p.z * p.z) - minor);
}

inline double box_distance(const Vec3& p, Vec3 half = {0.95, 0.95, 0.95}) {
    const Vec3 d{std::abs(p.x) - half.x, std::abs(p.y) - half.y, std::abs(p.z) - half.z};
    const Vec3 outside{std::max(d.x, 0.0), std::max(d.y, 0.0), std::max(d.z, 0.0)};
    const double inside = std::min(std::max({d.x, d.y, d.z}), 0.0);
    return std::abs(outside.norm() + inside);
}

inline double capsule_distance(const Vec3& p, double radius = 0.35, double half_len = 0.6) {
    const double z = std::clamp(p.z, -half_len, half_len);
    const Vec3 d{p.x, p.y, p.z - z};
    return std::abs(d.norm() - radius);
}

// ---- scratch dir ------------------------------------------------------------

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("road_test_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace testutil
