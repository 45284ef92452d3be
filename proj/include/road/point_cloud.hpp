#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "road/common.hpp"

namespace road {

/// Canonical shape representation: positions with unit normals in [-1,1]^3.
struct OrientedPointCloud {
    std::vector<Vec3f> points;
    std::vector<Vec3f> normals;
    std::string shape_id;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

struct TriMesh {
    std::vector<Vec3f> vertices;
    std::vector<std::array<std::uint32_t, 3>> faces;
};

/// p' = (p - center) * scale, mapping the source bounding box into [-1,1]^3.
struct NormalizationTransform {
    Vec3 center{0, 0, 0};
    double scale = 1.0;

    Vec3 apply(const Vec3& p) const { return (p - center) * scale; }
    Vec3 invert(const Vec3& p) const { return p * (1.0 / scale) + center; }
};

namespace detail {

template <typename GetPoint>
NormalizationTransform normalization_for(std::size_t n, GetPoint get, double margin) {
    require(n > 0, "normalize: empty geometry");
    Vec3 lo = get(0), hi = get(0);
    for (std::size_t i = 1; i < n; ++i) {
        const Vec3 p = get(i);
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    const Vec3 half = (hi - lo) * 0.5;
    const double ext = std::max({half.x, half.y, half.z});
    require(ext > 0, "normalize: degenerate zero-extent input");
    return {(lo + hi) * 0.5, margin / ext};
}

} // namespace detail

/// Center at the origin and scale isotropically so the max half-extent is 0.95.
inline NormalizationTransform normalize(TriMesh& mesh, double margin = 0.95) {
    auto t = detail::normalization_for(
        mesh.vertices.size(), [&](std::size_t i) { return to_d(mesh.vertices[i]); }, margin);
    for (auto& v : mesh.vertices) v = to_f(t.apply(to_d(v)));
    return t;
}

inline NormalizationTransform normalize(OrientedPointCloud& cloud, double margin = 0.95) {
    auto t = detail::normalization_for(
        cloud.points.size(), [&](std::size_t i) { return to_d(cloud.points[i]); }, margin);
    for (auto& p : cloud.points) p = to_f(t.apply(to_d(p)));
    return t;
}

/// Area-weighted uniform surface sampling; per-sample normal is the face normal.
inline OrientedPointCloud sample_surface(const TriMesh& mesh, std::size_t count, Rng& rng) {
    OrientedPointCloud out;
    if (count == 0) return out;
    require(!mesh.faces.empty(), "sample_surface: mesh has no faces");

    std::vector<double> cumulative(mesh.faces.size());
    std::vector<Vec3> face_normals(mesh.faces.size());
    double total = 0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Vec3 a = to_d(mesh.vertices[mesh.faces[f][0]]);
        const Vec3 b = to_d(mesh.vertices[mesh.faces[f][1]]);
        const Vec3 c = to_d(mesh.vertices[mesh.faces[f][2]]);
        const Vec3 n = (b - a).cross(c - a);
        total += 0.5 * n.norm();
        cumulative[f] = total;
        face_normals[f] = n.normalized();
    }
    require(total > 0, "sample_surface: zero total area");

    out.points.reserve(count);
    out.normals.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        const double target = rng.uniform01() * total;
        const std::size_t f =
            std::size_t(std::lower_bound(cumulative.begin(), cumulative.end(), target) -
                        cumulative.begin());
        const std::size_t fi = std::min(f, mesh.faces.size() - 1);
        const Vec3 a = to_d(mesh.vertices[mesh.faces[fi][0]]);
        const Vec3 b = to_d(mesh.vertices[mesh.faces[fi][1]]);
        const Vec3 c = to_d(mesh.vertices[mesh.faces[fi][2]]);
        const double r1 = std::sqrt(rng.uniform01());
        const double r2 = rng.uniform01();
        const Vec3 p = a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2);
        out.points.push_back(to_f(p));
        out.normals.push_back(to_f(face_normals[fi]));
    }
    return out;
}

} // namespace road
