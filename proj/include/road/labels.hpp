#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "road/morton.hpp"
#include "road/nearest.hpp"
#include "road/point_cloud.hpp"

namespace road {

/// Per-LoD sparse supervision. Morton arrays are sorted; parent closure holds
/// by construction (coarser levels are derived from the finest by shifting).
struct VoxelLabelSet {
    struct Level {
        std::vector<std::uint64_t> morton;
        std::vector<float> sdf;                    // normalized by the cell size
        std::vector<std::array<float, 3>> normal;  // unit, from the nearest surface point
    };

    std::string shape_id;
    int max_lod = 0;
    std::vector<Level> levels; // index 0..max_lod

    /// Index of a morton code at a level, or -1 when unoccupied.
    std::int64_t find(int lod, std::uint64_t morton) const {
        const auto& m = levels[std::size_t(lod)].morton;
        auto it = std::lower_bound(m.begin(), m.end(), morton);
        if (it == m.end() || *it != morton) return -1;
        return it - m.begin();
    }

    bool occupied(const VoxelKey& key) const { return find(key.lod, key.morton) >= 0; }
};

/// Signed, cell-size-normalized distance from a voxel center to the nearest
/// surface point; positive outside (along the surface normal).
inline double signed_voxel_distance(const Vec3& center, const NearestHit& hit, int lod) {
    const Vec3 d = center - hit.point;
    const double sign = hit.normal.dot(d) >= 0.0 ? 1.0 : -1.0;
    return sign * d.norm() / voxel_size(lod);
}

/// Occupancy from point containment at every level; SDF/normal labels from the
/// nearest cloud point to each occupied voxel center.
inline VoxelLabelSet build_labels(const OrientedPointCloud& cloud, int max_lod) {
    require(!cloud.empty(), "build_labels: empty cloud");
    require(max_lod >= 0 && max_lod <= 12, "build_labels: max LoD out of range [0,12]");

    VoxelLabelSet out;
    out.shape_id = cloud.shape_id;
    out.max_lod = max_lod;
    out.levels.resize(std::size_t(max_lod) + 1);

    std::vector<std::uint64_t> finest;
    finest.reserve(cloud.size());
    for (const auto& p : cloud.points) finest.push_back(cell_of(to_d(p), max_lod).morton);
    std::sort(finest.begin(), finest.end());
    finest.erase(std::unique(finest.begin(), finest.end()), finest.end());

    out.levels[std::size_t(max_lod)].morton = std::move(finest);
    for (int m = max_lod - 1; m >= 0; --m) {
        const auto& child = out.levels[std::size_t(m + 1)].morton;
        auto& mine = out.levels[std::size_t(m)].morton;
        mine.reserve(child.size());
        for (std::uint64_t c : child) {
            const std::uint64_t p = c >> 3;
            if (mine.empty() || mine.back() != p) mine.push_back(p);
        }
    }

    NearestIndex index(cloud);
    for (int m = 0; m <= max_lod; ++m) {
        auto& level = out.levels[std::size_t(m)];
        level.sdf.resize(level.morton.size());
        level.normal.resize(level.morton.size());
        for (std::size_t i = 0; i < level.morton.size(); ++i) {
            const Vec3 center = voxel_center({m, level.morton[i]});
            const NearestHit hit = index.query(center);
            level.sdf[i] = float(signed_voxel_distance(center, hit, m));
            level.normal[i] = {float(hit.normal.x), float(hit.normal.y), float(hit.normal.z)};
        }
    }
    return out;
}

} // namespace road
