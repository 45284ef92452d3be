#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "road/common.hpp"
#include "road/point_cloud.hpp"

namespace road {

struct NearestHit {
    std::uint32_t index = 0;
    Vec3 point;
    Vec3 normal;
    double distance = 0;
};

/// Exact nearest neighbor over a point cloud. Uniform grid over the cloud's
/// bounding box with an expanding ring search; a shell is only accepted once
/// no closer shell can improve the best hit, so results match an exhaustive scan.
class NearestIndex {
public:
    explicit NearestIndex(const OrientedPointCloud& cloud) : cloud_(&cloud) {
        require(!cloud.empty(), "nearest index: empty cloud");
        lo_ = hi_ = to_d(cloud.points[0]);
        for (const auto& p : cloud.points) {
            const Vec3 q = to_d(p);
            lo_ = {std::min(lo_.x, q.x), std::min(lo_.y, q.y), std::min(lo_.z, q.z)};
            hi_ = {std::max(hi_.x, q.x), std::max(hi_.y, q.y), std::max(hi_.z, q.z)};
        }
        const double ext = std::max({hi_.x - lo_.x, hi_.y - lo_.y, hi_.z - lo_.z, 1e-9});
        res_ = int(std::clamp(std::cbrt(double(cloud.size()) / 2.0), 1.0, 128.0));
        cell_ = ext / res_;

        std::vector<std::uint32_t> cell_of(cloud.size());
        std::vector<std::uint32_t> counts(std::size_t(res_) * res_ * res_ + 1, 0);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            cell_of[i] = flat_cell(to_d(cloud.points[i]));
            ++counts[cell_of[i] + 1];
        }
        for (std::size_t c = 1; c < counts.size(); ++c) counts[c] += counts[c - 1];
        offsets_ = counts;
        order_.resize(cloud.size());
        std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (std::size_t i = 0; i < cloud.size(); ++i) order_[cursor[cell_of[i]]++] = std::uint32_t(i);
    }

    NearestHit query(const Vec3& q) const {
        NearestHit best;
        double best_d2 = std::numeric_limits<double>::infinity();
        const int cx = grid_coord(q.x, lo_.x);
        const int cy = grid_coord(q.y, lo_.y);
        const int cz = grid_coord(q.z, lo_.z);
        const int max_ring = res_; // exhaustive by construction at the last ring
        for (int ring = 0; ring <= max_ring; ++ring) {
            // Conservative bound: cells in ring r are at least (r-1) cells away.
            if (ring > 1) {
                const double min_possible = (ring - 1) * cell_;
                if (min_possible * min_possible > best_d2) break;
            }
            scan_ring(q, cx, cy, cz, ring, best, best_d2);
        }
        best.distance = std::sqrt(best_d2);
        return best;
    }

private:
    int grid_coord(double x, double lo) const {
        return std::clamp(int((x - lo) / cell_), 0, res_ - 1);
    }

    std::uint32_t flat_cell(const Vec3& p) const {
        const int x = grid_coord(p.x, lo_.x);
        const int y = grid_coord(p.y, lo_.y);
        const int z = grid_coord(p.z, lo_.z);
        return std::uint32_t((z * res_ + y) * res_ + x);
    }

    void scan_cell(const Vec3& q, int x, int y, int z, NearestHit& best, double& best_d2) const {
        if (x < 0 || y < 0 || z < 0 || x >= res_ || y >= res_ || z >= res_) return;
        const std::uint32_t c = std::uint32_t((z * res_ + y) * res_ + x);
        for (std::uint32_t k = offsets_[c]; k < offsets_[c + 1]; ++k) {
            const std::uint32_t i = order_[k];
            const Vec3 p = to_d(cloud_->points[i]);
            const double d2 = (p - q).norm2();
            if (d2 < best_d2) {
                best_d2 = d2;
                best.index = i;
                best.point = p;
                best.normal = to_d(cloud_->normals[i]);
            }
        }
    }

    void scan_ring(const Vec3& q, int cx, int cy, int cz, int ring, NearestHit& best,
                   double& best_d2) const {
        if (ring == 0) {
            scan_cell(q, cx, cy, cz, best, best_d2);
            return;
        }
        for (int dz = -ring; dz <= ring; ++dz)
            for (int dy = -ring; dy <= ring; ++dy)
                for (int dx = -ring; dx <= ring; ++dx) {
                    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
                    scan_cell(q, cx + dx, cy + dy, cz + dz, best, best_d2);
                }
    }

    const OrientedPointCloud* cloud_;
    Vec3 lo_, hi_;
    int res_ = 1;
    double cell_ = 1;
    std::vector<std::uint32_t> offsets_;
    std::vector<std::uint32_t> order_;
};

/// One-off exact nearest query (grid-accelerated).
inline NearestHit nearest_surface(const Vec3& query, const OrientedPointCloud& cloud) {
    return NearestIndex(cloud).query(query);
}

} // namespace road
