#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "road/common.hpp"

namespace road {

namespace detail {

inline std::uint64_t split3(std::uint64_t x) {
    x &= 0x1fffff; // 21 bits per axis
    x = (x | x << 32) & 0x1f00000000ffffULL;
    x = (x | x << 16) & 0x1f0000ff0000ffULL;
    x = (x | x << 8) & 0x100f00f00f00f00fULL;
    x = (x | x << 4) & 0x10c30c30c30c30c3ULL;
    x = (x | x << 2) & 0x1249249249249249ULL;
    return x;
}

inline std::uint64_t compact3(std::uint64_t x) {
    x &= 0x1249249249249249ULL;
    x = (x ^ (x >> 2)) & 0x10c30c30c30c30c3ULL;
    x = (x ^ (x >> 4)) & 0x100f00f00f00f00fULL;
    x = (x ^ (x >> 8)) & 0x1f0000ff0000ffULL;
    x = (x ^ (x >> 16)) & 0x1f00000000ffffULL;
    x = (x ^ (x >> 32)) & 0x1fffff;
    return x;
}

} // namespace detail

/// x is the fastest-varying axis: morton = interleave(i) | interleave(j)<<1 | interleave(k)<<2.
inline std::uint64_t morton_encode(std::uint32_t i, std::uint32_t j, std::uint32_t k) {
    return detail::split3(i) | detail::split3(j) << 1 | detail::split3(k) << 2;
}

inline std::array<std::uint32_t, 3> morton_decode(std::uint64_t m) {
    return {std::uint32_t(detail::compact3(m)), std::uint32_t(detail::compact3(m >> 1)),
            std::uint32_t(detail::compact3(m >> 2))};
}

/// Octree cell address: level-of-detail plus Morton index within that level.
struct VoxelKey {
    int lod = 0;
    std::uint64_t morton = 0;

    bool operator==(const VoxelKey&) const = default;
    bool operator<(const VoxelKey& o) const {
        return lod != o.lod ? lod < o.lod : morton < o.morton;
    }
};

inline VoxelKey root_key() { return {0, 0}; }

/// Bit b of child selects the high half along axis b (b=0 -> x).
inline VoxelKey child_key(const VoxelKey& parent, int child) {
    return {parent.lod + 1, parent.morton * 8 + std::uint64_t(child)};
}

inline VoxelKey parent_key(const VoxelKey& k) { return {k.lod - 1, k.morton >> 3}; }

/// Cell edge length at a level: the cube [-1,1]^3 splits into 2^lod cells per axis.
inline double voxel_size(int lod) { return std::ldexp(2.0, -lod); }

inline Vec3 voxel_center(const VoxelKey& key) {
    const auto ijk = morton_decode(key.morton);
    const double a = voxel_size(key.lod);
    return {-1.0 + (ijk[0] + 0.5) * a, -1.0 + (ijk[1] + 0.5) * a, -1.0 + (ijk[2] + 0.5) * a};
}

/// Cell index along one axis. Cells are half-open [lo, hi) except the last,
/// which is closed, so a point on a shared face lands in the larger index.
inline std::uint32_t cell_index(double x, int lod) {
    const std::int64_t n = std::int64_t(1) << lod;
    std::int64_t i = std::int64_t(std::floor((x + 1.0) * std::ldexp(1.0, lod - 1)));
    if (i < 0) i = 0;
    if (i >= n) i = n - 1;
    return std::uint32_t(i);
}

inline VoxelKey cell_of(const Vec3& p, int lod) {
    return {lod, morton_encode(cell_index(p.x, lod), cell_index(p.y, lod), cell_index(p.z, lod))};
}

} // namespace road
