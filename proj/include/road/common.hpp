#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace road {

// Error taxonomy mirrored by the CLI exit codes: validation -> 2, runtime -> 3.
class Error : public std::runtime_error {
public:
    enum class Kind { validation, runtime };

    Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(Error::Kind::validation, msg);
}

inline void require_runtime(bool cond, const std::string& msg) {
    if (!cond) throw Error(Error::Kind::runtime, msg);
}

template <typename T>
struct Vec3T {
    T x = 0, y = 0, z = 0;

    Vec3T() = default;
    Vec3T(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

    Vec3T operator+(const Vec3T& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3T operator-(const Vec3T& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3T operator*(T s) const { return {x * s, y * s, z * s}; }
    Vec3T& operator+=(const Vec3T& o) { x += o.x; y += o.y; z += o.z; return *this; }

    T dot(const Vec3T& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3T cross(const Vec3T& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    T norm2() const { return dot(*this); }
    T norm() const { return std::sqrt(norm2()); }
    Vec3T normalized() const {
        T n = norm();
        return n > T(0) ? Vec3T{x / n, y / n, z / n} : Vec3T{0, 0, 0};
    }
    T operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

using Vec3 = Vec3T<double>;
using Vec3f = Vec3T<float>;

inline Vec3f to_f(const Vec3& v) { return {float(v.x), float(v.y), float(v.z)}; }
inline Vec3 to_d(const Vec3f& v) { return {v.x, v.y, v.z}; }

// mt19937_64 with platform-independent derived draws (std distributions are
// implementation-defined, which would break cache/checkpoint reproducibility).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // unbiased integer in [0, n)
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do { r = gen_(); } while (r >= limit);
        return r % n;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double k = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * k;
        has_spare_ = true;
        return u * k;
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0;
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27; x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

} // namespace road
