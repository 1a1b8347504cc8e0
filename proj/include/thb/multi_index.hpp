#pragma once

#include <array>
#include <cstdint>
#include <functional>

namespace thb {

inline constexpr int max_dim = 3;

/// Fixed-capacity index tuple for dimensions 1..3; unused entries stay 0.
using Index = std::array<long, max_dim>;
using Point = std::array<double, max_dim>;

inline Index make_index(long i, long j = 0, long k = 0) { return {i, j, k}; }
inline Point make_point(double x, double y = 0.0, double z = 0.0) { return {x, y, z}; }

/// Lexicographic linearization with the first coordinate fastest.
inline long linear_index(int dim, const Index& i, const Index& n) {
    long id = 0;
    for (int k = dim - 1; k >= 0; --k) id = id * n[k] + i[k];
    return id;
}

inline Index tensor_index(int dim, long id, const Index& n) {
    Index i{0, 0, 0};
    for (int k = 0; k < dim; ++k) {
        i[k] = id % n[k];
        id /= n[k];
    }
    return i;
}

/// Axis-aligned inclusive index range, one [lo, hi] pair per direction.
struct IndexBox {
    Index lo{0, 0, 0};
    Index hi{-1, -1, -1};

    bool empty(int dim) const {
        for (int k = 0; k < dim; ++k)
            if (lo[k] > hi[k]) return true;
        return false;
    }
    long count(int dim) const {
        long c = 1;
        for (int k = 0; k < dim; ++k) c *= (hi[k] >= lo[k]) ? hi[k] - lo[k] + 1 : 0;
        return c;
    }
    bool contains(int dim, const Index& i) const {
        for (int k = 0; k < dim; ++k)
            if (i[k] < lo[k] || i[k] > hi[k]) return false;
        return true;
    }
    bool intersects(int dim, const IndexBox& other) const {
        for (int k = 0; k < dim; ++k)
            if (hi[k] < other.lo[k] || other.hi[k] < lo[k]) return false;
        return true;
    }
    IndexBox clipped(int dim, const IndexBox& limits) const {
        IndexBox r = *this;
        for (int k = 0; k < dim; ++k) {
            if (r.lo[k] < limits.lo[k]) r.lo[k] = limits.lo[k];
            if (r.hi[k] > limits.hi[k]) r.hi[k] = limits.hi[k];
        }
        return r;
    }
};

/// Calls fn(multi_index) for every index in the box, first coordinate fastest.
template <typename Fn>
void for_each_in_box(int dim, const IndexBox& box, Fn&& fn) {
    if (box.empty(dim)) return;
    Index i = box.lo;
    while (true) {
        fn(static_cast<const Index&>(i));
        int k = 0;
        while (k < dim) {
            if (++i[k] <= box.hi[k]) break;
            i[k] = box.lo[k];
            ++k;
        }
        if (k == dim) return;
    }
}

}  // namespace thb
