#pragma once

#include "thb/hier_mesh.hpp"

namespace thb {

/// Test-1 mesh family: (2p+1)^d coarse elements; step l refines the corner
/// block of (p + 2^l)^d level-l elements, leaving a frame of p elements
/// between non-consecutive levels. Strictly T-admissible with m = 2.
inline HierarchicalMesh gen_test1_mesh(int p, int d, int num_levels) {
    if (num_levels < 1) throw std::invalid_argument("gen_test1_mesh: need >= 1 level");
    HierarchicalMesh mesh(uniform_tensor_space(d, p, 2 * p + 1));
    for (int step = 0; step + 1 < num_levels; ++step) {
        const long block = p + (1L << step);
        const TensorSpace& sp = mesh.level(step);
        std::vector<std::vector<long>> marked(step + 1);
        for (long eid : mesh.active(step)) {
            Index e = sp.element_index(eid);
            bool inside = true;
            for (int k = 0; k < d; ++k) inside = inside && e[k] < block;
            if (inside) marked[step].push_back(eid);
        }
        mesh = mesh.refine_raw(marked);
    }
    return mesh;
}

/// Active elements whose closure lies in [0, frac]^d.
inline std::vector<std::vector<long>> mark_corner_region(const HierarchicalMesh& mesh, double frac) {
    const int d = mesh.dim();
    std::vector<std::vector<long>> marked(mesh.num_levels());
    for (int l = 0; l < mesh.num_levels(); ++l) {
        const TensorSpace& sp = mesh.level(l);
        for (long eid : mesh.active(l)) {
            Point lo, hi;
            sp.element_bounds(sp.element_index(eid), lo, hi);
            bool inside = true;
            for (int k = 0; k < d; ++k) inside = inside && hi[k] <= frac + 1e-12;
            if (inside) marked[l].push_back(eid);
        }
    }
    return marked;
}

/// Test-2 mesh family: 9x9 coarse elements; every step refines the whole
/// region (0,1/3)^2, producing the non-admissible tower over the corner.
/// The element pattern is degree-independent; p only sets the knots carried
/// by the per-level spaces.
inline HierarchicalMesh gen_test2_mesh(int p, int num_levels) {
    if (num_levels < 1) throw std::invalid_argument("gen_test2_mesh: need >= 1 level");
    HierarchicalMesh mesh(uniform_tensor_space(2, p, 9));
    for (int step = 0; step + 1 < num_levels; ++step)
        mesh = mesh.refine_raw(mark_corner_region(mesh, 1.0 / 3.0));
    return mesh;
}

/// Test-3/4 mesh family: same 9x9 start and corner marking as Test 2, but
/// closed with the admissible refinement algorithm for the given class.
/// The degree enters through the support extensions used by the closure.
inline HierarchicalMesh gen_test3_mesh(int p, int num_levels, const AdmissibilityClass& cls) {
    if (num_levels < 1) throw std::invalid_argument("gen_test3_mesh: need >= 1 level");
    HierarchicalMesh mesh(uniform_tensor_space(2, p, 9));
    for (int step = 0; step + 1 < num_levels; ++step)
        mesh = mesh.admissible_refine(mark_corner_region(mesh, 1.0 / 3.0), cls);
    return mesh;
}

}  // namespace thb
