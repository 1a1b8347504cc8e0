#pragma once

#include <Eigen/Dense>
#include <functional>

#include "thb/tensor_space.hpp"

namespace thb {

using ScalarField = std::function<double(const Point&)>;

/// Local Gram matrix and moments of the functions nonzero on element Q,
/// shared by the dual functional and the quasi-interpolant.
/// Returns the coefficient vector of the local L2 projection of f on Q.
inline Eigen::VectorXd local_projection(const TensorSpace& space, const Index& Q,
                                        const ScalarField& f, int quad_order = 0) {
    const int d = space.dim();
    const int q = quad_order > 0 ? quad_order : space.max_degree() + 1;
    GaussRule g = gauss_legendre(q);
    IndexBox fb = space.functions_on_element(Q);
    const long nloc = fb.count(d);

    Point lo, hi;
    space.element_bounds(Q, lo, hi);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nloc, nloc);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nloc);

    IndexBox qbox;
    for (int k = 0; k < d; ++k) {
        qbox.lo[k] = 0;
        qbox.hi[k] = q - 1;
    }
    std::vector<Index> idx;
    Eigen::MatrixXd vals;
    for_each_in_box(d, qbox, [&](const Index& qi) {
        Point x;
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            x[k] = lo[k] + (hi[k] - lo[k]) * g.nodes[qi[k]];
            w *= (hi[k] - lo[k]) * g.weights[qi[k]];
        }
        space.eval_nonzero_basis(x, 0, idx, vals);
        Eigen::VectorXd b(nloc);
        for (long a = 0; a < nloc; ++a) b(a) = vals(a, 0);
        G.noalias() += w * b * b.transpose();
        rhs.noalias() += (w * f(x)) * b;
    });

    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("local_projection: singular local Gram matrix");
    Eigen::VectorXd c = ldlt.solve(rhs);
    if ((G * c - rhs).norm() > 1e-8 * (1.0 + rhs.norm()))
        throw std::runtime_error("local_projection: local Gram solve failed");
    return c;
}

/// Dual functional lambda_{fn}(f): the fn-coefficient of the local L2
/// projection of f onto the span of functions not vanishing on Q.
inline double dual_functional(const TensorSpace& space, const Index& fn, const Index& Q,
                              const ScalarField& f, int quad_order = 0) {
    const int d = space.dim();
    IndexBox fb = space.functions_on_element(Q);
    if (!fb.contains(d, fn))
        throw std::invalid_argument("dual_functional: element not inside supp of the function");
    Eigen::VectorXd c = local_projection(space, Q, f, quad_order);
    Index off;
    for (int k = 0; k < d; ++k) off[k] = fn[k] - fb.lo[k];
    Index nl;
    for (int k = 0; k < d; ++k) nl[k] = fb.hi[k] - fb.lo[k] + 1;
    return c(linear_index(d, off, nl));
}

/// Element inside supp(B_fn) used by default: the middle support element.
inline Index default_dual_element(const TensorSpace& space, const Index& fn) {
    IndexBox sb = space.function_support(fn);
    Index e;
    for (int k = 0; k < space.dim(); ++k) e[k] = (sb.lo[k] + sb.hi[k]) / 2;
    return e;
}

/// Tensor-product quasi-interpolant: coefficients lambda_i(f) for all i.
/// element_choice maps a function id to the element of its local projection;
/// pass an empty function to use the default middle-of-support choice.
inline Eigen::VectorXd quasi_interpolant(const TensorSpace& space, const ScalarField& f,
                                         const std::function<Index(long)>& element_choice = {},
                                         int quad_order = 0) {
    const long n = space.num_functions();
    Eigen::VectorXd coeffs(n);
    for (long id = 0; id < n; ++id) {
        Index fn = space.function_index(id);
        Index Q = element_choice ? element_choice(id) : default_dual_element(space, fn);
        coeffs(id) = dual_functional(space, fn, Q, f, quad_order);
    }
    return coeffs;
}

}  // namespace thb
