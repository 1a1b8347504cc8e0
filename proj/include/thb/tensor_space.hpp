#pragma once

#include <Eigen/Dense>

#include "thb/gauss.hpp"
#include "thb/knot_vector.hpp"
#include "thb/multi_index.hpp"

namespace thb {

/// Values (and optional derivatives) of the univariate functions that are
/// nonzero at a point: ders[r][j] for function first+j.
struct Local1D {
    int first = 0;
    double ders[3][8];
};

/// Tensor-product B-spline space on [0,1]^d, d = 1..3.
class TensorSpace {
public:
    TensorSpace() = default;
    TensorSpace(int dim, std::array<KnotVector, max_dim> kvs) : dim_(dim), kv_(std::move(kvs)) {
        if (dim_ < 1 || dim_ > max_dim) throw std::invalid_argument("TensorSpace: dim must be 1..3");
        for (int k = 0; k < dim_; ++k) {
            nf_[k] = kv_[k].num_functions();
            ne_[k] = kv_[k].num_elements();
            for (int e = 0; e < ne_[k]; ++e) h_ = std::max(h_, kv_[k].element_size(e));
        }
    }

    int dim() const { return dim_; }
    const KnotVector& knot_vector(int k) const { return kv_[k]; }
    int max_degree() const {
        int p = 0;
        for (int k = 0; k < dim_; ++k) p = std::max(p, kv_[k].degree());
        return p;
    }
    double mesh_size() const { return h_; }

    Index function_counts() const { return nf_; }
    Index element_counts() const { return ne_; }
    long num_functions() const {
        long n = 1;
        for (int k = 0; k < dim_; ++k) n *= nf_[k];
        return n;
    }
    long num_elements() const {
        long n = 1;
        for (int k = 0; k < dim_; ++k) n *= ne_[k];
        return n;
    }

    long function_id(const Index& i) const { return linear_index(dim_, i, nf_); }
    Index function_index(long id) const { return tensor_index(dim_, id, nf_); }
    long element_id(const Index& e) const { return linear_index(dim_, e, ne_); }
    Index element_index(long id) const { return tensor_index(dim_, id, ne_); }

    bool is_boundary_function(const Index& i) const {
        for (int k = 0; k < dim_; ++k)
            if (i[k] == 0 || i[k] == nf_[k] - 1) return true;
        return false;
    }

    /// Per-direction element range covered by supp(B_i).
    IndexBox function_support(const Index& i) const {
        IndexBox box;
        for (int k = 0; k < dim_; ++k) {
            int lo, hi;
            kv_[k].function_support(static_cast<int>(i[k]), lo, hi);
            box.lo[k] = lo;
            box.hi[k] = hi;
        }
        return box;
    }

    /// Functions nonzero on element e: a (p_k+1)^d index box.
    IndexBox functions_on_element(const Index& e) const {
        IndexBox box;
        for (int k = 0; k < dim_; ++k) {
            int f0 = kv_[k].first_function_on_element(static_cast<int>(e[k]));
            box.lo[k] = f0;
            box.hi[k] = f0 + kv_[k].degree();
        }
        return box;
    }

    /// Support extension of an element: the union of supports of all
    /// functions nonzero on it (at most 2p_k+1 spans per direction).
    IndexBox support_extension(const Index& e) const {
        IndexBox fb = functions_on_element(e);
        IndexBox box;
        for (int k = 0; k < dim_; ++k) {
            int lo, hi, lo2, hi2;
            kv_[k].function_support(static_cast<int>(fb.lo[k]), lo, hi);
            kv_[k].function_support(static_cast<int>(fb.hi[k]), lo2, hi2);
            box.lo[k] = lo;
            box.hi[k] = hi2;
        }
        return box;
    }

    IndexBox element_grid_box() const {
        IndexBox box;
        for (int k = 0; k < dim_; ++k) {
            box.lo[k] = 0;
            box.hi[k] = ne_[k] - 1;
        }
        return box;
    }

    void element_bounds(const Index& e, Point& lo, Point& hi) const {
        for (int k = 0; k < dim_; ++k) {
            lo[k] = kv_[k].element_lo(static_cast<int>(e[k]));
            hi[k] = kv_[k].element_hi(static_cast<int>(e[k]));
        }
    }
    double element_measure(const Index& e) const {
        double m = 1.0;
        for (int k = 0; k < dim_; ++k) m *= kv_[k].element_size(static_cast<int>(e[k]));
        return m;
    }

    Index element_of(const Point& x) const {
        Index e{0, 0, 0};
        for (int k = 0; k < dim_; ++k) e[k] = kv_[k].element_of(x[k]);
        return e;
    }

    void eval_1d(int k, double x, int nders, Local1D& out) const {
        out.first = kv_[k].eval_nonzero(x, nders, out.ders);
    }

    /// All functions not vanishing at x with values / first / second partials.
    /// values.col(0) = value; cols 1..d = gradient; then d*(d+1)/2 upper-triangular
    /// second partials (xx, [xy, yy], [xz, yz, zz]) when deriv_order = 2.
    void eval_nonzero_basis(const Point& x, int deriv_order, std::vector<Index>& idx,
                            Eigen::MatrixXd& values) const {
        if (deriv_order < 0 || deriv_order > 2)
            throw std::invalid_argument("eval_nonzero_basis: deriv_order must be 0..2");
        for (int k = 0; k < dim_; ++k)
            if (x[k] < 0.0 || x[k] > 1.0)
                throw std::domain_error("eval_nonzero_basis: point outside [0,1]^d");
        std::array<Local1D, max_dim> loc;
        for (int k = 0; k < dim_; ++k) eval_1d(k, x[k], deriv_order, loc[k]);
        IndexBox box;
        for (int k = 0; k < dim_; ++k) {
            box.lo[k] = loc[k].first;
            box.hi[k] = loc[k].first + kv_[k].degree();
        }
        const long n = box.count(dim_);
        int ncols = 1;
        if (deriv_order >= 1) ncols += dim_;
        if (deriv_order == 2) ncols += dim_ * (dim_ + 1) / 2;
        idx.clear();
        idx.reserve(n);
        values.resize(n, ncols);
        long row = 0;
        for_each_in_box(dim_, box, [&](const Index& i) {
            idx.push_back(i);
            std::array<int, max_dim> o;
            for (int k = 0; k < dim_; ++k) o[k] = static_cast<int>(i[k] - box.lo[k]);
            double v = 1.0;
            for (int k = 0; k < dim_; ++k) v *= loc[k].ders[0][o[k]];
            values(row, 0) = v;
            if (deriv_order >= 1) {
                for (int g = 0; g < dim_; ++g) {
                    double d = 1.0;
                    for (int k = 0; k < dim_; ++k) d *= loc[k].ders[k == g ? 1 : 0][o[k]];
                    values(row, 1 + g) = d;
                }
            }
            if (deriv_order == 2) {
                int c = 1 + dim_;
                for (int g2 = 0; g2 < dim_; ++g2)
                    for (int g1 = 0; g1 <= g2; ++g1) {
                        double d = 1.0;
                        for (int k = 0; k < dim_; ++k) {
                            int ord = (k == g1 ? 1 : 0) + (k == g2 ? 1 : 0);
                            d *= loc[k].ders[ord][o[k]];
                        }
                        values(row, c++) = d;
                    }
            }
            ++row;
        });
    }

private:
    int dim_ = 0;
    std::array<KnotVector, max_dim> kv_;
    Index nf_{1, 1, 1};
    Index ne_{1, 1, 1};
    double h_ = 0.0;
};

/// Uniform space factory used by all experiments.
inline TensorSpace uniform_tensor_space(int dim, const std::array<int, max_dim>& degree,
                                        const std::array<int, max_dim>& n_elems) {
    std::array<KnotVector, max_dim> kvs;
    for (int k = 0; k < dim; ++k) kvs[k] = uniform_open_knots(degree[k], n_elems[k]);
    return TensorSpace(dim, std::move(kvs));
}

inline TensorSpace uniform_tensor_space(int dim, int degree, int n_elems) {
    return uniform_tensor_space(dim, {degree, degree, degree}, {n_elems, n_elems, n_elems});
}

inline TensorSpace dyadic_refine(const TensorSpace& space) {
    std::array<KnotVector, max_dim> kvs;
    for (int k = 0; k < space.dim(); ++k) kvs[k] = dyadic_refine(space.knot_vector(k));
    return TensorSpace(space.dim(), std::move(kvs));
}

/// Per-direction Gauss-Legendre quadrature on an element.
struct QuadratureRule {
    GaussRule rule;
    explicit QuadratureRule(int q) : rule(gauss_legendre(q)) {}
    int order() const { return rule.order(); }
};

}  // namespace thb
