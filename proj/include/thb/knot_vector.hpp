#pragma once

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace thb {

/// Univariate B-spline space on [0,1]: degree p with a p-open,
/// non-decreasing knot vector. Evaluation uses the Cox-de Boor recursion;
/// x = 1 follows the half-open convention with the last element closed.
class KnotVector {
public:
    KnotVector() = default;
    KnotVector(int degree, std::vector<double> knots) : p_(degree), knots_(std::move(knots)) {
        if (p_ < 1) throw std::invalid_argument("KnotVector: degree must be >= 1");
        if (static_cast<int>(knots_.size()) < 2 * (p_ + 1))
            throw std::invalid_argument("KnotVector: too few knots");
        for (std::size_t i = 1; i < knots_.size(); ++i)
            if (knots_[i] < knots_[i - 1]) throw std::invalid_argument("KnotVector: knots not sorted");
        for (int i = 0; i <= p_; ++i) {
            if (knots_[i] != knots_.front() || knots_[knots_.size() - 1 - i] != knots_.back())
                throw std::invalid_argument("KnotVector: knot vector is not p-open");
        }
        if (knots_.front() != 0.0 || knots_.back() != 1.0)
            throw std::invalid_argument("KnotVector: domain must be [0,1]");
        breakpoints_.push_back(knots_.front());
        for (double t : knots_)
            if (t > breakpoints_.back()) breakpoints_.push_back(t);
        if (num_functions() < p_ + 1) throw std::invalid_argument("KnotVector: too few functions");
    }

    int degree() const { return p_; }
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    int num_functions() const { return static_cast<int>(knots_.size()) - p_ - 1; }
    int num_elements() const { return static_cast<int>(breakpoints_.size()) - 1; }

    double element_lo(int e) const { return breakpoints_[e]; }
    double element_hi(int e) const { return breakpoints_[e + 1]; }
    double element_size(int e) const { return breakpoints_[e + 1] - breakpoints_[e]; }

    /// Largest span s in [p, n-1] with knots[s] <= x < knots[s+1]; x = 1 maps to the last span.
    int find_span(double x) const {
        const int n = num_functions();
        if (x >= knots_[n]) return n - 1;
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
        int s = static_cast<int>(it - knots_.begin()) - 1;
        return std::max(s, p_);
    }

    /// Element index containing x (last element closed).
    int element_of(double x) const {
        if (x >= breakpoints_.back()) return num_elements() - 1;
        auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
        int e = static_cast<int>(it - breakpoints_.begin()) - 1;
        return std::max(e, 0);
    }

    /// Inclusive element range [lo,hi] covered by the support of function i.
    void function_support(int i, int& lo, int& hi) const {
        double a = knots_[i], b = knots_[i + p_ + 1];
        lo = element_of(a);
        if (element_hi(lo) <= a) ++lo;  // skip zero-width start
        hi = element_of(b);
        if (element_lo(hi) >= b) --hi;
        if (b >= breakpoints_.back()) hi = num_elements() - 1;
    }

    /// First function index nonzero on element e (functions e0..e0+p are nonzero).
    int first_function_on_element(int e) const {
        double mid = 0.5 * (breakpoints_[e] + breakpoints_[e + 1]);
        return find_span(mid) - p_;
    }

    double greville(int i) const {
        double s = 0.0;
        for (int k = 1; k <= p_; ++k) s += knots_[i + k];
        return s / p_;
    }

    /// Values and derivatives of the p+1 functions nonzero at x.
    /// ders[r][j] = d^r/dx^r B_{first+j}(x), r = 0..nders. Returns `first`.
    int eval_nonzero(double x, int nders, double ders[][8]) const {
        if (x < 0.0 || x > 1.0) throw std::domain_error("KnotVector::eval_nonzero: x outside [0,1]");
        const int s = find_span(x);
        const int p = p_;
        double ndu[8][8], left[8], right[8], a[2][8];
        ndu[0][0] = 1.0;
        for (int j = 1; j <= p; ++j) {
            left[j] = x - knots_[s + 1 - j];
            right[j] = knots_[s + j] - x;
            double saved = 0.0;
            for (int r = 0; r < j; ++r) {
                ndu[j][r] = right[r + 1] + left[j - r];
                double temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];
        for (int r = 0; r <= p; ++r) {
            int s1 = 0, s2 = 1;
            a[0][0] = 1.0;
            for (int k = 1; k <= nders; ++k) {
                double d = 0.0;
                const int rk = r - k, pk = p - k;
                if (r >= k) {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                    d = a[s2][0] * ndu[rk][pk];
                }
                const int j1 = (rk >= -1) ? 1 : -rk;
                const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
                for (int j = j1; j <= j2; ++j) {
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                    d += a[s2][j] * ndu[rk + j][pk];
                }
                if (r <= pk) {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::swap(s1, s2);
            }
        }
        double factor = p;
        for (int k = 1; k <= nders; ++k) {
            for (int j = 0; j <= p; ++j) ders[k][j] *= factor;
            factor *= (p - k);
        }
        return s - p;
    }

    /// theta for Assumption-style local quasi-uniformity of the breakpoints.
    double local_quasi_uniformity() const {
        double theta = 1.0;
        for (int e = 0; e + 1 < num_elements(); ++e) {
            double r = element_size(e) / element_size(e + 1);
            theta = std::max({theta, r, 1.0 / r});
        }
        return theta;
    }

private:
    int p_ = 0;
    std::vector<double> knots_;
    std::vector<double> breakpoints_;
};

/// Open knot vector with n_elems uniform elements on [0,1], no interior repetition.
inline KnotVector uniform_open_knots(int degree, int n_elems) {
    if (n_elems < 1) throw std::invalid_argument("uniform_open_knots: need >= 1 element");
    std::vector<double> t;
    for (int i = 0; i <= degree; ++i) t.push_back(0.0);
    for (int i = 1; i < n_elems; ++i) t.push_back(static_cast<double>(i) / n_elems);
    for (int i = 0; i <= degree; ++i) t.push_back(1.0);
    return KnotVector(degree, std::move(t));
}

/// Bisects every breakpoint interval, keeping interior multiplicities.
inline KnotVector dyadic_refine(const KnotVector& kv) {
    std::vector<double> t;
    const auto& knots = kv.knots();
    const auto& bp = kv.breakpoints();
    std::size_t ki = 0;
    for (std::size_t b = 0; b + 1 < bp.size(); ++b) {
        while (ki < knots.size() && knots[ki] == bp[b]) t.push_back(knots[ki++]);
        t.push_back(0.5 * (bp[b] + bp[b + 1]));
    }
    while (ki < knots.size()) t.push_back(knots[ki++]);
    return KnotVector(kv.degree(), std::move(t));
}

/// Subdivision matrix M (n_fine x n_coarse) by the Oslo algorithm:
/// a coarse spline with coefficients c is pointwise identical to the fine
/// spline with coefficients M*c. Requires nested knots and equal degree.
inline Eigen::SparseMatrix<double> subdivision_matrix(const KnotVector& coarse, const KnotVector& fine) {
    if (coarse.degree() != fine.degree())
        throw std::invalid_argument("subdivision_matrix: degree mismatch");
    {
        std::size_t fi = 0;
        const auto& ck = coarse.knots();
        const auto& fk = fine.knots();
        for (double t : ck) {
            while (fi < fk.size() && fk[fi] < t) ++fi;
            if (fi == fk.size() || fk[fi] != t)
                throw std::invalid_argument("subdivision_matrix: knot vectors not nested");
            ++fi;
        }
    }
    const int p = coarse.degree();
    const int nf = fine.num_functions();
    const int nc = coarse.num_functions();
    const auto& tc = coarse.knots();
    const auto& tf = fine.knots();

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> alpha(p + 2), next(p + 2);
    for (int j = 0; j < nf; ++j) {
        // mu: coarse span with tc[mu] <= tf[j] < tc[mu+1] (end-clamped).
        int mu;
        if (tf[j] >= tc[nc]) {
            mu = nc - 1;
            while (mu > 0 && tc[mu] == tc[mu + 1]) --mu;
        } else {
            auto it = std::upper_bound(tc.begin(), tc.end(), tf[j]);
            mu = static_cast<int>(it - tc.begin()) - 1;
        }
        // alpha[q] = discrete B-spline alpha_{mu-q, r}(j); both transition
        // weights of source i = mu-q share the denominator tc[i+r]-tc[i].
        alpha.assign(p + 2, 0.0);
        alpha[0] = 1.0;
        for (int r = 1; r <= p; ++r) {
            next.assign(p + 2, 0.0);
            for (int q = 0; q < r; ++q) {
                const double a = alpha[q];
                if (a == 0.0) continue;
                const int i = mu - q;
                const double denom = tc[i + r] - tc[i];
                if (denom <= 0.0) continue;
                const double w = (tf[j + r] - tc[i]) / denom;
                next[q] += a * w;
                next[q + 1] += a * (1.0 - w);
            }
            alpha.swap(next);
        }
        for (int q = 0; q <= p; ++q) {
            const int i = mu - q;
            if (i < 0 || i >= nc) continue;
            if (alpha[q] != 0.0) trip.emplace_back(j, i, alpha[q]);
        }
    }
    Eigen::SparseMatrix<double> M(nf, nc);
    M.setFromTriplets(trip.begin(), trip.end());
    M.makeCompressed();
    return M;
}

}  // namespace thb
