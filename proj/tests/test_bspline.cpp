#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "thb/quasi_interp.hpp"
#include "thb/tensor_space.hpp"

using namespace thb;

namespace {

double eval_spline_1d(const KnotVector& kv, const Eigen::VectorXd& coeffs, double x, int der = 0) {
    double ders[3][8];
    int first = kv.eval_nonzero(x, der, ders);
    double v = 0.0;
    for (int j = 0; j <= kv.degree(); ++j) v += coeffs(first + j) * ders[der][j];
    return v;
}

// Independent Cox-de Boor recursion, direct from the definition.
double cox_de_boor(const std::vector<double>& t, int i, int p, double x) {
    if (p == 0) {
        bool last = (static_cast<std::size_t>(i + 2) == t.size()) || (t[i + 1] == t.back());
        if (x >= t[i] && (x < t[i + 1] || (last && x <= t[i + 1] && t[i] < t[i + 1]))) return 1.0;
        return 0.0;
    }
    double v = 0.0;
    if (t[i + p] > t[i]) v += (x - t[i]) / (t[i + p] - t[i]) * cox_de_boor(t, i, p - 1, x);
    if (t[i + p + 1] > t[i + 1])
        v += (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) * cox_de_boor(t, i + 1, p - 1, x);
    return v;
}

}  // namespace

TEST_CASE("gauss rule integrates polynomials of degree 2q-1", "[bspline]") {
    for (int q = 1; q <= 8; ++q) {
        GaussRule g = gauss_legendre(q);
        for (int deg = 0; deg <= 2 * q - 1; ++deg) {
            double s = 0.0;
            for (int i = 0; i < q; ++i) s += g.weights[i] * std::pow(g.nodes[i], deg);
            double exact = 1.0 / (deg + 1);
            REQUIRE(std::abs(s - exact) < 1e-13 * std::abs(exact));
        }
    }
}

TEST_CASE("knot vector invariants", "[bspline]") {
    for (int p = 1; p <= 4; ++p) {
        KnotVector kv = uniform_open_knots(p, 8);
        REQUIRE(kv.num_functions() == 8 + p);
        REQUIRE(kv.num_elements() == 8);
        REQUIRE(kv.num_functions() >= p + 1);
        REQUIRE(kv.local_quasi_uniformity() <= 2.0);
        for (std::size_t i = 1; i < kv.breakpoints().size(); ++i)
            REQUIRE(kv.breakpoints()[i] > kv.breakpoints()[i - 1]);
    }
    REQUIRE_THROWS_AS(KnotVector(2, std::vector<double>{0, 0, 0.5, 1, 1}), std::invalid_argument);
}

TEST_CASE("hat functions at the midpoint of an element", "[bspline]") {
    KnotVector kv = uniform_open_knots(1, 2);
    double ders[3][8];
    int first = kv.eval_nonzero(0.25, 0, ders);
    REQUIRE(first == 0);
    REQUIRE(ders[0][0] == Catch::Approx(0.5));
    REQUIRE(ders[0][1] == Catch::Approx(0.5));
}

TEST_CASE("quadratic values match the Cox-de Boor recursion", "[bspline]") {
    KnotVector kv(2, {0, 0, 0, 0.5, 1, 1, 1});
    double ders[3][8];
    int first = kv.eval_nonzero(0.25, 0, ders);
    REQUIRE(first == 0);
    CHECK(ders[0][0] == Catch::Approx(0.25).margin(1e-14));
    CHECK(ders[0][1] == Catch::Approx(0.625).margin(1e-14));
    CHECK(ders[0][2] == Catch::Approx(0.125).margin(1e-14));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int p = 1; p <= 4; ++p) {
        KnotVector u = uniform_open_knots(p, 5);
        for (int trial = 0; trial < 50; ++trial) {
            double x = unif(rng);
            int f0 = u.eval_nonzero(x, 0, ders);
            for (int j = 0; j <= p; ++j) {
                double ref = cox_de_boor(u.knots(), f0 + j, p, x);
                REQUIRE(ders[0][j] == Catch::Approx(ref).margin(1e-12));
            }
        }
    }
}

TEST_CASE("partition of unity at 1000 random points", "[bspline]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int p = 1; p <= 4; ++p) {
        KnotVector kv = uniform_open_knots(p, 7);
        double ders[3][8];
        for (int trial = 0; trial < 250; ++trial) {
            double x = unif(rng);
            kv.eval_nonzero(x, 0, ders);
            double s = 0.0;
            for (int j = 0; j <= p; ++j) s += ders[0][j];
            REQUIRE(std::abs(s - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("derivatives are consistent with finite differences", "[bspline]") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    for (int p = 2; p <= 4; ++p) {
        KnotVector kv = uniform_open_knots(p, 6);
        Eigen::VectorXd c = Eigen::VectorXd::Random(kv.num_functions());
        for (int trial = 0; trial < 30; ++trial) {
            double x = unif(rng);
            const double h = 1e-6;
            double d_exact = eval_spline_1d(kv, c, x, 1);
            double d_fd = (eval_spline_1d(kv, c, x + h) - eval_spline_1d(kv, c, x - h)) / (2 * h);
            REQUIRE(d_exact == Catch::Approx(d_fd).epsilon(1e-5).margin(1e-7));
            double d2_exact = eval_spline_1d(kv, c, x, 2);
            double d2_fd = (eval_spline_1d(kv, c, x + h) - 2 * eval_spline_1d(kv, c, x) +
                            eval_spline_1d(kv, c, x - h)) /
                           (h * h);
            REQUIRE(d2_exact == Catch::Approx(d2_fd).epsilon(5e-4).margin(1e-4));
        }
    }
}

TEST_CASE("eval rejects points outside the domain", "[bspline]") {
    KnotVector kv = uniform_open_knots(2, 4);
    double ders[3][8];
    REQUIRE_THROWS_AS(kv.eval_nonzero(-0.1, 0, ders), std::domain_error);
    REQUIRE_THROWS_AS(kv.eval_nonzero(1.1, 0, ders), std::domain_error);
    TensorSpace sp = uniform_tensor_space(2, 2, 4);
    std::vector<Index> idx;
    Eigen::MatrixXd vals;
    REQUIRE_THROWS_AS(sp.eval_nonzero_basis(make_point(0.5, 1.2), 0, idx, vals), std::domain_error);
}

TEST_CASE("dyadic subdivision stencils", "[bspline]") {
    SECTION("p=1 interior column is (1/2, 1, 1/2)") {
        KnotVector c = uniform_open_knots(1, 4);
        KnotVector f = dyadic_refine(c);
        auto M = subdivision_matrix(c, f);
        // interior coarse function i=2 peaks at fine index 4
        Eigen::VectorXd col = M.col(2);
        std::vector<double> nz;
        for (int r = 0; r < col.size(); ++r)
            if (col(r) != 0.0) nz.push_back(col(r));
        REQUIRE(nz == std::vector<double>{0.5, 1.0, 0.5});
    }
    SECTION("p=2 interior column is (1/4, 3/4, 3/4, 1/4)") {
        KnotVector c = uniform_open_knots(2, 6);
        KnotVector f = dyadic_refine(c);
        auto M = subdivision_matrix(c, f);
        Eigen::VectorXd col = M.col(4);
        std::vector<double> nz;
        for (int r = 0; r < col.size(); ++r)
            if (col(r) != 0.0) nz.push_back(col(r));
        REQUIRE(nz.size() == 4);
        CHECK(nz[0] == Catch::Approx(0.25));
        CHECK(nz[1] == Catch::Approx(0.75));
        CHECK(nz[2] == Catch::Approx(0.75));
        CHECK(nz[3] == Catch::Approx(0.25));
    }
    SECTION("fine == coarse gives the identity") {
        KnotVector c = uniform_open_knots(3, 5);
        auto M = subdivision_matrix(c, c);
        Eigen::MatrixXd D = Eigen::MatrixXd(M) - Eigen::MatrixXd::Identity(c.num_functions(), c.num_functions());
        REQUIRE(D.norm() < 1e-14);
    }
    SECTION("non-nested knots are rejected") {
        KnotVector c = uniform_open_knots(2, 3);
        KnotVector f = uniform_open_knots(2, 4);
        REQUIRE_THROWS_AS(subdivision_matrix(c, f), std::invalid_argument);
    }
}

TEST_CASE("subdivision commutes with evaluation", "[bspline]") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int p = 1; p <= 4; ++p) {
        KnotVector c = uniform_open_knots(p, 3);
        KnotVector f = dyadic_refine(c);
        auto M = subdivision_matrix(c, f);
        Eigen::VectorXd cc = Eigen::VectorXd::Random(c.num_functions());
        Eigen::VectorXd fc = M * cc;
        for (int trial = 0; trial < 100; ++trial) {
            double x = unif(rng);
            REQUIRE(std::abs(eval_spline_1d(c, cc, x) - eval_spline_1d(f, fc, x)) < 1e-12);
        }
        // two-level cascade
        KnotVector ff = dyadic_refine(f);
        Eigen::VectorXd ffc = subdivision_matrix(f, ff) * fc;
        for (int trial = 0; trial < 50; ++trial) {
            double x = unif(rng);
            REQUIRE(std::abs(eval_spline_1d(c, cc, x) - eval_spline_1d(ff, ffc, x)) < 1e-12);
        }
    }
}

TEST_CASE("support extension", "[bspline]") {
    SECTION("p=1, 8 elements, element 3 -> {2,3,4}") {
        TensorSpace sp = uniform_tensor_space(1, 1, 8);
        IndexBox ext = sp.support_extension(make_index(3));
        REQUIRE(ext.lo[0] == 2);
        REQUIRE(ext.hi[0] == 4);
    }
    SECTION("p=2, 8 elements, element 0 -> {0,1,2} by support enumeration") {
        TensorSpace sp = uniform_tensor_space(1, 2, 8);
        // oracle: union of supports of functions not vanishing on element 0
        long lo = 100, hi = -1;
        for (long i = 0; i < sp.num_functions(); ++i) {
            IndexBox sb = sp.function_support(make_index(i));
            if (sb.lo[0] <= 0 && 0 <= sb.hi[0]) {
                lo = std::min(lo, sb.lo[0]);
                hi = std::max(hi, sb.hi[0]);
            }
        }
        REQUIRE(lo == 0);
        REQUIRE(hi == 2);
        IndexBox ext = sp.support_extension(make_index(0));
        REQUIRE(ext.lo[0] == lo);
        REQUIRE(ext.hi[0] == hi);
    }
    SECTION("d=2, p=(2,2), interior element -> 5x5 block") {
        TensorSpace sp = uniform_tensor_space(2, 2, 8);
        IndexBox ext = sp.support_extension(make_index(4, 4));
        REQUIRE(ext.count(2) == 25);
        REQUIRE(ext.lo[0] == 2);
        REQUIRE(ext.hi[0] == 6);
    }
    SECTION("at most 2p+1 spans per direction") {
        for (int p = 1; p <= 4; ++p) {
            TensorSpace sp = uniform_tensor_space(2, p, 2 * p + 3);
            for (long e = 0; e < sp.num_elements(); ++e) {
                IndexBox ext = sp.support_extension(sp.element_index(e));
                for (int k = 0; k < 2; ++k) REQUIRE(ext.hi[k] - ext.lo[k] + 1 <= 2 * p + 1);
            }
        }
    }
}

TEST_CASE("tensor evaluation: partition of unity and gradients", "[bspline]") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    TensorSpace sp = uniform_tensor_space(2, 3, 5);
    std::vector<Index> idx;
    Eigen::MatrixXd vals;
    for (int trial = 0; trial < 200; ++trial) {
        Point x = make_point(unif(rng), unif(rng));
        sp.eval_nonzero_basis(x, 1, idx, vals);
        REQUIRE(std::abs(vals.col(0).sum() - 1.0) < 1e-12);
        REQUIRE(std::abs(vals.col(1).sum()) < 1e-10);
        REQUIRE(std::abs(vals.col(2).sum()) < 1e-10);
    }
}

TEST_CASE("dual functionals", "[bspline]") {
    SECTION("f == 1 reproduces the partition of unity coefficients") {
        TensorSpace sp = uniform_tensor_space(2, 2, 4);
        auto one = [](const Point&) { return 1.0; };
        Eigen::VectorXd lam = quasi_interpolant(sp, one);
        for (long i = 0; i < lam.size(); ++i) REQUIRE(lam(i) == Catch::Approx(1.0).margin(1e-10));
    }
    SECTION("projector on its own basis function") {
        TensorSpace sp = uniform_tensor_space(1, 3, 4);
        Index fn = make_index(3);
        auto f = [&](const Point& x) {
            double ders[3][8];
            int first = sp.knot_vector(0).eval_nonzero(x[0], 0, ders);
            int off = static_cast<int>(fn[0]) - first;
            return (off >= 0 && off <= 3) ? ders[0][off] : 0.0;
        };
        double lam = dual_functional(sp, fn, default_dual_element(sp, fn), f);
        REQUIRE(lam == Catch::Approx(1.0).margin(1e-10));
    }
    SECTION("p=2, f(x)=x gives the Greville abscissae") {
        TensorSpace sp = uniform_tensor_space(1, 2, 2);
        auto f = [](const Point& x) { return x[0]; };
        for (long i = 0; i < sp.num_functions(); ++i) {
            Index fn = make_index(i);
            double lam = dual_functional(sp, fn, default_dual_element(sp, fn), f);
            REQUIRE(lam == Catch::Approx(sp.knot_vector(0).greville(static_cast<int>(i))).margin(1e-10));
        }
    }
    SECTION("element outside the support is rejected") {
        TensorSpace sp = uniform_tensor_space(1, 2, 8);
        REQUIRE_THROWS_AS(dual_functional(sp, make_index(0), make_index(7), [](const Point&) { return 0.0; }),
                          std::invalid_argument);
    }
}

TEST_CASE("quasi-interpolant is a projector", "[bspline]") {
    SECTION("f == 0 gives the zero vector") {
        TensorSpace sp = uniform_tensor_space(2, 2, 3);
        Eigen::VectorXd lam = quasi_interpolant(sp, [](const Point&) { return 0.0; });
        REQUIRE(lam.norm() < 1e-14);
    }
    SECTION("a random spline maps to its own coefficients") {
        std::mt19937_64 rng(23);
        for (int p = 1; p <= 4; ++p) {
            TensorSpace sp = uniform_tensor_space(1, p, 6);
            Eigen::VectorXd c = Eigen::VectorXd::Random(sp.num_functions());
            auto f = [&](const Point& x) {
                double ders[3][8];
                int first = sp.knot_vector(0).eval_nonzero(x[0], 0, ders);
                double v = 0.0;
                for (int j = 0; j <= p; ++j) v += c(first + j) * ders[0][j];
                return v;
            };
            Eigen::VectorXd lam = quasi_interpolant(sp, f);
            REQUIRE((lam - c).lpNorm<Eigen::Infinity>() < 1e-10);
        }
    }
    SECTION("sin(pi x), p=3: observed L2 order >= 3.8 over 3 dyadic steps") {
        auto f = [](const Point& x) { return std::sin(M_PI * x[0]); };
        std::vector<double> errs;
        for (int n : {8, 16, 32, 64}) {
            TensorSpace sp = uniform_tensor_space(1, 3, n);
            Eigen::VectorXd lam = quasi_interpolant(sp, f, {}, 6);
            GaussRule g = gauss_legendre(8);
            double err2 = 0.0;
            for (int e = 0; e < n; ++e) {
                double lo = sp.knot_vector(0).element_lo(e), hi = sp.knot_vector(0).element_hi(e);
                for (int q = 0; q < g.order(); ++q) {
                    double x = lo + (hi - lo) * g.nodes[q];
                    double w = (hi - lo) * g.weights[q];
                    double v = eval_spline_1d(sp.knot_vector(0), lam, x);
                    err2 += w * (v - f(make_point(x))) * (v - f(make_point(x)));
                }
            }
            errs.push_back(std::sqrt(err2));
        }
        for (std::size_t i = 1; i < errs.size(); ++i) {
            double order = std::log2(errs[i - 1] / errs[i]);
            REQUIRE(order >= 3.8);
        }
    }
}
