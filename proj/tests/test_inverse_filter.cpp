#include "ellq/error.hpp"
#include "ellq/experiments.hpp"
#include "ellq/inverse_filter.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace ellq;

namespace {

// sum_k c_k cos(k acos(u)), u the mapped abscissa
double cheb_sum(const InversePolynomial& p, double lambda) {
    const double u = p.hi == p.lo ? 0.0 : (2.0 * lambda - p.hi - p.lo) / (p.hi - p.lo);
    const double th = std::acos(std::clamp(u, -1.0, 1.0));
    double s = 0.0;
    for (std::size_t k = 0; k < p.coefficients.size(); ++k) s += p.coefficients[k] * std::cos(static_cast<double>(k) * th);
    return s;
}

// p(A / lambda_max) b / lambda_max through the matrix three-term recurrence
Vector matrix_poly_apply(const DenseMatrix& a, double lambda_max, const InversePolynomial& p, const Vector& b) {
    const Eigen::Index n = a.rows();
    const DenseMatrix id = DenseMatrix::Identity(n, n);
    const DenseMatrix u = (2.0 * a / lambda_max - (p.hi + p.lo) * id) / (p.hi - p.lo);
    DenseMatrix t_prev = id, t_cur = u;
    DenseMatrix acc = p.coefficients[0] * id;
    if (p.coefficients.size() > 1) acc += p.coefficients[1] * u;
    for (std::size_t k = 2; k < p.coefficients.size(); ++k) {
        const DenseMatrix t_next = 2.0 * u * t_cur - t_prev;
        acc += p.coefficients[k] * t_next;
        t_prev = t_cur;
        t_cur = t_next;
    }
    return acc * b / lambda_max;
}

}  // namespace

TEST_CASE("inverse polynomial fit") {
    for (int d : {0, 3, 9}) {
        const InversePolynomial p = inverse_poly(1.0, 1.0, d);
        CHECK(p(1.0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(p.sup_rel_error <= 1e-15);
    }

    const InversePolynomial p30 = inverse_poly(0.1, 1.0, 30);
    CHECK(p30.degree == 30);
    CHECK(p30.coefficients.size() == 31);
    CHECK(p30.sup_rel_error < 1e-3);
    // independent grid check of the reported sup error
    double worst = 0.0;
    for (int i = 0; i <= 5000; ++i) {
        const double l = 0.1 + 0.9 * i / 5000.0;
        worst = std::max(worst, std::abs(l * p30(l) - 1.0));
    }
    CHECK(worst == doctest::Approx(p30.sup_rel_error).epsilon(0.05));

    for (double l : {0.1, 0.13, 0.5, 0.77, 1.0}) CHECK(p30(l) == doctest::Approx(cheb_sum(p30, l)).epsilon(1e-12));

    double prev = inverse_poly(0.1, 1.0, 0).sup_rel_error;
    for (int d = 1; d <= 40; ++d) {
        const double e = inverse_poly(0.1, 1.0, d).sup_rel_error;
        CHECK(e <= prev * (1 + 1e-9) + 1e-14);
        prev = e;
    }

    CHECK_THROWS_AS((void)inverse_poly(0.0, 1.0, 3), InvalidParameter);
    CHECK_THROWS_AS((void)inverse_poly(-0.5, 1.0, 3), InvalidParameter);
    CHECK_THROWS_AS((void)inverse_poly(0.5, 0.2, 3), InvalidParameter);
    CHECK_THROWS_AS((void)inverse_poly(0.1, 1.0, -1), InvalidParameter);
}

TEST_CASE("worst-case degree") {
    CHECK(worst_case_degree(1.0, 1e-3) == 7);
    CHECK(worst_case_degree(100.0, 1e-3) == static_cast<int>(std::ceil(100.0 * std::log(1e5))));
    CHECK_THROWS_AS((void)worst_case_degree(0.5, 1e-3), InvalidParameter);
    CHECK_THROWS_AS((void)worst_case_degree(10.0, 0.0), InvalidParameter);
}

TEST_CASE("filter on the identity") {
    const SpectralBasis basis = spectral_basis(DenseMatrix::Identity(6, 6));
    CHECK(basis.kappa() == doctest::Approx(1.0));
    const Vector b = Vector::LinSpaced(6, 1.0, 6.0);
    const FilterResult r = apply_filter(basis, b, inverse_poly(1.0, 1.0, 0), b);
    CHECK((r.x - b).norm() <= 1e-14 * b.norm());
    CHECK(r.state_error <= 1e-15);

    const DegreeSweep s = degree_sweep(basis, {{"flat", b, b}}, 1e-3, 4);
    REQUIRE(s.curves.size() == 1);
    CHECK(s.curves[0].crossing_degree == 0);
    CHECK(s.kappa_eff == doctest::Approx(1.0));
}

TEST_CASE("filter refuses spectra outside the interval") {
    DenseMatrix a = DenseMatrix::Zero(3, 3);
    a.diagonal() << 0.01, 0.5, 1.0;
    const SpectralBasis basis = spectral_basis(a);
    const Vector b = Vector::Ones(3);
    CHECK_THROWS_AS((void)apply_filter(basis, b, inverse_poly(0.1, 1.0, 5), b), InvalidParameter);
    CHECK_THROWS_AS((void)apply_filter(basis, Vector::Ones(4), inverse_poly(0.01, 1.0, 5), b), DimensionMismatch);
    DenseMatrix singular = a;
    singular(0, 0) = 0.0;
    CHECK_THROWS_AS((void)spectral_basis(singular), FactorizationError);
}

TEST_CASE("emulator matches the matrix polynomial") {
    const EllipticSystem sys = case_systems(4, {"II"}).front();
    const SpectralBasis basis = spectral_basis(sys);
    const DenseMatrix g = sys.G().to_dense();
    const DenseMatrix a = g.transpose() * g;
    CHECK(basis.lambda_max() == doctest::Approx(sys.spectral().lambda_max_A).epsilon(1e-12));
    CHECK(basis.kappa() == doctest::Approx(sys.spectral().kappa_A).epsilon(1e-10));
    const Vector xs = direct_solve(sys, sys.b());
    const double lo = 1.0 / basis.kappa();
    for (int d = 0; d <= 12; ++d) {
        const InversePolynomial p = inverse_poly(lo, 1.0, d);
        const FilterResult r = apply_filter(basis, sys.b(), p, xs);
        const Vector want = matrix_poly_apply(a, basis.lambda_max(), p, sys.b());
        CHECK((r.x - want).norm() <= 1e-10 * want.norm());
        CHECK(r.state_error == doctest::Approx((r.x / r.x.norm() - xs / xs.norm()).norm()).epsilon(1e-12));
    }
    // high degree reaches the rounding floor
    const FilterResult hi = apply_filter(basis, sys.b(), inverse_poly(lo, 1.0, 120), xs);
    CHECK(hi.state_error <= 1e-10);
}

TEST_CASE("degree sweep orders the cases") {
    const std::vector<std::string> labels = {"I", "II", "III", "IV"};
    const auto systems = case_systems(8, labels);
    const SpectralBasis basis = spectral_basis(systems[0]);
    std::vector<SweepCase> cases;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        cases.push_back({labels[i], systems[i].b(), direct_solve(systems[i], systems[i].b())});
    }
    const DegreeSweep s = degree_sweep(basis, cases, 1e-3);
    CHECK(s.d_wc == worst_case_degree(basis.kappa(), 1e-3));
    REQUIRE(s.curves.size() == 4);
    for (const auto& c : s.curves) {
        CHECK(c.state_error.size() == static_cast<std::size_t>(s.d_wc) + 1);
        REQUIRE(c.crossing_degree.has_value());
        CHECK(*c.crossing_degree <= s.d_wc);
        CHECK(c.state_error[static_cast<std::size_t>(*c.crossing_degree)] <= 1e-3);
        if (*c.crossing_degree > 0) CHECK(c.state_error[static_cast<std::size_t>(*c.crossing_degree) - 1] > 1e-3);
    }
    // per-vector curves oscillate; the envelope ||u/|u| - v/|v||| <= 2 |u - v|/|v| <= 2 sup|lambda p - 1| does not
    const double lo = 1.0 / basis.kappa();
    for (int d = 0; d <= s.d_wc; d += 7) {
        const double sup = inverse_poly(lo, 1.0, d).sup_rel_error;
        for (const auto& c : s.curves) CHECK(c.state_error[static_cast<std::size_t>(d)] <= 2.0 * sup * 1.01 + 1e-13);
    }
    CHECK(*s.curves[0].crossing_degree <= *s.curves[1].crossing_degree);
    CHECK(*s.curves[1].crossing_degree <= *s.curves[2].crossing_degree);
    // before case I crosses, its error is no larger than case III's
    for (int d = 0; d < *s.curves[0].crossing_degree; ++d) {
        CHECK(s.curves[0].state_error[static_cast<std::size_t>(d)] <= s.curves[2].state_error[static_cast<std::size_t>(d)]);
    }

    // the sweep agrees with apply_filter degree by degree
    for (int d : {0, 5, 17}) {
        const FilterResult r = apply_filter(basis, cases[2].b, inverse_poly(1.0 / basis.kappa(), 1.0, d), cases[2].reference);
        CHECK(r.state_error == doctest::Approx(s.curves[2].state_error[static_cast<std::size_t>(d)]).epsilon(1e-8));
    }

    std::ostringstream sweep_csv, summary_csv;
    write_degree_sweep_csv(sweep_csv, s);
    write_degree_summary_csv(summary_csv, s);
    CHECK(sweep_csv.str().rfind("case,degree,state_err\nI,0,", 0) == 0);
    CHECK(summary_csv.str().rfind("case,crossing_degree,d_wc\nI," + std::to_string(*s.curves[0].crossing_degree) + "," +
                                      std::to_string(s.d_wc) + "\n",
                                  0) == 0);
}
