#include "ellq/inverse_filter.hpp"

#include "ellq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ellq {

double InversePolynomial::operator()(double lambda) const {
    if (hi == lo) return coefficients.empty() ? 0.0 : coefficients[0];
    const double u = (2.0 * lambda - (hi + lo)) / (hi - lo);
    // Clenshaw recurrence
    double b1 = 0.0;
    double b2 = 0.0;
    for (auto k = static_cast<std::ptrdiff_t>(coefficients.size()) - 1; k >= 1; --k) {
        const double b0 = 2.0 * u * b1 - b2 + coefficients[static_cast<std::size_t>(k)];
        b2 = b1;
        b1 = b0;
    }
    return u * b1 - b2 + coefficients[0];
}

namespace {

// Chebyshev points of the first kind are discretely orthogonal for
// T_0..T_{M-1}, so the least-squares fit is a truncated cosine transform.
InversePolynomial fit_inverse(double lo, double hi, int degree) {
    if (!(lo > 0.0)) throw InvalidParameter("inverse_poly: interval must satisfy 0 < lo");
    if (!(lo <= hi)) throw InvalidParameter("inverse_poly: interval must satisfy lo <= hi");
    if (degree < 0) throw InvalidParameter("inverse_poly: degree must be non-negative");

    InversePolynomial p;
    p.degree = degree;
    p.lo = lo;
    p.hi = hi;
    const auto terms = static_cast<std::size_t>(degree) + 1;
    p.coefficients.assign(terms, 0.0);
    if (lo == hi) {
        p.coefficients[0] = 1.0 / lo;
        return p;
    }
    const std::size_t points = 4 * terms;
    const double mid = 0.5 * (hi + lo);
    const double half = 0.5 * (hi - lo);
    for (std::size_t j = 0; j < points; ++j) {
        const double u = std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(points));
        const double f = 1.0 / (mid + half * u);
        // T_k(u) by the three-term recurrence
        double t_prev = 1.0;
        double t_cur = u;
        p.coefficients[0] += f;
        for (std::size_t k = 1; k < terms; ++k) {
            p.coefficients[k] += f * t_cur;
            const double t_next = 2.0 * u * t_cur - t_prev;
            t_prev = t_cur;
            t_cur = t_next;
        }
    }
    for (std::size_t k = 0; k < terms; ++k) {
        p.coefficients[k] *= (k == 0 ? 1.0 : 2.0) / static_cast<double>(points);
    }
    return p;
}

}  // namespace

InversePolynomial inverse_poly(double lo, double hi, int degree) {
    InversePolynomial p = fit_inverse(lo, hi, degree);
    constexpr int kGrid = 4000;
    double worst = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
        const double lambda = lo + (hi - lo) * static_cast<double>(i) / kGrid;
        worst = std::max(worst, std::abs(lambda * p(lambda) - 1.0));
    }
    p.sup_rel_error = worst;
    return p;
}

SpectralBasis spectral_basis(const DenseMatrix& a) {
    auto eig = dense_eig_sym(a);
    if (!(eig.values[0] > 0.0)) throw FactorizationError("spectral_basis: matrix is not positive definite");
    return {std::move(eig.values), std::move(eig.vectors)};
}

SpectralBasis spectral_basis(const EllipticSystem& system) {
    const DenseMatrix g = system.G().to_dense();
    DenseMatrix a = g.transpose() * g;
    a = 0.5 * (a + a.transpose()).eval();
    return spectral_basis(a);
}

FilterResult apply_filter(const SpectralBasis& basis, const Vector& b, const InversePolynomial& poly,
                          const Vector& reference) {
    if (b.size() != basis.eigenvalues.size() || reference.size() != b.size()) {
        throw DimensionMismatch("apply_filter: vector length does not match the spectral basis");
    }
    const double lmax = basis.lambda_max();
    const double tol = 1e-12;
    const Vector coeffs = basis.eigenvectors.transpose() * b;
    Vector filtered(coeffs.size());
    for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
        const double mu = basis.eigenvalues[j] / lmax;
        if (mu < poly.lo * (1.0 - tol) || mu > poly.hi * (1.0 + tol)) {
            throw InvalidParameter("apply_filter: normalized eigenvalue " + std::to_string(mu) +
                                   " lies outside the polynomial interval");
        }
        filtered[j] = poly(mu) * coeffs[j] / lmax;
    }
    FilterResult result;
    result.x = basis.eigenvectors * filtered;
    const double nx = result.x.norm();
    const double nr = reference.norm();
    if (nx == 0.0 || nr == 0.0) throw InvalidParameter("apply_filter: zero filtered or reference vector");
    result.state_error = (result.x / nx - reference / nr).norm();
    return result;
}

int worst_case_degree(double kappa, double epsilon) {
    if (!(kappa >= 1.0) || !(epsilon > 0.0)) throw InvalidParameter("worst_case_degree: need kappa >= 1, eps > 0");
    return static_cast<int>(std::ceil(kappa * std::log(kappa / epsilon)));
}

DegreeSweep degree_sweep(const SpectralBasis& basis, const std::vector<SweepCase>& cases, double epsilon,
                         std::optional<int> max_degree) {
    DegreeSweep sweep;
    sweep.kappa_eff = basis.kappa();
    sweep.d_wc = worst_case_degree(sweep.kappa_eff, epsilon);
    const int top = max_degree.value_or(sweep.d_wc);
    const double lo = basis.lambda_min() / basis.lambda_max();

    for (const auto& c : cases) sweep.curves.push_back({c.label, {}, std::nullopt});
    if (cases.empty()) return sweep;
    for (int d = 0; d <= top; ++d) {
        // sup error is not needed here, skip the dense grid
        const InversePolynomial poly = fit_inverse(lo, 1.0, d);
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const double err = apply_filter(basis, cases[i].b, poly, cases[i].reference).state_error;
            auto& curve = sweep.curves[i];
            curve.state_error.push_back(err);
            if (!curve.crossing_degree && err <= epsilon) curve.crossing_degree = d;
        }
    }
    return sweep;
}

void write_degree_sweep_csv(std::ostream& out, const DegreeSweep& sweep) {
    const auto old = out.precision(17);
    out << "case,degree,state_err\n";
    for (const auto& c : sweep.curves) {
        for (std::size_t d = 0; d < c.state_error.size(); ++d) out << c.label << ',' << d << ',' << c.state_error[d] << '\n';
    }
    out.precision(old);
}

void write_degree_summary_csv(std::ostream& out, const DegreeSweep& sweep) {
    out << "case,crossing_degree,d_wc\n";
    for (const auto& c : sweep.curves) {
        out << c.label << ',';
        if (c.crossing_degree) out << *c.crossing_degree;
        out << ',' << sweep.d_wc << '\n';
    }
}

}  // namespace ellq
