#pragma once

#include "ellq/dense.hpp"
#include "ellq/fem.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ellq {

/// Polynomial approximation of 1/lambda on [lo, hi] in the Chebyshev basis
/// of the affinely mapped interval.
struct InversePolynomial {
    int degree = 0;
    double lo = 1.0;
    double hi = 1.0;
    std::vector<double> coefficients;
    /// max |lambda p(lambda) - 1| on a dense grid of the interval.
    double sup_rel_error = 0.0;

    [[nodiscard]] double operator()(double lambda) const;
};

/// Discrete least-squares fit on 4(degree+1) Chebyshev points of [lo, hi].
/// Throws InvalidParameter when lo <= 0, lo > hi or degree < 0.
[[nodiscard]] InversePolynomial inverse_poly(double lo, double hi, int degree);

/// Eigen-decomposition of A = G^T G, spectrum normalized by lambda_max.
struct SpectralBasis {
    Vector eigenvalues;  ///< ascending, unnormalized
    DenseMatrix eigenvectors;
    [[nodiscard]] double lambda_min() const { return eigenvalues[0]; }
    [[nodiscard]] double lambda_max() const { return eigenvalues[eigenvalues.size() - 1]; }
    [[nodiscard]] double kappa() const { return lambda_max() / lambda_min(); }
};

[[nodiscard]] SpectralBasis spectral_basis(const EllipticSystem& system);
[[nodiscard]] SpectralBasis spectral_basis(const DenseMatrix& a);

struct FilterResult {
    Vector x;
    double state_error = 0.0;  ///< || x/||x|| - x_ref/||x_ref|| ||
};

/// x = sum_j p(lambda_j / lambda_max) <v_j, b> v_j / lambda_max. Throws
/// InvalidParameter when the normalized spectrum leaves the polynomial's interval.
[[nodiscard]] FilterResult apply_filter(const SpectralBasis& basis, const Vector& b, const InversePolynomial& poly,
                                        const Vector& reference);

/// ceil(kappa ln(kappa / eps)), the conservative degree line.
[[nodiscard]] int worst_case_degree(double kappa, double epsilon);

struct SweepCase {
    std::string label;
    Vector b;
    Vector reference;
};

struct DegreeSweepCurve {
    std::string label;
    std::vector<double> state_error;  ///< indexed by degree
    std::optional<int> crossing_degree;
};

struct DegreeSweep {
    std::vector<DegreeSweepCurve> curves;
    int d_wc = 0;
    double kappa_eff = 0.0;
};

/// Sweeps degrees 0..max_degree (defaults to the worst-case degree) on the
/// interval [1/kappa_eff, 1]. Crossing = smallest degree with error <= eps.
[[nodiscard]] DegreeSweep degree_sweep(const SpectralBasis& basis, const std::vector<SweepCase>& cases,
                                       double epsilon, std::optional<int> max_degree = {});

/// `case,degree,state_err`
void write_degree_sweep_csv(std::ostream& out, const DegreeSweep& sweep);
/// `case,crossing_degree,d_wc`
void write_degree_summary_csv(std::ostream& out, const DegreeSweep& sweep);

}  // namespace ellq
