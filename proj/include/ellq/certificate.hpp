#pragma once

#include "ellq/fem.hpp"
#include "ellq/relaxation.hpp"

#include <optional>
#include <ostream>
#include <vector>

namespace ellq {

/// Executable constants of the Lyapunov stability argument for
/// w' = M w, M = [[0, -G^T], [G, -I]]:
///   ||e^{tM}|| <= C_st exp(-c_st t),   ||x_* - x(t)|| <= C_tail ||w(t)||.
struct StabilityCertificate {
    double gamma0 = 0.0;  ///< sigma_min(G), discrete Poincare constant
    double eta = 0.0;     ///< coupling weight of the cross term
    double c0 = 0.0;      ///< dissipation: dE/dt <= -c0 ||w||^2
    double C_st = 0.0;
    double c_st = 0.0;
    double C_tail = 0.0;  ///< C_st / c_st
};

/// sigma_min(G). Dense path only.
[[nodiscard]] double poincare_constant(const EllipticSystem& system);

/// Closed-form constants. With m± = 1 ± eta/gamma0 the functional
/// E = ||r||^2 + ||s||^2 - 2 eta <r, K s> obeys m- ||w||^2 <= E <= m+ ||w||^2
/// and dE/dt <= -(c0/m+) E, which gives c_st = c0/(2 m+), C_st = sqrt(m+/m-).
/// Default eta is half of min(gamma0, 2 gamma0^2 / (2 gamma0^2 + 1)).
/// Throws InvalidParameter when gamma0 <= 0 or eta violates
/// 0 < eta < gamma0, 2(1 - eta) - eta/gamma0^2 > 0.
[[nodiscard]] StabilityCertificate lyapunov_constants(double gamma0, std::optional<double> eta_override = {});

[[nodiscard]] StabilityCertificate certify(const EllipticSystem& system);

struct DecayFit {
    double C_hat = 0.0;
    double c_hat = 0.0;
    std::vector<double> times;
    std::vector<double> norms;  ///< ||e^{tM}||_2 at `times`
};

/// Samples ||e^{tM}|| on a uniform grid of `samples` points over [0, horizon]
/// and least-squares fits log||e^{tM}|| = log C_hat - c_hat t over the samples
/// with t >= horizon/4. Throws InvalidParameter when fewer than four samples
/// fall past that transient.
[[nodiscard]] DecayFit empirical_decay(const DenseMatrix& generator, double horizon, std::size_t samples);
/// Same fit for M built from G, evaluated exactly through the SVD of G
/// (2x2 rotation-damping blocks) instead of a dense exponential.
[[nodiscard]] DecayFit empirical_decay(const EllipticSystem& system, double horizon, std::size_t samples);

/// E(r, s) = ||r||^2 + ||s||^2 - 2 eta <r, A^{-1} G^T s>.
[[nodiscard]] double lyapunov_energy(const EllipticSystem& system, double eta, const Vector& r, const Vector& s);

struct MonitorReport {
    /// max over snapshots of dE/dt + c0 ||w||^2 (<= 0 when the decay holds).
    double max_violation = 0.0;
    /// min over snapshots of min(E - m- ||w||^2, m+ ||w||^2 - E), scaled by ||w||^2.
    double min_equivalence_margin = 0.0;
    std::size_t snapshots = 0;
};

/// Evaluates the Lyapunov inequality at stored trajectory states; dE/dt is
/// taken exactly along the flow, w' = M w.
[[nodiscard]] MonitorReport lyapunov_monitor(const EllipticSystem& system, const StabilityCertificate& cert,
                                             const std::vector<RelaxState>& states);

/// `n,gamma0,eta,c0,C_st,c_st,C_tail,c_hat,C_hat`
void write_certificate_header(std::ostream& out);
void write_certificate_row(std::ostream& out, int n, const StabilityCertificate& cert,
                           const std::optional<DecayFit>& fit);

}  // namespace ellq
