#include "ellq/certificate.hpp"

#include "ellq/error.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <limits>

namespace ellq {

double poincare_constant(const EllipticSystem& system) {
    return system.spectral().sigma_min_G;
}

StabilityCertificate lyapunov_constants(double gamma0, std::optional<double> eta_override) {
    if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) {
        throw InvalidParameter("lyapunov_constants: gamma0 must be positive");
    }
    const double g2 = gamma0 * gamma0;
    const double eta_dissipation = 2.0 * g2 / (2.0 * g2 + 1.0);
    const double eta = eta_override.value_or(0.5 * std::min(gamma0, eta_dissipation));
    const double s_coeff = 2.0 * (1.0 - eta) - eta / g2;
    if (!(eta > 0.0 && eta < gamma0 && s_coeff > 0.0)) {
        throw InvalidParameter("lyapunov_constants: eta = " + std::to_string(eta) +
                               " violates 0 < eta < gamma0 and 2(1 - eta) - eta/gamma0^2 > 0");
    }
    StabilityCertificate cert;
    cert.gamma0 = gamma0;
    cert.eta = eta;
    cert.c0 = std::min({eta, s_coeff, 2.0});
    const double m_plus = 1.0 + eta / gamma0;
    const double m_minus = 1.0 - eta / gamma0;
    cert.c_st = cert.c0 / (2.0 * m_plus);
    cert.C_st = std::sqrt(m_plus / m_minus);
    cert.C_tail = cert.C_st / cert.c_st;
    return cert;
}

StabilityCertificate certify(const EllipticSystem& system) {
    return lyapunov_constants(poincare_constant(system));
}

namespace {

void check_decay_grid(double horizon, std::size_t samples) {
    if (!(horizon > 0.0) || samples < 2) {
        throw InvalidParameter("empirical_decay: need a positive horizon and at least two samples");
    }
    const double spacing = horizon / static_cast<double>(samples - 1);
    std::size_t fit_count = 0;
    for (std::size_t k = 0; k < samples; ++k) {
        if (static_cast<double>(k) * spacing >= 0.25 * horizon) ++fit_count;
    }
    if (fit_count < 4) {
        throw InvalidParameter("empirical_decay: fewer than four samples past the transient; extend the horizon "
                               "or add samples");
    }
}

// least squares for log norm = log C - c t over t >= transient
void fit_tail(DecayFit& fit, double transient) {
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    double count = 0.0;
    for (std::size_t k = 0; k < fit.times.size(); ++k) {
        if (fit.times[k] < transient) continue;
        const double y = std::log(fit.norms[k]);
        st += fit.times[k];
        sy += y;
        stt += fit.times[k] * fit.times[k];
        sty += fit.times[k] * y;
        count += 1.0;
    }
    const double slope = (count * sty - st * sy) / (count * stt - st * st);
    const double intercept = (sy - slope * st) / count;
    fit.c_hat = -slope;
    fit.C_hat = std::exp(intercept);
}

}  // namespace

DecayFit empirical_decay(const DenseMatrix& generator, double horizon, std::size_t samples) {
    check_decay_grid(horizon, samples);
    const double spacing = horizon / static_cast<double>(samples - 1);

    const DenseMatrix step = dense_expm(generator, spacing);
    DenseMatrix propagator = DenseMatrix::Identity(generator.rows(), generator.cols());
    DecayFit fit;
    for (std::size_t k = 0; k < samples; ++k) {
        if (k > 0) propagator = step * propagator;
        fit.times.push_back(static_cast<double>(k) * spacing);
        Eigen::BDCSVD<DenseMatrix> svd(propagator);
        fit.norms.push_back(svd.singularValues()[0]);
    }
    fit_tail(fit, 0.25 * horizon);
    return fit;
}

DecayFit empirical_decay(const EllipticSystem& system, double horizon, std::size_t samples) {
    // With G = U S V^T the generator splits into 2x2 blocks [[0, -sigma], [sigma, -1]]
    // plus s' = -s on the orthogonal complement of range(G).
    check_decay_grid(horizon, samples);
    const DenseMatrix g = system.G().to_dense();
    require_dense(static_cast<std::size_t>(g.rows()), "empirical_decay");
    const Vector sigma = Eigen::BDCSVD<DenseMatrix>(g).singularValues();
    const bool has_complement = g.rows() > g.cols();

    const double spacing = horizon / static_cast<double>(samples - 1);
    DecayFit fit;
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) * spacing;
        double norm = has_complement ? std::exp(-t) : 0.0;
        for (Eigen::Index j = 0; j < sigma.size(); ++j) {
            Eigen::Matrix2d block;
            block << 0.0, -sigma[j], sigma[j], -1.0;
            const Eigen::Matrix2d e = (t * block).exp();
            norm = std::max(norm, Eigen::JacobiSVD<Eigen::Matrix2d>(e).singularValues()[0]);
        }
        fit.times.push_back(t);
        fit.norms.push_back(norm);
    }
    fit_tail(fit, 0.25 * horizon);
    return fit;
}

double lyapunov_energy(const EllipticSystem& system, double eta, const Vector& r, const Vector& s) {
    const Vector ks = system.factorization().solve(spmv_transpose(system.G(), s));
    return r.squaredNorm() + s.squaredNorm() - 2.0 * eta * r.dot(ks);
}

MonitorReport lyapunov_monitor(const EllipticSystem& system, const StabilityCertificate& cert,
                               const std::vector<RelaxState>& states) {
    const double m_plus = 1.0 + cert.eta / cert.gamma0;
    const double m_minus = 1.0 - cert.eta / cert.gamma0;
    const auto& chol = system.factorization();

    MonitorReport report;
    if (states.empty()) return report;
    report.max_violation = -std::numeric_limits<double>::infinity();
    report.min_equivalence_margin = std::numeric_limits<double>::infinity();
    for (const auto& state : states) {
        const Vector& r = state.r;
        const Vector& s = state.s;
        // w' = M w, then dE/dt = 2<r, r'> + 2<s, s'> - 2 eta (<r', K s> + <r, K s'>)
        const Vector dr = -spmv_transpose(system.G(), s);
        const Vector ds = spmv(system.G(), r) - s;
        const Vector ks = chol.solve(spmv_transpose(system.G(), s));
        const Vector kds = chol.solve(spmv_transpose(system.G(), ds));
        const double w2 = r.squaredNorm() + s.squaredNorm();
        const double energy = w2 - 2.0 * cert.eta * r.dot(ks);
        const double derivative = 2.0 * r.dot(dr) + 2.0 * s.dot(ds) - 2.0 * cert.eta * (dr.dot(ks) + r.dot(kds));
        report.max_violation = std::max(report.max_violation, derivative + cert.c0 * w2);
        if (w2 > 0.0) {
            const double margin = std::min(energy - m_minus * w2, m_plus * w2 - energy) / w2;
            report.min_equivalence_margin = std::min(report.min_equivalence_margin, margin);
        } else {
            report.min_equivalence_margin = std::min(report.min_equivalence_margin, 0.0);
        }
        ++report.snapshots;
    }
    return report;
}

void write_certificate_header(std::ostream& out) {
    out << "n,gamma0,eta,c0,C_st,c_st,C_tail,c_hat,C_hat\n";
}

void write_certificate_row(std::ostream& out, int n, const StabilityCertificate& cert,
                           const std::optional<DecayFit>& fit) {
    const auto old = out.precision(17);
    out << n << ',' << cert.gamma0 << ',' << cert.eta << ',' << cert.c0 << ',' << cert.C_st << ',' << cert.c_st
        << ',' << cert.C_tail << ',';
    if (fit) out << fit->c_hat << ',' << fit->C_hat;
    else out << ',';
    out << '\n';
    out.precision(old);
}

}  // namespace ellq
