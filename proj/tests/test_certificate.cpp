#include "ellq/certificate.hpp"
#include "ellq/error.hpp"
#include "ellq/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace ellq;

namespace {

EllipticSystem poisson(int n, const std::string& label = "I") { return case_systems(n, {label}).front(); }

Vector gaussian(Eigen::Index n, std::mt19937& rng) {
    std::normal_distribution<double> g;
    return Vector::NullaryExpr(n, [&] { return g(rng); });
}

}  // namespace

TEST_CASE("Poincare constant") {
    CHECK(poincare_constant(poisson(2)) == doctest::Approx(4.0).epsilon(1e-12));
    const double g8 = poincare_constant(poisson(8)), g16 = poincare_constant(poisson(16));
    CHECK(std::abs(g8 - g16) / g16 < 0.10);
    const EllipticSystem eye(SparseMatrix::identity(5), Vector::Ones(5), Vector::Ones(5));
    CHECK(poincare_constant(eye) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("closed-form constants") {
    const StabilityCertificate c = lyapunov_constants(1.0, 0.5);
    CHECK(c.c0 == doctest::Approx(0.5));
    CHECK(c.C_st == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(c.c_st == doctest::Approx(0.5 / 3.0).epsilon(1e-14));
    CHECK(c.C_tail == c.C_st / c.c_st);

    // default eta: half of min(gamma0, 2 gamma0^2 / (2 gamma0^2 + 1))
    CHECK(lyapunov_constants(1.0).eta == doctest::Approx(1.0 / 3.0));
    CHECK(lyapunov_constants(0.1).eta == doctest::Approx(0.5 * 0.02 / 1.02));
    CHECK(lyapunov_constants(10.0).eta == doctest::Approx(0.5 * 200.0 / 201.0));

    for (double g : {0.05, 0.3, 1.0, 4.4, 40.0}) {
        const StabilityCertificate d = lyapunov_constants(g);
        CHECK(d.eta > 0.0);
        CHECK(d.eta < g);
        CHECK(2.0 * (1.0 - d.eta) - d.eta / (g * g) > 0.0);
        CHECK(d.C_st >= 1.0);
        CHECK(d.c_st > 0.0);
    }

    const StabilityCertificate tiny = lyapunov_constants(1.0, 1e-12);
    CHECK(tiny.C_st == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(tiny.c_st > 0.0);
    CHECK(tiny.c_st < 1e-11);
    CHECK(std::isfinite(tiny.C_tail));

    CHECK_THROWS_AS((void)lyapunov_constants(1.0, 0.9), InvalidParameter);  // 2(1 - eta) - eta < 0
    CHECK_THROWS_AS((void)lyapunov_constants(0.5, 0.5), InvalidParameter);  // eta = gamma0
    CHECK_THROWS_AS((void)lyapunov_constants(1.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS((void)lyapunov_constants(0.0), InvalidParameter);
    CHECK_THROWS_AS((void)lyapunov_constants(-1.0), InvalidParameter);
}

TEST_CASE("empirical decay fit") {
    const DenseMatrix minus_id = -DenseMatrix::Identity(4, 4);
    const DecayFit f = empirical_decay(minus_id, 8.0, 33);
    CHECK(f.c_hat == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(f.C_hat == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(f.times.size() == 33);
    CHECK_THROWS_AS((void)empirical_decay(minus_id, 8.0, 4), InvalidParameter);

    const EllipticSystem sys = poisson(8);
    const StabilityCertificate cert = certify(sys);
    const DecayFit a = empirical_decay(sys, 30.0, 121);
    const DecayFit b = empirical_decay(sys, 60.0, 241);
    CHECK(a.c_hat >= cert.c_st);
    CHECK(std::abs(a.c_hat - b.c_hat) / a.c_hat < 0.05);
    // the certified envelope holds at every sampled time
    for (std::size_t i = 0; i < b.times.size(); ++i) {
        CHECK(b.norms[i] <= cert.C_st * std::exp(-cert.c_st * b.times[i]) * (1 + 1e-10));
    }
}

TEST_CASE("exact semigroup path matches the dense exponential") {
    const EllipticSystem sys = poisson(4);
    const DecayFit dense = empirical_decay(dense_residual_generator(sys), 12.0, 25);
    const DecayFit blocks = empirical_decay(sys, 12.0, 25);
    for (std::size_t i = 0; i < dense.norms.size(); ++i) {
        CHECK(blocks.norms[i] == doctest::Approx(dense.norms[i]).epsilon(1e-9));
    }
    CHECK(blocks.c_hat == doctest::Approx(dense.c_hat).epsilon(1e-8));
}

TEST_CASE("Lyapunov energy and monitor") {
    const EllipticSystem sys = poisson(8);
    const StabilityCertificate cert = certify(sys);
    const Eigen::Index n = static_cast<Eigen::Index>(sys.n_dof()), m = static_cast<Eigen::Index>(sys.n_flux());

    CHECK(lyapunov_energy(sys, cert.eta, Vector::Zero(n), Vector::Zero(m)) == 0.0);

    // K = A^{-1} G^T from a dense LU, independent of the Cholesky path
    const DenseMatrix g = sys.G().to_dense();
    const DenseMatrix k = (g.transpose() * g).partialPivLu().solve(g.transpose());
    const double mp = 1.0 + cert.eta / cert.gamma0, mm = 1.0 - cert.eta / cert.gamma0;
    std::mt19937 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const Vector r = gaussian(n, rng), s = gaussian(m, rng);
        const double e = lyapunov_energy(sys, cert.eta, r, s);
        const double oracle = r.squaredNorm() + s.squaredNorm() - 2.0 * cert.eta * r.dot(k * s);
        CHECK(e == doctest::Approx(oracle).epsilon(1e-12));
        const double w2 = r.squaredNorm() + s.squaredNorm();
        CHECK(e >= mm * w2 * (1 - 1e-12));
        CHECK(e <= mp * w2 * (1 + 1e-12));
    }

    RelaxState rest = init_cold(sys);
    rest.r.setZero();
    const MonitorReport at_rest = lyapunov_monitor(sys, cert, {rest});
    CHECK(at_rest.snapshots == 1);
    CHECK(at_rest.max_violation == 0.0);

    CHECK(lyapunov_monitor(sys, cert, {}).snapshots == 0);

    EvolveOptions opt;
    opt.keep_states = true;
    opt.sample_stride = 25;
    Trajectory traj;
    (void)evolve(sys, init_cold(sys), 20.0, opt, &traj);
    const MonitorReport rep = lyapunov_monitor(sys, cert, traj.states);
    CHECK(rep.snapshots == traj.states.size());
    CHECK(rep.max_violation <= 1e-12 * sys.b().squaredNorm());
    CHECK(rep.min_equivalence_margin >= 0.0);

    // second-order one-sided difference at dt_monitor = 1e-3 stays within 1e-6 of the inequality
    const RelaxState& mid = traj.states[traj.states.size() / 2];
    const double h = 1e-3;
    EvolveOptions small;
    small.theta = 0.01;
    const RelaxState z1 = evolve(sys, mid, mid.t + h, small);
    const RelaxState z2 = evolve(sys, z1, mid.t + 2 * h, small);
    const double e0 = lyapunov_energy(sys, cert.eta, mid.r, mid.s);
    const double e1 = lyapunov_energy(sys, cert.eta, z1.r, z1.s);
    const double e2 = lyapunov_energy(sys, cert.eta, z2.r, z2.s);
    const double de = (-3.0 * e0 + 4.0 * e1 - e2) / (2.0 * h);
    CHECK(de + cert.c0 * mid.norm_w() * mid.norm_w() <= 1e-6 * sys.b().squaredNorm());
}

TEST_CASE("certificate is mesh independent") {
    const double c4 = certify(poisson(4)).c_st, c8 = certify(poisson(8)).c_st, c16 = certify(poisson(16)).c_st;
    const double lo = std::min({c4, c8, c16}), hi = std::max({c4, c8, c16});
    CHECK((hi - lo) / lo < 0.15);
}

TEST_CASE("certificate csv") {
    std::ostringstream out;
    write_certificate_header(out);
    const StabilityCertificate c = lyapunov_constants(1.0, 0.5);
    write_certificate_row(out, 4, c, std::nullopt);
    std::istringstream in(out.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "n,gamma0,eta,c0,C_st,c_st,C_tail,c_hat,C_hat");
    CHECK(row.rfind("4,1,0.5,0.5,", 0) == 0);
    CHECK(row.substr(row.size() - 2) == ",,");
}
