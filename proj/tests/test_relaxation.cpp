#include "ellq/error.hpp"
#include "ellq/experiments.hpp"
#include "ellq/relaxation.hpp"

#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace ellq;

namespace {

EllipticSystem poisson(int n, const std::string& label = "III") { return case_systems(n, {label}).front(); }

// L = [[0, I, 0], [0, 0, -G^T], [0, G, -I]] built straight from the dense factor
DenseMatrix oracle_generator(const EllipticSystem& sys) {
    const DenseMatrix g = sys.G().to_dense();
    const Eigen::Index n = g.cols(), m = g.rows();
    DenseMatrix l = DenseMatrix::Zero(2 * n + m, 2 * n + m);
    l.block(0, n, n, n).setIdentity();
    l.block(n, 2 * n, n, m) = -g.transpose();
    l.block(2 * n, n, m, n) = g;
    l.block(2 * n, 2 * n, m, m) = -DenseMatrix::Identity(m, m);
    return l;
}

Vector stacked(const RelaxState& z) {
    Vector v(z.x.size() + z.r.size() + z.s.size());
    v << z.x, z.r, z.s;
    return v;
}

RelaxState random_state(const EllipticSystem& sys, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    RelaxState z;
    z.x = Vector::NullaryExpr(static_cast<Eigen::Index>(sys.n_dof()), [&] { return g(rng); });
    z.r = Vector::NullaryExpr(static_cast<Eigen::Index>(sys.n_dof()), [&] { return g(rng); });
    z.s = Vector::NullaryExpr(static_cast<Eigen::Index>(sys.n_flux()), [&] { return g(rng); });
    return z;
}

}  // namespace

TEST_CASE("cold start") {
    const EllipticSystem sys = poisson(4);
    const RelaxState z = init_cold(sys);
    CHECK(z.t == 0.0);
    CHECK(z.x.norm() == 0.0);
    CHECK(z.s.norm() == 0.0);
    CHECK(residual_probability(z) == 1.0);
    CHECK(solution_block_weight(z) == 0.0);
    CHECK(z.norm_w() == doctest::Approx(sys.b().norm()).epsilon(1e-15));
    CHECK(linear_invariant(sys, z).norm() == 0.0);
    CHECK((algebraic_residual(sys, z) - sys.b()).norm() == 0.0);
    CHECK(recover_flux(sys, z).norm() == 0.0);
}

TEST_CASE("warm start") {
    const EllipticSystem sys = poisson(4);
    const Vector xs = direct_solve(sys, sys.b());

    const RelaxState fixed = init_warm(sys, xs, spmv(sys.G(), xs));
    CHECK(fixed.norm_w() <= 1e-12 * sys.b().norm());
    const RelaxState later = evolve(sys, fixed, 5.0);
    CHECK((later.x - xs).norm() <= 1e-11 * xs.norm());
    CHECK((recover_flux(sys, later) - spmv(sys.G(), xs)).norm() <= 1e-10 * xs.norm());

    const RelaxState zero = init_warm(sys, Vector::Zero(xs.size()), Vector::Zero(static_cast<Eigen::Index>(sys.n_flux())));
    const RelaxState cold = init_cold(sys);
    CHECK((stacked(zero) - stacked(cold)).norm() == 0.0);

    const Vector x0 = 0.9 * xs;
    const RelaxState near = init_warm(sys, x0, spmv(sys.G(), x0));
    CHECK(near.norm_w() == doctest::Approx(0.1 * sys.b().norm()).epsilon(1e-10));
    CHECK(linear_invariant(sys, near).norm() <= 1e-12 * sys.b().norm());

    CHECK_THROWS_AS((void)init_warm(sys, Vector::Zero(3), Vector::Zero(static_cast<Eigen::Index>(sys.n_flux()))),
                    DimensionMismatch);
}

TEST_CASE("generator application") {
    const EllipticSystem sys = poisson(4);
    const RelaxState cold = init_cold(sys);
    const StateDerivative d = apply_generator(sys, cold);
    CHECK((d.dx - sys.b()).norm() == 0.0);
    CHECK(d.dr.norm() == 0.0);
    CHECK((d.ds - spmv(sys.G(), sys.b())).norm() <= 1e-14 * d.ds.norm());

    RelaxState zero = cold;
    zero.x.setZero();
    zero.r.setZero();
    const StateDerivative dz = apply_generator(sys, zero);
    CHECK(dz.dx.norm() + dz.dr.norm() + dz.ds.norm() == 0.0);

    const DenseMatrix l = oracle_generator(sys);
    for (unsigned seed : {1u, 2u, 3u}) {
        const RelaxState z = random_state(sys, seed);
        const StateDerivative dd = apply_generator(sys, z);
        Vector got(l.rows());
        got << dd.dx, dd.dr, dd.ds;
        const Vector want = l * stacked(z);
        CHECK((got - want).norm() <= 1e-13 * want.norm());
    }
    CHECK((dense_joint_generator(sys) - l).norm() == 0.0);
}

TEST_CASE("evolve against the dense exponential") {
    const EllipticSystem sys = poisson(4);
    const RelaxState z0 = init_cold(sys);
    const DenseMatrix l = oracle_generator(sys);
    const Vector exact = (10.0 * l).exp() * stacked(z0);

    const RelaxState same = evolve(sys, z0, 0.0);
    CHECK((stacked(same) - stacked(z0)).norm() == 0.0);

    EvolveOptions coarse;
    coarse.theta = 0.4;
    EvolveOptions fine;
    fine.theta = 0.2;
    const double e_coarse = (stacked(evolve(sys, z0, 10.0, coarse)) - exact).norm() / exact.norm();
    const double e_fine = (stacked(evolve(sys, z0, 10.0, fine)) - exact).norm() / exact.norm();
    // fourth order: halving the step cuts the error by about 16
    CHECK(e_coarse / e_fine > 12.0);
    CHECK(e_coarse / e_fine < 20.0);

    // default step: error follows the theta^4 extrapolation from theta = 0.2
    const RelaxState end = evolve(sys, z0, 10.0);
    CHECK(end.t == 10.0);
    const double predicted = e_fine * std::pow(kDefaultTheta / 0.2, 4);
    CHECK((stacked(end) - exact).norm() / exact.norm() == doctest::Approx(predicted).epsilon(0.1));
    CHECK(predicted < 1e-6);
}

TEST_CASE("evolve lands on T and keeps the invariant") {
    const EllipticSystem sys = poisson(4, "IV");
    EvolveOptions opt;
    opt.sample_stride = 7;
    opt.reference = direct_solve(sys, sys.b());
    double worst = 0.0;
    opt.on_step = [&](const RelaxState& z) { worst = std::max(worst, linear_invariant(sys, z).norm()); };
    Trajectory traj;
    const double T = 3.3 * step_size(sys, opt.theta) + 1.0;
    const RelaxState end = evolve(sys, init_cold(sys), T, opt, &traj);
    CHECK(end.t == T);
    CHECK(worst <= 1e-12 * sys.b().norm());
    REQUIRE(traj.samples.size() >= 2);
    CHECK(traj.samples.front().t == 0.0);
    CHECK(traj.samples.back().t == T);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) CHECK(traj.samples[i].t > traj.samples[i - 1].t);
    for (const auto& s : traj.samples) CHECK(s.rel_err.has_value());

    // algebraic residual equals b - A x along the trajectory
    const Vector ax = spmv_transpose(sys.G(), spmv(sys.G(), end.x));
    CHECK((algebraic_residual(sys, end) - (sys.b() - ax)).norm() <= 1e-11 * sys.b().norm());
}

TEST_CASE("evolve argument checks") {
    const EllipticSystem sys = poisson(4);
    RelaxState z = init_cold(sys);
    z.t = 2.0;
    CHECK_THROWS_AS((void)evolve(sys, z, 1.0), InvalidParameter);
    EvolveOptions bad;
    bad.theta = 0.0;
    CHECK_THROWS_AS((void)evolve(sys, init_cold(sys), 1.0, bad), InvalidParameter);
    bad.theta = 1.5;
    CHECK_THROWS_AS((void)evolve(sys, init_cold(sys), 1.0, bad), InvalidParameter);

    RelaxState nan = init_cold(sys);
    nan.r[0] = std::numeric_limits<double>::quiet_NaN();
    try {
        (void)evolve(sys, nan, 1.0);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(std::string(e.what()).find("step 1") != std::string::npos);
    }
}

TEST_CASE("residual probability") {
    const EllipticSystem sys = poisson(4);
    RelaxState z = init_cold(sys);
    z.r.setZero();
    z.x.setZero();
    CHECK_THROWS_AS((void)residual_probability(z), InvalidParameter);
    CHECK_THROWS_AS((void)solution_block_weight(z), InvalidParameter);
    z.x[0] = 1.0;
    CHECK(residual_probability(z) == 0.0);
    z.s[3] = 1.0;
    CHECK(residual_probability(z) == doctest::Approx(0.5));
    const RelaxState q = random_state(sys, 9);
    CHECK(residual_probability(q) + solution_block_weight(q) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("residual decays at the certified rate") {
    const EllipticSystem sys = poisson(8, "III");
    const StabilityCertificate cert = certify(sys);
    EvolveOptions opt;
    opt.sample_stride = 20;
    Trajectory traj;
    (void)evolve(sys, init_cold(sys), 30.0, opt, &traj);
    const double w0 = traj.samples.front().norm_w;
    for (const auto& s : traj.samples) CHECK(s.norm_w <= cert.C_st * std::exp(-cert.c_st * s.t) * w0 * (1 + 1e-12));
    // flux recovery: b - G^T q shrinks with w
    const RelaxState end = evolve(sys, init_cold(sys), 30.0);
    const Vector q = recover_flux(sys, end);
    CHECK((sys.b() - spmv_transpose(sys.G(), q)).norm() <= 1e-5 * sys.b().norm());
}

TEST_CASE("generator norms") {
    const EllipticSystem sys = poisson(4);
    const GeneratorNorms g = generator_norms(sys);
    CHECK(g.hermitian == doctest::Approx(sys.spectral().norm_G).epsilon(1e-12));
    CHECK(g.damping == 1.0);
    CHECK(g.joint_bound >= 1.0 + sys.spectral().norm_G);
    CHECK(step_size(sys, 0.5) == doctest::Approx(0.5 / (1.0 + sys.spectral().norm_G)));
}

TEST_CASE("trajectory csv") {
    const EllipticSystem sys = poisson(4);
    Trajectory traj;
    (void)evolve(sys, init_cold(sys), 0.0, {}, &traj);
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    std::istringstream in(out.str());
    std::string header, row, extra;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "t,norm_x,norm_w,p_res,norm_rA,rel_err");
    CHECK(row.substr(0, 2) == "0,");
    CHECK(row.back() == ',');  // no reference, empty rel_err
    CHECK(!std::getline(in, extra));
}
