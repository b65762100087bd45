#include "ellq/relaxation.hpp"

#include "ellq/error.hpp"

#include <cmath>
#include <iomanip>
#include <string>

namespace ellq {

namespace {

void check_state(const EllipticSystem& system, const RelaxState& state) {
    const auto n = static_cast<Eigen::Index>(system.n_dof());
    const auto m = static_cast<Eigen::Index>(system.n_flux());
    if (state.x.size() != n || state.r.size() != n || state.s.size() != m) {
        throw DimensionMismatch("relaxation state does not match the system dimensions");
    }
}

// Largest singular value of G: exact on the dense path, power iteration otherwise.
double norm_of_g(const EllipticSystem& system) {
    if (system.n_dof() <= dense_ceiling()) return system.spectral().norm_G;
    Vector v = Vector::Ones(static_cast<Eigen::Index>(system.n_dof())).normalized();
    Vector gv;
    Vector gtgv;
    double estimate = 0.0;
    for (int it = 0; it < 200; ++it) {
        system.G().multiply(v, gv);
        system.G().multiply_transpose(gv, gtgv);
        estimate = std::sqrt(gtgv.norm());
        v = gtgv.normalized();
    }
    return 1.05 * estimate;
}

// Workspace for allocation-free RK4 stages.
struct Stage {
    Vector x, r, s;
};

void apply_into(const SparseMatrix& g, const Vector& r, const Vector& s, Stage& out, Vector& tmp) {
    out.x = r;
    g.multiply_transpose(s, tmp);
    out.r = -tmp;
    g.multiply(r, out.s);
    out.s -= s;
}

}  // namespace

RelaxState init_cold(const EllipticSystem& system) {
    RelaxState state;
    state.x = Vector::Zero(static_cast<Eigen::Index>(system.n_dof()));
    state.r = system.b();
    state.s = Vector::Zero(static_cast<Eigen::Index>(system.n_flux()));
    return state;
}

RelaxState init_warm(const EllipticSystem& system, const Vector& x0, const Vector& q0) {
    if (static_cast<std::size_t>(x0.size()) != system.n_dof() ||
        static_cast<std::size_t>(q0.size()) != system.n_flux()) {
        throw DimensionMismatch("init_warm: x0 must have n_dof entries and q0 n_flux entries");
    }
    RelaxState state;
    state.x = x0;
    state.r = system.b() - spmv_transpose(system.G(), q0);
    state.s = spmv(system.G(), x0) - q0;
    return state;
}

StateDerivative apply_generator(const EllipticSystem& system, const RelaxState& state) {
    check_state(system, state);
    StateDerivative d;
    d.dx = state.r;
    d.dr = -spmv_transpose(system.G(), state.s);
    d.ds = spmv(system.G(), state.r) - state.s;
    return d;
}

double step_size(const EllipticSystem& system, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) {
        throw InvalidParameter("step size factor theta must lie in (0, 1], got " + std::to_string(theta));
    }
    return theta / (1.0 + norm_of_g(system));
}

RelaxState evolve(const EllipticSystem& system, RelaxState state, double T, const EvolveOptions& options,
                  Trajectory* trajectory) {
    check_state(system, state);
    if (!(T >= state.t)) {
        throw InvalidParameter("evolve: target time " + std::to_string(T) + " precedes state time " +
                               std::to_string(state.t));
    }
    if (options.sample_stride == 0) throw InvalidParameter("evolve: sample_stride must be positive");
    const double dt_full = step_size(system, options.theta);

    auto record = [&](const RelaxState& s) {
        if (!trajectory) return;
        trajectory->samples.push_back(sample_state(system, s, options.reference));
        if (options.keep_states) trajectory->states.push_back(s);
    };
    record(state);
    if (T == state.t) return state;

    const SparseMatrix& g = system.G();
    Stage k1, k2, k3, k4;
    Vector tmp, xr, rr, sr;
    const double t_start = state.t;
    const auto total_steps = static_cast<std::size_t>(std::ceil((T - t_start) / dt_full - 1e-9));
    std::size_t since_sample = 0;

    for (std::size_t step = 0; step < total_steps; ++step) {
        const double t_next = step + 1 == total_steps ? T : t_start + static_cast<double>(step + 1) * dt_full;
        const double dt = t_next - state.t;

        apply_into(g, state.r, state.s, k1, tmp);
        rr = state.r + 0.5 * dt * k1.r;
        sr = state.s + 0.5 * dt * k1.s;
        apply_into(g, rr, sr, k2, tmp);
        rr = state.r + 0.5 * dt * k2.r;
        sr = state.s + 0.5 * dt * k2.s;
        apply_into(g, rr, sr, k3, tmp);
        rr = state.r + dt * k3.r;
        sr = state.s + dt * k3.s;
        apply_into(g, rr, sr, k4, tmp);

        const double w = dt / 6.0;
        state.x += w * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
        state.r += w * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
        state.s += w * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
        state.t = t_next;

        if (!state.x.allFinite() || !state.r.allFinite() || !state.s.allFinite()) {
            throw DivergenceError("evolve: non-finite state at step " + std::to_string(step + 1) + " (t = " +
                                  std::to_string(state.t) + "); reduce theta");
        }
        if (options.on_step) options.on_step(state);
        if (++since_sample == options.sample_stride || step + 1 == total_steps) {
            record(state);
            since_sample = 0;
        }
    }
    return state;
}

double residual_probability(const RelaxState& state) {
    const double wx = state.x.squaredNorm();
    const double ww = state.r.squaredNorm() + state.s.squaredNorm();
    if (wx + ww == 0.0) throw InvalidParameter("residual probability is undefined for the zero state");
    return ww / (wx + ww);
}

double solution_block_weight(const RelaxState& state) {
    const double wx = state.x.squaredNorm();
    const double ww = state.r.squaredNorm() + state.s.squaredNorm();
    if (wx + ww == 0.0) throw InvalidParameter("solution block weight is undefined for the zero state");
    return wx / (wx + ww);
}

Vector algebraic_residual(const EllipticSystem& system, const RelaxState& state) {
    check_state(system, state);
    return state.r - spmv_transpose(system.G(), state.s);
}

Vector recover_flux(const EllipticSystem& system, const RelaxState& state) {
    check_state(system, state);
    return spmv(system.G(), state.x) - state.s;
}

Vector linear_invariant(const EllipticSystem& system, const RelaxState& state) {
    check_state(system, state);
    return state.r + spmv_transpose(system.G(), spmv(system.G(), state.x) - state.s) - system.b();
}

TrajectorySample sample_state(const EllipticSystem& system, const RelaxState& state,
                              const std::optional<Vector>& reference) {
    TrajectorySample sample;
    sample.t = state.t;
    sample.norm_x = state.norm_x();
    sample.norm_w = state.norm_w();
    sample.p_res = residual_probability(state);
    sample.norm_rA = algebraic_residual(system, state).norm();
    if (reference) sample.rel_err = (*reference - state.x).norm() / reference->norm();
    return sample;
}

Vector pack(const RelaxState& state) {
    Vector z(state.x.size() + state.r.size() + state.s.size());
    z << state.x, state.r, state.s;
    return z;
}

RelaxState unpack(const EllipticSystem& system, const Vector& z, double t) {
    const auto n = static_cast<Eigen::Index>(system.n_dof());
    const auto m = static_cast<Eigen::Index>(system.n_flux());
    if (z.size() != 2 * n + m) throw DimensionMismatch("unpack: joint vector length mismatch");
    return {t, z.segment(0, n), z.segment(n, n), z.segment(2 * n, m)};
}

DenseMatrix dense_residual_generator(const EllipticSystem& system) {
    const auto n = static_cast<Eigen::Index>(system.n_dof());
    const auto m = static_cast<Eigen::Index>(system.n_flux());
    require_dense(static_cast<std::size_t>(n + m), "dense_residual_generator");
    const DenseMatrix g = system.G().to_dense();
    DenseMatrix mh = DenseMatrix::Zero(n + m, n + m);
    mh.block(0, n, n, m) = -g.transpose();
    mh.block(n, 0, m, n) = g;
    mh.block(n, n, m, m) = -DenseMatrix::Identity(m, m);
    return mh;
}

DenseMatrix dense_joint_generator(const EllipticSystem& system) {
    const auto n = static_cast<Eigen::Index>(system.n_dof());
    const auto m = static_cast<Eigen::Index>(system.n_flux());
    require_dense(static_cast<std::size_t>(2 * n + m), "dense_joint_generator");
    DenseMatrix l = DenseMatrix::Zero(2 * n + m, 2 * n + m);
    l.block(0, n, n, n) = DenseMatrix::Identity(n, n);
    l.block(n, n, n + m, n + m) = dense_residual_generator(system);
    return l;
}

GeneratorNorms generator_norms(const EllipticSystem& system) {
    const double g = norm_of_g(system);
    return {g, 1.0, 2.0 + g};
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    const auto old = out.precision(17);
    out << "t,norm_x,norm_w,p_res,norm_rA,rel_err\n";
    for (const auto& s : trajectory.samples) {
        out << s.t << ',' << s.norm_x << ',' << s.norm_w << ',' << s.p_res << ',' << s.norm_rA << ',';
        if (s.rel_err) out << *s.rel_err;
        out << '\n';
    }
    out.precision(old);
}

}  // namespace ellq
