#pragma once

#include "ellq/fem.hpp"
#include "ellq/types.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

namespace ellq {

/// Joint state z = (x, r, s) of the accumulator flow
///   x' = r,  r' = -G^T s,  s' = G r - s.
/// x is the solution accumulator, w = (r, s) the residual block.
struct RelaxState {
    double t = 0.0;
    Vector x;
    Vector r;
    Vector s;

    [[nodiscard]] double norm_x() const { return x.norm(); }
    [[nodiscard]] double norm_w() const { return std::sqrt(r.squaredNorm() + s.squaredNorm()); }
};

struct StateDerivative {
    Vector dx;
    Vector dr;
    Vector ds;
};

/// x = 0, r = b, s = 0.
[[nodiscard]] RelaxState init_cold(const EllipticSystem& system);

/// r = b - G^T q0, s = G x0 - q0.
[[nodiscard]] RelaxState init_warm(const EllipticSystem& system, const Vector& x0, const Vector& q0);

/// Matrix-free application of the joint generator (two sparse products).
[[nodiscard]] StateDerivative apply_generator(const EllipticSystem& system, const RelaxState& state);

struct TrajectorySample {
    double t = 0.0;
    double norm_x = 0.0;
    double norm_w = 0.0;
    double p_res = 0.0;
    double norm_rA = 0.0;
    std::optional<double> rel_err;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    /// Full states at the sample times, filled only when requested.
    std::vector<RelaxState> states;
};

inline constexpr double kDefaultTheta = 0.04;

struct EvolveOptions {
    /// Fixed step dt = theta / (1 + ||G||), theta in (0, 1].
    double theta = kDefaultTheta;
    /// Record a trajectory sample every `sample_stride` steps (plus both ends).
    std::size_t sample_stride = 10;
    /// Reference solution for the rel_err column.
    std::optional<Vector> reference;
    bool keep_states = false;
    /// Called after every accepted step.
    std::function<void(const RelaxState&)> on_step;
};

[[nodiscard]] double step_size(const EllipticSystem& system, double theta);

/// Classical RK4 from state.t to T with a fixed step; the last step is
/// shortened to land exactly on T. Throws DivergenceError on non-finite
/// values and InvalidParameter for T < state.t or theta outside (0, 1].
[[nodiscard]] RelaxState evolve(const EllipticSystem& system, RelaxState state, double T,
                                const EvolveOptions& options = {}, Trajectory* trajectory = nullptr);

/// ||w||^2 / (||x||^2 + ||w||^2). Throws InvalidParameter on the zero state.
[[nodiscard]] double residual_probability(const RelaxState& state);
/// ||x||^2 / (||x||^2 + ||w||^2) = 1 - p_res.
[[nodiscard]] double solution_block_weight(const RelaxState& state);

/// r - G^T s, which equals b - A x along consistent trajectories.
[[nodiscard]] Vector algebraic_residual(const EllipticSystem& system, const RelaxState& state);
/// q = G x - s.
[[nodiscard]] Vector recover_flux(const EllipticSystem& system, const RelaxState& state);
/// r + G^T (G x - s) - b; zero for consistent states.
[[nodiscard]] Vector linear_invariant(const EllipticSystem& system, const RelaxState& state);

[[nodiscard]] TrajectorySample sample_state(const EllipticSystem& system, const RelaxState& state,
                                            const std::optional<Vector>& reference);

/// z = (x, r, s) stacked.
[[nodiscard]] Vector pack(const RelaxState& state);
[[nodiscard]] RelaxState unpack(const EllipticSystem& system, const Vector& z, double t);

/// Dense residual generator M = [[0, -G^T], [G, -I]] built directly from G.
[[nodiscard]] DenseMatrix dense_residual_generator(const EllipticSystem& system);
/// Dense joint generator L = [[0, P_r], [0, M]].
[[nodiscard]] DenseMatrix dense_joint_generator(const EllipticSystem& system);

/// Norms of the two parts of M = -iH - Pi_s: the PDE-dependent Hermitian
/// block (equal to ||G||) and the damping projector (equal to 1).
struct GeneratorNorms {
    double hermitian = 0.0;
    double damping = 0.0;
    double joint_bound = 0.0;  ///< 1 + ||M|| bound on ||L||
};
[[nodiscard]] GeneratorNorms generator_norms(const EllipticSystem& system);

/// `t,norm_x,norm_w,p_res,norm_rA,rel_err`
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace ellq
