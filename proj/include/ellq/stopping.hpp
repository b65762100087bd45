#pragma once

#include "ellq/certificate.hpp"
#include "ellq/error.hpp"
#include "ellq/relaxation.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace ellq {

struct StoppingConfig {
    double epsilon = 1e-3;  ///< target relative accuracy
    double p0 = 0.0;        ///< constant residual-probability threshold
    double t0 = 0.0;        ///< first checkpoint time
    double growth = 2.0;
    std::size_t K_max = 10;
    std::size_t N_shot = 0;
    double nu = 0.01;  ///< false-accept budget over the whole scan
    std::uint64_t seed = 0;
};

/// p0 = min(0.2, largest threshold with beta0 <= 1/2), t0 = 1/(2 c_st),
/// growth 2, K_max 10, nu 0.01, and the smallest N_shot whose Hoeffding
/// buffer is at most p0/2.
[[nodiscard]] StoppingConfig default_stopping_config(const StabilityCertificate& cert, double epsilon,
                                                     std::uint64_t seed = 0);

/// Smallest shot count with hoeffding_buffer(K, nu, N) <= delta.
[[nodiscard]] std::size_t shots_for_buffer(std::size_t K, double nu, double delta);

/// t_k = t0 * growth^k, k = 0..K_max-1.
[[nodiscard]] std::vector<double> make_schedule(double t0, double growth, std::size_t K_max);

/// delta = sqrt(ln(2K/nu) / (2 N_shot)).
[[nodiscard]] double hoeffding_buffer(std::size_t K, double nu, std::size_t N_shot);

/// Accept iff p_hat + delta <= p0 (ties within rounding accept).
[[nodiscard]] bool entry_test(double p_hat, double delta, double p0);

/// sqrt(p0/(1-p0)); beta0 = C_tail * threshold_ratio(p0).
[[nodiscard]] double threshold_ratio(double p0);

/// Deterministic coasting time after entry,
///   (1/c_st) ln(C_tail C_st eta0 / ((1 - beta0) eps)), clamped at 0.
/// Throws InvalidParameter when beta0 >= 1 or eps is outside (0, 1).
[[nodiscard]] double coasting_time(double epsilon, const StabilityCertificate& cert, double p0);

/// A priori time (1/c_st) ln(4 C_st (1 + C_tail) Gamma_b / eps), clamped at 0.
[[nodiscard]] double worst_case_time(const StabilityCertificate& cert, double gamma_b, double epsilon);

/// Fresh evolutions from a fixed initial state. Every call to state_at(t)
/// evolves from t = 0; results are memoized per t, which is exact because
/// the flow is deterministic.
class CheckpointOracle {
public:
    CheckpointOracle(const EllipticSystem& system, RelaxState initial, EvolveOptions options = {});

    [[nodiscard]] const RelaxState& state_at(double t);
    [[nodiscard]] double residual_probability_at(double t) { return residual_probability(state_at(t)); }
    [[nodiscard]] const RelaxState& initial() const noexcept { return initial_; }

private:
    const EllipticSystem& system_;
    RelaxState initial_;
    EvolveOptions options_;
    std::map<double, RelaxState> cache_;
};

/// Independent generator for checkpoint k, derived from (seed, k).
[[nodiscard]] std::mt19937_64 checkpoint_stream(std::uint64_t seed, std::size_t k);

/// Sum of N_shot Bernoulli(p) draws.
[[nodiscard]] std::size_t sample_bernoulli(double p, std::size_t N_shot, std::mt19937_64& rng);

/// One checkpoint: fresh evolution to t_k, then N_shot residual-flag samples.
[[nodiscard]] std::size_t sample_checkpoint(CheckpointOracle& oracle, double t_k, std::size_t N_shot,
                                            std::mt19937_64& rng);
[[nodiscard]] std::size_t sample_checkpoint(const EllipticSystem& system, double t_k, std::size_t N_shot,
                                            std::mt19937_64& rng, const EvolveOptions& options = {});

struct CheckpointRecord {
    std::size_t k = 0;
    double t_k = 0.0;
    std::size_t X_k = 0;
    double p_hat = 0.0;
    double delta = 0.0;
    bool accepted = false;
    double p_true = 0.0;  ///< exact p_res(t_k), kept for false-accept accounting
};

struct SolveResult {
    double t_ent = 0.0;
    double delta_t = 0.0;
    double T_star = 0.0;
    double T_worst = 0.0;
    std::size_t shots_used = 0;
    std::vector<CheckpointRecord> checkpoint_log;
    double final_rel_err = 0.0;
    double p_res_final = 0.0;
    double p_x_final = 0.0;
    double gamma_out = 0.0;
    bool false_accept = false;  ///< accepted while the true p_res exceeded p0
    RelaxState final_state;
};

/// The checkpoint scan ended without acceptance; carries the scan log.
class CheckpointScanExhausted : public NoEntryError {
public:
    CheckpointScanExhausted(const std::string& what, double last_p_hat, std::vector<CheckpointRecord> log)
        : NoEntryError(what, last_p_hat), log_(std::move(log)) {}
    [[nodiscard]] const std::vector<CheckpointRecord>& log() const noexcept { return log_; }

private:
    std::vector<CheckpointRecord> log_;
};

struct DynamicSolveOptions {
    /// Initial state of every checkpoint and of the production run; cold start when empty.
    std::optional<RelaxState> initial;
    EvolveOptions evolve;
    /// Shared memo of fresh evolutions, e.g. across seeds on one instance.
    /// Must have been built from the same system and initial state.
    CheckpointOracle* oracle = nullptr;
    /// Reference solution; computed by direct_solve when empty.
    std::optional<Vector> reference;
};

/// Geometric checkpoint scan with the buffered entry test, deterministic
/// coasting, then one uninterrupted production evolution to T_star.
/// Throws CheckpointScanExhausted when no checkpoint is accepted.
[[nodiscard]] SolveResult run_dynamic_solve(const EllipticSystem& system, const StoppingConfig& config,
                                            const StabilityCertificate& cert,
                                            const DynamicSolveOptions& options = {});

/// `case,n,eps,p0,N_shot,seed,t_ent,delta_t,T_star,T_worst,shots_used,final_rel_err,p_res_final,p_x_final,gamma_out`
void write_solve_header(std::ostream& out);
void write_solve_row(std::ostream& out, const std::string& label, int n, const StoppingConfig& config,
                     const SolveResult& result);
/// `k,t_k,X_k,p_hat,delta,accepted`
void write_checkpoint_csv(std::ostream& out, const std::vector<CheckpointRecord>& log);

}  // namespace ellq
