#include "ellq/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ellq {

std::size_t shots_for_buffer(std::size_t K, double nu, double delta) {
    if (!(delta > 0.0)) throw InvalidParameter("shots_for_buffer: delta must be positive");
    if (K < 1 || !(nu > 0.0 && nu < 1.0)) throw InvalidParameter("shots_for_buffer: need K >= 1, nu in (0,1)");
    const double log_term = std::log(2.0 * static_cast<double>(K) / nu);
    auto n = static_cast<std::size_t>(std::ceil(log_term / (2.0 * delta * delta)));
    while (n > 1 && hoeffding_buffer(K, nu, n - 1) <= delta) --n;
    while (hoeffding_buffer(K, nu, n) > delta) ++n;
    return std::max<std::size_t>(n, 1);
}

StoppingConfig default_stopping_config(const StabilityCertificate& cert, double epsilon, std::uint64_t seed) {
    StoppingConfig config;
    config.epsilon = epsilon;
    const double eta0 = 0.5 / cert.C_tail;  // beta0 = 1/2
    config.p0 = std::min(0.2, eta0 * eta0 / (1.0 + eta0 * eta0));
    config.t0 = 1.0 / (2.0 * cert.c_st);
    config.N_shot = shots_for_buffer(config.K_max, config.nu, 0.5 * config.p0);
    config.seed = seed;
    return config;
}

std::vector<double> make_schedule(double t0, double growth, std::size_t K_max) {
    if (!(t0 > 0.0) || !(growth > 1.0) || K_max < 1) {
        throw InvalidParameter("make_schedule: need t0 > 0, growth > 1 and K_max >= 1");
    }
    std::vector<double> times;
    times.reserve(K_max);
    double t = t0;
    for (std::size_t k = 0; k < K_max; ++k, t *= growth) times.push_back(t);
    return times;
}

double hoeffding_buffer(std::size_t K, double nu, std::size_t N_shot) {
    if (K < 1 || N_shot < 1 || !(nu > 0.0 && nu < 1.0)) {
        throw InvalidParameter("hoeffding_buffer: need K >= 1, N_shot >= 1 and nu in (0, 1)");
    }
    return std::sqrt(std::log(2.0 * static_cast<double>(K) / nu) / (2.0 * static_cast<double>(N_shot)));
}

bool entry_test(double p_hat, double delta, double p0) {
    return p_hat + delta <= p0 * (1.0 + 1e-12);
}

double threshold_ratio(double p0) {
    if (!(p0 > 0.0 && p0 < 1.0)) throw InvalidParameter("threshold p0 must lie in (0, 1)");
    return std::sqrt(p0 / (1.0 - p0));
}

double coasting_time(double epsilon, const StabilityCertificate& cert, double p0) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidParameter("coasting_time: epsilon must lie in (0, 1)");
    const double eta0 = threshold_ratio(p0);
    const double beta0 = cert.C_tail * eta0;
    if (!(beta0 < 1.0)) {
        throw InvalidParameter("coasting_time: threshold p0 = " + std::to_string(p0) + " gives beta0 = " +
                               std::to_string(beta0) + " >= 1; lower p0");
    }
    const double dt = std::log(cert.C_tail * cert.C_st * eta0 / ((1.0 - beta0) * epsilon)) / cert.c_st;
    return std::max(0.0, dt);
}

double worst_case_time(const StabilityCertificate& cert, double gamma_b, double epsilon) {
    if (!(gamma_b > 0.0) || !(epsilon > 0.0)) {
        throw InvalidParameter("worst_case_time: Gamma_b and epsilon must be positive");
    }
    return std::max(0.0, std::log(4.0 * cert.C_st * (1.0 + cert.C_tail) * gamma_b / epsilon) / cert.c_st);
}

CheckpointOracle::CheckpointOracle(const EllipticSystem& system, RelaxState initial, EvolveOptions options)
    : system_(system), initial_(std::move(initial)), options_(std::move(options)) {
    options_.on_step = nullptr;
}

const RelaxState& CheckpointOracle::state_at(double t) {
    auto it = cache_.find(t);
    if (it == cache_.end()) {
        it = cache_.emplace(t, evolve(system_, initial_, initial_.t + t, options_)).first;
    }
    return it->second;
}

std::mt19937_64 checkpoint_stream(std::uint64_t seed, std::size_t k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(static_cast<std::uint64_t>(k) >> 32)};
    return std::mt19937_64(seq);
}

std::size_t sample_bernoulli(double p, std::size_t N_shot, std::mt19937_64& rng) {
    if (N_shot < 1) throw InvalidParameter("sample_bernoulli: N_shot must be >= 1");
    std::bernoulli_distribution flag(std::clamp(p, 0.0, 1.0));
    std::size_t count = 0;
    for (std::size_t i = 0; i < N_shot; ++i) count += flag(rng) ? 1 : 0;
    return count;
}

std::size_t sample_checkpoint(CheckpointOracle& oracle, double t_k, std::size_t N_shot, std::mt19937_64& rng) {
    if (N_shot < 1) throw InvalidParameter("sample_checkpoint: N_shot must be >= 1");
    return sample_bernoulli(oracle.residual_probability_at(t_k), N_shot, rng);
}

std::size_t sample_checkpoint(const EllipticSystem& system, double t_k, std::size_t N_shot, std::mt19937_64& rng,
                              const EvolveOptions& options) {
    CheckpointOracle oracle(system, init_cold(system), options);
    return sample_checkpoint(oracle, t_k, N_shot, rng);
}

SolveResult run_dynamic_solve(const EllipticSystem& system, const StoppingConfig& config,
                              const StabilityCertificate& cert, const DynamicSolveOptions& options) {
    // Validate everything (including beta0 < 1) before the first evolution.
    const double delta_t = coasting_time(config.epsilon, cert, config.p0);
    const auto schedule = make_schedule(config.t0, config.growth, config.K_max);
    const double delta = hoeffding_buffer(config.K_max, config.nu, config.N_shot);

    std::optional<CheckpointOracle> own_oracle;
    CheckpointOracle* oracle = options.oracle;
    if (!oracle) {
        own_oracle.emplace(system, options.initial ? *options.initial : init_cold(system), options.evolve);
        oracle = &*own_oracle;
    }

    SolveResult result;
    std::optional<std::size_t> entered;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        auto rng = checkpoint_stream(config.seed, k);
        CheckpointRecord rec;
        rec.k = k;
        rec.t_k = schedule[k];
        rec.p_true = oracle->residual_probability_at(rec.t_k);
        rec.X_k = sample_bernoulli(rec.p_true, config.N_shot, rng);
        rec.p_hat = static_cast<double>(rec.X_k) / static_cast<double>(config.N_shot);
        rec.delta = delta;
        rec.accepted = entry_test(rec.p_hat, delta, config.p0);
        result.shots_used += config.N_shot;
        result.checkpoint_log.push_back(rec);
        if (rec.accepted) {
            entered = k;
            break;
        }
    }
    if (!entered) {
        const double last = result.checkpoint_log.back().p_hat;
        std::ostringstream msg;
        msg << "no checkpoint accepted after " << schedule.size() << " checkpoints (last p_hat = " << last
            << ", delta = " << delta << ", p0 = " << config.p0
            << "); raise N_shot or K_max, or check p0";
        throw CheckpointScanExhausted(msg.str(), last, std::move(result.checkpoint_log));
    }

    const CheckpointRecord& accepted = result.checkpoint_log.back();
    result.t_ent = accepted.t_k;
    result.false_accept = accepted.p_true > config.p0;
    result.delta_t = delta_t;
    result.T_star = result.t_ent + delta_t;

    const Vector reference = options.reference ? *options.reference : direct_solve(system, system.b());
    result.T_worst = worst_case_time(cert, system.b().norm() / reference.norm(), config.epsilon);

    result.final_state = oracle->state_at(result.T_star);
    const RelaxState& z = result.final_state;
    result.final_rel_err = (reference - z.x).norm() / reference.norm();
    result.p_res_final = residual_probability(z);
    result.p_x_final = solution_block_weight(z);
    const double z0 = pack(oracle->initial()).norm();
    result.gamma_out = z0 / pack(z).norm();
    return result;
}

void write_solve_header(std::ostream& out) {
    out << "case,n,eps,p0,N_shot,seed,t_ent,delta_t,T_star,T_worst,shots_used,final_rel_err,p_res_final,"
           "p_x_final,gamma_out\n";
}

void write_solve_row(std::ostream& out, const std::string& label, int n, const StoppingConfig& config,
                     const SolveResult& r) {
    const auto old = out.precision(17);
    out << label << ',' << n << ',' << config.epsilon << ',' << config.p0 << ',' << config.N_shot << ','
        << config.seed << ',' << r.t_ent << ',' << r.delta_t << ',' << r.T_star << ',' << r.T_worst << ','
        << r.shots_used << ',' << r.final_rel_err << ',' << r.p_res_final << ',' << r.p_x_final << ','
        << r.gamma_out << '\n';
    out.precision(old);
}

void write_checkpoint_csv(std::ostream& out, const std::vector<CheckpointRecord>& log) {
    const auto old = out.precision(17);
    out << "k,t_k,X_k,p_hat,delta,accepted\n";
    for (const auto& c : log) {
        out << c.k << ',' << c.t_k << ',' << c.X_k << ',' << c.p_hat << ',' << c.delta << ','
            << (c.accepted ? 1 : 0) << '\n';
    }
    out.precision(old);
}

}  // namespace ellq
