#pragma once

#include "ellq/certificate.hpp"
#include "ellq/config.hpp"
#include "ellq/fem.hpp"
#include "ellq/inverse_filter.hpp"
#include "ellq/relaxation.hpp"
#include "ellq/stopping.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ellq {

/// Poisson systems (a = 1) on the n x n mesh, one per load label. They share
/// G and therefore its cached SVD and Cholesky factor.
[[nodiscard]] std::vector<EllipticSystem> case_systems(int n, const std::vector<std::string>& labels);

struct TimeSweepOptions {
    EvolveOptions evolve;
    std::optional<double> horizon;  ///< default 1.1 x the largest worst-case time
    std::size_t samples = 400;      ///< rows per case in the CSV
    bool track_invariant = false;
    std::size_t kept_states = 0;  ///< about this many evenly spaced full states per case, plus t = 0 (0 = none)
};

struct TimeSweepCurve {
    std::string label;
    std::vector<double> t;
    std::vector<double> rel_err;
    /// First step time after which the relative error stays <= eps.
    std::optional<double> crossing_time;
    double gamma_b = 0.0;
    double T_wc = 0.0;
    double max_invariant = 0.0;  ///< max_t ||r + G^T(Gx - s) - b|| / ||b||
    std::vector<RelaxState> states;
};

struct TimeSweep {
    std::vector<TimeSweepCurve> curves;
    double horizon = 0.0;
};

/// Cold-start relaxation of every system, error checked after every step.
[[nodiscard]] TimeSweep time_sweep(const std::vector<EllipticSystem>& systems, const std::vector<std::string>& labels,
                                   const StabilityCertificate& cert, double epsilon,
                                   const TimeSweepOptions& options = {});

/// `case,t,rel_err`
void write_time_sweep_csv(std::ostream& out, const TimeSweep& sweep);
/// `case,crossing_time,T_wc`
void write_time_summary_csv(std::ostream& out, const TimeSweep& sweep);

// SVG renderings, each a function of the CSV files only.
[[nodiscard]] std::string render_relax_svg(const std::filesystem::path& trajectory_csv);
[[nodiscard]] std::string render_checkpoint_svg(const std::filesystem::path& checkpoint_csv,
                                                const std::filesystem::path& result_csv);
[[nodiscard]] std::string render_degree_svg(const std::filesystem::path& sweep_csv,
                                            const std::filesystem::path& summary_csv, double epsilon);
[[nodiscard]] std::string render_time_svg(const std::filesystem::path& sweep_csv,
                                          const std::filesystem::path& summary_csv, double epsilon);
[[nodiscard]] std::string render_mesh_svg(const std::filesystem::path& nodes_csv,
                                          const std::filesystem::path& triangles_csv);

/// Stopping parameters for a run: library defaults, then the overrides in
/// `config`. N_shot follows p0 (buffer <= p0/2) unless --shots is given.
[[nodiscard]] StoppingConfig stopping_config_for(const RunConfig& config, const StabilityCertificate& cert);

// Commands. Each returns the process exit code (0 ok, 1 numerical or
// acceptance failure) and throws ConfigError / InvalidParameter for bad input.
int cmd_relax(const RunConfig& config, std::ostream& log);
int cmd_stop(const RunConfig& config, std::ostream& log);
int cmd_sweep(const RunConfig& config, std::ostream& log);
int cmd_spectral(const RunConfig& config, std::ostream& log);
int cmd_report(const RunConfig& config, std::ostream& log);

}  // namespace ellq
