#include "ellq/experiments.hpp"

#include "ellq/acceptance.hpp"
#include "ellq/csv.hpp"
#include "ellq/error.hpp"
#include "ellq/mesh.hpp"
#include "ellq/rhs.hpp"
#include "ellq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace ellq {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

std::vector<double> present(const std::vector<std::optional<double>>& column) {
    std::vector<double> out;
    out.reserve(column.size());
    for (const auto& v : column) out.push_back(v.value_or(std::nan("")));
    return out;
}

std::string tag(const std::string& rhs, int n) { return rhs + "_n" + std::to_string(n); }

std::vector<std::string> unique_labels(const std::vector<std::string>& column) {
    std::vector<std::string> labels;
    for (const auto& l : column) {
        if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
    }
    return labels;
}

}  // namespace

std::vector<EllipticSystem> case_systems(int n, const std::vector<std::string>& labels) {
    auto mesh = std::make_shared<const Mesh>(build_uniform_mesh(n));
    std::vector<EllipticSystem> out;
    const auto coeff = CoefficientField::constant(1.0);
    for (const auto& label : labels) {
        const RhsCase rc = rhs_case(label);
        if (out.empty()) {
            out.push_back(assemble_system(*mesh, coeff, rc.f));
        } else {
            // same G, new load, shared caches
            const Vector raw = assemble_load(*mesh, rc.f);
            out.push_back(out.front().with_load(out.front().mass_sqrt_inv().cwiseProduct(raw)));
        }
    }
    return out;
}

TimeSweep time_sweep(const std::vector<EllipticSystem>& systems, const std::vector<std::string>& labels,
                     const StabilityCertificate& cert, double epsilon, const TimeSweepOptions& options) {
    if (systems.size() != labels.size()) throw InvalidParameter("time_sweep: one label per system required");
    TimeSweep sweep;
    std::vector<Vector> refs;
    for (std::size_t i = 0; i < systems.size(); ++i) {
        refs.push_back(direct_solve(systems[i], systems[i].b()));
        TimeSweepCurve curve;
        curve.label = labels[i];
        curve.gamma_b = systems[i].b().norm() / refs.back().norm();
        curve.T_wc = worst_case_time(cert, curve.gamma_b, epsilon);
        sweep.curves.push_back(std::move(curve));
    }
    double longest = 0.0;
    for (const auto& c : sweep.curves) longest = std::max(longest, c.T_wc);
    sweep.horizon = options.horizon.value_or(1.1 * longest);

    for (std::size_t i = 0; i < systems.size(); ++i) {
        const EllipticSystem& sys = systems[i];
        const Vector& ref = refs[i];
        auto& curve = sweep.curves[i];
        const double ref_norm = ref.norm();
        const double b_norm = sys.b().norm();

        const double dt = step_size(sys, options.evolve.theta);
        const auto steps = static_cast<std::size_t>(std::ceil(sweep.horizon / dt));
        const std::size_t stride = std::max<std::size_t>(1, steps / std::max<std::size_t>(1, options.samples));
        const std::size_t state_stride =
            options.kept_states ? std::max<std::size_t>(1, steps / options.kept_states) : 0;

        RelaxState start = init_cold(sys);
        auto record = [&](const RelaxState& z, double err) {
            if (!curve.t.empty() && curve.t.back() == z.t) return;
            curve.t.push_back(z.t);
            curve.rel_err.push_back(err);
        };
        auto rel_err = [&](const RelaxState& z) { return (ref - z.x).norm() / ref_norm; };
        auto invariant = [&](const RelaxState& z) {
            if (options.track_invariant) {
                curve.max_invariant = std::max(curve.max_invariant, linear_invariant(sys, z).norm() / b_norm);
            }
        };

        record(start, rel_err(start));
        invariant(start);
        if (state_stride) curve.states.push_back(start);
        if (!(rel_err(start) > epsilon)) curve.crossing_time = 0.0;

        std::size_t count = 0;
        EvolveOptions ev = options.evolve;
        ev.keep_states = false;
        ev.reference.reset();
        ev.on_step = [&](const RelaxState& z) {
            ++count;
            const double err = rel_err(z);
            if (err > epsilon) {
                curve.crossing_time.reset();
            } else if (!curve.crossing_time) {
                curve.crossing_time = z.t;
            }
            if (count % stride == 0) record(z, err);
            invariant(z);
            if (state_stride && count % state_stride == 0) curve.states.push_back(z);
        };
        const RelaxState end = evolve(sys, std::move(start), sweep.horizon, ev);
        record(end, rel_err(end));
    }
    return sweep;
}

void write_time_sweep_csv(std::ostream& out, const TimeSweep& sweep) {
    const auto old = out.precision(17);
    out << "case,t,rel_err\n";
    for (const auto& c : sweep.curves) {
        for (std::size_t i = 0; i < c.t.size(); ++i) out << c.label << ',' << c.t[i] << ',' << c.rel_err[i] << '\n';
    }
    out.precision(old);
}

void write_time_summary_csv(std::ostream& out, const TimeSweep& sweep) {
    const auto old = out.precision(17);
    out << "case,crossing_time,T_wc\n";
    for (const auto& c : sweep.curves) {
        out << c.label << ',';
        if (c.crossing_time) out << *c.crossing_time;
        out << ',' << c.T_wc << '\n';
    }
    out.precision(old);
}

StoppingConfig stopping_config_for(const RunConfig& config, const StabilityCertificate& cert) {
    StoppingConfig sc = default_stopping_config(cert, config.epsilon, config.seed);
    if (config.p0) sc.p0 = *config.p0;
    if (config.t0) sc.t0 = *config.t0;
    sc.nu = config.nu;
    sc.growth = config.growth;
    sc.K_max = config.k_max;
    sc.N_shot = config.shots ? *config.shots : shots_for_buffer(sc.K_max, sc.nu, 0.5 * sc.p0);
    return sc;
}

// ---- rendering -------------------------------------------------------------

std::string render_relax_svg(const fs::path& trajectory_csv) {
    const CsvTable t = read_csv(trajectory_csv);
    PlotSpec spec;
    spec.title = "Residual dynamics";
    spec.x_label = "t";
    spec.y_label = "value";
    spec.log_y = true;
    const auto time = present(t.numbers("t"));
    const auto w = present(t.numbers("norm_w"));
    const auto ra = present(t.numbers("norm_rA"));
    // cold start: w(0) = (b, 0), so ||w(0)|| = ||b||
    const double w0 = w.empty() ? 1.0 : w.front();
    std::vector<double> w_rel, ra_rel;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w_rel.push_back(w[i] / w0);
        ra_rel.push_back(ra[i] / w0);
    }
    spec.series.push_back({"relative error", time, present(t.numbers("rel_err"))});
    spec.series.push_back({"||r_A|| / ||b||", time, ra_rel});
    spec.series.push_back({"||w|| / ||w(0)||", time, w_rel});
    spec.series.push_back({"p_res", time, present(t.numbers("p_res"))});
    return render_svg(spec);
}

std::string render_checkpoint_svg(const fs::path& checkpoint_csv, const fs::path& result_csv) {
    const CsvTable log = read_csv(checkpoint_csv);
    const CsvTable res = read_csv(result_csv);
    PlotSpec spec;
    spec.title = "Checkpoint estimates of p_res";
    spec.x_label = "checkpoint time t_k";
    spec.y_label = "p_hat";
    spec.log_x = true;
    spec.log_y = true;
    const auto t = present(log.numbers("t_k"));
    const auto p = present(log.numbers("p_hat"));
    const auto d = present(log.numbers("delta"));
    PlotBand band{"p_hat +- delta", t, {}, {}};
    for (std::size_t i = 0; i < p.size(); ++i) {
        band.lower.push_back(p[i] - d[i]);
        band.upper.push_back(p[i] + d[i]);
    }
    spec.bands.push_back(band);
    PlotSeries s{"p_hat", t, p};
    s.markers = true;
    spec.series.push_back(s);
    if (!res.rows.empty()) {
        if (auto p0 = res.numbers("p0").front()) spec.horizontal.push_back({"p0", *p0, LineStyle::dashed});
        if (auto te = res.numbers("t_ent").front()) spec.vertical.push_back({"entry t_ent", *te, LineStyle::dashdot});
    }
    return render_svg(spec);
}

std::string render_degree_svg(const fs::path& sweep_csv, const fs::path& summary_csv, double epsilon) {
    const CsvTable sweep = read_csv(sweep_csv);
    const CsvTable summary = read_csv(summary_csv);
    PlotSpec spec;
    spec.title = "Inverse-polynomial filter";
    spec.x_label = "polynomial degree";
    spec.y_label = "normalized state error";
    spec.log_y = true;
    const auto labels = sweep.strings("case");
    const auto deg = present(sweep.numbers("degree"));
    const auto err = present(sweep.numbers("state_err"));
    for (const auto& label : unique_labels(labels)) {
        PlotSeries s{"case " + label, {}, {}};
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != label) continue;
            s.x.push_back(deg[i]);
            s.y.push_back(err[i]);
        }
        spec.series.push_back(std::move(s));
    }
    double latest = -1.0, dwc = -1.0;
    for (const auto& v : summary.numbers("crossing_degree")) latest = std::max(latest, v.value_or(-1.0));
    for (const auto& v : summary.numbers("d_wc")) dwc = std::max(dwc, v.value_or(-1.0));
    if (dwc >= 0.0) spec.vertical.push_back({"worst-case degree (heuristic)", dwc, LineStyle::dashed});
    if (latest >= 0.0) spec.vertical.push_back({"latest crossing", latest, LineStyle::dashdot});
    spec.horizontal.push_back({"eps", epsilon, LineStyle::dotted});
    return render_svg(spec);
}

std::string render_time_svg(const fs::path& sweep_csv, const fs::path& summary_csv, double epsilon) {
    const CsvTable sweep = read_csv(sweep_csv);
    const CsvTable summary = read_csv(summary_csv);
    PlotSpec spec;
    spec.title = "ODE relaxation";
    spec.x_label = "evolution time T";
    spec.y_label = "relative error";
    spec.log_y = true;
    const auto labels = sweep.strings("case");
    const auto t = present(sweep.numbers("t"));
    const auto err = present(sweep.numbers("rel_err"));
    for (const auto& label : unique_labels(labels)) {
        PlotSeries s{"case " + label, {}, {}};
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != label) continue;
            s.x.push_back(t[i]);
            s.y.push_back(err[i]);
        }
        spec.series.push_back(std::move(s));
    }
    double latest = -1.0, twc = -1.0;
    for (const auto& v : summary.numbers("crossing_time")) latest = std::max(latest, v.value_or(-1.0));
    for (const auto& v : summary.numbers("T_wc")) twc = std::max(twc, v.value_or(-1.0));
    if (twc >= 0.0) spec.vertical.push_back({"worst-case time", twc, LineStyle::dashed});
    if (latest >= 0.0) spec.vertical.push_back({"latest crossing", latest, LineStyle::dashdot});
    spec.horizontal.push_back({"eps", epsilon, LineStyle::dotted});
    return render_svg(spec);
}

std::string render_mesh_svg(const fs::path& nodes_csv, const fs::path& triangles_csv) {
    const CsvTable nodes = read_csv(nodes_csv);
    const CsvTable tris = read_csv(triangles_csv);
    const auto x = present(nodes.numbers("x"));
    const auto y = present(nodes.numbers("y"));
    const auto interior = nodes.numbers("interior_id");
    const double size = 420.0, pad = 20.0;
    auto sx = [&](double v) { return pad + v * size; };
    auto sy = [&](double v) { return pad + (1.0 - v) * size; };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * pad << "\" height=\"" << size + 2 * pad
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const auto v0 = tris.numbers("v0"), v1 = tris.numbers("v1"), v2 = tris.numbers("v2");
    for (std::size_t k = 0; k < v0.size(); ++k) {
        const auto a = static_cast<std::size_t>(*v0[k]);
        const auto b = static_cast<std::size_t>(*v1[k]);
        const auto c = static_cast<std::size_t>(*v2[k]);
        o << "<polygon points=\"" << sx(x[a]) << ',' << sy(y[a]) << ' ' << sx(x[b]) << ',' << sy(y[b]) << ' '
          << sx(x[c]) << ',' << sy(y[c]) << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"0.8\"/>\n";
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        o << "<circle cx=\"" << sx(x[i]) << "\" cy=\"" << sy(y[i]) << "\" r=\"2\" fill=\""
          << (interior[i] ? "#1f77b4" : "#d62728") << "\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

// ---- commands --------------------------------------------------------------

int cmd_relax(const RunConfig& config, std::ostream& log) {
    validate(config);
    const int n = config.mesh_n();
    const std::string rhs = config.rhs.value_or("manufactured");
    const double T = config.t_max.value_or(40.0);
    const auto systems = case_systems(n, {rhs});
    const EllipticSystem& sys = systems.front();

    EvolveOptions ev;
    ev.theta = config.theta;
    ev.reference = direct_solve(sys, sys.b());
    const double dt = step_size(sys, ev.theta);
    ev.sample_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(T / dt)) / 1000);
    Trajectory traj;
    const RelaxState end = evolve(sys, init_cold(sys), T, ev, &traj);

    const fs::path csv = config.out / ("relax_" + tag(rhs, n) + ".csv");
    {
        auto out = open_out(csv);
        write_trajectory_csv(out, traj);
    }
    write_text(config.out / ("relax_" + tag(rhs, n) + ".svg"), render_relax_svg(csv));
    const auto& last = traj.samples.back();
    log << "relax " << rhs << " n=" << n << " T=" << end.t << ": rel_err=" << last.rel_err.value_or(0.0)
        << " p_res=" << last.p_res << " -> " << csv.string() << '\n';
    return 0;
}

int cmd_stop(const RunConfig& config, std::ostream& log) {
    validate(config);
    const int n = config.mesh_n();
    const std::string rhs = config.rhs.value_or("I");
    const auto systems = case_systems(n, {rhs});
    const EllipticSystem& sys = systems.front();
    const StabilityCertificate cert = certify(sys);
    const StoppingConfig sc = stopping_config_for(config, cert);

    const std::string stem = tag(rhs, n) + "_seed" + std::to_string(config.seed);
    const fs::path result_csv = config.out / ("stop_" + stem + ".csv");
    const fs::path log_csv = config.out / ("checkpoints_" + stem + ".csv");
    const fs::path svg = config.out / ("checkpoints_" + stem + ".svg");

    DynamicSolveOptions opts;
    opts.evolve.theta = config.theta;
    try {
        const SolveResult r = run_dynamic_solve(sys, sc, cert, opts);
        {
            auto out = open_out(result_csv);
            write_solve_header(out);
            write_solve_row(out, rhs, n, sc, r);
        }
        {
            auto out = open_out(log_csv);
            write_checkpoint_csv(out, r.checkpoint_log);
        }
        write_text(svg, render_checkpoint_svg(log_csv, result_csv));
        log << "stop " << rhs << " n=" << n << ": t_ent=" << r.t_ent << " T_star=" << r.T_star
            << " T_worst=" << r.T_worst << " final_rel_err=" << r.final_rel_err << " shots=" << r.shots_used
            << " -> " << result_csv.string() << '\n';
        return r.final_rel_err <= sc.epsilon ? 0 : 1;
    } catch (const CheckpointScanExhausted& e) {
        {
            auto out = open_out(result_csv);
            write_solve_header(out);
            out << std::setprecision(17) << rhs << ',' << n << ',' << sc.epsilon << ',' << sc.p0 << ',' << sc.N_shot
                << ',' << sc.seed << ",,,,," << e.log().size() * sc.N_shot << ",,,,\n";
        }
        {
            auto out = open_out(log_csv);
            write_checkpoint_csv(out, e.log());
        }
        write_text(svg, render_checkpoint_svg(log_csv, result_csv));
        log << "stop " << rhs << " n=" << n << ": no entry: " << e.what() << '\n';
        return 1;
    }
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
    validate(config);
    const int n = config.mesh_n();
    const std::string suffix = "_n" + std::to_string(n);
    const fs::path deg_csv = config.out / ("sweep_degree" + suffix + ".csv");
    const fs::path deg_sum = config.out / ("sweep_degree_summary" + suffix + ".csv");
    const fs::path time_csv = config.out / ("sweep_time" + suffix + ".csv");
    const fs::path time_sum = config.out / ("sweep_time_summary" + suffix + ".csv");

    if (config.cases.empty()) {
        write_text(deg_csv, "case,degree,state_err\n");
        write_text(deg_sum, "case,crossing_degree,d_wc\n");
        write_text(time_csv, "case,t,rel_err\n");
        write_text(time_sum, "case,crossing_time,T_wc\n");
        log << "sweep: no cases\n";
        return 0;
    }

    const auto systems = case_systems(n, config.cases);
    const SpectralBasis basis = spectral_basis(systems.front());
    std::vector<SweepCase> cases;
    for (std::size_t i = 0; i < systems.size(); ++i) {
        cases.push_back({config.cases[i], systems[i].b(), direct_solve(systems[i], systems[i].b())});
    }
    const DegreeSweep ds = degree_sweep(basis, cases, config.epsilon);
    {
        auto out = open_out(deg_csv);
        write_degree_sweep_csv(out, ds);
    }
    {
        auto out = open_out(deg_sum);
        write_degree_summary_csv(out, ds);
    }
    write_text(config.out / ("sweep_degree" + suffix + ".svg"), render_degree_svg(deg_csv, deg_sum, config.epsilon));

    const StabilityCertificate cert = certify(systems.front());
    TimeSweepOptions to;
    to.evolve.theta = config.theta;
    to.horizon = config.t_max;
    const TimeSweep ts = time_sweep(systems, config.cases, cert, config.epsilon, to);
    {
        auto out = open_out(time_csv);
        write_time_sweep_csv(out, ts);
    }
    {
        auto out = open_out(time_sum);
        write_time_summary_csv(out, ts);
    }
    write_text(config.out / ("sweep_time" + suffix + ".svg"), render_time_svg(time_csv, time_sum, config.epsilon));

    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& dc = ds.curves[i];
        const auto& tc = ts.curves[i];
        log << "case " << dc.label << ": degree crossing ";
        if (dc.crossing_degree) log << *dc.crossing_degree; else log << "none";
        log << " (d_wc " << ds.d_wc << "), time crossing ";
        if (tc.crossing_time) log << *tc.crossing_time; else log << "none";
        log << " (T_wc " << tc.T_wc << ")\n";
    }
    return 0;
}

int cmd_spectral(const RunConfig& config, std::ostream& log) {
    validate(config);
    const std::vector<int> ladder = config.n ? std::vector<int>{*config.n} : std::vector<int>{4, 8, 16};
    const std::string rhs = config.rhs.value_or("manufactured");
    auto spectral = open_out(config.out / "spectral.csv");
    auto certificate = open_out(config.out / "certificate.csv");
    write_spectral_header(spectral);
    write_certificate_header(certificate);
    for (int n : ladder) {
        const auto systems = case_systems(n, {rhs});
        const EllipticSystem& sys = systems.front();
        const SpectralSummary& s = sys.spectral();
        write_spectral_row(spectral, n, s);
        const StabilityCertificate cert = certify(sys);
        const DecayFit fit = empirical_decay(sys, 40.0, 161);
        write_certificate_row(certificate, n, cert, fit);

        const std::string suffix = "_n" + std::to_string(n);
        dump_system(sys, config.out / ("G" + suffix + ".mtx"), config.out / ("b" + suffix + ".txt"));
        const Mesh& mesh = *sys.mesh();
        const fs::path nodes = config.out / ("mesh_nodes" + suffix + ".csv");
        const fs::path tris = config.out / ("mesh_triangles" + suffix + ".csv");
        write_mesh_csv(mesh, nodes, tris);
        write_text(config.out / ("mesh" + suffix + ".svg"), render_mesh_svg(nodes, tris));

        // nodal finite element solution next to the exact one
        const Vector x = direct_solve(sys, sys.b());
        auto sol = open_out(config.out / ("solution" + suffix + ".csv"));
        sol << std::setprecision(17) << "id,x,y,u_h,u_ex\n";
        for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
            const auto dof = mesh.interior_index[i];
            const double uh = dof ? x[static_cast<Eigen::Index>(*dof)] * sys.mass_sqrt_inv()[static_cast<Eigen::Index>(*dof)] : 0.0;
            sol << i << ',' << mesh.nodes[i].x << ',' << mesh.nodes[i].y << ',' << uh << ','
                << manufactured_solution(mesh.nodes[i].x, mesh.nodes[i].y) << '\n';
        }
        log << "n=" << n << ": sigma_min=" << s.sigma_min_G << " ||G||=" << s.norm_G << " kappa=" << s.kappa_A
            << " c_st=" << cert.c_st << " C_tail=" << cert.C_tail << " c_hat=" << fit.c_hat << '\n';
    }
    return 0;
}

int cmd_report(const RunConfig& config, std::ostream& log) {
    validate(config);
    fs::create_directories(config.out);
    const fs::path dump = config.out / "G_n16.mtx";
    if (!fs::exists(dump)) {
        const auto systems = case_systems(16, {"I"});
        write_matrix_market(systems.front().G(), dump);
    }
    AcceptanceOptions opts;
    opts.criteria = config.criteria;
    opts.work_dir = config.out / "acceptance_work";
    opts.theta = config.theta;
    opts.gram_dump = dump;
    opts.seed = config.seed;
    opts.progress = &log;
    const auto results = run_acceptance(opts);
    {
        auto out = open_out(config.out / "report.csv");
        write_report_csv(out, results);
    }
    print_report(log, results);
    const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
    return ok ? 0 : 1;
}

}  // namespace ellq
