#include "ellq/acceptance.hpp"

#include "ellq/certificate.hpp"
#include "ellq/config.hpp"
#include "ellq/error.hpp"
#include "ellq/experiments.hpp"
#include "ellq/fem.hpp"
#include "ellq/inverse_filter.hpp"
#include "ellq/rhs.hpp"
#include "ellq/stopping.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

namespace ellq {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCases = {"I", "II", "III", "IV"};
constexpr double kEps = 1e-3;
constexpr std::size_t kSeedsPerCase = 20;

std::string num(double v) {
    std::ostringstream o;
    o.precision(4);
    o << v;
    return o.str();
}

double cot_at(const Point& v, const Point& a, const Point& b) {
    const double ux = a.x - v.x, uy = a.y - v.y;
    const double wx = b.x - v.x, wy = b.y - v.y;
    return (ux * wx + uy * wy) / std::abs(ux * wy - uy * wx);
}

double triangle_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::vector<std::size_t> dof_nodes(const Mesh& mesh) {
    std::vector<std::size_t> nodes(mesh.n_dof);
    for (std::size_t v = 0; v < mesh.interior_index.size(); ++v) {
        if (mesh.interior_index[v]) nodes[*mesh.interior_index[v]] = v;
    }
    return nodes;
}

// Everything the n = 16 criteria share, built on first use.
struct Context {
    AcceptanceOptions options;
    std::optional<std::vector<EllipticSystem>> n16;
    std::optional<StabilityCertificate> cert16;
    std::optional<TimeSweep> sweep16;
    std::map<int, TimeSweep> small_sweeps;
    std::optional<std::map<std::string, std::vector<SolveResult>>> stops;
    std::optional<std::size_t> no_entry_runs;

    double theta() const { return options.theta > 0.0 ? options.theta : kDefaultTheta; }

    const std::vector<EllipticSystem>& systems() {
        if (!n16) n16 = case_systems(16, kCases);
        return *n16;
    }
    const StabilityCertificate& cert() {
        if (!cert16) cert16 = certify(systems().front());
        return *cert16;
    }
    const TimeSweep& sweep() {
        if (!sweep16) {
            TimeSweepOptions o;
            o.evolve.theta = theta();
            o.track_invariant = true;
            o.kept_states = 150;
            sweep16 = time_sweep(systems(), kCases, cert(), kEps, o);
        }
        return *sweep16;
    }
    const TimeSweep& small_sweep(int n) {
        auto it = small_sweeps.find(n);
        if (it == small_sweeps.end()) {
            const auto sys = case_systems(n, kCases);
            TimeSweepOptions o;
            o.evolve.theta = theta();
            o.kept_states = 150;
            o.horizon = 40.0;
            it = small_sweeps.emplace(n, time_sweep(sys, kCases, certify(sys.front()), kEps, o)).first;
        }
        return it->second;
    }
    const std::map<std::string, std::vector<SolveResult>>& stopping_runs() {
        if (!stops) {
            stops.emplace();
            no_entry_runs = 0;
            for (std::size_t c = 0; c < kCases.size(); ++c) {
                const EllipticSystem& sys = systems()[c];
                EvolveOptions ev;
                ev.theta = theta();
                CheckpointOracle oracle(sys, init_cold(sys), ev);
                DynamicSolveOptions opts;
                opts.evolve = ev;
                opts.oracle = &oracle;
                opts.reference = direct_solve(sys, sys.b());
                auto& runs = (*stops)[kCases[c]];
                for (std::size_t k = 0; k < kSeedsPerCase; ++k) {
                    const StoppingConfig sc = default_stopping_config(cert(), kEps, options.seed + k);
                    try {
                        runs.push_back(run_dynamic_solve(sys, sc, cert(), opts));
                    } catch (const NoEntryError&) {
                        ++*no_entry_runs;
                    }
                }
            }
        }
        return *stops;
    }
};

using Check = std::function<void(Context&, CriterionResult&)>;

void crit_mesh(Context& ctx, CriterionResult& r) {
    const auto& sys = ctx.systems().front();
    const Mesh& mesh = *sys.mesh();
    const bool valid = validate_mesh(mesh).ok();
    r.passed = valid && mesh.num_triangles() == 512 && mesh.n_dof == 225 && sys.G().rows() == 1024 &&
               sys.G().cols() == 225;
    r.detail = std::to_string(mesh.num_triangles()) + " triangles, " + std::to_string(mesh.n_dof) + " DOFs, G " +
               std::to_string(sys.G().rows()) + "x" + std::to_string(sys.G().cols()) +
               (valid ? "" : ", mesh validation failed");
}

void crit_gram(Context& ctx, CriterionResult& r) {
    const Mesh mesh = build_uniform_mesh(16);
    SparseMatrix g = ctx.options.gram_dump ? read_matrix_market(*ctx.options.gram_dump)
                                           : ctx.systems().front().G();
    const CriterionResult inner = check_gram_identity(g, mesh, ctx.options.seed);
    r.passed = inner.passed;
    r.detail = (ctx.options.gram_dump ? "dump " + ctx.options.gram_dump->filename().string() + ": " : "") +
               inner.detail;
}

void crit_spectral(Context&, CriterionResult& r) {
    std::vector<SpectralSummary> s;
    for (int n : {4, 8, 16}) s.push_back(case_systems(n, {"I"}).front().spectral());
    double smin = s[0].sigma_min_G, smax = s[0].sigma_min_G;
    for (const auto& x : s) {
        smin = std::min(smin, x.sigma_min_G);
        smax = std::max(smax, x.sigma_min_G);
    }
    const double spread = (smax - smin) / smin;
    const double g1 = s[1].norm_G / s[0].norm_G, g2 = s[2].norm_G / s[1].norm_G;
    const double k1 = s[1].kappa_A / s[0].kappa_A, k2 = s[2].kappa_A / s[1].kappa_A;
    auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    r.passed = spread < 0.10 && in(g1, 1.8, 2.2) && in(g2, 1.8, 2.2) && in(k1, 3.5, 4.5) && in(k2, 3.5, 4.5);
    r.detail = "sigma_min spread " + num(spread) + ", ||G|| ratios " + num(g1) + "/" + num(g2) + ", kappa ratios " +
               num(k1) + "/" + num(k2);
}

void crit_convergence(Context&, CriterionResult& r) {
    const double e8 = manufactured_discrete_error(8), e16 = manufactured_discrete_error(16),
                 e32 = manufactured_discrete_error(32);
    const double q1 = e8 / e16, q2 = e16 / e32;
    r.passed = q1 >= 3.3 && q1 <= 4.7 && q2 >= 3.3 && q2 <= 4.7;
    const double c8 = manufactured_l2_error(8), c16 = manufactured_l2_error(16), c32 = manufactured_l2_error(32);
    r.detail = "discrete L2 errors " + num(e8) + ", " + num(e16) + ", " + num(e32) + "; ratios " + num(q1) + ", " +
               num(q2) + " (continuous L2 ratios " + num(c8 / c16) + ", " + num(c16 / c32) + ")";
}

void crit_invariant(Context& ctx, CriterionResult& r) {
    double worst = 0.0;
    for (const auto& c : ctx.sweep().curves) worst = std::max(worst, c.max_invariant);
    r.passed = worst <= 1e-11;
    r.detail = "max relative invariant defect " + num(worst) + " over every step to T=" + num(ctx.sweep().horizon);
}

void crit_integrator(Context& ctx, CriterionResult& r) {
    const EllipticSystem& sys = ctx.systems()[2];
    const RelaxState z0 = init_cold(sys);
    const Vector exact = dense_expm_apply(dense_joint_generator(sys), 10.0, pack(z0));
    EvolveOptions ev;
    ev.theta = ctx.theta();
    const RelaxState end = evolve(sys, z0, 10.0, ev);
    const double rel = (pack(end) - exact).norm() / exact.norm();
    r.passed = rel <= 1e-7;
    r.detail = "case III, T=10, theta=" + num(ev.theta) + ": relative deviation " + num(rel);
}

void crit_certificate(Context& ctx, CriterionResult& r) {
    std::vector<double> c_st;
    std::ostringstream d;
    bool ok = true;
    for (int n : {4, 8, 16}) {
        const auto systems = n == 16 ? ctx.systems() : case_systems(n, {"I"});
        const StabilityCertificate cert = n == 16 ? ctx.cert() : certify(systems.front());
        const TimeSweep& sweep = n == 16 ? ctx.sweep() : ctx.small_sweep(n);
        double worst_ratio = 0.0;
        for (const auto& curve : sweep.curves) {
            const double w0 = curve.states.front().norm_w();
            for (const auto& z : curve.states) {
                const double bound = cert.C_st * std::exp(-cert.c_st * z.t) * w0;
                worst_ratio = std::max(worst_ratio, z.norm_w() / bound);
            }
        }
        const DecayFit fit = empirical_decay(systems.front(), 40.0, 161);
        ok = ok && worst_ratio <= 1.0 + 1e-12 && fit.c_hat >= cert.c_st;
        c_st.push_back(cert.c_st);
        d << "n=" << n << ": max ||w||/bound " << num(worst_ratio) << ", c_hat " << num(fit.c_hat) << " vs c_st "
          << num(cert.c_st) << "; ";
    }
    const auto [lo, hi] = std::minmax_element(c_st.begin(), c_st.end());
    const double spread = (*hi - *lo) / *lo;
    r.passed = ok && spread < 0.15;
    d << "c_st spread " << num(spread);
    r.detail = d.str();
}

void crit_lyapunov(Context& ctx, CriterionResult& r) {
    double violation = -1e300, margin = 1e300;
    std::size_t snaps = 0;
    for (std::size_t c = 0; c < kCases.size(); ++c) {
        const MonitorReport m = lyapunov_monitor(ctx.systems()[c], ctx.cert(), ctx.sweep().curves[c].states);
        violation = std::max(violation, m.max_violation);
        margin = std::min(margin, m.min_equivalence_margin);
        snaps += m.snapshots;
    }
    r.passed = violation <= 1e-6 && margin >= -1e-12;
    r.detail = std::to_string(snaps) + " snapshots: max dE/dt + c0||w||^2 = " + num(violation) +
               ", min equivalence margin " + num(margin);
}

void crit_tail(Context& ctx, CriterionResult& r) {
    // late samples reach the rounding floor of the reference solution, where
    // neither side of the inequality is resolvable; allow 1e-12 ||x_*|| there
    double worst = 0.0;
    std::size_t count = 0, floor_hits = 0;
    bool ok = true;
    for (std::size_t c = 0; c < kCases.size(); ++c) {
        const EllipticSystem& sys = ctx.systems()[c];
        const Vector ref = direct_solve(sys, sys.b());
        const double allowance = 1e-12 * ref.norm();
        for (const auto& z : ctx.sweep().curves[c].states) {
            const double err = (ref - z.x).norm();
            const double bound = ctx.cert().C_tail * z.norm_w();
            ++count;
            ok = ok && err <= bound + allowance;
            if (err <= allowance) {
                ++floor_hits;
                continue;
            }
            worst = std::max(worst, err / bound);
        }
    }
    r.passed = count > 0 && ok && worst <= 1.0;
    r.detail = std::to_string(count) + " samples: max ||x_* - x|| / (C_tail ||w||) = " + num(worst) + " (" +
               std::to_string(floor_hits) + " samples at the 1e-12 rounding floor)";
}

void crit_stopping(Context& ctx, CriterionResult& r) {
    const auto& runs = ctx.stopping_runs();
    std::size_t total = 0, bad = 0, false_accepts = 0;
    double worst = 0.0;
    for (const auto& [label, list] : runs) {
        for (const auto& s : list) {
            ++total;
            worst = std::max(worst, s.final_rel_err);
            if (s.final_rel_err > kEps) ++bad;
            if (s.false_accept) ++false_accepts;
        }
    }
    const std::size_t attempted = total + *ctx.no_entry_runs;
    const double rate = attempted ? static_cast<double>(false_accepts) / static_cast<double>(attempted) : 1.0;
    r.passed = *ctx.no_entry_runs == 0 && bad == 0 && rate <= 0.01;
    r.detail = std::to_string(attempted) + " runs, " + std::to_string(*ctx.no_entry_runs) + " without entry, max error " +
               num(worst) + ", false-accept rate " + num(rate);
}

void crit_end_state(Context& ctx, CriterionResult& r) {
    const double cap = 2.0 * kEps * kEps / (ctx.cert().C_tail * ctx.cert().C_tail) + 1e-8;
    double worst_p = 0.0, min_px = 1.0;
    std::size_t count = 0;
    for (const auto& [label, list] : ctx.stopping_runs()) {
        for (const auto& s : list) {
            worst_p = std::max(worst_p, s.p_res_final);
            min_px = std::min(min_px, s.p_x_final);
            ++count;
        }
    }
    r.passed = count > 0 && worst_p <= cap && min_px >= 1.0 - 10.0 * kEps * kEps;
    r.detail = std::to_string(count) + " accepted runs: max p_res " + num(worst_p) + " (cap " + num(cap) +
               "), min p_x " + num(min_px);
}

void crit_instance(Context& ctx, CriterionResult& r) {
    const auto& systems = ctx.systems();
    const SpectralBasis basis = spectral_basis(systems.front());
    std::vector<SweepCase> cases;
    for (std::size_t c = 0; c < kCases.size(); ++c) {
        cases.push_back({kCases[c], systems[c].b(), direct_solve(systems[c], systems[c].b())});
    }
    const DegreeSweep ds = degree_sweep(basis, cases, kEps);
    const TimeSweep& ts = ctx.sweep();

    bool ok = true;
    std::ostringstream d;
    d << "degree crossings";
    for (const auto& c : ds.curves) {
        d << ' ' << c.label << '=' << (c.crossing_degree ? std::to_string(*c.crossing_degree) : "none");
        ok = ok && c.crossing_degree && *c.crossing_degree <= ds.d_wc;
    }
    d << " (d_wc " << ds.d_wc << "); time crossings";
    for (const auto& c : ts.curves) {
        d << ' ' << c.label << '=' << (c.crossing_time ? num(*c.crossing_time) : "none") << "/" << num(c.T_wc);
        ok = ok && c.crossing_time && *c.crossing_time <= c.T_wc;
    }
    if (ok) {
        auto deg = [&](std::size_t i) { return *ds.curves[i].crossing_degree; };
        auto tim = [&](std::size_t i) { return *ts.curves[i].crossing_time; };
        const bool deg_order = deg(0) <= deg(1) && deg(1) <= deg(2);
        const bool time_order = tim(0) <= tim(1) && tim(1) <= tim(2);
        if (!deg_order) d << "; degree ordering I<=II<=III violated";
        if (!time_order) d << "; time ordering I<=II<=III violated";
        ok = deg_order && time_order;
    }
    double worst_gap = 1e300;
    const auto& runs = ctx.stopping_runs().at("I");
    for (const auto& s : runs) worst_gap = std::min(worst_gap, s.T_worst - s.T_star);
    const bool saving = !runs.empty() && worst_gap > 0.0;
    d << "; case I min(T_worst - T_star) " << (runs.empty() ? std::string("n/a") : num(worst_gap));
    r.passed = ok && saving;
    r.detail = d.str();
}

void crit_warm(Context& ctx, CriterionResult& r) {
    const EllipticSystem& sys = ctx.systems().front();
    const Vector x = direct_solve(sys, sys.b());
    const Vector q = spmv(sys.G(), x);
    DynamicSolveOptions opts;
    opts.initial = init_warm(sys, x, q);
    opts.evolve.theta = ctx.theta();
    opts.reference = x;
    const StoppingConfig sc = default_stopping_config(ctx.cert(), kEps, ctx.options.seed);
    try {
        const SolveResult s = run_dynamic_solve(sys, sc, ctx.cert(), opts);
        const bool first = s.checkpoint_log.size() == 1 && s.checkpoint_log.front().accepted;
        r.passed = first && s.final_rel_err <= 1e-10;
        r.detail = std::string(first ? "accepted at the first checkpoint" : "first checkpoint rejected") +
                   ", final relative error " + num(s.final_rel_err);
    } catch (const NoEntryError& e) {
        r.passed = false;
        r.detail = e.what();
    }
}

std::map<std::string, std::string> slurp_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".csv") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        files[entry.path().filename().string()] =
            std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return files;
}

void crit_reproducible(Context& ctx, CriterionResult& r) {
    std::vector<std::map<std::string, std::string>> outputs;
    for (const char* run : {"run_a", "run_b"}) {
        const fs::path dir = ctx.options.work_dir / run;
        fs::remove_all(dir);
        RunConfig c;
        c.n = 8;
        c.rhs = "I";
        c.seed = ctx.options.seed;
        c.theta = ctx.theta();
        c.out = dir;
        c.t_max = 5.0;
        std::ostringstream sink;
        const int stop = cmd_stop(c, sink);
        const int relax = cmd_relax(c, sink);
        if (stop != 0 || relax != 0) {
            r.passed = false;
            r.detail = "command failed: " + sink.str();
            return;
        }
        outputs.push_back(slurp_dir(dir));
    }
    std::size_t differing = 0;
    for (const auto& [name, bytes] : outputs[0]) {
        auto it = outputs[1].find(name);
        if (it == outputs[1].end() || it->second != bytes) ++differing;
    }
    r.passed = !outputs[0].empty() && differing == 0 && outputs[0].size() == outputs[1].size();
    r.detail = std::to_string(outputs[0].size()) + " CSV files compared, " + std::to_string(differing) + " differ";
}

struct Entry {
    int id;
    const char* name;
    Check check;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {1, "mesh and DOF counts", crit_mesh},
        {2, "Gram identity", crit_gram},
        {3, "spectral scaling", crit_spectral},
        {4, "FEM convergence", crit_convergence},
        {5, "linear invariant", crit_invariant},
        {6, "integrator fidelity", crit_integrator},
        {7, "certificate soundness", crit_certificate},
        {8, "Lyapunov monitor", crit_lyapunov},
        {9, "tail bound", crit_tail},
        {10, "dynamic stopping guarantee", crit_stopping},
        {11, "end-state quality", crit_end_state},
        {12, "instance dependence", crit_instance},
        {13, "warm start", crit_warm},
        {14, "reproducibility", crit_reproducible},
    };
    return entries;
}

}  // namespace

double reference_normalized_stiffness(const Mesh& mesh, std::size_t i, std::size_t j) {
    const auto nodes = dof_nodes(mesh);
    if (i >= nodes.size() || j >= nodes.size()) throw InvalidParameter("reference stiffness: DOF out of range");
    const std::size_t vi = nodes[i], vj = nodes[j];
    double k = 0.0, mi = 0.0, mj = 0.0;
    for (const auto& tri : mesh.triangles) {
        const Point& p0 = mesh.nodes[tri[0]];
        const Point& p1 = mesh.nodes[tri[1]];
        const Point& p2 = mesh.nodes[tri[2]];
        const double area = triangle_area(p0, p1, p2);
        const double cots[3] = {cot_at(p0, p1, p2), cot_at(p1, p2, p0), cot_at(p2, p0, p1)};
        int a = -1, b = -1;
        for (int l = 0; l < 3; ++l) {
            if (tri[static_cast<std::size_t>(l)] == vi) a = l;
            if (tri[static_cast<std::size_t>(l)] == vj) b = l;
        }
        if (a >= 0) mi += area / 3.0;
        if (b >= 0) mj += area / 3.0;
        if (a < 0 || b < 0) continue;
        if (a == b) {
            k += 0.5 * (cots[(a + 1) % 3] + cots[(a + 2) % 3]);
        } else {
            k -= 0.5 * cots[3 - a - b];
        }
    }
    return k / std::sqrt(mi * mj);
}

CriterionResult check_gram_identity(const SparseMatrix& g, const Mesh& mesh, std::uint64_t seed,
                                    std::size_t samples) {
    CriterionResult r;
    r.id = 2;
    r.name = "Gram identity";
    if (g.cols() != mesh.n_dof || g.rows() != 2 * mesh.num_triangles() || !g.well_formed()) {
        r.detail = "G has shape " + std::to_string(g.rows()) + "x" + std::to_string(g.cols()) +
                   " or a malformed pattern, expected " + std::to_string(2 * mesh.num_triangles()) + "x" +
                   std::to_string(mesh.n_dof);
        return r;
    }
    // neighbours through shared triangles, from the mesh alone
    std::vector<std::set<std::size_t>> adjacent(mesh.n_dof);
    for (const auto& tri : mesh.triangles) {
        for (auto a : tri) {
            for (auto b : tri) {
                if (mesh.interior_index[a] && mesh.interior_index[b]) {
                    adjacent[*mesh.interior_index[a]].insert(*mesh.interior_index[b]);
                }
            }
        }
    }
    const DenseMatrix gd = g.to_dense();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, mesh.n_dof - 1);
    double scale = 0.0;
    for (std::size_t i = 0; i < mesh.n_dof; ++i) {
        scale = std::max(scale, reference_normalized_stiffness(mesh, i, i));
    }
    double worst = 0.0;
    std::size_t failures = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        if (s % 2 == 0) {
            auto it = adjacent[i].begin();
            std::advance(it, static_cast<long>(std::uniform_int_distribution<std::size_t>(0, adjacent[i].size() - 1)(rng)));
            j = *it;
        }
        const double got = gd.col(static_cast<Eigen::Index>(i)).dot(gd.col(static_cast<Eigen::Index>(j)));
        const double want = reference_normalized_stiffness(mesh, i, j);
        const double denom = want != 0.0 ? std::abs(want) : scale;
        const double rel = std::abs(got - want) / denom;
        worst = std::max(worst, rel);
        if (!(rel <= 1e-12)) ++failures;
    }
    r.passed = failures == 0;
    r.detail = std::to_string(samples) + " entries, max relative deviation " + num(worst) +
               (failures ? ", " + std::to_string(failures) + " mismatches" : "");
    return r;
}

double manufactured_discrete_error(int n) {
    const auto sys = case_systems(n, {"manufactured"}).front();
    const Vector x = direct_solve(sys, sys.b());
    return (x - interpolate_normalized(sys, manufactured_solution)).norm();
}

double manufactured_l2_error(int n) {
    const auto sys = case_systems(n, {"manufactured"}).front();
    const Mesh& mesh = *sys.mesh();
    const Vector x = direct_solve(sys, sys.b());
    std::vector<double> nodal(mesh.nodes.size(), 0.0);
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
        if (const auto dof = mesh.interior_index[v]) {
            const auto k = static_cast<Eigen::Index>(*dof);
            nodal[v] = x[k] * sys.mass_sqrt_inv()[k];
        }
    }
    // degree-5 rule on the reference triangle (barycentric points, weights sum to 1)
    const double a1 = 0.059715871789770, b1 = 0.470142064105115;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456;
    const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
    const double pts[7][3] = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                              {a2, b2, b2},                {b2, a2, b2}, {b2, b2, a2}};
    const double wts[7] = {w0, w1, w1, w1, w2, w2, w2};
    double sum = 0.0;
    for (const auto& tri : mesh.triangles) {
        const Point& p0 = mesh.nodes[tri[0]];
        const Point& p1 = mesh.nodes[tri[1]];
        const Point& p2 = mesh.nodes[tri[2]];
        const double area = triangle_area(p0, p1, p2);
        for (int q = 0; q < 7; ++q) {
            const double px = pts[q][0] * p0.x + pts[q][1] * p1.x + pts[q][2] * p2.x;
            const double py = pts[q][0] * p0.y + pts[q][1] * p1.y + pts[q][2] * p2.y;
            const double uh = pts[q][0] * nodal[tri[0]] + pts[q][1] * nodal[tri[1]] + pts[q][2] * nodal[tri[2]];
            const double e = manufactured_solution(px, py) - uh;
            sum += wts[q] * area * e * e;
        }
    }
    return std::sqrt(sum);
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
    Context ctx;
    ctx.options = options;
    std::vector<CriterionResult> results;
    for (const auto& entry : registry()) {
        if (!options.criteria.empty() &&
            std::find(options.criteria.begin(), options.criteria.end(), entry.id) == options.criteria.end()) {
            continue;
        }
        CriterionResult r;
        r.id = entry.id;
        r.name = entry.name;
        const auto start = std::chrono::steady_clock::now();
        try {
            entry.check(ctx, r);
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (options.progress) {
            *options.progress << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " ("
                              << num(r.seconds) << " s)\n" << std::flush;
        }
        results.push_back(std::move(r));
    }
    return results;
}

void write_report_csv(std::ostream& out, const std::vector<CriterionResult>& results) {
    out << "criterion,name,status,detail,seconds\n";
    for (const auto& r : results) {
        std::string detail = r.detail;
        std::replace(detail.begin(), detail.end(), ',', ';');
        out << r.id << ',' << r.name << ',' << (r.passed ? "PASS" : "FAIL") << ',' << detail << ',' << num(r.seconds)
            << '\n';
    }
}

void print_report(std::ostream& out, const std::vector<CriterionResult>& results) {
    for (const auto& r : results) {
        out << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail << '\n';
    }
}

}  // namespace ellq
