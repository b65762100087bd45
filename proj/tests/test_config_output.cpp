#include "ellq/config.hpp"
#include "ellq/csv.hpp"
#include "ellq/error.hpp"
#include "ellq/experiments.hpp"
#include "ellq/svg.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace ellq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ellq_output_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("config text parsing") {
    const auto kv = parse_config_text("# header\n n = 8 \n\nrhs=III # trailing\neps = 1e-4\n   \n");
    CHECK(kv.size() == 3);
    CHECK(kv.at("n") == "8");
    CHECK(kv.at("rhs") == "III");
    CHECK(kv.at("eps") == "1e-4");

    CHECK_THROWS_AS((void)parse_config_text("n 8\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text(" = 3\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("n = 4\nn = 8\n"), ConfigError);
    CHECK_THROWS_AS((void)read_config_file(scratch("missing.cfg")), ConfigError);

    write_text(scratch("a.cfg"), "seed = 9\nt_max = 3.5\n");
    const auto file = read_config_file(scratch("a.cfg"));
    CHECK(file.at("seed") == "9");
}

TEST_CASE("settings and validation") {
    RunConfig c;
    CHECK(c.mesh_n() == 16);
    CHECK(c.theta == kDefaultTheta);
    apply_setting(c, "n", "8");
    apply_setting(c, "t_max", "2.5");
    apply_setting(c, "t-max", "3");
    apply_setting(c, "k_max", "6");
    apply_setting(c, "epsilon", "0.01");
    apply_setting(c, "shots", "500");
    apply_setting(c, "cases", " I, III ,");
    apply_setting(c, "criteria", "2,14");
    apply_setting(c, "out", "results");
    CHECK(c.mesh_n() == 8);
    CHECK(*c.t_max == 3.0);
    CHECK(c.k_max == 6);
    CHECK(c.epsilon == 0.01);
    CHECK(*c.shots == 500);
    CHECK(c.cases == std::vector<std::string>{"I", "III"});
    CHECK(c.criteria == std::vector<int>{2, 14});
    CHECK(c.out == fs::path("results"));
    CHECK_NOTHROW(validate(c));

    CHECK_THROWS_AS(apply_setting(c, "colour", "red"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "n", "8.5"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "seed", "-1"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "eps", "small"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "theta", "0.5x"), ConfigError);

    auto rejects = [](const std::string& key, const std::string& value) {
        RunConfig r;
        apply_setting(r, key, value);
        CHECK_THROWS_AS(validate(r), ConfigError);
    };
    rejects("n", "1");
    rejects("eps", "0");
    rejects("eps", "1");
    rejects("p0", "1.5");
    rejects("shots", "0");
    rejects("t-max", "-1");
    rejects("theta", "0");
    rejects("theta", "1.01");
    rejects("nu", "1");
    rejects("growth", "1");
    rejects("k-max", "0");
    rejects("t0", "0");
    rejects("criteria", "15");
}

TEST_CASE("stopping parameters from a run config") {
    const EllipticSystem sys = case_systems(4, {"I"}).front();
    const StabilityCertificate cert = certify(sys);
    RunConfig c;
    c.seed = 5;
    const StoppingConfig d = stopping_config_for(c, cert);
    const StoppingConfig lib = default_stopping_config(cert, c.epsilon, 5);
    CHECK(d.p0 == lib.p0);
    CHECK(d.N_shot == lib.N_shot);
    CHECK(d.seed == 5);

    c.p0 = 0.01;
    c.k_max = 4;
    c.nu = 0.05;
    c.t0 = 0.25;
    c.growth = 3.0;
    const StoppingConfig o = stopping_config_for(c, cert);
    CHECK(o.p0 == 0.01);
    CHECK(o.K_max == 4);
    CHECK(o.t0 == 0.25);
    CHECK(o.growth == 3.0);
    CHECK(o.N_shot == shots_for_buffer(4, 0.05, 0.005));
    c.shots = 77;
    CHECK(stopping_config_for(c, cert).N_shot == 77);
}

TEST_CASE("csv reading") {
    CHECK(split_csv_line("a,,b,") == std::vector<std::string>{"a", "", "b", ""});
    CHECK(split_csv_line("") == std::vector<std::string>{""});
    write_text(scratch("t.csv"), "case,t,rel_err\nI,0,1\n\nI,0.5,\n");
    const CsvTable t = read_csv(scratch("t.csv"));
    CHECK(t.header.size() == 3);
    CHECK(t.rows.size() == 2);
    CHECK(t.column("t") == 1);
    CHECK_THROWS_AS((void)t.column("nope"), InvalidParameter);
    const auto err = t.numbers("rel_err");
    CHECK(err[0] == 1.0);
    CHECK_FALSE(err[1].has_value());
    CHECK(t.strings("case") == std::vector<std::string>{"I", "I"});
    CHECK_THROWS_AS((void)read_csv(scratch("absent.csv")), InvalidParameter);
}

TEST_CASE("svg rendering") {
    PlotSpec spec;
    spec.title = "a < b & c";
    spec.log_y = true;
    spec.series.push_back({"curve", {0, 1, 2, 3}, {1, 0.1, std::numeric_limits<double>::quiet_NaN(), 0.001}});
    spec.series.push_back({"other", {0, 3}, {1, 1e-2}, LineStyle::dotted, true});
    spec.bands.push_back({"band", {0, 1}, {0.5, 0.05}, {2, 0.2}});
    spec.vertical.push_back({"worst", 2.5, LineStyle::dashed});
    spec.vertical.push_back({"latest", 1.5, LineStyle::dashdot});
    spec.horizontal.push_back({"eps", 1e-3, LineStyle::dotted});
    const std::string svg = render_svg(spec);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
    CHECK(svg.find("a < b") == std::string::npos);
    // NaN breaks the first curve into two pieces
    const auto first = svg.find("<path d=\"");
    const auto end = svg.find('"', first + 9);
    CHECK(count(svg.substr(first, end - first), "M") == 2);
    CHECK(count(svg, "<circle") == 2);
    CHECK(count(svg, "<polygon") == 1);
    CHECK(svg.find("stroke-dasharray=\"8,5\"") != std::string::npos);
    CHECK(svg.find("stroke-dasharray=\"9,4,2,4\"") != std::string::npos);
    CHECK(svg.find(">worst<") != std::string::npos);
    CHECK(render_svg(spec) == svg);

    PlotSpec empty;
    CHECK_NOTHROW((void)render_svg(empty));
}

TEST_CASE("time sweep crossings") {
    const std::vector<std::string> labels = {"I", "III"};
    const auto systems = case_systems(4, labels);
    const StabilityCertificate cert = certify(systems[0]);
    TimeSweepOptions opt;
    opt.horizon = 30.0;
    opt.samples = 50;
    opt.track_invariant = true;
    opt.kept_states = 5;
    const TimeSweep sweep = time_sweep(systems, labels, cert, 1e-3, opt);
    CHECK(sweep.horizon == 30.0);
    REQUIRE(sweep.curves.size() == 2);
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& curve = sweep.curves[c];
        const Vector xs = direct_solve(systems[c], systems[c].b());
        CHECK(curve.gamma_b == doctest::Approx(systems[c].b().norm() / xs.norm()));
        CHECK(curve.T_wc == doctest::Approx(worst_case_time(cert, curve.gamma_b, 1e-3)));
        CHECK(curve.max_invariant <= 1e-12);
        CHECK(curve.states.size() >= 5);
        CHECK(curve.states.size() <= 6);
        CHECK(curve.states.front().t == 0.0);
        REQUIRE(curve.crossing_time.has_value());
        CHECK(*curve.crossing_time <= curve.T_wc);
        for (std::size_t i = 0; i < curve.t.size(); ++i) {
            if (curve.t[i] >= *curve.crossing_time) CHECK(curve.rel_err[i] <= 1e-3);
        }
        // independent check: just before the crossing the error is still above eps
        const RelaxState before = evolve(systems[c], init_cold(systems[c]),
                                         *curve.crossing_time - step_size(systems[c], opt.evolve.theta) * 1.5);
        CHECK((before.x - xs).norm() / xs.norm() > 1e-3);
    }

    std::ostringstream rows, summary;
    write_time_sweep_csv(rows, sweep);
    write_time_summary_csv(summary, sweep);
    CHECK(rows.str().rfind("case,t,rel_err\nI,0,1\n", 0) == 0);
    CHECK(summary.str().rfind("case,crossing_time,T_wc\nI,", 0) == 0);

    const TimeSweep none = time_sweep({}, {}, cert, 1e-3, opt);
    std::ostringstream empty;
    write_time_sweep_csv(empty, none);
    CHECK(empty.str() == "case,t,rel_err\n");
}

TEST_CASE("figures are functions of the csv files") {
    const fs::path rows = scratch("time.csv"), summary = scratch("time_summary.csv");
    write_text(rows, "case,t,rel_err\nI,0,1\nI,1,1e-2\nI,2,1e-4\nIII,0,1\nIII,1,1e-1\nIII,2,1e-3\n");
    write_text(summary, "case,crossing_time,T_wc\nI,1.5,3\nIII,2,4\n");
    const std::string a = render_time_svg(rows, summary, 1e-3);
    CHECK(a == render_time_svg(rows, summary, 1e-3));
    CHECK(a.find("stroke-dasharray=\"8,5\"") != std::string::npos);      // worst-case line
    CHECK(a.find("stroke-dasharray=\"9,4,2,4\"") != std::string::npos);  // latest crossing
    write_text(rows, "case,t,rel_err\nI,0,1\nI,1,1e-2\nI,2,1e-5\nIII,0,1\nIII,1,1e-1\nIII,2,1e-3\n");
    CHECK(render_time_svg(rows, summary, 1e-3) != a);

    const fs::path deg = scratch("deg.csv"), deg_sum = scratch("deg_summary.csv");
    write_text(deg, "case,degree,state_err\nI,0,0.5\nI,1,1e-4\n");
    write_text(deg_sum, "case,crossing_degree,d_wc\nI,1,40\n");
    CHECK(render_degree_svg(deg, deg_sum, 1e-3).find("</svg>") != std::string::npos);
}
