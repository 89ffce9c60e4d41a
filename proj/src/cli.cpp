#include "hcd/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcd/harness.hpp"

namespace hcd {

namespace {

constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_artifact(const std::string& output, const std::string& content) {
    if (output.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(output, std::ios::binary);
    if (!out) throw Error("cannot open output file " + output);
    out << content;
}

HPoint parse_point(const std::string& text) {
    std::istringstream in(text);
    HPoint p;
    char c1, c2;
    if (!(in >> p.x >> c1 >> p.y >> c2 >> p.z) || c1 != ',' || c2 != ',')
        throw InvalidSpec("expected point as x,y,z: " + text);
    return p;
}

struct CommonArgs {
    std::string norm = "euclidean";
    std::uint64_t seed = kDefaultSeed;
    long long samples = 0;
    double voxel = 0.0;
    double K = 0.0;
    double N = 5.0;
    double t = -1.0;
    double rho = 0.015625;  // 2^-6
    std::string output;
    std::string format;
};

nlohmann::json config_json(const std::string& command, const CommonArgs& a) {
    return {{"command", command}, {"norm", a.norm},     {"seed", a.seed},
            {"samples", a.samples}, {"voxel", a.voxel}, {"K", a.K},
            {"N", a.N},             {"t", a.t},         {"rho", a.rho},
            {"output", a.output},   {"format", a.format}};
}

int cmd_trig_table(const CommonArgs& a) {
    NormSpec spec = NormSpec::parse(a.norm);
    const ConvexBody body = unit_ball(spec);
    const long long n = a.samples > 0 ? a.samples : 360;
    std::ostringstream csv;
    csv << "theta,cos,sin,psi,residual\n";
    for (long long k = 0; k < n; ++k) {
        const double theta = body.period() * static_cast<double>(k) / static_cast<double>(n);
        const Vec2 p = body.trig_eval(theta);
        double psi = std::nan("");
        double res = std::nan("");
        try {
            psi = correspond(body, theta);
            const Vec2 q = body.polar_body().trig_eval(psi);
            res = std::abs(p.x * q.x + p.y * q.y - 1.0);
        } catch (const CornerAngle&) {
        }
        csv << fmt17(theta) << ',' << fmt17(p.x) << ',' << fmt17(p.y) << ',' << fmt17(psi) << ','
            << fmt17(res) << '\n';
    }
    write_artifact(a.output, csv.str());
    return 0;
}

int cmd_geodesic(const CommonArgs& a, double phi, double omega, double r, double t_max) {
    const Heisenberg H(NormSpec::parse(a.norm));
    const Covector cov{phi, omega, r};
    const long long n = a.samples > 0 ? a.samples : 100;
    std::ostringstream csv;
    csv << "t,x,y,z\n";
    for (long long k = 0; k <= n; ++k) {
        const double t = t_max * static_cast<double>(k) / static_cast<double>(n);
        const HPoint g = H.exp_map(cov, t);
        csv << fmt17(t) << ',' << fmt17(g.x) << ',' << fmt17(g.y) << ',' << fmt17(g.z) << '\n';
    }
    write_artifact(a.output, csv.str());
    return 0;
}

int cmd_distance(const CommonArgs& a, const std::string& p_text, const std::string& q_text) {
    const Heisenberg H(NormSpec::parse(a.norm));
    const HPoint p = parse_point(p_text);
    const HPoint q = parse_point(q_text);
    nlohmann::json j;
    j["config"] = config_json("distance", a);
    j["distance"] = H.distance(p, q);
    write_artifact(a.output, j.dump(2));
    return 0;
}

int cmd_jacobian_scan(const CommonArgs& a, double phi, double omega, double r) {
    const Heisenberg H(NormSpec::parse(a.norm));
    const Covector cov{phi, omega, r};
    const auto grid = dyadic_grid(4, 10);
    std::vector<std::pair<double, double>> j_fit, m1_fit, dzo_fit;
    std::ostringstream csv;
    csv << "t,J,detM1,detM2,detM3,dz_domega,dz_dphi,dz_dr\n";
    for (double t : grid) {
        const JacobianSample s = exp_jacobian(H, cov, t);
        csv << fmt17(t) << ',' << fmt17(s.J) << ',' << fmt17(s.detM1) << ',' << fmt17(s.detM2)
            << ',' << fmt17(s.detM3) << ',' << fmt17(s.dz_domega) << ',' << fmt17(s.dz_dphi)
            << ',' << fmt17(s.dz_dr) << '\n';
        j_fit.emplace_back(t, s.J);
        m1_fit.emplace_back(t, std::abs(s.detM1));
        dzo_fit.emplace_back(t, std::abs(s.dz_domega));
    }
    if (a.format == "csv") {
        write_artifact(a.output, csv.str());
        return 0;
    }
    nlohmann::json j;
    j["config"] = config_json("jacobian-scan", a);
    j["slope_J"] = scaling_exponent(j_fit).slope;
    j["slope_detM1"] = scaling_exponent(m1_fit).slope;
    j["slope_dz_domega"] = scaling_exponent(dzo_fit).slope;
    j["csv"] = csv.str();
    write_artifact(a.output, j.dump(2));
    return 0;
}

int cmd_bm(const CommonArgs& a) {
    NormSpec spec = NormSpec::parse(a.norm);
    BmOptions opt;
    if (a.samples > 0) opt.pairs = a.samples;
    const BmExperiment exp(spec, a.rho, a.seed, opt);
    ViolationRecord rec = exp.evaluate(a.K, a.N);
    nlohmann::json j = nlohmann::json::parse(rec.to_json_string());
    j["config"] = config_json("bm-falsify", a);
    write_artifact(a.output, j.dump(2));
    return 0;
}

int cmd_mcp(const CommonArgs& a) {
    NormSpec spec = NormSpec::parse(a.norm);
    const Heisenberg H(spec);
    McpOptions opt;
    if (a.samples > 0) opt.pairs = a.samples;

    nlohmann::json j;
    j["config"] = config_json("mcp-falsify", a);
    if (!flat_parts(H.dual()).empty()) {
        // singular norm: build the witness set from the flat part
        const McpWitness w = mcp_singular_witness(spec, a.seed);
        const double t = a.t > 0.0 ? a.t : 0.5 * w.t0;
        if (!(t < w.t0)) throw WitnessInvalid("requested t is not below the witness t0");
        SetSpec target{witness_set_sampler(H, w, mix_seed(a.seed, 0x31)), w.A_volume.value};
        ViolationRecord rec = mcp_report(spec, identity(), target, t, a.K, a.N, a.seed, opt);
        rec.experiment = "mcp-singular";
        j.update(nlohmann::json::parse(rec.to_json_string()));
        j["witness"] = {{"t0", w.t0},
                        {"phi0", w.phi0},
                        {"phi1", w.phi1},
                        {"rbar", w.rbar},
                        {"eps", w.eps},
                        {"psi0", w.psi0},
                        {"psi1", w.psi1},
                        {"A_volume", w.A_volume.value},
                        {"max_abs_y", w.max_abs_y},
                        {"max_abs_z", w.max_abs_z},
                        {"branch_time", w.branch_time},
                        {"branch_gap_time", w.branch_gap_time},
                        {"branch_gap", w.branch_gap}};
    } else {
        // C1 norm: ball target at distance ~1 from the apex
        IndexRng rng(mix_seed(a.seed, 0x41), 0);
        const Covector cov{rng.uniform(0.0, H.dual().period()), 1.0 + rng.uniform(), 1.0};
        const HPoint center = H.exp_map(cov, 1.0);
        const double radius = 0.1;
        SetSpec target{ball_sampler(center, radius, mix_seed(a.seed, 0x42)),
                       4.0 / 3.0 * 3.141592653589793 * radius * radius * radius};
        const double t = a.t > 0.0 ? a.t : 0.25;
        ViolationRecord rec = mcp_report(spec, identity(), target, t, a.K, a.N, a.seed, opt);
        j.update(nlohmann::json::parse(rec.to_json_string()));
    }
    write_artifact(a.output, j.dump(2));
    return 0;
}

int cmd_contraction(const CommonArgs& a) {
    NormSpec spec = NormSpec::parse(a.norm);
    const Heisenberg H(spec);
    IndexRng rng(mix_seed(a.seed, 0x51), 0);
    const Covector cov{rng.uniform(0.0, H.dual().period()), 1.0 + rng.uniform(), 1.0};
    const HPoint center = H.exp_map(cov, 1.0);
    const double radius = 0.2;
    SetSpec target{ball_sampler(center, radius, mix_seed(a.seed, 0x52)),
                   4.0 / 3.0 * 3.141592653589793 * radius * radius * radius};
    HomothetyOptions opt;
    if (a.samples > 0) opt.pairs = a.samples;
    const ExponentFit fit = homothety_exponent(spec, identity(), target, a.seed, opt);
    nlohmann::json j;
    j["config"] = config_json("contraction", a);
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r2"] = fit.r2;
    j["t_grid"] = fit.t_grid;
    write_artifact(a.output, j.dump(2));
    return 0;
}

int cmd_lemma_check(const CommonArgs& a) {
    auto run_case = [&](const char* name, const std::function<double(double)>& f, double x0,
                        double x1, nlohmann::json& out) {
        std::vector<double> grid;
        for (int i = 0; i < 64; ++i) grid.push_back(0.9 * i / 64.0);
        const AreaChordResult res = area_chord_check(f, x0, x1, grid);
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : res.table)
            rows.push_back({{"s", r.s}, {"a", r.area}, {"d", r.chord}, {"ratio", r.ratio}});
        out[name] = {{"strictly_decreasing", res.strictly_decreasing}, {"table", rows}};
    };
    nlohmann::json j;
    j["config"] = config_json("lemma-check", a);
    run_case("parabola", [](double x) { return 1.0 - x * x; }, -1.0, 1.0, j);
    run_case("cosine", [](double x) { return std::cos(0.5 * 3.141592653589793 * x); }, -1.0, 1.0,
             j);
    run_case("tent", [](double x) { return 1.0 - std::abs(x); }, -1.0, 1.0, j);
    write_artifact(a.output, j.dump(2));
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"sub-Finsler Heisenberg geometry lab"};
    app.require_subcommand(1);

    CommonArgs a;
    double phi = 0.7, omega = 1.3, r = 1.0, t_max = 1.0;
    std::string p_text = "0,0,0", q_text = "1,0,0";

    auto add_common = [&](CLI::App* cmd, const char* default_format) {
        a.format = default_format;
        cmd->add_option("--norm", a.norm, "norm spec: euclidean | lp:<p> | lens:<c>,<R> | table:@<csv>");
        cmd->add_option("--seed", a.seed, "RNG seed (default 0xC0FFEE)");
        cmd->add_option("--samples", a.samples, "sample count override");
        cmd->add_option("--voxel", a.voxel, "voxel size override");
        cmd->add_option("--K", a.K, "curvature bound K");
        cmd->add_option("--N", a.N, "dimension bound N");
        cmd->add_option("--t", a.t, "interpolation parameter t");
        cmd->add_option("--rho", a.rho, "ball radius rho");
        cmd->add_option("--output", a.output, "output file (stdout when omitted)");
        cmd->add_option("--format", a.format, "json | csv")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    auto* trig = app.add_subcommand("trig-table",
                                    "CSV table theta,cos,sin,psi,residual of the norm trig");
    add_common(trig, "csv");
    auto* geo = app.add_subcommand("geodesic", "CSV table t,x,y,z of one geodesic");
    add_common(geo, "csv");
    geo->add_option("--phi", phi, "initial dual angle");
    geo->add_option("--omega", omega, "sweep rate");
    geo->add_option("--r", r, "speed");
    geo->add_option("--t-max", t_max, "horizon");
    auto* dist = app.add_subcommand("distance", "sub-Finsler distance between two points");
    add_common(dist, "json");
    dist->add_option("--p", p_text, "first point x,y,z");
    dist->add_option("--q", q_text, "second point x,y,z");
    auto* jac = app.add_subcommand("jacobian-scan",
                                   "CSV scan t,J,detM1,detM2,detM3,dz_domega,dz_dphi,dz_dr plus "
                                   "fitted slopes (json)");
    add_common(jac, "json");
    jac->add_option("--phi", phi, "dual angle");
    jac->add_option("--omega", omega, "sweep rate");
    jac->add_option("--r", r, "speed");
    auto* bm = app.add_subcommand("bm-falsify", "Brunn-Minkowski violation report");
    add_common(bm, "json");
    auto* mcp = app.add_subcommand("mcp-falsify", "measure contraction property report");
    add_common(mcp, "json");
    auto* contr = app.add_subcommand("contraction", "geodesic homothety volume exponent");
    add_common(contr, "json");
    auto* lemma = app.add_subcommand("lemma-check", "area/chord^2 monotonicity oracle");
    add_common(lemma, "json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (trig->parsed()) return cmd_trig_table(a);
        if (geo->parsed()) return cmd_geodesic(a, phi, omega, r, t_max);
        if (dist->parsed()) return cmd_distance(a, p_text, q_text);
        if (jac->parsed()) return cmd_jacobian_scan(a, phi, omega, r);
        if (bm->parsed()) return cmd_bm(a);
        if (mcp->parsed()) return cmd_mcp(a);
        if (contr->parsed()) return cmd_contraction(a);
        if (lemma->parsed()) return cmd_lemma_check(a);
    } catch (const InvalidSpec& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 2;
}

}  // namespace hcd
