// gevrey_onset: command-line front end.
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <thread>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "CLI11.hpp"
#include "gevrey/gevrey.hpp"

using namespace gevrey;
using io::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level()
{
    const char* v = std::getenv("GEVREY_ONSET_LOG");
    if (!v) return LogLevel::quiet;
    const std::string s(v);
    if (s == "debug" || s == "2") return LogLevel::debug;
    if (s == "info" || s == "1") return LogLevel::info;
    return LogLevel::quiet;
}

void log(LogLevel at, const std::string& msg)
{
    if (static_cast<int>(log_level()) >= static_cast<int>(at)) std::cerr << "[gevrey_onset] " << msg << '\n';
}

struct Options {
    std::string command;
    std::string config_path;
    std::string out = "out";
    int workers = 1;
    std::uint64_t seed = 12345;
    // flag overrides; empty means "not given"
    std::string system, kase, delta, what_if;
    int k = 0;
    double alpha = NAN;
};

// defaults per command, then the config file, then flags
json defaults(const std::string& cmd)
{
    if (cmd == "classify" || cmd == "normal-form") return {{"system", ""}, {"tol", 1e-9}, {"conjugations", 20}};
    if (cmd == "propagate")
        return {{"case", "airy"}, {"gamma0", 1.0}, {"eps", 1e-3}, {"modes", {1, 2, 3}}, {"s_max", 10.0}, {"samples", 101}};
    if (cmd == "airy-bench")
        return {{"modes", {1, -1, 3, -3}}, {"eps", {1e-2, 1e-3}}, {"gamma0", 1.0}, {"samples", 81}, {"rtol", 1e-12}};
    if (cmd == "solve")
        return {{"case", "smooth"}, {"system", ""},  {"delta", "1/5"}, {"eps", 1e-4},
                {"gamma0", 1.0},    {"nmax", 4},     {"K", 6},         {"S", 257},
                {"sigma", 0.05},    {"alpha", 1.0},  {"max_iter", 50}, {"tol", 1e-10},
                {"override_feasibility", false}};
    if (cmd == "plan") return {{"case", "smooth"}, {"delta", "1/5"}, {"k", 4}, {"what_if", "none"}};
    if (cmd == "demo-vdw") return {{"pprime", {-0.01, 0.0, 1.0}}, {"range", {-1.0, 1.0}}, {"speed", 1.0}, {"samples", 401}};
    throw Error(ErrorCode::argument, "unknown command " + cmd);
}

json resolve_config(const Options& o)
{
    json cfg = defaults(o.command);
    if (!o.config_path.empty()) {
        const json file = io::read_json(o.config_path);
        if (!file.is_object()) throw Error(ErrorCode::io, "config must be a JSON object");
        for (const auto& [key, value] : file.items()) {
            if (!cfg.contains(key)) throw Error(ErrorCode::argument, "unknown config key '" + key + "' for " + o.command);
            if (cfg[key].type() != value.type() && !(cfg[key].is_number() && value.is_number()))
                throw Error(ErrorCode::argument, "config key '" + key + "' has the wrong type");
            cfg[key] = value;
        }
    }
    if (!o.system.empty() && cfg.contains("system")) cfg["system"] = o.system;
    if (!o.kase.empty() && cfg.contains("case")) cfg["case"] = o.kase;
    if (!o.delta.empty() && cfg.contains("delta")) cfg["delta"] = o.delta;
    if (!o.what_if.empty() && cfg.contains("what_if")) cfg["what_if"] = o.what_if;
    if (o.k != 0 && cfg.contains("k")) cfg["k"] = o.k;
    if (!std::isnan(o.alpha) && cfg.contains("alpha")) cfg["alpha"] = o.alpha;
    return cfg;
}

PlanCase plan_case(const std::string& s)
{
    if (s == "smooth") return PlanCase::smooth;
    if (s == "airy") return PlanCase::airy;
    throw Error(ErrorCode::argument, "case must be smooth or airy");
}

WhatIf what_if(const std::string& s)
{
    for (WhatIf w : {WhatIf::none, WhatIf::drop_s2, WhatIf::zero_remainder, WhatIf::strict_airy})
        if (s == to_string(w)) return w;
    throw Error(ErrorCode::argument, "unknown what-if mode '" + s + "'");
}

std::string require_system(const json& cfg)
{
    const std::string p = cfg.at("system").get<std::string>();
    if (p.empty()) throw Error(ErrorCode::argument, "a system file is required (--system)");
    return p;
}

struct Run {
    const Options& opt;
    json cfg;
    std::vector<std::string> outputs;

    fs::path path(const std::string& name) const { return fs::path(opt.out) / name; }
    void json_out(const std::string& name, const json& j)
    {
        io::write_json(path(name).string(), j);
        outputs.push_back(name);
    }
    void csv_out(const std::string& name, const io::CsvWriter& w)
    {
        w.save(path(name).string());
        outputs.push_back(name);
    }
};

// random constant conjugations: Delta must not move
json conjugation_check(const QuasilinearSystem& sys, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    const auto D = discriminant(sys.A);
    double worst = 0;
    int done = 0;
    while (done < count) {
        Mat2 q{{{u(rng), u(rng)}, {u(rng), u(rng)}}};
        if (std::abs(q[0][0] * q[1][1] - q[0][1] * q[1][0]) < 0.2) continue;
        const auto Q = TaylorSymbol::constant(q, sys.d, sys.A.truncation(), sys.A.e[0].nz());
        worst = std::max(worst, (discriminant(Q.inverse() * sys.A * Q) - D).max_abs());
        ++done;
    }
    return {{"count", count}, {"seed", seed}, {"max_discriminant_change", worst}};
}

int cmd_classify(Run& r)
{
    const auto sys = io::load_system(require_system(r.cfg));
    const double tol = r.cfg.at("tol").get<double>();
    json out;
    try {
        out["classification"] = io::classification_to_json(classify_transition(sys, tol));
    } catch (const Error& e) {
        // a definite negative answer is a result, not a failure
        if (e.code() != ErrorCode::initially_elliptic && e.code() != ErrorCode::odd_degeneracy) throw;
        out["classification"] = {{"kind", to_string(e.code())}, {"message", e.what()}};
    }
    out["assumptions"] = io::diagnostics_to_json(check_assumptions(sys, tol));
    out["conjugation_check"] = conjugation_check(sys, r.cfg.at("conjugations").get<int>(), r.opt.seed);
    r.json_out("classification.json", out);
    std::cout << out["classification"]["kind"].get<std::string>() << '\n';
    return 0;
}

int cmd_normal_form(Run& r)
{
    const auto sys = io::load_system(require_system(r.cfg));
    const double tol = r.cfg.at("tol").get<double>();
    const auto cls = classify_transition(sys, tol);
    const auto nf = normal_form(sys, cls, tol);
    json out;
    out["classification"] = io::classification_to_json(cls);
    out["normal_form"] = io::normal_form_to_json(nf);
    out["residual_is_zero"] = residual_is_zero(nf);
    out["remainder"] = io::remainder_to_json(remainder_expansion(sys, nf));
    r.json_out("normal_form.json", out);
    std::cout << to_string(nf.kind) << '\n';
    return 0;
}

int cmd_propagate(Run& r)
{
    const std::string kase = r.cfg.at("case").get<std::string>();
    const FlowCase kind = plan_case(kase) == PlanCase::smooth ? FlowCase::smooth : FlowCase::airy;
    const double gamma0 = r.cfg.at("gamma0").get<double>(), eps = r.cfg.at("eps").get<double>();
    const double smax = r.cfg.at("s_max").get<double>();
    const int samples = r.cfg.at("samples").get<int>();
    const auto modes = r.cfg.at("modes").get<std::vector<int>>();
    if (samples < 2 || !(smax > 0)) throw Error(ErrorCode::argument, "need samples >= 2 and s_max > 0");
    std::vector<double> grid;
    for (int i = 0; i < samples; ++i) grid.push_back(smax * i / (samples - 1));

    // one slot per mode; workers fill disjoint slots so the output order is fixed
    std::vector<std::vector<ScaledMatrix>> flows(modes.size());
    std::vector<std::string> errors(modes.size());
    auto work = [&](std::size_t w) {
        for (std::size_t m = w; m < modes.size(); m += static_cast<std::size_t>(r.opt.workers)) {
            try {
                ModePropagator U{kind, modes[m], gamma0, eps};
                for (double s : grid) flows[m].push_back(U(0.0, s));
            } catch (const std::exception& e) {
                errors[m] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < r.opt.workers; ++w) pool.emplace_back(work, static_cast<std::size_t>(w));
    work(0);
    for (auto& t : pool) t.join();
    for (std::size_t m = 0; m < modes.size(); ++m)
        if (!errors[m].empty()) throw Error(ErrorCode::numeric, "mode " + std::to_string(modes[m]) + ": " + errors[m]);

    io::CsvWriter w({"n", "s", "log_scale", "re00", "im00", "re01", "im01", "re10", "im10", "re11", "im11"});
    json fits = json::array();
    for (std::size_t m = 0; m < modes.size(); ++m) {
        GrowthTrace tr{kind, modes[m], gamma0, {}};
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto& f = flows[m][i];
            std::vector<std::string> row{std::to_string(modes[m]), io::format_double(grid[i]), io::format_double(f.lg)};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    row.push_back(io::format_double(f.m(a, b).real()));
                    row.push_back(io::format_double(f.m(a, b).imag()));
                }
            w.row(row);
            tr.samples.push_back({0.0, grid[i], f.log_norm()});
        }
        json fj{{"n", modes[m]}};
        if (modes[m] != 0) {
            try {
                const auto g = growth_envelope(tr);
                fj.update({{"C", g.C}, {"p", g.p}, {"rate", g.rate}, {"rms", g.rms}, {"samples", g.used}});
            } catch (const Error& e) {
                fj["fit"] = e.what();
            }
        }
        fits.push_back(fj);
    }
    r.csv_out("propagator.csv", w);
    r.json_out("growth_fit.json", {{"case", kase}, {"fits", fits}});
    return 0;
}

int cmd_airy_bench(Run& r)
{
    const auto modes = r.cfg.at("modes").get<std::vector<int>>();
    const auto epss = r.cfg.at("eps").get<std::vector<double>>();
    const double gamma0 = r.cfg.at("gamma0").get<double>();
    const int samples = r.cfg.at("samples").get<int>();
    OdeOptions ode;
    ode.rtol = r.cfg.at("rtol").get<double>();
    ode.atol = ode.rtol * 1e-4;
    io::CsvWriter w({"n", "eps", "s", "rel_err", "det_err"});
    double worst = 0, worst_det = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (double eps : epss)
        for (int n : modes) {
            if (n == 0) throw Error(ErrorCode::argument, "airy-bench needs nonzero modes");
            const double smax = std::min(20.0, std::pow(eps, -2.0 / 3.0));
            std::vector<double> grid;
            for (int i = 0; i < samples; ++i) grid.push_back(smax * i / (samples - 1));
            ModePropagator U{FlowCase::airy, n, gamma0, eps};
            const auto ys = integrate_linear([&](double s) { return U.coefficient(s); }, 0.0, CMat2::Identity(), grid, ode);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const CMat2 cf = U(0.0, grid[i]).value();
                const double e = (cf - ys[i]).cwiseAbs().maxCoeff() / ys[i].cwiseAbs().maxCoeff();
                const double d = std::abs(flow_determinant(U, 0.0, grid[i]) - 1.0);
                worst = std::max(worst, e);
                worst_det = std::max(worst_det, d);
                w.row({std::to_string(n), io::format_double(eps), io::format_double(grid[i]), io::format_double(e),
                       io::format_double(d)});
            }
        }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.csv_out("airy_bench.csv", w);
    // timing lives in the JSON summary so the CSV stays reproducible
    r.json_out("airy_bench.json", {{"max_rel_err", worst}, {"max_det_err", worst_det}, {"seconds", secs}});
    std::cout << "max rel err " << worst << '\n';
    return 0;
}

int cmd_solve(Run& r)
{
    const PlanCase pc = plan_case(r.cfg.at("case").get<std::string>());
    const Rational delta = parse_rational(r.cfg.at("delta").get<std::string>());
    const double eps = r.cfg.at("eps").get<double>();
    const auto pl = plan(pc, delta);
    auto cfg = make_solve_config(pl, eps, r.cfg.at("gamma0").get<double>(), r.cfg.at("nmax").get<int>(),
                                 r.cfg.at("K").get<int>(), r.cfg.at("S").get<int>());
    cfg.max_iter = r.cfg.at("max_iter").get<int>();
    cfg.tol = r.cfg.at("tol").get<double>();
    cfg.override_feasibility = r.cfg.at("override_feasibility").get<bool>();
    const std::string sys_path = r.cfg.at("system").get<std::string>();
    const QuasilinearSystem sys = !sys_path.empty() ? io::load_system(sys_path)
                                  : pc == PlanCase::smooth ? toy_smooth_system()
                                                           : toy_airy_system();
    log(LogLevel::info, "building the Duhamel operator");
    DuhamelOperator op(sys, cfg);
    const auto fs = free_solution(cfg.kind, eps, cfg.delta, cfg.space.gamma0, cfg.grid());
    auto [u, rep] = solve_fixed_point(fs, op);
    for (std::size_t i = 0; i < rep.distances.size(); ++i)
        log(LogLevel::debug, "iteration " + std::to_string(i + 1) + ": " + io::format_double(rep.distances[i]));

    json out;
    out["plan"] = io::plan_to_json(pl);
    out["parameters"] = {{"eps", eps},
                         {"M", std::pow(eps, -cfg.delta)},
                         {"M_prime", cfg.space.Mprime},
                         {"beta", cfg.space.beta},
                         {"R", cfg.phi.R},
                         {"rho", cfg.phi.rho},
                         {"s1", cfg.space.s1},
                         {"s_end", cfg.s_end()},
                         {"c0", cfg.phi.c0},
                         {"c1", cfg.phi.c1}};
    out["report"] = io::solve_report_to_json(rep);
    const auto bounds = operator_bounds(u, op);
    out["operator_bounds"] = {{"theta", bounds.theta}, {"x", bounds.x}, {"u", bounds.u}};
    if (rep.converged) {
        const double ld = datum_gevrey_norm(eps, cfg.delta, r.cfg.at("sigma").get<double>(), 1.0, cfg.space.eta);
        const auto ir = instability_ratio(u, rep, cfg, ld, r.cfg.at("alpha").get<double>());
        out["instability"] = {{"log_solution", ir.log_solution}, {"log_datum", ir.log_datum}, {"log_ratio", ir.log_ratio}};
    }
    r.json_out("solve.json", out);
    io::CsvWriter g({"s", "ratio"});
    for (std::size_t i = 0; i < rep.growth.s.size(); ++i) g.row(std::vector<double>{rep.growth.s[i], rep.growth.ratio[i]});
    r.csv_out("growth.csv", g);
    io::write_text(r.path("solution.csv").string(), io::field_to_csv(u));
    r.outputs.push_back("solution.csv");
    std::cout << (rep.converged ? "converged" : "not converged") << " in " << rep.iterations << " iterations, K = " << rep.K
              << '\n';
    return rep.converged ? 0 : 3;
}

int cmd_plan(Run& r)
{
    const PlanCase pc = plan_case(r.cfg.at("case").get<std::string>());
    const Rational delta = parse_rational(r.cfg.at("delta").get<std::string>());
    const int k = r.cfg.at("k").get<int>();
    const WhatIf w = what_if(r.cfg.at("what_if").get<std::string>());
    const auto pl = plan(pc, delta, k, w);
    json out = io::plan_to_json(pl);
    out["gevrey_index_limit"] = to_string(gevrey_index_limit(pc, k, w));
    r.json_out("plan.json", out);
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_demo_vdw(Run& r)
{
    const auto pprime = r.cfg.at("pprime").get<std::vector<double>>();
    const auto range = r.cfg.at("range").get<std::vector<double>>();
    if (range.size() != 2) throw Error(ErrorCode::argument, "range must hold two numbers");
    const double speed = r.cfg.at("speed").get<double>();
    const auto rep = vdw_report(pprime, range[0], range[1], speed);
    json out;
    out["pprime"] = pprime;
    out["elliptic_zone"] = json::array();
    for (const auto& [a, b] : rep.elliptic) out["elliptic_zone"].push_back({a, b});
    out["crossings"] = json::array();
    for (const auto& c : rep.crossings) {
        json cj{{"u", c.u}, {"velocity", c.velocity}, {"classification", io::classification_to_json(c.cls)}};
        if (c.nf) cj["normal_form"] = {{"kind", to_string(c.nf->kind)}, {"residual_is_zero", residual_is_zero(*c.nf)}};
        out["crossings"].push_back(cj);
    }
    out["interior"] = {{"u", rep.inside_u}, {"kind", to_string(rep.inside)}};
    out["exterior"] = {{"u", rep.outside_u}, {"kind", to_string(rep.outside)}};
    r.json_out("vdw_report.json", out);

    io::CsvWriter w({"u", "pprime", "discriminant", "zone"});
    const int n = r.cfg.at("samples").get<int>();
    if (n < 2) throw Error(ErrorCode::argument, "samples must be at least 2");
    for (int i = 0; i < n; ++i) {
        const double u = range[0] + (range[1] - range[0]) * i / (n - 1);
        const double p = poly_eval(pprime, u);
        w.row({io::format_double(u), io::format_double(p), io::format_double(-p),
               p < 0 ? "elliptic" : p > 0 ? "hyperbolic" : "transition"});
    }
    r.csv_out("vdw_zone.csv", w);
    for (const auto& [a, b] : rep.elliptic) std::cout << "elliptic zone: " << a << " < u1 < " << b << '\n';
    return 0;
}

json manifest(const Run& r)
{
    return {{"tool", "gevrey_onset"},
            {"version", kVersion},
            {"command", r.opt.command},
            {"config_file", r.opt.config_path},
            {"config", r.cfg},
            {"seed", r.opt.seed},
            {"workers", r.opt.workers},
            {"outputs", r.outputs},
            {"libraries",
             {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"boost", BOOST_LIB_VERSION},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"cli11", CLI11_VERSION}}}};
}

int execute(const Options& opt)
{
    fs::create_directories(opt.out);
    Run r{opt, resolve_config(opt), {}};
    log(LogLevel::info, opt.command + " with config " + r.cfg.dump());
    int status = 0;
    if (opt.command == "classify") status = cmd_classify(r);
    else if (opt.command == "normal-form") status = cmd_normal_form(r);
    else if (opt.command == "propagate") status = cmd_propagate(r);
    else if (opt.command == "airy-bench") status = cmd_airy_bench(r);
    else if (opt.command == "solve") status = cmd_solve(r);
    else if (opt.command == "plan") status = cmd_plan(r);
    else if (opt.command == "demo-vdw") status = cmd_demo_vdw(r);
    io::write_json((fs::path(opt.out) / "manifest.json").string(), manifest(r));
    return status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Gevrey-index instability experiments"};
    app.require_subcommand(1, 1);
    Options opt;
    app.add_option("--config", opt.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", opt.out, "output directory")->capture_default_str();
    app.add_option("--workers", opt.workers, "worker threads")->check(CLI::Range(1, 256))->capture_default_str();
    app.add_option("--seed", opt.seed, "seed for randomized checks")->capture_default_str();
    app.fallthrough();

    auto sub = [&](const char* name, const char* help) { return app.add_subcommand(name, help); };
    auto* classify = sub("classify", "classify the transition of a system");
    auto* nform = sub("normal-form", "normal form and remainder of a system");
    auto* prop = sub("propagate", "mode propagators on a grid");
    sub("airy-bench", "closed-form Airy flow against the ODE oracle");
    auto* solve = sub("solve", "fixed point of the Duhamel formulation");
    auto* pln = sub("plan", "exponent plan for a Gevrey index");
    sub("demo-vdw", "Euler system with a Van der Waals pressure law");
    for (auto* s : {classify, nform, solve}) s->add_option("--system", opt.system, "system JSON file");
    for (auto* s : {prop, solve, pln}) s->add_option("--case", opt.kase, "smooth or airy");
    for (auto* s : {solve, pln}) s->add_option("--delta", opt.delta, "Gevrey parameter as p/q");
    pln->add_option("--k", opt.k, "degeneracy order");
    pln->add_option("--what-if", opt.what_if, "none, drop_s2, zero_remainder, strict_airy");
    solve->add_option("--alpha", opt.alpha, "Hoelder exponent of the instability ratio");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    opt.command = app.get_subcommands().front()->get_name();
    try {
        return execute(opt);
    } catch (const std::exception& e) {
        const Error* ge = dynamic_cast<const Error*>(&e);
        const json err{{"error",
                        {{"command", opt.command},
                         {"code", ge ? to_string(ge->code()) : "internal"},
                         {"message", e.what()}}}};
        try {
            fs::create_directories(opt.out);
            io::write_json((fs::path(opt.out) / "error.json").string(), err);
        } catch (const std::exception&) {
        }
        std::cerr << err.dump() << '\n';
        return 2;
    }
}
