#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "halfstokes/biot_savart.hpp"
#include "halfstokes/kernels.hpp"
#include "halfstokes/resolvent.hpp"
#include "halfstokes/solver.hpp"

namespace halfstokes::cli {

using json = nlohmann::ordered_json;

struct GridSpec {
    double a = 0.0;
    double b = 10.0;
    int n = 256;  ///< number of nodes

    std::vector<double> nodes() const {
        std::vector<double> z(n);
        for (int i = 0; i < n; ++i) z[i] = (n == 1) ? a : a + (b - a) * i / (n - 1);
        return z;
    }
    GridPtr half_line() const {
        if (a != 0.0) throw ConfigError("half-line grids must start at 0");
        return HalfLineGrid::uniform(b, static_cast<std::size_t>(n - 1));
    }
};

struct RunConfig {
    std::string command;
    std::array<int, 2> xi{1, 0};
    double nu = 1.0;
    double t = 0.5;
    cplx lambda{3.0, 0.0};
    GridSpec grid;
    std::map<std::string, double> general_bc;
    bool oracle = false;
    std::uint64_t seed = 1;
    std::string out;
    double tol = 1e-3;

    FourierMode mode() const { return {xi[0], xi[1]}; }

    BoundaryOperatorD boundary_operator() const {
        if (general_bc.empty()) return BoundaryOperatorD::vorticity(mode());
        for (const auto& [k, v] : general_bc)
            if (k != "alpha" && k != "beta" && k != "gamma" && k != "c0")
                throw ConfigError("unknown boundary key '" + k + "' (expected alpha, beta, gamma, c0)");
        auto get = [&](const char* k, double d) {
            const auto it = general_bc.find(k);
            return it == general_bc.end() ? d : it->second;
        };
        return {get("alpha", 0.0), get("beta", 0.0), get("gamma", 0.0), get("c0", 1.0), mode()};
    }

    void validate() const {
        if (!(nu > 0.0)) throw ConfigError("--nu must be positive");
        if (!(t > 0.0)) throw ConfigError("--t must be positive");
        if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("--tol must lie in (0, 1)");
        if (grid.n < 2) throw ConfigError("--grid needs at least two nodes");
        if (grid.a < 0.0 || !(grid.b > grid.a)) throw ConfigError("--grid needs 0 <= A < B");
    }
};

inline GridSpec parse_grid(const std::string& s) {
    GridSpec g;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    if (!(in >> g.a >> c1 >> g.b >> c2 >> g.n) || c1 != ':' || c2 != ':' || !in.eof())
        throw ConfigError("--grid expects A:B:N, got '" + s + "'");
    return g;
}

inline std::map<std::string, double> parse_bc(const std::string& s) {
    std::map<std::string, double> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("--general-bc expects K=V pairs, got '" + item + "'");
        try {
            std::size_t used = 0;
            const std::string value = item.substr(eq + 1);
            out[item.substr(0, eq)] = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::logic_error&) {
            throw ConfigError("--general-bc value is not a number in '" + item + "'");
        }
    }
    return out;
}

inline void apply_json(RunConfig& c, const json& j) {
    try {
        if (j.contains("xi")) c.xi = {j["xi"].at(0).get<int>(), j["xi"].at(1).get<int>()};
        if (j.contains("nu")) c.nu = j["nu"].get<double>();
        if (j.contains("t")) c.t = j["t"].get<double>();
        if (j.contains("lambda")) c.lambda = {j["lambda"].at(0).get<double>(), j["lambda"].at(1).get<double>()};
        if (j.contains("grid")) c.grid = parse_grid(j["grid"].get<std::string>());
        if (j.contains("general_bc")) {
            if (j["general_bc"].is_string())
                c.general_bc = parse_bc(j["general_bc"].get<std::string>());
            else
                for (const auto& [k, v] : j["general_bc"].items()) c.general_bc[k] = v.get<double>();
        }
        if (j.contains("oracle")) c.oracle = j["oracle"].get<bool>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("out")) c.out = j["out"].get<std::string>();
        if (j.contains("tol")) c.tol = j["tol"].get<double>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
}

inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Rows of a table with a '#' provenance header; written as CSV or, for a .json path, as JSON.
struct Table {
    std::vector<std::pair<std::string, std::string>> provenance;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void write_csv(std::ostream& os) const {
        os << "#";
        for (const auto& [k, v] : provenance) os << ' ' << k << '=' << v;
        os << '\n';
        for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << num(r[c]);
            os << '\n';
        }
    }

    json to_json() const {
        json j;
        json p = json::object();
        for (const auto& [k, v] : provenance) p[k] = v;
        j["provenance"] = p;
        j["columns"] = columns;
        j["rows"] = rows;
        return j;
    }
};

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline void emit(const Table& t, const RunConfig& c, std::ostream& out) {
    if (c.out.empty()) {
        t.write_csv(out);
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw ConfigError("cannot open output file '" + c.out + "'");
    if (ends_with(c.out, ".json"))
        f << t.to_json().dump(2) << '\n';
    else
        t.write_csv(f);
}

inline std::string mode_str(const FourierMode& m) { return "(" + std::to_string(m.xi1()) + "," + std::to_string(m.xi2()) + ")"; }

inline std::string bc_str(const RunConfig& c) {
    if (c.general_bc.empty()) return "vorticity";
    const auto D = c.boundary_operator();
    return "general(alpha=" + num(D.alpha()) + ";beta=" + num(D.beta()) + ";gamma=" + num(D.gamma_off()) +
           ";c0=" + num(D.c0()) + ")";
}

inline int cmd_kernel(const RunConfig& c, std::ostream& out) {
    const auto D = c.boundary_operator();
    const auto nodes = c.grid.nodes();
    const auto ks = sample_green_function(c.t, c.nu, D, nodes, nodes);
    Table tab;
    std::string regimes;
    for (auto r : ks.regimes_used) regimes += (regimes.empty() ? "" : "+") + std::string(regime_name(r));
    double M = 0.0;
    for (const auto& p : ks.parts) M = std::max(M, p.info.arc_radius);
    tab.provenance = {{"formula", "green-function=neumann-heat+residual-contour"},
                      {"bc", bc_str(c)},
                      {"xi", mode_str(D.mode())},
                      {"nu", num(c.nu)},
                      {"t", num(c.t)},
                      {"contour", regimes.empty() ? std::string("none") : regimes},
                      {"max_arc_radius", num(M)},
                      {"max_quadrature_error", num(ks.max_error)}};
    tab.columns = {"t",           "y",           "z",           "entry_11_re", "entry_11_im", "entry_12_re",
                   "entry_12_im", "entry_21_re", "entry_21_im", "entry_22_re", "entry_22_im", "heat"};
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const Mat2C v = ks.value(i, j);
            std::vector<double> row{c.t, nodes[i], nodes[j]};
            for (int e = 0; e < 4; ++e) {
                row.push_back(v.a[e].real());
                row.push_back(v.a[e].imag());
            }
            row.push_back(ks.at(i, j).heat(0, 0).real());
            tab.rows.push_back(std::move(row));
        }
    emit(tab, c, out);
    return 0;
}

inline int cmd_resolvent(const RunConfig& c, std::ostream& out) {
    const auto grid = c.grid.half_line();
    std::mt19937_64 rng(c.seed);
    const ModeField f = random_bump_field(grid, rng);
    const SpectralPoint p(c.lambda, c.nu, c.mode());
    const auto sol = c.general_bc.empty() ? resolvent_apply(f, p) : resolvent_apply_general(f, p, c.boundary_operator());
    Table tab;
    tab.provenance = {{"formula", "resolvent=neumann-free-part+boundary-correction"},
                      {"bc", bc_str(c)},
                      {"xi", mode_str(c.mode())},
                      {"nu", num(c.nu)},
                      {"lambda", num(c.lambda.real()) + (c.lambda.imag() < 0 ? "" : "+") + num(c.lambda.imag()) + "i"},
                      {"seed", std::to_string(c.seed)},
                      {"boundary_residual", num(sol.boundary_residual)},
                      {"interior_residual", num(resolvent_interior_residual(sol, f))}};
    tab.columns = {"z", "f1_re", "f1_im", "f2_re", "f2_im", "u1_re", "u1_im", "u2_re", "u2_im"};
    for (std::size_t i = 0; i < f.size(); ++i)
        tab.rows.push_back({(*grid)[i], f(0, i).real(), f(0, i).imag(), f(1, i).real(), f(1, i).imag(),
                            sol.u(0, i).real(), sol.u(0, i).imag(), sol.u(1, i).real(), sol.u(1, i).imag()});
    emit(tab, c, out);
    return 0;
}

inline int cmd_solve(const RunConfig& c, std::ostream& out, std::ostream& log) {
    const auto grid = c.grid.half_line();
    StokesProblem p = forced_reference_problem(c.mode(), c.nu, grid, c.t);
    if (!c.general_bc.empty()) p.D = c.boundary_operator();
    const std::vector<double> times{0.0, 0.25 * c.t, 0.5 * c.t, c.t};
    const auto traj = duhamel_solve(p, times);
    Table tab;
    tab.provenance = {{"formula", "duhamel=green-function-convolution"},
                      {"problem", "forced-reference"},
                      {"bc", bc_str(c)},
                      {"xi", mode_str(c.mode())},
                      {"nu", num(c.nu)},
                      {"t_final", num(c.t)}};
    json report;
    if (c.oracle) {
        StokesProblem fine = forced_reference_problem(c.mode(), c.nu, HalfLineGrid::uniform(c.grid.b, 8 * (c.grid.n - 1)), c.t);
        fine.D = p.D;
        Diagnostics diag;
        const auto cn = crank_nicolson_oracle(fine, 1e-4, times, {}, &diag);
        report["oracle"] = "crank-nicolson";
        report["oracle_intervals"] = 8 * (c.grid.n - 1);
        report["oracle_dt"] = 1e-4;
        report["tolerance"] = c.tol;
        json errs = json::array();
        bool pass = true;
        for (std::size_t q = 1; q < times.size(); ++q) {
            const double e = relative_max_difference(traj.states[q], cn.states[q]);
            errs.push_back({{"t", times[q]}, {"max_relative_error", e}});
            pass = pass && e <= c.tol;
        }
        report["errors"] = errs;
        report["pass"] = pass;
        tab.provenance.push_back({"oracle_pass", pass ? "true" : "false"});
        log << report.dump(2) << '\n';
        if (!c.out.empty()) {
            std::ofstream f(c.out + ".oracle.json");
            f << report.dump(2) << '\n';
        }
    }
    tab.columns = {"t", "z", "component", "re", "im"};
    for (std::size_t q = 0; q < traj.times.size(); ++q)
        for (int comp = 0; comp < 3; ++comp)
            for (std::size_t i = 0; i < grid->size(); ++i)
                tab.rows.push_back({traj.times[q], (*grid)[i], static_cast<double>(comp + 1),
                                    traj.states[q](comp, i).real(), traj.states[q](comp, i).imag()});
    emit(tab, c, out);
    return 0;
}

inline int cmd_biot_savart(const RunConfig& c, std::ostream& out) {
    const auto grid = c.grid.half_line();
    const FourierMode m = c.mode();
    const cplx i1(0.0, m.xi1()), i2(0.0, m.xi2());
    const auto h = ModeField::sample(grid, 3, [&](double z) {
        const double phi = std::exp(-4.0 * (z - 3.0) * (z - 3.0)), dphi = -8.0 * (z - 3.0) * phi;
        const cplx a = 1.0, b(0.0, 0.5), cc = 0.7;
        return std::array<cplx, 3>{i2 * cc * phi - b * dphi, a * dphi - i1 * cc * phi, i1 * b * phi - i2 * a * phi};
    });
    const auto rep = check_biot_savart_roundtrip(h, m);
    const auto back = curl_mode(phi(curl_mode(h, m), m), m);
    const auto trace = check_trace_identities(
        ModeField::sample(grid, 1, [](double z) { return std::array<cplx, 1>{std::exp(-z)}; }), m);
    Table tab;
    tab.provenance = {{"formula", "curl(phi(curl h))=h"},
                      {"field", "curl-of-gaussian-potential"},
                      {"xi", mode_str(m)},
                      {"roundtrip_relative_error", num(rep.relative_error)},
                      {"trace_error_dirichlet", num(trace.dirichlet)},
                      {"trace_error_neumann", num(trace.neumann)}};
    tab.columns = {"z", "component", "h_re", "h_im", "roundtrip_re", "roundtrip_im"};
    for (int comp = 0; comp < 3; ++comp)
        for (std::size_t i = 0; i < grid->size(); ++i)
            tab.rows.push_back({(*grid)[i], static_cast<double>(comp + 1), h(comp, i).real(), h(comp, i).imag(),
                                back(comp, i).real(), back(comp, i).imag()});
    emit(tab, c, out);
    return 0;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out) {
    const FourierMode m = c.mode();
    json checks = json::array();
    bool all = true;
    auto add = [&](const std::string& name, const char* kind, double value, double tol) {
        const bool pass = std::isfinite(value) && value < tol;
        all = all && pass;
        checks.push_back({{"name", name}, {kind, value}, {"tolerance", tol}, {"pass", pass}});
    };
    {
        const auto grid = HalfLineGrid::uniform(30.0, 1200);
        const double base = c.nu * m.norm_squared();
        double sup = 0.0;
        for (cplx lam : {cplx(base, 0.0), cplx(0.0, 10.0 * base), cplx(-3.0 * base, 3.0 * base)})
            sup = std::max(sup, check_resolvent_bound(SpectralPoint(lam, c.nu, m), 10, c.seed, grid).sup_l2_ratio);
        add("resolvent_bound", "sup_ratio", sup, 10.0);
        std::mt19937_64 rng(c.seed);
        const auto f = random_bump_field(grid, rng);
        const auto sol = resolvent_apply(f, SpectralPoint(c.lambda, c.nu, m));
        add("resolvent_boundary_residual", "max_error", sol.boundary_residual / l2_norm(f), 1e-8);
    }
    {
        BoundSweep sweep = BoundSweep::standard();
        sweep.wavenumbers = {1, 4, 8};
        sweep.times = {0.01, 0.1, 1.0};
        sweep.sums = {0.0, 1.0, 5.0, 10.0};
        const auto cert = verify_kernel_bounds(sweep);
        double sup = 0.0;
        for (int k = 0; k < 3; ++k) sup = std::max({sup, cert.base.sup_r1[k], cert.base.sup_r2[k]});
        add("kernel_bound_drift", "max_error", cert.max_drift, 0.1);
        add("kernel_bound_ratio", "sup_ratio", sup, 1e3);
    }
    {
        double worst = 0.0;
        for (auto [y, z] : {std::pair{0.1, 0.3}, {0.5, 0.5}, {0.0, 1.0}}) {
            const Mat2C g = green_function(c.t, c.nu, m, y, z).total();
            worst = std::max(worst, (g - green_contour_integral(c.t, c.nu, m, y, z)).frobenius() / g.frobenius());
        }
        add("kernel_decomposition", "max_error", worst, 1e-6);
    }
    {
        const auto grid = HalfLineGrid::uniform(8.0, 2048);
        const cplx i1(0.0, m.xi1()), i2(0.0, m.xi2());
        const auto h = ModeField::sample(grid, 3, [&](double z) {
            const double phi = std::exp(-4.0 * (z - 3.0) * (z - 3.0)), dphi = -8.0 * (z - 3.0) * phi;
            return std::array<cplx, 3>{0.7 * i2 * phi - cplx(0.0, 0.5) * dphi, dphi - 0.7 * i1 * phi,
                                       cplx(0.0, 0.5) * i1 * phi - i2 * phi};
        });
        add("biot_savart_roundtrip", "max_error", check_biot_savart_roundtrip(h, m).relative_error, 1e-4);
        const auto tr = check_trace_identities(
            ModeField::sample(HalfLineGrid::uniform(40.0, 2048), 1, [](double z) { return std::array<cplx, 1>{std::exp(-z)}; }), m);
        add("trace_identities", "max_error", std::max(tr.dirichlet, tr.neumann), 1e-6);
    }
    {
        const auto grid = HalfLineGrid::uniform(20.0, 512);
        StokesProblem p = forced_reference_problem(m, c.nu, grid);
        p.forcing = nullptr;
        p.boundary_g = nullptr;
        std::vector<double> times;
        for (int k = 0; k <= 20; ++k) times.push_back(0.05 * k);
        const auto traj = crank_nicolson_oracle(p, 1e-3, times);
        double growth = 0.0;
        for (std::size_t q = 1; q < traj.states.size(); ++q)
            growth = std::max(growth, oracle_energy(traj.states[q], {0, 1}) - oracle_energy(traj.states[q - 1], {0, 1}));
        add("energy_decay", "max_error", std::max(growth, 0.0), 1e-10);
    }
    {
        const BoundaryOperatorD zero(0.0, 0.0, 0.0, 1.0, m);
        double worst = 0.0;
        for (double y : {0.0, 0.5})
            for (double z : {0.2, 1.0}) {
                const auto g = green_function_general(c.t, c.nu, zero, y, z).total();
                const double h = heat_kernel_neumann(c.t, c.nu, m, y, z);
                worst = std::max(worst, (g - Mat2C::identity() * h).frobenius() / h);
            }
        add("general_bc_reduction", "max_error", worst, 1e-10);
    }
    json report{{"command", "verify"}, {"xi", {m.xi1(), m.xi2()}}, {"nu", c.nu}, {"seed", c.seed}, {"checks", checks},
                {"pass", all}};
    if (c.out.empty()) {
        out << report.dump(2) << '\n';
    } else {
        std::ofstream f(c.out);
        if (!f) throw ConfigError("cannot open output file '" + c.out + "'");
        f << report.dump(2) << '\n';
    }
    return all ? 0 : 1;
}

/// Entry point; returns the process exit code (0 ok, 1 verify failed, 2 configuration, 3 numerical).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Per-mode Stokes solver on the periodic half-space"};
    app.require_subcommand(1, 1);
    std::vector<int> xi;
    double nu = 0.0, t = 0.0, tol = 0.0;
    std::vector<double> lambda;
    std::string grid, bc, out_path, config;
    std::uint64_t seed = 0;
    bool oracle = false;
    const std::map<std::string, std::string> help{
        {"kernel", "sample the time-domain Green's function on a (y, z) grid"},
        {"resolvent", "solve the resolvent problem for seeded random data"},
        {"solve", "evolve the forced reference problem by Duhamel's formula"},
        {"verify", "run the property checks and write a JSON report"},
        {"biot-savart", "roundtrip and trace identities of the vorticity formulation"}};
    std::vector<CLI::App*> subs;
    for (const auto& [name, text] : help) subs.push_back(app.add_subcommand(name, text));
    std::map<std::string, CLI::Option*> opts;
    for (CLI::App* s : subs) {
        s->add_option("--xi", xi, "Fourier mode I J")->expected(2);
        s->add_option("--nu", nu, "viscosity");
        s->add_option("--t", t, "time");
        s->add_option("--lambda", lambda, "spectral parameter RE IM")->expected(2);
        s->add_option("--grid", grid, "A:B:N (N nodes on [A, B])");
        s->add_option("--general-bc", bc, "alpha=..,beta=..,gamma=..,c0=..");
        s->add_flag("--oracle", oracle, "compare with the Crank-Nicolson oracle");
        s->add_option("--seed", seed, "random seed");
        s->add_option("--out", out_path, "output path (.json for JSON)");
        s->add_option("--tol", tol, "tolerance in (0, 1)");
        s->add_option("--config", config, "JSON config; flags override it");
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        for (CLI::App* s : subs)
            if (s->parsed()) out << s->help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    CLI::App* sub = nullptr;
    for (CLI::App* s : subs)
        if (s->parsed()) sub = s;
    try {
        RunConfig c;
        c.command = sub->get_name();
        if (sub->count("--config")) {
            std::ifstream f(config);
            if (!f) throw ConfigError("cannot read config file '" + config + "'");
            json j;
            try {
                j = json::parse(f);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
            }
            apply_json(c, j);
        }
        if (sub->count("--xi")) c.xi = {xi[0], xi[1]};
        if (sub->count("--nu")) c.nu = nu;
        if (sub->count("--t")) c.t = t;
        if (sub->count("--lambda")) c.lambda = {lambda[0], lambda[1]};
        if (sub->count("--grid")) c.grid = parse_grid(grid);
        if (sub->count("--general-bc")) c.general_bc = parse_bc(bc);
        if (sub->count("--oracle")) c.oracle = oracle;
        if (sub->count("--seed")) c.seed = seed;
        if (sub->count("--out")) c.out = out_path;
        if (sub->count("--tol")) c.tol = tol;
        c.validate();
        if (c.command == "kernel") return cmd_kernel(c, out);
        if (c.command == "resolvent") return cmd_resolvent(c, out);
        if (c.command == "solve") return cmd_solve(c, out, err);
        if (c.command == "biot-savart") return cmd_biot_savart(c, out);
        return cmd_verify(c, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return 3;
    }
}

} // namespace halfstokes::cli
