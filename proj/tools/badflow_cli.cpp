// badflow: command-line surface for the lattice-flow badness toolkit.
//
// Subcommands: orbit, bad-check, cantor, scan {dangerous, eq, nondiv, shah,
// minima, sublattices}.  Structured reports are JSON with an embedded run
// manifest; time/parameter series are CSV with the manifest in '#' header
// lines.  Exit codes: 0 success, 2 usage, 3 resource exhaustion.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "badflow/badflow.hpp"
#include "badflow/version.hpp"

using json = nlohmann::ordered_json;
using namespace badflow;

namespace {

struct manifest_clock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

json make_manifest(const std::string& command, const json& config, const manifest_clock& clk,
                   std::uint64_t seed = 0) {
    json m;
    m["command"] = command;
    m["config"] = config;
    m["version"] = BADFLOW_VERSION;
    m["wall_clock_s"] = clk.seconds();
    m["seed"] = seed;
    return m;
}

void write_json(const std::string& path, const json& doc) {
    if (path.empty() || path == "-") {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::invalid_argument("cannot open output file: " + path);
    os << doc.dump(2) << "\n";
}

weight parse_weight(const std::vector<double>& r) {
    try {
        return weight(r);
    } catch (const std::invalid_argument& e) {
        throw CLI::ValidationError("--weight", e.what());
    }
}

point parse_point(const std::vector<std::string>& xs) {
    point p;
    for (const auto& s : xs) p.push_back(parse_decimal(s));
    return p;
}

matrix<double> parse_basis(const std::string& text, const std::string& lattice, int dim) {
    if (!lattice.empty()) {
        if (lattice == "identity") return matrix<double>::identity(dim);
        throw CLI::ValidationError("--lattice", "unknown preset '" + lattice + "'");
    }
    // rows separated by ';', entries by ','
    std::vector<std::vector<double>> rows;
    std::stringstream ss(text);
    std::string row;
    while (std::getline(ss, row, ';')) {
        std::vector<double> entries;
        std::stringstream rs(row);
        std::string cell;
        while (std::getline(rs, cell, ',')) entries.push_back(std::stod(cell));
        rows.push_back(entries);
    }
    const int d = static_cast<int>(rows.size());
    if (d == 0) throw CLI::ValidationError("--basis", "empty matrix");
    matrix<double> m(d, d);
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != d)
            throw CLI::ValidationError("--basis", "matrix must be square");
        for (int j = 0; j < d; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

int resolve_workers(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("BADFLOW_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

json witness_json(const std::vector<std::int64_t>& w) {
    json a = json::array();
    for (auto v : w) a.push_back(v);
    return a;
}

// ---------------------------------------------------------------------------

int cmd_orbit(const std::vector<std::string>& xs, const std::vector<double>& r,
              const std::string& convention, double T, double step, const std::string& out) {
    manifest_clock clk;
    const weight w = parse_weight(r);
    const point x = parse_point(xs);
    if (static_cast<int>(x.size()) != w.n())
        throw CLI::ValidationError("--x", "dimension mismatch with --weight");
    const auto conv = convention == "dU" ? orbit_convention::d_U : orbit_convention::a_V;
    const auto tr = orbit_trace(x, w, conv, T, step);

    json cfg;
    cfg["x"] = xs;
    cfg["weight"] = r;
    cfg["convention"] = convention;
    cfg["T"] = T;
    cfg["step"] = step;
    const json manifest = make_manifest("orbit", cfg, clk);

    std::ostringstream full;
    full.precision(17);
    full << "# manifest: " << manifest.dump() << "\n";
    full << "t,lambda1,certified_floor_so_far\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        full << tr.times[i] << "," << tr.lambda1[i] << "," << tr.floor_so_far[i] << "\n";
    if (out.empty() || out == "-") {
        std::cout << full.str();
    } else {
        std::ofstream os(out);
        if (!os) throw std::invalid_argument("cannot open output file: " + out);
        os << full.str();
    }
    return 0;
}

int cmd_bad_check(const std::vector<std::string>& xs, const std::vector<double>& r, std::int64_t Q,
                  const std::string& mode, double c, double N, const std::string& out) {
    manifest_clock clk;
    const weight w = parse_weight(r);
    const point x = parse_point(xs);
    if (static_cast<int>(x.size()) != w.n())
        throw CLI::ValidationError("--x", "dimension mismatch with --weight");

    json payload;
    payload["mode"] = mode;
    if (mode == "direct" || mode == "both") {
        const auto rep = badness_constant_direct(x, w, Q);
        payload["direct"] = {{"constant", rep.constant},
                             {"witness", witness_json(rep.witness)},
                             {"horizon", rep.horizon}};
    }
    if (mode == "dual" || mode == "both") {
        payload["dual"] = {{"c", c},
                           {"N", N},
                           {"only_zero_solution", dual_only_zero_solution(x, w, c, N)}};
    }
    if (mode == "both") {
        const auto rep = correspondence_check(x, w, Q);
        payload["consistency"] = {{"direct_constant", rep.direct_constant},
                                  {"orbit_floor", rep.orbit_floor},
                                  {"T_used", rep.T_used},
                                  {"threshold", rep.threshold},
                                  {"threshold_orbit", rep.threshold_orbit},
                                  {"direct_bad", rep.direct_bad},
                                  {"orbit_bad", rep.orbit_bad},
                                  {"implied_direct_lower", rep.implied_direct_lower},
                                  {"verdict", rep.verdict}};
    }

    json cfg;
    cfg["x"] = xs;
    cfg["weight"] = r;
    cfg["Q"] = Q;
    cfg["mode"] = mode;
    if (mode != "direct") {
        cfg["c"] = c;
        cfg["N"] = N;
    }
    json doc;
    doc["manifest"] = make_manifest("bad-check", cfg, clk);
    doc["payload"] = payload;
    write_json(out, doc);
    return 0;
}

json tree_to_json(const construction_result& res) {
    json gens = json::array();
    for (const auto& gen : res.generations) {
        json g = json::array();
        for (const auto& nd : gen) {
            json n;
            n["lo"] = nd.iv.lo;
            n["hi"] = nd.iv.hi;
            n["parent"] = nd.parent;
            n["status"] = nd.status == node_status::alive ? "alive" : "dead";
            if (nd.status == node_status::dead) {
                const char* kind = "unclassified";
                switch (nd.cls.kind) {
                    case bucket_kind::generic: kind = "generic"; break;
                    case bucket_kind::dangerous: kind = "dangerous"; break;
                    case bucket_kind::extremely_dangerous: kind = "extremely_dangerous"; break;
                    default: break;
                }
                n["classification"] = {{"kind", kind}, {"i", nd.cls.i}, {"l", nd.cls.l}, {"p", nd.cls.p}};
                n["witness"] = witness_json(nd.witness);
                n["indeterminate"] = nd.indeterminate;
            }
            g.push_back(std::move(n));
        }
        gens.push_back(std::move(g));
    }
    json payload;
    payload["generations"] = std::move(gens);
    return payload;
}

int cmd_cantor(int n, const std::string& curve_name, const std::vector<double>& r, int R, int m,
               int depth, double rho, const std::string& out_dir, int workers_flag) {
    manifest_clock clk;
    if (R < 2) throw CLI::ValidationError("--R", "R >= 2 required");
    if (curve_name != "moment") throw CLI::ValidationError("--curve", "unknown curve preset");
    const weight w = parse_weight(r);
    if (w.n() != n) throw CLI::ValidationError("--n", "dimension mismatch with --weight");
    if (!w.sorted_positive())
        throw CLI::ValidationError("--weight", "construction requires r sorted nonincreasing, r_n > 0");

    construction_config cfg(w, moment_curve(n), R, m);
    cfg.rho = rho;
    cfg.depth = depth;
    cfg.workers = resolve_workers(workers_flag);
    const auto res = build_sequence(cfg);

    json ccfg;
    ccfg["n"] = n;
    ccfg["curve"] = curve_name;
    ccfg["weight"] = r;
    ccfg["R"] = R;
    ccfg["m"] = m;
    ccfg["depth"] = depth;
    ccfg["rho"] = rho;
    const json manifest = make_manifest("cantor", ccfg, clk);

    json tree;
    tree["manifest"] = manifest;
    tree["payload"] = tree_to_json(res);
    write_json(out_dir + "/tree.json", tree);

    json rich;
    rich["manifest"] = manifest;
    json entries = json::array();
    for (const auto& re : res.richness) {
        json e;
        e["q"] = re.q;
        e["alive"] = re.alive;
        e["dead"] = re.dead;
        json f = json::object();
        for (const auto& [p, fmax] : re.f_max_by_bucket) f[std::to_string(p)] = fmax;
        e["f_max_by_bucket"] = f;
        e["d_q_upper"] = re.d_q_upper;
        entries.push_back(std::move(e));
    }
    rich["payload"] = {{"entries", entries}, {"d_sequence_upper", res.d_sequence_upper}};
    write_json(out_dir + "/richness.json", rich);

    std::ostringstream sv;
    sv.precision(17);
    sv << "mid";
    for (int q = 0; q <= depth; ++q) sv << ",lambda1_q" << q;
    sv << "\n";
    for (const auto& nd : res.generations.back()) {
        if (nd.status != node_status::alive) continue;
        sv << nd.iv.mid();
        for (int q = 0; q <= depth; ++q) {
            const auto l = cdetail::midpoint_lattice(cfg, nd.iv.mid(), q);
            sv << "," << shortest_vector(l).norm;
        }
        sv << "\n";
    }
    std::ofstream os(out_dir + "/survivors.csv");
    if (!os) throw std::invalid_argument("cannot open output file in " + out_dir);
    os << "# manifest: " << manifest.dump() << "\n" << sv.str();
    return 0;
}

// --- scan subcommands -------------------------------------------------------

construction_config scan_config(int n, const std::vector<double>& r, int R, int m, double rho) {
    const weight w = parse_weight(r);
    if (w.n() != n) throw CLI::ValidationError("--n", "dimension mismatch with --weight");
    if (!w.sorted_positive())
        throw CLI::ValidationError("--weight", "scan requires r sorted nonincreasing, r_n > 0");
    construction_config cfg(w, moment_curve(n), R, m);
    cfg.rho = rho;
    return cfg;
}

int cmd_scan_dangerous(int n, const std::vector<double>& r, int R, int m, double rho, int q, int l,
                       int grid, const std::string& out) {
    manifest_clock clk;
    auto cfg = scan_config(n, r, R, m, rho);
    if (grid > 0) cfg.dangerous_grid = grid;
    const auto records = detect_dangerous(cfg, q, l, {cfg.phi.a, cfg.phi.b});
    json recs = json::array();
    for (const auto& rec : records)
        recs.push_back({{"witness", witness_json(rec.witness)},
                        {"lo", rec.lo},
                        {"hi", rec.hi},
                        {"peak", rec.peak}});
    json cfgj = {{"n", n}, {"weight", r}, {"R", R}, {"m", m}, {"rho", rho},
                 {"q", q}, {"l", l}, {"grid", cfg.dangerous_grid}};
    json doc;
    doc["manifest"] = make_manifest("scan dangerous", cfgj, clk);
    doc["payload"] = {{"count", records.size()}, {"records", recs}};
    write_json(out, doc);
    return 0;
}

int cmd_scan_eq(int n, const std::vector<double>& r, int R, int m, double rho, int q, double s_point,
                bool have_s, int grid, const std::string& out) {
    manifest_clock clk;
    auto cfg = scan_config(n, r, R, m, rho);
    json payload;
    if (have_s) {
        const auto res = eq_membership(cfg, s_point, q);
        payload["s"] = s_point;
        payload["member"] = res.member;
        if (res.member) payload["witness"] = witness_json(res.witness);
    } else {
        std::int64_t members = 0;
        const double h = cfg.phi.length() / (grid - 1);
        for (int g = 0; g < grid; ++g)
            if (eq_membership(cfg, cfg.phi.a + g * h, q).member) ++members;
        payload["grid"] = grid;
        payload["members"] = members;
        payload["fraction"] = static_cast<double>(members) / grid;
    }
    json cfgj = {{"n", n}, {"weight", r}, {"R", R}, {"m", m}, {"rho", rho}, {"q", q}};
    json doc;
    doc["manifest"] = make_manifest("scan eq", cfgj, clk);
    doc["payload"] = payload;
    write_json(out, doc);
    return 0;
}

int cmd_scan_nondiv(int n, const std::vector<double>& r, int R, int m, double rho, int q, double eps,
                    int grid, int workers_flag, const std::string& out) {
    manifest_clock clk;
    auto cfg = scan_config(n, r, R, m, rho);
    cfg.workers = resolve_workers(workers_flag);
    const auto rep = nondivergence_fraction(cfg, q, {cfg.phi.a, cfg.phi.b}, eps, grid);
    json cfgj = {{"n", n}, {"weight", r}, {"R", R}, {"m", m}, {"rho", rho},
                 {"q", q}, {"eps", eps}, {"grid", grid}};
    json doc;
    doc["manifest"] = make_manifest("scan nondiv", cfgj, clk);
    doc["payload"] = {{"fraction", rep.fraction}, {"hypothesis_ok", rep.hypothesis_ok}, {"grid", rep.grid}};
    write_json(out, doc);
    return 0;
}

int cmd_scan_shah(int n, const std::vector<double>& r, int R, int m, double rho, int grade, double t,
                  int samples, std::uint64_t seed, const std::string& out) {
    manifest_clock clk;
    auto cfg = scan_config(n, r, R, m, rho);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double cmin = std::numeric_limits<double>::infinity();
    json ratios = json::array();
    for (int trial = 0; trial < samples; ++trial) {
        multivector v(n + 1, grade);
        double norm = 0;
        do {
            for (std::int64_t i = 0; i < v.size(); ++i) v[i] = u(rng);
            norm = sup_norm(v);
        } while (norm < 1e-6);
        const double scan = shah_lower_bound_scan(cfg, v, t);
        const double ratio = scan / norm;
        ratios.push_back(ratio);
        cmin = std::min(cmin, ratio);
    }
    json cfgj = {{"n", n}, {"weight", r}, {"R", R}, {"m", m}, {"rho", rho},
                 {"grade", grade}, {"t", t}, {"samples", samples}};
    json doc;
    doc["manifest"] = make_manifest("scan shah", cfgj, clk, seed);
    doc["payload"] = {{"empirical_c", cmin}, {"ratios", ratios}};
    write_json(out, doc);
    return 0;
}

int cmd_scan_minima(const std::string& basis, const std::string& lattice, int dim,
                    const std::string& out) {
    manifest_clock clk;
    const lattice_basis l(parse_basis(basis, lattice, dim));
    const auto mp = successive_minima(l);
    json minima = json::array(), witnesses = json::array();
    for (double v : mp.minima) minima.push_back(v);
    for (const auto& wv : mp.witness_coeffs) witnesses.push_back(witness_json(wv));
    json cfgj = {{"basis", basis}, {"lattice", lattice}, {"dim", dim}};
    json doc;
    doc["manifest"] = make_manifest("scan minima", cfgj, clk);
    doc["payload"] = {{"minima", minima}, {"witness_coeffs", witnesses}};
    write_json(out, doc);
    return 0;
}

int cmd_scan_sublattices(const std::string& basis, const std::string& lattice, int dim, int k,
                         double rho, const std::string& out) {
    manifest_clock clk;
    const lattice_basis l(parse_basis(basis, lattice, dim));
    const auto subs = enumerate_primitive_sublattices(l, k, rho);
    json list = json::array();
    for (const auto& s : subs) {
        json gens = json::array();
        for (const auto& g : s.vectors) gens.push_back(witness_json(g));
        list.push_back(std::move(gens));
    }
    json cfgj = {{"basis", basis}, {"lattice", lattice}, {"dim", dim}, {"k", k}, {"rho", rho}};
    json doc;
    doc["manifest"] = make_manifest("scan sublattices", cfgj, clk);
    doc["payload"] = {{"count", subs.size()}, {"sublattices", list}};
    write_json(out, doc);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"badflow: weighted badly-approximable points on curves, lattice-flow toolkit"};
    app.require_subcommand(1);

    // orbit
    auto* orbit = app.add_subcommand("orbit", "sample lambda_1 along a diagonal-flow orbit");
    std::vector<std::string> o_x;
    std::vector<double> o_w;
    std::string o_conv = "aV", o_out = "-";
    double o_T = 30.0, o_step = 0.01;
    orbit->add_option("--x", o_x, "point coordinates (decimal literals)")->required();
    orbit->add_option("--weight", o_w, "weight entries, must sum to 1")->required();
    orbit->add_option("--convention", o_conv, "aV | dU")->check(CLI::IsMember({"aV", "dU"}));
    orbit->add_option("--T", o_T, "time horizon");
    orbit->add_option("--step", o_step, "sample step (<= 0.1)");
    orbit->add_option("--out", o_out, "CSV output path ('-' for stdout)");

    // bad-check
    auto* bad = app.add_subcommand("bad-check", "direct/dual badness tests");
    std::vector<std::string> b_x;
    std::vector<double> b_w;
    std::string b_mode = "direct", b_out = "-";
    std::int64_t b_Q = 100000;
    double b_c = 0.1, b_N = 100.0;
    bad->add_option("--x", b_x)->required();
    bad->add_option("--weight", b_w)->required();
    bad->add_option("--Q", b_Q, "direct-test horizon");
    bad->add_option("--mode", b_mode)->check(CLI::IsMember({"direct", "dual", "both"}));
    bad->add_option("--c", b_c, "dual-test constant");
    bad->add_option("--N", b_N, "dual-test scale");
    bad->add_option("--out", b_out);

    // cantor
    auto* cantor = app.add_subcommand("cantor", "run the interval-survival construction");
    int c_n = 2, c_R = 16, c_m = 1, c_depth = 4, c_workers = 0;
    std::vector<double> c_w;
    double c_rho = 0.25;
    std::string c_curve = "moment", c_out;
    cantor->add_option("--n", c_n, "curve dimension")->required();
    cantor->add_option("--curve", c_curve, "curve preset (moment)");
    cantor->add_option("--weight", c_w)->required();
    cantor->add_option("--R", c_R, "subdivision factor");
    cantor->add_option("--m", c_m, "kappa = R^-m");
    cantor->add_option("--depth", c_depth);
    cantor->add_option("--rho", c_rho);
    cantor->add_option("--out-dir", c_out)->required();
    cantor->add_option("--workers,-j", c_workers, "worker threads (env BADFLOW_WORKERS)");

    // scan
    auto* scan = app.add_subcommand("scan", "detectors and counters");
    scan->require_subcommand(1);
    int s_n = 2, s_R = 16, s_m = 1, s_q = 3, s_l = 1, s_grid = 0, s_workers = 0;
    std::vector<double> s_w;
    double s_rho = 0.25, s_eps = 0.05, s_t = 1.0, s_s = 0.0;
    int s_grade = 1, s_samples = 100;
    std::uint64_t s_seed = 1;
    std::string s_out = "-", s_basis, s_lattice;
    int s_dim = 3, s_k = 1;
    double s_subrho = 1.0;

    auto add_flow_flags = [&](CLI::App* sub) {
        sub->add_option("--n", s_n)->required();
        sub->add_option("--weight", s_w)->required();
        sub->add_option("--R", s_R);
        sub->add_option("--m", s_m);
        sub->add_option("--rho", s_rho);
        sub->add_option("--out", s_out);
    };

    auto* sd = scan->add_subcommand("dangerous", "dangerous-interval records");
    add_flow_flags(sd);
    sd->add_option("--q", s_q)->required();
    sd->add_option("--l", s_l)->required();
    sd->add_option("--grid", s_grid);

    auto* se = scan->add_subcommand("eq", "derivative-condition membership");
    add_flow_flags(se);
    se->add_option("--q", s_q)->required();
    auto* se_s = se->add_option("--s", s_s, "single point (otherwise grid fraction)");
    se->add_option("--grid", s_grid);

    auto* sn = scan->add_subcommand("nondiv", "escape fraction from K_eps");
    add_flow_flags(sn);
    sn->add_option("--q", s_q)->required();
    sn->add_option("--eps", s_eps)->required();
    sn->add_option("--grid", s_grid);
    sn->add_option("--workers,-j", s_workers);

    auto* sh = scan->add_subcommand("shah", "representation lower-bound sweep");
    add_flow_flags(sh);
    sh->add_option("--grade", s_grade);
    sh->add_option("--t", s_t);
    sh->add_option("--samples", s_samples);
    sh->add_option("--seed", s_seed);

    auto* sm = scan->add_subcommand("minima", "successive minima of a lattice");
    sm->add_option("--basis", s_basis, "rows 'a,b,c;d,e,f;...'");
    sm->add_option("--lattice", s_lattice, "preset: identity");
    sm->add_option("--dim", s_dim);
    sm->add_option("--out", s_out);

    auto* ss = scan->add_subcommand("sublattices", "primitive sublattices with small covolume");
    ss->add_option("--basis", s_basis);
    ss->add_option("--lattice", s_lattice);
    ss->add_option("--dim", s_dim);
    ss->add_option("--k", s_k)->required();
    ss->add_option("--rho", s_subrho)->required();
    ss->add_option("--out", s_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*orbit) return cmd_orbit(o_x, o_w, o_conv, o_T, o_step, o_out);
        if (*bad) return cmd_bad_check(b_x, b_w, b_Q, b_mode, b_c, b_N, b_out);
        if (*cantor) return cmd_cantor(c_n, c_curve, c_w, c_R, c_m, c_depth, c_rho, c_out, c_workers);
        if (*sd) return cmd_scan_dangerous(s_n, s_w, s_R, s_m, s_rho, s_q, s_l, s_grid, s_out);
        if (*se) return cmd_scan_eq(s_n, s_w, s_R, s_m, s_rho, s_q, s_s, se_s->count() > 0,
                                    s_grid > 0 ? s_grid : 2000, s_out);
        if (*sn) return cmd_scan_nondiv(s_n, s_w, s_R, s_m, s_rho, s_q, s_eps,
                                        s_grid > 0 ? s_grid : 2000, s_workers, s_out);
        if (*sh) return cmd_scan_shah(s_n, s_w, s_R, s_m, s_rho, s_grade, s_t, s_samples, s_seed, s_out);
        if (*sm) return cmd_scan_minima(s_basis, s_lattice, s_dim, s_out);
        if (*ss) return cmd_scan_sublattices(s_basis, s_lattice, s_dim, s_k, s_subrho, s_out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const resource_error& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
