#include "lipcmo/cli.hpp"
#include "lipcmo/approximation.hpp"
#include "lipcmo/harness.hpp"
#include "lipcmo/oscillation.hpp"
#include "lipcmo/parallel.hpp"
#include "lipcmo/presets.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace lipcmo {

namespace {

using json = nlohmann::ordered_json;

struct GridArgs {
    std::string domain = "-1..1";
    Index res = 1024;
    int dim = 0;

    GridSpec grid() const
    {
        if (res < 1)
            throw ValidationError("--res must be positive");
        return GridSpec(parse_domain(domain, dim), res);
    }
};

struct OperatorArgs {
    std::string b = "preset:linear";
    std::string kernel = "sgn";
    double beta = 0.0;
    double delta = 0.0;
    std::string weight = "one";
    double p = 1.5;
    int m = 1;
    double alpha = 0.5;
};

void add_grid(CLI::App* app, GridArgs& g, const std::string& domain, Index res)
{
    g.domain = domain;
    g.res = res;
    app->add_option("--domain", g.domain, "lo..hi[,lo..hi]")->capture_default_str();
    app->add_option("--res", g.res, "cells per axis")->capture_default_str();
    app->add_option("--dim", g.dim, "1 or 2 (0: from the domain)")->capture_default_str();
}

void add_operator(CLI::App* app, OperatorArgs& o)
{
    app->add_option("--b", o.b, "symbol: preset:NAME[:param] or CSV path")->capture_default_str();
    app->add_option("--kernel", o.kernel, "sgn, cos, riesz:BETA, table:FILE")->capture_default_str();
    app->add_option("--beta", o.beta, "order for sgn/cos/table kernels")->capture_default_str();
    app->add_option("--delta", o.delta, "smooth truncation radius (0 = none)")->capture_default_str();
    app->add_option("--weight", o.weight, "one, pow:GAMMA, csv:FILE")->capture_default_str();
    app->add_option("--p", o.p, "source exponent")->capture_default_str();
    app->add_option("--m", o.m, "commutator order")->capture_default_str();
    app->add_option("--alpha", o.alpha, "smoothness index")->capture_default_str();
}

KernelSpec make_kernel(const OperatorArgs& o, int n)
{
    KernelSpec k = parse_kernel(o.kernel, n, o.beta);
    return o.delta > 0.0 ? truncate_kernel(k, o.delta) : k;
}

Cube parse_cube(const std::string& text, int n)
{
    const auto colon = text.rfind(':');
    if (colon == std::string::npos)
        throw ValidationError("cube must be CX[,CY]:SIDE");
    std::vector<double> c;
    std::istringstream in(text.substr(0, colon));
    std::string item;
    try {
        while (std::getline(in, item, ','))
            c.push_back(std::stod(item));
        const double side = std::stod(text.substr(colon + 1));
        if (static_cast<int>(c.size()) != n || !(side > 0.0))
            throw ValidationError("cube center must have " + std::to_string(n) + " coordinates and a positive side");
        Point p(n);
        for (int j = 0; j < n; ++j)
            p[j] = c[static_cast<std::size_t>(j)];
        return Cube(p, side);
    } catch (const std::invalid_argument&) {
        throw ValidationError("cube must be CX[,CY]:SIDE");
    }
}

std::pair<int, int> parse_range(const std::string& text)
{
    const auto pos = text.find("..");
    try {
        if (pos == std::string::npos)
            throw std::invalid_argument(text);
        return {std::stoi(text.substr(0, pos)), std::stoi(text.substr(pos + 2))};
    } catch (const std::exception&) {
        throw ValidationError("range must be LO..HI");
    }
}

json grid_json(const GridSpec& g)
{
    json lo = json::array();
    for (int j = 0; j < g.dim(); ++j)
        lo.push_back(g.domain().lo(j));
    return json{{"dim", g.dim()},
                {"domain_lower", lo},
                {"domain_side", g.domain().side()},
                {"resolution", g.resolution()},
                {"cell_size", g.cell_size()}};
}

json point_json(const Point& p)
{
    json a = json::array();
    for (Index j = 0; j < p.size(); ++j)
        a.push_back(p[j]);
    return a;
}

json cube_json(const Cube& q)
{
    return json{{"center", point_json(q.center())}, {"side", q.side()}};
}

json curve_json(const std::vector<ProfilePoint>& c)
{
    json a = json::array();
    for (const auto& p : c)
        a.push_back({{"parameter", p.parameter}, {"sup_osc", p.sup_osc}});
    return a;
}

json params_json(const CLI::App* app)
{
    json p;
    for (const CLI::Option* opt : app->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help")
            continue;
        if (opt->count() > 0) {
            const auto& r = opt->results();
            std::string v;
            for (std::size_t i = 0; i < r.size(); ++i)
                v += (i ? "," : "") + r[i];
            p[name] = v;
        } else {
            p[name] = opt->get_default_str();
        }
    }
    return p;
}

// Family of dyadic cubes with side >= 2 cells unless max_level is given.
DyadicFamily default_family(const GridSpec& g, int max_level)
{
    if (max_level < 0)
        max_level = std::max(0, static_cast<int>(std::floor(std::log2(static_cast<double>(g.resolution()) / 2.0))));
    return make_dyadic_family(g.domain(), 0, max_level);
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ValidationError("cannot write '" + path + "'");
    f << text;
}

GridFunction ball_member(const GridSpec& g, const Cube& c, const GridFunction& wp, double p)
{
    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(g.size());
    for_each_cell(g, g.cells(c), [&](Index i) { v[i] = 1.0; });
    GridFunction f(g, v);
    const double norm = weighted_lp_norm(f, wp, p);
    if (norm == 0.0)
        throw ResolutionError("ball cube holds no cell");
    return GridFunction(g, v / norm);
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Fractional oscillation, approximation and commutator toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    int threads = 1;
    std::uint64_t seed = 0;
    std::string out_path, csv_path;
    app.add_option("--threads", threads, "worker threads")->capture_default_str();
    app.add_option("--seed", seed, "seed for randomized sweeps")->capture_default_str();
    app.add_option("--out", out_path, "JSON report path (default stdout)");
    app.add_option("--csv", csv_path, "CSV data path");

    // osc-norm
    auto* osc = app.add_subcommand("osc-norm", "BMO_alpha and Lip_alpha estimates");
    GridArgs osc_g;
    std::string osc_f;
    double osc_alpha = 0.5;
    int osc_levels = -1;
    Index osc_budget = 0;
    osc->add_option("--f", osc_f, "function: preset:NAME[:param] or CSV path")->required();
    osc->add_option("--alpha", osc_alpha)->capture_default_str();
    add_grid(osc, osc_g, "-1..1", 1024);
    osc->add_option("--max-level", osc_levels, "finest dyadic level (-1: 2-cell cubes)")->capture_default_str();
    osc->add_option("--pair-budget", osc_budget, "Lip pairs (0: max(4096, res))")->capture_default_str();

    // cmo-profile
    auto* prof = app.add_subcommand("cmo-profile", "small-scale, large-scale and far-away oscillation curves");
    GridArgs prof_g;
    std::string prof_f;
    double prof_alpha = 0.5, prof_decay = 0.1;
    std::vector<double> prof_scales, prof_dist;
    prof->add_option("--f", prof_f)->required();
    prof->add_option("--alpha", prof_alpha)->capture_default_str();
    add_grid(prof, prof_g, "-32..32", 65536);
    prof->add_option("--scales", prof_scales, "cube volumes (default: dyadic sides down to 2 cells)")->delimiter(',');
    prof->add_option("--distances", prof_dist, "far-away distances (default: 0, L/4, L/2, 3L/4)")->delimiter(',');
    prof->add_option("--decay", prof_decay)->capture_default_str();

    // approximate
    auto* appr = app.add_subcommand("approximate", "dyadic Lipschitz approximation g_eps and h_eps");
    GridArgs appr_g;
    std::string appr_f;
    double appr_alpha = 0.5, appr_eps = 0.1, appr_t = 0.0;
    int appr_levels = -1;
    appr->add_option("--f", appr_f)->required();
    appr->add_option("--alpha", appr_alpha)->capture_default_str();
    appr->add_option("--eps", appr_eps)->capture_default_str();
    appr->add_option("--t", appr_t, "mollifier radius (0: reported default)")->capture_default_str();
    add_grid(appr, appr_g, "-2..2", 4096);
    appr->add_option("--max-level", appr_levels)->capture_default_str();

    // commutator-apply
    auto* comm = app.add_subcommand("commutator-apply", "apply T or (T)_b^m to f on the grid");
    GridArgs comm_g;
    OperatorArgs comm_o;
    std::string comm_f;
    comm->add_option("--f", comm_f)->required();
    add_operator(comm, comm_o);
    add_grid(comm, comm_g, "-1..1", 1024);

    // verify-lower
    auto* low = app.add_subcommand("verify-lower", "median construction and lower-bound ratios");
    GridArgs low_g;
    OperatorArgs low_o;
    std::string low_cube, low_mode = "ratio";
    double low_gamma = 0.25, low_eta0 = 0.0;
    bool low_half = false;
    add_operator(low, low_o);
    add_grid(low, low_g, "-16..16", 512);
    low->add_option("--cube", low_cube, "CX[,CY]:SIDE")->required();
    low->add_option("--mode", low_mode, "median, ratio or compactness")
        ->check(CLI::IsMember({"median", "ratio", "compactness"}))
        ->capture_default_str();
    low->add_option("--gamma", low_gamma)->capture_default_str();
    low->add_option("--eta0", low_eta0)->capture_default_str();
    low->add_flag("--exclude-half", low_half, "exclude half of E (compactness mode)");

    // verify-upper
    auto* up = app.add_subcommand("verify-upper", "annulus decay of the commutator");
    GridArgs up_g;
    OperatorArgs up_o;
    std::string up_cube, up_range = "3..7";
    double up_eta0 = 0.0;
    add_operator(up, up_o);
    add_grid(up, up_g, "-16..16", 4096);
    up->add_option("--cube", up_cube)->required();
    up->add_option("--d-range", up_range)->capture_default_str();
    up->add_option("--eta0", up_eta0)->capture_default_str();

    // compactness-probe
    auto* fk = app.add_subcommand("compactness-probe", "bound, tail and modulus curves over a test ball");
    GridArgs fk_g;
    OperatorArgs fk_o;
    std::string fk_levels = "1..7";
    std::vector<double> fk_n{0.5, 1.0, 2.0, 3.0}, fk_rho{0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
    add_operator(fk, fk_o);
    add_grid(fk, fk_g, "-4..4", 4096);
    fk->add_option("--ball-levels", fk_levels, "normalized indicators of cubes at 0 with side 2^-k")
        ->capture_default_str();
    fk->add_option("--n-range", fk_n)->delimiter(',')->capture_default_str();
    fk->add_option("--rho-range", fk_rho)->delimiter(',')->capture_default_str();

    // weights-check
    auto* wc = app.add_subcommand("weights-check", "A_p / A_pq constants, doubling and reverse Hoelder sweeps");
    GridArgs wc_g;
    std::string wc_w = "one";
    double wc_p = 2.0, wc_q = 0.0, wc_lambda = 2.0, wc_eps = 0.1;
    int wc_levels = -1;
    Index wc_draws = 1000;
    wc->add_option("--weight", wc_w)->capture_default_str();
    wc->add_option("--p", wc_p)->capture_default_str();
    wc->add_option("--q", wc_q, "A_pq exponent (0: skip)")->capture_default_str();
    add_grid(wc, wc_g, "-1..1", 4096);
    wc->add_option("--max-level", wc_levels)->capture_default_str();
    wc->add_option("--lambda", wc_lambda)->capture_default_str();
    wc->add_option("--eps-rh", wc_eps)->capture_default_str();
    wc->add_option("--draws", wc_draws)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        if (!app.get_subcommands().empty())
            err << app.get_subcommands().front()->help();
        return 2;
    }

    try {
        if (threads < 1)
            throw ValidationError("--threads must be at least 1");
        set_thread_count(threads);
        CLI::App* sub = app.get_subcommands().front();
        json report;
        report["tool"] = "lipcmo";
        report["version"] = kVersion;
        report["subcommand"] = sub->get_name();
        report["seed"] = seed;
        report["params"] = params_json(sub);
        json result;
        std::string csv;

        if (sub == osc) {
            const GridSpec g = osc_g.grid();
            const GridFunction f = parse_function(osc_f, g);
            report["grid"] = grid_json(f.grid());
            const OscillationParams prm{osc_alpha, default_family(f.grid(), osc_levels)};
            const Index budget = osc_budget > 0 ? osc_budget : std::max<Index>(kDefaultPairBudget, f.resolution());
            const double bmo = bmo_alpha_norm(f, prm);
            result["bmo_alpha"] = bmo;
            result["family_levels"] = {prm.family.min_level(), prm.family.max_level()};
            if (osc_alpha > 0.0) {
                const double lip = lip_alpha_norm(f, osc_alpha, budget, seed);
                result["lip_alpha"] = lip;
                result["lip_over_bmo"] = bmo > 0.0 ? json(lip / bmo) : json(nullptr);
                result["pair_budget"] = budget;
            }
        } else if (sub == prof) {
            const GridFunction f = parse_function(prof_f, prof_g.grid());
            const GridSpec& g = f.grid();
            report["grid"] = grid_json(g);
            std::vector<double> scales = prof_scales, dist = prof_dist;
            if (scales.empty())
                for (double s = g.domain().side(); s >= 2.0 * g.cell_size() * (1.0 - 1e-12); s *= 0.5)
                    scales.push_back(std::pow(s, g.dim()));
            if (dist.empty()) {
                const double half = 0.5 * g.domain().side();
                dist = {0.0, 0.25 * half, 0.5 * half, 0.75 * half};
            }
            const OscProfile p = cmo_profile(f, prof_alpha, scales, dist, prof_decay);
            result["small_scale"] = curve_json(p.small_scale);
            result["large_scale"] = curve_json(p.large_scale);
            result["far_away"] = curve_json(p.far_away);
            // c1 small scales, c2 large scales, c3 far away
            result["verdicts"] = {{"c1", p.verdict[0]}, {"c2", p.verdict[1]}, {"c3", p.verdict[2]}};
            result["in_cmo"] = p.verdict[0] && p.verdict[1] && p.verdict[2];
            csv = profile_csv(p);
        } else if (sub == appr) {
            const GridFunction f = parse_function(appr_f, appr_g.grid());
            const GridSpec& g = f.grid();
            report["grid"] = grid_json(g);
            const ApproxPlan plan = plan_scales(f, appr_alpha, appr_eps);
            const PiecewiseInterpolant gi = build_vertex_maps(f, plan);
            const double err_g = approx_error(f, gi, appr_alpha, default_family(g, appr_levels));
            const double t = appr_t > 0.0 ? appr_t : mollifier_radius(plan, g);
            const GridFunction h = mollify(gi, t, g);
            const GridFunction diff(g, f.values() - h.values());
            result["i_eps"] = plan.i_eps;
            result["j_eps"] = plan.j_eps;
            result["k_eps"] = plan.k_eps;
            result["d1"] = plan.d1;
            result["d2"] = plan.d2;
            result["offset_constant"] = plan.offset_constant;
            result["zero_extended"] = plan.zero_extended;
            if (!plan.tail_note.empty())
                result["tail_note"] = plan.tail_note;
            result["pieces"] = gi.piece_count();
            result["approx_error"] = err_g;
            result["error_over_eps"] = err_g / appr_eps;
            result["mollifier_t"] = t;
            if (appr_alpha > 0.0)
                result["lip_alpha_f_minus_h"] =
                    lip_alpha_norm(diff, appr_alpha, std::max<Index>(kDefaultPairBudget, g.resolution()), seed);
            std::ostringstream s;
            write_csv(h, s);
            csv = s.str();
        } else if (sub == comm) {
            const GridFunction f = parse_function(comm_f, comm_g.grid());
            const GridSpec& g = f.grid();
            report["grid"] = grid_json(g);
            const KernelSpec k = make_kernel(comm_o, g.dim());
            GridFunction res;
            if (comm_o.m == 0) {
                res = apply_T(k, f, g);
            } else {
                const GridFunction b = parse_function(comm_o.b, g);
                res = apply_commutator_m(CommutatorSpec{k, b, comm_o.m, {}}, f, g);
            }
            result["max_abs"] = res.values().abs().maxCoeff();
            result["l1"] = res.values().abs().sum() * g.cell_volume();
            std::ostringstream s;
            write_csv(res, s);
            csv = s.str();
        } else if (sub == low) {
            const GridSpec g = low_g.grid();
            const GridFunction b = parse_function(low_o.b, g);
            report["grid"] = grid_json(b.grid());
            const KernelSpec k = make_kernel(low_o, b.dim());
            const Cube q = parse_cube(low_cube, b.dim());
            const WeightSpec w(parse_weight(low_o.weight, b.grid()), low_o.p);
            MedianOptions mo;
            mo.seed = seed;
            auto construction_json = [](const MedianConstruction& mc) {
                const auto& c = mc.checks;
                return json{{"Q", cube_json(mc.q)},
                            {"P", cube_json(mc.p)},
                            {"k0", mc.k0},
                            {"eps0", mc.eps0},
                            {"theta0", point_json(mc.theta0)},
                            {"gamma", mc.gamma},
                            {"m_b", mc.m_b},
                            {"E1_cells", mc.e1.size()},
                            {"E2_cells", mc.e2.size()},
                            {"F1_cells", mc.f1.size()},
                            {"F2_cells", mc.f2.size()},
                            {"checks",
                             {{"pairs", c.pairs},
                              {"cover", c.cover},
                              {"f_measure", c.f_measure},
                              {"sign_failures", c.sign_failures},
                              {"median_failures", c.median_failures},
                              {"kernel_failures", c.kernel_failures},
                              {"max_small_fraction", c.max_small_fraction},
                              {"ok", c.ok()}}}};
            };
            if (low_mode == "median") {
                result["construction"] = construction_json(build_median_sets(b, k, q, low_gamma, mo));
            } else if (low_mode == "ratio") {
                const LowerBoundReport r = lower_bound_ratio(b, k, w, q, low_o.m, low_o.alpha, mo);
                result["degenerate"] = r.degenerate;
                result["q"] = r.q;
                if (!r.degenerate) {
                    result["lhs"] = r.lhs;
                    result["rhs"] = r.rhs;
                    result["ratio"] = r.ratio;
                    result["construction"] = construction_json(r.construction);
                }
            } else {
                std::vector<Index> ex;
                if (low_half) {
                    const auto e = probe_e_cells(b, k, q, low_o.alpha);
                    ex.assign(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(e.size() / 2));
                }
                const CompactnessReport r =
                    compactness_lower_probe(b, k, w, q, low_o.m, low_o.alpha, low_eta0, ex);
                result["lhs"] = r.lhs;
                result["rhs"] = r.rhs;
                result["ratio"] = r.ratio;
                result["osc_inf"] = r.osc;
                result["lip"] = r.lip;
                result["L_Q"] = r.l_q;
                result["E"] = cube_json(r.e);
                result["F"] = cube_json(r.f);
                result["x0"] = point_json(r.x0);
                result["y0"] = point_json(r.y0);
                result["excluded_cells"] = r.excluded;
            }
        } else if (sub == up) {
            const GridFunction b = parse_function(up_o.b, up_g.grid());
            report["grid"] = grid_json(b.grid());
            const KernelSpec k = make_kernel(up_o, b.dim());
            const Cube q = parse_cube(up_cube, b.dim());
            const WeightSpec w(parse_weight(up_o.weight, b.grid()), up_o.p);
            const auto [lo, hi] = parse_range(up_range);
            const AnnulusReport r = annulus_upper_decay(b, k, w, q, up_o.m, up_o.alpha, lo, hi, up_eta0);
            json pts = json::array();
            std::ostringstream s;
            s << "d,norm\n";
            for (const auto& pt : r.points) {
                pts.push_back({{"d", pt.d}, {"norm", pt.norm}});
                char buf[64];
                std::snprintf(buf, sizeof buf, "%d,%.17g\n", pt.d, pt.norm);
                s << buf;
            }
            result["annuli"] = pts;
            result["fitted"] = r.fitted;
            result["slope"] = r.fitted ? json(r.slope) : json(nullptr);
            result["warnings"] = r.warnings;
            csv = s.str();
        } else if (sub == fk) {
            const GridFunction b = parse_function(fk_o.b, fk_g.grid());
            const GridSpec& g = b.grid();
            report["grid"] = grid_json(g);
            const KernelSpec k = make_kernel(fk_o, g.dim());
            const WeightSpec w(parse_weight(fk_o.weight, g), fk_o.p);
            const double q = exponent_q(fk_o.p, fk_o.m, fk_o.alpha, k.beta(), g.dim());
            const auto [lo, hi] = parse_range(fk_levels);
            const GridFunction wp(g, w.w.values().pow(fk_o.p));
            std::vector<GridFunction> ball;
            for (int j = lo; j <= hi; ++j)
                ball.push_back(ball_member(g, Cube(zero_point(g.dim()), std::ldexp(1.0, -j)), wp, fk_o.p));
            const FkReport r = fk_compactness_probe(CommutatorSpec{k, b, fk_o.m, {}}, w, fk_o.p, q, ball, fk_n, fk_rho);
            auto curve = [](const std::vector<CurvePoint>& c) {
                json a = json::array();
                for (const auto& pt : c)
                    a.push_back({{"parameter", pt.parameter}, {"value", pt.value}});
                return a;
            };
            result["q"] = q;
            result["bound"] = r.bound;
            result["tail"] = curve(r.tail);
            result["modulus"] = curve(r.modulus);
            std::ostringstream s;
            s << "curve,parameter,value\n";
            char buf[96];
            for (const auto& pt : r.tail) {
                std::snprintf(buf, sizeof buf, "tail,%.17g,%.17g\n", pt.parameter, pt.value);
                s << buf;
            }
            for (const auto& pt : r.modulus) {
                std::snprintf(buf, sizeof buf, "modulus,%.17g,%.17g\n", pt.parameter, pt.value);
                s << buf;
            }
            csv = s.str();
        } else if (sub == wc) {
            const GridSpec g = wc_g.grid();
            const GridFunction wf = parse_weight(wc_w, g);
            report["grid"] = grid_json(g);
            const std::optional<double> qopt = wc_q > 0.0 ? std::optional<double>(wc_q) : std::nullopt;
            const WeightSpec w(wf, wc_p, qopt);
            const DyadicFamily fam = default_family(g, wc_levels);
            result["ap_constant"] = ap_constant(w, fam);
            if (qopt)
                result["apq_constant"] = apq_constant(w, fam);
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const double h = g.cell_size(), side = g.domain().side();
            Index dbl_ok = 0, rh_ok = 0;
            double worst_dbl = 0.0, worst_rh = 0.0;
            for (Index t = 0; t < wc_draws; ++t) {
                const double s = std::exp(std::log(4.0 * h) + u(rng) * (std::log(side / wc_lambda) - std::log(4.0 * h)));
                Point c(g.dim());
                for (int j = 0; j < g.dim(); ++j)
                    c[j] = g.domain().lo(j) + 0.5 * wc_lambda * s + u(rng) * (side - wc_lambda * s);
                const Cube cube(c, s);
                const DoublingReport d = doubling_check(w, cube, wc_lambda);
                dbl_ok += d.ok ? 1 : 0;
                worst_dbl = std::max(worst_dbl, d.ratio / d.cap);
                const ReverseHolderReport r = reverse_holder_check(w, cube, wc_eps);
                rh_ok += r.ok ? 1 : 0;
                worst_rh = std::max(worst_rh, r.lhs / r.rhs);
            }
            result["draws"] = wc_draws;
            result["doubling_ok"] = dbl_ok;
            result["doubling_worst_ratio_over_cap"] = worst_dbl;
            result["reverse_holder_ok"] = rh_ok;
            result["reverse_holder_worst_lhs_over_rhs"] = worst_rh;
        }

        report["result"] = result;
        const std::string text = report.dump(2) + "\n";
        if (out_path.empty())
            out << text;
        else
            write_text(out_path, text);
        if (!csv_path.empty()) {
            if (csv.empty())
                throw ValidationError("this subcommand has no CSV output");
            write_text(csv_path, csv);
        }
        return 0;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "numeric error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace lipcmo
