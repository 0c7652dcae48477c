// mtcli: evaluate Mordell-Tornheim series and Tricomi Psi, verify the
// functional-equation identities over grids, and emit CSV tables.
//
// Exit codes: 0 success, 1 usage/config error, 2 refusal (region or budget),
// 3 verification failure.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mtds/errors.hpp"
#include "mtds/kernels.hpp"
#include "mtds/mt_series.hpp"
#include "mtds/psi.hpp"
#include "mtds/report.hpp"
#include "mtds/verify.hpp"

using namespace mtds;

namespace {

int exit_code_for(const Error& e) {
    switch (e.kind) {
        case ErrKind::config:
        case ErrKind::invalid:
            return 1;
        default:
            return 2;
    }
}

std::vector<cplx> parse_tuple(const std::string& s, int expect) {
    std::vector<cplx> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(cplx_from_string(item));
    if (expect > 0 && int(out.size()) != expect)
        fail(ErrKind::config, "expected " + std::to_string(expect) + " components, got " +
                                  std::to_string(out.size()));
    return out;
}

void load_grid_file(GridConfig& cfg, const std::string& path) {
    auto j = parse_json_file(path);
    if (j.contains("axes")) {
        for (auto& ax : j["axes"]) {
            GridAxis g;
            g.start = ax.at("start").get<double>();
            g.stop = ax.at("stop").get<double>();
            g.step = ax.at("step").get<double>();
            cfg.axes.push_back(g);
        }
    }
    if (j.contains("points")) {
        for (auto& pt : j["points"]) {
            std::vector<cplx> p;
            for (auto& c : pt) {
                if (c.is_string())
                    p.push_back(cplx_from_string(c.get<std::string>()));
                else
                    p.push_back(cplx(c.get<double>(), 0.0));
            }
            cfg.extra_points.push_back(std::move(p));
        }
    }
}

int cmd_eval(int r, const std::string& s_str, const std::string& coeff_str, double tol,
             long long budget, const std::string& out_path) {
    MtPoint p;
    p.r = r;
    p.s = parse_tuple(s_str, r + 1);
    auto coeffs = parse_coeff_list(coeff_str, r);
    MtBudget b;
    if (budget > 0) b.max_terms = budget;
    MtResult res = mt_direct(p, coeffs, tol, b);
    std::printf("value      = %s\n", cplx_to_string(res.value).c_str());
    std::printf("tail_bound = %.3e\n", res.trunc.tail_bound);
    std::printf("route      = direct\n");
    std::printf("terms      = %lld\n", res.trunc.terms_used);
    if (!out_path.empty()) {
        ojson j = ojson::object();
        j["value"] = cplx_to_string(res.value);
        j["tail_bound"] = res.trunc.tail_bound;
        j["route"] = "direct";
        j["terms"] = res.trunc.terms_used;
        write_json_file(out_path, j);
    }
    return 0;
}

int cmd_psi(const std::string& a_str, const std::string& c_str, const std::string& x_str,
            double arg_x, bool have_arg, const std::string& route, double phi, long long nodes,
            double gamma_absc, bool have_gamma, double T, double h, int N) {
    cplx a = cplx_from_string(a_str);
    cplx c = cplx_from_string(c_str);
    cplx xv = cplx_from_string(x_str);
    if (xv == cplx(0.0)) fail(ErrKind::invalid, "psi: x must be nonzero");
    BranchedBase x = have_arg ? BranchedBase(xv, arg_x) : BranchedBase(xv);

    PsiEvaluation ev;
    if (route == "auto") {
        ev = psi(a, c, x);
    } else if (route == "integral") {
        double ph = phi;
        if (!(ph > -PI && ph < PI)) ph = -x.declared_arg / 2.0;
        ev = psi_integral(a, c, x, ph, nodes > 0 ? nodes : 512);
    } else if (route == "mb") {
        if (have_gamma) {
            double Tq = T > 0 ? T : 40.0 + 2.0 * std::abs(a.imag()) + 2.0 * std::abs(c.imag());
            double hq = h > 0 ? h : 0.05;
            ev = psi_mellin_barnes(a, c, x, gamma_absc, Tq, hq);
        } else {
            ev = psi_mellin_barnes_auto(a, c, x);
        }
    } else if (route == "asym") {
        int n = N;
        if (n <= 0) n = psi_best_N(a, c, x.mod(), nullptr);
        if (n <= 0) fail(ErrKind::region, "psi: no valid expansion length at this x");
        ev = psi_asymptotic(a, c, x, n);
    } else {
        fail(ErrKind::config, "psi: --route must be auto|integral|mb|asym");
    }
    std::printf("value       = %s\n", cplx_to_string(ev.value).c_str());
    std::printf("route       = %s%s%s\n", ev.params.route.c_str(),
                ev.params.inner_route.empty() ? "" : " via ",
                ev.params.inner_route.c_str());
    std::printf("error_bound = %.3e%s\n", ev.error_bound,
                ev.params.heuristic_bound ? " (heuristic)" : "");
    return 0;
}

int cmd_verify(GridConfig cfg, const std::string& grid_path, const std::string& out_path,
               const std::string& s1_str) {
    if (!grid_path.empty()) load_grid_file(cfg, grid_path);
    if (cfg.identity == "kmt" && cfg.axes.empty() && cfg.extra_points.empty()) {
        if (s1_str.empty()) fail(ErrKind::config, "verify kmt: need --s1 or a grid");
        cfg.extra_points.push_back({cplx_from_string(s1_str)});
    }
    if (cfg.axes.empty() && cfg.extra_points.empty())
        fail(ErrKind::config, "verify: no grid points (use --grid or --s1)");

    auto [reps, sum] = run_grid(cfg);
    ojson j = grid_report_json(cfg, reps, sum);
    if (!out_path.empty()) write_json_file(out_path, j);

    std::printf("identity=%s points=%lld passed=%lld failed=%lld skipped=%lld "
                "max_rel_residual=%.3e pass_rate=%.4f\n",
                cfg.identity.c_str(), sum.points, sum.passed, sum.failed, sum.skipped,
                sum.max_rel_residual, sum.pass_rate);
    if (sum.failed > 0) {
        const FEReport* worst = nullptr;
        for (auto& r : reps)
            if (!r.skipped && !r.pass && (!worst || r.rel_residual > worst->rel_residual))
                worst = &r;
        if (worst) {
            std::string pt;
            for (size_t i = 0; i < worst->point.size(); ++i)
                pt += (i ? "," : "") + cplx_to_string(worst->point[i]);
            std::fprintf(stderr, "worst offender: s=(%s) rel_residual=%.6e\n", pt.c_str(),
                         worst->rel_residual);
        }
        return 3;
    }
    for (auto& r : reps)
        if (r.skipped)
            std::fprintf(stderr, "skipped: %s\n", r.skip_reason.c_str());
    return 0;
}

struct AxisSpec {
    int index = -1; // which component carries the range
    double start = 0, stop = 0, step = 1;
};

int cmd_table_mt(int r, const std::string& s_str, const std::string& coeff_str, double tol,
                 const std::string& out_path) {
    // one component given as start:stop:step
    std::vector<std::string> comps;
    {
        std::stringstream ss(s_str);
        std::string item;
        while (std::getline(ss, item, ',')) comps.push_back(item);
    }
    if (int(comps.size()) != r + 1)
        fail(ErrKind::config, "table: need r+1 components in --s");
    AxisSpec ax;
    std::vector<cplx> base(size_t(r) + 1);
    for (int i = 0; i <= r; ++i) {
        auto& c = comps[size_t(i)];
        if (c.find(':') != std::string::npos) {
            if (ax.index >= 0) fail(ErrKind::config, "table: only one ranged component");
            ax.index = i;
            if (std::sscanf(c.c_str(), "%lf:%lf:%lf", &ax.start, &ax.stop, &ax.step) != 3 ||
                ax.step <= 0)
                fail(ErrKind::config, "table: bad range spec " + c);
        } else {
            base[size_t(i)] = cplx_from_string(c);
        }
    }
    if (ax.index < 0) fail(ErrKind::config, "table: one component must be start:stop:step");
    auto coeffs = parse_coeff_list(coeff_str, r);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) fail(ErrKind::config, "table: cannot write " + out_path);
    out << "# s_" << (ax.index + 1) << ", re(value), im(value), tail_bound\n";
    char buf[160];
    for (double v = ax.start; v <= ax.stop + 1e-12; v += ax.step) {
        MtPoint p;
        p.r = r;
        p.s = base;
        p.s[size_t(ax.index)] = cplx(v, 0.0);
        MtResult res = mt_direct(p, coeffs, tol);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.3e\n", v, res.value.real(),
                      res.value.imag(), res.trunc.tail_bound);
        out << buf;
    }
    return 0;
}

int cmd_table_psi(const std::string& a_str, const std::string& c_str, const std::string& lrange,
                  const std::string& out_path) {
    cplx a = cplx_from_string(a_str);
    cplx c = cplx_from_string(c_str);
    long long l0 = 0, l1 = -1;
    if (std::sscanf(lrange.c_str(), "%lld:%lld", &l0, &l1) != 2 || l0 < 1)
        fail(ErrKind::config, "table: --l must be lo:hi with lo >= 1");
    std::ofstream out(out_path, std::ios::binary);
    if (!out) fail(ErrKind::config, "table: cannot write " + out_path);
    out << "# l, re(Psi(a,c;2*pi*i*l)), im(Psi), abs(Psi), error_bound\n";
    char buf[200];
    for (long long l = l0; l <= l1; ++l) {
        PsiEvaluation ev = psi(a, c, BranchedBase::imag_axis(TWO_PI * double(l), +1));
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.3e\n", l, ev.value.real(),
                      ev.value.imag(), std::abs(ev.value), ev.error_bound);
        out << buf;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mordell-Tornheim multiple Dirichlet series toolkit"};
    app.require_subcommand(1);

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate the series at one point");
    int ev_r = 2;
    std::string ev_s, ev_coeffs = "ones,ones", ev_out;
    double ev_tol = 1e-6;
    long long ev_budget = 0;
    eval->add_option("--r", ev_r, "depth r");
    eval->add_option("--s", ev_s, "comma-separated s_1,...,s_{r+1} (a+bi components)")
        ->required();
    eval->add_option("--coeffs", ev_coeffs, "coefficient labels, one per slot");
    eval->add_option("--tol", ev_tol, "absolute tail tolerance");
    eval->add_option("--budget", ev_budget, "term budget (default 1e8)");
    eval->add_option("--out", ev_out, "optional JSON output path");

    // psi
    auto* psi_cmd = app.add_subcommand("psi", "evaluate Tricomi Psi(a,c;x)");
    std::string ps_a, ps_c, ps_x, ps_route = "auto";
    double ps_arg = 0.0, ps_phi = 10.0, ps_gamma = 0.0, ps_T = 0.0, ps_h = 0.0;
    long long ps_nodes = 0;
    int ps_N = 0;
    bool ps_have_arg = false, ps_have_gamma = false;
    psi_cmd->add_option("--a", ps_a)->required();
    psi_cmd->add_option("--c", ps_c)->required();
    psi_cmd->add_option("--x", ps_x)->required();
    auto* argopt = psi_cmd->add_option("--arg-x", ps_arg, "declared arg of x (radians)");
    psi_cmd->add_option("--route", ps_route, "auto|integral|mb|asym");
    psi_cmd->add_option("--phi", ps_phi, "integral route: ray angle");
    psi_cmd->add_option("--nodes", ps_nodes, "integral route: trapezoid nodes");
    auto* gopt = psi_cmd->add_option("--gamma", ps_gamma, "mb route: contour abscissa");
    psi_cmd->add_option("--T", ps_T, "mb route: contour height");
    psi_cmd->add_option("--step", ps_h, "mb route: step");
    psi_cmd->add_option("--N", ps_N, "asym route: expansion length");

    // verify
    auto* ver = app.add_subcommand("verify", "verify an identity over a grid");
    GridConfig cfg;
    std::string ver_grid, ver_out, ver_s1, ver_coeffs;
    ver->add_option("--identity", cfg.identity, "lemma34_1|thm21|thm22|thm12|cm|kmt")
        ->required();
    ver->add_option("--r", cfg.r, "depth r");
    ver->add_option("--coeffs", ver_coeffs, "coefficient labels");
    ver->add_option("--grid", ver_grid, "grid.json path");
    ver->add_option("--tol", cfg.tol, "relative residual tolerance");
    ver->add_option("--out", ver_out, "report.json output path");
    ver->add_option("--q", cfg.kmt_q, "kmt: modulus");
    ver->add_option("--chi1", cfg.kmt_chi1, "kmt: first character index");
    ver->add_option("--chi2", cfg.kmt_chi2, "kmt: second character index");
    ver->add_option("--k", cfg.kmt_k, "kmt: hyperplane integer");
    ver->add_option("--s1", ver_s1, "kmt: s_1 (s_2 fixed by the hyperplane)");
    ver->add_option("--threads", cfg.threads, "worker threads (0 = auto)");

    // table
    auto* tab = app.add_subcommand("table", "CSV table over a range");
    std::string tb_kind = "mt", tb_s, tb_coeffs = "ones,ones", tb_a, tb_c, tb_l, tb_out;
    int tb_r = 2;
    double tb_tol = 1e-8;
    tab->add_option("--kind", tb_kind, "mt|psi");
    tab->add_option("--r", tb_r);
    tab->add_option("--s", tb_s, "components, one as start:stop:step");
    tab->add_option("--coeffs", tb_coeffs);
    tab->add_option("--a", tb_a);
    tab->add_option("--c", tb_c);
    tab->add_option("--l", tb_l, "psi: l range lo:hi, x = 2*pi*i*l");
    tab->add_option("--tol", tb_tol);
    tab->add_option("--out", tb_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*eval) return cmd_eval(ev_r, ev_s, ev_coeffs, ev_tol, ev_budget, ev_out);
        if (*psi_cmd) {
            ps_have_arg = argopt->count() > 0;
            ps_have_gamma = gopt->count() > 0;
            return cmd_psi(ps_a, ps_c, ps_x, ps_arg, ps_have_arg, ps_route,
                           ps_phi > PI ? 10.0 : ps_phi, ps_nodes, ps_gamma, ps_have_gamma, ps_T,
                           ps_h, ps_N);
        }
        if (*ver) {
            if (!ver_coeffs.empty()) {
                if (cfg.identity == "cm") {
                    cfg.coeff_labels = {ver_coeffs};
                } else {
                    std::stringstream ss(ver_coeffs);
                    std::string item;
                    while (std::getline(ss, item, ',')) {
                        if (item.rfind("finite:[", 0) == 0 && item.back() != ']') {
                            std::string acc = item;
                            while (acc.back() != ']' && std::getline(ss, item, ','))
                                acc += "," + item;
                            cfg.coeff_labels.push_back(acc);
                        } else if (!item.empty()) {
                            cfg.coeff_labels.push_back(item);
                        }
                    }
                }
            }
            return cmd_verify(cfg, ver_grid, ver_out, ver_s1);
        }
        if (*tab) {
            if (tb_kind == "mt") return cmd_table_mt(tb_r, tb_s, tb_coeffs, tb_tol, tb_out);
            if (tb_kind == "psi") return cmd_table_psi(tb_a, tb_c, tb_l, tb_out);
            fail(ErrKind::config, "table: --kind must be mt or psi");
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
