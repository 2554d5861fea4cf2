////////////////////////////////////////////////////////////////////////////////
// capi.cc
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  C binding over the core library: translates exceptions into status codes,
//  fixed-size C structs, heap strings, and opaque handles.  No numerics here.
*/
////////////////////////////////////////////////////////////////////////////////
#include <wgc/wgc.h>

#include "../core/bounds.hh"
#include "../core/gclosure.hh"
#include "../core/laminate.hh"
#include "../core/shield.hh"
#include "../core/thermal.hh"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

struct wgc_laminate {
    wgc::LaminateTree tree;
};
struct wgc_convergence {
    wgc::ConvergenceReport report;
};
struct wgc_shield {
    wgc::ShieldSolution sol;
};

namespace {

thread_local std::string t_last_error;

template <class F>
wgc_status guarded(F &&fn) {
    try {
        fn();
        t_last_error.clear();
        return WGC_OK;
    } catch (const wgc::InfeasibleError &e) {
        t_last_error = e.what();
        return WGC_ERR_INFEASIBLE;
    } catch (const wgc::NoConvergence &e) {
        t_last_error = e.what();
        return WGC_ERR_NO_CONVERGENCE;
    } catch (const std::invalid_argument &e) {
        t_last_error = e.what();
        return WGC_ERR_INVALID;
    } catch (const std::exception &e) {
        t_last_error = e.what();
        return WGC_ERR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return WGC_ERR_INTERNAL;
    }
}

wgc_status invalid(const char *msg) {
    t_last_error = msg;
    return WGC_ERR_INVALID;
}

wgc::SymTensor2 to_sym(const double m[6]) {
    return wgc::SymTensor2(Eigen::Map<const wgc::Vector6>(m));
}

wgc::Vector3 to_vec3(const double v[3]) {
    return Eigen::Map<const wgc::Vector3>(v);
}

char *dup_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void copy_tag(char *dst, size_t cap, const char *src) {
    std::snprintf(dst, cap, "%s", src);
}

void fill_membership(wgc_membership_result *out, const wgc::MembershipVerdict &v) {
    out->verdict = static_cast<int>(v.verdict);
    copy_tag(out->verdict_name, sizeof(out->verdict_name), wgc::verdict_name(v.verdict));
    out->residual = v.residual;
    out->bound = v.bound;
    out->tol_abs = v.tol_abs;
}

} // namespace

extern "C" {

const char *wgc_version(void) { return "0.1.0"; }

const char *wgc_last_error(void) { return t_last_error.c_str(); }

void wgc_string_free(char *s) { std::free(s); }

////////////////////////////////////////////////////////////////////////////////
// Bounds and membership
////////////////////////////////////////////////////////////////////////////////

wgc_status wgc_bound_stress(double f, double lambda, double mu,
                            const double sigma0[6], wgc_bound_result *out) {
    if (!sigma0 || !out) return invalid("null argument");
    return guarded([&] {
        auto b = wgc::porous_bound(f, {lambda, mu}, to_sym(sigma0));
        out->value = b.value;
        out->phase_term = b.compliance_term;
        for (int i = 0; i < 3; ++i) out->eigenvalues[i] = b.eigenvalues[i];
        copy_tag(out->branch, sizeof(out->branch), wgc::porous_branch_tag(b.branch));
        out->sign_flipped = b.sign_flipped ? 1 : 0;
    });
}

wgc_status wgc_bound_strain(double f, double lambda, double mu,
                            const double eps0[6], wgc_bound_result *out) {
    if (!eps0 || !out) return invalid("null argument");
    return guarded([&] {
        auto b = wgc::rigid_bound(f, {lambda, mu}, to_sym(eps0));
        out->value = b.value;
        out->phase_term = b.elastic_term;
        auto eig = wgc::eig_sym(wgc::SymTensor2(to_sym(eps0)));
        for (int i = 0; i < 3; ++i) out->eigenvalues[i] = eig.values[i];
        copy_tag(out->branch, sizeof(out->branch), wgc::rigid_branch_tag(b.branch));
        out->sign_flipped = 0;
    });
}

wgc_status wgc_membership_stress(double f, double lambda, double mu,
                                 const double sigma0[6], const double eps0[6],
                                 double rel_tol, wgc_membership_result *out) {
    if (!sigma0 || !eps0 || !out) return invalid("null argument");
    return guarded([&] {
        double tol = rel_tol > 0.0 ? rel_tol : 1e-9;
        fill_membership(out, wgc::membership_porous(f, {lambda, mu}, to_sym(sigma0),
                                                    to_sym(eps0), tol));
    });
}

wgc_status wgc_membership_strain(double f, double lambda, double mu,
                                 const double sigma0[6], const double eps0[6],
                                 double rel_tol, wgc_membership_result *out) {
    if (!sigma0 || !eps0 || !out) return invalid("null argument");
    return guarded([&] {
        double tol = rel_tol > 0.0 ? rel_tol : 1e-9;
        fill_membership(out, wgc::membership_rigid(f, {lambda, mu}, to_sym(sigma0),
                                                   to_sym(eps0), tol));
    });
}

wgc_status wgc_boundary_strain(double f, double lambda, double mu,
                               const double sigma0[6], const double eps_perp[5],
                               double eps0_out[6]) {
    if (!sigma0 || !eps_perp || !eps0_out) return invalid("null argument");
    return guarded([&] {
        std::array<double, 5> perp;
        for (int i = 0; i < 5; ++i) perp[static_cast<size_t>(i)] = eps_perp[i];
        auto eps = wgc::boundary_strain(f, {lambda, mu}, to_sym(sigma0), perp);
        for (int i = 0; i < 6; ++i) eps0_out[i] = eps.v[i];
    });
}

////////////////////////////////////////////////////////////////////////////////
// Laminates
////////////////////////////////////////////////////////////////////////////////

wgc_status wgc_laminate_optimize(int elastic_mode, double f, double lambda,
                                 double mu, double delta, const double applied[6],
                                 int rank, int budget, uint64_t seed,
                                 wgc_laminate **out, wgc_optimize_result *result) {
    if (!applied || !out) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        wgc::OptimizeOptions opt;
        if (rank > 0) opt.rank = rank;
        if (budget > 0) opt.budget = budget;
        opt.seed = seed;
        wgc::OptimizeOutcome oc =
            elastic_mode
                ? wgc::optimize_elastic(f, {lambda, mu}, delta, to_sym(applied), opt)
                : wgc::optimize_complementary(f, {lambda, mu}, delta, to_sym(applied), opt);
        auto *h = new wgc_laminate{std::move(oc.tree)};
        if (result) {
            result->energy = oc.energy;
            result->rank = h->tree.rank();
            result->evaluations = oc.evaluations;
            result->converged = oc.converged ? 1 : 0;
        }
        *out = h;
    });
}

wgc_status wgc_laminate_parse(const char *text, wgc_laminate **out) {
    if (!text || !out) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        auto tree = wgc::parse_tree(text);
        wgc::validate_tree(tree);
        *out = new wgc_laminate{std::move(tree)};
    });
}

wgc_status wgc_laminate_format(const wgc_laminate *h, char **text) {
    if (!h || !text) return invalid("null argument");
    return guarded([&] { *text = dup_string(wgc::format_tree(h->tree)); });
}

wgc_status wgc_laminate_fraction(const wgc_laminate *h, double *fraction) {
    if (!h || !fraction) return invalid("null argument");
    return guarded([&] { *fraction = wgc::phase1_fraction(h->tree); });
}

wgc_status wgc_laminate_rank(const wgc_laminate *h, int *rank) {
    if (!h || !rank) return invalid("null argument");
    return guarded([&] { *rank = h->tree.rank(); });
}

wgc_status wgc_laminate_effective(const wgc_laminate *h, double lambda, double mu,
                                  double delta, double C_out[36],
                                  double *min_rcond) {
    if (!h || !C_out) return invalid("null argument");
    return guarded([&] {
        auto r = wgc::sequential_laminate(h->tree, {lambda, mu}, delta);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                C_out[i * 6 + j] = r.C.M(i, j);
        if (min_rcond) *min_rcond = r.min_rcond;
    });
}

wgc_status wgc_laminate_sweep_json(const wgc_laminate *h, int elastic_mode,
                                   double lambda, double mu,
                                   const double applied[6], const double *ladder,
                                   int n_ladder, char **json) {
    if (!h || !applied || !ladder || !json) return invalid("null argument");
    if (n_ladder < 2) return invalid("degeneration ladder needs at least 2 entries");
    return guarded([&] {
        std::vector<double> lad(ladder, ladder + n_ladder);
        auto mode = elastic_mode ? wgc::EnergyMode::Elastic
                                 : wgc::EnergyMode::Complementary;
        auto sw = wgc::delta_sweep(h->tree, {lambda, mu}, mode, to_sym(applied), lad);
        std::string s = "{\"rows\":[";
        char buf[128];
        for (size_t i = 0; i < sw.rows.size(); ++i) {
            std::snprintf(buf, sizeof(buf),
                          "%s{\"delta\":%.17g,\"energy\":%.17g,\"flagged\":%s}",
                          i ? "," : "", sw.rows[i].delta, sw.rows[i].energy,
                          sw.rows[i].flagged ? "true" : "false");
            s += buf;
        }
        std::snprintf(buf, sizeof(buf), "],\"extrapolated\":%.17g,\"monotone\":%s}",
                      sw.extrapolated, sw.monotone ? "true" : "false");
        s += buf;
        *json = dup_string(s);
    });
}

void wgc_laminate_free(wgc_laminate *h) { delete h; }

////////////////////////////////////////////////////////////////////////////////
// Convergence runs
////////////////////////////////////////////////////////////////////////////////

namespace {

wgc_status converge_impl(bool strain_side, double f, double lambda, double mu,
                         const double seed6[6], const double perp5[5],
                         const double *ladder, int n_ladder, uint64_t rng_seed,
                         wgc_convergence **out) {
    if (!seed6 || !perp5 || !ladder || !out) return invalid("null argument");
    if (n_ladder < 1) return invalid("gap ladder is empty");
    *out = nullptr;
    return guarded([&] {
        std::array<double, 5> perp;
        for (int i = 0; i < 5; ++i) perp[static_cast<size_t>(i)] = perp5[i];
        std::vector<double> lad(ladder, ladder + n_ladder);
        wgc::ConvergenceReport rep =
            strain_side
                ? wgc::converge_strain(f, {lambda, mu}, to_sym(seed6), perp, lad, rng_seed)
                : wgc::converge_stress(f, {lambda, mu}, to_sym(seed6), perp, lad, rng_seed);
        *out = new wgc_convergence{std::move(rep)};
    });
}

} // namespace

wgc_status wgc_converge_stress(double f, double lambda, double mu,
                               const double sigma0[6], const double eps_perp[5],
                               const double *ladder, int n_ladder,
                               uint64_t rng_seed, wgc_convergence **out) {
    return converge_impl(false, f, lambda, mu, sigma0, eps_perp, ladder, n_ladder,
                         rng_seed, out);
}

wgc_status wgc_converge_strain(double f, double lambda, double mu,
                               const double eps0[6], const double sigma_perp[5],
                               const double *ladder, int n_ladder,
                               uint64_t rng_seed, wgc_convergence **out) {
    return converge_impl(true, f, lambda, mu, eps0, sigma_perp, ladder, n_ladder,
                         rng_seed, out);
}

wgc_status wgc_convergence_summarize(const wgc_convergence *h,
                                     wgc_convergence_summary *out) {
    if (!h || !out) return invalid("null argument");
    out->margins_ok = h->report.margins_ok ? 1 : 0;
    out->residual_decreasing = h->report.residual_decreasing ? 1 : 0;
    out->final_residual = h->report.final_residual;
    out->final_alpha_dev = h->report.final_alpha_dev;
    out->rows = static_cast<int>(h->report.rows.size());
    return WGC_OK;
}

wgc_status wgc_convergence_json(const wgc_convergence *h, char **json) {
    if (!h || !json) return invalid("null argument");
    return guarded([&] { *json = dup_string(h->report.to_json()); });
}

wgc_status wgc_convergence_csv(const wgc_convergence *h, char **csv) {
    if (!h || !csv) return invalid("null argument");
    return guarded([&] { *csv = dup_string(h->report.to_csv()); });
}

void wgc_convergence_free(wgc_convergence *h) { delete h; }

////////////////////////////////////////////////////////////////////////////////
// Conductivity analogue
////////////////////////////////////////////////////////////////////////////////

wgc_status wgc_thermal_pair(const double q0[3], const double e0[3], double f,
                            double k1, double k2, int dim, double rel_tol,
                            wgc_thermal_result *out) {
    if (!q0 || !e0 || !out) return invalid("null argument");
    return guarded([&] {
        double tol = rel_tol > 0.0 ? rel_tol : 1e-9;
        auto means = wgc::wiener_means(f, k1, k2);
        auto v = wgc::pair_membership(to_vec3(q0), to_vec3(e0), f, k1, k2, dim, tol);
        out->k_plus = means.k_plus;
        out->k_minus = means.k_minus;
        out->verdict = static_cast<int>(v.verdict);
        copy_tag(out->verdict_name, sizeof(out->verdict_name),
                 wgc::verdict_name(v.verdict));
        out->residual = v.residual;
        out->tol_abs = v.tol_abs;
    });
}

wgc_status wgc_thermal_laminate(const double q0[3], const double e0[3], double f,
                                double k1, double k2, int dim, double rel_tol,
                                double K_out[9], double normal_out[3]) {
    if (!q0 || !e0 || !K_out) return invalid("null argument");
    return guarded([&] {
        double tol = rel_tol > 0.0 ? rel_tol : 1e-9;
        auto lam = wgc::attaining_laminate(to_vec3(q0), to_vec3(e0), f, k1, k2, dim, tol);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                K_out[i * 3 + j] = lam.K(i, j);
        if (normal_out)
            for (int i = 0; i < 3; ++i) normal_out[i] = lam.normal[i];
    });
}

wgc_status wgc_thermal_insulating(const double q0[3], const double e0[3], double f,
                                  double k1, int dim, double rel_tol,
                                  double *threshold, wgc_thermal_result *out) {
    if (!q0 || !e0 || !out) return invalid("null argument");
    return guarded([&] {
        double tol = rel_tol > 0.0 ? rel_tol : 1e-9;
        auto v = wgc::insulating_membership(to_vec3(q0), to_vec3(e0), f, k1, dim, tol);
        if (threshold) *threshold = wgc::insulating_bound(to_vec3(q0), f, k1, dim);
        auto means = wgc::wiener_means(f, k1, 0.0);
        out->k_plus = means.k_plus;
        out->k_minus = means.k_minus;
        out->verdict = static_cast<int>(v.verdict);
        copy_tag(out->verdict_name, sizeof(out->verdict_name),
                 wgc::verdict_name(v.verdict));
        out->residual = v.residual;
        out->tol_abs = v.tol_abs;
    });
}

wgc_status wgc_guide_tensor(const double q0[3], const double e0[3], int dim,
                            double K_out[9]) {
    if (!q0 || !e0 || !K_out) return invalid("null argument");
    return guarded([&] {
        auto K = wgc::guide_tensor(to_vec3(q0), to_vec3(e0), dim);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                K_out[i * 3 + j] = K(i, j);
    });
}

////////////////////////////////////////////////////////////////////////////////
// Flux shielding
////////////////////////////////////////////////////////////////////////////////

wgc_status wgc_shield_solve(const wgc_shield_params *params, wgc_shield **out) {
    if (!params || !out) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        wgc::ShieldProblem p;
        p.width = params->width;
        p.window = params->window;
        p.nx = params->nx;
        p.ny = params->ny;
        p.budget = params->budget;
        p.k1 = params->k1;
        if (params->fp_tol > 0.0) p.fp_tol = params->fp_tol;
        if (params->max_outer > 0) p.max_outer = params->max_outer;
        *out = new wgc_shield{wgc::shield_solve(p)};
    });
}

wgc_status wgc_shield_get_metrics(const wgc_shield *h, wgc_shield_metrics *out) {
    if (!h || !out) return invalid("null argument");
    out->resistance = h->sol.resistance;
    out->lambda = h->sol.lambda;
    out->fp_residual = h->sol.fp_residual;
    out->outer_iterations = h->sol.outer_iterations;
    out->saturated = h->sol.saturated ? 1 : 0;
    return WGC_OK;
}

wgc_status wgc_shield_temperature(wgc_shield *h, int *flagged_cells,
                                  double *inlet_drop) {
    if (!h) return invalid("null argument");
    return guarded([&] {
        if (!h->sol.has_temperature) wgc::reconstruct_temperature(h->sol);
        if (flagged_cells) *flagged_cells = h->sol.flagged_cells;
        if (inlet_drop) *inlet_drop = h->sol.inlet_drop;
    });
}

wgc_status wgc_shield_summary_json(const wgc_shield *h, char **json) {
    if (!h || !json) return invalid("null argument");
    return guarded([&] { *json = dup_string(h->sol.summary_json()); });
}

wgc_status wgc_shield_grid_csv(const wgc_shield *h, const char *kind, char **csv) {
    if (!h || !kind || !csv) return invalid("null argument");
    return guarded([&] { *csv = dup_string(h->sol.grid_csv(kind)); });
}

void wgc_shield_free(wgc_shield *h) { delete h; }

} // extern "C"
