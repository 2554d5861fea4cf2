/*******************************************************************************
 * wgc.h
 *******************************************************************************
 * C interface to the weak-G-closure library: optimal energy bounds for
 * elastic composites with a void or rigid phase, pair-membership tests,
 * sequential-laminate optimization, squeezing-family convergence runs, the
 * conductivity analogue, and the flux-shielding solver.
 *
 * Conventions
 *   - Symmetric 3x3 tensors pass as Mandel 6-vectors
 *         (t11, t22, t33, sqrt2*t23, sqrt2*t13, sqrt2*t12),
 *     so double contraction is the plain dot product.
 *   - 6x6 tensors pass as row-major double[36] in the same frame.
 *   - Every function returns a wgc_status; on failure wgc_last_error()
 *     describes the reason (thread-local, valid until the next call on the
 *     same thread).
 *   - Strings returned through char** are heap-allocated; release them with
 *     wgc_string_free.  Opaque handles have their own _free function.
 ******************************************************************************/
#ifndef WGC_H
#define WGC_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wgc_status {
    WGC_OK = 0,
    WGC_ERR_INVALID = 2,        /* bad argument or malformed input */
    WGC_ERR_INFEASIBLE = 3,     /* requested object does not exist */
    WGC_ERR_NO_CONVERGENCE = 4, /* iteration failed to reach tolerance */
    WGC_ERR_INTERNAL = 5
} wgc_status;

const char *wgc_version(void);
const char *wgc_last_error(void);
void wgc_string_free(char *s);

/* ---- energy bounds ------------------------------------------------------ */

typedef struct wgc_bound_result {
    double value;          /* the optimal bound */
    double phase_term;     /* pure-phase energy part (no degeneration) */
    double eigenvalues[3]; /* normalized sorted spectrum used by the branch */
    char branch[40];       /* active closed-form branch tag */
    int sign_flipped;      /* stress side only; 0 on the strain side */
} wgc_bound_result;

/* Least complementary energy of a material/void composite at volume
 * fraction f of the material under average stress sigma0. */
wgc_status wgc_bound_stress(double f, double lambda, double mu,
                            const double sigma0[6], wgc_bound_result *out);

/* Least elastic energy of a material/rigid composite at volume fraction f
 * of the material under average strain eps0. */
wgc_status wgc_bound_strain(double f, double lambda, double mu,
                            const double eps0[6], wgc_bound_result *out);

/* ---- pair membership ----------------------------------------------------- */

typedef enum wgc_verdict {
    WGC_VERDICT_INFEASIBLE = 0,
    WGC_VERDICT_BOUNDARY = 1,
    WGC_VERDICT_INTERIOR = 2
} wgc_verdict;

typedef struct wgc_membership_result {
    int verdict; /* wgc_verdict */
    char verdict_name[12];
    double residual; /* sigma0:eps0 - bound */
    double bound;
    double tol_abs;
} wgc_membership_result;

/* Can a material/void composite carry the pair (sigma0, eps0)?  Compares
 * sigma0:eps0 to the stress bound.  rel_tol <= 0 selects the default 1e-9. */
wgc_status wgc_membership_stress(double f, double lambda, double mu,
                                 const double sigma0[6], const double eps0[6],
                                 double rel_tol, wgc_membership_result *out);

/* Material/rigid counterpart against the strain bound. */
wgc_status wgc_membership_strain(double f, double lambda, double mu,
                                 const double sigma0[6], const double eps0[6],
                                 double rel_tol, wgc_membership_result *out);

/* Average strain on the stress-side boundary: the component along sigma0 is
 * pinned by the bound and eps_perp fills the 5 free orthogonal coordinates
 * in the deterministic basis adapted to sigma0. */
wgc_status wgc_boundary_strain(double f, double lambda, double mu,
                               const double sigma0[6], const double eps_perp[5],
                               double eps0_out[6]);

/* ---- sequential laminates ------------------------------------------------ */

typedef struct wgc_laminate wgc_laminate; /* opaque tree handle */

typedef struct wgc_optimize_result {
    double energy;
    int rank;
    int evaluations;
    int converged; /* step collapse (1) vs budget exhaustion (0) */
} wgc_optimize_result;

/* Search laminate trees of rank <= rank whose material fraction is exactly
 * f, minimizing complementary energy at sigma0 (elastic_mode = 0, delta < 1)
 * or elastic energy at eps0 (elastic_mode = 1, delta > 1).  budget <= 0 and
 * rank <= 0 select defaults (40000, 3).  On success *out owns the tree. */
wgc_status wgc_laminate_optimize(int elastic_mode, double f, double lambda,
                                 double mu, double delta, const double applied[6],
                                 int rank, int budget, uint64_t seed,
                                 wgc_laminate **out, wgc_optimize_result *result);

/* Canonical text form: "p1", "p2", or "lam(nx ny nz; frac_a; a; b)". */
wgc_status wgc_laminate_parse(const char *text, wgc_laminate **out);
wgc_status wgc_laminate_format(const wgc_laminate *h, char **text);

wgc_status wgc_laminate_fraction(const wgc_laminate *h, double *fraction);
wgc_status wgc_laminate_rank(const wgc_laminate *h, int *rank);

/* Effective stiffness of the tree with phase 1 = iso(lambda, mu) and
 * phase 2 = delta * iso(lambda, mu); row-major Mandel 6x6. */
wgc_status wgc_laminate_effective(const wgc_laminate *h, double lambda, double mu,
                                  double delta, double C_out[36],
                                  double *min_rcond);

/* Energies of the fixed tree along a degeneration ladder, as a JSON object
 * {rows: [{delta, energy, flagged}...], extrapolated, monotone}. */
wgc_status wgc_laminate_sweep_json(const wgc_laminate *h, int elastic_mode,
                                   double lambda, double mu,
                                   const double applied[6], const double *ladder,
                                   int n_ladder, char **json);

void wgc_laminate_free(wgc_laminate *h);

/* ---- squeezing-family convergence ---------------------------------------- */

typedef struct wgc_convergence wgc_convergence; /* opaque report handle */

typedef struct wgc_convergence_summary {
    int margins_ok;           /* all chain inequalities held */
    int residual_decreasing;  /* field residual fell along the ladder */
    double final_residual;    /* |M partner - seed| at the tightest gap */
    double final_alpha_dev;   /* relative deviation of alpha from t^2/W */
    int rows;
} wgc_convergence_summary;

/* Build a synthetic family of composite tensors squeezing the stress bound
 * at sigma0 down the gap ladder and certify that the induced average strain
 * converges to the boundary strain selected by eps_perp. */
wgc_status wgc_converge_stress(double f, double lambda, double mu,
                               const double sigma0[6], const double eps_perp[5],
                               const double *ladder, int n_ladder,
                               uint64_t rng_seed, wgc_convergence **out);

/* Mirror run on compliances against the strain bound at eps0. */
wgc_status wgc_converge_strain(double f, double lambda, double mu,
                               const double eps0[6], const double sigma_perp[5],
                               const double *ladder, int n_ladder,
                               uint64_t rng_seed, wgc_convergence **out);

wgc_status wgc_convergence_summarize(const wgc_convergence *h,
                                     wgc_convergence_summary *out);
wgc_status wgc_convergence_json(const wgc_convergence *h, char **json);
wgc_status wgc_convergence_csv(const wgc_convergence *h, char **csv);
void wgc_convergence_free(wgc_convergence *h);

/* ---- conductivity analogue ----------------------------------------------- */

/* Vectors are length 3; in dim = 2 the third component must be exactly 0. */

typedef struct wgc_thermal_result {
    double k_plus;  /* arithmetic mean */
    double k_minus; /* harmonic mean */
    int verdict;    /* wgc_verdict */
    char verdict_name[12];
    double residual;
    double tol_abs;
} wgc_thermal_result;

/* Realizability of the (flux, gradient) pair for a k1/k2 mixture at
 * fraction f.  rel_tol <= 0 selects the default 1e-9. */
wgc_status wgc_thermal_pair(const double q0[3], const double e0[3], double f,
                            double k1, double k2, int dim, double rel_tol,
                            wgc_thermal_result *out);

/* Rank-1 laminate realizing a boundary pair: fills the conductivity K
 * (row-major 3x3, K e0 = q0) and the lamination normal. */
wgc_status wgc_thermal_laminate(const double q0[3], const double e0[3], double f,
                                double k1, double k2, int dim, double rel_tol,
                                double K_out[9], double normal_out[3]);

/* Insulating second phase: threshold q0.e0 must meet, and the verdict. */
wgc_status wgc_thermal_insulating(const double q0[3], const double e0[3], double f,
                                  double k1, int dim, double rel_tol,
                                  double *threshold, wgc_thermal_result *out);

/* Rank-one conductivity carrying exactly q0 under e0 (requires q0.e0 > 0). */
wgc_status wgc_guide_tensor(const double q0[3], const double e0[3], int dim,
                            double K_out[9]);

/* ---- flux shielding ------------------------------------------------------ */

typedef struct wgc_shield wgc_shield; /* opaque solution handle */

typedef struct wgc_shield_params {
    double width;  /* strip width w > 0 */
    double window; /* right edge blocked on [0, window], window in [0,1) */
    int nx, ny;    /* cells per direction */
    double budget; /* average material density p in (0,1] */
    double k1;     /* conductivity of the material */
    double fp_tol; /* <= 0: default 1e-8 */
    int max_outer; /* <= 0: default 200 */
} wgc_shield_params;

typedef struct wgc_shield_metrics {
    double resistance;
    double lambda;      /* budget multiplier */
    double fp_residual; /* relative budget balance residual */
    int outer_iterations;
    int saturated; /* budget could not bind through the multiplier */
} wgc_shield_metrics;

wgc_status wgc_shield_solve(const wgc_shield_params *params, wgc_shield **out);
wgc_status wgc_shield_get_metrics(const wgc_shield *h, wgc_shield_metrics *out);

/* Integrate the temperature along streamlines; cells no streamline reaches
 * are counted in *flagged_cells.  *inlet_drop receives the integral of T
 * over the inflow edge (NaN if any inflow cell is flagged). */
wgc_status wgc_shield_temperature(wgc_shield *h, int *flagged_cells,
                                  double *inlet_drop);

wgc_status wgc_shield_summary_json(const wgc_shield *h, char **json);
/* kind: "psi" (nodes), "speed", "f", "T" (cell centers). */
wgc_status wgc_shield_grid_csv(const wgc_shield *h, const char *kind, char **csv);
void wgc_shield_free(wgc_shield *h);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* WGC_H */
