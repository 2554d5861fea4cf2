////////////////////////////////////////////////////////////////////////////////
// shield.hh
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Relaxed material-distribution problem for shielding heat flux: a unit
//  vertical strip of conductor k1 with local density f(x) in [0,1] occupies
//  the rectangle [0,w] x [0,1].  Unit flux enters on the left, leaves only
//  through the right-edge window x2 in (a, 1], and f must average to the
//  budget p.  Writing the divergence-free flux through a stream function
//  (q = (d2 psi, -d1 psi)) turns the resistance
//      R = (4/k1) int |q|^2 / f
//  with f optimized cellwise into the convex functional
//      R_lambda = (4/k1) int max(|q|/lambda, |q|^2),
//  where the multiplier lambda balances the budget: f = min(lambda |q|, 1)
//  and  lambda int_{f<1} |q| + |{f=1}| = w p.
//
//  Inner minimization is majorize-minimize: on its active branch the density
//  max(s/lambda, s^2) admits a touching quadratic majorizer a s^2 + b with
//  a = max(1, 1/(2 s0 lambda)), so each pass solves one weighted-Laplacian
//  system (matrix-free Jacobi-preconditioned CG).  The outer loop bisects
//  lambda on the monotone budget residual.
*/
////////////////////////////////////////////////////////////////////////////////
#ifndef WGC_SHIELD_HH
#define WGC_SHIELD_HH

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace wgc {

/*! Raised when an iterative stage cannot reach its tolerance. */
class NoConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ShieldProblem {
    double width = 1.0;  //!< w > 0, horizontal extent
    double window = 0.0; //!< a in [0,1): right edge blocked on [0,a]
    int nx = 64;
    int ny = 64;
    double budget = 0.5; //!< p in (0,1], average material density
    double k1 = 1.0;

    double fp_tol = 1e-8;    //!< relative budget residual target
    int max_outer = 200;     //!< bisection steps on lambda
    double inner_tol = 1e-12;
    int max_inner = 120;     //!< majorize-minimize passes per lambda
    int max_cg = 6000;

    void validate() const;
};

struct ShieldSolution {
    ShieldProblem prob;
    double h1 = 0.0, h2 = 0.0;

    Eigen::VectorXd psi;   //!< nodes, (nx+1)*(ny+1), x-major
    Eigen::VectorXd qx, qy, speed, fvol; //!< cells, nx*ny, x-major

    double lambda = 0.0;
    double resistance = 0.0;
    double fp_residual = 0.0;
    int outer_iterations = 0;
    bool saturated = false; //!< budget not bindable through the multiplier

    bool has_temperature = false;
    Eigen::VectorXd T;      //!< cells; NaN where no streamline exists
    int flagged_cells = 0;
    double inlet_drop = 0.0; //!< int T(0, x2) dx2 estimate

    int node(int i, int j) const { return i * (prob.ny + 1) + j; }
    int cell(int i, int j) const { return i * prob.ny + j; }

    std::string summary_json() const;
    //! kind: "psi" (nodes), "speed", "f", "T" (cell centers)
    std::string grid_csv(const std::string &kind) const;
};

ShieldSolution shield_solve(const ShieldProblem &prob);

/*! Fill T, flagged_cells, inlet_drop by integrating dT/ds = -|q|/(f k1)
//  downstream along streamlines to the outflow edge where T = 0. */
void reconstruct_temperature(ShieldSolution &sol);

/*! Budget-balancing multiplier for a FIXED stream function: bisects lambda
//  so that int min(lambda |q|, 1) = w p, water-filling the density when even
//  f = 1 on the whole flux support cannot absorb the budget.  Also the final
//  step of shield_solve, and the evaluation map for convexity tests. */
struct FixedPsiResult {
    double lambda = 0.0;
    double R = 0.0;
    double residual = 0.0;
    bool saturated = false;
    Eigen::VectorXd fvol;
};

FixedPsiResult budget_balance(const ShieldProblem &prob, const Eigen::VectorXd &psi);

} // namespace wgc

#endif // WGC_SHIELD_HH
