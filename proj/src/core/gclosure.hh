////////////////////////////////////////////////////////////////////////////////
// gclosure.hh
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Machinery certifying that a family of composite tensors squeezing the
//  energy bound ever tighter forces the induced average field to converge:
//  on the stress side C*_delta eps0 -> sigma0, on the strain side (with
//  compliances) S*_delta sigma0 -> eps0.  Both run through one engine; only
//  the basis seed, the bound functional, and the partner tensor differ.
//
//  Everything happens in an orthonormal basis adapted to the applied tensor.
//  Splitting a 6x6 quadratic form into the (scalar, vector, 5x5) blocks
//      alpha = B0:M B0,  a_i = B_i:M B0,  A_ij = B_i:M B_j
//  turns the certification into three inequalities: the sandwiched energy
//  pins alpha via a Schur complement, positive-definiteness couples |a| to
//  alpha and the certified excess, and evaluating the bound on a rank-one
//  perturbed input drives a to zero.
*/
////////////////////////////////////////////////////////////////////////////////
#ifndef WGC_GCLOSURE_HH
#define WGC_GCLOSURE_HH

#include "tensor.hh"

#include <functional>
#include <string>
#include <vector>

namespace wgc {

using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix5 = Eigen::Matrix<double, 5, 5>;

////////////////////////////////////////////////////////////////////////////////
// Block form
////////////////////////////////////////////////////////////////////////////////

struct BlockForm {
    double alpha = 0.0;
    Vector5 a = Vector5::Zero();
    Matrix5 A = Matrix5::Zero();
};

/*! Express a 6x6 tensor in the adapted basis and split off the blocks. */
BlockForm to_block(const ElasticTensor &C, const OrthoBasis6 &basis);

/*! Reassemble the Mandel-frame tensor from its blocks. */
ElasticTensor from_block(const BlockForm &b, const OrthoBasis6 &basis,
                         ElasticTensor::Kind kind);

/*! Inverse in block coordinates via the Schur complement
//  s = alpha - a^T A^{-1} a.  A near-singular lower block or Schur scalar is
//  flagged, not rejected. */
struct BlockInverse {
    double schur = 0.0;
    Matrix6 inv = Matrix6::Zero(); //!< inverse of [[alpha, a^T], [a, A]]
    bool flagged = false;
};

BlockInverse block_inverse(const BlockForm &b);

////////////////////////////////////////////////////////////////////////////////
// Certification
////////////////////////////////////////////////////////////////////////////////

/*! Squeeze certificate of a single tensor against the bound value W at the
//  basis seed: excess = seed:M^{-1}seed - W must be nonnegative (otherwise M
//  beats the optimal bound and cannot be a composite), and the basis tail
//  trace(A) measures degeneration in the orthogonal directions.  The
//  certified gap is c = max(excess, tail). */
struct SandwichCert {
    bool admissible;
    double excess;
    double tail;
    double c;
};

SandwichCert certify_sandwich(const ElasticTensor &M, const SymTensor2 &seed,
                              const OrthoBasis6 &basis, double bound_value,
                              double rel_tol = 1e-12);

/*! The three chain inequalities driving convergence, reported as margins
//  (all must be nonnegative up to roundoff):
//    margin_upper     = (W + c) - t^2/alpha
//    margin_coupling  = c * alpha - |a|^2
//    margin_perturbed = t^2/alpha - bound(seed + (t/alpha) sum_i a_i B_i)
//  plus the exact identity t^2/alpha = x : M^{-1} x at the perturbed input
//  x, which validates the block algebra numerically. */
struct ChainChecks {
    double margin_upper;
    double margin_coupling;
    double margin_perturbed;
    double identity_err; //!< relative error of the Schur identity
    bool pass;           //!< all margins >= -1e-12 * scale
};

ChainChecks chain_checks(const BlockForm &b, const OrthoBasis6 &basis, double bound_value,
                         double c,
                         const std::function<double(const SymTensor2 &)> &bound_fn);

////////////////////////////////////////////////////////////////////////////////
// Synthetic squeezing families
////////////////////////////////////////////////////////////////////////////////

struct FamilySample {
    double c_requested;
    double c_certified;
    ElasticTensor M;
    bool skipped = false;
    std::string note;
};

/*! Build tensors certified at gap ~ c/2 for each requested c: the top block
//  pins seed:M^{-1}seed = W + c/2 exactly, the lower block is (c/10) I_5,
//  and the coupling vector points in a seeded random direction with
//  magnitude O(c), halved until the perturbed-input inequality holds.
//  c = 0 is regularized with a 1e-12-scaled lower block.  A request that
//  cannot be realized is skipped with a note instead of failing. */
std::vector<FamilySample> synth_family(const SymTensor2 &seed, const OrthoBasis6 &basis,
                                       double bound_value,
                                       const std::function<double(const SymTensor2 &)> &bound_fn,
                                       const std::vector<double> &ladder,
                                       std::uint64_t rng_seed,
                                       ElasticTensor::Kind kind);

////////////////////////////////////////////////////////////////////////////////
// Convergence runs
////////////////////////////////////////////////////////////////////////////////

struct ConvergenceRow {
    double c_requested = 0.0;
    double c_certified = 0.0;
    double alpha = 0.0;
    double a_norm = 0.0;
    double A_max = 0.0;       //!< largest eigenvalue of the lower block
    double margin_upper = 0.0;
    double margin_coupling = 0.0;
    double margin_perturbed = 0.0;
    double identity_err = 0.0;
    double residual = 0.0;    //!< |M partner - seed|_F
    double alpha_dev = 0.0;   //!< relative distance of alpha from t^2/W
    bool skipped = false;
    std::string note;
};

struct ConvergenceReport {
    std::string mode;         //!< "stress" or "strain"
    double bound = 0.0;
    double t = 0.0;           //!< Frobenius norm of the seed
    std::vector<ConvergenceRow> rows;
    bool margins_ok = false;
    //! Residuals trend to zero along the ladder: no rung exceeds 10x the
    //! best so far (rung families are drawn independently, so neighboring
    //! values wiggle) and the last rung is at most half the first.
    bool residual_decreasing = false;
    double final_residual = 0.0;
    double final_alpha_dev = 0.0;

    std::string to_csv() const;
    std::string to_json() const;
};

struct ConvergenceConfig {
    SymTensor2 seed;     //!< sigma0 (stress mode) or eps0 (strain mode)
    SymTensor2 partner;  //!< eps0 on the boundary, resp. sigma0
    double bound = 0.0;  //!< bound value at the seed
    std::function<double(const SymTensor2 &)> bound_fn;
    std::vector<double> ladder;
    std::uint64_t rng_seed = 1;
    ElasticTensor::Kind kind = ElasticTensor::Kind::Stiffness;
    std::string mode = "stress";
};

ConvergenceReport run_convergence(const ConvergenceConfig &cfg);

/*! Stress-side convenience wrapper: the partner strain is placed on the
//  boundary from the free orthogonal coordinates, the family squeezes the
//  porous bound, and the report tracks C*_delta eps0 -> sigma0. */
ConvergenceReport converge_stress(double f, const IsoModuli &m, const SymTensor2 &sigma0,
                                  const std::array<double, 5> &eps_perp,
                                  const std::vector<double> &ladder, std::uint64_t rng_seed);

/*! Strain-side mirror on compliances: partner stress on the rigid boundary,
//  family squeezes the rigid bound, report tracks S*_delta sigma0 -> eps0. */
ConvergenceReport converge_strain(double f, const IsoModuli &m, const SymTensor2 &eps0,
                                  const std::array<double, 5> &sigma_perp,
                                  const std::vector<double> &ladder, std::uint64_t rng_seed);

} // namespace wgc

#endif // WGC_GCLOSURE_HH
