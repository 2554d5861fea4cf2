////////////////////////////////////////////////////////////////////////////////
// bounds.hh
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Optimal energy bounds for two-phase composites made of one well-ordered
//  isotropic material and a degenerate phase (void or rigid), at prescribed
//  volume fraction f of the real material.
//
//  Porous side: the least complementary energy any such composite can store
//  under a prescribed average stress.  Rigid side: the least elastic energy
//  under a prescribed average strain.  Both reduce to closed forms in the
//  sorted eigenvalues of the applied tensor; the branch taken is part of the
//  result because callers (membership tests, laminate validation) need it.
*/
////////////////////////////////////////////////////////////////////////////////
#ifndef WGC_BOUNDS_HH
#define WGC_BOUNDS_HH

#include "tensor.hh"

#include <string>

namespace wgc {

////////////////////////////////////////////////////////////////////////////////
// Porous side (prescribed average stress)
////////////////////////////////////////////////////////////////////////////////

enum class PorousBranch : std::uint8_t {
    AllNonnegSumDominant, //!< 0 <= s1, s3 <= s1 + s2
    AllNonnegTopDominant, //!< 0 <= s1, s3 >= s1 + s2
    OneNegMid,            //!< s1 < 0, s2+s3 >= m >= s3-s2,  m = -mu s1/(mu+lambda)
    OneNegSumSmall,       //!< s1 < 0, s2+s3 <= m
    OneNegGapLarge,       //!< s1 < 0, s3-s2 >= m
};

const char *porous_branch_tag(PorousBranch b);

/*! Quadratic form g entering the porous bound, on a sorted spectrum
//  s[0] <= s[1] <= s[2] with at most one negative entry.  On a branch
//  boundary (within 1e-12 of the spectrum scale) every applicable formula is
//  evaluated, agreement is asserted, and the lexicographically first tag is
//  returned. */
struct GPorous {
    double value;
    PorousBranch branch;
};

GPorous g_porous(const IsoModuli &m, const Vector3 &s_sorted);

/*! Optimal complementary-energy bound at average stress sigma0:
//      W_f = sigma0 : C1^{-1} sigma0 + (1-f)/(2 mu f) * g(spectrum)
//  evaluated on the sign-normalized sorted spectrum (flip sigma -> -sigma
//  when the median eigenvalue is negative; the bound is even). */
struct PorousBound {
    double value;
    double compliance_term; //!< sigma0 : C1^{-1} sigma0
    double g;               //!< g on the normalized spectrum
    PorousBranch branch;
    bool sign_flipped;
    Vector3 eigenvalues;    //!< normalized sorted spectrum the branch refers to
};

PorousBound porous_bound(double f, const IsoModuli &m, const SymTensor2 &sigma0);

/*! Sorted spectrum after the evenness normalization (flip iff median < 0). */
Vector3 sign_normalize(const Vector3 &s_sorted, bool &flipped);

////////////////////////////////////////////////////////////////////////////////
// Rigid side (prescribed average strain)
////////////////////////////////////////////////////////////////////////////////

enum class RigidBranch : std::uint8_t {
    Biaxial,     //!< eta3 >= c(eta1+eta3) >= eta1,  c = (lambda+2mu)/(2(lambda+mu))
    UniaxialMin, //!< eta1 >  c(eta1+eta3)
    UniaxialMax, //!< eta3 <  c(eta1+eta3)
};

const char *rigid_branch_tag(RigidBranch b);

struct GRigid {
    double value;
    RigidBranch branch;
};

/*! Degenerate-phase quadratic form for the rigid bound, on a sorted spectrum
//  eta[0] <= eta[1] <= eta[2] (the middle entry does not enter any branch).
//  Same boundary policy as g_porous. */
GRigid g_rigid(const IsoModuli &m, const Vector3 &eta_sorted);

/*! Optimal elastic-energy bound at average strain eps0:
//      W~_f = eps0 : C1 eps0 + (1-f) * max_eta [ 2 eps0 : eta - f g(eta) ]
//  The inner maximum is attained at an eta coaxial with eps0 with matching
//  eigenvalue order; over such eta the objective is concave in the two
//  spectrum extremes and the stationary candidates admit closed forms.  A
//  projected coordinate-ascent polish runs afterwards as a safety net; its
//  improvement over the closed form is reported as `gap`. */
struct RigidBound {
    double value;
    double elastic_term; //!< eps0 : C1 eps0
    SymTensor2 eta_star; //!< maximizer of the concave inner problem
    RigidBranch branch;  //!< branch of g active at eta_star
    int iterations;      //!< polish iterations actually spent
    double gap;          //!< (polished - closed form), relative to the value scale
};

RigidBound rigid_bound(double f, const IsoModuli &m, const SymTensor2 &eps0);

////////////////////////////////////////////////////////////////////////////////
// Pair membership and boundary parametrization
////////////////////////////////////////////////////////////////////////////////

enum class Verdict : std::uint8_t { Infeasible, Boundary, Interior };

const char *verdict_name(Verdict v);

/*! sigma0 : eps0 compared against the relevant bound.  `residual` is
//  sigma0:eps0 - bound; the trichotomy uses |residual| against
//  rel_tol * bound. */
struct MembershipVerdict {
    Verdict verdict;
    double residual;
    double bound;
    double tol_abs;
};

MembershipVerdict membership_porous(double f, const IsoModuli &m,
                                    const SymTensor2 &sigma0, const SymTensor2 &eps0,
                                    double rel_tol = 1e-9);

MembershipVerdict membership_rigid(double f, const IsoModuli &m,
                                   const SymTensor2 &sigma0, const SymTensor2 &eps0,
                                   double rel_tol = 1e-9);

/*! Average strains compatible with sigma0 on the porous boundary form an
//  affine 5-parameter family: the component along sigma0 is pinned to
//  W_f / |sigma0| and the orthogonal part is free.  Returns
//      eps0 = (W_f / t) B0 + sum_i eps_perp[i] B_{i+1}
//  in the deterministic basis of complete_basis(sigma0). */
SymTensor2 boundary_strain(double f, const IsoModuli &m, const SymTensor2 &sigma0,
                           const std::array<double, 5> &eps_perp);

} // namespace wgc

#endif // WGC_BOUNDS_HH
