////////////////////////////////////////////////////////////////////////////////
// tensor.hh
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Symmetric second-order tensors, fourth-order elasticity tensors, and the
//  small spectral toolbox the bound formulas are built on.
//
//  Everything lives in the orthonormal (Mandel) 6-vector representation
//      (s11, s22, s33, sqrt(2) s23, sqrt(2) s13, sqrt(2) s12)
//  so that double contraction of tensors equals the Euclidean dot product of
//  their 6-vectors and a fourth-order tensor with minor+major symmetries is a
//  symmetric 6x6 matrix.  No factor bookkeeping anywhere downstream.
*/
////////////////////////////////////////////////////////////////////////////////
#ifndef WGC_TENSOR_HH
#define WGC_TENSOR_HH

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <stdexcept>

namespace wgc {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

////////////////////////////////////////////////////////////////////////////////
// SymTensor2
////////////////////////////////////////////////////////////////////////////////

/*! Symmetric 3x3 tensor stored as an orthonormal 6-vector. */
struct SymTensor2 {
    Vector6 v = Vector6::Zero();

    SymTensor2() = default;
    explicit SymTensor2(const Vector6 &mandel) : v(mandel) {}

    static SymTensor2 zero() { return SymTensor2(); }
    static SymTensor2 identity();
    //! Build from a (numerically symmetric) 3x3 matrix; symmetrizes first.
    static SymTensor2 from_matrix(const Matrix3 &m);
    //! sym(a otimes b) = (a b^T + b a^T) / 2
    static SymTensor2 sym_outer(const Vector3 &a, const Vector3 &b);

    Matrix3 matrix() const;

    double ddot(const SymTensor2 &o) const { return v.dot(o.v); }
    double norm() const { return v.norm(); }
    double trace() const { return v[0] + v[1] + v[2]; }

    SymTensor2 operator+(const SymTensor2 &o) const { return SymTensor2(v + o.v); }
    SymTensor2 operator-(const SymTensor2 &o) const { return SymTensor2(v - o.v); }
    SymTensor2 operator*(double s) const { return SymTensor2(v * s); }
    SymTensor2 operator-() const { return SymTensor2(-v); }
};

inline SymTensor2 operator*(double s, const SymTensor2 &t) { return t * s; }

////////////////////////////////////////////////////////////////////////////////
// Spectral decomposition
////////////////////////////////////////////////////////////////////////////////

/*! Eigenvalues ascending; vectors.col(i) pairs with values[i]. */
struct EigSym {
    Vector3 values;
    Matrix3 vectors;
};

/*! Eigendecomposition of a symmetric 3x3 tensor.
//
//  Eigenvalues come from the trigonometric solution of the characteristic
//  cubic followed by one Newton step on the cubic itself (the closed form
//  alone loses digits when two roots nearly coincide).  Eigenvectors use
//  cross products of the best-conditioned rows for the most isolated
//  eigenvalue, then a 2x2 reduction on its orthogonal complement, which
//  stays stable through degenerate spectra. */
EigSym eig_sym(const SymTensor2 &t);

////////////////////////////////////////////////////////////////////////////////
// IsoModuli
////////////////////////////////////////////////////////////////////////////////

/*! Isotropic Lame pair.  Both moduli strictly positive by contract. */
struct IsoModuli {
    double lambda;
    double mu;

    void validate() const {
        if (!(lambda > 0.0) || !(mu > 0.0))
            throw std::invalid_argument("isotropic moduli must be strictly positive");
    }
    double bulk() const { return lambda + 2.0 * mu / 3.0; }
};

////////////////////////////////////////////////////////////////////////////////
// ElasticTensor
////////////////////////////////////////////////////////////////////////////////

/*! Fourth-order tensor with minor+major symmetries as a symmetric 6x6.
//  `kind` only tags whether the matrix maps strains to stresses or the
//  reverse; the algebra is identical. */
struct ElasticTensor {
    enum class Kind : std::uint8_t { Stiffness, Compliance };

    Matrix6 M = Matrix6::Zero();
    Kind kind = Kind::Stiffness;

    ElasticTensor() = default;
    ElasticTensor(const Matrix6 &m, Kind k) : M(m), kind(k) {}

    SymTensor2 apply(const SymTensor2 &x) const { return SymTensor2(M * x.v); }
    double quadratic(const SymTensor2 &x) const { return x.v.dot(M * x.v); }
    //! x : C^{-1} x via a single LLT solve (requires SPD).
    double inverse_quadratic(const SymTensor2 &x) const;

    ElasticTensor operator+(const ElasticTensor &o) const { return {M + o.M, kind}; }
    ElasticTensor operator-(const ElasticTensor &o) const { return {M - o.M, kind}; }
    ElasticTensor operator*(double s) const { return {M * s, kind}; }
};

/*! C = 2 mu I + lambda (i otimes i), i.e. C e = 2 mu e + lambda tr(e) I. */
ElasticTensor iso_elasticity(const IsoModuli &m);

/*! Compliance of the isotropic tensor, applied analytically:
//  C^{-1} s = s / (2 mu) - lambda tr(s) I / (2 mu (2 mu + 3 lambda)). */
SymTensor2 iso_compliance_apply(const IsoModuli &m, const SymTensor2 &s);
double iso_compliance_quadratic(const IsoModuli &m, const SymTensor2 &s);

/*! Inverse of an SPD 6x6 tensor plus its spectral condition information.
//  Near-singular inputs (tiny rcond) are flagged rather than rejected:
//  degenerate-phase sweeps produce them legitimately. */
struct InvertResult {
    ElasticTensor inverse;
    double rcond = 0.0;   //!< lambda_min / lambda_max of the input
    bool flagged = false; //!< rcond below threshold
};

InvertResult invert(const ElasticTensor &C, double rcond_threshold = 1e-13);

////////////////////////////////////////////////////////////////////////////////
// OrthoBasis6
////////////////////////////////////////////////////////////////////////////////

/*! Orthonormal basis of symmetric tensors adapted to a seed: B[0] is the
//  normalized seed, t its Frobenius norm.  Deterministic completion: the
//  canonical Mandel frame member most aligned with B[0] is dropped and the
//  rest are Gram-Schmidt orthogonalized in fixed order. */
struct OrthoBasis6 {
    std::array<SymTensor2, 6> B;
    double t = 0.0;
};

OrthoBasis6 complete_basis(const SymTensor2 &seed);

} // namespace wgc

#endif // WGC_TENSOR_HH
