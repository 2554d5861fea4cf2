////////////////////////////////////////////////////////////////////////////////
// thermal.hh
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Conductivity analogue of the elastic pair-bounds: which (average flux,
//  average gradient) pairs a two-phase conductor at volume fraction f can
//  realize, which rank-1 laminate realizes a boundary pair, and the
//  degenerate limits (insulating second phase, flux-guiding tensors).
//  Everything works in dimension 2 or 3; vectors are padded to length 3 with
//  exact zeros beyond the active dimension.
*/
////////////////////////////////////////////////////////////////////////////////
#ifndef WGC_THERMAL_HH
#define WGC_THERMAL_HH

#include "bounds.hh" // Verdict
#include "tensor.hh"

namespace wgc {

/*! Raised when a construction needs a realizable pair and the input is not. */
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/*! Arithmetic and harmonic mixture means; the extremes any mixture's
//  conductivity spectrum must respect. */
struct WienerMeans {
    double k_plus;
    double k_minus;
};

WienerMeans wiener_means(double f, double k1, double k2);

/*! Realizability of the pair (q0, e0): with w = k_plus e0 - q0 and
//  rho = (k_plus - k_minus)/2, achievable pairs fill the closed ball
//  |w - rho e0| <= rho |e0|.  residual = 2 rho (w . e0) - |w|^2 is positive
//  inside, zero on the sphere, negative outside. */
struct ThermalVerdict {
    Verdict verdict;
    double residual;
    double tol_abs;
};

ThermalVerdict pair_membership(const Vector3 &q0, const Vector3 &e0, double f,
                               double k1, double k2, int dim, double rel_tol = 1e-9);

/*! Rank-1 laminate of k1 and k2 at fraction f realizing a boundary pair:
//      K = k_plus I - (k_plus - k_minus) n xn,   K e0 = q0.
//  The lamination normal is w/|w|; when q0 = k_plus e0 exactly, any normal
//  orthogonal to e0 works and a deterministic one is chosen.  Throws
//  InfeasibleError when the pair is off the sphere boundary. */
struct ThermalLaminate {
    Matrix3 K;
    Vector3 normal;
};

ThermalLaminate attaining_laminate(const Vector3 &q0, const Vector3 &e0, double f,
                                   double k1, double k2, int dim, double rel_tol = 1e-9);

/*! Insulating second phase (k2 -> 0): a flux q0 is sustainable only if
//  q0 . e0 >= |q0|^2 / (f k1).  Returns that threshold. */
double insulating_bound(const Vector3 &q0, double f, double k1, int dim);

ThermalVerdict insulating_membership(const Vector3 &q0, const Vector3 &e0, double f,
                                     double k1, int dim, double rel_tol = 1e-9);

/*! Degenerate conductivity that carries exactly the flux q0 under gradient
//  e0 and conducts nothing across it: K = (q0 xq0) / (q0 . e0).  Rank one
//  by construction; requires q0 . e0 > 0. */
Matrix3 guide_tensor(const Vector3 &q0, const Vector3 &e0, int dim);

} // namespace wgc

#endif // WGC_THERMAL_HH
