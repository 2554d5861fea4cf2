////////////////////////////////////////////////////////////////////////////////
// thermal.cc
////////////////////////////////////////////////////////////////////////////////
#include "thermal.hh"

#include <cmath>

namespace wgc {

namespace {

void check_dim_vec(const Vector3 &v, int dim, const char *name) {
    if (dim != 2 && dim != 3)
        throw std::invalid_argument("dimension must be 2 or 3");
    if (dim == 2 && v[2] != 0.0)
        throw std::invalid_argument(std::string(name) + " must have a zero third component in 2d");
}

void check_conductivities(double k1, double k2) {
    if (!(k1 > 0.0) || !(k2 >= 0.0))
        throw std::invalid_argument("conductivities must satisfy k1 > 0, k2 >= 0");
}

void check_fraction01(double f) {
    if (!(f > 0.0 && f < 1.0))
        throw std::invalid_argument("volume fraction must lie strictly inside (0,1)");
}

// In-plane (for dim 2) or free-space unit vector orthogonal to v.
Vector3 orthogonal_dir(const Vector3 &v, int dim) {
    if (dim == 2) {
        Vector3 n(-v[1], v[0], 0.0);
        double s = n.norm();
        if (s == 0.0) return Vector3::UnitX();
        return n / s;
    }
    if (v.norm() == 0.0) return Vector3::UnitX();
    return v.unitOrthogonal();
}

} // namespace

WienerMeans wiener_means(double f, double k1, double k2) {
    check_fraction01(f);
    check_conductivities(k1, k2);
    WienerMeans w;
    w.k_plus = f * k1 + (1.0 - f) * k2;
    w.k_minus = (k2 == 0.0) ? 0.0 : 1.0 / (f / k1 + (1.0 - f) / k2);
    return w;
}

ThermalVerdict pair_membership(const Vector3 &q0, const Vector3 &e0, double f,
                               double k1, double k2, int dim, double rel_tol) {
    check_dim_vec(q0, dim, "q0");
    check_dim_vec(e0, dim, "e0");
    if (!(e0.norm() > 0.0))
        throw std::invalid_argument("pair membership requires a nonzero gradient");
    WienerMeans km = wiener_means(f, k1, k2);
    double rho = 0.5 * (km.k_plus - km.k_minus);
    Vector3 w = km.k_plus * e0 - q0;

    ThermalVerdict out;
    out.residual = 2.0 * rho * w.dot(e0) - w.squaredNorm();
    out.tol_abs = rel_tol * std::max(rho * rho * e0.squaredNorm(), w.squaredNorm());
    if (out.residual < -out.tol_abs)
        out.verdict = Verdict::Infeasible;
    else if (out.residual <= out.tol_abs)
        out.verdict = Verdict::Boundary;
    else
        out.verdict = Verdict::Interior;
    return out;
}

ThermalLaminate attaining_laminate(const Vector3 &q0, const Vector3 &e0, double f,
                                   double k1, double k2, int dim, double rel_tol) {
    ThermalVerdict v = pair_membership(q0, e0, f, k1, k2, dim, rel_tol);
    if (v.verdict != Verdict::Boundary)
        throw InfeasibleError("attaining laminate requires a pair on the sphere boundary");

    WienerMeans km = wiener_means(f, k1, k2);
    Vector3 w = km.k_plus * e0 - q0;
    Vector3 n;
    if (w.norm() <= 1e-12 * km.k_plus * e0.norm())
        n = orthogonal_dir(e0, dim); // arithmetic-mean corner: lamination plane carries e0
    else
        n = w / w.norm();

    ThermalLaminate out;
    out.normal = n;
    out.K = km.k_plus * Matrix3::Identity() - (km.k_plus - km.k_minus) * (n * n.transpose());
    if (dim == 2) {
        // Restrict to the plane: no spurious out-of-plane conduction entry.
        out.K.row(2).setZero();
        out.K.col(2).setZero();
    }
    return out;
}

double insulating_bound(const Vector3 &q0, double f, double k1, int dim) {
    check_dim_vec(q0, dim, "q0");
    check_fraction01(f);
    if (!(k1 > 0.0))
        throw std::invalid_argument("conductivity must be positive");
    return q0.squaredNorm() / (f * k1);
}

ThermalVerdict insulating_membership(const Vector3 &q0, const Vector3 &e0, double f,
                                     double k1, int dim, double rel_tol) {
    check_dim_vec(q0, dim, "q0");
    check_dim_vec(e0, dim, "e0");
    double bound = insulating_bound(q0, f, k1, dim);
    ThermalVerdict out;
    out.residual = q0.dot(e0) - bound;
    out.tol_abs = rel_tol * std::max(bound, std::abs(q0.dot(e0)));
    if (out.residual < -out.tol_abs)
        out.verdict = Verdict::Infeasible;
    else if (out.residual <= out.tol_abs)
        out.verdict = Verdict::Boundary;
    else
        out.verdict = Verdict::Interior;
    return out;
}

Matrix3 guide_tensor(const Vector3 &q0, const Vector3 &e0, int dim) {
    check_dim_vec(q0, dim, "q0");
    check_dim_vec(e0, dim, "e0");
    double p = q0.dot(e0);
    if (!(p > 0.0))
        throw InfeasibleError("guide tensor requires q0 . e0 > 0");
    return (q0 * q0.transpose()) / p;
}

} // namespace wgc
