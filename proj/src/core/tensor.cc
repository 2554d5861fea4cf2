////////////////////////////////////////////////////////////////////////////////
// tensor.cc
////////////////////////////////////////////////////////////////////////////////
#include "tensor.hh"

#include <cmath>

namespace wgc {

namespace {
constexpr double SQRT2 = 1.4142135623730951;
constexpr double INV_SQRT2 = 0.7071067811865476;
} // namespace

SymTensor2 SymTensor2::identity() {
    Vector6 v;
    v << 1, 1, 1, 0, 0, 0;
    return SymTensor2(v);
}

SymTensor2 SymTensor2::from_matrix(const Matrix3 &m) {
    Matrix3 s = 0.5 * (m + m.transpose());
    Vector6 v;
    v << s(0, 0), s(1, 1), s(2, 2),
         SQRT2 * s(1, 2), SQRT2 * s(0, 2), SQRT2 * s(0, 1);
    return SymTensor2(v);
}

SymTensor2 SymTensor2::sym_outer(const Vector3 &a, const Vector3 &b) {
    return from_matrix(0.5 * (a * b.transpose() + b * a.transpose()));
}

Matrix3 SymTensor2::matrix() const {
    Matrix3 m;
    m << v[0], INV_SQRT2 * v[5], INV_SQRT2 * v[4],
         INV_SQRT2 * v[5], v[1], INV_SQRT2 * v[3],
         INV_SQRT2 * v[4], INV_SQRT2 * v[3], v[2];
    return m;
}

////////////////////////////////////////////////////////////////////////////////
// eig_sym
////////////////////////////////////////////////////////////////////////////////

namespace {

// Unit null vector of a rank-2 symmetric matrix, from the largest of the
// three pairwise row cross products.  Only called for isolated eigenvalues,
// where that cross product is well conditioned.
Vector3 null_direction(const Matrix3 &M) {
    Vector3 r0 = M.row(0), r1 = M.row(1), r2 = M.row(2);
    Vector3 c01 = r0.cross(r1), c02 = r0.cross(r2), c12 = r1.cross(r2);
    double n01 = c01.squaredNorm(), n02 = c02.squaredNorm(), n12 = c12.squaredNorm();
    Vector3 best = c01;
    double bn = n01;
    if (n02 > bn) { best = c02; bn = n02; }
    if (n12 > bn) { best = c12; bn = n12; }
    if (bn <= 0.0) {
        // Rank deficit of 2: any direction orthogonal to the largest row.
        int imax = 0;
        double rn = r0.squaredNorm();
        if (r1.squaredNorm() > rn) { imax = 1; rn = r1.squaredNorm(); }
        if (r2.squaredNorm() > rn) { imax = 2; rn = r2.squaredNorm(); }
        Vector3 r = M.row(imax);
        if (rn <= 0.0) return Vector3::UnitX();
        Vector3 u = r.unitOrthogonal();
        return u;
    }
    return best / std::sqrt(bn);
}

// Orthonormal pair spanning the complement of a unit vector.
void complement(const Vector3 &w, Vector3 &u, Vector3 &v) {
    u = w.unitOrthogonal();
    v = w.cross(u);
}

} // namespace

EigSym eig_sym(const SymTensor2 &t) {
    EigSym out;
    Matrix3 A = t.matrix();
    double scale = A.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        out.values.setZero();
        out.vectors.setIdentity();
        return out;
    }
    Matrix3 B = A / scale;

    // Trigonometric roots of the shifted characteristic cubic.
    double m = B.trace() / 3.0;
    Matrix3 K = B - m * Matrix3::Identity();
    double p2 = K.squaredNorm() / 6.0;
    Vector3 lam;
    if (p2 < 1e-60) {
        lam.setConstant(m);
    } else {
        double p = std::sqrt(p2);
        double r = K.determinant() / (2.0 * p2 * p);
        r = std::clamp(r, -1.0, 1.0);
        double phi = std::acos(r) / 3.0;
        constexpr double TWO_PI_3 = 2.0943951023931953;
        lam[2] = m + 2.0 * p * std::cos(phi);
        lam[0] = m + 2.0 * p * std::cos(phi + TWO_PI_3);
        lam[1] = 3.0 * m - lam[0] - lam[2];

        // One Newton step per root on p(x) = x^3 - c2 x^2 + c1 x - c0.
        double c2 = B.trace();
        double c1 = 0.5 * (c2 * c2 - (B * B).trace());
        double c0 = B.determinant();
        for (int i = 0; i < 3; ++i) {
            double x = lam[i];
            double f = ((x - c2) * x + c1) * x - c0;
            double fp = (3.0 * x - 2.0 * c2) * x + c1;
            // Near a double root fp ~ 0 and the quotient is noise; the
            // analytic value is already the best available there.
            if (std::abs(fp) > 1e-12 && std::abs(f) < 1e-3 * std::abs(fp))
                lam[i] -= f / fp;
        }
        std::sort(lam.data(), lam.data() + 3);
    }

    double spread = lam[2] - lam[0];
    Matrix3 Q;
    if (spread <= 1e-14) {
        Q.setIdentity();
    } else {
        // Solve the best-isolated extreme eigenvalue first, reduce the rest
        // to a 2x2 problem on its orthogonal complement.
        bool top_isolated = (lam[2] - lam[1]) >= (lam[1] - lam[0]);
        int iso = top_isolated ? 2 : 0;
        Vector3 viso = null_direction(B - lam[iso] * Matrix3::Identity());
        Vector3 u, w;
        complement(viso, u, w);
        double muu = u.dot(B * u), muw = u.dot(B * w), mww = w.dot(B * w);
        double theta = 0.5 * std::atan2(2.0 * muw, muu - mww);
        Vector3 e1 = std::cos(theta) * u + std::sin(theta) * w;
        Vector3 e2 = -std::sin(theta) * u + std::cos(theta) * w;
        double q1 = e1.dot(B * e1), q2 = e2.dot(B * e2);
        if (q1 > q2) std::swap(e1, e2); // e1 pairs with the smaller value
        if (top_isolated) {
            Q.col(2) = viso;
            Q.col(0) = e1;
            Q.col(1) = e2;
        } else {
            Q.col(0) = viso;
            Q.col(1) = e1;
            Q.col(2) = e2;
        }
    }

    // Rayleigh refinement: with eigenvectors in hand the quotients carry
    // second-order accuracy, where the closed-form roots lose half their
    // digits at a repeated eigenvalue.
    Vector3 r;
    for (int i = 0; i < 3; ++i) r[i] = Q.col(i).dot(B * Q.col(i));
    auto order = [&](int i, int j) {
        if (r[i] > r[j]) {
            std::swap(r[i], r[j]);
            Q.col(i).swap(Q.col(j));
        }
    };
    order(0, 1);
    order(1, 2);
    order(0, 1);

    out.values = r * scale;
    out.vectors = Q;
    return out;
}

////////////////////////////////////////////////////////////////////////////////
// ElasticTensor
////////////////////////////////////////////////////////////////////////////////

double ElasticTensor::inverse_quadratic(const SymTensor2 &x) const {
    Eigen::LLT<Matrix6> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("inverse_quadratic requires a positive-definite tensor");
    return x.v.dot(llt.solve(x.v));
}

ElasticTensor iso_elasticity(const IsoModuli &m) {
    m.validate();
    Vector6 i = SymTensor2::identity().v;
    Matrix6 M = 2.0 * m.mu * Matrix6::Identity() + m.lambda * (i * i.transpose());
    return {M, ElasticTensor::Kind::Stiffness};
}

SymTensor2 iso_compliance_apply(const IsoModuli &m, const SymTensor2 &s) {
    m.validate();
    double a = 1.0 / (2.0 * m.mu);
    double b = -m.lambda / (2.0 * m.mu * (2.0 * m.mu + 3.0 * m.lambda));
    return SymTensor2(a * s.v + b * s.trace() * SymTensor2::identity().v);
}

double iso_compliance_quadratic(const IsoModuli &m, const SymTensor2 &s) {
    return s.ddot(iso_compliance_apply(m, s));
}

InvertResult invert(const ElasticTensor &C, double rcond_threshold) {
    Eigen::SelfAdjointEigenSolver<Matrix6> es(C.M);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("6x6 eigendecomposition failed");
    const auto &w = es.eigenvalues();
    if (w[0] <= 0.0)
        throw std::invalid_argument("invert requires a positive-definite tensor");
    InvertResult r;
    r.rcond = w[0] / w[5];
    r.flagged = r.rcond < rcond_threshold;
    Vector6 winv = w.cwiseInverse();
    Matrix6 Minv = es.eigenvectors() * winv.asDiagonal() * es.eigenvectors().transpose();
    // Inverting a strain->stress map yields a stress->strain map and vice versa.
    auto k = (C.kind == ElasticTensor::Kind::Stiffness) ? ElasticTensor::Kind::Compliance
                                                        : ElasticTensor::Kind::Stiffness;
    r.inverse = ElasticTensor(0.5 * (Minv + Minv.transpose()), k);
    return r;
}

////////////////////////////////////////////////////////////////////////////////
// complete_basis
////////////////////////////////////////////////////////////////////////////////

OrthoBasis6 complete_basis(const SymTensor2 &seed) {
    OrthoBasis6 out;
    out.t = seed.norm();
    if (!(out.t > 0.0))
        throw std::invalid_argument("complete_basis requires a nonzero seed");
    out.B[0] = SymTensor2(seed.v / out.t);

    // Drop the canonical frame member most aligned with the seed, then
    // modified Gram-Schmidt over the survivors in fixed order.
    int drop = 0;
    double best = -1.0;
    for (int j = 0; j < 6; ++j) {
        double a = std::abs(out.B[0].v[j]);
        if (a > best) { best = a; drop = j; }
    }
    int k = 1;
    for (int j = 0; j < 6; ++j) {
        if (j == drop) continue;
        Vector6 c = Vector6::Unit(j);
        for (int i = 0; i < k; ++i)
            c -= c.dot(out.B[i].v) * out.B[i].v;
        double n = c.norm();
        if (n < 1e-8)
            throw std::runtime_error("basis completion degenerated");
        out.B[k++] = SymTensor2(c / n);
    }
    return out;
}

} // namespace wgc
