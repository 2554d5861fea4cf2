////////////////////////////////////////////////////////////////////////////////
// bounds.cc
////////////////////////////////////////////////////////////////////////////////
#include "bounds.hh"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace wgc {

namespace {

double sq(double x) { return x * x; }

void check_sorted(const Vector3 &s) {
    if (!(s[0] <= s[1] && s[1] <= s[2]))
        throw std::invalid_argument("spectrum must be sorted ascending");
}

void check_fraction(double f) {
    if (!(f > 0.0 && f <= 1.0))
        throw std::invalid_argument("volume fraction must lie in (0, 1]");
}

// Applicable-branch candidate.  When a spectrum sits on a branch interface
// (within 1e-12 of its scale) every formula whose condition holds is
// evaluated; they must agree by continuity, and the first tag in
// lexicographic order wins.  Candidates are pushed in that order already.
template <typename Branch>
struct Hit {
    double value;
    Branch branch;
};

template <typename Branch>
Hit<Branch> settle(const std::vector<Hit<Branch>> &hits, double scale2) {
    if (hits.empty())
        throw std::logic_error("branch dispatch covered no case");
    for (size_t i = 1; i < hits.size(); ++i) {
        double ref = std::max(scale2, std::abs(hits[0].value));
        if (std::abs(hits[i].value - hits[0].value) > 1e-10 * ref)
            throw std::logic_error("branch formulas disagree on a shared interface");
    }
    return hits[0];
}

} // namespace

////////////////////////////////////////////////////////////////////////////////
// Porous side
////////////////////////////////////////////////////////////////////////////////

const char *porous_branch_tag(PorousBranch b) {
    switch (b) {
    case PorousBranch::AllNonnegSumDominant: return "all-nonneg/s3<=s1+s2";
    case PorousBranch::AllNonnegTopDominant: return "all-nonneg/s3>=s1+s2";
    case PorousBranch::OneNegGapLarge:       return "one-neg/gap-large";
    case PorousBranch::OneNegMid:            return "one-neg/mid";
    case PorousBranch::OneNegSumSmall:       return "one-neg/sum-small";
    }
    return "?";
}

GPorous g_porous(const IsoModuli &m, const Vector3 &s) {
    m.validate();
    check_sorted(s);
    double scale = s.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return {0.0, PorousBranch::AllNonnegSumDominant};
    double tol = 1e-12 * scale;
    if (s[1] < -tol)
        throw std::invalid_argument("spectrum may contain at most one negative eigenvalue");

    double lam = m.lambda, mu = m.mu;
    double tr = s.sum();
    double xi = lam / (2.0 * mu + 3.0 * lam);
    double k1 = (2.0 * mu + lam) / (2.0 * (2.0 * mu + 3.0 * lam));

    std::vector<Hit<PorousBranch>> hits;
    if (s[0] >= 0.0) {
        double d = s[2] - (s[0] + s[1]);
        if (d <= tol)
            hits.push_back({k1 * sq(tr), PorousBranch::AllNonnegSumDominant});
        if (d >= -tol)
            hits.push_back({sq(s[0] + s[1]) + sq(s[2]) - xi * sq(tr),
                            PorousBranch::AllNonnegTopDominant});
    } else {
        // With a negative bottom eigenvalue the split is governed by the
        // threshold -mu s1 / (mu + lambda) against s2+s3 and s3-s2.
        double mth = -mu * s[0] / (mu + lam);
        double sum = s[1] + s[2], gap = s[2] - s[1];
        if (gap >= mth - tol)
            hits.push_back({s.squaredNorm() - (2.0 * mu / (mu + lam)) * s[0] * s[1] - xi * sq(tr),
                            PorousBranch::OneNegGapLarge});
        if (sum >= mth - tol && gap <= mth + tol)
            hits.push_back({k1 * sq(sum - ((mu + 2.0 * lam) / (mu + lam)) * s[0]),
                            PorousBranch::OneNegMid});
        if (sum <= mth + tol)
            hits.push_back({sq(sum) + sq(s[0]) - xi * sq(tr),
                            PorousBranch::OneNegSumSmall});
    }
    auto h = settle(hits, sq(scale));
    return {h.value, h.branch};
}

Vector3 sign_normalize(const Vector3 &s_sorted, bool &flipped) {
    check_sorted(s_sorted);
    flipped = s_sorted[1] < 0.0;
    if (!flipped) return s_sorted;
    return Vector3(-s_sorted[2], -s_sorted[1], -s_sorted[0]);
}

PorousBound porous_bound(double f, const IsoModuli &m, const SymTensor2 &sigma0) {
    m.validate();
    check_fraction(f);
    EigSym es = eig_sym(sigma0);
    PorousBound out;
    out.eigenvalues = sign_normalize(es.values, out.sign_flipped);
    GPorous gp = g_porous(m, out.eigenvalues);
    out.g = gp.value;
    out.branch = gp.branch;
    out.compliance_term = iso_compliance_quadratic(m, sigma0);
    out.value = out.compliance_term + (1.0 - f) / (2.0 * m.mu * f) * out.g;
    return out;
}

////////////////////////////////////////////////////////////////////////////////
// Rigid side
////////////////////////////////////////////////////////////////////////////////

const char *rigid_branch_tag(RigidBranch b) {
    switch (b) {
    case RigidBranch::Biaxial:     return "biaxial";
    case RigidBranch::UniaxialMax: return "uniaxial-max";
    case RigidBranch::UniaxialMin: return "uniaxial-min";
    }
    return "?";
}

GRigid g_rigid(const IsoModuli &m, const Vector3 &eta) {
    m.validate();
    check_sorted(eta);
    double scale = eta.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return {0.0, RigidBranch::Biaxial};
    double tol = 1e-12 * scale;

    double lam = m.lambda, mu = m.mu;
    double cs = (lam + 2.0 * mu) / (2.0 * (lam + mu)) * (eta[0] + eta[2]);

    std::vector<Hit<RigidBranch>> hits;
    if (eta[2] >= cs - tol && cs >= eta[0] - tol)
        hits.push_back({sq(eta[0] - eta[2]) / (4.0 * mu) +
                            sq(eta[0] + eta[2]) / (4.0 * (lam + mu)),
                        RigidBranch::Biaxial});
    if (eta[2] <= cs + tol)
        hits.push_back({sq(eta[2]) / (lam + 2.0 * mu), RigidBranch::UniaxialMax});
    if (eta[0] >= cs - tol)
        hits.push_back({sq(eta[0]) / (lam + 2.0 * mu), RigidBranch::UniaxialMin});

    auto h = settle(hits, sq(scale));
    return {h.value, h.branch};
}

namespace {

// Inner objective of the rigid bound over coaxial spectra with matched
// ordering: phi(eta) = 2 sum_i e_i eta_i - f g(eta).
double rigid_phi(const IsoModuli &m, double f, const Vector3 &e, const Vector3 &eta) {
    return 2.0 * e.dot(eta) - f * g_rigid(m, eta).value;
}

// Coordinate ascent with ordering kept by clamping.  Safety net only: the
// closed form below is exact, so this normally terminates by step shrink
// without moving.
Vector3 polish_eta(const IsoModuli &m, double f, const Vector3 &e, Vector3 eta,
                   int &iterations, double &improvement) {
    double scale = std::max(1.0, eta.cwiseAbs().maxCoeff());
    double step = 0.25 * scale;
    double best = rigid_phi(m, f, e, eta);
    double start = best;
    iterations = 0;
    while (step > 1e-10 * scale && iterations < 200) {
        bool moved = false;
        for (int i = 0; i < 3; ++i) {
            for (double dir : {+1.0, -1.0}) {
                Vector3 trial = eta;
                trial[i] += dir * step;
                if (i > 0) trial[i] = std::max(trial[i], trial[i - 1]);
                if (i < 2) trial[i] = std::min(trial[i], trial[i + 1]);
                double v = rigid_phi(m, f, e, trial);
                if (v > best + 1e-15 * std::abs(best)) {
                    best = v;
                    eta = trial;
                    moved = true;
                }
            }
        }
        ++iterations;
        if (!moved) step *= 0.5;
    }
    improvement = best - start;
    return eta;
}

} // namespace

RigidBound rigid_bound(double f, const IsoModuli &m, const SymTensor2 &eps0) {
    m.validate();
    check_fraction(f);
    EigSym es = eig_sym(eps0);
    const Vector3 &e = es.values;

    double lam = m.lambda, mu = m.mu;
    double L = lam + mu, A2 = lam + 2.0 * mu;

    // The middle eta rides with whichever extreme its strain eigenvalue
    // pushes it to; g never sees it.  That collapses the inner problem to
    // the two extremes with effective weights p (bottom) and q (top).
    bool tie_up = e[1] >= 0.0;
    double p = tie_up ? 2.0 * e[0] : 2.0 * (e[0] + e[1]);
    double q = tie_up ? 2.0 * (e[1] + e[2]) : 2.0 * e[2];

    // Stationary candidates partition the (p, q) half-plane p <= q:
    //   p <= 0 <= q : interior of the biaxial branch,
    //   p > 0 or q < 0 : the diagonal eta1 = eta3 (a uniaxial branch edge).
    // Values agree on the seams, so the dispatch below is continuous.
    Vector3 eta;
    if (p <= 0.0 && q >= 0.0) {
        double s = L * (p + q) / f;
        double u = mu * (q - p) / f; // q >= p, so u >= 0
        eta[0] = 0.5 * (s - u);
        eta[2] = 0.5 * (s + u);
    } else {
        double t = A2 * (p + q) / (2.0 * f);
        eta[0] = eta[2] = t;
    }
    eta[1] = tie_up ? eta[2] : eta[0];

    RigidBound out;
    double closed = rigid_phi(m, f, e, eta);
    eta = polish_eta(m, f, e, eta, out.iterations, out.gap);
    double phi = closed + out.gap;
    out.gap /= std::max(1.0, std::abs(closed));

    out.elastic_term = 2.0 * mu * eps0.v.squaredNorm() + lam * sq(eps0.trace());
    out.value = out.elastic_term + (1.0 - f) * phi;
    out.branch = g_rigid(m, eta).branch;
    Matrix3 H = es.vectors * eta.asDiagonal() * es.vectors.transpose();
    out.eta_star = SymTensor2::from_matrix(H);
    return out;
}

////////////////////////////////////////////////////////////////////////////////
// Membership and boundary parametrization
////////////////////////////////////////////////////////////////////////////////

const char *verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Infeasible: return "infeasible";
    case Verdict::Boundary:   return "boundary";
    case Verdict::Interior:   return "interior";
    }
    return "?";
}

namespace {

MembershipVerdict classify(double pairing, double bound, double rel_tol) {
    MembershipVerdict v;
    v.bound = bound;
    v.residual = pairing - bound;
    v.tol_abs = rel_tol * std::abs(bound);
    if (v.residual < -v.tol_abs)
        v.verdict = Verdict::Infeasible;
    else if (v.residual <= v.tol_abs)
        v.verdict = Verdict::Boundary;
    else
        v.verdict = Verdict::Interior;
    return v;
}

} // namespace

MembershipVerdict membership_porous(double f, const IsoModuli &m,
                                    const SymTensor2 &sigma0, const SymTensor2 &eps0,
                                    double rel_tol) {
    if (!(sigma0.norm() > 0.0))
        throw std::invalid_argument("membership requires a nonzero average stress");
    return classify(sigma0.ddot(eps0), porous_bound(f, m, sigma0).value, rel_tol);
}

MembershipVerdict membership_rigid(double f, const IsoModuli &m,
                                   const SymTensor2 &sigma0, const SymTensor2 &eps0,
                                   double rel_tol) {
    if (!(eps0.norm() > 0.0))
        throw std::invalid_argument("membership requires a nonzero average strain");
    return classify(sigma0.ddot(eps0), rigid_bound(f, m, eps0).value, rel_tol);
}

SymTensor2 boundary_strain(double f, const IsoModuli &m, const SymTensor2 &sigma0,
                           const std::array<double, 5> &eps_perp) {
    double W = porous_bound(f, m, sigma0).value;
    OrthoBasis6 basis = complete_basis(sigma0);
    SymTensor2 eps = (W / basis.t) * basis.B[0];
    for (int i = 0; i < 5; ++i)
        eps = eps + eps_perp[static_cast<size_t>(i)] * basis.B[static_cast<size_t>(i) + 1];
    return eps;
}

} // namespace wgc
