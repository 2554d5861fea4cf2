////////////////////////////////////////////////////////////////////////////////
// test_bounds.cc
////////////////////////////////////////////////////////////////////////////////
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/bounds.hh"
#include "helpers.hh"

#include <random>

using namespace wgc;
using test::random_rotation;
using test::random_sym;
using test::rotate;

namespace {

const IsoModuli UNIT{1.0, 1.0};

SymTensor2 diag(double a, double b, double c) {
    return SymTensor2::from_matrix(Vector3(a, b, c).asDiagonal());
}

IsoModuli random_moduli(std::mt19937_64 &g) {
    std::uniform_real_distribution<double> u(0.2, 5.0);
    return {u(g), u(g)};
}

} // namespace

////////////////////////////////////////////////////////////////////////////////
// Degenerate-phase quadratic forms: pinned values
////////////////////////////////////////////////////////////////////////////////

TEST_CASE("g on the void side reproduces pinned values at unit moduli") {
    CHECK(g_porous(UNIT, {0.0, 0.0, 1.0}).value == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(g_porous(UNIT, {1.0, 1.0, 1.0}).value == doctest::Approx(2.7).epsilon(1e-14));
    CHECK(g_porous(UNIT, {0.0, 0.0, 1.0}).branch == PorousBranch::AllNonnegTopDominant);
    CHECK(g_porous(UNIT, {1.0, 1.0, 1.0}).branch == PorousBranch::AllNonnegSumDominant);
}

TEST_CASE("g on the rigid side reproduces pinned values at unit moduli") {
    CHECK(g_rigid(UNIT, {1.0, 1.0, 1.0}).value ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(g_rigid(UNIT, {-1.0, 0.0, 1.0}).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g_rigid(UNIT, {1.0, 1.0, 1.0}).branch == RigidBranch::UniaxialMax);
    CHECK(g_rigid(UNIT, {-1.0, 0.0, 1.0}).branch == RigidBranch::Biaxial);
}

TEST_CASE("spectrum preconditions") {
    CHECK_THROWS_AS(g_porous(UNIT, {1.0, 0.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(g_porous(UNIT, {-2.0, -1.0, 3.0}), std::invalid_argument);
    CHECK_NOTHROW(g_porous(UNIT, {-2.0, 1.0, 3.0}));
}

////////////////////////////////////////////////////////////////////////////////
// Branch continuity across every interface
////////////////////////////////////////////////////////////////////////////////

namespace {

// g evaluated a hair on either side of an interface point must agree.
void check_interface(const IsoModuli &m, const Vector3 &s, const Vector3 &dir,
                     double tol) {
    double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    double h = 1e-7 * scale;
    GPorous lo = g_porous(m, s - h * dir);
    GPorous hi = g_porous(m, s + h * dir);
    CHECK(lo.branch != hi.branch);
    CHECK(std::abs(lo.value - hi.value) <= tol * scale * scale);
    CHECK_NOTHROW(g_porous(m, s)); // the tie window itself cross-checks
}

} // namespace

TEST_CASE("void-side branches are continuous across their interfaces") {
    std::mt19937_64 g(201);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int k = 0; k < 300; ++k) {
        IsoModuli m = random_moduli(g);
        // Interface s3 = s1 + s2 between the two all-nonnegative branches.
        {
            double s1 = u(g), s2 = s1 + u(g);
            Vector3 s(s1, s2, s1 + s2);
            check_interface(m, s, Vector3(0, 0, 1), 1e-5);
        }
        double mm = [&] {
            return m.mu / (m.mu + m.lambda);
        }();
        // Interface s2 + s3 = -mu s1 / (mu + lambda) (mid vs sum-small).
        {
            double s1 = -u(g);
            double thr = -mm * s1;
            double d = 0.25 * thr * u(g);
            Vector3 s(s1, 0.5 * thr - d, 0.5 * thr + d);
            check_interface(m, s, Vector3(0, 1, 1).normalized(), 1e-5);
        }
        // Interface s3 - s2 = -mu s1 / (mu + lambda) (mid vs gap-large).
        {
            double s1 = -u(g);
            double thr = -mm * s1;
            double x = u(g);
            Vector3 s(s1, x, x + thr);
            check_interface(m, s, Vector3(0, -1, 1).normalized(), 1e-5);
        }
    }
}

TEST_CASE("rigid-side branches are continuous across their interfaces") {
    std::mt19937_64 g(202);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int k = 0; k < 300; ++k) {
        IsoModuli m = random_moduli(g);
        double c = (m.lambda + 2.0 * m.mu) / (2.0 * (m.lambda + m.mu));
        double h = 1e-7;
        // eta3 = c (eta1 + eta3): biaxial vs uniaxial-max (eta1 > 0).
        {
            double e1 = u(g);
            double e3 = c * e1 / (1.0 - c);
            double e2 = e1 + (e3 - e1) * 0.5;
            GRigid lo = g_rigid(m, {e1, e2, e3 - h});
            GRigid hi = g_rigid(m, {e1, e2, e3 + h});
            CHECK(std::abs(lo.value - hi.value) <= 1e-5 * (1.0 + e3 * e3));
        }
        // eta1 = c (eta1 + eta3): biaxial vs uniaxial-min (eta3 < 0).
        {
            double e3 = -u(g);
            double e1 = c * e3 / (1.0 - c);
            double e2 = e1 + (e3 - e1) * 0.5;
            GRigid lo = g_rigid(m, {e1 - h, e2, e3});
            GRigid hi = g_rigid(m, {e1 + h, e2, e3});
            CHECK(std::abs(lo.value - hi.value) <= 1e-5 * (1.0 + e1 * e1));
        }
    }
}

////////////////////////////////////////////////////////////////////////////////
// Full bounds: invariances and pinned instances
////////////////////////////////////////////////////////////////////////////////

TEST_CASE("void-side bound: pinned instances") {
    // Uniaxial stress at f = 1/2: compliance 0.4 plus degenerate 0.4.
    PorousBound b = porous_bound(0.5, UNIT, diag(0, 0, 1));
    CHECK(b.value == doctest::Approx(0.8).epsilon(1e-13));
    CHECK(b.compliance_term == doctest::Approx(0.4).epsilon(1e-13));
    // Hydrostatic stress recovers the composite-sphere bulk response.
    for (double f : {0.3, 0.5, 0.7}) {
        PorousBound h = porous_bound(f, UNIT, diag(1, 1, 1));
        double expected = 0.6 + (1.0 - f) / (2.0 * f) * 2.7;
        CHECK(h.value == doctest::Approx(expected).epsilon(1e-13));
    }
    // All material: the degenerate term vanishes.
    PorousBound full = porous_bound(1.0, UNIT, diag(0, 0, 1));
    CHECK(full.value == doctest::Approx(full.compliance_term).epsilon(1e-15));
}

TEST_CASE("rigid-side bound: pinned instances") {
    for (double f : {0.3, 0.5, 0.7}) {
        RigidBound b = rigid_bound(f, UNIT, SymTensor2::identity());
        CHECK(b.value ==
              doctest::Approx(15.0 + 27.0 * (1.0 - f) / f).epsilon(1e-12));
    }
    RigidBound u = rigid_bound(0.5, UNIT, diag(1, 0, 0));
    CHECK(u.value == doctest::Approx(6.0).epsilon(1e-12));
    RigidBound full = rigid_bound(1.0, UNIT, diag(1, 0, 0));
    CHECK(full.value == doctest::Approx(full.elastic_term).epsilon(1e-12));
}

TEST_CASE("volume fraction contract") {
    CHECK_THROWS_AS(porous_bound(0.0, UNIT, diag(0, 0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(porous_bound(1.5, UNIT, diag(0, 0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(rigid_bound(-0.1, UNIT, diag(1, 0, 0)), std::invalid_argument);
}

TEST_CASE("sign normalization flips exactly when the median is negative") {
    bool flipped = false;
    Vector3 s = sign_normalize({-2.0, -1.0, 3.0}, flipped);
    CHECK(flipped);
    CHECK(s[0] == doctest::Approx(-3.0));
    CHECK(s[1] == doctest::Approx(1.0));
    CHECK(s[2] == doctest::Approx(2.0));
    s = sign_normalize({-1.0, 0.0, 2.0}, flipped);
    CHECK_FALSE(flipped);
}

TEST_CASE("void-side bound is even and quadratically homogeneous") {
    std::mt19937_64 g(203);
    std::uniform_real_distribution<double> uf(0.05, 0.99);
    for (int k = 0; k < 400; ++k) {
        IsoModuli m = random_moduli(g);
        double f = uf(g);
        SymTensor2 s = random_sym(g);
        PorousBound b = porous_bound(f, m, s);
        CHECK(porous_bound(f, m, -s).value == doctest::Approx(b.value).epsilon(1e-12));
        double t = 0.1 + 3.0 * uf(g);
        CHECK(porous_bound(f, m, t * s).value ==
              doctest::Approx(t * t * b.value).epsilon(1e-11));
    }
}

TEST_CASE("rigid-side bound is quadratically homogeneous and frame indifferent") {
    std::mt19937_64 g(204);
    std::uniform_real_distribution<double> uf(0.1, 0.95);
    for (int k = 0; k < 200; ++k) {
        IsoModuli m = random_moduli(g);
        double f = uf(g);
        SymTensor2 e = random_sym(g);
        RigidBound b = rigid_bound(f, m, e);
        double t = 0.1 + 3.0 * uf(g);
        CHECK(rigid_bound(f, m, t * e).value ==
              doctest::Approx(t * t * b.value).epsilon(1e-9));
        Matrix3 R = random_rotation(g);
        CHECK(rigid_bound(f, m, rotate(e, R)).value ==
              doctest::Approx(b.value).epsilon(1e-9));
        // The reported maximizer actually delivers the reported value.
        double phi = 2.0 * e.ddot(b.eta_star) -
                     f * g_rigid(m, eig_sym(b.eta_star).values).value;
        CHECK(b.value ==
              doctest::Approx(b.elastic_term + (1.0 - f) * phi).epsilon(1e-10));
    }
}

TEST_CASE("both bounds decrease as material is added") {
    std::mt19937_64 g(205);
    for (int k = 0; k < 50; ++k) {
        IsoModuli m = random_moduli(g);
        SymTensor2 s = random_sym(g), e = random_sym(g);
        double prev_w = 1e300, prev_r = 1e300;
        for (double f : {0.2, 0.4, 0.6, 0.8, 1.0}) {
            double w = porous_bound(f, m, s).value;
            double r = rigid_bound(f, m, e).value;
            CHECK(w <= prev_w * (1.0 + 1e-12));
            CHECK(r <= prev_r * (1.0 + 1e-10));
            prev_w = w;
            prev_r = r;
        }
    }
}

////////////////////////////////////////////////////////////////////////////////
// Independent grid oracle for the rigid-side inner maximum
////////////////////////////////////////////////////////////////////////////////

namespace {

// Brute-force the coaxial inner maximum over sorted spectra on a refining
// grid; knows nothing about stationarity or branch partitions.
double oracle_inner_max(double f, const IsoModuli &m, const Vector3 &e_sorted,
                        double box) {
    Vector3 center = Vector3::Zero();
    double best = -1e300;
    double half = box;
    for (int level = 0; level < 14; ++level) {
        const int N = 13;
        Vector3 best_eta = center;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int k = 0; k < N; ++k) {
                    Vector3 eta = center + half * Vector3(2.0 * i / (N - 1) - 1.0,
                                                          2.0 * j / (N - 1) - 1.0,
                                                          2.0 * k / (N - 1) - 1.0);
                    std::sort(eta.data(), eta.data() + 3);
                    double phi = 2.0 * e_sorted.dot(eta) -
                                 f * g_rigid(m, eta).value;
                    if (phi > best) {
                        best = phi;
                        best_eta = eta;
                    }
                }
        center = best_eta;
        half *= 0.35;
    }
    return best;
}

} // namespace

TEST_CASE("rigid-side bound matches the blind grid maximizer") {
    std::mt19937_64 g(206);
    std::uniform_real_distribution<double> uf(0.2, 0.9);
    for (int k = 0; k < 20; ++k) {
        IsoModuli m = random_moduli(g);
        double f = uf(g);
        SymTensor2 e = random_sym(g);
        RigidBound b = rigid_bound(f, m, e);
        Vector3 es = eig_sym(e).values;
        double box = 20.0 * (m.lambda + 2.0 * m.mu) * (1.0 + es.cwiseAbs().maxCoeff()) / f;
        double oracle = oracle_inner_max(f, m, es, box);
        double value = e.ddot(iso_elasticity(m).apply(e)) + (1.0 - f) * oracle;
        CHECK(b.value == doctest::Approx(value).epsilon(2e-3));
        CHECK(b.value >= value - 1e-9 * std::abs(value)); // closed form is the max
    }
}

////////////////////////////////////////////////////////////////////////////////
// Membership and the boundary parametrization
////////////////////////////////////////////////////////////////////////////////

TEST_CASE("membership trichotomy on both sides") {
    std::mt19937_64 g(207);
    std::uniform_real_distribution<double> uf(0.15, 0.9);
    for (int k = 0; k < 100; ++k) {
        IsoModuli m = random_moduli(g);
        double f = uf(g);
        SymTensor2 sigma = random_sym(g);

        // Void side: pin the strain on the bound surface, then scale.
        SymTensor2 eps_b = boundary_strain(f, m, sigma, {0, 0, 0, 0, 0});
        CHECK(membership_porous(f, m, sigma, eps_b).verdict == Verdict::Boundary);
        CHECK(membership_porous(f, m, sigma, 1.5 * eps_b).verdict ==
              Verdict::Interior);
        CHECK(membership_porous(f, m, sigma, 0.5 * eps_b).verdict ==
              Verdict::Infeasible);

        // Rigid side: place the stress along the strain at the bound level.
        SymTensor2 eps = random_sym(g);
        double wt = rigid_bound(f, m, eps).value;
        SymTensor2 sig_b = (wt / eps.ddot(eps)) * eps;
        CHECK(membership_rigid(f, m, sig_b, eps).verdict == Verdict::Boundary);
        CHECK(membership_rigid(f, m, 2.0 * sig_b, eps).verdict == Verdict::Interior);
        CHECK(membership_rigid(f, m, 0.5 * sig_b, eps).verdict ==
              Verdict::Infeasible);
    }
}

TEST_CASE("boundary strains stay on the bound surface for every free part") {
    std::mt19937_64 g(208);
    std::uniform_real_distribution<double> uf(0.15, 0.9);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        IsoModuli m = random_moduli(g);
        double f = uf(g);
        SymTensor2 sigma = random_sym(g);
        std::array<double, 5> perp{n(g), n(g), n(g), n(g), n(g)};
        SymTensor2 eps = boundary_strain(f, m, sigma, perp);
        MembershipVerdict v = membership_porous(f, m, sigma, eps);
        CHECK(v.verdict == Verdict::Boundary);
        // The along-seed coordinate is pinned: sigma : eps = W exactly.
        CHECK(sigma.ddot(eps) == doctest::Approx(v.bound).epsilon(1e-12));
    }
}

TEST_CASE("membership rejects zero tensors") {
    CHECK_THROWS_AS(membership_porous(0.5, UNIT, SymTensor2::zero(), diag(1, 1, 1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(membership_rigid(0.5, UNIT, diag(1, 1, 1), SymTensor2::zero()),
                    std::invalid_argument);
}
