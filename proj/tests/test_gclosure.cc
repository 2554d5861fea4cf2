////////////////////////////////////////////////////////////////////////////////
// test_gclosure.cc
////////////////////////////////////////////////////////////////////////////////
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/bounds.hh"
#include "core/gclosure.hh"
#include "helpers.hh"

#include <json.hpp>

#include <random>
#include <sstream>

using namespace wgc;
using test::random_spd6;
using test::random_sym;

namespace {

const IsoModuli UNIT{1.0, 1.0};

SymTensor2 nonzero_seed(std::mt19937_64 &g) {
    SymTensor2 s = random_sym(g);
    while (s.norm() < 0.3) s = random_sym(g);
    return s;
}

} // namespace

////////////////////////////////////////////////////////////////////////////////
// Block algebra
////////////////////////////////////////////////////////////////////////////////

TEST_CASE("block split and reassembly are inverse maps") {
    std::mt19937_64 g(401);
    for (int k = 0; k < 200; ++k) {
        SymTensor2 seed = nonzero_seed(g);
        OrthoBasis6 basis = complete_basis(seed);
        ElasticTensor M = random_spd6(g);
        BlockForm b = to_block(M, basis);
        ElasticTensor back = from_block(b, basis, M.kind);
        CHECK((back.M - M.M).norm() <= 1e-11 * M.M.norm());
        // Blocks really are the basis components of the form.
        CHECK(b.alpha == doctest::Approx(basis.B[0].ddot(M.apply(basis.B[0]))).epsilon(1e-12));
        for (int i = 0; i < 5; ++i)
            CHECK(b.a[i] ==
                  doctest::Approx(basis.B[static_cast<size_t>(i + 1)].ddot(M.apply(basis.B[0])))
                      .epsilon(1e-11).scale(1.0));
    }
}

TEST_CASE("block inverse agrees with the dense inverse") {
    std::mt19937_64 g(402);
    for (int k = 0; k < 1000; ++k) {
        SymTensor2 seed = nonzero_seed(g);
        OrthoBasis6 basis = complete_basis(seed);
        ElasticTensor M = random_spd6(g);
        BlockForm b = to_block(M, basis);
        BlockInverse bi = block_inverse(b);
        CHECK_FALSE(bi.flagged);

        Matrix6 T;
        T(0, 0) = b.alpha;
        T.block<5, 1>(1, 0) = b.a;
        T.block<1, 5>(0, 1) = b.a.transpose();
        T.block<5, 5>(1, 1) = b.A;
        CHECK((bi.inv * T - Matrix6::Identity()).norm() <= 1e-8);
        double schur = b.alpha - b.a.dot(b.A.ldlt().solve(b.a));
        CHECK(bi.schur == doctest::Approx(schur).epsilon(1e-9));
        // Top-left entry of the inverse is 1/schur.
        CHECK(bi.inv(0, 0) == doctest::Approx(1.0 / schur).epsilon(1e-9));
    }
}

////////////////////////////////////////////////////////////////////////////////
// Certification
////////////////////////////////////////////////////////////////////////////////

TEST_CASE("sandwich certificate on hand-built block tensors") {
    std::mt19937_64 g(403);
    SymTensor2 seed = nonzero_seed(g);
    OrthoBasis6 basis = complete_basis(seed);
    double W = 2.0;
    double t = basis.t;

    // Decoupled tensor with seed:M^{-1}seed = W + c exactly.
    double c = 1e-3;
    BlockForm b;
    b.alpha = t * t / (W + c);
    b.A = 1e-4 * Matrix5::Identity();
    ElasticTensor M = from_block(b, basis, ElasticTensor::Kind::Stiffness);

    SandwichCert cert = certify_sandwich(M, seed, basis, W);
    CHECK(cert.admissible);
    CHECK(cert.excess == doctest::Approx(c).epsilon(1e-9));
    CHECK(cert.tail == doctest::Approx(5e-4).epsilon(1e-12));
    CHECK(cert.c == doctest::Approx(std::max(c, 5e-4)).epsilon(1e-9));

    // A lower block alone still certifies through the tail term.
    BlockForm b2;
    b2.alpha = t * t / W;
    b2.A = 1e-4 * Matrix5::Identity();
    SandwichCert cert2 = certify_sandwich(from_block(b2, basis, ElasticTensor::Kind::Stiffness),
                                          seed, basis, W);
    CHECK(cert2.admissible);
    CHECK(cert2.c == doctest::Approx(5e-4).epsilon(1e-10));

    // Beating the bound is inadmissible.
    BlockForm cheat;
    cheat.alpha = t * t / (W - 0.5);
    cheat.A = Matrix5::Identity();
    SandwichCert bad = certify_sandwich(from_block(cheat, basis, ElasticTensor::Kind::Stiffness),
                                        seed, basis, W);
    CHECK_FALSE(bad.admissible);
}

TEST_CASE("chain margins fail when the coupling outruns the certified gap") {
    std::mt19937_64 g(404);
    SymTensor2 seed = nonzero_seed(g);
    OrthoBasis6 basis = complete_basis(seed);
    double f = 0.5;
    // Use the actual bound functional so the perturbed-input margin is real.
    auto bound_fn = [&](const SymTensor2 &s) { return porous_bound(f, UNIT, s).value; };
    double W = bound_fn(seed);
    double t = basis.t;

    double c = 1e-4;
    BlockForm good;
    good.alpha = t * t / (W + 0.5 * c);
    good.A = 0.1 * c * Matrix5::Identity();
    ChainChecks ok = chain_checks(good, basis, W, c, bound_fn);
    CHECK(ok.pass);
    CHECK(ok.margin_upper >= 0.0);
    CHECK(ok.margin_coupling >= 0.0);
    CHECK(ok.margin_perturbed >= -1e-12 * W);
    CHECK(ok.identity_err <= 1e-10);

    // Same tensor but a coupling vector violating |a|^2 <= c alpha.
    BlockForm bad = good;
    bad.a.setConstant(std::sqrt(2.0 * c * good.alpha));
    ChainChecks fail = chain_checks(bad, basis, W, c, bound_fn);
    CHECK(fail.margin_coupling < 0.0);
    CHECK_FALSE(fail.pass);
}

////////////////////////////////////////////////////////////////////////////////
// Synthetic families
////////////////////////////////////////////////////////////////////////////////

TEST_CASE("synthetic family realizes the requested gaps") {
    std::mt19937_64 g(405);
    for (int k = 0; k < 10; ++k) {
        SymTensor2 seed = nonzero_seed(g);
        OrthoBasis6 basis = complete_basis(seed);
        double f = 0.4;
        auto bound_fn = [&](const SymTensor2 &s) { return porous_bound(f, UNIT, s).value; };
        double W = bound_fn(seed);
        std::vector<double> ladder = {1e-2, 1e-4, 1e-6, 0.0};
        auto fam = synth_family(seed, basis, W, bound_fn, ladder, 7,
                                ElasticTensor::Kind::Stiffness);
        REQUIRE(fam.size() == ladder.size());
        for (size_t i = 0; i < fam.size(); ++i) {
            REQUIRE_FALSE(fam[i].skipped);
            CHECK(fam[i].c_requested == ladder[i]);
            if (ladder[i] > 0.0) {
                // Certified gap lands within a factor of two of c/2.
                CHECK(fam[i].c_certified <= ladder[i] * (1.0 + 1e-9));
                CHECK(fam[i].c_certified >= 0.25 * ladder[i]);
            } else {
                CHECK(fam[i].c_certified <=
                      1e-10 * (W + basis.t * basis.t));
            }
            SandwichCert cert = certify_sandwich(fam[i].M, seed, basis, W);
            CHECK(cert.admissible);
            ChainChecks chain = chain_checks(to_block(fam[i].M, basis), basis, W,
                                             fam[i].c_certified, bound_fn);
            CHECK(chain.pass);
        }
    }
}

TEST_CASE("family preconditions") {
    std::mt19937_64 g(406);
    SymTensor2 seed = nonzero_seed(g);
    OrthoBasis6 basis = complete_basis(seed);
    auto fn = [](const SymTensor2 &) { return 1.0; };
    CHECK_THROWS_AS(synth_family(seed, basis, 0.0, fn, {1e-2}, 1,
                                 ElasticTensor::Kind::Stiffness),
                    std::invalid_argument);
    CHECK_THROWS_AS(synth_family(seed, basis, 1.0, fn, {1e-2, -1e-3}, 1,
                                 ElasticTensor::Kind::Stiffness),
                    std::invalid_argument);
}

////////////////////////////////////////////////////////////////////////////////
// Full convergence runs
////////////////////////////////////////////////////////////////////////////////

TEST_CASE("stress-side squeezing drives the induced strain to the boundary pair") {
    std::mt19937_64 g(407);
    for (int k = 0; k < 5; ++k) {
        SymTensor2 sigma = nonzero_seed(g);
        std::array<double, 5> perp{};
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto &p : perp) p = 0.5 * u(g);
        std::vector<double> ladder = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
        ConvergenceReport rep = converge_stress(0.5, UNIT, sigma, perp, ladder, 11);
        CHECK(rep.mode == "stress");
        CHECK(rep.rows.size() == ladder.size());
        CHECK(rep.margins_ok);
        CHECK(rep.residual_decreasing);
        CHECK(rep.final_residual <= 1e-3 * sigma.norm());
        CHECK(rep.final_alpha_dev <= 1e-4);
        for (const auto &row : rep.rows) {
            REQUIRE_FALSE(row.skipped);
            CHECK(row.identity_err <= 1e-9);
            CHECK(row.margin_upper >= -1e-12 * rep.bound);
            CHECK(row.margin_coupling >= -1e-12 * rep.bound);
            CHECK(row.margin_perturbed >= -1e-9 * rep.bound);
        }
        // Residuals shrink with the gap, roughly linearly.
        CHECK(rep.rows.back().residual <= 0.1 * rep.rows.front().residual);
    }
}

TEST_CASE("strain-side squeezing mirrors the argument on compliances") {
    std::mt19937_64 g(408);
    for (int k = 0; k < 5; ++k) {
        SymTensor2 eps = nonzero_seed(g);
        std::array<double, 5> perp{};
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto &p : perp) p = 0.5 * u(g);
        std::vector<double> ladder = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
        ConvergenceReport rep = converge_strain(0.6, UNIT, eps, perp, ladder, 13);
        CHECK(rep.mode == "strain");
        CHECK(rep.margins_ok);
        CHECK(rep.residual_decreasing);
        CHECK(rep.final_residual <= 1e-3 * eps.norm());
        CHECK(rep.final_alpha_dev <= 1e-4);
    }
}

TEST_CASE("convergence run preconditions") {
    std::mt19937_64 g(409);
    SymTensor2 sigma = nonzero_seed(g);
    double f = 0.5;
    auto bound_fn = [&](const SymTensor2 &s) { return porous_bound(f, UNIT, s).value; };

    ConvergenceConfig cfg;
    cfg.seed = sigma;
    cfg.bound = bound_fn(sigma);
    cfg.bound_fn = bound_fn;
    cfg.ladder = {1e-2, 1e-4};
    // Partner off the boundary: pairing does not match the bound.
    cfg.partner = SymTensor2(sigma.v * (1.1 * cfg.bound / sigma.v.squaredNorm()));
    CHECK_THROWS_AS(run_convergence(cfg), std::invalid_argument);
    // On the boundary it runs.
    cfg.partner = SymTensor2(sigma.v * (cfg.bound / sigma.v.squaredNorm()));
    CHECK_NOTHROW(run_convergence(cfg));
}

TEST_CASE("report serializations carry every row") {
    std::mt19937_64 g(410);
    SymTensor2 sigma = nonzero_seed(g);
    std::array<double, 5> perp{};
    std::vector<double> ladder = {1e-2, 1e-4, 1e-6};
    ConvergenceReport rep = converge_stress(0.5, UNIT, sigma, perp, ladder, 3);

    std::string csv = rep.to_csv();
    size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == ladder.size() + 1); // header + one line per rung
    CHECK(csv.find("c_requested") != std::string::npos);

    nlohmann::json doc = nlohmann::json::parse(rep.to_json());
    CHECK(doc["mode"] == "stress");
    CHECK(doc["rows"].size() == ladder.size());
    CHECK(doc["margins_ok"].get<bool>() == rep.margins_ok);
    CHECK(doc["rows"][0].contains("margin_perturbed"));
}
