////////////////////////////////////////////////////////////////////////////////
// laminate.cc
////////////////////////////////////////////////////////////////////////////////
#include "laminate.hh"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <random>

namespace wgc {

////////////////////////////////////////////////////////////////////////////////
// Tree basics
////////////////////////////////////////////////////////////////////////////////

LaminateTree LaminateTree::leaf(int phase) {
    if (phase != 1 && phase != 2)
        throw std::invalid_argument("leaf phase must be 1 or 2");
    LaminateTree t;
    t.root = std::make_unique<Node>();
    t.root->phase = phase;
    return t;
}

LaminateTree LaminateTree::laminate(LaminateTree a, LaminateTree b,
                                    const Vector3 &normal, double frac_a) {
    if (!a.root || !b.root)
        throw std::invalid_argument("laminate children must be nonempty");
    LaminateTree t;
    t.root = std::make_unique<Node>();
    t.root->phase = 0;
    t.root->normal = normal;
    t.root->frac_a = frac_a;
    t.root->a = std::move(a.root);
    t.root->b = std::move(b.root);
    return t;
}

std::unique_ptr<LaminateTree::Node> LaminateTree::clone(const Node *n) {
    if (!n) return nullptr;
    auto c = std::make_unique<Node>();
    c->phase = n->phase;
    c->normal = n->normal;
    c->frac_a = n->frac_a;
    c->a = clone(n->a.get());
    c->b = clone(n->b.get());
    return c;
}

namespace {

int node_rank(const LaminateTree::Node *n) {
    if (!n || n->is_leaf()) return 0;
    return 1 + std::max(node_rank(n->a.get()), node_rank(n->b.get()));
}

double node_phase1(const LaminateTree::Node *n) {
    if (n->is_leaf()) return n->phase == 1 ? 1.0 : 0.0;
    return n->frac_a * node_phase1(n->a.get()) + (1.0 - n->frac_a) * node_phase1(n->b.get());
}

void node_validate(const LaminateTree::Node *n) {
    if (!n)
        throw std::invalid_argument("laminate tree has an empty subtree");
    if (n->is_leaf()) {
        if (n->phase != 1 && n->phase != 2)
            throw std::invalid_argument("leaf phase must be 1 or 2");
        return;
    }
    if (std::abs(n->normal.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("lamination normal must be unit to 1e-12");
    if (!(n->frac_a > 0.0 && n->frac_a < 1.0))
        throw std::invalid_argument("lamination fraction must lie strictly inside (0,1)");
    node_validate(n->a.get());
    node_validate(n->b.get());
}

} // namespace

int LaminateTree::rank() const { return node_rank(root.get()); }

double phase1_fraction(const LaminateTree &t) {
    if (!t.root) throw std::invalid_argument("empty laminate tree");
    return node_phase1(t.root.get());
}

void validate_tree(const LaminateTree &t) { node_validate(t.root.get()); }

////////////////////////////////////////////////////////////////////////////////
// Text form
////////////////////////////////////////////////////////////////////////////////

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void node_format(const LaminateTree::Node *n, std::string &out) {
    if (n->is_leaf()) {
        out += n->phase == 1 ? "p1" : "p2";
        return;
    }
    out += "lam(";
    out += num(n->normal[0]) + " " + num(n->normal[1]) + " " + num(n->normal[2]);
    out += "; " + num(n->frac_a) + "; ";
    node_format(n->a.get(), out);
    out += "; ";
    node_format(n->b.get(), out);
    out += ")";
}

struct TreeParser {
    const char *p;
    const char *end;

    void ws() {
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\n' || *p == '\r')) ++p;
    }
    bool lit(const char *s) {
        ws();
        size_t n = std::strlen(s);
        if (static_cast<size_t>(end - p) >= n && std::strncmp(p, s, n) == 0) {
            p += n;
            return true;
        }
        return false;
    }
    void expect(const char *s) {
        if (!lit(s))
            throw std::invalid_argument(std::string("laminate text: expected '") + s + "'");
    }
    double number() {
        ws();
        char *q = nullptr;
        double v = std::strtod(p, &q);
        if (q == p)
            throw std::invalid_argument("laminate text: expected a number");
        p = q;
        return v;
    }
    std::unique_ptr<LaminateTree::Node> node() {
        ws();
        auto n = std::make_unique<LaminateTree::Node>();
        if (lit("p1")) { n->phase = 1; return n; }
        if (lit("p2")) { n->phase = 2; return n; }
        expect("lam(");
        n->phase = 0;
        n->normal[0] = number();
        n->normal[1] = number();
        n->normal[2] = number();
        expect(";");
        n->frac_a = number();
        expect(";");
        n->a = node();
        expect(";");
        n->b = node();
        expect(")");
        return n;
    }
};

} // namespace

std::string format_tree(const LaminateTree &t) {
    if (!t.root) throw std::invalid_argument("empty laminate tree");
    std::string out;
    node_format(t.root.get(), out);
    return out;
}

LaminateTree parse_tree(const std::string &text) {
    TreeParser ps{text.c_str(), text.c_str() + text.size()};
    LaminateTree t;
    t.root = ps.node();
    ps.ws();
    if (ps.p != ps.end)
        throw std::invalid_argument("laminate text: trailing characters");
    validate_tree(t);
    return t;
}

////////////////////////////////////////////////////////////////////////////////
// Rank-1 lamination
////////////////////////////////////////////////////////////////////////////////

namespace {

// Acoustic-type matrix G(C,n)_ik = C_ijkl n_j n_l, symmetric and PD for SPD C.
Matrix3 acoustic(const ElasticTensor &C, const Vector3 &n) {
    Matrix3 G;
    for (int k = 0; k < 3; ++k) {
        SymTensor2 t = SymTensor2::sym_outer(Vector3::Unit(k), n);
        G.col(k) = C.apply(t).matrix() * n;
    }
    return 0.5 * (G + G.transpose());
}

struct InterfaceSystem {
    Eigen::SelfAdjointEigenSolver<Matrix3> es;
    double rcond = 0.0;

    InterfaceSystem(const ElasticTensor &Ca, const ElasticTensor &Cb,
                    const Vector3 &n, double fa) {
        Matrix3 M = (1.0 - fa) * acoustic(Ca, n) + fa * acoustic(Cb, n);
        es.compute(M);
        double lo = es.eigenvalues()[0], hi = es.eigenvalues()[2];
        rcond = (hi > 0.0) ? lo / hi : 0.0;
    }

    // Jump amplitude for a given average strain; rank-one correction along n.
    Vector3 solve(const ElasticTensor &Ca, const ElasticTensor &Cb,
                  const Vector3 &n, const SymTensor2 &eps_avg) const {
        Vector3 rhs = (Cb - Ca).apply(eps_avg).matrix() * n;
        Vector3 y = es.eigenvectors().transpose() * rhs;
        for (int i = 0; i < 3; ++i) {
            double w = es.eigenvalues()[i];
            y[i] = (std::abs(w) > 0.0) ? y[i] / w : 0.0;
        }
        return es.eigenvectors() * y;
    }
};

void check_pair_args(const ElasticTensor &Ca, const ElasticTensor &Cb,
                     const Vector3 &n, double fa) {
    if (!(fa > 0.0 && fa < 1.0))
        throw std::invalid_argument("layer fraction must lie strictly inside (0,1)");
    if (std::abs(n.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("lamination normal must be unit to 1e-12");
    if (Ca.kind != ElasticTensor::Kind::Stiffness || Cb.kind != ElasticTensor::Kind::Stiffness)
        throw std::invalid_argument("lamination acts on stiffness maps");
}

} // namespace

LaminatePairResult laminate_pair(const ElasticTensor &Ca, const ElasticTensor &Cb,
                                 const Vector3 &n, double fa) {
    check_pair_args(Ca, Cb, n, fa);
    double fb = 1.0 - fa;
    InterfaceSystem sys(Ca, Cb, n, fa);

    Matrix6 M;
    for (int j = 0; j < 6; ++j) {
        SymTensor2 ehat{Vector6::Unit(j)};
        Vector3 a = sys.solve(Ca, Cb, n, ehat);
        SymTensor2 col = Ca.apply(ehat) * fa + Cb.apply(ehat) * fb +
                         (Ca - Cb).apply(SymTensor2::sym_outer(a, n)) * (fa * fb);
        M.col(j) = col.v;
    }

    LaminatePairResult out;
    out.C = ElasticTensor(0.5 * (M + M.transpose()), ElasticTensor::Kind::Stiffness);
    out.rcond = sys.rcond;
    out.flagged = sys.rcond < 1e-13;
    return out;
}

LayerStrains laminate_layer_strains(const ElasticTensor &Ca, const ElasticTensor &Cb,
                                    const Vector3 &n, double fa, const SymTensor2 &eps_avg) {
    check_pair_args(Ca, Cb, n, fa);
    InterfaceSystem sys(Ca, Cb, n, fa);
    Vector3 a = sys.solve(Ca, Cb, n, eps_avg);
    SymTensor2 jump = SymTensor2::sym_outer(a, n);
    return {eps_avg + (1.0 - fa) * jump, eps_avg - fa * jump};
}

namespace {

SequentialResult homogenize(const LaminateTree::Node *n, const ElasticTensor &C1,
                            const ElasticTensor &C2) {
    if (n->is_leaf())
        return {n->phase == 1 ? C1 : C2, 1.0, false};
    SequentialResult a = homogenize(n->a.get(), C1, C2);
    SequentialResult b = homogenize(n->b.get(), C1, C2);
    LaminatePairResult p = laminate_pair(a.C, b.C, n->normal, n->frac_a);
    SequentialResult out;
    out.C = p.C;
    out.min_rcond = std::min({a.min_rcond, b.min_rcond, p.rcond});
    out.flagged = a.flagged || b.flagged || p.flagged;
    return out;
}

} // namespace

SequentialResult sequential_laminate(const LaminateTree &t, const IsoModuli &m, double delta) {
    validate_tree(t);
    if (!(delta > 0.0))
        throw std::invalid_argument("degenerate-phase scale must be positive");
    ElasticTensor C1 = iso_elasticity(m);
    ElasticTensor C2 = C1 * delta;
    return homogenize(t.root.get(), C1, C2);
}

////////////////////////////////////////////////////////////////////////////////
// Optimizers
////////////////////////////////////////////////////////////////////////////////

namespace {

constexpr double INF = std::numeric_limits<double>::infinity();

struct SearchSpec {
    double f;
    IsoModuli m;
    double delta;
    SymTensor2 applied;
    EnergyMode mode;
    int rank;

    int dim() const { return 2 * rank + (rank - 1); }
};

Vector3 angles_to_dir(double th, double ph) {
    Vector3 n(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
    return n.normalized();
}

void dir_to_angles(const Vector3 &n, double &th, double &ph) {
    th = std::acos(std::clamp(n[2], -1.0, 1.0));
    ph = std::atan2(n[1], n[0]);
}

/*! Rank-K family searched over: level 1 laminates phase 1 against the
//  degenerate phase, each further level wraps the previous composite in more
//  phase 1.  Level weights live on a simplex through softmax logits, and the
//  leftover fractions multiply to (1-f) exactly, so the aggregate phase-1
//  fraction is f by construction at every parameter value. */
LaminateTree build_tree(const SearchSpec &sp, const std::vector<double> &x) {
    int K = sp.rank;
    double a[3] = {0.0, 0.0, 0.0};
    double zmax = 0.0;
    for (int k = 1; k < K; ++k)
        zmax = std::max(zmax, std::clamp(x[static_cast<size_t>(2 * K + k - 1)], -30.0, 30.0));
    double s = 0.0;
    for (int k = 0; k < K; ++k) {
        double z = (k == 0) ? 0.0 : std::clamp(x[static_cast<size_t>(2 * K + k - 1)], -30.0, 30.0);
        a[k] = std::exp(z - zmax);
        s += a[k];
    }
    for (int k = 0; k < K; ++k) a[k] /= s;

    double residual = 1.0 - sp.f;
    double f1 = 1.0 - std::pow(residual, a[0]);
    LaminateTree tree = LaminateTree::laminate(LaminateTree::leaf(1), LaminateTree::leaf(2),
                                               angles_to_dir(x[0], x[1]), f1);
    for (int k = 1; k < K; ++k) {
        double mk = std::pow(residual, a[k]);
        if (mk >= 1.0 - 1e-12) continue; // level carries no material; collapse it
        tree = LaminateTree::laminate(std::move(tree), LaminateTree::leaf(1),
                                      angles_to_dir(x[static_cast<size_t>(2 * k)],
                                                    x[static_cast<size_t>(2 * k + 1)]),
                                      mk);
    }
    return tree;
}

double tree_energy(const LaminateTree &t, const IsoModuli &m, double delta,
                   EnergyMode mode, const SymTensor2 &applied) {
    SequentialResult h = sequential_laminate(t, m, delta);
    if (mode == EnergyMode::Complementary)
        return h.C.inverse_quadratic(applied);
    return h.C.quadratic(applied);
}

struct Evaluator {
    const SearchSpec &sp;
    int evals = 0;

    double operator()(const std::vector<double> &x) {
        ++evals;
        try {
            return tree_energy(build_tree(sp, x), sp.m, sp.delta, sp.mode, sp.applied);
        } catch (const std::exception &) {
            return INF;
        }
    }
};

// Greedy coordinate pattern search with geometric step shrink.
double pattern_search(Evaluator &ev, std::vector<double> &x, double step_angle,
                      double step_logit, int max_evals, bool &converged) {
    const int dim = static_cast<int>(x.size());
    const int nang = 2 * ev.sp.rank;
    std::vector<double> steps(static_cast<size_t>(dim));
    for (int d = 0; d < dim; ++d)
        steps[static_cast<size_t>(d)] = d < nang ? step_angle : step_logit;

    int start_evals = ev.evals;
    double best = ev(x);
    converged = false;
    while (ev.evals - start_evals < max_evals) {
        bool moved = false;
        for (int d = 0; d < dim && ev.evals - start_evals < max_evals; ++d) {
            for (double dir : {+1.0, -1.0}) {
                if (ev.evals - start_evals >= max_evals) break;
                std::vector<double> trial = x;
                trial[static_cast<size_t>(d)] += dir * steps[static_cast<size_t>(d)];
                double e = ev(trial);
                if (e < best - 1e-14 * std::abs(best)) {
                    best = e;
                    x = trial;
                    moved = true;
                }
            }
        }
        if (!moved) {
            double mx = 0.0;
            for (auto &s : steps) { s *= 0.6; mx = std::max(mx, s); }
            if (mx < 1e-5) { converged = true; break; }
        }
    }
    return best;
}

OptimizeOutcome run_search(const SearchSpec &sp, const OptimizeOptions &opt) {
    if (sp.rank < 1 || sp.rank > 3)
        throw std::invalid_argument("laminate rank must be 1, 2, or 3");
    if (!(sp.f > 0.0 && sp.f < 1.0))
        throw std::invalid_argument("optimizer requires a volume fraction strictly inside (0,1)");
    sp.m.validate();

    // Restart frames: eigenframe of the applied tensor in several column
    // orders (the optimum aligns with it in every case with known closed
    // form), then seeded random rotations for coverage.
    EigSym es = eig_sym(sp.applied);
    std::vector<Matrix3> frames;
    const int perms[4][3] = {{0, 1, 2}, {2, 0, 1}, {1, 2, 0}, {2, 1, 0}};
    for (auto &pm : perms) {
        Matrix3 F;
        for (int c = 0; c < 3; ++c) F.col(c) = es.vectors.col(pm[c]);
        frames.push_back(F);
    }
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < 4; ++r) {
        Eigen::Quaterniond qt(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
        qt.normalize();
        frames.push_back(qt.toRotationMatrix());
    }

    const double logit_seeds[4][2] = {{0, 0}, {-4.6, -4.6}, {2, 2}, {-2, 1}};

    std::vector<std::vector<double>> starts;
    for (const auto &F : frames) {
        for (const auto &ls : logit_seeds) {
            std::vector<double> x(static_cast<size_t>(sp.dim()), 0.0);
            for (int k = 0; k < sp.rank; ++k)
                dir_to_angles(F.col(k), x[static_cast<size_t>(2 * k)], x[static_cast<size_t>(2 * k + 1)]);
            for (int k = 1; k < sp.rank; ++k)
                x[static_cast<size_t>(2 * sp.rank + k - 1)] = ls[k - 1];
            starts.push_back(std::move(x));
            if (sp.rank == 1) break; // logits unused
        }
    }

    Evaluator ev{sp};
    int per_start = std::max(64, opt.budget / static_cast<int>(starts.size() + 1));

    double best = INF;
    std::vector<double> xbest;
    bool best_converged = false;
    for (auto &x0 : starts) {
        if (ev.evals >= opt.budget) break;
        std::vector<double> x = x0;
        bool conv = false;
        double e = pattern_search(ev, x, 0.4, 0.8,
                                  std::min(per_start, opt.budget - ev.evals), conv);
        if (e < best) {
            best = e;
            xbest = x;
            best_converged = conv;
        }
    }

    // Final refinement around the winner with the leftover budget.
    if (!xbest.empty() && ev.evals < opt.budget) {
        bool conv = false;
        double e = pattern_search(ev, xbest, 0.05, 0.1, opt.budget - ev.evals, conv);
        if (e <= best) {
            best = e;
            best_converged = best_converged || conv;
        }
    }

    if (xbest.empty())
        throw std::runtime_error("laminate search exhausted its budget without one full start");

    OptimizeOutcome out;
    out.tree = build_tree(sp, xbest);
    out.energy = best;
    out.evaluations = ev.evals;
    out.converged = best_converged;
    return out;
}

} // namespace

OptimizeOutcome optimize_complementary(double f, const IsoModuli &m, double delta,
                                       const SymTensor2 &sigma0, const OptimizeOptions &options) {
    SearchSpec sp{f, m, delta, sigma0, EnergyMode::Complementary, options.rank};
    return run_search(sp, options);
}

OptimizeOutcome optimize_elastic(double f, const IsoModuli &m, double delta,
                                 const SymTensor2 &eps0, const OptimizeOptions &options) {
    SearchSpec sp{f, m, delta, eps0, EnergyMode::Elastic, options.rank};
    return run_search(sp, options);
}

////////////////////////////////////////////////////////////////////////////////
// Degeneration sweep
////////////////////////////////////////////////////////////////////////////////

SweepResult delta_sweep(const LaminateTree &t, const IsoModuli &m, EnergyMode mode,
                        const SymTensor2 &applied, const std::vector<double> &ladder) {
    if (ladder.size() < 2)
        throw std::invalid_argument("delta ladder needs at least two entries");
    bool asc = ladder[1] > ladder[0];
    for (size_t i = 1; i < ladder.size(); ++i) {
        bool step_asc = ladder[i] > ladder[i - 1];
        if (step_asc != asc || ladder[i] == ladder[i - 1])
            throw std::invalid_argument("delta ladder must be strictly monotone");
    }

    SweepResult out;
    out.rows.reserve(ladder.size());
    for (double d : ladder) {
        SequentialResult h = sequential_laminate(t, m, d);
        double e = (mode == EnergyMode::Complementary) ? h.C.inverse_quadratic(applied)
                                                       : h.C.quadratic(applied);
        out.rows.push_back({d, e, h.flagged});
    }

    // Stiffening one phase stiffens the composite: elastic energy must not
    // drop with delta, complementary energy must not grow.
    out.monotone = true;
    for (size_t i = 1; i < out.rows.size(); ++i) {
        double prev = out.rows[i - 1].energy, cur = out.rows[i].energy;
        double up_in_delta = asc ? cur - prev : prev - cur;
        double allowed = 1e-12 * std::max(std::abs(prev), std::abs(cur));
        bool ok = (mode == EnergyMode::Elastic) ? up_in_delta >= -allowed
                                                : up_in_delta <= allowed;
        if (!ok) out.monotone = false;
    }

    size_t n = out.rows.size();
    double e2 = out.rows[n - 1].energy;
    if (n >= 3) {
        double e0 = out.rows[n - 3].energy;
        double e1 = out.rows[n - 2].energy;
        double d1 = e1 - e0, d2 = e2 - e1;
        double denom = d2 - d1;
        out.extrapolated = (std::abs(denom) > 1e-300) ? e2 - d2 * d2 / denom : e2;
    } else {
        out.extrapolated = e2;
    }
    return out;
}

} // namespace wgc
