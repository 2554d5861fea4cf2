////////////////////////////////////////////////////////////////////////////////
// laminate.hh
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Sequential laminates of a real isotropic phase with a delta-scaled copy of
//  itself (delta < 1 approximates void, delta > 1 approximates rigid), plus
//  derivative-free optimizers that search for energy-minimizing trees.  The
//  lamination algebra assumes separated length scales: each subtree is fully
//  homogenized before entering its parent.
*/
////////////////////////////////////////////////////////////////////////////////
#ifndef WGC_LAMINATE_HH
#define WGC_LAMINATE_HH

#include "tensor.hh"

#include <memory>
#include <string>
#include <vector>

namespace wgc {

////////////////////////////////////////////////////////////////////////////////
// LaminateTree
////////////////////////////////////////////////////////////////////////////////

/*! Binary tree: leaves are pure phases (1 = real material, 2 = degenerate
//  phase), internal nodes laminate their two children across a unit normal,
//  child `a` taking volume fraction `frac_a`. */
struct LaminateTree {
    struct Node {
        int phase = 1; //!< 1 or 2 for leaves, 0 for internal nodes
        Vector3 normal = Vector3::UnitZ();
        double frac_a = 0.5;
        std::unique_ptr<Node> a, b;

        bool is_leaf() const { return phase != 0; }
    };

    std::unique_ptr<Node> root;

    LaminateTree() = default;
    LaminateTree(const LaminateTree &o) : root(clone(o.root.get())) {}
    LaminateTree(LaminateTree &&) = default;
    LaminateTree &operator=(const LaminateTree &o) {
        root = clone(o.root.get());
        return *this;
    }
    LaminateTree &operator=(LaminateTree &&) = default;

    static LaminateTree leaf(int phase);
    static LaminateTree laminate(LaminateTree a, LaminateTree b,
                                 const Vector3 &normal, double frac_a);

    int rank() const;

private:
    static std::unique_ptr<Node> clone(const Node *n);
};

/*! Volume fraction of phase 1 aggregated over the whole tree. */
double phase1_fraction(const LaminateTree &t);

/*! Structural contract: unit normals to 1e-12, fractions strictly inside
//  (0,1), nonempty.  Throws std::invalid_argument on violation. */
void validate_tree(const LaminateTree &t);

/*! Canonical text form, round-trippable and deterministic:
//      p1 | p2 | lam(nx ny nz; frac_a; childA; childB)
//  with numbers printed at full precision. */
std::string format_tree(const LaminateTree &t);
LaminateTree parse_tree(const std::string &text);

////////////////////////////////////////////////////////////////////////////////
// Rank-1 lamination
////////////////////////////////////////////////////////////////////////////////

/*! Effective tensor of a rank-1 laminate of materials Ca (fraction fa) and
//  Cb across unit normal n.  The per-layer strain jump is rank one along n;
//  solving the 3x3 interface system for each unit average strain assembles
//  the effective map column by column.  A near-singular interface system
//  (possible when both children degenerate) is flagged, not rejected. */
struct LaminatePairResult {
    ElasticTensor C;
    double rcond = 1.0; //!< conditioning of the 3x3 interface system
    bool flagged = false;
};

LaminatePairResult laminate_pair(const ElasticTensor &Ca, const ElasticTensor &Cb,
                                 const Vector3 &n, double fa);

/*! Layer strains realizing an average strain in the rank-1 laminate. */
struct LayerStrains {
    SymTensor2 eps_a, eps_b;
};

LayerStrains laminate_layer_strains(const ElasticTensor &Ca, const ElasticTensor &Cb,
                                    const Vector3 &n, double fa, const SymTensor2 &eps_avg);

/*! Homogenize a whole tree with phase 1 = iso(m), phase 2 = delta * iso(m). */
struct SequentialResult {
    ElasticTensor C;
    double min_rcond = 1.0;
    bool flagged = false;
};

SequentialResult sequential_laminate(const LaminateTree &t, const IsoModuli &m, double delta);

////////////////////////////////////////////////////////////////////////////////
// Tree optimizers
////////////////////////////////////////////////////////////////////////////////

enum class EnergyMode : std::uint8_t {
    Complementary, //!< sigma : (C*)^{-1} sigma, degenerate phase soft (delta < 1)
    Elastic,       //!< eps : C* eps, degenerate phase stiff (delta > 1)
};

struct OptimizeOptions {
    int rank = 3;            //!< maximum lamination depth (1..3)
    int budget = 40000;      //!< total energy evaluations across restarts
    std::uint64_t seed = 1;  //!< restart scrambling (deterministic)
};

struct OptimizeOutcome {
    LaminateTree tree;
    double energy;
    int evaluations;
    bool converged; //!< best restart terminated by step collapse, not budget
};

/*! Minimize the complementary energy at average stress sigma0 over trees of
//  rank <= options.rank whose phase-1 fraction equals f exactly.  Restarts
//  seed lamination normals from the eigenframe of sigma0 and a deterministic
//  sphere covering, then run a shrinking pattern search. */
OptimizeOutcome optimize_complementary(double f, const IsoModuli &m, double delta,
                                       const SymTensor2 &sigma0,
                                       const OptimizeOptions &options = {});

/*! Same search, minimizing the elastic energy at average strain eps0 with a
//  stiff degenerate phase. */
OptimizeOutcome optimize_elastic(double f, const IsoModuli &m, double delta,
                                 const SymTensor2 &eps0,
                                 const OptimizeOptions &options = {});

////////////////////////////////////////////////////////////////////////////////
// Degeneration sweep
////////////////////////////////////////////////////////////////////////////////

/*! Energy of a fixed tree along a delta ladder, with the monotonicity that
//  scaling one phase implies: complementary energy nonincreasing in delta,
//  elastic energy nondecreasing.  The limit is estimated from the last three
//  entries by Aitken extrapolation. */
struct SweepRow {
    double delta;
    double energy;
    bool flagged;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double extrapolated;
    bool monotone;
};

SweepResult delta_sweep(const LaminateTree &t, const IsoModuli &m, EnergyMode mode,
                        const SymTensor2 &applied, const std::vector<double> &ladder);

} // namespace wgc

#endif // WGC_LAMINATE_HH
