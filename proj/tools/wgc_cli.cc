////////////////////////////////////////////////////////////////////////////////
// wgc_cli.cc
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Command-line front end.  Talks to the library exclusively through the C
//  interface in wgc/wgc.h; all numerics, handles, and error strings come
//  from there.
//
//  Every subcommand reads its inputs from flags, from a JSON job file
//  (--config, schema "wgc-job/1", keys spelled like the long flags), or a
//  mix, with explicit flags winning.  Unknown config keys are rejected.  The
//  result is one JSON document on stdout (or --output); everything outside
//  meta.generated_at is deterministic for fixed inputs.
//
//  Exit codes: 0 success, 2 invalid input, 3 infeasible (including a failed
//  --expect), 4 iteration did not converge, 5 internal error.
*/
////////////////////////////////////////////////////////////////////////////////
#include <wgc/wgc.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

using json = nlohmann::ordered_json;

namespace {

int g_exit = 0;

struct StatusError : std::runtime_error {
    int code;
    StatusError(int c, const std::string &msg) : std::runtime_error(msg), code(c) {}
};

struct InputError : StatusError {
    explicit InputError(const std::string &msg) : StatusError(2, msg) {}
};

void check(wgc_status st) {
    if (st != WGC_OK) throw StatusError(static_cast<int>(st), wgc_last_error());
}

std::string take_string(char *s) {
    std::string out = s ? s : "";
    wgc_string_free(s);
    return out;
}

std::string iso_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << text;
}

////////////////////////////////////////////////////////////////////////////////
// Input parsing
////////////////////////////////////////////////////////////////////////////////

/*! Accepts 6 Mandel components (t11 t22 t33 sqrt2*t23 sqrt2*t13 sqrt2*t12)
//  or 9 row-major matrix entries (symmetry enforced). */
std::array<double, 6> parse_sym(const std::vector<double> &v, const std::string &what) {
    if (v.size() == 6) return {v[0], v[1], v[2], v[3], v[4], v[5]};
    if (v.size() == 9) {
        double scale = 0.0;
        for (double x : v) scale = std::max(scale, std::abs(x));
        double tol = 1e-12 * std::max(1.0, scale);
        if (std::abs(v[1] - v[3]) > tol || std::abs(v[2] - v[6]) > tol ||
            std::abs(v[5] - v[7]) > tol)
            throw InputError(what + ": matrix input is not symmetric");
        const double s2 = std::sqrt(2.0);
        return {v[0], v[4], v[8], s2 * 0.5 * (v[5] + v[7]), s2 * 0.5 * (v[2] + v[6]),
                s2 * 0.5 * (v[1] + v[3])};
    }
    throw InputError(what + ": expected 6 Mandel or 9 row-major components, got " +
                     std::to_string(v.size()));
}

std::array<double, 3> parse_vec3(const std::vector<double> &v, const std::string &what) {
    if (v.size() == 3) return {v[0], v[1], v[2]};
    if (v.size() == 2) return {v[0], v[1], 0.0};
    throw InputError(what + ": expected 2 or 3 components, got " +
                     std::to_string(v.size()));
}

json sym_to_json(const std::array<double, 6> &m) {
    return json::array({m[0], m[1], m[2], m[3], m[4], m[5]});
}

////////////////////////////////////////////////////////////////////////////////
// Job: flag/config reconciliation
////////////////////////////////////////////////////////////////////////////////

/*! Binds each option to both a long flag and the config key of the same
//  spelling.  After CLI11 parses the flags, apply_config() fills every value
//  the command line did not provide and rejects keys it does not know. */
class Job {
public:
    Job(CLI::App *cmd, std::string name) : cmd_(cmd), name_(std::move(name)) {
        cmd_->add_option("--config", config_path_,
                         "JSON job file (schema \"wgc-job/1\"); explicit flags win");
        cmd_->add_option("--output", output_path_, "write the result JSON to this file");
    }

    template <class T>
    CLI::Option *bind(const std::string &key, T &target, const std::string &help) {
        auto *opt = cmd_->add_option("--" + key, target, help);
        if constexpr (std::is_same_v<T, std::vector<double>>) opt->delimiter(',');
        opts_[key] = opt;
        setters_[key] = [&target, key](const json &v) {
            try {
                target = v.get<T>();
            } catch (const std::exception &) {
                throw InputError("config key '" + key + "' has the wrong type");
            }
        };
        return opt;
    }

    void apply_config() {
        if (config_path_.empty()) return;
        std::ifstream in(config_path_);
        if (!in) throw InputError("cannot open config: " + config_path_);
        json cfg;
        try {
            cfg = json::parse(in);
        } catch (const std::exception &e) {
            throw InputError("config is not valid JSON: " + std::string(e.what()));
        }
        if (!cfg.is_object()) throw InputError("config must be a JSON object");
        if (cfg.value("schema", "") != "wgc-job/1")
            throw InputError("config schema must be \"wgc-job/1\"");
        if (cfg.contains("command") && cfg["command"] != name_)
            throw InputError("config command '" + cfg["command"].get<std::string>() +
                             "' does not match subcommand '" + name_ + "'");
        for (auto &[key, value] : cfg.items()) {
            if (key == "schema" || key == "command") continue;
            auto it = setters_.find(key);
            if (it == setters_.end())
                throw InputError("unknown config key: " + key);
            provided_.insert(key);
            if (opts_[key]->count() == 0) it->second(value);
        }
    }

    void require(std::initializer_list<std::string> keys) const {
        for (const auto &k : keys)
            if (opts_.at(k)->count() == 0 && !provided_.count(k))
                throw InputError("missing required input: --" + k);
    }

    void emit(json &doc) const {
        doc["meta"] = json{{"version", wgc_version()}, {"generated_at", iso_now()}};
        std::string text = doc.dump(2) + "\n";
        if (output_path_.empty())
            std::fputs(text.c_str(), stdout);
        else
            write_file(output_path_, text);
    }

    const std::string &name() const { return name_; }

private:
    CLI::App *cmd_;
    std::string name_;
    std::string config_path_, output_path_;
    std::map<std::string, CLI::Option *> opts_;
    std::map<std::string, std::function<void(const json &)>> setters_;
    std::set<std::string> provided_;
};

using JobPtr = std::shared_ptr<Job>;

/*! Wraps a subcommand body: failures print {"error", "code"} on stderr and
//  set the process exit code. */
void guarded(const std::function<void()> &body) {
    try {
        body();
    } catch (const StatusError &e) {
        json err{{"error", e.what()}, {"code", e.code}};
        std::fprintf(stderr, "%s\n", err.dump(2).c_str());
        g_exit = e.code;
    } catch (const std::exception &e) {
        json err{{"error", e.what()}, {"code", 5}};
        std::fprintf(stderr, "%s\n", err.dump(2).c_str());
        g_exit = 5;
    }
}

////////////////////////////////////////////////////////////////////////////////
// Handle guards
////////////////////////////////////////////////////////////////////////////////

struct LaminateDeleter {
    void operator()(wgc_laminate *h) const { wgc_laminate_free(h); }
};
struct ConvergenceDeleter {
    void operator()(wgc_convergence *h) const { wgc_convergence_free(h); }
};
struct ShieldDeleter {
    void operator()(wgc_shield *h) const { wgc_shield_free(h); }
};

using LaminatePtr = std::unique_ptr<wgc_laminate, LaminateDeleter>;
using ConvergencePtr = std::unique_ptr<wgc_convergence, ConvergenceDeleter>;
using ShieldPtr = std::unique_ptr<wgc_shield, ShieldDeleter>;

////////////////////////////////////////////////////////////////////////////////
// Subcommands
////////////////////////////////////////////////////////////////////////////////

void add_bound(CLI::App &app, bool strain_side) {
    const char *name = strain_side ? "bound-strain" : "bound-stress";
    const char *help = strain_side
                           ? "Least elastic energy of a material/rigid composite "
                             "under an average strain"
                           : "Least complementary energy of a material/void "
                             "composite under an average stress";
    auto *cmd = app.add_subcommand(name, help);
    auto job = std::make_shared<Job>(cmd, name);
    struct P {
        double f = 0, lambda = 0, mu = 0;
        std::vector<double> applied;
    };
    auto p = std::make_shared<P>();
    job->bind("f", p->f, "material volume fraction, strictly in (0,1)");
    job->bind("lambda", p->lambda, "first Lame modulus of the material");
    job->bind("mu", p->mu, "shear modulus of the material");
    job->bind("applied", p->applied,
              strain_side ? "average strain (6 Mandel or 9 matrix components)"
                          : "average stress (6 Mandel or 9 matrix components)");
    cmd->callback([job, p, strain_side] {
        guarded([&] {
            job->apply_config();
            job->require({"f", "lambda", "mu", "applied"});
            auto t = parse_sym(p->applied, "applied");
            wgc_bound_result r;
            check(strain_side
                      ? wgc_bound_strain(p->f, p->lambda, p->mu, t.data(), &r)
                      : wgc_bound_stress(p->f, p->lambda, p->mu, t.data(), &r));
            json doc{{"command", job->name()},
                     {"input",
                      {{"f", p->f},
                       {"lambda", p->lambda},
                       {"mu", p->mu},
                       {"applied", sym_to_json(t)}}},
                     {"result",
                      {{"value", r.value},
                       {"phase_term", r.phase_term},
                       {"degenerate_term", r.value - r.phase_term},
                       {"branch", r.branch},
                       {"eigenvalues",
                        json::array({r.eigenvalues[0], r.eigenvalues[1],
                                     r.eigenvalues[2]})}}}};
            if (!strain_side) doc["result"]["sign_flipped"] = r.sign_flipped != 0;
            job->emit(doc);
        });
    });
}

void add_membership(CLI::App &app) {
    auto *cmd = app.add_subcommand(
        "membership", "Classify an (average stress, average strain) pair against "
                      "the optimal energy bound");
    auto job = std::make_shared<Job>(cmd, "membership");
    struct P {
        std::string side = "stress", expect;
        double f = 0, lambda = 0, mu = 0, rel_tol = 1e-9;
        std::vector<double> sigma, eps;
    };
    auto p = std::make_shared<P>();
    job->bind("side", p->side, "'stress' (void phase) or 'strain' (rigid phase)");
    job->bind("f", p->f, "material volume fraction, strictly in (0,1)");
    job->bind("lambda", p->lambda, "first Lame modulus");
    job->bind("mu", p->mu, "shear modulus");
    job->bind("sigma", p->sigma, "average stress (6 Mandel or 9 matrix components)");
    job->bind("eps", p->eps, "average strain (6 Mandel or 9 matrix components)");
    job->bind("rel-tol", p->rel_tol, "boundary classification tolerance");
    job->bind("expect", p->expect,
              "fail with exit 3 unless the verdict matches "
              "(interior|boundary|infeasible)");
    cmd->callback([job, p] {
        guarded([&] {
            job->apply_config();
            job->require({"f", "lambda", "mu", "sigma", "eps"});
            if (p->side != "stress" && p->side != "strain")
                throw InputError("side must be 'stress' or 'strain'");
            auto s = parse_sym(p->sigma, "sigma");
            auto e = parse_sym(p->eps, "eps");
            wgc_membership_result r;
            check(p->side == "stress"
                      ? wgc_membership_stress(p->f, p->lambda, p->mu, s.data(),
                                              e.data(), p->rel_tol, &r)
                      : wgc_membership_strain(p->f, p->lambda, p->mu, s.data(),
                                              e.data(), p->rel_tol, &r));
            json doc{{"command", "membership"},
                     {"input",
                      {{"side", p->side},
                       {"f", p->f},
                       {"lambda", p->lambda},
                       {"mu", p->mu},
                       {"sigma", sym_to_json(s)},
                       {"eps", sym_to_json(e)},
                       {"rel-tol", p->rel_tol}}},
                     {"result",
                      {{"verdict", r.verdict_name},
                       {"pair_energy", r.bound + r.residual},
                       {"bound", r.bound},
                       {"residual", r.residual},
                       {"tol_abs", r.tol_abs}}}};
            bool mismatch = !p->expect.empty() && p->expect != r.verdict_name;
            if (!p->expect.empty()) {
                doc["result"]["expected"] = p->expect;
                doc["result"]["expected_match"] = !mismatch;
            }
            job->emit(doc);
            if (mismatch) g_exit = 3;
        });
    });
}

void add_boundary_strain(CLI::App &app) {
    auto *cmd = app.add_subcommand(
        "boundary-strain", "Average strain on the stress-side bound surface for a "
                           "given average stress and free orthogonal coordinates");
    auto job = std::make_shared<Job>(cmd, "boundary-strain");
    struct P {
        double f = 0, lambda = 0, mu = 0;
        std::vector<double> sigma, perp{0, 0, 0, 0, 0};
    };
    auto p = std::make_shared<P>();
    job->bind("f", p->f, "material volume fraction, strictly in (0,1)");
    job->bind("lambda", p->lambda, "first Lame modulus");
    job->bind("mu", p->mu, "shear modulus");
    job->bind("sigma", p->sigma, "average stress (6 Mandel or 9 matrix components)");
    job->bind("perp", p->perp, "5 free strain coordinates orthogonal to sigma");
    cmd->callback([job, p] {
        guarded([&] {
            job->apply_config();
            job->require({"f", "lambda", "mu", "sigma"});
            if (p->perp.size() != 5)
                throw InputError("perp needs exactly 5 components");
            auto s = parse_sym(p->sigma, "sigma");
            double eps[6];
            check(wgc_boundary_strain(p->f, p->lambda, p->mu, s.data(),
                                      p->perp.data(), eps));
            wgc_membership_result m;
            check(wgc_membership_stress(p->f, p->lambda, p->mu, s.data(), eps, 0.0, &m));
            json doc{{"command", "boundary-strain"},
                     {"input",
                      {{"f", p->f},
                       {"lambda", p->lambda},
                       {"mu", p->mu},
                       {"sigma", sym_to_json(s)},
                       {"perp", p->perp}}},
                     {"result",
                      {{"eps", json::array({eps[0], eps[1], eps[2], eps[3], eps[4],
                                            eps[5]})},
                       {"verdict", m.verdict_name},
                       {"bound", m.bound}}}};
            job->emit(doc);
        });
    });
}

void add_laminate_opt(CLI::App &app) {
    auto *cmd = app.add_subcommand(
        "laminate-opt", "Search sequential laminates for the energy-minimizing "
                        "microstructure at a fixed material fraction");
    auto job = std::make_shared<Job>(cmd, "laminate-opt");
    struct P {
        std::string mode = "complementary";
        double f = 0, lambda = 0, mu = 0, delta = 0;
        std::vector<double> applied;
        int rank = 3, budget = 40000;
        std::uint64_t seed = 1;
    };
    auto p = std::make_shared<P>();
    job->bind("mode", p->mode, "'complementary' (soft phase) or 'elastic' (stiff phase)");
    job->bind("f", p->f, "material volume fraction, strictly in (0,1)");
    job->bind("lambda", p->lambda, "first Lame modulus");
    job->bind("mu", p->mu, "shear modulus");
    job->bind("delta", p->delta,
              "degenerate-phase stiffness scale (default 1e-6 resp. 1e6)");
    job->bind("applied", p->applied, "average stress resp. strain (6 or 9 components)");
    job->bind("rank", p->rank, "maximum lamination depth (1..3)");
    job->bind("budget", p->budget, "energy evaluation budget across restarts");
    job->bind("seed", p->seed, "restart scrambling seed");
    cmd->callback([job, p] {
        guarded([&] {
            job->apply_config();
            job->require({"f", "lambda", "mu", "applied"});
            bool elastic = p->mode == "elastic";
            if (!elastic && p->mode != "complementary")
                throw InputError("mode must be 'complementary' or 'elastic'");
            double delta = p->delta > 0 ? p->delta : (elastic ? 1e6 : 1e-6);
            auto t = parse_sym(p->applied, "applied");

            wgc_laminate *raw = nullptr;
            wgc_optimize_result r;
            check(wgc_laminate_optimize(elastic ? 1 : 0, p->f, p->lambda, p->mu,
                                        delta, t.data(), p->rank, p->budget, p->seed,
                                        &raw, &r));
            LaminatePtr lam(raw);
            char *text = nullptr;
            check(wgc_laminate_format(lam.get(), &text));
            std::string tree = take_string(text);
            double fraction = 0;
            check(wgc_laminate_fraction(lam.get(), &fraction));

            wgc_bound_result b;
            check(elastic ? wgc_bound_strain(p->f, p->lambda, p->mu, t.data(), &b)
                          : wgc_bound_stress(p->f, p->lambda, p->mu, t.data(), &b));

            json doc{{"command", "laminate-opt"},
                     {"input",
                      {{"mode", p->mode},
                       {"f", p->f},
                       {"lambda", p->lambda},
                       {"mu", p->mu},
                       {"delta", delta},
                       {"applied", sym_to_json(t)},
                       {"rank", p->rank},
                       {"budget", p->budget},
                       {"seed", p->seed}}},
                     {"result",
                      {{"energy", r.energy},
                       {"bound", b.value},
                       {"energy_over_bound", r.energy / b.value},
                       {"tree", tree},
                       {"rank", r.rank},
                       {"fraction", fraction},
                       {"evaluations", r.evaluations},
                       {"converged", r.converged != 0}}}};
            job->emit(doc);
        });
    });
}

void add_delta_sweep(CLI::App &app) {
    auto *cmd = app.add_subcommand(
        "delta-sweep", "Energy of a fixed laminate tree along a degeneration "
                       "ladder, with monotonicity check and extrapolated limit");
    auto job = std::make_shared<Job>(cmd, "delta-sweep");
    struct P {
        std::string mode = "complementary", tree;
        double lambda = 0, mu = 0;
        std::vector<double> applied, ladder;
    };
    auto p = std::make_shared<P>();
    job->bind("mode", p->mode, "'complementary' or 'elastic'");
    job->bind("tree", p->tree, "laminate tree, e.g. \"lam(0 0 1; 0.5; p1; p2)\"");
    job->bind("lambda", p->lambda, "first Lame modulus");
    job->bind("mu", p->mu, "shear modulus");
    job->bind("applied", p->applied, "average stress resp. strain (6 or 9 components)");
    job->bind("ladder", p->ladder, "degeneration scales, strictly monotone");
    cmd->callback([job, p] {
        guarded([&] {
            job->apply_config();
            job->require({"tree", "lambda", "mu", "applied"});
            bool elastic = p->mode == "elastic";
            if (!elastic && p->mode != "complementary")
                throw InputError("mode must be 'complementary' or 'elastic'");
            auto t = parse_sym(p->applied, "applied");
            std::vector<double> ladder = p->ladder;
            if (ladder.empty())
                ladder = elastic
                             ? std::vector<double>{1e2, 1e3, 1e4, 1e5, 1e6}
                             : std::vector<double>{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

            wgc_laminate *raw = nullptr;
            check(wgc_laminate_parse(p->tree.c_str(), &raw));
            LaminatePtr lam(raw);
            char *text = nullptr;
            check(wgc_laminate_sweep_json(lam.get(), elastic ? 1 : 0, p->lambda,
                                          p->mu, t.data(), ladder.data(),
                                          static_cast<int>(ladder.size()), &text));
            json sweep = json::parse(take_string(text));
            char *canon = nullptr;
            check(wgc_laminate_format(lam.get(), &canon));

            json doc{{"command", "delta-sweep"},
                     {"input",
                      {{"mode", p->mode},
                       {"tree", take_string(canon)},
                       {"lambda", p->lambda},
                       {"mu", p->mu},
                       {"applied", sym_to_json(t)},
                       {"ladder", ladder}}},
                     {"result", sweep}};
            job->emit(doc);
        });
    });
}

void add_verify_convergence(CLI::App &app) {
    auto *cmd = app.add_subcommand(
        "verify-convergence",
        "Drive a synthetic family of composites down a bound-gap ladder and "
        "certify convergence of the induced average field");
    auto job = std::make_shared<Job>(cmd, "verify-convergence");
    struct P {
        std::string side = "stress", csv;
        double f = 0, lambda = 0, mu = 0;
        std::vector<double> applied, perp{0, 0, 0, 0, 0}, ladder;
        std::uint64_t rng_seed = 1;
    };
    auto p = std::make_shared<P>();
    job->bind("side", p->side, "'stress' (void phase) or 'strain' (rigid phase)");
    job->bind("f", p->f, "material volume fraction, strictly in (0,1)");
    job->bind("lambda", p->lambda, "first Lame modulus");
    job->bind("mu", p->mu, "shear modulus");
    job->bind("applied", p->applied,
              "seed tensor: average stress resp. strain (6 or 9 components)");
    job->bind("perp", p->perp, "5 free coordinates of the boundary partner");
    job->bind("ladder", p->ladder, "bound-gap ladder (default 1e-2 .. 1e-8)");
    job->bind("rng-seed", p->rng_seed, "seed for the family's coupling directions");
    job->bind("csv", p->csv, "also write the per-gap table to this CSV file");
    cmd->callback([job, p] {
        guarded([&] {
            job->apply_config();
            job->require({"f", "lambda", "mu", "applied"});
            if (p->side != "stress" && p->side != "strain")
                throw InputError("side must be 'stress' or 'strain'");
            if (p->perp.size() != 5)
                throw InputError("perp needs exactly 5 components");
            auto t = parse_sym(p->applied, "applied");
            std::vector<double> ladder = p->ladder;
            if (ladder.empty())
                ladder = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};

            wgc_convergence *raw = nullptr;
            check(p->side == "stress"
                      ? wgc_converge_stress(p->f, p->lambda, p->mu, t.data(),
                                            p->perp.data(), ladder.data(),
                                            static_cast<int>(ladder.size()),
                                            p->rng_seed, &raw)
                      : wgc_converge_strain(p->f, p->lambda, p->mu, t.data(),
                                            p->perp.data(), ladder.data(),
                                            static_cast<int>(ladder.size()),
                                            p->rng_seed, &raw));
            ConvergencePtr conv(raw);
            wgc_convergence_summary s;
            check(wgc_convergence_summarize(conv.get(), &s));
            char *text = nullptr;
            check(wgc_convergence_json(conv.get(), &text));
            json report = json::parse(take_string(text));
            if (!p->csv.empty()) {
                check(wgc_convergence_csv(conv.get(), &text));
                write_file(p->csv, take_string(text));
            }

            bool verified = s.margins_ok && s.residual_decreasing;
            json doc{{"command", "verify-convergence"},
                     {"input",
                      {{"side", p->side},
                       {"f", p->f},
                       {"lambda", p->lambda},
                       {"mu", p->mu},
                       {"applied", sym_to_json(t)},
                       {"perp", p->perp},
                       {"ladder", ladder},
                       {"rng-seed", p->rng_seed}}},
                     {"result",
                      {{"verified", verified},
                       {"margins_ok", s.margins_ok != 0},
                       {"residual_decreasing", s.residual_decreasing != 0},
                       {"final_residual", s.final_residual},
                       {"final_alpha_dev", s.final_alpha_dev},
                       {"report", report}}}};
            job->emit(doc);
            if (!verified) g_exit = 4;
        });
    });
}

void add_thermal_bounds(CLI::App &app) {
    auto *cmd = app.add_subcommand(
        "thermal-bounds", "Realizability of an (average flux, average gradient) "
                          "pair for a two-phase conductor");
    auto job = std::make_shared<Job>(cmd, "thermal-bounds");
    struct P {
        double f = 0, k1 = 0, k2 = 0, rel_tol = 1e-9;
        int dim = 3;
        std::vector<double> q, e;
    };
    auto p = std::make_shared<P>();
    job->bind("q", p->q, "average flux (2 or 3 components)");
    job->bind("e", p->e, "average temperature gradient (2 or 3 components)");
    job->bind("f", p->f, "volume fraction of phase 1, strictly in (0,1)");
    job->bind("k1", p->k1, "conductivity of phase 1");
    job->bind("k2", p->k2, "conductivity of phase 2 (0 = insulating)");
    job->bind("dim", p->dim, "spatial dimension, 2 or 3");
    job->bind("rel-tol", p->rel_tol, "boundary classification tolerance");
    cmd->callback([job, p] {
        guarded([&] {
            job->apply_config();
            job->require({"q", "e", "f", "k1", "k2"});
            auto q = parse_vec3(p->q, "q");
            auto e = parse_vec3(p->e, "e");
            wgc_thermal_result r;
            json result;
            if (p->k2 == 0.0) {
                double threshold = 0.0;
                check(wgc_thermal_insulating(q.data(), e.data(), p->f, p->k1, p->dim,
                                             p->rel_tol, &threshold, &r));
                result["insulating_threshold"] = threshold;
            } else {
                check(wgc_thermal_pair(q.data(), e.data(), p->f, p->k1, p->k2,
                                       p->dim, p->rel_tol, &r));
            }
            result["k_plus"] = r.k_plus;
            result["k_minus"] = r.k_minus;
            result["verdict"] = r.verdict_name;
            result["residual"] = r.residual;
            result["tol_abs"] = r.tol_abs;
            json doc{{"command", "thermal-bounds"},
                     {"input",
                      {{"q", json::array({q[0], q[1], q[2]})},
                       {"e", json::array({e[0], e[1], e[2]})},
                       {"f", p->f},
                       {"k1", p->k1},
                       {"k2", p->k2},
                       {"dim", p->dim},
                       {"rel-tol", p->rel_tol}}},
                     {"result", result}};
            job->emit(doc);
        });
    });
}

void add_thermal_laminate(CLI::App &app) {
    auto *cmd = app.add_subcommand(
        "thermal-laminate", "Rank-1 laminate conductivity realizing a boundary "
                            "(flux, gradient) pair");
    auto job = std::make_shared<Job>(cmd, "thermal-laminate");
    struct P {
        double f = 0, k1 = 0, k2 = 0, rel_tol = 1e-9;
        int dim = 3;
        std::vector<double> q, e;
    };
    auto p = std::make_shared<P>();
    job->bind("q", p->q, "average flux (2 or 3 components)");
    job->bind("e", p->e, "average temperature gradient (2 or 3 components)");
    job->bind("f", p->f, "volume fraction of phase 1, strictly in (0,1)");
    job->bind("k1", p->k1, "conductivity of phase 1");
    job->bind("k2", p->k2, "conductivity of phase 2");
    job->bind("dim", p->dim, "spatial dimension, 2 or 3");
    job->bind("rel-tol", p->rel_tol, "boundary tolerance for realizability");
    cmd->callback([job, p] {
        guarded([&] {
            job->apply_config();
            job->require({"q", "e", "f", "k1", "k2"});
            auto q = parse_vec3(p->q, "q");
            auto e = parse_vec3(p->e, "e");
            double K[9], n[3];
            check(wgc_thermal_laminate(q.data(), e.data(), p->f, p->k1, p->k2,
                                       p->dim, p->rel_tol, K, n));
            double consistency = 0.0;
            for (int i = 0; i < 3; ++i) {
                double qi = K[3 * i] * e[0] + K[3 * i + 1] * e[1] + K[3 * i + 2] * e[2];
                consistency = std::max(consistency, std::abs(qi - q[i]));
            }
            json doc{{"command", "thermal-laminate"},
                     {"input",
                      {{"q", json::array({q[0], q[1], q[2]})},
                       {"e", json::array({e[0], e[1], e[2]})},
                       {"f", p->f},
                       {"k1", p->k1},
                       {"k2", p->k2},
                       {"dim", p->dim},
                       {"rel-tol", p->rel_tol}}},
                     {"result",
                      {{"K",
                        json::array({json::array({K[0], K[1], K[2]}),
                                     json::array({K[3], K[4], K[5]}),
                                     json::array({K[6], K[7], K[8]})})},
                       {"normal", json::array({n[0], n[1], n[2]})},
                       {"consistency", consistency}}}};
            job->emit(doc);
        });
    });
}

struct ShieldParamsCli {
    double width = 1.0, window = 0.0, budget = 0.5, k1 = 1.0, fp_tol = 1e-8;
    int nx = 64, ny = 64, max_outer = 200;
    std::string psi_csv, speed_csv, f_csv;

    void bind(Job &job) {
        job.bind("width", width, "strip width w > 0");
        job.bind("window", window, "right edge blocked on [0, window], in [0,1)");
        job.bind("nx", nx, "cells across the width");
        job.bind("ny", ny, "cells across the height");
        job.bind("budget", budget, "average material density p in (0,1]");
        job.bind("k1", k1, "material conductivity");
        job.bind("fp-tol", fp_tol, "relative budget balance tolerance");
        job.bind("max-outer", max_outer, "multiplier bisection step limit");
        job.bind("psi-csv", psi_csv, "write the stream function grid to this file");
        job.bind("speed-csv", speed_csv, "write the flux magnitude grid to this file");
        job.bind("f-csv", f_csv, "write the material density grid to this file");
    }

    ShieldPtr solve() const {
        wgc_shield_params sp{width, window, nx, ny, budget, k1, fp_tol, max_outer};
        wgc_shield *raw = nullptr;
        check(wgc_shield_solve(&sp, &raw));
        return ShieldPtr(raw);
    }

    void dump_grids(const wgc_shield *h) const {
        auto grid = [&](const std::string &path, const char *kind) {
            if (path.empty()) return;
            char *text = nullptr;
            check(wgc_shield_grid_csv(h, kind, &text));
            write_file(path, take_string(text));
        };
        grid(psi_csv, "psi");
        grid(speed_csv, "speed");
        grid(f_csv, "f");
    }

    json input_json() const {
        return json{{"width", width}, {"window", window}, {"nx", nx},
                    {"ny", ny},       {"budget", budget}, {"k1", k1},
                    {"fp-tol", fp_tol}};
    }
};

void add_shield(CLI::App &app) {
    auto *cmd = app.add_subcommand(
        "shield", "Optimal material distribution shielding a region from heat "
                  "flux under a volume budget");
    auto job = std::make_shared<Job>(cmd, "shield");
    auto p = std::make_shared<ShieldParamsCli>();
    p->bind(*job);
    cmd->callback([job, p] {
        guarded([&] {
            job->apply_config();
            ShieldPtr sol = p->solve();
            p->dump_grids(sol.get());
            char *text = nullptr;
            check(wgc_shield_summary_json(sol.get(), &text));
            json doc{{"command", "shield"},
                     {"input", p->input_json()},
                     {"result", json::parse(take_string(text))}};
            job->emit(doc);
        });
    });
}

void add_temperature(CLI::App &app) {
    auto *cmd = app.add_subcommand(
        "temperature", "Shield solve plus temperature reconstruction along "
                       "streamlines (outflow pinned to zero)");
    auto job = std::make_shared<Job>(cmd, "temperature");
    auto p = std::make_shared<ShieldParamsCli>();
    auto t_csv = std::make_shared<std::string>();
    p->bind(*job);
    job->bind("t-csv", *t_csv, "write the temperature grid to this file");
    cmd->callback([job, p, t_csv] {
        guarded([&] {
            job->apply_config();
            ShieldPtr sol = p->solve();
            int flagged = 0;
            double inlet = 0.0;
            check(wgc_shield_temperature(sol.get(), &flagged, &inlet));
            p->dump_grids(sol.get());
            if (!t_csv->empty()) {
                char *text = nullptr;
                check(wgc_shield_grid_csv(sol.get(), "T", &text));
                write_file(*t_csv, take_string(text));
            }
            char *text = nullptr;
            check(wgc_shield_summary_json(sol.get(), &text));
            json doc{{"command", "temperature"},
                     {"input", p->input_json()},
                     {"result", json::parse(take_string(text))}};
            job->emit(doc);
        });
    });
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Weak G-closure toolbox: optimal energy bounds, attaining "
                 "laminates, convergence certification, and the conductivity "
                 "analogue for degenerate two-phase composites"};
    app.require_subcommand(1);

    add_bound(app, false);
    add_bound(app, true);
    add_membership(app);
    add_boundary_strain(app);
    add_laminate_opt(app);
    add_delta_sweep(app);
    add_verify_convergence(app);
    add_thermal_bounds(app);
    add_thermal_laminate(app);
    add_shield(app);
    add_temperature(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }
    return g_exit;
}
