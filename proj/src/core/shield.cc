////////////////////////////////////////////////////////////////////////////////
// shield.cc
////////////////////////////////////////////////////////////////////////////////
#include "shield.hh"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace wgc {

void ShieldProblem::validate() const {
    if (!(width > 0.0))
        throw std::invalid_argument("strip width must be positive");
    if (!(window >= 0.0 && window < 1.0))
        throw std::invalid_argument("window parameter must lie in [0,1)");
    if (nx < 4 || ny < 4)
        throw std::invalid_argument("grid must be at least 4x4");
    if (!(budget > 0.0 && budget <= 1.0))
        throw std::invalid_argument("material budget must lie in (0,1]");
    if (!(k1 > 0.0))
        throw std::invalid_argument("conductivity must be positive");
    if (!(fp_tol > 0.0) || !(inner_tol > 0.0))
        throw std::invalid_argument("tolerances must be positive");
}

namespace {

constexpr double SPEED_FLOOR = 1e-8; // flux scale is 1 (unit inflow)

struct Grid {
    int nx, ny;
    double h1, h2, area;
    double w;
    int ja; //!< right-edge nodes j <= ja carry the blocked-wall value 0

    std::vector<int> free_pos;  //!< node -> index into free list, -1 if pinned
    std::vector<int> free_list; //!< free node ids

    explicit Grid(const ShieldProblem &p)
        : nx(p.nx), ny(p.ny), h1(p.width / p.nx), h2(1.0 / p.ny), area(h1 * h2),
          w(p.width) {
        ja = std::min(static_cast<int>(std::lround(p.window * ny)), ny - 1);
        int nn = (nx + 1) * (ny + 1);
        free_pos.assign(static_cast<size_t>(nn), -1);
        for (int i = 0; i <= nx; ++i)
            for (int j = 0; j <= ny; ++j) {
                if (pinned(i, j)) continue;
                free_pos[static_cast<size_t>(node(i, j))] = static_cast<int>(free_list.size());
                free_list.push_back(node(i, j));
            }
    }

    int node(int i, int j) const { return i * (ny + 1) + j; }
    int cell(int i, int j) const { return i * ny + j; }

    bool pinned(int i, int j) const {
        if (i == 0 || j == 0 || j == ny) return true;
        if (i == nx && j <= ja) return true;
        return false;
    }
    double pin_value(int i, int j) const {
        if (j == 0) return 0.0;
        if (j == ny) return 1.0;
        if (i == 0) return j * h2;
        return 0.0; // blocked right-edge segment
    }
    void enforce(Eigen::VectorXd &psi) const {
        for (int i = 0; i <= nx; ++i)
            for (int j = 0; j <= ny; ++j)
                if (pinned(i, j)) psi[node(i, j)] = pin_value(i, j);
    }
    Eigen::VectorXd initial_psi() const {
        Eigen::VectorXd psi((nx + 1) * (ny + 1));
        for (int i = 0; i <= nx; ++i)
            for (int j = 0; j <= ny; ++j)
                psi[node(i, j)] = j * h2;
        enforce(psi);
        return psi;
    }

    void flux(const Eigen::VectorXd &psi, Eigen::VectorXd &qx, Eigen::VectorXd &qy) const {
        qx.resize(nx * ny);
        qy.resize(nx * ny);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                double p00 = psi[node(i, j)], p10 = psi[node(i + 1, j)];
                double p01 = psi[node(i, j + 1)], p11 = psi[node(i + 1, j + 1)];
                qx[cell(i, j)] = ((p01 + p11) - (p00 + p10)) / (2.0 * h2);
                qy[cell(i, j)] = -((p10 + p11) - (p00 + p01)) / (2.0 * h1);
            }
    }

    // y = 2 J^T W J x for the cellwise quadratic sum_c W_c |q_c(x)|^2.
    void quad_apply(const std::vector<double> &W, const Eigen::VectorXd &x,
                    Eigen::VectorXd &y) const {
        y.setZero(x.size());
        double cx = 1.0 / (2.0 * h2), cy = 1.0 / (2.0 * h1);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                int n00 = node(i, j), n10 = node(i + 1, j);
                int n01 = node(i, j + 1), n11 = node(i + 1, j + 1);
                double qxc = (x[n01] + x[n11] - x[n00] - x[n10]) * cx;
                double qyc = -(x[n10] + x[n11] - x[n00] - x[n01]) * cy;
                double c = W[static_cast<size_t>(cell(i, j))];
                double gx = 2.0 * c * qxc, gy = 2.0 * c * qyc;
                y[n00] += -gx * cx + gy * cy;
                y[n10] += -gx * cx - gy * cy;
                y[n01] += gx * cx + gy * cy;
                y[n11] += gx * cx - gy * cy;
            }
    }

    void quad_diag(const std::vector<double> &W, Eigen::VectorXd &d) const {
        d.setZero((nx + 1) * (ny + 1));
        double dx = 1.0 / (4.0 * h2 * h2), dy = 1.0 / (4.0 * h1 * h1);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                double c = 2.0 * W[static_cast<size_t>(cell(i, j))] * (dx + dy);
                d[node(i, j)] += c;
                d[node(i + 1, j)] += c;
                d[node(i, j + 1)] += c;
                d[node(i + 1, j + 1)] += c;
            }
    }
};

// Preconditioned CG for the free-node correction A delta = -grad, in place.
void cg_minimize(const Grid &g, const std::vector<double> &W, Eigen::VectorXd &psi,
                 double rel_tol, int max_iters) {
    const size_t nf = g.free_list.size();
    Eigen::VectorXd full((g.nx + 1) * (g.ny + 1));

    auto apply_free = [&](const Eigen::VectorXd &xf, Eigen::VectorXd &yf) {
        full.setZero();
        for (size_t k = 0; k < nf; ++k) full[g.free_list[k]] = xf[static_cast<int>(k)];
        Eigen::VectorXd yfull;
        g.quad_apply(W, full, yfull);
        yf.resize(static_cast<int>(nf));
        for (size_t k = 0; k < nf; ++k) yf[static_cast<int>(k)] = yfull[g.free_list[k]];
    };

    Eigen::VectorXd grad_full;
    g.quad_apply(W, psi, grad_full);
    Eigen::VectorXd r(static_cast<int>(nf));
    for (size_t k = 0; k < nf; ++k) r[static_cast<int>(k)] = -grad_full[g.free_list[k]];
    double r0 = r.norm();
    if (!(r0 > 0.0)) return;

    Eigen::VectorXd diag_full;
    g.quad_diag(W, diag_full);
    Eigen::VectorXd dinv(static_cast<int>(nf));
    for (size_t k = 0; k < nf; ++k) {
        double d = diag_full[g.free_list[k]];
        dinv[static_cast<int>(k)] = d > 0.0 ? 1.0 / d : 1.0;
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<int>(nf));
    Eigen::VectorXd z = dinv.cwiseProduct(r);
    Eigen::VectorXd p = z, Ap(static_cast<int>(nf));
    double rz = r.dot(z);
    for (int it = 0; it < max_iters; ++it) {
        apply_free(p, Ap);
        double pAp = p.dot(Ap);
        if (!(pAp > 0.0)) break;
        double alpha = rz / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        if (r.norm() <= rel_tol * r0) break;
        z = dinv.cwiseProduct(r);
        double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    for (size_t k = 0; k < nf; ++k) psi[g.free_list[k]] += x[static_cast<int>(k)];
}

double objective(const ShieldProblem &prob, const Grid &g, const Eigen::VectorXd &speed,
                 double lambda) {
    double sum = 0.0;
    for (int c = 0; c < g.nx * g.ny; ++c) {
        double s = speed[c];
        sum += std::max(s / lambda, s * s);
    }
    return 4.0 / prob.k1 * g.area * sum;
}

// One lambda-solve: majorize-minimize until the true objective stalls.
void inner_minimize(const ShieldProblem &prob, const Grid &g, double lambda,
                    Eigen::VectorXd &psi) {
    Eigen::VectorXd qx, qy;
    std::vector<double> W(static_cast<size_t>(g.nx * g.ny));
    double prev = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < prob.max_inner; ++pass) {
        g.flux(psi, qx, qy);
        for (int c = 0; c < g.nx * g.ny; ++c) {
            double s = std::hypot(qx[c], qy[c]);
            double a = 1.0;
            if (s < 1.0 / lambda)
                a = std::max(1.0, 1.0 / (2.0 * std::max(s, SPEED_FLOOR) * lambda));
            W[static_cast<size_t>(c)] = 4.0 / prob.k1 * g.area * a;
        }
        cg_minimize(g, W, psi, 1e-10, prob.max_cg);
        g.flux(psi, qx, qy);
        Eigen::VectorXd speed = (qx.array().square() + qy.array().square()).sqrt();
        double cur = objective(prob, g, speed, lambda);
        if (std::abs(prev - cur) <= prob.inner_tol * std::max(std::abs(cur), 1e-300))
            break;
        prev = cur;
    }
}

double budget_of(const Grid &g, const Eigen::VectorXd &speed, double lambda) {
    double sum = 0.0;
    for (int c = 0; c < g.nx * g.ny; ++c)
        sum += std::min(lambda * speed[c], 1.0);
    return g.area * sum;
}

} // namespace

////////////////////////////////////////////////////////////////////////////////
// budget_balance
////////////////////////////////////////////////////////////////////////////////

FixedPsiResult budget_balance(const ShieldProblem &prob, const Eigen::VectorXd &psi) {
    prob.validate();
    Grid g(prob);
    if (psi.size() != (g.nx + 1) * (g.ny + 1))
        throw std::invalid_argument("stream function has the wrong grid size");
    Eigen::VectorXd p = psi;
    g.enforce(p);
    Eigen::VectorXd qx, qy;
    g.flux(p, qx, qy);
    Eigen::VectorXd speed = (qx.array().square() + qy.array().square()).sqrt();
    double wp = prob.width * prob.budget;

    FixedPsiResult out;
    double lo = 0.0, hi = 1.0;
    while (budget_of(g, speed, hi) < wp && hi < 1e14) hi *= 2.0;

    if (budget_of(g, speed, hi) < wp) {
        // Even f = 1 on the whole flux support cannot absorb the budget;
        // water-fill the leftover into the quietest cells (it cannot change
        // the resistance, only park material).
        out.saturated = true;
        out.lambda = hi;
        Eigen::VectorXd f0(g.nx * g.ny);
        for (int c = 0; c < g.nx * g.ny; ++c) f0[c] = std::min(hi * speed[c], 1.0);
        double tlo = 0.0, thi = 1.0;
        for (int it = 0; it < 200; ++it) {
            double t = 0.5 * (tlo + thi);
            double b = 0.0;
            for (int c = 0; c < g.nx * g.ny; ++c) b += std::max(f0[c], t);
            (g.area * b < wp ? tlo : thi) = t;
        }
        double t = 0.5 * (tlo + thi);
        out.fvol = f0.cwiseMax(t);
    } else {
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (budget_of(g, speed, mid) < wp ? lo : hi) = mid;
        }
        out.lambda = 0.5 * (lo + hi);
        out.fvol.resize(g.nx * g.ny);
        for (int c = 0; c < g.nx * g.ny; ++c)
            out.fvol[c] = std::min(out.lambda * speed[c], 1.0);
    }

    double used = 0.0, R = 0.0;
    for (int c = 0; c < g.nx * g.ny; ++c) {
        used += out.fvol[c];
        if (speed[c] > 0.0 && out.fvol[c] > 0.0)
            R += speed[c] * speed[c] / out.fvol[c];
    }
    out.R = 4.0 / prob.k1 * g.area * R;
    out.residual = std::abs(g.area * used - wp) / wp;
    return out;
}

////////////////////////////////////////////////////////////////////////////////
// shield_solve
////////////////////////////////////////////////////////////////////////////////

ShieldSolution shield_solve(const ShieldProblem &prob) {
    prob.validate();
    Grid g(prob);
    Eigen::VectorXd psi = g.initial_psi();
    double wp = prob.width * prob.budget;

    ShieldSolution sol;
    sol.prob = prob;
    sol.h1 = g.h1;
    sol.h2 = g.h2;

    if (prob.budget >= 1.0 - 1e-12) {
        // Full budget: f = 1, the objective is the plain Dirichlet energy.
        std::vector<double> W(static_cast<size_t>(g.nx * g.ny), 4.0 / prob.k1 * g.area);
        cg_minimize(g, W, psi, 1e-12, prob.max_cg);
        sol.outer_iterations = 1;
    } else {
        // Bracket the multiplier on the monotone budget residual, then
        // bisect in log space.  Each probe re-optimizes psi (warm start).
        double lam = 1.0;
        inner_minimize(prob, g, lam, psi);
        Eigen::VectorXd qx, qy;
        g.flux(psi, qx, qy);
        Eigen::VectorXd speed = (qx.array().square() + qy.array().square()).sqrt();
        double G = budget_of(g, speed, lam) - wp;
        int outer = 1;

        double lo = lam, hi = lam;
        double Glo = G, Ghi = G;
        while (Glo > 0.0 && lo > 1e-12 && outer < prob.max_outer) {
            lo /= 4.0;
            inner_minimize(prob, g, lo, psi);
            g.flux(psi, qx, qy);
            speed = (qx.array().square() + qy.array().square()).sqrt();
            Glo = budget_of(g, speed, lo) - wp;
            ++outer;
        }
        while (Ghi < 0.0 && hi < 1e7 && outer < prob.max_outer) {
            hi *= 4.0;
            inner_minimize(prob, g, hi, psi);
            g.flux(psi, qx, qy);
            speed = (qx.array().square() + qy.array().square()).sqrt();
            Ghi = budget_of(g, speed, hi) - wp;
            ++outer;
        }

        if (Ghi < 0.0) {
            // Saturated: the fixed point does not exist; budget_balance
            // below will water-fill.  psi already optimized at huge lambda
            // (essentially the Dirichlet energy).
            sol.saturated = true;
        } else if (Glo > 0.0) {
            throw NoConvergence("multiplier bracket collapsed at the lower end");
        } else {
            double Gmid = G;
            while (outer < prob.max_outer) {
                double mid = std::sqrt(lo * hi);
                inner_minimize(prob, g, mid, psi);
                g.flux(psi, qx, qy);
                speed = (qx.array().square() + qy.array().square()).sqrt();
                Gmid = budget_of(g, speed, mid) - wp;
                ++outer;
                if (std::abs(Gmid) <= prob.fp_tol * wp) break;
                if (hi - lo <= 1e-9 * hi) break; // lambda resolved past the G noise floor
                (Gmid < 0.0 ? lo : hi) = mid;
            }
            // A numerically exhausted bracket pins lambda as sharply as the
            // inner solves allow; the leftover budget mismatch is the
            // discretization floor (the clamp f = min(lambda |q|, 1) can make
            // the fixed-point map jump), and budget_balance below restores
            // the budget exactly at this psi.  Only an unexhausted bracket
            // that still misses the tolerance is a genuine failure.
            if (std::abs(Gmid) > prob.fp_tol * wp && hi - lo > 1e-9 * hi) {
                char msg[160];
                std::snprintf(msg, sizeof(msg),
                              "multiplier fixed point not reached: bracket [%g, %g], residual %g",
                              lo, hi, std::abs(Gmid) / wp);
                throw NoConvergence(msg);
            }
        }
        sol.outer_iterations = outer;
    }

    // Final densities from the exact budget balance at the final psi.
    FixedPsiResult bal = budget_balance(prob, psi);
    sol.psi = psi;
    g.flux(psi, sol.qx, sol.qy);
    sol.speed = (sol.qx.array().square() + sol.qy.array().square()).sqrt();
    sol.fvol = bal.fvol;
    sol.lambda = bal.lambda;
    sol.resistance = bal.R;
    sol.fp_residual = bal.residual;
    sol.saturated = sol.saturated || bal.saturated;
    return sol;
}

////////////////////////////////////////////////////////////////////////////////
// Temperature reconstruction
////////////////////////////////////////////////////////////////////////////////

namespace {

// Clamped bilinear interpolation of a cell-centered field.
struct CellField {
    const Eigen::VectorXd &v;
    int nx, ny;
    double h1, h2;

    double operator()(double x1, double x2) const {
        double u = x1 / h1 - 0.5, w = x2 / h2 - 0.5;
        int i = static_cast<int>(std::floor(u)), j = static_cast<int>(std::floor(w));
        double fu = u - i, fw = w - j;
        i = std::clamp(i, 0, nx - 2);
        j = std::clamp(j, 0, ny - 2);
        fu = std::clamp(u - i, 0.0, 1.0);
        fw = std::clamp(w - j, 0.0, 1.0);
        auto at = [&](int ii, int jj) { return v[ii * ny + jj]; };
        return (1 - fu) * ((1 - fw) * at(i, j) + fw * at(i, j + 1)) +
               fu * ((1 - fw) * at(i + 1, j) + fw * at(i + 1, j + 1));
    }
};

} // namespace

void reconstruct_temperature(ShieldSolution &sol) {
    const ShieldProblem &p = sol.prob;
    int nx = p.nx, ny = p.ny;
    CellField FQX{sol.qx, nx, ny, sol.h1, sol.h2};
    CellField FQY{sol.qy, nx, ny, sol.h1, sol.h2};
    CellField FF{sol.fvol, nx, ny, sol.h1, sol.h2};

    double step = 0.35 * std::min(sol.h1, sol.h2);
    int max_steps = 50 * (nx + ny);
    double nan = std::numeric_limits<double>::quiet_NaN();

    sol.T.resize(nx * ny);
    sol.flagged_cells = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            int c = sol.cell(i, j);
            double x1 = (i + 0.5) * sol.h1, x2 = (j + 0.5) * sol.h2;
            double T = 0.0;
            bool ok = true;
            for (int s = 0;; ++s) {
                if (s >= max_steps) { ok = false; break; }
                double qx = FQX(x1, x2), qy = FQY(x1, x2);
                double sp = std::hypot(qx, qy);
                if (sp < 1e-10) { ok = false; break; } // stagnant: no streamline
                double mx = x1 + 0.5 * step * qx / sp, my = x2 + 0.5 * step * qy / sp;
                double qmx = FQX(mx, my), qmy = FQY(mx, my);
                double spm = std::hypot(qmx, qmy);
                if (spm < 1e-10) { ok = false; break; }
                double fm = std::max(FF(mx, my), 1e-12);
                double nx1 = x1 + step * qmx / spm, nx2 = x2 + step * qmy / spm;
                if (nx1 >= p.width) {
                    double frac = (p.width - x1) / (nx1 - x1);
                    T += frac * step * spm / (fm * p.k1);
                    break;
                }
                T += step * spm / (fm * p.k1);
                if (nx1 <= 0.0) { ok = false; break; } // left exit: not a flow path
                x1 = nx1;
                x2 = std::clamp(nx2, 1e-12, 1.0 - 1e-12);
            }
            if (ok) {
                sol.T[c] = T;
            } else {
                sol.T[c] = nan;
                ++sol.flagged_cells;
            }
        }

    // Inlet line integral, extended the half cell to the boundary.
    double drop = 0.0;
    bool valid = true;
    for (int j = 0; j < ny; ++j) {
        int c = sol.cell(0, j);
        if (!std::isfinite(sol.T[c])) { valid = false; continue; }
        double f = std::max(sol.fvol[c], 1e-12);
        drop += sol.h2 * (sol.T[c] + 0.5 * sol.h1 * sol.speed[c] / (f * p.k1));
    }
    sol.inlet_drop = valid ? drop : nan;
    sol.has_temperature = true;
}

////////////////////////////////////////////////////////////////////////////////
// Serialization
////////////////////////////////////////////////////////////////////////////////

std::string ShieldSolution::summary_json() const {
    nlohmann::ordered_json j;
    j["width"] = prob.width;
    j["window"] = prob.window;
    j["nx"] = prob.nx;
    j["ny"] = prob.ny;
    j["budget"] = prob.budget;
    j["k1"] = prob.k1;
    j["lambda"] = lambda;
    j["resistance"] = resistance;
    j["fp_residual"] = fp_residual;
    j["outer_iterations"] = outer_iterations;
    j["saturated"] = saturated;
    j["has_temperature"] = has_temperature;
    if (has_temperature) {
        j["flagged_cells"] = flagged_cells;
        j["inlet_drop"] = std::isfinite(inlet_drop) ? inlet_drop : 0.0;
        j["inlet_drop_valid"] = std::isfinite(inlet_drop);
    }
    return j.dump(2);
}

std::string ShieldSolution::grid_csv(const std::string &kind) const {
    char buf[96];
    std::string out;
    auto row3 = [&](double a, double b, double c) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\n", a, b, c);
        out += buf;
    };
    if (kind == "psi") {
        out = "x1,x2,psi\n";
        for (int i = 0; i <= prob.nx; ++i)
            for (int j = 0; j <= prob.ny; ++j)
                row3(i * h1, j * h2, psi[node(i, j)]);
        return out;
    }
    const Eigen::VectorXd *v = nullptr;
    if (kind == "speed") v = &speed;
    else if (kind == "f") v = &fvol;
    else if (kind == "T") v = &T;
    else throw std::invalid_argument("unknown grid kind: " + kind);
    if (kind == "T" && !has_temperature)
        throw std::invalid_argument("temperature has not been reconstructed");
    out = "x1,x2," + kind + "\n";
    for (int i = 0; i < prob.nx; ++i)
        for (int j = 0; j < prob.ny; ++j)
            row3((i + 0.5) * h1, (j + 0.5) * h2, (*v)[cell(i, j)]);
    return out;
}

} // namespace wgc
