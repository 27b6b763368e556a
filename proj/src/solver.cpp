#include "maxarea/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>

namespace maxarea {

std::vector<std::pair<int, double>> DiscreteProblem::fixed_values() const {
    std::map<int, double> m;
    for (auto& [n, v] : boundary.resolve(*domain)) m[n] = v;
    for (auto& [n, v] : pinned) {
        if (n < 0 || n >= (int)domain->num_nodes() || !domain->state[n])
            throw DomainError("DiscreteProblem: pinned node is not active");
        m[n] = v;
    }
    return {m.begin(), m.end()};
}

double energy(const ScalarField& u) {
    const GridDomain& d = *u.domain;
    double sum = 0.0, comp = 0.0;
    for (std::size_t t = 0; t < d.tris.size(); ++t) {
        const Tri& T = d.tris[t];
        double px = (u[T.ax1] - u[T.ax0]) / d.h;
        double py = (u[T.ay1] - u[T.ay0]) / d.h;
        double s2 = px * px + py * py;
        if (s2 > 1.0 + 1e-12) {
            auto v = d.ij(T.v0);
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "energy: infeasible triangle at cell (%d,%d), |p|=%.6f",
                          v[0], v[1], std::sqrt(s2));
            throw InfeasibleFieldError(buf);
        }
        double term = T.area * std::sqrt(std::max(0.0, 1.0 - s2));
        double y = term - comp;
        double tt = sum + y;
        comp = (tt - sum) - y;
        sum = tt;
    }
    return sum;
}

namespace {

double clamped_energy(const GridDomain& d, const std::vector<double>& u) {
    double sum = 0.0, comp = 0.0;
    for (const Tri& T : d.tris) {
        double px = (u[T.ax1] - u[T.ax0]) / d.h;
        double py = (u[T.ay1] - u[T.ay0]) / d.h;
        double s2 = px * px + py * py;
        double term = T.area * std::sqrt(std::max(0.0, 1.0 - s2));
        double y = term - comp;
        double tt = sum + y;
        comp = (tt - sum) - y;
        sum = tt;
    }
    return sum;
}

// Column of dp/du for node n in triangle T, times h.
inline void column(const Tri& T, int n, double& mx, double& my) {
    mx = (n == T.ax1 ? 1.0 : 0.0) - (n == T.ax0 ? 1.0 : 0.0);
    my = (n == T.ay1 ? 1.0 : 0.0) - (n == T.ay0 ? 1.0 : 0.0);
}

struct ProjTri {
    int tri;
    int nfree;
    int nodes[3];
    double mx[3], my[3];
};

struct Contrib {
    int tri;
    std::int8_t cx, cy;
};

struct Work {
    const GridDomain& d;
    std::vector<int> free_nodes;       // node ids, one per dof
    std::vector<int> dof_of;           // node -> dof index or -1
    std::vector<ProjTri> ptris;        // triangles with >= 1 free vertex
    std::vector<std::vector<Contrib>> adj;  // per dof
    std::vector<double> tgx, tgy;      // per-tri gradient factors
    std::vector<double> tcurv;         // per-tri curvature scale
    std::vector<double> tpx, tpy, tq;  // per-tri state cached for assembly
    std::vector<std::uint8_t> tpen;    // in the linear continuation region
    // lower-triangular CSR of -Hessian (cols ascending, diagonal last per
    // row) and its incomplete Cholesky factor, used as the CG preconditioner
    std::vector<int> ic_rowptr, ic_col;
    std::vector<double> ic_val, ic_fac;
    std::vector<int> tri_slot;         // per-ptri vertex-pair -> CSR slot
    std::vector<double> ic_y;          // triangular solve scratch
    bool ic_ok = false;

    explicit Work(const GridDomain& dom,
                  const std::vector<std::pair<int, double>>& fixed)
        : d(dom) {
        dof_of.assign(d.num_nodes(), -1);
        std::vector<std::uint8_t> is_fixed(d.num_nodes(), 0);
        for (auto& [n, v] : fixed) is_fixed[n] = 1;
        for (int n : d.active_ids)
            if (!is_fixed[n]) {
                dof_of[n] = (int)free_nodes.size();
                free_nodes.push_back(n);
            }
        adj.resize(free_nodes.size());
        for (std::size_t t = 0; t < d.tris.size(); ++t) {
            const Tri& T = d.tris[t];
            int verts[3] = {T.v0, T.v1, T.v2};
            int nv = d.dim == 1 ? 2 : 3;
            ProjTri pt{};
            pt.tri = (int)t;
            pt.nfree = 0;
            for (int k = 0; k < nv; ++k) {
                int n = verts[k];
                if (dof_of[n] < 0) continue;
                double mx, my;
                column(T, n, mx, my);
                pt.nodes[pt.nfree] = n;
                pt.mx[pt.nfree] = mx;
                pt.my[pt.nfree] = my;
                ++pt.nfree;
                adj[dof_of[n]].push_back(
                    Contrib{(int)t, (std::int8_t)mx, (std::int8_t)my});
            }
            if (pt.nfree > 0) ptris.push_back(pt);
        }
        tgx.assign(d.tris.size(), 0.0);
        tgy.assign(d.tris.size(), 0.0);
        tcurv.assign(d.tris.size(), 0.0);
        tpx.assign(d.tris.size(), 0.0);
        tpy.assign(d.tris.size(), 0.0);
        tq.assign(d.tris.size(), 1.0);
        tpen.assign(d.tris.size(), 0);

        // symbolic lower triangle of the Hessian over the free dofs
        std::vector<std::vector<int>> cols(free_nodes.size());
        for (const ProjTri& pt : ptris)
            for (int i = 0; i < pt.nfree; ++i)
                for (int j = 0; j < i; ++j) {
                    int a = dof_of[pt.nodes[i]], b = dof_of[pt.nodes[j]];
                    cols[std::max(a, b)].push_back(std::min(a, b));
                }
        ic_rowptr.assign(free_nodes.size() + 1, 0);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            auto& c = cols[k];
            std::sort(c.begin(), c.end());
            c.erase(std::unique(c.begin(), c.end()), c.end());
            ic_rowptr[k + 1] = ic_rowptr[k] + (int)c.size() + 1;
        }
        ic_col.resize(ic_rowptr.back());
        for (std::size_t k = 0; k < cols.size(); ++k) {
            int p = ic_rowptr[k];
            for (int j : cols[k]) ic_col[p++] = j;
            ic_col[p] = (int)k;  // diagonal stored last in each row
        }
        ic_val.assign(ic_col.size(), 0.0);
        ic_fac.assign(ic_col.size(), 0.0);
        ic_y.assign(free_nodes.size(), 0.0);
        tri_slot.reserve(ptris.size() * 6);
        for (const ProjTri& pt : ptris)
            for (int i = 0; i < pt.nfree; ++i)
                for (int j = 0; j <= i; ++j) {
                    int a = dof_of[pt.nodes[i]], b = dof_of[pt.nodes[j]];
                    int row = std::max(a, b), col = std::min(a, b);
                    int lo = ic_rowptr[row], hi = ic_rowptr[row + 1];
                    int s = hi - 1;
                    if (row != col)
                        s = (int)(std::lower_bound(ic_col.begin() + lo,
                                                   ic_col.begin() + hi - 1,
                                                   col) -
                                  ic_col.begin());
                    tri_slot.push_back(s);
                }
    }

    // Assembles -Hessian at the state cached by the last gradient() call and
    // refreshes its incomplete Cholesky factor, raising the diagonal shift
    // until the factorization succeeds.
    void ic_update() {
        const double h2 = d.h * d.h;
        std::fill(ic_val.begin(), ic_val.end(), 0.0);
        std::size_t s = 0;
        for (const ProjTri& pt : ptris) {
            int t = pt.tri;
            const Tri& T = d.tris[t];
            double sq = std::sqrt(tq[t]);
            double w1 = T.area / (h2 * sq);
            double w2 = tpen[t] ? 0.0 : T.area / (h2 * tq[t] * sq);
            for (int i = 0; i < pt.nfree; ++i)
                for (int j = 0; j <= i; ++j) {
                    double mm = pt.mx[i] * pt.mx[j] + pt.my[i] * pt.my[j];
                    double pp = (pt.mx[i] * tpx[t] + pt.my[i] * tpy[t]) *
                                (pt.mx[j] * tpx[t] + pt.my[j] * tpy[t]);
                    ic_val[tri_slot[s++]] += mm * w1 + pp * w2;
                }
        }
        ic_ok = false;
        for (double shift : {0.0, 1e-3, 1e-2, 1e-1, 1.0})
            if (ic_factor(shift)) {
                ic_ok = true;
                break;
            }
    }

    bool ic_factor(double shift) {
        const std::size_t n = free_nodes.size();
        for (std::size_t i = 0; i < n; ++i) {
            int lo = ic_rowptr[i], dslot = ic_rowptr[i + 1] - 1;
            double di = ic_val[dslot] * (1.0 + shift);
            for (int s = lo; s < dslot; ++s) {
                int j = ic_col[s];
                int jlo = ic_rowptr[j], jd = ic_rowptr[j + 1] - 1;
                double sum = ic_val[s];
                int a = lo, b = jlo;
                while (a < s && b < jd) {
                    if (ic_col[a] == ic_col[b])
                        sum -= ic_fac[a++] * ic_fac[b++];
                    else if (ic_col[a] < ic_col[b])
                        ++a;
                    else
                        ++b;
                }
                double lij = sum / ic_fac[jd];
                ic_fac[s] = lij;
                di -= lij * lij;
            }
            if (!(di > 0.0)) return false;
            ic_fac[dslot] = std::sqrt(di);
        }
        return true;
    }

    // out = (-Hessian) v using the values assembled by ic_update()
    void mv(const std::vector<double>& v, std::vector<double>& out) {
        const std::size_t n = free_nodes.size();
        out.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            int lo = ic_rowptr[i], dslot = ic_rowptr[i + 1] - 1;
            double vi = v[i];
            double s = ic_val[dslot] * vi;
            for (int t = lo; t < dslot; ++t) {
                int j = ic_col[t];
                s += ic_val[t] * v[j];
                out[j] += ic_val[t] * vi;
            }
            out[i] += s;
        }
    }

    // z = (L L^T)^{-1} r with the current incomplete factor
    void ic_apply(const std::vector<double>& r, std::vector<double>& z) {
        const std::size_t n = free_nodes.size();
        for (std::size_t i = 0; i < n; ++i) {
            int lo = ic_rowptr[i], dslot = ic_rowptr[i + 1] - 1;
            double s = r[i];
            for (int t = lo; t < dslot; ++t) s -= ic_fac[t] * ic_y[ic_col[t]];
            ic_y[i] = s / ic_fac[dslot];
        }
        for (std::size_t ii = n; ii-- > 0;) {
            int lo = ic_rowptr[ii], dslot = ic_rowptr[ii + 1] - 1;
            double zi = ic_y[ii] / ic_fac[dslot];
            z[ii] = zi;
            for (int t = lo; t < dslot; ++t) ic_y[ic_col[t]] -= ic_fac[t] * zi;
        }
    }

    // Gradient of the stage energy (sqrt(1-s^2) continued linearly in s^2
    // below sqrt-q = sqrt(floor2)); also caches the per-triangle state used
    // by ic_update() and fills the diagonal curvature bound used as the CG
    // preconditioner.
    void gradient(const std::vector<double>& u, std::vector<double>& g,
                  double floor2, std::vector<double>* diag = nullptr) {
        const double h = d.h;
        for (std::size_t t = 0; t < d.tris.size(); ++t) {
            const Tri& T = d.tris[t];
            double px = (u[T.ax1] - u[T.ax0]) / h;
            double py = (u[T.ay1] - u[T.ay0]) / h;
            double s2 = px * px + py * py;
            bool pen = s2 > 1.0 - floor2;
            double q = pen ? floor2 : 1.0 - s2;
            double w = T.area / (h * std::sqrt(q));
            tgx[t] = -w * px;
            tgy[t] = -w * py;
            tpx[t] = px;
            tpy[t] = py;
            tq[t] = q;
            tpen[t] = pen;
            // largest curvature eigenvalue of the per-triangle Hessian block:
            // (1-s^2)^{-3/2} smooth, floor2^{-1/2} in the linear continuation
            tcurv[t] = T.area / (h * h * (pen ? std::sqrt(q) : q * std::sqrt(q)));
        }
        g.resize(free_nodes.size());
        if (diag) diag->resize(free_nodes.size());
        for (std::size_t k = 0; k < free_nodes.size(); ++k) {
            double s = 0.0, dsum = 0.0;
            for (const Contrib& c : adj[k]) {
                s += c.cx * tgx[c.tri] + c.cy * tgy[c.tri];
                dsum += (c.cx * c.cx + c.cy * c.cy) * tcurv[c.tri];
            }
            g[k] = s;
            if (diag) (*diag)[k] = dsum;
        }
    }

    double local_energy(int k, const std::vector<double>& u, double floor2) {
        const double h = d.h;
        const double sf = std::sqrt(floor2);
        double e = 0.0;
        for (const Contrib& c : adj[k]) {
            const Tri& T = d.tris[c.tri];
            double px = (u[T.ax1] - u[T.ax0]) / h;
            double py = (u[T.ay1] - u[T.ay0]) / h;
            double s2 = px * px + py * py;
            e += s2 <= 1.0 - floor2
                     ? T.area * std::sqrt(1.0 - s2)
                     : T.area * (sf - (s2 - (1.0 - floor2)) / (2.0 * sf));
        }
        return e;
    }

    // One nonlinear Gauss-Seidel sweep: each free node takes a curvature-
    // bounded ascent step on the stage energy (guaranteed uphill by the
    // majorization, with a local halving safeguard). Cleans up the stiff
    // light-cone boundary layers that a global first-order step cannot.
    void gs_sweep(std::vector<double>& u, double floor2) {
        const double h = d.h;
        for (std::size_t k = 0; k < free_nodes.size(); ++k) {
            int node = free_nodes[k];
            double g = 0.0, dsum = 0.0;
            for (const Contrib& c : adj[k]) {
                const Tri& T = d.tris[c.tri];
                double px = (u[T.ax1] - u[T.ax0]) / h;
                double py = (u[T.ay1] - u[T.ay0]) / h;
                double s2 = px * px + py * py;
                double q = std::max(1.0 - s2, floor2);
                double w = T.area / (h * std::sqrt(q));
                g += -w * (c.cx * px + c.cy * py);
                double curv =
                    T.area / (h * h * (s2 <= 1.0 - floor2 ? q * std::sqrt(q)
                                                          : std::sqrt(q)));
                dsum += (c.cx * c.cx + c.cy * c.cy) * curv;
            }
            double t = g / dsum;
            if (t == 0.0) continue;
            double e0 = local_energy((int)k, u, floor2);
            for (int half = 0; half < 24; ++half) {
                u[node] += t;
                if (local_energy((int)k, u, floor2) >= e0) break;
                u[node] -= t;
                t *= 0.5;
            }
        }
    }

    // Gauss-Seidel sweeps pushing triangle gradients into the ball |p| <= c.
    // Returns the worst |p| over controllable triangles on exit.
    double project(std::vector<double>& u, double c, int max_passes) {
        const double h = d.h;
        const double c2 = c * c;
        double worst = 0.0, best = std::numeric_limits<double>::infinity();
        int stagnant = 0;
        for (int pass = 0; pass < max_passes; ++pass) {
            worst = 0.0;
            for (const ProjTri& pt : ptris) {
                const Tri& T = d.tris[pt.tri];
                double px = (u[T.ax1] - u[T.ax0]) / h;
                double py = (u[T.ay1] - u[T.ay0]) / h;
                double s2 = px * px + py * py;
                if (s2 <= c2) continue;
                double s = std::sqrt(s2);
                worst = std::max(worst, s);
                if (d.dim == 1) {
                    double excess = (s - c) * h * (px > 0 ? 1.0 : -1.0);
                    if (pt.nfree == 2) {
                        // ax0 free and ax1 free
                        for (int k = 0; k < 2; ++k)
                            u[pt.nodes[k]] += 0.5 * excess * pt.mx[k] * -1.0;
                    } else {
                        u[pt.nodes[0]] += excess * pt.mx[0] * -1.0;
                    }
                    continue;
                }
                if (pt.nfree == 1) {
                    // move one value minimally so that |p + m t / h| <= c
                    double mx = pt.mx[0], my = pt.my[0];
                    double a = (mx * mx + my * my) / (h * h);
                    double b = (px * mx + py * my) / h;
                    double disc = b * b - a * (s2 - c2);
                    double t;
                    if (disc >= 0.0) {
                        double sq = std::sqrt(disc);
                        t = b > 0 ? (-b + sq) / a : (-b - sq) / a;
                    } else {
                        t = -b / a;
                    }
                    u[pt.nodes[0]] += t;
                } else {
                    double scale = c / s;
                    double dpx = px * (scale - 1.0), dpy = py * (scale - 1.0);
                    double a00 = 0, a01 = 0, a11 = 0;
                    for (int k = 0; k < pt.nfree; ++k) {
                        a00 += pt.mx[k] * pt.mx[k];
                        a01 += pt.mx[k] * pt.my[k];
                        a11 += pt.my[k] * pt.my[k];
                    }
                    double det = a00 * a11 - a01 * a01;
                    double zx = (a11 * dpx - a01 * dpy) / det;
                    double zy = (-a01 * dpx + a00 * dpy) / det;
                    for (int k = 0; k < pt.nfree; ++k)
                        u[pt.nodes[k]] += h * (pt.mx[k] * zx + pt.my[k] * zy);
                }
            }
            if (worst <= c * (1.0 + 1e-13)) break;
            if (worst < best * (1.0 - 1e-12)) {
                best = worst;
                stagnant = 0;
            } else if (++stagnant >= 12) {
                break;  // genuinely stuck (data-forced infeasibility)
            }
        }
        return worst;
    }
};

struct StageOutcome {
    int iterations = 0;
    double pg_norm = 0.0;
    double energy = 0.0;
    std::string reason = "max-iters";
};

// Stage energy: the light-cone-singular sqrt(1-s^2) continued linearly in
// s^2 below sqrt(1-s^2) = sqrt(floor2). The continuation keeps the stage
// functional globally concave, C^1 and finite on all of R^n, so data that is
// infeasible at grid scale (staircase light segments) costs a bounded,
// localized area deficit instead of making the feasible set empty.
double stage_energy(const GridDomain& d, const std::vector<double>& u,
                    double floor2) {
    const double sf = std::sqrt(floor2);
    double sum = 0.0, comp = 0.0;
    for (const Tri& T : d.tris) {
        double px = (u[T.ax1] - u[T.ax0]) / d.h;
        double py = (u[T.ay1] - u[T.ay0]) / d.h;
        double s2 = px * px + py * py;
        double term =
            s2 <= 1.0 - floor2
                ? T.area * std::sqrt(1.0 - s2)
                : T.area * (sf - (s2 - (1.0 - floor2)) / (2.0 * sf));
        double y = term - comp;
        double tt = sum + y;
        comp = (tt - sum) - y;
        sum = tt;
    }
    return sum;
}

// Barzilai-Borwein ascent with a nonmonotone (10-step) Armijo line search on
// the concave stage energy. `alpha` persists across stages as the warm BB
// step. pg_norm reports the RMS free-node gradient.
// Truncated-Newton ascent on the concave stage energy: inexact Newton
// directions from diagonally preconditioned CG on (-Hessian) d = gradient,
// Armijo backtracking on the exact stage energy, nonlinear Gauss-Seidel
// smoothing sweeps whenever a Newton step makes no progress (the energy is
// only piecewise C^2 across the continuation threshold).
StageOutcome run_stage(Work& w, std::vector<double>& u, double c,
                       int max_iters, double stat_tol, double stall_tol) {
    const std::size_t n = w.free_nodes.size();
    StageOutcome out;
    const double floor2 = std::max(1.0 - c * c, 1e-10);
    if (n == 0) {
        out.energy = clamped_energy(w.d, u);
        out.reason = "stationarity";
        return out;
    }
    std::vector<double> g, diag, dir(n), r(n), z(n), p(n), hp(n);
    std::vector<double> trial(u.size());
    double E = stage_energy(w.d, u, floor2);
    std::deque<double> ehist{E};
    out.reason = "max-iters";

    int iters_used = 0;
    while (iters_used < max_iters) {
        w.gradient(u, g, floor2, &diag);
        double g2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) g2 += g[k] * g[k];
        out.pg_norm = std::sqrt(g2 / (double)n);
        if (out.pg_norm <= stat_tol) {
            out.reason = "stationarity";
            break;
        }

        // preconditioned CG on (-H) dir = g, truncated by a forcing term
        w.ic_update();
        std::fill(dir.begin(), dir.end(), 0.0);
        r = g;
        double rz = 0.0;
        if (w.ic_ok) {
            w.ic_apply(r, z);
        } else {
            for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag[k];
        }
        for (std::size_t k = 0; k < n; ++k) rz += r[k] * z[k];
        p = z;
        double r2 = g2;
        const double cg_tol2 = g2 * std::min(0.01, out.pg_norm) ;
        int cg_iters = 0;
        const int cg_cap = (int)std::min<std::size_t>(400, n);
        while (cg_iters < cg_cap && r2 > cg_tol2) {
            w.mv(p, hp);
            ++cg_iters;
            double php = 0.0;
            for (std::size_t k = 0; k < n; ++k) php += p[k] * hp[k];
            if (php <= 0.0) break;
            double step = rz / php;
            r2 = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                dir[k] += step * p[k];
                r[k] -= step * hp[k];
                r2 += r[k] * r[k];
            }
            if (w.ic_ok) {
                w.ic_apply(r, z);
            } else {
                for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag[k];
            }
            double rznew = 0.0;
            for (std::size_t k = 0; k < n; ++k) rznew += r[k] * z[k];
            double beta = rznew / rz;
            rz = rznew;
            for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
        }
        iters_used += std::max(1, cg_iters);
        out.iterations = iters_used;

        double gd = 0.0;
        for (std::size_t k = 0; k < n; ++k) gd += g[k] * dir[k];
        if (gd <= 0.0) {
            for (std::size_t k = 0; k < n; ++k) dir[k] = g[k] / diag[k];
            gd = 0.0;
            for (std::size_t k = 0; k < n; ++k) gd += g[k] * dir[k];
        }
        double lambda = 1.0;
        double Et;
        trial = u;
        while (true) {
            for (std::size_t k = 0; k < n; ++k)
                trial[w.free_nodes[k]] = u[w.free_nodes[k]] + lambda * dir[k];
            Et = stage_energy(w.d, trial, floor2);
            if (Et >= E + 1e-4 * lambda * gd || lambda < 1e-12) break;
            lambda *= 0.5;
        }
        if (Et > E) {
            u.swap(trial);
            E = Et;
        } else {
            // no Newton progress: smooth across the C^2 kink instead
            for (int s = 0; s < 5 && iters_used < max_iters; ++s) {
                w.gs_sweep(u, floor2);
                ++iters_used;
            }
            out.iterations = iters_used;
            double Es = stage_energy(w.d, u, floor2);
            if (Es <= E + stall_tol * std::max(1.0, std::abs(E))) {
                E = std::max(E, Es);
                out.reason = "energy-stall";
                break;
            }
            E = Es;
        }
        ehist.push_back(E);
        if (ehist.size() > 8) ehist.pop_front();
        if (ehist.size() == 8 &&
            std::abs(E - ehist.front()) <= stall_tol * std::max(1.0, std::abs(E))) {
            out.reason = "energy-stall";
            break;
        }
    }
    out.energy = E;
    return out;
}

}  // namespace

std::pair<ScalarField, SolveReport> solve(const DiscreteProblem& problem,
                                          const SolverConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    const DomainPtr dom = problem.domain;
    const GridDomain& d = *dom;
    auto fixed = problem.fixed_values();
    if (fixed.empty()) throw DomainError("solve: no boundary data");

    for (std::size_t i = 1; i < config.delta_schedule.size(); ++i)
        if (!(config.delta_schedule[i] < config.delta_schedule[i - 1]))
            throw DomainError("solve: delta_schedule must be strictly decreasing");
    for (double del : config.delta_schedule)
        if (del <= 0.0 || del >= 1.0)
            throw DomainError("solve: delta_schedule entries must lie in (0,1)");

    auto ext = mcshane_extension(dom, fixed);
    if (!ext.grid_admissible) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "empty K: boundary data is not admissible at grid scale "
                      "(Lipschitz margin %.6g > 2h = %.6g)",
                      ext.margin, 2.0 * d.h);
        throw EmptyKError(buf);
    }

    ScalarField u(dom);
    switch (config.init) {
        case InitMode::Extension:
            u = ext.psi;
            break;
        case InitMode::ZeroInterior:
            for (int n : d.active_ids) u[n] = 0.0;
            break;
        case InitMode::Custom:
            if (!config.init_field.domain ||
                config.init_field.domain->num_nodes() != d.num_nodes())
                throw DomainError("solve: custom init field has wrong domain");
            u = config.init_field;
            break;
    }

    SolveReport rep;
    Work w(d, fixed);
    for (auto& [n, v] : fixed) u[n] = v;
    // coarse stages only need to hand a good warm start to the next one
    for (double del : config.delta_schedule) {
        double c = 1.0 - del;
        auto so = run_stage(w, u.values, c, config.max_iters,
                            std::max(config.stationarity_tol, del * 1e-4),
                            config.energy_stall_tol);
        rep.stages.push_back(StageStats{del, so.iterations, so.pg_norm, so.reason});
        if (so.reason == "max-iters") {
            rep.converged = false;
            rep.warnings.push_back("stage delta=" + std::to_string(del) +
                                   " hit max_iters");
        }
    }

    double worst = w.project(u.values, 1.0, 4000);
    rep.final_pg_norm = rep.stages.back().pg_norm;
    rep.final_energy = clamped_energy(d, u.values);
    rep.max_grad_norm_free = 0.0;
    for (const auto& pt : w.ptris) {
        const Tri& T = d.tris[pt.tri];
        double px = (u[T.ax1] - u[T.ax0]) / d.h;
        double py = (u[T.ay1] - u[T.ay0]) / d.h;
        rep.max_grad_norm_free =
            std::max(rep.max_grad_norm_free, std::sqrt(px * px + py * py));
    }
    if (worst > 1.0 + 1e-12)
        rep.warnings.push_back(
            "feasibility projection stalled above 1: data forces slope > 1 at "
            "grid scale");
    rep.max_grad_norm_all = check_weakly_spacelike(u).max_grad_norm;
    rep.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(u), std::move(rep)};
}

LinearSolution solve_1d(double a, double b, double A, double B) {
    if (!(b > a)) throw DomainError("solve_1d: need b > a");
    if (std::abs(B - A) > b - a)
        throw EmptyKError("empty K: |B-A| > b-a in the 1-d problem");
    LinearSolution s;
    s.slope = (B - A) / (b - a);
    s.intercept = A - s.slope * a;
    s.energy = (b - a) * std::sqrt(std::max(0.0, 1.0 - s.slope * s.slope));
    return s;
}

ComparisonResult comparison_check(const ScalarField& u, const ScalarField& v) {
    if (u.domain.get() != v.domain.get() &&
        (u.domain->num_nodes() != v.domain->num_nodes() ||
         u.domain->h != v.domain->h))
        throw DomainError("comparison_check: mismatched domains");
    const GridDomain& d = *u.domain;
    ComparisonResult r;
    r.boundary_gap = -std::numeric_limits<double>::infinity();
    for (int n : d.boundary_ids)
        r.boundary_gap = std::max(r.boundary_gap, u[n] - v[n]);
    r.premise = r.boundary_gap <= 1e-12;
    r.max_violation = -std::numeric_limits<double>::infinity();
    for (int n : d.active_ids)
        r.max_violation = std::max(r.max_violation, u[n] - v[n]);
    r.ok = !r.premise || r.max_violation <= 1e-7;
    return r;
}

double ResidualField::max_interior(const std::function<bool(Point)>& pred) const {
    const GridDomain& d = *values.domain;
    double m = 0.0;
    for (int n : d.active_ids) {
        if (!interior[n] || degenerate[n]) continue;
        if (pred && !pred(d.coord(n))) continue;
        m = std::max(m, std::abs(values[n]));
    }
    return m;
}

ResidualField residual_field(const ScalarField& u) {
    const GridDomain& d = *u.domain;
    const double h = d.h;
    ResidualField out;
    out.values = ScalarField(u.domain, 0.0);
    out.degenerate.assign(d.num_nodes(), 0);
    out.interior.assign(d.num_nodes(), 0);
    for (int n : d.active_ids) out.interior[n] = d.state[n] == 1;

    // recovered node gradients and the degeneracy mask
    std::vector<double> gx(d.num_nodes(), 0.0), gy(d.num_nodes(), 0.0),
        wsum(d.num_nodes(), 0.0);
    const double deg_cut = 1.0 - 1e-6;
    for (const Tri& T : d.tris) {
        double px = (u[T.ax1] - u[T.ax0]) / h;
        double py = (u[T.ay1] - u[T.ay0]) / h;
        int verts[3] = {T.v0, T.v1, T.v2};
        int nv = d.dim == 1 ? 2 : 3;
        bool deg = px * px + py * py > deg_cut * deg_cut;
        for (int k = 0; k < nv; ++k) {
            gx[verts[k]] += T.area * px;
            gy[verts[k]] += T.area * py;
            wsum[verts[k]] += T.area;
            if (deg) out.degenerate[verts[k]] = 1;
        }
    }
    std::vector<double> fx(d.num_nodes(), 0.0), fy(d.num_nodes(), 0.0);
    for (int n : d.active_ids) {
        if (wsum[n] <= 0.0) {
            out.degenerate[n] = 1;
            continue;
        }
        double px = gx[n] / wsum[n], py = gy[n] / wsum[n];
        double s2 = px * px + py * py;
        if (s2 > deg_cut * deg_cut) {
            out.degenerate[n] = 1;
            continue;
        }
        double w = 1.0 / std::sqrt(1.0 - s2);
        fx[n] = px * w;
        fy[n] = py * w;
    }
    // one ring of flag propagation: a flagged flux value poisons its triangles
    std::vector<std::uint8_t> deg2 = out.degenerate;
    for (const Tri& T : d.tris) {
        int verts[3] = {T.v0, T.v1, T.v2};
        int nv = d.dim == 1 ? 2 : 3;
        bool any = false;
        for (int k = 0; k < nv; ++k) any = any || out.degenerate[verts[k]];
        if (any)
            for (int k = 0; k < nv; ++k) deg2[verts[k]] = 1;
    }
    out.degenerate.swap(deg2);

    // weak divergence of the PL interpolant of the recovered flux
    std::vector<double> acc(d.num_nodes(), 0.0), lump(d.num_nodes(), 0.0);
    for (const Tri& T : d.tris) {
        int verts[3] = {T.v0, T.v1, T.v2};
        int nv = d.dim == 1 ? 2 : 3;
        double fbx = 0.0, fby = 0.0;
        for (int k = 0; k < nv; ++k) {
            fbx += fx[verts[k]];
            fby += fy[verts[k]];
        }
        fbx /= nv;
        fby /= nv;
        for (int k = 0; k < nv; ++k) {
            double mx, my;
            column(T, verts[k], mx, my);
            acc[verts[k]] += T.area * (fbx * mx + fby * my) / h;
            lump[verts[k]] += T.area / nv;
        }
    }
    for (int n : d.active_ids)
        if (lump[n] > 0.0) out.values[n] = -acc[n] / lump[n];
    return out;
}

}  // namespace maxarea
