#ifndef LAME3_MONODROMY_HPP
#define LAME3_MONODROMY_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "elliptic.hpp"
#include "errors.hpp"
#include "recurrence.hpp"
#include "roots.hpp"

namespace lame3
{

using CMat = Eigen::MatrixXcd;

enum class SystemKind { Third, Dual, Reduced2, Lame };

struct ODESystem {
    int order = 3;
    SystemKind kind = SystemKind::Third;
    std::function<CMat(cplx)> matrix; // companion matrix A(z), Y' = A Y
    std::vector<cplx> obstacles;      // points (mod lattice) the path must avoid, lattice point included
    cplx B;
    LatticeData lat;
};

// Third / Dual: y''' = (alpha wp + B) y' - beta wp' y.
// Reduced2: f'' + 3 (y0'/y0) f' + (3 y0''/y0 + p1) f = 0, p1 = -(alpha wp + B).
// Lame: y'' = (m(m+1) wp + B) y with m = lame_m.
inline ODESystem build_system(const ProblemParams &pp, cplx B, const LatticeData &lat, SystemKind kind,
                              int lame_m = 0)
{
    ODESystem sys;
    sys.kind = kind;
    sys.B = B;
    sys.lat = lat;
    sys.obstacles = {0.0};
    switch (kind) {
    case SystemKind::Third:
    case SystemKind::Dual: {
        const double a = double(pp.alpha);
        const double b = (kind == SystemKind::Third ? pp.beta : pp.dual_beta).get_d();
        sys.order = 3;
        sys.matrix = [a, b, B, lat](cplx z) {
            const auto w = wp_eval(z, lat);
            CMat A = CMat::Zero(3, 3);
            A(0, 1) = 1.0;
            A(1, 2) = 1.0;
            A(2, 0) = -b * w.wp_prime;
            A(2, 1) = a * w.wp + B;
            return A;
        };
        break;
    }
    case SystemKind::Reduced2: {
        if (!(pp.l % 2 == 1 || pp.n % 2 == 0)) {
            throw RegimeError("reduced second-order equation needs an even elliptic solution");
        }
        const auto sol = even_elliptic_solution(pp);
        std::vector<cplx> c;
        for (const auto &cj : sol.coeffs) {
            c.push_back(cj.eval(B, lat.g2, lat.g3));
        }
        const double a = double(pp.alpha);
        sys.order = 2;
        sys.matrix = [c, a, B, lat](cplx z) {
            const auto w = wp_eval(z, lat);
            cplx y = 0, yx = 0, yxx = 0;
            for (int j = int(c.size()) - 1; j >= 0; --j) {
                yxx = yxx * w.wp + 2.0 * yx;
                yx = yx * w.wp + y;
                y = y * w.wp + c[j];
            }
            const cplx y1 = w.wp_prime * yx;
            const cplx y2 = w.wp_prime * w.wp_prime * yxx + w.wp_second * yx;
            if (std::abs(y) < 1e-12 * (std::abs(y1) + std::abs(y2) + 1.0)) {
                throw PoleProximity("reduced equation evaluated at a zero of the elliptic solution");
            }
            const cplx p1 = -(a * w.wp + B);
            CMat A = CMat::Zero(2, 2);
            A(0, 1) = 1.0;
            A(1, 0) = -(3.0 * y2 / y + p1);
            A(1, 1) = -3.0 * y1 / y;
            return A;
        };
        if (sol.k > 0) {
            for (const auto &p : elliptic_solution_zeros(sol, B, lat)) {
                sys.obstacles.push_back(p);
            }
        }
        break;
    }
    case SystemKind::Lame: {
        if (lame_m < 1) {
            throw DomainError("Lame index must be at least 1");
        }
        const double mm = double(lame_m) * (lame_m + 1);
        sys.order = 2;
        sys.matrix = [mm, B, lat](cplx z) {
            const auto w = wp_eval(z, lat);
            CMat A = CMat::Zero(2, 2);
            A(0, 1) = 1.0;
            A(1, 0) = mm * w.wp + B;
            return A;
        };
        break;
    }
    }
    return sys;
}

inline ODESystem build_lame_system(int m, cplx B, const LatticeData &lat)
{
    return build_system(ProblemParams{}, B, lat, SystemKind::Lame, m);
}

struct PathSpec {
    std::vector<cplx> vertices;
    double clearance = 0.0;
};

namespace detail
{

inline double segment_distance(cplx a, cplx b, cplx p)
{
    const cplx d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) {
        return std::abs(p - a);
    }
    const double t = std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

// Distance from a polyline to every lattice translate of the obstacles.
inline double path_clearance(const std::vector<cplx> &v, const std::vector<cplx> &obstacles,
                             const LatticeData &lat)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s + 1 < v.size(); ++s) {
        auto [u0, w0] = lattice_coords(v[s], lat.tau);
        auto [u1, w1] = lattice_coords(v[s + 1], lat.tau);
        const int mlo = int(std::floor(std::min(u0, u1))) - 2, mhi = int(std::ceil(std::max(u0, u1))) + 2;
        const int nlo = int(std::floor(std::min(w0, w1))) - 2, nhi = int(std::ceil(std::max(w0, w1))) + 2;
        for (const auto &p : obstacles) {
            for (int m = mlo; m <= mhi; ++m) {
                for (int n = nlo; n <= nhi; ++n) {
                    best = std::min(best, segment_distance(v[s], v[s + 1], p + double(m) + double(n) * lat.tau));
                }
            }
        }
    }
    return best;
}

// Dormand-Prince 5(4) tableau.
struct DP {
    static constexpr double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1};
    static constexpr double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static constexpr double b5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
    static constexpr double b4[7] = {5179.0 / 57600,    0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200,
                                     187.0 / 2100, 1.0 / 40};
};

// Integrates Y' = A(z) Y along the straight segment a -> b starting from Y.
inline CMat integrate_segment(const ODESystem &sys, cplx a, cplx b, CMat Y, double tol,
                              std::size_t *steps_out = nullptr)
{
    const cplx d = b - a;
    if (std::abs(d) == 0.0) {
        return Y;
    }
    auto f = [&](double t, const CMat &y) -> CMat { return d * (sys.matrix(a + t * d) * y); };
    double t = 0.0;
    double h = 0.02;
    const double hmin = 1e-13;
    std::size_t steps = 0;
    CMat k[7];
    k[0] = f(0.0, Y);
    while (t < 1.0) {
        if (t + h > 1.0) {
            h = 1.0 - t;
        }
        if (++steps > 2000000) {
            throw ToleranceNotMet("step budget exhausted");
        }
        CMat y5, y4;
        bool ok = true;
        try {
            for (int s = 1; s < 7; ++s) {
                CMat acc = Y;
                for (int r = 0; r < s; ++r) {
                    if (DP::a[s][r] != 0.0) {
                        acc += (h * DP::a[s][r]) * k[r];
                    }
                }
                k[s] = f(t + DP::c[s] * h, acc);
            }
        } catch (const PoleProximity &) {
            ok = false;
        }
        double err = std::numeric_limits<double>::infinity();
        if (ok) {
            y5 = Y;
            y4 = Y;
            for (int s = 0; s < 7; ++s) {
                y5 += (h * DP::b5[s]) * k[s];
                y4 += (h * DP::b4[s]) * k[s];
            }
            err = 0.0;
            for (Eigen::Index i = 0; i < Y.size(); ++i) {
                const double sc = tol + tol * std::max(std::abs(Y(i)), std::abs(y5(i)));
                err = std::max(err, std::abs(y5(i) - y4(i)) / sc);
            }
            if (!std::isfinite(err)) {
                err = std::numeric_limits<double>::infinity();
            }
        }
        if (err <= 1.0) {
            t += h;
            Y = y5;
            k[0] = k[6];
            const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h *= fac;
        } else {
            const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.25;
            h *= fac;
            if (h < hmin) {
                throw StepUnderflow("step size underflow near a singular point");
            }
        }
    }
    if (steps_out) {
        *steps_out += steps;
    }
    return Y;
}

} // namespace detail

// Fundamental matrix propagated from the identity along the polyline.
inline CMat transfer_matrix(const ODESystem &sys, const PathSpec &path, double tol = 1e-10)
{
    if (!(tol >= 1e-12 && tol <= 1e-4)) {
        throw DomainError("integration tolerance must lie in [1e-12, 1e-4]");
    }
    CMat Y = CMat::Identity(sys.order, sys.order);
    for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i) {
        Y = detail::integrate_segment(sys, path.vertices[i], path.vertices[i + 1], Y, tol);
    }
    return Y;
}

enum class MonoClass { NonApparent, DiagonalizablePair, Unitary, KleinFour, UnipotentNontrivial, Indeterminate };

inline const char *class_name(MonoClass c)
{
    switch (c) {
    case MonoClass::NonApparent:
        return "NonApparent";
    case MonoClass::DiagonalizablePair:
        return "DiagonalizablePair";
    case MonoClass::Unitary:
        return "Unitary";
    case MonoClass::KleinFour:
        return "KleinFour";
    case MonoClass::UnipotentNontrivial:
        return "UnipotentNontrivial";
    default:
        return "Indeterminate";
    }
}

struct MonodromyReport {
    int n = 0, l = 0;
    cplx B, tau;
    CMat N1, N2;
    cplx base_point;
    double ode_tol = 0.0;
    double commutator_defect = 0.0;
    std::array<cplx, 2> dets{};
    std::vector<cplx> eigen1, eigen2; // eigenvalues of N1, N2; paired by index when simultaneously diagonalized
    MonoClass classification = MonoClass::Indeterminate;
    cplx lambda1 = 1.0, lambda2 = 1.0; // nontrivial common multipliers (Diagonalizable/Unitary)
    double diag_residual = 0.0;        // off-diagonal residual of the simultaneous diagonalization
    double class_tol = 0.0;
};

namespace detail
{

inline CMat pow2(const CMat &m)
{
    return m * m;
}

struct SimDiag {
    bool ok = false;
    std::vector<cplx> mu1, mu2;
    double residual = std::numeric_limits<double>::infinity();
    double cond = std::numeric_limits<double>::infinity();
};

inline SimDiag simultaneous_diag(const CMat &N1, const CMat &N2, double c)
{
    SimDiag out;
    const CMat M = N1 + c * N2;
    Eigen::ComplexEigenSolver<CMat> es(M, true);
    if (es.info() != Eigen::Success) {
        return out;
    }
    const CMat V = es.eigenvectors();
    Eigen::JacobiSVD<CMat> svd(V);
    const auto sv = svd.singularValues();
    out.cond = sv(0) / std::max(sv(sv.size() - 1), 1e-300);
    // A perturbed Jordan block has eigenvectors about sqrt(eps) apart.
    if (out.cond > 1e4) {
        return out;
    }
    const CMat Vi = V.inverse();
    const CMat D1 = Vi * N1 * V, D2 = Vi * N2 * V;
    double off = 0.0;
    const double scale = std::max(N1.norm(), N2.norm());
    for (Eigen::Index i = 0; i < D1.rows(); ++i) {
        for (Eigen::Index j = 0; j < D1.cols(); ++j) {
            if (i != j) {
                off = std::max({off, std::abs(D1(i, j)), std::abs(D2(i, j))});
            }
        }
        out.mu1.push_back(D1(i, i));
        out.mu2.push_back(D2(i, i));
    }
    out.residual = off / scale;
    out.ok = true;
    return out;
}

inline std::vector<cplx> eigenvalues(const CMat &N)
{
    Eigen::ComplexEigenSolver<CMat> es(N, false);
    std::vector<cplx> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return std::arg(a) < std::arg(b); });
    return v;
}

} // namespace detail

// Decision tree over the commutator, Klein-four pattern, simultaneous
// diagonalization, and unipotency.  tol is the modulus tolerance for Unitary.
inline void classify(MonodromyReport &rep, double tol = 1e-6)
{
    const CMat &N1 = rep.N1, &N2 = rep.N2;
    const int d = int(N1.rows());
    const CMat Id = CMat::Identity(d, d);
    const double scale = std::max(1.0, N1.norm() * N2.norm());
    const double comm_tol = std::max(1e-6, 1e3 * rep.ode_tol);
    rep.class_tol = tol;
    if (rep.commutator_defect > comm_tol * scale) {
        rep.classification = MonoClass::NonApparent;
        return;
    }
    const double k4 = 1e-5;
    const cplx t1 = N1.trace(), t2 = N2.trace(), t12 = (N1 * N2).trace();
    if (d == 3 && (detail::pow2(N1) - Id).norm() <= k4 && (detail::pow2(N2) - Id).norm() <= k4 &&
        std::abs(t1 + 1.0) <= k4 && std::abs(t2 + 1.0) <= k4 && std::abs(t12 + 1.0) <= k4) {
        rep.classification = MonoClass::KleinFour;
        return;
    }
    const auto s1 = detail::simultaneous_diag(N1, N2, 0.6180339887498949);
    const auto s2 = detail::simultaneous_diag(N1, N2, -1.324717957244746);
    const double diag_tol = std::max(1e-6, 1e3 * rep.ode_tol);
    if (s1.ok && s2.ok && s1.residual <= diag_tol && s2.residual <= diag_tol) {
        rep.eigen1 = s1.mu1;
        rep.eigen2 = s1.mu2;
        rep.diag_residual = std::max(s1.residual, s2.residual);
        // The trivial multiplier pair is the one closest to (1, 1).
        std::size_t triv = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < s1.mu1.size(); ++i) {
            const double dist = std::abs(s1.mu1[i] - 1.0) + std::abs(s1.mu2[i] - 1.0);
            if (dist < best) {
                best = dist;
                triv = i;
            }
        }
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < s1.mu1.size(); ++i) {
            if (d == 2 || i != triv) {
                rest.push_back(i);
            }
        }
        // Prefer the representative with |lambda1| >= 1, then Im >= 0.
        std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
            const double la = std::abs(s1.mu1[a]), lb = std::abs(s1.mu1[b]);
            if (std::abs(la - lb) > 1e-9) {
                return la > lb;
            }
            return s1.mu1[a].imag() > s1.mu1[b].imag();
        });
        rep.lambda1 = s1.mu1[rest.front()];
        rep.lambda2 = s1.mu2[rest.front()];
        // Klein four pattern read off the common eigenvalues: entries +-1,
        // traces of N1, N2 and N1 N2 all -1.
        if (d == 3) {
            bool signs = true;
            cplx t1d = 0, t2d = 0, t12d = 0;
            for (std::size_t i = 0; i < 3; ++i) {
                signs = signs && std::min(std::abs(s1.mu1[i] - 1.0), std::abs(s1.mu1[i] + 1.0)) <= k4 &&
                        std::min(std::abs(s1.mu2[i] - 1.0), std::abs(s1.mu2[i] + 1.0)) <= k4;
                t1d += s1.mu1[i];
                t2d += s1.mu2[i];
                t12d += s1.mu1[i] * s1.mu2[i];
            }
            if (signs && std::abs(t1d + 1.0) <= k4 && std::abs(t2d + 1.0) <= k4 && std::abs(t12d + 1.0) <= k4) {
                rep.classification = MonoClass::KleinFour;
                return;
            }
        }
        bool unit = true;
        for (std::size_t i = 0; i < s1.mu1.size(); ++i) {
            unit = unit && std::abs(std::abs(s1.mu1[i]) - 1.0) <= tol && std::abs(std::abs(s1.mu2[i]) - 1.0) <= tol;
        }
        rep.classification = unit ? MonoClass::Unitary : MonoClass::DiagonalizablePair;
        return;
    }
    const double unip = 1e-4;
    bool all_one = true;
    for (const auto &ev : {detail::eigenvalues(N1), detail::eigenvalues(N2)}) {
        for (const auto &e : ev) {
            all_one = all_one && std::abs(e - 1.0) <= unip;
        }
    }
    if (all_one && std::max((N1 - Id).norm(), (N2 - Id).norm()) >= 1e3 * std::max(rep.ode_tol, 1e-12)) {
        rep.classification = MonoClass::UnipotentNontrivial;
        return;
    }
    rep.classification = MonoClass::Indeterminate;
}

namespace detail
{

// Base point 0.37 + 0.41 tau, shifted along a fixed list of offsets until both
// cycles clear every obstacle by 0.05 min(1, Im tau).
inline cplx choose_base_point(const ODESystem &sys, double *clearance_out = nullptr)
{
    const LatticeData &lat = sys.lat;
    const double need = 0.05 * std::min(1.0, lat.tau.imag() / std::max(1.0, std::abs(lat.tau)));
    static const double offs[] = {0.0, 0.07, -0.07, 0.13, -0.13, 0.03, -0.03, 0.19, -0.19, 0.1, -0.1};
    for (double du : offs) {
        for (double dv : offs) {
            const cplx z0 = (0.37 + du) + (0.41 + dv) * lat.tau;
            const double c1 = path_clearance({z0, z0 + 1.0}, sys.obstacles, lat);
            const double c2 = path_clearance({z0, z0 + lat.tau}, sys.obstacles, lat);
            const double c = std::min(c1, c2);
            if (c >= need) {
                if (clearance_out) {
                    *clearance_out = c;
                }
                return z0;
            }
        }
    }
    throw PathBlocked("no base point clears the singular points at the configured margin");
}

inline std::pair<CMat, CMat> cycle_matrices(const ODESystem &sys, double tol, cplx *base = nullptr)
{
    double clear = 0.0;
    const cplx z0 = choose_base_point(sys, &clear);
    if (base) {
        *base = z0;
    }
    const CMat N1 = transfer_matrix(sys, PathSpec{{z0, z0 + 1.0}, clear}, tol);
    const CMat N2 = transfer_matrix(sys, PathSpec{{z0, z0 + sys.lat.tau}, clear}, tol);
    return {N1, N2};
}

} // namespace detail

inline MonodromyReport monodromy_pair(const ProblemParams &pp, cplx B, const LatticeData &lat,
                                      double tol = 1e-10, SystemKind kind = SystemKind::Third)
{
    const ODESystem sys = build_system(pp, B, lat, kind);
    MonodromyReport rep;
    rep.n = pp.n;
    rep.l = pp.l;
    rep.B = B;
    rep.tau = lat.tau;
    rep.ode_tol = tol;
    auto [N1, N2] = detail::cycle_matrices(sys, tol, &rep.base_point);
    rep.N1 = N1;
    rep.N2 = N2;
    rep.commutator_defect = (N1 * N2 - N2 * N1).norm();
    rep.dets = {N1.determinant(), N2.determinant()};
    rep.eigen1 = detail::eigenvalues(N1);
    rep.eigen2 = detail::eigenvalues(N2);
    classify(rep);
    return rep;
}

struct PairMultipliers {
    CMat N1, N2;
    // Common multiplier pairs (mu under omega_1, mu under omega_2).
    std::vector<std::pair<cplx, cplx>> pairs;
    std::vector<cplx> eigen1, eigen2;
    bool diagonalizable = false;
    double diag_residual = 0.0;
    cplx base_point;
};

namespace detail
{

inline PairMultipliers second_order_multipliers(const ODESystem &sys, double tol)
{
    PairMultipliers out;
    auto [N1, N2] = cycle_matrices(sys, tol, &out.base_point);
    out.N1 = N1;
    out.N2 = N2;
    out.eigen1 = eigenvalues(N1);
    out.eigen2 = eigenvalues(N2);
    const auto s = simultaneous_diag(N1, N2, 0.6180339887498949);
    if (!s.ok || s.residual > std::max(1e-6, 1e3 * tol)) {
        return out;
    }
    out.diagonalizable = true;
    out.diag_residual = s.residual;
    for (std::size_t i = 0; i < s.mu1.size(); ++i) {
        out.pairs.emplace_back(s.mu1[i], s.mu2[i]);
    }
    return out;
}

} // namespace detail

// Multipliers of f = W(y, y0) / y0^2 around both cycles.
inline PairMultipliers reduced_eigenvalue_check(const ProblemParams &pp, cplx B, const LatticeData &lat,
                                                double tol = 1e-10)
{
    if (pp.n % 2 != 0) {
        throw RegimeError("reduced eigenvalue check needs n even");
    }
    auto out = detail::second_order_multipliers(build_system(pp, B, lat, SystemKind::Reduced2), tol);
    if (!out.diagonalizable) {
        throw NumericalInstability("reduced monodromy is not simultaneously diagonalizable; B is near a root of Q");
    }
    return out;
}

inline PairMultipliers lame_monodromy(int m, cplx B, const LatticeData &lat, double tol = 1e-10)
{
    return detail::second_order_multipliers(build_lame_system(m, B, lat), tol);
}

// ---------------------------------------------------------------------------
// Search for B with unitary monodromy.

struct GridSpec {
    double re_min = -10, re_max = 10, im_min = -10, im_max = 10;
    int n_re = 16, n_im = 16;
};

struct UnitarityResult {
    bool found = false;
    std::string message;
    cplx B;
    std::optional<MonodromyReport> report;
    int evaluations = 0;
    int candidate_cells = 0;
};

namespace detail
{

// Nontrivial multiplier pair closest to the reference, or the canonical one.
inline std::optional<std::pair<cplx, cplx>> tracked_pair(const MonodromyReport &rep,
                                                         const std::optional<std::pair<cplx, cplx>> &ref)
{
    if (rep.classification != MonoClass::DiagonalizablePair && rep.classification != MonoClass::Unitary) {
        return std::nullopt;
    }
    const std::pair<cplx, cplx> a{rep.lambda1, rep.lambda2};
    const std::pair<cplx, cplx> b{1.0 / rep.lambda1, 1.0 / rep.lambda2};
    if (!ref) {
        return a;
    }
    auto dist = [&](const std::pair<cplx, cplx> &p) {
        return std::abs(std::log(p.first) - std::log(ref->first)) + std::abs(std::log(p.second) - std::log(ref->second));
    };
    return dist(a) <= dist(b) ? a : b;
}

} // namespace detail

inline UnitarityResult unitarity_search(const ProblemParams &pp, const LatticeData &lat, const GridSpec &grid,
                                        double tol = 1e-10)
{
    if (pp.n % 2 != 0) {
        throw RegimeError("unitarity search is defined for n even");
    }
    if (grid.n_re < 2 || grid.n_im < 2) {
        throw DomainError("grid resolution must be at least 2 per axis");
    }
    UnitarityResult res;
    const int nr = grid.n_re, ni = grid.n_im;
    auto Bat = [&](int i, int j) {
        return cplx(grid.re_min + (grid.re_max - grid.re_min) * i / (nr - 1),
                    grid.im_min + (grid.im_max - grid.im_min) * j / (ni - 1));
    };
    std::vector<std::optional<std::pair<cplx, cplx>>> val(nr * ni);
    // Serpentine sweep keeps the tracked branch continuous.
    std::optional<std::pair<cplx, cplx>> prev;
    for (int j = 0; j < ni; ++j) {
        for (int step = 0; step < nr; ++step) {
            const int i = (j % 2 == 0) ? step : nr - 1 - step;
            try {
                const auto rep = monodromy_pair(pp, Bat(i, j), lat, tol);
                ++res.evaluations;
                auto p = detail::tracked_pair(rep, prev);
                val[j * nr + i] = p;
                if (p) {
                    prev = p;
                }
            } catch (const error &) {
                val[j * nr + i] = std::nullopt;
            }
        }
    }
    auto logs = [](const std::pair<cplx, cplx> &p) {
        return std::array<double, 2>{std::log(std::abs(p.first)), std::log(std::abs(p.second))};
    };
    auto eval_F = [&](cplx B, std::optional<std::pair<cplx, cplx>> &ref) -> std::optional<std::array<double, 2>> {
        try {
            const auto rep = monodromy_pair(pp, B, lat, tol);
            ++res.evaluations;
            auto p = detail::tracked_pair(rep, ref);
            if (!p) {
                return std::nullopt;
            }
            ref = p;
            return logs(*p);
        } catch (const error &) {
            return std::nullopt;
        }
    };
    for (int j = 0; j + 1 < ni && !res.found; ++j) {
        for (int i = 0; i + 1 < nr && !res.found; ++i) {
            const int idx[4] = {j * nr + i, j * nr + i + 1, (j + 1) * nr + i, (j + 1) * nr + i + 1};
            bool complete = true;
            double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
            for (int t : idx) {
                if (!val[t]) {
                    complete = false;
                    break;
                }
                const auto lg = logs(*val[t]);
                for (int c = 0; c < 2; ++c) {
                    lo[c] = std::min(lo[c], lg[c]);
                    hi[c] = std::max(hi[c], lg[c]);
                }
            }
            if (!complete || !(lo[0] <= 0 && hi[0] >= 0 && lo[1] <= 0 && hi[1] >= 0)) {
                continue;
            }
            ++res.candidate_cells;
            // Newton on (log|l1|, log|l2|) over (Re B, Im B) with a difference Jacobian.
            cplx B = 0.5 * (Bat(i, j) + Bat(i + 1, j + 1));
            std::optional<std::pair<cplx, cplx>> ref = val[idx[0]];
            const double cell = std::abs(Bat(i + 1, j + 1) - Bat(i, j));
            for (int it = 0; it < 30; ++it) {
                auto F = eval_F(B, ref);
                if (!F) {
                    break;
                }
                if (std::max(std::abs((*F)[0]), std::abs((*F)[1])) <= 1e-9) {
                    const auto rep = monodromy_pair(pp, B, lat, tol);
                    if (rep.classification == MonoClass::Unitary) {
                        res.found = true;
                        res.B = B;
                        res.report = rep;
                    }
                    break;
                }
                const double h = 1e-6 * std::max(1.0, std::abs(B));
                auto r1 = ref, r2 = ref;
                auto Fx = eval_F(B + h, r1), Fy = eval_F(B + cplx(0, h), r2);
                if (!Fx || !Fy) {
                    break;
                }
                const double J[2][2] = {{((*Fx)[0] - (*F)[0]) / h, ((*Fy)[0] - (*F)[0]) / h},
                                        {((*Fx)[1] - (*F)[1]) / h, ((*Fy)[1] - (*F)[1]) / h}};
                const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
                if (std::abs(det) < 1e-300) {
                    break;
                }
                const double dx = (J[1][1] * (*F)[0] - J[0][1] * (*F)[1]) / det;
                const double dy = (-J[1][0] * (*F)[0] + J[0][0] * (*F)[1]) / det;
                cplx stepv(dx, dy);
                if (std::abs(stepv) > cell) {
                    stepv *= cell / std::abs(stepv);
                }
                B -= stepv;
            }
        }
    }
    if (!res.found) {
        res.message = "not found at this resolution";
    } else {
        res.message = "unitary monodromy certified";
    }
    return res;
}

} // namespace lame3

#endif
