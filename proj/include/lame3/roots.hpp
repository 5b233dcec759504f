#ifndef LAME3_ROOTS_HPP
#define LAME3_ROOTS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "elliptic.hpp"
#include "errors.hpp"
#include "recurrence.hpp"
#include "sympoly.hpp"

namespace lame3
{

struct RootReport {
    std::vector<cplx> roots;
    double max_residual = 0.0; // max |p(r)| / (sum |c_i| |r|^i)
    double min_pairwise_gap = std::numeric_limits<double>::infinity();
    bool all_real = false;
    bool distinct = false;
    bool converged = true;
    double real_tol = 0.0, gap_tol = 0.0;
};

namespace detail
{

inline double relative_residual(const NumPoly &p, cplx r)
{
    double scale = 0.0, ar = std::abs(r), pw = 1.0;
    for (const auto &c : p.coeffs) {
        scale += std::abs(c) * pw;
        pw *= ar;
    }
    return scale > 0 ? std::abs(p.eval(r)) / scale : 0.0;
}

inline std::vector<cplx> companion_roots(const NumPoly &p)
{
    const int d = p.degree();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) {
        M(i, i - 1) = 1.0;
    }
    for (int i = 0; i < d; ++i) {
        M(i, d - 1) = -p.coeffs[i] / p.coeffs[d];
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
    std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + d);
    return out;
}

// Newton polish on the original polynomial.
inline cplx polish(const NumPoly &p, const NumPoly &dp, cplx r)
{
    for (int it = 0; it < 3; ++it) {
        const cplx d = dp.eval(r);
        if (std::abs(d) == 0.0) {
            break;
        }
        const cplx step = p.eval(r) / d;
        const cplx next = r - step;
        if (relative_residual(p, next) > relative_residual(p, r)) {
            break;
        }
        r = next;
    }
    return r;
}

inline void fill_gaps(RootReport &rep)
{
    rep.min_pairwise_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.roots.size(); ++i) {
        for (std::size_t j = i + 1; j < rep.roots.size(); ++j) {
            rep.min_pairwise_gap = std::min(rep.min_pairwise_gap, std::abs(rep.roots[i] - rep.roots[j]));
        }
    }
}

} // namespace detail

// Aberth-Ehrlich iteration from a perturbed circle; companion-matrix
// eigenvalues as fallback.
inline RootReport find_roots(const NumPoly &p_in, double tol = 1e-10, int max_iter = 500)
{
    NumPoly p = p_in;
    p.trim(0.0);
    const int d = p.degree();
    if (d < 1) {
        throw DomainError("find_roots requires degree >= 1");
    }
    const NumPoly dp = p.derivative();
    RootReport rep;

    // Cauchy-type radius for the initial circle.
    double radius = 0.0;
    for (int i = 0; i < d; ++i) {
        radius = std::max(radius, std::pow(std::abs(p.coeffs[i] / p.coeffs[d]), 1.0 / (d - i)));
    }
    radius = std::max(radius, 1e-3);
    std::vector<cplx> z(d);
    for (int i = 0; i < d; ++i) {
        const double ang = 2 * pi * i / d + 0.4;
        z[i] = radius * std::polar(1.0, ang) * (1.0 + 0.01 * i / d);
    }
    bool done = false;
    for (int it = 0; it < max_iter && !done; ++it) {
        done = true;
        for (int i = 0; i < d; ++i) {
            const cplx pv = p.eval(z[i]);
            if (detail::relative_residual(p, z[i]) < 1e-16) {
                continue;
            }
            const cplx ratio = pv / dp.eval(z[i]);
            cplx s = 0.0;
            for (int j = 0; j < d; ++j) {
                if (j != i) {
                    s += 1.0 / (z[i] - z[j]);
                }
            }
            const cplx w = ratio / (1.0 - ratio * s);
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
                continue;
            }
            z[i] -= w;
            if (std::abs(w) > 1e-15 * (1.0 + std::abs(z[i]))) {
                done = false;
            }
        }
    }
    double worst = 0.0;
    for (auto &r : z) {
        r = detail::polish(p, dp, r);
        worst = std::max(worst, detail::relative_residual(p, r));
    }
    if (!(worst <= tol)) {
        auto alt = detail::companion_roots(p);
        double worst_alt = 0.0;
        for (auto &r : alt) {
            r = detail::polish(p, dp, r);
            worst_alt = std::max(worst_alt, detail::relative_residual(p, r));
        }
        if (worst_alt < worst) {
            z = alt;
            worst = worst_alt;
        }
    }
    rep.roots = z;
    rep.max_residual = worst;
    rep.converged = worst <= tol;
    std::sort(rep.roots.begin(), rep.roots.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    detail::fill_gaps(rep);
    if (!rep.converged) {
        throw ConvergenceFailure("root finding did not reach the residual bound");
    }
    return rep;
}

// Realness and distinctness relative to scale = 1 + max |root|.
inline RootReport certify_real_distinct(const NumPoly &p, double real_tol = 1e-8, double gap_tol = 1e-6)
{
    RootReport rep = find_roots(p);
    double scale = 1.0;
    for (const auto &r : rep.roots) {
        scale = std::max(scale, 1.0 + std::abs(r));
    }
    rep.real_tol = real_tol;
    rep.gap_tol = gap_tol;
    rep.all_real = std::all_of(rep.roots.begin(), rep.roots.end(),
                               [&](cplx r) { return std::abs(r.imag()) <= real_tol * scale; });
    rep.distinct = rep.roots.size() < 2 || rep.min_pairwise_gap >= gap_tol * scale;
    return rep;
}

// Zeros of sum_j C_j(B) wp^j in the centred cell: +-z for every root in x.
inline std::vector<cplx> elliptic_solution_zeros(const EllipticSolution &sol, cplx B,
                                                 const LatticeData &lat)
{
    NumPoly px;
    for (const auto &c : sol.coeffs) {
        px.coeffs.push_back(c.eval(B, lat.g2, lat.g3));
    }
    if (std::abs(px.coeffs.back()) == 0.0) {
        throw DomainError("leading coefficient of the elliptic solution vanishes");
    }
    std::vector<cplx> out;
    if (px.degree() < 1) {
        return out;
    }
    const auto rep = find_roots(px);
    for (const auto &x : rep.roots) {
        const cplx z = invert_wp(x, lat);
        out.push_back(z);
        out.push_back(reduce_to_centered_cell(-z, lat));
    }
    return out;
}

} // namespace lame3

#endif
