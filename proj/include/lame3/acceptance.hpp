#ifndef LAME3_ACCEPTANCE_HPP
#define LAME3_ACCEPTANCE_HPP

// Acceptance checks shared by the acceptance binary and `lame3 verify`.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "elliptic.hpp"
#include "monodromy.hpp"
#include "recurrence.hpp"
#include "roots.hpp"
#include "sympoly.hpp"

namespace lame3::acceptance
{

struct Check {
    std::string id;    // criterion number, with a suffix when a criterion is split
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double limit = 0.0;
};

namespace detail
{

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Runs body, times it, and folds the runtime bound into the verdict.
inline Check timed(std::string id, std::string title, double limit, const std::function<bool(std::ostringstream &)> &body)
{
    Check c{std::move(id), std::move(title)};
    c.limit = limit;
    std::ostringstream os;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        c.passed = body(os);
    } catch (const std::exception &e) {
        c.passed = false;
        os << "exception: " << e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.seconds >= limit) {
        c.passed = false;
        os << " runtime " << fmt(c.seconds) << "s over limit";
    }
    c.detail = os.str();
    return c;
}

// max_d |a_d - b_d| / max_d |b_d|
inline double coeff_diff(const NumPoly &a, const NumPoly &b)
{
    if (a.degree() != b.degree()) {
        return std::numeric_limits<double>::infinity();
    }
    double d = 0.0;
    for (int i = 0; i <= a.degree(); ++i) {
        d = std::max(d, std::abs(a.coeffs[i] - b.coeffs[i]));
    }
    return d / std::max(b.norm(), 1e-300);
}

inline bool has_close(const std::vector<cplx> &v, cplx z, double tol)
{
    return std::any_of(v.begin(), v.end(), [&](cplx w) { return std::abs(w - z) <= tol; });
}

} // namespace detail

inline Check c1_closed_forms()
{
    return detail::timed("1", "P_{1,l} = B and P_{3,l} = B^2 - 3(l+2)^2 g2", 1.0, [](std::ostringstream &os) {
        bool ok = true;
        for (int l : {0, 2, 4}) {
            const auto p = apparent_polynomial(problem_params(1, l));
            ok = ok && p == WeightedPoly::B();
            os << "P1," << l << "=" << p.to_string() << "; ";
        }
        for (int l : {0, 2}) {
            const auto p = apparent_polynomial(problem_params(3, l));
            const auto want = WeightedPoly::B() * WeightedPoly::B() - WeightedPoly::g2().scaled(3 * (l + 2) * (l + 2));
            ok = ok && p == want;
            os << "P3," << l << "=" << p.to_string() << "; ";
        }
        return ok;
    });
}

inline Check c2_second_elliptic()
{
    return detail::timed("2", "P = Ptilde in the odd-odd case", 5.0, [](std::ostringstream &os) {
        bool ok = true;
        for (auto [n, l] : {std::pair{1, 1}, {3, 1}, {5, 1}, {1, 3}, {3, 3}}) {
            const auto pp = problem_params(n, l);
            const bool eq = apparent_polynomial(pp) == second_elliptic_polynomial(pp);
            ok = ok && eq;
            os << "(" << n << "," << l << ")" << (eq ? "=" : "!=") << " ";
        }
        return ok;
    });
}

inline Check c3_keypoint()
{
    return detail::timed("3", "half-basis polynomial matches P numerically", 10.0, [](std::ostringstream &os) {
        double worst = 0.0;
        for (cplx tau : {cplx(0, 1), cplx(0.5, 1), cplx(0.3, 0.8)}) {
            const auto lat = lattice_data(tau);
            for (auto [n, l] : {std::pair{3, 0}, {3, 2}, {5, 0}}) {
                const auto pp = problem_params(n, l);
                const NumPoly P = specialize(apparent_polynomial(pp), lat.g2, lat.g3);
                for (int i = 1; i <= 3; ++i) {
                    worst = std::max(worst, detail::coeff_diff(halfbasis_polynomial(pp, i, lat), P));
                }
            }
        }
        os << "max relative coefficient difference " << detail::fmt(worst) << " (bound 1e-8)";
        return worst <= 1e-8;
    });
}

inline Check c4_lame_bridge()
{
    return detail::timed("4", "Q_{n,1} = l_{n+2} for n = 0, 2, 4", 10.0, [](std::ostringstream &os) {
        bool ok = true;
        for (int n : {0, 2, 4}) {
            const bool eq = spectral_polynomial(problem_params(n, 1)).Q == lame_spectral_polynomial(n + 2);
            ok = ok && eq;
            os << "n=" << n << (eq ? " equal; " : " differ; ");
        }
        return ok;
    });
}

inline Check c5_lame_oracles()
{
    return detail::timed("5", "l_1 exact and l_2 against the factored form", 5.0, [](std::ostringstream &os) {
        const auto B = WeightedPoly::B();
        const auto l1 = B * B * B - WeightedPoly::g2().scaled(frac(1, 4)) * B - WeightedPoly::g3().scaled(frac(1, 4));
        bool ok = lame_spectral_polynomial(1) == l1;
        os << "l1 " << (ok ? "exact" : "differs") << "; ";
        const auto l2 = lame_spectral_polynomial(2);
        double worst = 0.0;
        for (cplx tau : {cplx(0, 1), cplx(0.2, 1.1), cplx(-0.3, 0.85)}) {
            const auto lat = lattice_data(tau);
            NumPoly want{{-3.0 * lat.g2, 0.0, 1.0}};
            for (const auto &e : lat.e) {
                want = want * NumPoly{{3.0 * e, 1.0}};
            }
            worst = std::max(worst, detail::coeff_diff(specialize(l2, lat.g2, lat.g3), want));
        }
        os << "l2 max relative difference " << detail::fmt(worst) << " (bound 1e-9)";
        return ok && worst <= 1e-9;
    });
}

inline Check c6_odd_degrees()
{
    return detail::timed("6a", "deg P = (n+1)/2 for odd n <= 7", 10.0, [](std::ostringstream &os) {
        bool ok = true;
        int count = 0;
        for (int n = 1; n <= 7; n += 2) {
            for (int l = 0; l <= 5; ++l) {
                const int d = apparent_polynomial(problem_params(n, l)).degree_b();
                if (d != (n + 1) / 2) {
                    ok = false;
                    os << "(" << n << "," << l << ") deg " << d << "; ";
                }
                ++count;
            }
        }
        os << count << " cases";
        return ok;
    });
}

inline Check c6_even_degrees()
{
    return detail::timed("6b", "deg Q table for even n <= 4, l <= 3", 10.0, [](std::ostringstream &os) {
        bool ok = true;
        for (int n = 0; n <= 4; n += 2) {
            for (int l = 0; l <= 3; ++l) {
                if (l == 0 && n == 0) {
                    continue; // y''' = B y' has no singularity
                }
                const auto pp = problem_params(n, l);
                const int want = (l % 2 == 1) ? 2 * n + 3 * l + 2 : n + 3 * l + 1;
                const int d = spectral_polynomial(pp).Q.degree_b();
                os << "(" << n << "," << l << "):" << d << (d == want ? "" : "!") << " ";
                ok = ok && d == want;
            }
        }
        return ok;
    });
}

inline Check c7_even_monodromy(double tol = 1e-11)
{
    return detail::timed("7", "even-n monodromy structure, (0,1)", 30.0, [tol](std::ostringstream &os) {
        const auto lat = lattice_data({0.2, 1.1});
        const auto pp = problem_params(0, 1);
        bool ok = true;
        double comm = 0, det = 0, pair = 0, route = 0;
        for (cplx B : {cplx(2), cplx(1, 1), cplx(0, -3)}) {
            const auto r = monodromy_pair(pp, B, lat, tol);
            comm = std::max(comm, r.commutator_defect);
            det = std::max({det, std::abs(r.dets[0] - 1.0), std::abs(r.dets[1] - 1.0)});
            for (const auto *ev : {&r.eigen1, &r.eigen2}) {
                // one eigenvalue at 1, the other two reciprocal
                std::vector<cplx> v = *ev;
                std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return std::abs(a - 1.0) < std::abs(b - 1.0); });
                pair = std::max({pair, std::abs(v[0] - 1.0), std::abs(v[1] * v[2] - 1.0)});
            }
            if (r.classification != MonoClass::DiagonalizablePair && r.classification != MonoClass::Unitary) {
                ok = false;
                os << "B=" << B << " classified " << class_name(r.classification) << "; ";
                continue;
            }
            const auto red = reduced_eigenvalue_check(pp, B, lat, tol);
            double best = std::numeric_limits<double>::infinity();
            for (const auto &[m1, m2] : red.pairs) {
                best = std::min(best, std::max(std::abs(m1 - r.lambda1), std::abs(m2 - r.lambda2)));
            }
            route = std::max(route, best);
        }
        os << "commutator " << detail::fmt(comm) << ", |det-1| " << detail::fmt(det) << ", pairing "
           << detail::fmt(pair) << ", reduced route " << detail::fmt(route);
        return ok && comm <= 1e-6 && det <= 1e-7 && pair <= 1e-6 && route <= 1e-6;
    });
}

inline Check c8_klein_four(double tol = 1e-10)
{
    return detail::timed("8", "Klein four-group at roots of P, tau = i", 30.0, [tol](std::ostringstream &os) {
        const auto lat = lattice_data({0, 1});
        const cplx r = 2.0 * std::sqrt(3.0 * lat.g2);
        bool ok = true;
        double sq = 0, tr = 0;
        for (auto [n, B] : {std::pair{1, cplx(0)}, {3, r}, {3, -r}}) {
            const auto rep = monodromy_pair(problem_params(n, 0), B, lat, tol);
            const CMat Id = CMat::Identity(3, 3);
            sq = std::max({sq, (rep.N1 * rep.N1 - Id).norm(), (rep.N2 * rep.N2 - Id).norm()});
            tr = std::max({tr, std::abs(rep.N1.trace() + 1.0), std::abs(rep.N2.trace() + 1.0),
                           std::abs((rep.N1 * rep.N2).trace() + 1.0)});
            ok = ok && rep.classification == MonoClass::KleinFour;
        }
        os << "max |N^2 - I| " << detail::fmt(sq) << ", max trace error " << detail::fmt(tr);
        return ok && sq <= 1e-5 && tr <= 1e-5;
    });
}

inline Check c9_unipotent(double tol = 1e-12)
{
    return detail::timed("9", "(1,1) at B = 0 is nontrivially unipotent", 30.0, [tol](std::ostringstream &os) {
        const auto rep = monodromy_pair(problem_params(1, 1), 0.0, lattice_data({0, 1}), tol);
        double eig = 0;
        for (const auto *ev : {&rep.eigen1, &rep.eigen2}) {
            for (const auto &e : *ev) {
                eig = std::max(eig, std::abs(e - 1.0));
            }
        }
        const CMat Id = CMat::Identity(3, 3);
        const double dist = std::max((rep.N1 - Id).norm(), (rep.N2 - Id).norm());
        os << "commutator " << detail::fmt(rep.commutator_defect) << ", max |ev-1| " << detail::fmt(eig)
           << ", max |N-I| " << detail::fmt(dist) << ", " << class_name(rep.classification);
        return rep.commutator_defect <= 1e-6 && eig <= 1e-4 && dist >= 1e-3;
    });
}

inline Check c10_non_apparent(double tol = 1e-10)
{
    return detail::timed("10", "(1,0) at B = 1 has a nontrivial commutator", 10.0, [tol](std::ostringstream &os) {
        const auto rep = monodromy_pair(problem_params(1, 0), 1.0, lattice_data({0, 1}), tol);
        os << "commutator " << detail::fmt(rep.commutator_defect) << ", " << class_name(rep.classification);
        return rep.commutator_defect >= 1e-3;
    });
}

inline Check real_roots_check(const std::string &id, std::vector<std::pair<int, int>> cases)
{
    return detail::timed(id, "real distinct roots at tau = i", 5.0, [cases](std::ostringstream &os) {
        const auto lat = lattice_data({0, 1});
        bool ok = true;
        for (auto [n, l] : cases) {
            const auto rep =
                certify_real_distinct(specialize(apparent_polynomial(problem_params(n, l)), lat.g2, lat.g3), 1e-8, 1e-6);
            ok = ok && rep.all_real && rep.distinct && int(rep.roots.size()) == (n + 1) / 2;
            os << "P" << n << l << ": " << rep.roots.size() << " roots, real=" << rep.all_real
               << " gap=" << detail::fmt(rep.min_pairwise_gap) << "; ";
        }
        return ok;
    });
}

inline Check c11_odd_even()
{
    return real_roots_check("11a", {{5, 0}, {5, 2}});
}

inline Check c11_odd_odd()
{
    return real_roots_check("11b", {{3, 1}, {5, 1}});
}

inline Check c12_weierstrass()
{
    return detail::timed("12", "Weierstrass layer identities", 5.0, [](std::ostringstream &os) {
        std::mt19937 rng(12);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        double ident = 0, leg = 0;
        for (cplx tau : {cplx(0, 1), cplx(0.5, 1), cplx(0.3, 0.8), cplx(0.2, 1.1), cplx(-0.41, 0.37)}) {
            const auto lat = lattice_data(tau);
            for (int i = 0; i < 100;) {
                const cplx z = u(rng) + u(rng) * tau;
                if (distance_to_lattice(z, lat) < 0.05) {
                    continue;
                }
                ++i;
                const auto w = wp_eval(z, lat);
                const cplx rhs = 4.0 * w.wp * w.wp * w.wp - lat.g2 * w.wp - lat.g3;
                ident = std::max(ident, std::abs(w.wp_prime * w.wp_prime - rhs) / (1 + std::pow(std::abs(w.wp), 3)));
            }
            leg = std::max(leg, std::abs(lat.eta1 * tau - lat.eta2 - cplx(0, 2 * pi)));
        }
        const double g3 = std::abs(lattice_data({0, 1}).g3);
        os << "identity " << detail::fmt(ident) << ", Legendre " << detail::fmt(leg) << ", |g3(i)| " << detail::fmt(g3);
        return ident <= 1e-10 && leg <= 1e-10 && g3 <= 1e-12;
    });
}

inline Check c13_zero_collapse()
{
    return detail::timed("13", "zeros of y0 for (0,3) collapse to the origin", 5.0, [](std::ostringstream &os) {
        const auto lat = lattice_data({0, 1});
        const auto sol = even_elliptic_solution(problem_params(0, 3));
        double prev = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (double B : {10.0, 100.0, 1000.0}) {
            double m = 0;
            for (const auto &p : elliptic_solution_zeros(sol, B, lat)) {
                m = std::max(m, std::abs(p));
            }
            const double bound = 2 * std::sqrt(24 / B);
            ok = ok && m < prev && m <= bound;
            os << "B=" << B << ": " << detail::fmt(m) << " (<= " << detail::fmt(bound) << "); ";
            prev = m;
        }
        return ok;
    });
}

inline const std::vector<std::string> &suite_names()
{
    static const std::vector<std::string> names{"weierstrass", "parity-odd-odd", "parity-odd-even", "parity-even",
                                                "lame-bridge"};
    return names;
}

// Empty result for an unknown suite name.
inline std::vector<Check> run_suite(const std::string &name)
{
    if (name == "weierstrass") {
        return {c12_weierstrass()};
    }
    if (name == "parity-odd-odd") {
        return {c2_second_elliptic(), c6_odd_degrees(), c9_unipotent(), c11_odd_odd()};
    }
    if (name == "parity-odd-even") {
        return {c1_closed_forms(), c3_keypoint(), c8_klein_four(), c10_non_apparent(), c11_odd_even()};
    }
    if (name == "parity-even") {
        return {c6_even_degrees(), c7_even_monodromy(), c13_zero_collapse()};
    }
    if (name == "lame-bridge") {
        return {c4_lame_bridge(), c5_lame_oracles()};
    }
    return {};
}

inline std::vector<Check> run_all()
{
    return {c1_closed_forms(),  c2_second_elliptic(), c3_keypoint(),       c4_lame_bridge(), c5_lame_oracles(),
            c6_odd_degrees(),   c6_even_degrees(),    c7_even_monodromy(), c8_klein_four(),  c9_unipotent(),
            c10_non_apparent(), c11_odd_even(),       c11_odd_odd(),       c12_weierstrass(), c13_zero_collapse()};
}

} // namespace lame3::acceptance

#endif
