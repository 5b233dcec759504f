#include <gtest/gtest.h>

#include <lame3/json_io.hpp>
#include <lame3/monodromy.hpp>
#include <lame3/roots.hpp>

#include <random>

using namespace lame3;

namespace
{

NumPoly from_roots(const std::vector<cplx> &r)
{
    NumPoly p{{1.0}};
    for (const auto &z : r) {
        p = p * NumPoly{{-z, 1.0}};
    }
    return p;
}

// Derivatives by the Cauchy integral on a small circle.
std::array<cplx, 4> cauchy_derivs(const std::function<cplx(cplx)> &f, cplx z, double r = 0.05, int m = 96)
{
    std::array<cplx, 4> d{};
    for (int k = 0; k < m; ++k) {
        const cplx w = std::polar(1.0, 2 * pi * k / m);
        const cplx fv = f(z + r * w);
        cplx wp = 1.0;
        for (int o = 0; o < 4; ++o) {
            d[o] += fv / wp;
            wp *= r * w;
        }
    }
    double fact = 1.0;
    for (int o = 0; o < 4; ++o) {
        d[o] *= fact / double(m);
        fact *= (o + 1);
    }
    return d;
}

bool has_close(const std::vector<cplx> &v, cplx z, double tol)
{
    return std::any_of(v.begin(), v.end(), [&](cplx w) { return std::abs(w - z) <= tol; });
}

} // namespace

// ---------------------------------------------------------------- roots

TEST(Roots, SimpleCubic)
{
    const auto rep = find_roots(from_roots({1.0, 2.0, 3.0}));
    ASSERT_EQ(rep.roots.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(std::abs(rep.roots[i] - double(i + 1)), 0.0, 1e-12);
    }
    EXPECT_LE(rep.max_residual, 1e-10);
}

TEST(Roots, LameOneGivesHalfPeriodValues)
{
    const auto lat = lattice_data({0.3, 0.9});
    const auto rep = find_roots(specialize(lame_spectral_polynomial(1), lat.g2, lat.g3));
    for (const auto &e : lat.e) {
        EXPECT_TRUE(has_close(rep.roots, e, 1e-9 * (1 + std::abs(e))));
    }
}

TEST(Roots, P30AtSquareLattice)
{
    const auto lat = lattice_data({0.0, 1.0});
    const auto rep = certify_real_distinct(specialize(apparent_polynomial(problem_params(3, 0)), lat.g2, lat.g3));
    const double r = 2 * std::sqrt(3 * lat.g2.real());
    EXPECT_TRUE(rep.all_real);
    EXPECT_TRUE(rep.distinct);
    EXPECT_NEAR(rep.roots[0].real(), -r, 1e-9 * r);
    EXPECT_NEAR(rep.roots[1].real(), r, 1e-9 * r);
}

TEST(Roots, CertifyExamples)
{
    const auto lat = lattice_data({0.0, 1.0});
    const auto r50 = certify_real_distinct(specialize(apparent_polynomial(problem_params(5, 0)), lat.g2, lat.g3));
    EXPECT_EQ(r50.roots.size(), 3u);
    EXPECT_TRUE(r50.all_real && r50.distinct);
    const auto r31 = certify_real_distinct(specialize(apparent_polynomial(problem_params(3, 1)), lat.g2, lat.g3));
    EXPECT_EQ(r31.roots.size(), 2u);
    EXPECT_TRUE(r31.all_real && r31.distinct);
    const auto r = certify_real_distinct(NumPoly{{1.0, 0.0, 1.0}});
    EXPECT_FALSE(r.all_real);
}

TEST(Roots, ScalingInvariance)
{
    const NumPoly p = from_roots({{0.5, 1}, {-2, 0.25}, {3, -1}, {0.1, 0.1}});
    const auto a = find_roots(p);
    const auto b = find_roots(cplx(-3.7, 12.5) * p);
    const auto c = find_roots(1e-9 * p);
    for (std::size_t i = 0; i < a.roots.size(); ++i) {
        EXPECT_LE(std::abs(a.roots[i] - b.roots[i]), 1e-10);
        EXPECT_LE(std::abs(a.roots[i] - c.roots[i]), 1e-10);
    }
}

TEST(Roots, DiscriminantMatchesGap)
{
    std::mt19937 rng(20261017);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int t = 0; t < 20; ++t) {
        std::vector<cplx> r{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
        if (t % 4 == 0) {
            r[2] = r[1]; // repeated root
        }
        const NumPoly p = from_roots(r);
        const cplx a = p.coeffs[2], b = p.coeffs[1], c = p.coeffs[0];
        const cplx disc = a * a * b * b - 4.0 * b * b * b - 4.0 * a * a * a * c - 27.0 * c * c + 18.0 * a * b * c;
        const double scale = std::pow(1 + p.norm(), 4);
        const auto rep = find_roots(p, 1e-9);
        const bool disc_zero = std::abs(disc) <= 1e-10 * scale;
        const bool gap_zero = rep.min_pairwise_gap <= 1e-4;
        EXPECT_EQ(disc_zero, gap_zero) << "trial " << t;
    }
}

TEST(Roots, JsonShape)
{
    const auto j = to_json(find_roots(from_roots({1.0, -1.0})));
    EXPECT_EQ(j["roots"].size(), 2u);
    EXPECT_TRUE(j.contains("residual"));
    EXPECT_TRUE(j.contains("gap"));
    EXPECT_TRUE(j.contains("all_real"));
}

// ---------------------------------------------------------------- half basis

TEST(HalfBasis, KeypointAgreement)
{
    for (cplx tau : {cplx(0, 1), cplx(0.5, 1), cplx(0.3, 0.8)}) {
        const auto lat = lattice_data(tau);
        for (auto [n, l] : {std::pair{3, 0}, {3, 2}, {5, 0}, {5, 2}, {3, 4}}) {
            const auto pp = problem_params(n, l);
            const NumPoly P = specialize(apparent_polynomial(pp), lat.g2, lat.g3);
            for (int i = 1; i <= 3; ++i) {
                const NumPoly H = halfbasis_polynomial(pp, i, lat);
                ASSERT_EQ(H.degree(), P.degree());
                double diff = 0.0;
                for (int d = 0; d <= P.degree(); ++d) {
                    diff = std::max(diff, std::abs(H.coeffs[d] - P.coeffs[d]) / (1 + std::abs(P.coeffs[d])));
                }
                EXPECT_LE(diff, 1e-8) << n << "," << l << " i=" << i << " tau=" << tau;
            }
        }
    }
}

TEST(HalfBasis, RealCoefficientsOnImaginaryAxis)
{
    const auto lat = lattice_data({0, 1});
    const NumPoly H = halfbasis_polynomial(problem_params(5, 0), 2, lat);
    EXPECT_EQ(H.degree(), 3);
    for (const auto &c : H.coeffs) {
        EXPECT_LE(std::abs(c.imag()), 1e-9 * (1 + std::abs(c)));
    }
}

TEST(HalfBasis, SingleTermAtZero)
{
    const auto lat = lattice_data({0.1, 1.2});
    for (int i = 1; i <= 3; ++i) {
        const auto sol = halfbasis_solution(problem_params(1, 0), i, 0.0, lat);
        ASSERT_EQ(sol.coeffs.size(), 1u);
        EXPECT_NEAR(std::abs(sol.coeffs[0] - 1.0), 0.0, 1e-14);
    }
    EXPECT_THROW(halfbasis_solution(problem_params(1, 0), 1, 1.0, lat), NotApparent);
}

TEST(HalfBasis, SolvesTheEquation)
{
    const auto lat = lattice_data({0, 1});
    const auto pp = problem_params(3, 0);
    const auto roots = find_roots(specialize(apparent_polynomial(pp), lat.g2, lat.g3));
    for (const auto &B : roots.roots) {
        for (int i = 1; i <= 3; ++i) {
            const auto sol = halfbasis_solution(pp, i, B, lat);
            EXPECT_LT(sol.residual, 1e-9);
            bool nonzero = false;
            for (const auto &c : sol.coeffs) {
                nonzero = nonzero || std::abs(c) > 0;
            }
            EXPECT_TRUE(nonzero);
            for (cplx z : {cplx(0.31, 0.22), cplx(0.7, 0.4), cplx(0.2, 0.77)}) {
                const auto d = cauchy_derivs([&](cplx w) { return halfbasis_eval(sol, w); }, z);
                const auto w = wp_eval(z, lat);
                const cplx res = d[3] - (double(pp.alpha) * w.wp + B) * d[1] + pp.beta.get_d() * w.wp_prime * d[0];
                const double scale = std::abs(d[3]) + std::abs((double(pp.alpha) * w.wp + B) * d[1]) + 1.0;
                EXPECT_LE(std::abs(res) / scale, 1e-8) << "i=" << i << " z=" << z;
            }
        }
    }
}

TEST(HalfBasis, ReflectionOnSquareLattice)
{
    const auto lat = lattice_data({0, 1});
    const auto pp = problem_params(5, 2);
    const auto roots = find_roots(specialize(apparent_polynomial(pp), lat.g2, lat.g3));
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int i = 1; i <= 3; ++i) {
        const auto sol = halfbasis_solution(pp, i, roots.roots[1], lat);
        for (int s = 0; s < 20; ++s) {
            const cplx z(u(rng), u(rng));
            const double a = std::abs(halfbasis_eval(sol, z)), b = std::abs(halfbasis_eval(sol, std::conj(z)));
            EXPECT_NEAR(a, b, 1e-8 * (1 + a));
        }
    }
}

// ---------------------------------------------------------------- zeros of y0

TEST(Zeros, ZeroThreeAtTwentyFour)
{
    const auto lat = lattice_data({0.15, 1.05});
    const auto sol = even_elliptic_solution(problem_params(0, 3));
    const auto z = elliptic_solution_zeros(sol, 24.0, lat);
    ASSERT_EQ(z.size(), 2u);
    const cplx p = invert_wp(-1.0, lat);
    EXPECT_LE(distance_to_lattice(z[0] - p, lat), 1e-9);
    EXPECT_LE(distance_to_lattice(z[1] + p, lat), 1e-9);
    EXPECT_LE(std::abs(wp(z[0], lat) + 1.0), 1e-9);
}

TEST(Zeros, SymmetricMultiset)
{
    const auto lat = lattice_data({0.2, 1.1});
    const auto sol = even_elliptic_solution(problem_params(2, 3));
    const auto z = elliptic_solution_zeros(sol, cplx(3, -1), lat);
    EXPECT_EQ(z.size(), std::size_t(2 * sol.k));
    for (const auto &p : z) {
        double best = 1e9;
        for (const auto &q : z) {
            best = std::min(best, distance_to_lattice(p + q, lat));
        }
        EXPECT_LE(best, 1e-7);
    }
}

TEST(Zeros, CollapseTowardsOrigin)
{
    const auto lat = lattice_data({0, 1});
    const auto sol = even_elliptic_solution(problem_params(0, 3));
    double prev = 1e9;
    for (double B : {10.0, 100.0, 1000.0}) {
        double m = 0;
        for (const auto &p : elliptic_solution_zeros(sol, B, lat)) {
            m = std::max(m, std::abs(p));
        }
        EXPECT_LT(m, prev);
        EXPECT_LE(m, 2 * std::sqrt(24 / B));
        prev = m;
    }
}

// ---------------------------------------------------------------- monodromy

TEST(Transfer, NullPathIsIdentity)
{
    const auto lat = lattice_data({0.2, 1.1});
    const auto sys = build_system(problem_params(0, 1), 2.0, lat, SystemKind::Third);
    const cplx a(0.3, 0.4);
    const CMat T = transfer_matrix(sys, PathSpec{{a, a}, 0.1});
    EXPECT_LE((T - CMat::Identity(3, 3)).norm(), 1e-15);
    EXPECT_THROW(transfer_matrix(sys, PathSpec{{a, a}, 0.1}, 1e-3), DomainError);
}

TEST(Transfer, ReversalAndConcatenation)
{
    const double tol = 1e-10;
    const auto lat = lattice_data({0.2, 1.1});
    const auto sys = build_system(problem_params(2, 1), cplx(1, 1), lat, SystemKind::Third);
    const cplx a(0.3, 0.4), b(0.9, 0.5), c(0.6, 0.9);
    const CMat ab = transfer_matrix(sys, PathSpec{{a, b}}, tol);
    const CMat ba = transfer_matrix(sys, PathSpec{{b, a}}, tol);
    const CMat bc = transfer_matrix(sys, PathSpec{{b, c}}, tol);
    const CMat abc = transfer_matrix(sys, PathSpec{{a, b, c}}, tol);
    EXPECT_LE((ab * ba - CMat::Identity(3, 3)).norm(), 10 * tol * (1 + ab.norm() * ba.norm()));
    EXPECT_LE((abc - bc * ab).norm(), 10 * tol * (1 + abc.norm()));
}

TEST(Transfer, ThirdOrderExampleSystem)
{
    // (0,1): y''' = (6 wp + B) y'
    const auto lat = lattice_data({0.2, 1.1});
    const auto sys = build_system(problem_params(0, 1), cplx(0.5, 0.5), lat, SystemKind::Third);
    const cplx z(0.3, 0.3);
    const CMat A = sys.matrix(z);
    EXPECT_EQ(A(2, 0), cplx(0.0));
    EXPECT_LE(std::abs(A(2, 1) - (6.0 * wp(z, lat) + cplx(0.5, 0.5))), 1e-12);
    const auto pp = problem_params(2, 3);
    const auto dual = build_system(pp, 1.0, lat, SystemKind::Dual);
    const auto w = wp_eval(z, lat);
    EXPECT_LE(std::abs(dual.matrix(z)(2, 0) - double(pp.alpha) * w.wp_prime - pp.beta.get_d() * w.wp_prime), 1e-9);
}

TEST(Transfer, LameHalfPeriodSolution)
{
    // y = (wp - e1)^{1/2} solves the m = 1 equation at B = e1: continue it and compare.
    const auto lat = lattice_data({0.1, 0.9});
    const auto sys = build_lame_system(1, lat.e[0], lat);
    const cplx a(0.3, 0.3), b(0.8, 0.55);
    auto f = [&](cplx z) { return wp_sqrt(z, 1, lat); };
    const auto da = cauchy_derivs(f, a), db = cauchy_derivs(f, b);
    const CMat T = transfer_matrix(sys, PathSpec{{a, b}}, 1e-11);
    Eigen::Vector2cd ya(da[0], da[1]);
    const Eigen::Vector2cd yb = T * ya;
    EXPECT_LE(std::abs(yb(0) - db[0]), 1e-8 * (1 + std::abs(db[0])));
    EXPECT_LE(std::abs(yb(1) - db[1]), 1e-8 * (1 + std::abs(db[1])));
}

TEST(Monodromy, EvenCaseStructure)
{
    const auto lat = lattice_data({0.2, 1.1});
    for (cplx B : {cplx(2), cplx(1, 1), cplx(0, -3)}) {
        const auto r = monodromy_pair(problem_params(0, 1), B, lat);
        EXPECT_LE(r.commutator_defect, 1e-6);
        EXPECT_LE(std::abs(r.dets[0] - 1.0), 1e-7);
        EXPECT_LE(std::abs(r.dets[1] - 1.0), 1e-7);
        EXPECT_EQ(r.classification, MonoClass::DiagonalizablePair);
        EXPECT_TRUE(has_close(r.eigen1, 1.0, 1e-6));
        EXPECT_TRUE(has_close(r.eigen1, 1.0 / r.lambda1, 1e-6));
        const auto red = reduced_eigenvalue_check(problem_params(0, 1), B, lat);
        bool match = false;
        for (const auto &[m1, m2] : red.pairs) {
            match = match || (std::abs(m1 - r.lambda1) <= 1e-6 && std::abs(m2 - r.lambda2) <= 1e-6);
        }
        EXPECT_TRUE(match) << B;
        // the two reduced multiplier pairs are reciprocal
        EXPECT_LE(std::abs(red.pairs[0].first * red.pairs[1].first - 1.0), 1e-6);
        EXPECT_LE(std::abs(red.pairs[0].second * red.pairs[1].second - 1.0), 1e-6);
    }
}

TEST(Monodromy, CommutingGridForEvenN)
{
    for (cplx tau : {cplx(0, 1), cplx(0.2, 1.1), cplx(-0.4, 0.95)}) {
        const auto lat = lattice_data(tau);
        for (auto [n, l, B] : {std::tuple{0, 2, cplx(1, 2)}, {2, 1, cplx(-3, 0.5)}, {2, 0, cplx(0.7, -1)}}) {
            const auto r = monodromy_pair(problem_params(n, l), B, lat);
            EXPECT_LE(r.commutator_defect, 1e-6) << n << "," << l << " tau=" << tau;
            EXPECT_LE(std::abs(r.dets[0] - 1.0), 10 * r.ode_tol * (1 + r.N1.norm()));
        }
    }
}

TEST(Monodromy, KleinFourAtRoots)
{
    const auto lat = lattice_data({0, 1});
    for (auto [n, l] : {std::pair{1, 0}, {1, 2}, {3, 0}, {5, 0}, {3, 2}, {5, 2}}) {
        const auto pp = problem_params(n, l);
        const auto roots = find_roots(specialize(apparent_polynomial(pp), lat.g2, lat.g3));
        for (const auto &B : roots.roots) {
            const auto r = monodromy_pair(pp, B, lat);
            EXPECT_EQ(r.classification, MonoClass::KleinFour) << n << "," << l << " B=" << B;
        }
    }
}

TEST(Monodromy, NonApparentDetected)
{
    const auto r = monodromy_pair(problem_params(1, 0), 1.0, lattice_data({0, 1}));
    EXPECT_GE(r.commutator_defect, 1e-3);
    EXPECT_EQ(r.classification, MonoClass::NonApparent);
}

TEST(Monodromy, OddOddUnipotent)
{
    const auto r = monodromy_pair(problem_params(1, 1), 0.0, lattice_data({0, 1}), 1e-12);
    EXPECT_LE(r.commutator_defect, 1e-6);
    EXPECT_EQ(r.classification, MonoClass::UnipotentNontrivial);
}

TEST(Monodromy, SelfConvergence)
{
    const auto lat = lattice_data({0.2, 1.1});
    const double tol = 1e-9;
    const auto a = monodromy_pair(problem_params(0, 1), 2.0, lat, tol);
    const auto b = monodromy_pair(problem_params(0, 1), 2.0, lat, tol / 2);
    EXPECT_LE((a.N1 - b.N1).cwiseAbs().maxCoeff(), 10 * tol * (1 + a.N1.norm()));
    EXPECT_LE((a.N2 - b.N2).cwiseAbs().maxCoeff(), 10 * tol * (1 + a.N2.norm()));
}

TEST(Monodromy, LameBridge)
{
    const auto lat = lattice_data({0.2, 1.1});
    for (int n : {0, 2}) {
        const cplx B(1.5, -0.5);
        const auto r = monodromy_pair(problem_params(n, 1), B, lat, 1e-11);
        const auto lm = lame_monodromy(n + 2, B, lat, 1e-11);
        EXPECT_LE(std::abs(lm.N1.determinant() - 1.0), 1e-7);
        for (const auto &[m1, m2] : lm.pairs) {
            EXPECT_TRUE(has_close(r.eigen1, m1, 1e-8));
            EXPECT_TRUE(has_close(r.eigen2, m2, 1e-8));
        }
    }
}

TEST(Monodromy, LameAtHalfPeriodValue)
{
    const auto lat = lattice_data({0.1, 1.0});
    const auto lm = lame_monodromy(1, lat.e[0], lat, 1e-11);
    for (const auto *ev : {&lm.eigen1, &lm.eigen2}) {
        for (const auto &e : *ev) {
            EXPECT_LE(std::abs(std::abs(e.real()) - 1.0), 1e-6);
            EXPECT_LE(std::abs(e.imag()), 1e-6);
        }
    }
}

TEST(Monodromy, ReducedMultipliersCollideAtSpectralRoot)
{
    const auto lat = lattice_data({0.2, 1.1});
    const auto Q = specialize(spectral_polynomial(problem_params(0, 1)).Q, lat.g2, lat.g3);
    const auto roots = find_roots(Q);
    const ODESystem sys = build_system(problem_params(0, 1), roots.roots[0], lat, SystemKind::Reduced2);
    cplx base;
    const auto [N1, N2] = detail::cycle_matrices(sys, 1e-11, &base);
    for (const CMat *N : {&N1, &N2}) {
        const cplx tr = N->trace();
        EXPECT_LE(std::min(std::abs(tr - 2.0), std::abs(tr + 2.0)), 1e-6);
    }
}

TEST(Monodromy, ReportJson)
{
    const auto r = monodromy_pair(problem_params(1, 0), 0.0, lattice_data({0, 1}));
    const auto j = to_json(r);
    for (const char *k : {"n", "l", "B", "tau", "N1", "N2", "commutator_defect", "eigenvalues", "classification", "ode_tol"}) {
        EXPECT_TRUE(j.contains(k)) << k;
    }
    EXPECT_EQ(j["classification"]["tag"], "KleinFour");
}

TEST(Unitarity, RejectsOddN)
{
    EXPECT_THROW(unitarity_search(problem_params(1, 0), lattice_data({0, 1}), GridSpec{}), RegimeError);
}

TEST(Unitarity, NoneOnImaginaryAxisForLOne)
{
    GridSpec g{-6, 6, -6, 6, 5, 5};
    const auto res = unitarity_search(problem_params(0, 1), lattice_data({0, 1}), g);
    EXPECT_FALSE(res.found);
    EXPECT_EQ(res.message, "not found at this resolution");
}
