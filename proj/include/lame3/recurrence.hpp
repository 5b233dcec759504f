#ifndef LAME3_RECURRENCE_HPP
#define LAME3_RECURRENCE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "elliptic.hpp"
#include "errors.hpp"
#include "sympoly.hpp"

namespace lame3
{

enum class Regime { OddOdd, OddEven, EvenAny };

inline const char *regime_name(Regime r)
{
    switch (r) {
    case Regime::OddOdd:
        return "OddOdd";
    case Regime::OddEven:
        return "OddEven";
    default:
        return "EvenAny";
    }
}

struct ProblemParams {
    int n = 0, l = 0;
    long alpha = 0;
    rational beta;
    std::array<int, 3> exponents{};
    std::array<int, 3> dual_exponents{};
    rational dual_beta;
    Regime regime = Regime::EvenAny;
    int k = -1;  // degree of the even elliptic solution; -1 when none exists (n odd, l even)
    int m = 0;   // n + 2l
    int m0 = -1; // dual degree, n even only
};

inline ProblemParams problem_params(int n, int l)
{
    if (n < 0 || l < 0) {
        throw DomainError("n and l must be nonnegative");
    }
    if (n == 0 && l == 0) {
        throw DomainError("(n, l) = (0, 0): 0 is a regular point");
    }
    ProblemParams pp;
    pp.n = n;
    pp.l = l;
    pp.alpha = long(n) * n + 3L * n * l + 3L * l * l + 3L * l + 2L * n;
    pp.beta = frac(long(l - 1) * (n + l) * (n + 2 * l + 2), 2);
    pp.exponents = {-n - l, 1 - l, n + 2 * l + 2};
    pp.dual_exponents = {-n - 2 * l, l + 1, n + l + 2};
    pp.dual_beta = -rational(pp.alpha) - pp.beta;
    pp.regime = (n % 2 == 0) ? Regime::EvenAny : (l % 2 == 1 ? Regime::OddOdd : Regime::OddEven);
    if (l % 2 == 1) {
        pp.k = (l - 1) / 2;
    } else if (n % 2 == 0) {
        pp.k = (n + l) / 2;
    }
    pp.m = n + 2 * l;
    if (n % 2 == 0) {
        pp.m0 = (n + 2 * l) / 2;
    }
    return pp;
}

// The dual equation has the same shape with (n, l) -> (n + 3l, -l): alpha is
// unchanged and beta becomes -(alpha + beta).  Applying it twice is the identity.
inline std::pair<int, int> dual_pair(int n, int l)
{
    return {n + 3 * l, -l};
}

// a^3 - 3a^2 + (2 - alpha) a - 2 beta
inline rational indicial(const ProblemParams &pp, const rational &a)
{
    return a * a * a - 3 * a * a + (2 - rational(pp.alpha)) * a - 2 * pp.beta;
}

// Laurent coefficients c_j of wp = z^-2 + sum_{j>=2} c_j z^{2j-2}, j = 0..depth
// (c_0 = 1, c_1 = 0).
inline std::vector<WeightedPoly> wp_laurent_coeffs(int depth)
{
    std::vector<WeightedPoly> c(std::max(depth, 3) + 1);
    c[0] = WeightedPoly(1);
    c[1] = WeightedPoly::monomial({0, 0, 0}, 0);
    c[2] = WeightedPoly::g2().scaled(frac(1, 20));
    c[3] = WeightedPoly::g3().scaled(frac(1, 28));
    for (int j = 4; j <= depth; ++j) {
        WeightedPoly s;
        for (int m = 2; m <= j - 2; ++m) {
            s += c[m] * c[j - m];
        }
        c[j] = s.scaled(frac(3, (2 * j + 1) * (j - 3)));
    }
    c.resize(depth + 1);
    return c;
}

// B_0 = 1, B_1 = B / alpha, B_j = c_j for j >= 2: the expansion of
// (alpha wp + B) / alpha in powers of z^2.
inline std::vector<WeightedPoly> wp_laurent(int depth, const ProblemParams &pp)
{
    if (depth < 2) {
        throw DomainError("wp_laurent depth must be at least 2");
    }
    auto c = wp_laurent_coeffs(depth);
    c[1] = WeightedPoly::B().scaled(frac(1, pp.alpha));
    return c;
}

inline int default_laurent_depth(const ProblemParams &pp)
{
    return (pp.n + 3 * pp.l) / 2 + 6;
}

// ---------------------------------------------------------------------------
// Even elliptic solutions sum_j C_j wp^j.

struct EllipticSolution {
    std::vector<WeightedPoly> coeffs; // C_0..C_k
    int k = 0;
    rational alpha, beta; // parameters of the recursion that produced it
};

inline rational even_phi(const rational &alpha, const rational &beta, long j)
{
    return rational(4 * j * (j - 1) * (j - 2) + 18 * j * (j - 1) + 12 * j) - alpha * j + beta;
}

// (j+1) B C_{j+1} + (j+1)(j+3/2)(j+2) g2 C_{j+2} + (j+1)(j+2)(j+3) g3 C_{j+3}
inline WeightedPoly even_rhs(const std::vector<WeightedPoly> &C, long j)
{
    auto at = [&](long i) -> WeightedPoly {
        return (i >= 0 && i < long(C.size())) ? C[i] : WeightedPoly();
    };
    WeightedPoly r = (WeightedPoly::B() * at(j + 1)).scaled(rational(j + 1));
    r += (WeightedPoly::g2() * at(j + 2)).scaled(rational((j + 1) * (j + 2)) * frac(2 * j + 3, 2));
    r += (WeightedPoly::g3() * at(j + 3)).scaled(rational((j + 1) * (j + 2) * (j + 3)));
    return r;
}

namespace detail
{

// C_top = 1 and C_j = rhs_j / phi_j for j = top-1 down to stop.
inline std::vector<WeightedPoly> even_descend(const rational &alpha, const rational &beta, int top,
                                              int stop)
{
    std::vector<WeightedPoly> C(top + 1);
    for (auto &c : C) {
        c = WeightedPoly();
    }
    C[top] = WeightedPoly(1);
    for (int j = top - 1; j >= stop; --j) {
        const rational phi = even_phi(alpha, beta, j);
        if (phi == 0) {
            throw CaseDegeneracy("even recursion hit phi_j = 0 at j = " + std::to_string(j));
        }
        C[j] = even_rhs(C, j).scaled(1 / phi);
    }
    return C;
}

inline WeightedPoly make_monic_b(const WeightedPoly &p, const char *what)
{
    const int d = p.degree_b();
    if (d < 0) {
        throw CaseDegeneracy(std::string(what) + ": obstruction vanished identically");
    }
    const WeightedPoly lead = p.coeff_b(d);
    if (!lead.is_constant()) {
        throw NumericalInstability(std::string(what) + ": leading B-coefficient is not a constant");
    }
    return p.scaled(1 / lead.constant_term());
}

} // namespace detail

inline EllipticSolution even_elliptic_solution(const ProblemParams &pp)
{
    const bool ok = (pp.l % 2 == 1) || (pp.n % 2 == 0 && pp.l % 2 == 0 && pp.n + pp.l >= 2);
    if (!ok) {
        throw RegimeError("even elliptic solution needs l odd, or n and l both even");
    }
    EllipticSolution s;
    s.k = pp.k;
    s.alpha = pp.alpha;
    s.beta = pp.beta;
    s.coeffs = detail::even_descend(s.alpha, s.beta, s.k, 0);
    return s;
}

inline EllipticSolution dual_even_elliptic_solution(const ProblemParams &pp)
{
    if (pp.n % 2 != 0) {
        throw RegimeError("dual even elliptic solution needs n even");
    }
    EllipticSolution s;
    s.k = pp.m0;
    s.alpha = pp.alpha;
    s.beta = pp.dual_beta;
    s.coeffs = detail::even_descend(s.alpha, s.beta, s.k, 0);
    return s;
}

// phi_j C_j - rhs_j for every j in [0, k-1]; all zero for a valid solution.
inline std::vector<WeightedPoly> even_recursion_residuals(const EllipticSolution &s)
{
    std::vector<WeightedPoly> out;
    for (int j = 0; j < s.k; ++j) {
        out.push_back(s.coeffs[j].scaled(even_phi(s.alpha, s.beta, j)) - even_rhs(s.coeffs, j));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Apparent-singularity polynomials (n odd).

// Frobenius coefficients c_0..c_{(n+1)/2 - 1} of sum c_j z^{2j-n-l} and the
// right-hand side at the obstruction index.
struct FrobeniusData {
    std::vector<WeightedPoly> c;
    WeightedPoly obstruction;
    int obstruction_index = 0;
};

inline FrobeniusData frobenius_data(const ProblemParams &pp)
{
    if (pp.n % 2 == 0) {
        throw RegimeError("apparent polynomial needs n odd");
    }
    const long t = pp.n + pp.l;
    const int jstar = (pp.n + 1) / 2;
    const rational alpha = pp.alpha;
    const auto lau = wp_laurent_coeffs(std::max(jstar, 3));
    auto phi = [&](long j) -> rational {
        const long a = 2 * j - t;
        return rational(a * (a - 1) * (a - 2)) - alpha * a - 2 * pp.beta;
    };
    auto rhs = [&](const std::vector<WeightedPoly> &c, long j) {
        WeightedPoly r = (WeightedPoly::B() * c[j - 1]).scaled(rational(2 * j - 2 - t));
        for (long i = 2; i <= j; ++i) {
            const rational f = alpha * (2 * j - 2 * i - t) - pp.beta * (2 * i - 2);
            r += (lau[i] * c[j - i]).scaled(f);
        }
        return r;
    };
    FrobeniusData fd;
    fd.c.push_back(WeightedPoly(1));
    for (long j = 1; j < jstar; ++j) {
        const rational ph = phi(j);
        if (ph == 0) {
            throw CaseDegeneracy("Frobenius recursion hit an early resonance");
        }
        fd.c.push_back(rhs(fd.c, j).scaled(1 / ph));
    }
    if (phi(jstar) != 0) {
        throw CaseDegeneracy("expected resonance at the obstruction index");
    }
    fd.obstruction = rhs(fd.c, jstar);
    fd.obstruction_index = jstar;
    return fd;
}

inline WeightedPoly apparent_polynomial(const ProblemParams &pp)
{
    return detail::make_monic_b(frobenius_data(pp).obstruction, "apparent_polynomial");
}

// Odd-odd: run the even recursion from C_{(n+l)/2} = 1 down to (l+1)/2; the
// right-hand side at (l-1)/2 is the obstruction.
inline WeightedPoly second_elliptic_polynomial(const ProblemParams &pp)
{
    if (pp.regime != Regime::OddOdd) {
        throw RegimeError("second elliptic polynomial needs n and l odd");
    }
    const int top = (pp.n + pp.l) / 2;
    const int low = (pp.l - 1) / 2;
    const auto C = detail::even_descend(pp.alpha, pp.beta, top, low + 1);
    return detail::make_monic_b(even_rhs(C, low), "second_elliptic_polynomial");
}

// ---------------------------------------------------------------------------
// Half-integer basis around a half period (n odd, l even).

namespace detail
{

struct HalfBasisCoefficients {
    int k = 0;
    double n = 0, l = 0;
    cplx e, theta;
    double a(int j) const
    {
        return 4.0 * (j + l + (n + 3) / 2) * (j - k) * (j - k + (n + 1) / 2);
    }
    double b(int j) const
    {
        return -(j + 1.5) * (12.0 * j * j + 36.0 * j + 27 - 3 * l * l - 3 * l - 2 * n - 3 * l * n - n * n);
    }
    double c2(int j) const
    {
        return 4.0 * (j + 2) * (j + 1.5) * (j + 2.5);
    }
};

inline HalfBasisCoefficients halfbasis_setup(const ProblemParams &pp, int i, const LatticeData &lat)
{
    if (pp.regime != Regime::OddEven) {
        throw RegimeError("half-integer basis needs n odd and l even");
    }
    if (i < 1 || i > 3) {
        throw DomainError("half-period index must be 1, 2 or 3");
    }
    HalfBasisCoefficients h;
    h.k = (pp.l + pp.n - 1) / 2;
    h.n = pp.n;
    h.l = pp.l;
    h.e = lat.e[i - 1];
    h.theta = 3.0 * h.e * h.e - lat.g2 / 4.0;
    return h;
}

inline void guard_growth(const NumPoly &p)
{
    for (const auto &c : p.coeffs) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()) || std::abs(c) > 1e250) {
            throw NumericalInstability("half-basis coefficient growth exceeded the overflow guard");
        }
    }
}

} // namespace detail

// Monic obstruction of the half-basis recursion at j = l/2 - 1, as a
// polynomial in B with numeric coefficients.
inline NumPoly halfbasis_polynomial(const ProblemParams &pp, int i, const LatticeData &lat)
{
    const auto h = detail::halfbasis_setup(pp, i, lat);
    const int j0 = h.k - (pp.n + 1) / 2;
    std::vector<NumPoly> C(h.k + 3, NumPoly{{0.0}});
    C[h.k].coeffs = {1.0};
    auto rhs = [&](int j) {
        const NumPoly lin{{h.b(j) * h.e, j + 1.5}};
        NumPoly r = lin * C[j + 1];
        r = r + (-h.c2(j) * h.theta) * C[j + 2];
        return r;
    };
    for (int j = h.k - 1; j > j0; --j) {
        C[j] = (1.0 / h.a(j)) * rhs(j);
        detail::guard_growth(C[j]);
    }
    NumPoly ob = rhs(j0);
    detail::guard_growth(ob);
    ob.trim(0.0);
    if (ob.degree() != (pp.n + 1) / 2) {
        throw NumericalInstability("half-basis obstruction has unexpected degree");
    }
    return ob.monic();
}

struct HalfBasisSolution {
    int i = 1;
    std::vector<cplx> coeffs; // C_0..C_k
    int k = 0;
    cplx B;
    LatticeData lat;
    double residual = 0.0; // max relative residual of the recursion over j in [-2, k]
};

inline HalfBasisSolution halfbasis_solution(const ProblemParams &pp, int i, cplx B,
                                            const LatticeData &lat, double root_tol = 1e-8)
{
    const auto h = detail::halfbasis_setup(pp, i, lat);
    {
        const NumPoly P = specialize(apparent_polynomial(pp), lat.g2, lat.g3);
        double scale = 0.0;
        for (int d = 0; d <= P.degree(); ++d) {
            scale += std::abs(P.coeffs[d]) * std::pow(std::max(1.0, std::abs(B)), d);
        }
        if (!(std::abs(P.eval(B)) <= root_tol * scale)) {
            throw NotApparent("B is not a root of the apparent-singularity polynomial");
        }
    }
    const int k = h.k;
    const int j0 = k - (pp.n + 1) / 2;
    // Each coefficient is tracked as (multiple of C_k, multiple of C_{j0}).
    using Pair = std::array<cplx, 2>;
    std::vector<Pair> C(k + 3, Pair{0.0, 0.0});
    auto at = [&](int j) -> Pair { return (j >= 0 && j <= k + 2) ? C[j] : Pair{0.0, 0.0}; };
    auto rhs = [&](int j) {
        const cplx lin = (j + 1.5) * B + h.b(j) * h.e;
        const cplx quad = -h.c2(j) * h.theta;
        const Pair c1 = at(j + 1), c2 = at(j + 2);
        return Pair{lin * c1[0] + quad * c2[0], lin * c1[1] + quad * c2[1]};
    };
    C[k] = {1.0, 0.0};
    for (int j = k - 1; j >= 0; --j) {
        if (j == j0) {
            C[j] = {0.0, 1.0};
            continue;
        }
        const Pair r = rhs(j);
        C[j] = {r[0] / h.a(j), r[1] / h.a(j)};
    }
    cplx ck = 1.0, cj0 = 0.0;
    if (j0 >= 0) {
        const Pair r = rhs(-1);
        const cplx H = r[0], T = r[1];
        double mag = 1.0;
        for (const auto &c : C) {
            mag = std::max({mag, std::abs(c[0]), std::abs(c[1])});
        }
        const double zero = 1e-12 * mag * (1.0 + std::abs(B) + std::abs(h.e) * 10 + std::abs(h.theta));
        if (std::abs(T) > zero) {
            ck = 1.0;
            cj0 = -H / T;
        } else if (std::abs(H) > zero) {
            ck = 0.0;
            cj0 = 1.0;
        } else {
            throw CaseDegeneracy("both candidate normalizations vanish");
        }
    }
    HalfBasisSolution sol;
    sol.i = i;
    sol.k = k;
    sol.B = B;
    sol.lat = lat;
    sol.coeffs.resize(k + 1);
    for (int j = 0; j <= k; ++j) {
        sol.coeffs[j] = ck * C[j][0] + cj0 * C[j][1];
    }
    // Residual of a_j C_j = [(j+3/2)B + b_j e] C_{j+1} - c2_j theta C_{j+2}.
    auto cv = [&](int j) -> cplx { return (j >= 0 && j <= k) ? sol.coeffs[j] : 0.0; };
    // Row scales use term magnitudes before cancellation; e_i carries absolute
    // error of order eps * max|e|.
    const double emax = std::max({std::abs(lat.e[0]), std::abs(lat.e[1]), std::abs(lat.e[2])});
    std::vector<std::pair<double, double>> rows;
    double top = 0.0;
    for (int j = -2; j <= k; ++j) {
        const cplx lin = (j + 1.5) * B + h.b(j) * h.e;
        const cplx quad = -h.c2(j) * h.theta;
        const cplx lhs = h.a(j) * cv(j);
        const cplx r = lin * cv(j + 1) + quad * cv(j + 2);
        const double lin_mag = std::abs(j + 1.5) * std::abs(B) + std::abs(h.b(j)) * emax;
        const double scale =
            std::abs(lhs) + lin_mag * std::abs(cv(j + 1)) + std::abs(quad) * std::abs(cv(j + 2));
        rows.emplace_back(std::abs(lhs - r), scale);
        top = std::max(top, scale);
    }
    double worst = 0.0;
    for (const auto &[diff, scale] : rows) {
        const double s = std::max(scale, 1e-6 * top);
        if (s > 0) {
            worst = std::max(worst, diff / s);
        }
    }
    sol.residual = worst;
    if (worst > 1e-9) {
        throw ToleranceNotMet("half-basis recursion residual above 1e-9");
    }
    return sol;
}

// y(z) = (wp - e_i)^{1/2} sum_j C_j (wp - e_i)^j
inline cplx halfbasis_eval(const HalfBasisSolution &sol, cplx z)
{
    const cplx u = wp(z, sol.lat) - sol.lat.e[sol.i - 1];
    cplx s = 0.0;
    for (int j = sol.k; j >= 0; --j) {
        s = s * u + sol.coeffs[j];
    }
    return wp_sqrt(z, sol.i, sol.lat) * s;
}

// ---------------------------------------------------------------------------
// Symmetric-product coefficients and spectral polynomials.

struct SpectralResult {
    std::vector<WeightedPoly> F_coeffs; // beta_0..beta_m
    WeightedPoly Q;                     // monic in B when denominator == 1
    WeightedPoly denominator = WeightedPoly(1);
    rational norm_scalar = 1;           // raw quotient = norm_scalar * Q
    std::vector<rational> pivots;     // leading coefficients of the F-equation
};

namespace detail
{

inline XPoly cubic_p()
{
    return {-WeightedPoly::g3(), -WeightedPoly::g2(), WeightedPoly(), WeightedPoly(4)};
}

inline XPoly cubic_p_prime()
{
    return {-WeightedPoly::g2(), WeightedPoly(), WeightedPoly(12)};
}

// Coefficients of the F-equation divided by wp', as an operator
// c3 D^3 + c2 D^2 + c1 D + c0 in D = d/dx.  p1 = -(a x + B).
struct SymOperator {
    XPoly c3, c2, c1, c0;
    XPoly apply(const XPoly &F) const
    {
        const XPoly F1 = xp_deriv(F), F2 = xp_deriv(F1), F3 = xp_deriv(F2);
        XPoly r = xp_mul(c3, F3);
        r = xp_add(r, xp_mul(c2, F2));
        r = xp_add(r, xp_mul(c1, F1));
        return xp_add(r, xp_mul(c0, F));
    }
};

inline SymOperator sym_operator(const XPoly &y0, const XPoly &p1, const rational &alpha_plus_beta)
{
    const XPoly p = cubic_p(), pp = cubic_p_prime();
    const XPoly yx = xp_deriv(y0), yxx = xp_deriv(yx);
    const XPoly y0sq = xp_mul(y0, y0);
    const XPoly twelve_x = xp_monomial(1, WeightedPoly(12));
    const WeightedPoly half(frac(1, 2)), three_half(frac(3, 2));
    // y0'' / wp'^0 in x-form: p y0_xx + p'/2 y0_x
    const XPoly ysec = xp_add(xp_mul(p, yxx), xp_scale(xp_mul(pp, yx), half));

    SymOperator op;
    op.c3 = xp_mul(y0sq, p);
    op.c2 = xp_sub(xp_scale(xp_mul(y0sq, pp), three_half), xp_scale(xp_mul(xp_mul(y0, yx), p), 3));
    XPoly c1 = xp_mul(twelve_x, y0sq);
    c1 = xp_sub(c1, xp_scale(xp_mul(xp_mul(y0, yx), pp), three_half));
    c1 = xp_add(c1, xp_scale(xp_mul(p, xp_mul(yx, yx)), 3));
    c1 = xp_add(c1, xp_scale(xp_mul(y0, ysec), 3));
    c1 = xp_add(c1, xp_scale(xp_mul(p1, y0sq), 4));
    op.c1 = c1;
    XPoly c0 = xp_scale(xp_mul(yx, ysec), -6);
    c0 = xp_sub(c0, xp_scale(xp_mul(p1, xp_mul(y0, yx)), 6));
    c0 = xp_sub(c0, xp_scale(y0sq, WeightedPoly(rational(2 * alpha_plus_beta))));
    op.c0 = c0;
    return op;
}

// Solves op[F] = 0 for F = sum_{j<=m} beta_j x^j with beta_m = 1, top-down.
inline std::vector<WeightedPoly> solve_symmetric(const SymOperator &op, int ydeg, int m,
                                                 std::vector<rational> *pivots)
{
    std::vector<XPoly> images(m + 1);
    for (int j = 0; j <= m; ++j) {
        images[j] = op.apply(xp_monomial(j));
    }
    auto coeff = [](const XPoly &p, int d) { return d < int(p.size()) ? p[d] : WeightedPoly(); };
    std::vector<WeightedPoly> beta(m + 1);
    beta[m] = WeightedPoly(1);
    if (pivots) {
        pivots->assign(m + 1, 0);
    }
    for (int j = m; j >= 0; --j) {
        const WeightedPoly lead = coeff(images[j], 2 * ydeg + j);
        if (!lead.is_constant()) {
            throw NumericalInstability("F-equation leading coefficient is not a constant");
        }
        if (pivots) {
            (*pivots)[j] = lead.constant_term();
        }
        if (j == m) {
            continue;
        }
        WeightedPoly s;
        for (int i = j + 1; i <= m; ++i) {
            s += beta[i] * coeff(images[i], 2 * ydeg + j);
        }
        if (lead.constant_term() == 0) {
            throw CaseDegeneracy("F-equation leading coefficient vanishes below the top index");
        }
        beta[j] = (-s).scaled(1 / lead.constant_term());
    }
    XPoly F(beta.begin(), beta.end());
    const XPoly check = op.apply(F);
    if (xp_degree(check) >= 0) {
        throw NonzeroRemainder("F-equation is not satisfied by the solved coefficients");
    }
    return beta;
}

// (I y0^2) F^2 + (p/4) G^2 - (F/2)[p (G_x y0 - 2 y0_x G) + (p'/2) y0 G],
// G = F_x y0 - F y0_x, divided exactly by y0^4.
inline XPoly wronskian_constant(const XPoly &y0, const XPoly &p1, const XPoly &F)
{
    const XPoly p = cubic_p(), pp = cubic_p_prime();
    const WeightedPoly half(frac(1, 2)), quarter(frac(1, 4));
    const XPoly yx = xp_deriv(y0), yxx = xp_deriv(yx);
    const XPoly Fx = xp_deriv(F);
    const XPoly ysec = xp_add(xp_mul(p, yxx), xp_scale(xp_mul(pp, yx), half));
    XPoly Iy2 = xp_scale(xp_mul(p1, xp_mul(y0, y0)), -1);
    Iy2 = xp_sub(Iy2, xp_scale(xp_mul(ysec, y0), frac(3, 2)));
    Iy2 = xp_add(Iy2, xp_scale(xp_mul(p, xp_mul(yx, yx)), frac(3, 4)));

    const XPoly G = xp_sub(xp_mul(Fx, y0), xp_mul(F, yx));
    const XPoly Gx = xp_deriv(G);
    XPoly num = xp_mul(Iy2, xp_mul(F, F));
    num = xp_add(num, xp_scale(xp_mul(p, xp_mul(G, G)), quarter));
    XPoly bracket = xp_mul(p, xp_sub(xp_mul(Gx, y0), xp_scale(xp_mul(yx, G), 2)));
    bracket = xp_add(bracket, xp_scale(xp_mul(pp, xp_mul(y0, G)), half));
    num = xp_sub(num, xp_scale(xp_mul(F, bracket), half));

    const XPoly y2 = xp_mul(y0, y0);
    return xp_divexact(num, xp_mul(y2, y2));
}

inline SpectralResult spectral_route(const XPoly &y0, const XPoly &p1, const rational &apb, int m)
{
    SpectralResult res;
    const int ydeg = xp_degree(y0);
    const auto op = sym_operator(y0, p1, apb);
    res.F_coeffs = solve_symmetric(op, ydeg, m, &res.pivots);
    const XPoly F(res.F_coeffs.begin(), res.F_coeffs.end());
    const XPoly quotient = wronskian_constant(y0, p1, F);
    if (xp_degree(quotient) > 0) {
        throw NonzeroRemainder("Wronskian expression depends on x");
    }
    const WeightedPoly raw = quotient.empty() ? WeightedPoly() : quotient[0];
    const int d = raw.degree_b();
    if (d < 0) {
        throw CaseDegeneracy("Wronskian constant vanished identically");
    }
    const WeightedPoly lead = raw.coeff_b(d);
    if (lead.is_constant()) {
        res.norm_scalar = lead.constant_term();
        res.Q = raw.scaled(1 / res.norm_scalar);
    } else {
        res.Q = raw;
        res.denominator = lead;
    }
    return res;
}

inline XPoly p1_poly(const rational &a)
{
    return {-WeightedPoly::B(), WeightedPoly(rational(-a))};
}

} // namespace detail

inline std::vector<WeightedPoly> symmetric_product_coeffs(const ProblemParams &pp,
                                                          std::vector<rational> *pivots = nullptr)
{
    if (pp.n % 2 != 0) {
        throw RegimeError("symmetric product coefficients need n even");
    }
    const auto y = even_elliptic_solution(pp);
    const XPoly y0(y.coeffs.begin(), y.coeffs.end());
    const auto op = detail::sym_operator(y0, detail::p1_poly(pp.alpha), rational(pp.alpha) + pp.beta);
    return detail::solve_symmetric(op, y.k, pp.m, pivots);
}

inline SpectralResult spectral_polynomial(const ProblemParams &pp)
{
    if (pp.n % 2 != 0) {
        throw RegimeError("spectral polynomial needs n even");
    }
    const auto y = even_elliptic_solution(pp);
    const XPoly y0(y.coeffs.begin(), y.coeffs.end());
    return detail::spectral_route(y0, detail::p1_poly(pp.alpha), rational(pp.alpha) + pp.beta, pp.m);
}

// Lame equation y'' = (m(m+1) wp + B) y: same route with y0 = 1.
inline SpectralResult lame_spectral(int m)
{
    if (m < 1) {
        throw DomainError("Lame index must be at least 1");
    }
    const rational mm(long(m) * (m + 1));
    return detail::spectral_route(XPoly{WeightedPoly(1)}, detail::p1_poly(mm), mm, m);
}

inline WeightedPoly lame_spectral_polynomial(int m)
{
    return lame_spectral(m).Q;
}

} // namespace lame3

#endif
