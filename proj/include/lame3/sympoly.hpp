#ifndef LAME3_SYMPOLY_HPP
#define LAME3_SYMPOLY_HPP

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace lame3
{

using rational = mpq_class;
using cplx = std::complex<double>;

// mpq_class(num, den) does not reduce; every two-argument rational goes through here.
inline rational frac(long num, long den)
{
    rational r(num, den);
    r.canonicalize();
    return r;
}

// Exponents of B, g2, g3.
struct Monomial {
    int b = 0, g2 = 0, g3 = 0;
    int weight() const { return b + 2 * g2 + 3 * g3; }
    auto operator<=>(const Monomial &) const = default;
};

// Polynomial in B with coefficients in Q[g2, g3], graded by wt B = 1,
// wt g2 = 2, wt g3 = 3.  The weight flag is kept through arithmetic; the zero
// polynomial is compatible with every weight.
class WeightedPoly
{
public:
    WeightedPoly() = default;
    WeightedPoly(const rational &c) // NOLINT(implicit)
    {
        if (c != 0) {
            terms_[Monomial{}] = c;
        }
        weight_ = 0;
    }
    WeightedPoly(long c) : WeightedPoly(rational(c)) {} // NOLINT(implicit)

    static WeightedPoly monomial(Monomial m, const rational &c = 1)
    {
        WeightedPoly p;
        if (c != 0) {
            p.terms_[m] = c;
        }
        p.weight_ = m.weight();
        return p;
    }
    static WeightedPoly B() { return monomial({1, 0, 0}); }
    static WeightedPoly g2() { return monomial({0, 1, 0}); }
    static WeightedPoly g3() { return monomial({0, 0, 1}); }

    const std::map<Monomial, rational> &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    // Declared weight; nullopt for mixed-weight polynomials.
    std::optional<int> weight() const { return weight_; }

    // True iff every stored term has weight w.
    bool check_weight(int w) const
    {
        return std::all_of(terms_.begin(), terms_.end(),
                           [w](const auto &t) { return t.first.weight() == w; });
    }
    // Recomputes the flag from the terms.
    std::optional<int> actual_weight() const
    {
        if (is_zero()) {
            return weight_;
        }
        const int w = terms_.begin()->first.weight();
        return check_weight(w) ? std::optional<int>(w) : std::nullopt;
    }

    void add_term(Monomial m, const rational &c)
    {
        if (c == 0) {
            return;
        }
        const bool was_zero = terms_.empty();
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) {
                terms_.erase(it);
            }
        }
        if (was_zero) {
            weight_ = m.weight();
        } else if (weight_ && *weight_ != m.weight()) {
            weight_.reset();
        }
    }

    int degree_b() const
    {
        int d = -1;
        for (const auto &[m, c] : terms_) {
            d = std::max(d, m.b);
        }
        return d;
    }

    // Coefficient of B^d as a polynomial in g2, g3.
    WeightedPoly coeff_b(int d) const
    {
        WeightedPoly out;
        out.weight_.reset();
        for (const auto &[m, c] : terms_) {
            if (m.b == d) {
                out.terms_[{0, m.g2, m.g3}] = c;
            }
        }
        out.weight_ = out.actual_weight();
        if (out.is_zero() && weight_) {
            out.weight_ = *weight_ - d;
        }
        return out;
    }

    bool is_constant() const
    {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Monomial{});
    }
    rational constant_term() const
    {
        auto it = terms_.find(Monomial{});
        return it == terms_.end() ? rational(0) : it->second;
    }

    cplx eval(cplx b, cplx g2v, cplx g3v) const
    {
        cplx s = 0.0;
        for (const auto &[m, c] : terms_) {
            s += c.get_d() * std::pow(b, m.b) * std::pow(g2v, m.g2) * std::pow(g3v, m.g3);
        }
        return s;
    }

    WeightedPoly &operator+=(const WeightedPoly &o)
    {
        const auto w = merge_weight(*this, o);
        for (const auto &[m, c] : o.terms_) {
            auto [it, inserted] = terms_.try_emplace(m, c);
            if (!inserted) {
                it->second += c;
                if (it->second == 0) {
                    terms_.erase(it);
                }
            }
        }
        weight_ = w;
        return *this;
    }
    WeightedPoly &operator-=(const WeightedPoly &o) { return *this += -o; }
    WeightedPoly operator-() const
    {
        WeightedPoly r = *this;
        for (auto &[m, c] : r.terms_) {
            c = -c;
        }
        return r;
    }
    friend WeightedPoly operator+(WeightedPoly a, const WeightedPoly &b) { return a += b; }
    friend WeightedPoly operator-(WeightedPoly a, const WeightedPoly &b) { return a -= b; }

    friend WeightedPoly operator*(const WeightedPoly &a, const WeightedPoly &b)
    {
        WeightedPoly r;
        for (const auto &[ma, ca] : a.terms_) {
            for (const auto &[mb, cb] : b.terms_) {
                const Monomial m{ma.b + mb.b, ma.g2 + mb.g2, ma.g3 + mb.g3};
                rational prod = ca * cb;
                auto [it, inserted] = r.terms_.try_emplace(m, prod);
                if (!inserted) {
                    it->second += prod;
                }
            }
        }
        std::erase_if(r.terms_, [](const auto &t) { return t.second == 0; });
        r.weight_ = (a.weight_ && b.weight_) ? std::optional<int>(*a.weight_ + *b.weight_)
                                             : std::nullopt;
        return r;
    }
    WeightedPoly &operator*=(const WeightedPoly &o) { return *this = *this * o; }

    WeightedPoly scaled(const rational &s) const
    {
        if (s == 0) {
            WeightedPoly z;
            z.weight_ = weight_;
            return z;
        }
        WeightedPoly r = *this;
        for (auto &[m, c] : r.terms_) {
            c *= s;
        }
        return r;
    }

    bool operator==(const WeightedPoly &o) const { return terms_ == o.terms_; }

    std::string to_string() const
    {
        if (terms_.empty()) {
            return "0";
        }
        std::ostringstream os;
        bool first = true;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            const auto &[m, c] = *it;
            rational a = abs(c);
            const bool neg = c < 0;
            if (first) {
                os << (neg ? "-" : "");
            } else {
                os << (neg ? " - " : " + ");
            }
            first = false;
            const bool unit = (a == 1) && (m != Monomial{});
            if (!unit) {
                os << a.get_str();
            }
            bool need_dot = !unit;
            auto factor = [&](const char *name, int e) {
                if (e == 0) {
                    return;
                }
                os << (need_dot ? "*" : "") << name;
                if (e > 1) {
                    os << "^" << e;
                }
                need_dot = true;
            };
            factor("B", m.b);
            factor("g2", m.g2);
            factor("g3", m.g3);
        }
        return os.str();
    }

private:
    static std::optional<int> merge_weight(const WeightedPoly &a, const WeightedPoly &b)
    {
        if (a.is_zero()) {
            return b.weight_;
        }
        if (b.is_zero()) {
            return a.weight_;
        }
        if (a.weight_ && b.weight_ && *a.weight_ == *b.weight_) {
            return a.weight_;
        }
        return std::nullopt;
    }
    std::map<Monomial, rational> terms_;
    std::optional<int> weight_ = 0;
};

// Complex polynomial in B, coefficient index = power.
struct NumPoly {
    std::vector<cplx> coeffs;
    int trimmed = 0; // leading coefficients dropped as numerically zero

    int degree() const { return int(coeffs.size()) - 1; }
    cplx eval(cplx x) const
    {
        cplx s = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
            s = s * x + *it;
        }
        return s;
    }
    double norm() const
    {
        double s = 0.0;
        for (const auto &c : coeffs) {
            s = std::max(s, std::abs(c));
        }
        return s;
    }
    NumPoly derivative() const
    {
        NumPoly d;
        for (std::size_t i = 1; i < coeffs.size(); ++i) {
            d.coeffs.push_back(double(i) * coeffs[i]);
        }
        if (d.coeffs.empty()) {
            d.coeffs.push_back(0.0);
        }
        return d;
    }
    // Drops leading coefficients below rel_tol times the largest one.
    void trim(double rel_tol = 0.0)
    {
        const double scale = norm();
        while (coeffs.size() > 1 && std::abs(coeffs.back()) <= rel_tol * scale) {
            coeffs.pop_back();
            ++trimmed;
        }
    }
    NumPoly monic() const
    {
        NumPoly r = *this;
        const cplx lead = coeffs.back();
        for (auto &c : r.coeffs) {
            c /= lead;
        }
        return r;
    }

    friend NumPoly operator+(const NumPoly &a, const NumPoly &b)
    {
        NumPoly r;
        r.coeffs.assign(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
        for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
            r.coeffs[i] += a.coeffs[i];
        }
        for (std::size_t i = 0; i < b.coeffs.size(); ++i) {
            r.coeffs[i] += b.coeffs[i];
        }
        return r;
    }
    friend NumPoly operator*(const NumPoly &a, const NumPoly &b)
    {
        NumPoly r;
        r.coeffs.assign(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
            for (std::size_t j = 0; j < b.coeffs.size(); ++j) {
                r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
            }
        }
        return r;
    }
    friend NumPoly operator*(cplx s, NumPoly a)
    {
        for (auto &c : a.coeffs) {
            c *= s;
        }
        return a;
    }
};

// Substitutes numeric g2, g3.  Leading coefficients that cancel below
// 1e-14 relative are trimmed and counted in NumPoly::trimmed.
inline NumPoly specialize(const WeightedPoly &p, cplx g2v, cplx g3v, double trim_tol = 1e-14)
{
    NumPoly out;
    const int d = std::max(p.degree_b(), 0);
    out.coeffs.assign(d + 1, 0.0);
    for (const auto &[m, c] : p.terms()) {
        out.coeffs[m.b] += c.get_d() * std::pow(g2v, m.g2) * std::pow(g3v, m.g3);
    }
    out.trim(trim_tol);
    return out;
}

// Polynomial in an auxiliary variable x with WeightedPoly coefficients.
using XPoly = std::vector<WeightedPoly>;

inline void xp_normalize(XPoly &p)
{
    while (!p.empty() && p.back().is_zero()) {
        p.pop_back();
    }
}

inline int xp_degree(const XPoly &p)
{
    for (int i = int(p.size()) - 1; i >= 0; --i) {
        if (!p[i].is_zero()) {
            return i;
        }
    }
    return -1;
}

inline XPoly xp_add(const XPoly &a, const XPoly &b)
{
    XPoly r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] += a[i];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        r[i] += b[i];
    }
    xp_normalize(r);
    return r;
}

inline XPoly xp_sub(const XPoly &a, const XPoly &b)
{
    XPoly r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] += a[i];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        r[i] -= b[i];
    }
    xp_normalize(r);
    return r;
}

inline XPoly xp_mul(const XPoly &a, const XPoly &b)
{
    if (a.empty() || b.empty()) {
        return {};
    }
    XPoly r(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) {
            continue;
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (!b[j].is_zero()) {
                r[i + j] += a[i] * b[j];
            }
        }
    }
    xp_normalize(r);
    return r;
}

inline XPoly xp_scale(const XPoly &a, const WeightedPoly &s)
{
    XPoly r;
    r.reserve(a.size());
    for (const auto &c : a) {
        r.push_back(c * s);
    }
    xp_normalize(r);
    return r;
}

inline XPoly xp_deriv(const XPoly &a)
{
    XPoly r;
    for (std::size_t i = 1; i < a.size(); ++i) {
        r.push_back(a[i].scaled(rational(long(i))));
    }
    xp_normalize(r);
    return r;
}

// x^k
inline XPoly xp_monomial(int k, const WeightedPoly &c = WeightedPoly(1))
{
    XPoly r(k + 1);
    r[k] = c;
    return r;
}

// Exact division by a divisor whose leading x-coefficient is 1.
inline XPoly xp_divexact(XPoly num, const XPoly &den)
{
    const int dd = xp_degree(den);
    if (dd < 0) {
        throw DomainError("division by the zero polynomial");
    }
    if (!(den[dd] == WeightedPoly(1))) {
        throw DomainError("divisor must be monic in x");
    }
    xp_normalize(num);
    const int dn = xp_degree(num);
    if (dn < dd) {
        if (dn >= 0) {
            throw NonzeroRemainder("numerator degree below divisor degree");
        }
        return {};
    }
    XPoly q(dn - dd + 1);
    for (int i = dn; i >= dd; --i) {
        if (num[i].is_zero()) {
            continue;
        }
        const WeightedPoly c = num[i];
        q[i - dd] = c;
        for (int j = 0; j <= dd; ++j) {
            if (!den[j].is_zero()) {
                num[i - dd + j] -= c * den[j];
            }
        }
    }
    for (int i = 0; i < dd; ++i) {
        if (!num[i].is_zero()) {
            throw NonzeroRemainder("exact division left a nonzero remainder");
        }
    }
    xp_normalize(q);
    return q;
}

} // namespace lame3

#endif
