#ifndef LAME3_ELLIPTIC_HPP
#define LAME3_ELLIPTIC_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace lame3
{

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// Weierstrass data for the lattice Z + tau Z.
//
// Invariants are computed on an SL(2,Z)-equivalent tau' in the standard
// fundamental domain (|Re tau'| <= 1/2, |tau'| >= 1) and mapped back through
// Z + tau Z = s (Z + tau' Z), s = c tau + d.  All evaluation goes through the
// reduced lattice, where the theta nome satisfies |e^{i pi tau'}| < 0.07.
struct LatticeData {
    cplx tau;
    cplx q;        // e^{2 pi i tau}
    cplx g2, g3;
    std::array<cplx, 3> e; // e[k-1] = wp(omega_k / 2), omega_3 = 1 + tau
    cplx eta1, eta2;       // zeta(z + 1) - zeta(z), zeta(z + tau) - zeta(z)
    int series_terms = 0;

    struct Reduced {
        cplx tau;
        cplx nome; // e^{i pi tau'}
        cplx scale; // s = c tau + d
        int a = 1, b = 0, c = 0, d = 1;
        cplx th2, th3, th4; // theta constants
        std::array<cplx, 3> e;
        cplx eta1, eta2;
    } red;

    // Reduced half-period index (0: 1/2, 1: tau'/2, 2: (1+tau')/2) congruent
    // to omega_k / (2 s).
    std::array<int, 3> half_map{0, 1, 2};

    cplx discriminant() const
    {
        return g2 * g2 * g2 - 27.0 * g3 * g3;
    }
};

struct WpValues {
    cplx wp, wp_prime, wp_second;
};

struct ZetaSigma {
    cplx zeta, sigma;
};

namespace detail
{

struct ThetaValues {
    cplx th1, th1p, th2, th3, th4;
};

inline ThetaValues theta_all(cplx v, cplx tau, int terms)
{
    const cplx ipt = cplx(0, pi) * tau;
    ThetaValues t{0.0, 0.0, 0.0, 1.0, 1.0};
    for (int n = 0; n <= terms; ++n) {
        const double h = n + 0.5;
        const cplx qh = std::exp(ipt * (h * h));
        const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
        const double odd = 2 * n + 1;
        const cplx s = std::sin(odd * v), c = std::cos(odd * v);
        t.th1 += 2.0 * sgn * qh * s;
        t.th1p += 2.0 * sgn * qh * odd * c;
        t.th2 += 2.0 * qh * c;
        if (n >= 1) {
            const cplx qn = std::exp(ipt * double(n * n));
            const cplx c2 = std::cos(2.0 * n * v);
            t.th3 += 2.0 * qn * c2;
            t.th4 += 2.0 * sgn * qn * c2;
        }
    }
    return t;
}

// Lambert series sum_{n>=1} n^p q^n / (1 - q^n).
inline cplx lambert(int p, cplx q)
{
    cplx sum = 0.0, qn = 1.0;
    for (int n = 1; n < 400; ++n) {
        qn *= q;
        const cplx term = std::pow(double(n), p) * qn / (1.0 - qn);
        sum += term;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum)) && std::abs(qn) < 1e-18) {
            break;
        }
    }
    return sum;
}

// Lattice coordinates of z in the basis (1, tau).
inline std::pair<double, double> lattice_coords(cplx z, cplx tau)
{
    const double v = z.imag() / tau.imag();
    const double u = z.real() - v * tau.real();
    return {u, v};
}

struct CellReduction {
    cplx w0;
    long m, n; // w = w0 + m + n tau
};

inline CellReduction reduce_to_cell(cplx w, cplx tau)
{
    auto [u, v] = lattice_coords(w, tau);
    const long m = static_cast<long>(std::floor(u + 0.5));
    const long n = static_cast<long>(std::floor(v + 0.5));
    return {w - double(m) - double(n) * tau, m, n};
}

inline double lattice_distance(cplx w0, cplx tau)
{
    double best = std::numeric_limits<double>::infinity();
    for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
            best = std::min(best, std::abs(w0 - double(i) - double(j) * tau));
        }
    }
    return best;
}

inline int theta_terms_for(cplx tau)
{
    // |q^{(N+1/2)^2}| e^{(2N+1) |Im v|} with |Im v| <= pi Im(tau)/2 + margin.
    const double a = pi * tau.imag();
    int n = 2;
    while (n < 60) {
        const double h = n + 0.5;
        if (-a * (h * h - h - 1.0) < std::log(1e-19)) {
            break;
        }
        ++n;
    }
    return n;
}

inline std::optional<int> env_series_terms()
{
    if (const char *s = std::getenv("LAME3_SERIES_TERMS")) {
        char *end = nullptr;
        const long v = std::strtol(s, &end, 10);
        if (end != s && v >= 2 && v <= 200) {
            return static_cast<int>(v);
        }
    }
    return std::nullopt;
}

// wp and its z-derivative on the reduced lattice at a point of the centred cell.
inline std::pair<cplx, cplx> wp_reduced_cell(cplx w0, const LatticeData &lat)
{
    const auto &r = lat.red;
    const ThetaValues t = theta_all(pi * w0, r.tau, lat.series_terms);
    const cplx ratio = r.th3 * r.th4 * t.th2 / t.th1;
    const cplx wp = r.e[0] + pi * pi * ratio * ratio;
    const cplx c = r.th2 * r.th3 * r.th4;
    const cplx wpp = -2.0 * pi * pi * pi * c * c * t.th2 * t.th3 * t.th4 / (t.th1 * t.th1 * t.th1);
    return {wp, wpp};
}

} // namespace detail

// Builds the lattice data for Z + tau Z.  tol bounds the accepted
// discriminant (relative to |g2|^3 + 27 |g3|^2).
inline LatticeData lattice_data(cplx tau, double tol = 1e-10,
                                std::optional<int> series_terms = std::nullopt)
{
    if (!(tau.imag() > 0.0) || !std::isfinite(tau.real()) || !std::isfinite(tau.imag())) {
        throw DomainError("lattice_data requires Im(tau) > 0");
    }
    if (!(tol > 0.0 && tol <= 1e-6)) {
        throw DomainError("lattice_data tolerance must lie in (0, 1e-6]");
    }
    LatticeData lat;
    lat.tau = tau;
    lat.q = std::exp(cplx(0, 2 * pi) * tau);

    // Reduce to the fundamental domain, tracking gamma with tau' = gamma tau.
    auto &r = lat.red;
    long a = 1, b = 0, c = 0, d = 1;
    cplx t = tau;
    for (int iter = 0; iter < 1000; ++iter) {
        const long sh = std::lround(t.real());
        if (sh != 0) {
            t -= double(sh);
            a -= sh * c;
            b -= sh * d;
        }
        if (std::norm(t) < 1.0 - 1e-15) {
            t = -1.0 / t;
            const long na = -c, nb = -d, nc = a, nd = b;
            a = na, b = nb, c = nc, d = nd;
        } else {
            break;
        }
    }
    r.tau = t;
    r.a = int(a), r.b = int(b), r.c = int(c), r.d = int(d);
    r.scale = double(c) * tau + double(d);
    r.nome = std::exp(cplx(0, pi) * t);

    const auto env_terms = detail::env_series_terms();
    lat.series_terms = series_terms ? *series_terms : (env_terms ? *env_terms : detail::theta_terms_for(t));

    const detail::ThetaValues t0 = detail::theta_all(0.0, t, lat.series_terms);
    r.th2 = t0.th2, r.th3 = t0.th3, r.th4 = t0.th4;
    const double p2 = pi * pi / 3.0;
    const cplx t2 = std::pow(r.th2, 4), t3 = std::pow(r.th3, 4), t4 = std::pow(r.th4, 4);
    r.e = {p2 * (t3 + t4), -p2 * (t2 + t3), p2 * (t2 - t4)};

    const cplx qr = std::exp(cplx(0, 2 * pi) * t);
    const cplx E2 = 1.0 - 24.0 * detail::lambert(1, qr);
    const cplx E4 = 1.0 + 240.0 * detail::lambert(3, qr);
    const cplx E6 = 1.0 - 504.0 * detail::lambert(5, qr);
    const cplx g2r = (4.0 * std::pow(pi, 4) / 3.0) * E4;
    const cplx g3r = (8.0 * std::pow(pi, 6) / 27.0) * E6;
    r.eta1 = p2 * E2;
    r.eta2 = r.eta1 * t - cplx(0, 2 * pi);

    const cplx s = r.scale;
    lat.g2 = g2r / std::pow(s, 4);
    lat.g3 = g3r / std::pow(s, 6);
    lat.eta1 = (double(a) * r.eta1 - double(c) * r.eta2) / s;
    lat.eta2 = (double(d) * r.eta2 - double(b) * r.eta1) / s;

    const cplx delta_r = g2r * g2r * g2r - 27.0 * g3r * g3r;
    const double scale_r = std::norm(g2r) * std::abs(g2r) + 27.0 * std::norm(g3r);
    if (std::abs(delta_r) < tol * scale_r || std::abs(lat.discriminant()) < 1e-300) {
        throw DegenerateLattice("g2^3 - 27 g3^2 vanishes numerically");
    }

    // omega_1 / s = a - c tau', omega_2 / s = d tau' - b.
    const auto parity = [](long x) { return int(((x % 2) + 2) % 2); };
    const std::array<std::pair<int, int>, 3> coords{
        std::pair{parity(a), parity(-c)}, std::pair{parity(-b), parity(d)},
        std::pair{parity(a - b), parity(d - c)}};
    for (int k = 0; k < 3; ++k) {
        const auto [u, v] = coords[k];
        lat.half_map[k] = (u == 1 && v == 0) ? 0 : (u == 0 && v == 1) ? 1 : 2;
        lat.e[k] = r.e[lat.half_map[k]] / (s * s);
    }
    return lat;
}

// wp, wp' and wp'' = 6 wp^2 - g2 / 2 at z.
inline WpValues wp_eval(cplx z, const LatticeData &lat, double guard = 1e-8)
{
    const cplx s = lat.red.scale;
    const auto cell = detail::reduce_to_cell(z / s, lat.red.tau);
    if (std::abs(s) * detail::lattice_distance(cell.w0, lat.red.tau) < guard) {
        throw PoleProximity("wp evaluated within guard distance of a lattice point");
    }
    const auto [wp, wpp] = detail::wp_reduced_cell(cell.w0, lat);
    WpValues out;
    out.wp = wp / (s * s);
    out.wp_prime = wpp / (s * s * s);
    out.wp_second = 6.0 * out.wp * out.wp - 0.5 * lat.g2;
    return out;
}

inline cplx wp(cplx z, const LatticeData &lat)
{
    return wp_eval(z, lat).wp;
}

// zeta and sigma at z.  sigma is entire; zeta throws near lattice points.
inline ZetaSigma zeta_sigma_eval(cplx z, const LatticeData &lat, double guard = 1e-8)
{
    const auto &r = lat.red;
    const cplx s = r.scale;
    const auto cell = detail::reduce_to_cell(z / s, r.tau);
    const detail::ThetaValues t = detail::theta_all(pi * cell.w0, r.tau, lat.series_terms);
    const cplx th1p0 = r.th2 * r.th3 * r.th4;

    const double m = double(cell.m), n = double(cell.n);
    const cplx om = m + n * r.tau;
    const cplx eta_om = m * r.eta1 + n * r.eta2;

    // sigma(w0 + om) = (-1)^{m+n+mn} exp(eta(om) (w0 + om/2)) sigma(w0)
    const cplx sig0 = std::exp(0.5 * r.eta1 * cell.w0 * cell.w0) * t.th1 / (pi * th1p0);
    const long sign_exp = cell.m + cell.n + cell.m * cell.n;
    const double sgn = (sign_exp % 2 == 0) ? 1.0 : -1.0;
    const cplx sig = sgn * std::exp(eta_om * (cell.w0 + 0.5 * om)) * sig0;

    ZetaSigma out;
    out.sigma = s * sig;
    if (std::abs(s) * detail::lattice_distance(cell.w0, r.tau) < guard) {
        throw PoleProximity("zeta evaluated within guard distance of a lattice point");
    }
    const cplx zeta0 = r.eta1 * cell.w0 + pi * t.th1p / t.th1;
    out.zeta = (zeta0 + eta_om) / s;
    return out;
}

// The single-valued branch of (wp(z) - e_k)^{1/2}, k in {1,2,3}; odd and
// meromorphic, multiplied by -1 under the translations that flip its sign.
inline cplx wp_sqrt(cplx z, int k, const LatticeData &lat, double guard = 1e-8)
{
    if (k < 1 || k > 3) {
        throw DomainError("wp_sqrt index must be 1, 2 or 3");
    }
    const auto &r = lat.red;
    const cplx s = r.scale;
    const auto cell = detail::reduce_to_cell(z / s, r.tau);
    if (std::abs(s) * detail::lattice_distance(cell.w0, r.tau) < guard) {
        throw PoleProximity("wp_sqrt evaluated within guard distance of a lattice point");
    }
    const detail::ThetaValues t = detail::theta_all(pi * cell.w0, r.tau, lat.series_terms);
    cplx val;
    long flips = 0;
    switch (lat.half_map[k - 1]) {
    case 0:
        val = pi * r.th3 * r.th4 * t.th2 / t.th1;
        flips = cell.n;
        break;
    case 1:
        val = pi * r.th2 * r.th3 * t.th4 / t.th1;
        flips = cell.m;
        break;
    default:
        val = pi * r.th2 * r.th4 * t.th3 / t.th1;
        flips = cell.m + cell.n;
        break;
    }
    if (flips % 2 != 0) {
        val = -val;
    }
    return val / s;
}

// Representative of z in the period cell centred at 0 (lattice coordinates in [-1/2, 1/2)).
inline cplx reduce_to_centered_cell(cplx z, const LatticeData &lat)
{
    return detail::reduce_to_cell(z, lat.tau).w0;
}

// Distance from z to the nearest point of Z + tau Z.
inline double distance_to_lattice(cplx z, const LatticeData &lat)
{
    const cplx s = lat.red.scale;
    const auto cell = detail::reduce_to_cell(z / s, lat.red.tau);
    return std::abs(s) * detail::lattice_distance(cell.w0, lat.red.tau);
}

// Solves wp(z) = x with z in the centred cell; -z is the other preimage.
inline cplx invert_wp(cplx x, const LatticeData &lat, int max_iter = 60)
{
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
        throw DomainError("invert_wp requires a finite value");
    }
    const cplx halves[3] = {0.5, 0.5 * lat.tau, 0.5 + 0.5 * lat.tau};
    std::vector<cplx> seeds;
    if (std::abs(x) > 1e-300) {
        seeds.push_back(1.0 / std::sqrt(x));
    }
    for (int k = 0; k < 3; ++k) {
        const cplx ek = lat.e[k];
        const cplx second = 6.0 * ek * ek - 0.5 * lat.g2;
        seeds.push_back(halves[k] + std::sqrt(2.0 * (x - ek) / second));
    }
    constexpr int grid = 8;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double u = (i + 0.5) / grid - 0.5, v = (j + 0.5) / grid - 0.5;
            seeds.push_back(u + v * lat.tau);
        }
    }
    const double target = 1e-12 * (1.0 + std::abs(x));
    const double accept = 1e-9 * (1.0 + std::abs(x));

    auto residual = [&](cplx z) {
        try {
            return std::abs(wp_eval(z, lat, 1e-300).wp - x);
        } catch (const PoleProximity &) {
            return std::numeric_limits<double>::infinity();
        }
    };
    std::vector<std::pair<double, cplx>> ranked;
    for (cplx s : seeds) {
        ranked.emplace_back(residual(s), s);
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const auto &l, const auto &r) { return l.first < r.first; });

    cplx best_z = ranked.front().second;
    double best_res = ranked.front().first;
    for (std::size_t attempt = 0; attempt < std::min<std::size_t>(6, ranked.size()); ++attempt) {
        cplx z = ranked[attempt].second;
        for (int it = 0; it < max_iter; ++it) {
            WpValues w;
            try {
                w = wp_eval(z, lat, 1e-300);
            } catch (const PoleProximity &) {
                break;
            }
            const cplx f = w.wp - x;
            const double res = std::abs(f);
            if (res < best_res) {
                best_res = res;
                best_z = z;
            }
            if (res <= target) {
                break;
            }
            cplx step;
            if (std::abs(w.wp_prime) > 1e-14 * (1.0 + std::abs(w.wp))) {
                step = f / w.wp_prime;
            } else {
                // Critical point: use the quadratic model wp ~ wp + wp'' dz^2 / 2.
                step = -std::sqrt(-2.0 * f / w.wp_second);
            }
            // Damp large steps to stay within one cell.
            const double cap = 0.25 * std::min(1.0, std::abs(lat.tau));
            if (std::abs(step) > cap) {
                step *= cap / std::abs(step);
            }
            z -= step;
        }
        if (best_res <= target) {
            break;
        }
    }
    if (!(best_res <= accept)) {
        throw ConvergenceFailure("invert_wp: Newton refinement did not reach the residual bound");
    }
    return reduce_to_centered_cell(best_z, lat);
}

} // namespace lame3

#endif
