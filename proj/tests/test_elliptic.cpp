#include <gtest/gtest.h>

#include <random>

#include "lame3/elliptic.hpp"

using namespace lame3;

namespace
{

const cplx I(0, 1);

std::vector<cplx> sample_taus()
{
    return {I, 0.5 + I, 0.3 + 0.8 * I, 0.2 + 1.1 * I, -0.41 + 0.37 * I, 0.1 + 0.15 * I, 3.7 + 2.4 * I};
}

cplx random_point(std::mt19937 &rng, cplx tau)
{
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (;;) {
        const cplx z = u(rng) + u(rng) * tau;
        if (std::abs(z) > 0.05) {
            return z;
        }
    }
}

} // namespace

TEST(Lattice, SquareLatticeInvariants)
{
    const auto lat = lattice_data(I);
    EXPECT_LT(std::abs(lat.g3), 1e-12);
    EXPECT_GT(lat.g2.real(), 0.0);
    EXPECT_LT(std::abs(lat.g2.imag()), 1e-12);
    // Independent oracle: g2(i) = Gamma(1/4)^8 / (16 pi^2)... via E4(i) = 3 Gamma(1/4)^8 / (2 pi)^6.
    const double gq = std::tgamma(0.25);
    const double e4 = 3 * std::pow(gq, 8) / std::pow(2 * pi, 6);
    EXPECT_NEAR(lat.g2.real(), 4 * std::pow(pi, 4) / 3 * e4, 1e-9);
    const double half = std::sqrt(lat.g2.real()) / 2;
    EXPECT_NEAR(lat.e[0].real(), half, 1e-10);
    EXPECT_NEAR(lat.e[1].real(), -half, 1e-10);
    EXPECT_LT(std::abs(lat.e[2]), 1e-12);
    EXPECT_GT(lat.e[0].real(), lat.e[2].real());
    EXPECT_GT(lat.e[2].real(), lat.e[1].real());
    EXPECT_NEAR(lat.eta1.real(), pi, 1e-12);
}

TEST(Lattice, ImaginaryAxisOrdering)
{
    for (double t : {0.4, 0.8, 1.3, 2.5}) {
        const auto lat = lattice_data(cplx(0, t));
        EXPECT_GT(lat.e[0].real(), lat.e[2].real()) << t;
        EXPECT_GT(lat.e[2].real(), lat.e[1].real()) << t;
        for (const auto &e : lat.e) {
            EXPECT_LT(std::abs(e.imag()), 1e-9 * std::abs(e) + 1e-12);
        }
    }
}

TEST(Lattice, Invariants)
{
    for (cplx tau : sample_taus()) {
        const auto lat = lattice_data(tau);
        double emax = 0;
        for (auto e : lat.e) {
            emax = std::max(emax, std::abs(e));
        }
        EXPECT_LE(std::abs(lat.e[0] + lat.e[1] + lat.e[2]), 1e-12 * emax) << tau;
        const double scale = std::pow(std::abs(lat.g2), 1.5);
        for (auto e : lat.e) {
            EXPECT_LE(std::abs(4.0 * e * e * e - lat.g2 * e - lat.g3), 1e-10 * scale) << tau;
        }
        EXPECT_LE(std::abs(lat.eta1 * tau - lat.eta2 - cplx(0, 2 * pi)), 1e-10) << tau;
    }
}

TEST(Lattice, ShiftInvariance)
{
    for (cplx tau : sample_taus()) {
        const auto a = lattice_data(tau), b = lattice_data(tau + 1.0);
        EXPECT_LE(std::abs(a.g2 - b.g2), 1e-12 * std::max(1.0, std::abs(a.g2))) << tau;
        EXPECT_LE(std::abs(a.g3 - b.g3), 1e-12 * std::max(1.0, std::abs(a.g3))) << tau;
    }
}

TEST(Lattice, ModularInversion)
{
    // Z + tau Z = tau (Z + (-1/tau) Z): g2(tau) = tau^-4 g2(-1/tau).
    for (cplx tau : {0.2 + 1.1 * I, 0.3 + 0.8 * I}) {
        const auto a = lattice_data(tau), b = lattice_data(-1.0 / tau);
        EXPECT_LE(std::abs(a.g2 - b.g2 / std::pow(tau, 4)), 1e-10 * std::abs(a.g2));
        EXPECT_LE(std::abs(a.g3 - b.g3 / std::pow(tau, 6)), 1e-10 * std::abs(a.g2));
    }
}

TEST(Lattice, Rejects)
{
    EXPECT_THROW(lattice_data(cplx(0.3, -1)), DomainError);
    EXPECT_THROW(lattice_data(cplx(0.3, 0)), DomainError);
    EXPECT_THROW(lattice_data(I, 1e-3), DomainError);
    EXPECT_THROW(lattice_data(cplx(0, 60)), DegenerateLattice);
}

TEST(Wp, HalfPeriods)
{
    for (cplx tau : sample_taus()) {
        const auto lat = lattice_data(tau);
        const cplx halves[3] = {0.5, 0.5 * tau, 0.5 + 0.5 * tau};
        for (int k = 0; k < 3; ++k) {
            const auto w = wp_eval(halves[k], lat);
            EXPECT_LE(std::abs(w.wp - lat.e[k]), 1e-10 * (1 + std::abs(lat.e[k]))) << tau << k;
            EXPECT_LE(std::abs(w.wp_prime), 1e-8 * std::pow(1 + std::abs(lat.e[k]), 1.5)) << tau << k;
        }
    }
}

TEST(Wp, ParityAndPeriodicity)
{
    for (cplx tau : sample_taus()) {
        const auto lat = lattice_data(tau);
        const cplx z = 0.31 + 0.17 * tau;
        const auto a = wp_eval(z, lat), b = wp_eval(-z, lat);
        EXPECT_LE(std::abs(a.wp - b.wp), 1e-11 * (1 + std::abs(a.wp)));
        EXPECT_LE(std::abs(a.wp_prime + b.wp_prime), 1e-10 * (1 + std::abs(a.wp_prime)));
        std::mt19937 rng(7);
        for (int i = 0; i < 20; ++i) {
            const cplx w = random_point(rng, tau);
            const cplx v = wp(w, lat);
            EXPECT_LE(std::abs(wp(w + 1.0, lat) - v), 1e-10 * (1 + std::abs(v)));
            EXPECT_LE(std::abs(wp(w + tau, lat) - v), 1e-10 * (1 + std::abs(v)));
            EXPECT_LE(std::abs(wp(w - 2.0 * tau + 3.0, lat) - v), 1e-10 * (1 + std::abs(v)));
        }
    }
}

TEST(Wp, DifferentialIdentity)
{
    std::mt19937 rng(42);
    for (cplx tau : sample_taus()) {
        const auto lat = lattice_data(tau);
        for (int i = 0; i < 100; ++i) {
            const cplx z = random_point(rng, tau);
            const auto w = wp_eval(z, lat);
            const cplx rhs = 4.0 * w.wp * w.wp * w.wp - lat.g2 * w.wp - lat.g3;
            EXPECT_LE(std::abs(w.wp_prime * w.wp_prime - rhs), 1e-10 * (1 + std::pow(std::abs(w.wp), 3)))
                << tau << " " << z;
        }
    }
}

TEST(Wp, DerivativeByDifferences)
{
    const auto lat = lattice_data(0.2 + 1.1 * I);
    const cplx z = 0.27 + 0.33 * lat.tau;
    const double h = 1e-5;
    const cplx fd = (wp(z + h, lat) - wp(z - h, lat)) / (2 * h);
    const auto w = wp_eval(z, lat);
    EXPECT_LE(std::abs(fd - w.wp_prime), 1e-6 * std::abs(w.wp_prime));
    const cplx fd2 = (wp_eval(z + h, lat).wp_prime - wp_eval(z - h, lat).wp_prime) / (2 * h);
    EXPECT_LE(std::abs(fd2 - w.wp_second), 1e-6 * std::abs(w.wp_second));
}

TEST(Wp, LaurentNearPole)
{
    const auto lat = lattice_data(0.3 + 0.8 * I);
    const cplx z = 0.01 * cplx(0.6, 0.8);
    // wp = z^-2 + g2 z^2 / 20 + g3 z^4 / 28 + ...
    const cplx series = 1.0 / (z * z) + lat.g2 * z * z / 20.0 + lat.g3 * std::pow(z, 4) / 28.0;
    EXPECT_LE(std::abs(wp(z, lat) - series), 1e-8);
}

TEST(Wp, PoleGuard)
{
    const auto lat = lattice_data(I);
    EXPECT_THROW(wp_eval(1e-10, lat), PoleProximity);
    EXPECT_THROW(wp_eval(1.0 + I + 1e-10, lat), PoleProximity);
    EXPECT_NO_THROW(wp_eval(1e-6, lat));
}

TEST(Zeta, QuasiPeriodsAndOddness)
{
    for (cplx tau : sample_taus()) {
        const auto lat = lattice_data(tau);
        const cplx z = 0.21 - 0.13 * tau;
        const auto a = zeta_sigma_eval(z, lat);
        EXPECT_LE(std::abs(zeta_sigma_eval(z + 1.0, lat).zeta - a.zeta - lat.eta1), 1e-10) << tau;
        EXPECT_LE(std::abs(zeta_sigma_eval(z + tau, lat).zeta - a.zeta - lat.eta2), 1e-10) << tau;
        const auto b = zeta_sigma_eval(-z, lat);
        EXPECT_LE(std::abs(a.zeta + b.zeta), 1e-11 * (1 + std::abs(a.zeta)));
        EXPECT_LE(std::abs(a.sigma + b.sigma), 1e-11 * (1 + std::abs(a.sigma)));
    }
}

TEST(Zeta, DerivativeIsMinusWp)
{
    std::mt19937 rng(3);
    const double h = 1e-5;
    for (cplx tau : sample_taus()) {
        const auto lat = lattice_data(tau);
        for (int i = 0; i < 10; ++i) {
            const cplx z = random_point(rng, tau);
            const cplx fd = (zeta_sigma_eval(z + h, lat).zeta - zeta_sigma_eval(z - h, lat).zeta) / (2 * h);
            const cplx w = wp(z, lat);
            EXPECT_LE(std::abs(fd + w), 1e-6 * (1 + std::abs(w))) << tau << z;
        }
    }
}

TEST(Sigma, LogDerivativeIsZeta)
{
    const double h = 1e-5;
    for (cplx tau : sample_taus()) {
        const auto lat = lattice_data(tau);
        for (cplx z : {0.3 + 0.2 * tau, -0.45 + 0.4 * tau, 1.3 + 0.7 * tau}) {
            const auto s = zeta_sigma_eval(z, lat);
            const cplx fd = (zeta_sigma_eval(z + h, lat).sigma - zeta_sigma_eval(z - h, lat).sigma) /
                            (2 * h * s.sigma);
            EXPECT_LE(std::abs(fd - s.zeta), 1e-6 * (1 + std::abs(s.zeta))) << tau << z;
        }
        // sigma(z) = z + O(z^5)
        EXPECT_LE(std::abs(zeta_sigma_eval(1e-3, lat).sigma - 1e-3), 1e-12);
    }
}

TEST(WpSqrt, SquaresAndSigns)
{
    for (cplx tau : sample_taus()) {
        const auto lat = lattice_data(tau);
        const cplx z = 0.23 + 0.31 * tau;
        const cplx w = wp(z, lat);
        for (int k = 1; k <= 3; ++k) {
            const cplx r = wp_sqrt(z, k, lat);
            EXPECT_LE(std::abs(r * r - (w - lat.e[k - 1])), 1e-10 * (1 + std::abs(w))) << tau << k;
        }
        // Sign pattern: branch k is invariant under omega_k, flips under the others.
        const cplx shifts[2] = {1.0, tau};
        const int expected[3][2] = {{1, -1}, {-1, 1}, {-1, -1}};
        for (int k = 1; k <= 3; ++k) {
            for (int j = 0; j < 2; ++j) {
                const cplx ratio = wp_sqrt(z + shifts[j], k, lat) / wp_sqrt(z, k, lat);
                EXPECT_LE(std::abs(ratio - double(expected[k - 1][j])), 1e-9) << tau << k << j;
            }
        }
        EXPECT_LE(std::abs(wp_sqrt(0.5 * (1.0 + tau), 3, lat)), 1e-7);
    }
}

TEST(InvertWp, RoundTrip)
{
    std::mt19937 rng(11);
    for (cplx tau : sample_taus()) {
        const auto lat = lattice_data(tau);
        for (int i = 0; i < 20; ++i) {
            const cplx z0 = random_point(rng, tau);
            const cplx x = wp(z0, lat);
            const cplx z = invert_wp(x, lat);
            EXPECT_LE(std::abs(wp(z, lat) - x), 1e-9 * (1 + std::abs(x)));
            const double d = std::min(distance_to_lattice(z - z0, lat), distance_to_lattice(z + z0, lat));
            EXPECT_LE(d, 1e-6) << tau << z0;
            auto [u, v] = detail::lattice_coords(z, tau);
            EXPECT_GE(u, -0.5 - 1e-12);
            EXPECT_LT(u, 0.5 + 1e-12);
            EXPECT_GE(v, -0.5 - 1e-12);
            EXPECT_LT(v, 0.5 + 1e-12);
        }
    }
}

TEST(InvertWp, HalfPeriodAndLarge)
{
    const auto lat = lattice_data(0.3 + 0.8 * I);
    const cplx z = invert_wp(lat.e[0], lat);
    EXPECT_LE(distance_to_lattice(z - 0.5, lat), 1e-6);
    double prev = 1e9;
    for (double mag : {1e2, 1e4, 1e6}) {
        const cplx x(mag, 0.3 * mag);
        const cplx r = invert_wp(x, lat);
        EXPECT_LT(std::abs(r), prev);
        prev = std::abs(r);
        const cplx lead = 1.0 / std::sqrt(x);
        EXPECT_LE(std::min(std::abs(r - lead), std::abs(r + lead)), 1e-2 * std::abs(lead));
    }
    EXPECT_THROW(invert_wp(cplx(NAN, 0), lat), DomainError);
}
