#include <cmath>
#include <complex>

#include "doctest.h"
#include "nld/shiftcalc.hpp"
#include "nld/specialfn.hpp"

using namespace nld;
using namespace nld::specialfn;
using std::complex;

namespace {

constexpr double kPi = 3.14159265358979323846;

// independent Taylor oracle for -1/(e^x - 1)
cplx logderiv_taylor(cplx x) {
    return -1.0 / x + 0.5 - x / 12.0 + x * x * x / 720.0 - std::pow(x, 5) / 30240.0;
}

// Euler's constant from the harmonic sum with tail correction (independent
// of the digamma implementation)
double euler_gamma_oracle() {
    const int n = 200;
    double h = 0.0;
    for (int k = 1; k <= n; ++k) h += 1.0 / k;
    double nn = n;
    return h - std::log(nn) - 1.0 / (2 * nn) + 1.0 / (12 * nn * nn) -
           1.0 / (120 * nn * nn * nn * nn);
}

// zeta(2) by direct series with Euler-Maclaurin tail correction
double zeta2_oracle() {
    const int n = 400;
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += 1.0 / (double(k) * k);
    double nn = n;
    return s + 1.0 / nn - 1.0 / (2 * nn * nn) + 1.0 / (6 * nn * nn * nn);
}

}  // namespace

TEST_CASE("zfun values") {
    CHECK(std::abs(zfun(std::log(2.0), ZMode::Value) - 2.0) < 1e-13);
    CHECK(std::abs(zfun(cplx(0.0, kPi), ZMode::Value) - 0.5) < 1e-13);
    // series regime against the Taylor oracle (relative accuracy 1e-13)
    for (cplx x : {cplx(1e-4, 0), cplx(0, 5e-4), cplx(3e-4, -4e-4)}) {
        cplx v = zfun(x, ZMode::LogDeriv);
        CHECK(std::abs(v - logderiv_taylor(x)) < 1e-13 * std::abs(v));
    }
    CHECK_THROWS_AS(zfun(cplx(0.0, 0.0), ZMode::Value), PoleError);
    CHECK_THROWS_AS(zfun(cplx(0.0, 2.0 * kPi), ZMode::Value), PoleError);
}

TEST_CASE("zfun log-derivatives by finite differences on |x|=0.5") {
    const double h = 1e-6;
    for (int k = 0; k < 12; ++k) {
        double t = 2.0 * kPi * (k + 0.37) / 12.0;
        cplx x = 0.5 * cplx(std::cos(t), std::sin(t));
        cplx fd = (std::log(zfun(x + h, ZMode::Value)) - std::log(zfun(x - h, ZMode::Value))) /
                  (2.0 * h);
        CHECK(std::abs(zfun(x, ZMode::LogDeriv) - fd) < 1e-8);
        cplx fd2 = (zfun(x + h, ZMode::LogDeriv) - zfun(x - h, ZMode::LogDeriv)) / (2.0 * h);
        CHECK(std::abs(zfun(x, ZMode::LogDeriv2) - fd2) < 1e-8);
    }
}

TEST_CASE("conjugation symmetry") {
    cplx x(0.3, 0.4);
    for (auto m : {ZMode::Value, ZMode::LogDeriv, ZMode::LogDeriv2})
        CHECK(std::abs(zfun(std::conj(x), m) - std::conj(zfun(x, m))) < 1e-14);
    cplx s(0.11, 0.23);
    for (auto m : {ZetaMode::Value, ZetaMode::LogDeriv, ZetaMode::LogDeriv2})
        CHECK(std::abs(zeta1p(std::conj(s), m) - std::conj(zeta1p(s, m))) < 1e-12);
    CHECK(std::abs(digamma(std::conj(cplx(1.3, 0.7))) - std::conj(digamma(cplx(1.3, 0.7)))) <
          1e-13);
}

TEST_CASE("residues by circle quadrature equal 1") {
    cplx rz = residue_circle([](cplx x) { return zfun(x, ZMode::Value); }, 0.0, 0.3);
    CHECK(std::abs(rz - 1.0) < 1e-10);
    cplx rzeta = residue_circle([](cplx s) { return zeta1p(s, ZetaMode::Value); }, 0.0, 0.15);
    CHECK(std::abs(rzeta - 1.0) < 1e-10);
}

TEST_CASE("zeta1p examples") {
    CHECK(std::abs(zeta1p(1.0, ZetaMode::Value) - zeta2_oracle()) < 1e-9);
    CHECK(std::abs(zeta1p(1.0, ZetaMode::Value) - 1.6449340668482264365) < 1e-12);

    // Laurent behavior near 0: zeta(1+s) = 1/s + gamma + O(s)
    double gamma = euler_gamma_oracle();
    for (cplx s : {cplx(1e-3, 0), cplx(0, 1e-3)}) {
        CHECK(std::abs(zeta1p(s, ZetaMode::Value) - 1.0 / s - gamma) < 1e-2);
        CHECK(std::abs(zeta1p(s, ZetaMode::LogDeriv) + 1.0 / s - gamma) < 1e-2);
    }

    // quotient-of-Laurent oracle: build zeta'/zeta(1+s) from the series data
    LaurentExpansion lz = zeta1p_laurent();
    cplx s(0.08, -0.05);
    const double h = 1e-6;
    cplx fd = (std::log(lz.eval(s + h)) - std::log(lz.eval(s - h))) / (2.0 * h);
    CHECK(std::abs(zeta1p(s, ZetaMode::LogDeriv) - fd) < 1e-8);
}

TEST_CASE("zeta1p reference values across both evaluation paths") {
    // high-precision reference values (30-digit arithmetic, frozen)
    CHECK(std::abs(zeta1p(0.3, ZetaMode::Value) - 3.9319492118095437366) < 1e-11);
    CHECK(std::abs(zeta1p(cplx(0.0, 0.5), ZetaMode::Value) -
                   cplx(0.57843302109931116894, -1.9635494964529787846)) < 1e-11);
    CHECK(std::abs(zeta1p(cplx(0.1, 100.0), ZetaMode::Value) -
                   cplx(1.5367348822670199455, -0.070123460836825679079)) < 1e-9);
    CHECK(std::abs(zeta1p(0.2, ZetaMode::LogDeriv) - (-4.4583372451498852567)) < 1e-11);
    CHECK(std::abs(zeta1p(0.4, ZetaMode::LogDeriv2) - 6.0977220608741871311) < 1e-9);
}

TEST_CASE("zeta1p paths agree in the switchover annulus") {
    for (double r : {0.2, 0.25, 0.3, 0.4}) {
        for (double t = 0.0; t < 6.2; t += 0.7) {
            cplx s = r * cplx(std::cos(t), std::sin(t));
            for (auto m : {ZetaMode::Value, ZetaMode::LogDeriv, ZetaMode::LogDeriv2}) {
                cplx a = detail::zeta1p_series_path(s, m);
                cplx b = detail::zeta1p_em_path(s, m);
                CHECK(std::abs(a - b) < 1e-11 * std::max(1.0, std::abs(a)));
            }
        }
    }
}

TEST_CASE("gamma family") {
    CHECK(std::abs(gamma_family(0.0, GammaMode::RatioElliptic) - 1.0) < 1e-14);
    CHECK(std::abs(gamma_family(0.5, GammaMode::RatioElliptic) - 2.0) < 1e-12);
    CHECK(std::abs(digamma(1.0) + euler_gamma_oracle()) < 1e-9);

    // frozen high-precision references
    CHECK(std::abs(digamma(0.25) - (-4.2274535333762654081)) < 1e-12);
    CHECK(std::abs(digamma(cplx(1.0, 2.0)) -
                   cplx(0.71459151537397752666, 1.3208072826422302284)) < 1e-12);
    CHECK(std::abs(log_gamma(cplx(3.7, 1.1)) -
                   cplx(1.2439059123254515618, 1.3043537934472649395)) < 1e-12);
    CHECK(std::abs(gamma_family(0.2, GammaMode::RatioElliptic) - 1.2679910129399835822) < 1e-12);
    CHECK(std::abs(gamma_family(cplx(0.2, 0.3), GammaMode::RatioDirichlet) -
                   cplx(0.57483761171129013555, 1.7834851518123801873)) < 1e-12);

    // digamma by finite differences of log gamma
    cplx z(2.3, -0.8);
    const double h = 1e-6;
    cplx fd = (log_gamma(z + h) - log_gamma(z - h)) / (2.0 * h);
    CHECK(std::abs(digamma(z) - fd) < 1e-8);
}

TEST_CASE("laurent eval matches function values") {
    LaurentExpansion l = zfun_laurent(ZMode::Value);
    cplx x(0.01, 0.02);
    CHECK(std::abs(l.eval(x) - zfun(x, ZMode::Value)) < 1e-12);
    CHECK(l.coefficients.size() >= static_cast<std::size_t>(l.pole_order + 1));
}
