#include "nld/specialfn.hpp"

#include <cmath>
#include <cstddef>

namespace nld {

cplx LaurentExpansion::eval(cplx s) const {
    cplx acc = 0.0;
    // Horner over the analytic tail, singular part added explicitly.
    for (std::size_t k = coefficients.size(); k-- > static_cast<std::size_t>(pole_order);)
        acc = acc * s + coefficients[k];
    cplx sing = 0.0;
    cplx spow = s;
    for (int k = pole_order - 1; k >= 0; --k) {
        sing += coefficients[k] / spow;
        spow *= s;
    }
    return sing + acc;
}

namespace specialfn {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Bernoulli numbers B_2..B_30.
constexpr double kBernoulli[] = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
};

// Stieltjes constants gamma_0..gamma_21 (zeta(1+s) = 1/s + sum (-1)^n g_n s^n / n!).
constexpr double kStieltjes[] = {
    0.57721566490153286061,
    -0.072815845483676724861,
    -0.0096903631928723184845,
    0.0020538344203033458662,
    0.0023253700654673000575,
    0.00079332381730106270175,
    -0.00023876934543019960987,
    -0.00052728956705775104607,
    -0.0003521233538030395096,
    -0.000034394774418088048178,
    0.00020533281490906479468,
    0.00027018443954390352667,
    0.00016727291210514019335,
    -0.00002746380660376015886,
    -0.00020920926205929994584,
    -0.00028346865532024144664,
    -0.00019969685830896977471,
    0.000026277037109918336699,
    0.00030736840814925282659,
    0.00050360545304735562906,
    0.0004663435615115594494,
    0.00010443776975600011581,
};
constexpr int kNumStieltjes = sizeof(kStieltjes) / sizeof(kStieltjes[0]);

void check_z_pole(cplx x) {
    double k = std::round(x.imag() / kTwoPi);
    double di = x.imag() - kTwoPi * k;
    if (x.real() * x.real() + di * di < 1e-28)
        throw PoleError("zfun: argument within 1e-14 of lattice pole 2*pi*i*k");
}

// Small-|x| series. 1/(e^x - 1) = 1/x - 1/2 + x/12 - x^3/720 + x^5/30240 - ...
cplx z_value_series(cplx x) {
    cplx x2 = x * x;
    return 1.0 / x + 0.5 + x * (1.0 / 12.0 + x2 * (-1.0 / 720.0 + x2 * (1.0 / 30240.0)));
}

cplx z_logderiv_series(cplx x) {
    cplx x2 = x * x;
    return -1.0 / x + 0.5 + x * (-1.0 / 12.0 + x2 * (1.0 / 720.0 - x2 * (1.0 / 30240.0)));
}

cplx z_logderiv2_series(cplx x) {
    cplx x2 = x * x;
    return 1.0 / x2 - 1.0 / 12.0 + x2 * (1.0 / 240.0 - x2 * (5.0 / 30240.0));
}

// (value, d/dw, d^2/dw^2) triple for the Euler-Maclaurin terms.
struct D2 {
    cplx f, f1, f2;
};

D2 pow_neg(double base, cplx w) {
    // base^-w with derivatives in w
    double lb = std::log(base);
    cplx v = std::exp(-w * lb);
    return {v, -lb * v, lb * lb * v};
}

// zeta(w), zeta'(w), zeta''(w) by Euler-Maclaurin; valid well right of the
// critical strip edges we use (Re w in [-1, 3], |Im w| <= ~1100).
void zeta_em(cplx w, cplx& z0, cplx& z1, cplx& z2) {
    int K = static_cast<int>(std::ceil(18.0 + 1.4 * std::abs(w.imag())));
    const int J = 13;
    z0 = z1 = z2 = 0.0;
    for (int k = 1; k < K; ++k) {
        D2 t = pow_neg(static_cast<double>(k), w);
        z0 += t.f;
        z1 += t.f1;
        z2 += t.f2;
    }
    D2 Kw = pow_neg(static_cast<double>(K), w);  // K^-w
    z0 += 0.5 * Kw.f;
    z1 += 0.5 * Kw.f1;
    z2 += 0.5 * Kw.f2;

    // K^(1-w)/(w-1) = K * K^-w / (w-1)
    cplx inv = 1.0 / (w - 1.0);
    cplx u0 = static_cast<double>(K) * Kw.f;
    cplx u1 = static_cast<double>(K) * Kw.f1;
    cplx u2 = static_cast<double>(K) * Kw.f2;
    z0 += u0 * inv;
    z1 += u1 * inv - u0 * inv * inv;
    z2 += u2 * inv - 2.0 * u1 * inv * inv + 2.0 * u0 * inv * inv * inv;

    // Bernoulli tail: sum_j B_2j/(2j)! * (w)_(2j-1) * K^(-w-2j+1)
    // Pochhammer product and its w-derivatives accumulated incrementally.
    cplx P0 = 1.0, P1 = 0.0, P2 = 0.0;
    double fact = 1.0;  // (2j)!
    int idx = 0;
    double lastmag = 0.0;
    for (int j = 1; j <= J; ++j) {
        // extend product over (w + i) from the previous top index up to 2j-2
        int lo = (j == 1) ? 0 : 2 * (j - 1) - 1;
        for (int i = lo; i <= 2 * j - 2; ++i) {
            cplx c = w + static_cast<double>(i);
            P2 = P2 * c + 2.0 * P1;
            P1 = P1 * c + P0;
            P0 = P0 * c;
        }
        fact *= (2.0 * j) * (2.0 * j - 1.0);
        double coeff = kBernoulli[idx++] / fact;
        // K^(-w-2j+1) = K^(1-2j) * K^-w
        double scale = std::pow(static_cast<double>(K), 1.0 - 2.0 * j);
        cplx g0 = scale * Kw.f, g1 = scale * Kw.f1, g2 = scale * Kw.f2;
        z0 += coeff * (P0 * g0);
        z1 += coeff * (P1 * g0 + P0 * g1);
        z2 += coeff * (P2 * g0 + 2.0 * P1 * g1 + P0 * g2);
        lastmag = std::abs(coeff * P0 * g0);
    }
    if (lastmag > 1e-13 * std::max(1.0, std::abs(z0)))
        throw NonConvergenceError("zeta1p: Euler-Maclaurin tail bound exceeds tolerance");
}

// Taylor coefficients of P(s) = s*zeta(1+s): P = 1 + sum_n (-1)^n g_n s^(n+1)/n!
void p_series(cplx s, cplx& P, cplx& P1, cplx& P2) {
    P = 1.0;
    P1 = 0.0;
    P2 = 0.0;
    double nf = 1.0, sign = 1.0;
    cplx spow = s;       // s^(n+1)
    cplx spow1 = 1.0;    // s^n
    cplx spow2 = 0.0;    // s^(n-1), times factor handled below
    for (int n = 0; n < kNumStieltjes; ++n) {
        double c = sign * kStieltjes[n] / nf;
        P += c * spow;
        P1 += c * static_cast<double>(n + 1) * spow1;
        if (n >= 1) P2 += c * static_cast<double>((n + 1) * n) * spow2;
        sign = -sign;
        nf *= (n + 1.0);
        spow2 = spow1;
        spow1 = spow;
        spow *= s;
    }
}

// ---- Lanczos log-gamma (g = 607/128, 15 coefficients) ----
constexpr double kLanczosG = 4.7421875;
constexpr double kLanczosC[] = {
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
};

constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

cplx log_gamma_lanczos(cplx z) {
    // valid for Re z > 0; callers reflect first
    cplx sum = kLanczosC[0];
    for (int i = 1; i < 15; ++i) sum += kLanczosC[i] / (z + static_cast<double>(i - 1));
    cplx t = z + kLanczosG - 0.5;
    return (z - 0.5) * std::log(t) - t + kLogSqrt2Pi + std::log(sum);
}

cplx log_gamma_impl(cplx z) {
    if (z.real() >= 0.5) return log_gamma_lanczos(z);
    // reflection: log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1-z)
    cplx s = std::sin(kPi * z);
    if (std::abs(s) < 1e-300) throw PoleError("log_gamma: argument at a Gamma pole");
    return std::log(kPi / s) - log_gamma_lanczos(1.0 - z);
}

cplx digamma_impl(cplx z) {
    if (z.real() < 0.5) {
        // psi(z) = psi(1-z) - pi*cot(pi z)
        cplx t = std::tan(kPi * z);
        if (std::abs(t) < 1e-300) throw PoleError("digamma: argument at a pole");
        return digamma_impl(1.0 - z) - kPi / t;
    }
    cplx acc = 0.0;
    while (std::abs(z) < 16.0) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    cplx inv = 1.0 / z, inv2 = inv * inv;
    // asymptotic: log z - 1/(2z) - sum B_2n/(2n z^2n)
    cplx r = std::log(z) - 0.5 * inv;
    cplx p = inv2;
    static const double coeff[] = {1.0 / 12.0,  -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0,
                                   1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0};
    for (double c : coeff) {
        r -= c * p;
        p *= inv2;
    }
    return acc + r;
}

}  // namespace

cplx zfun(cplx x, ZMode mode) {
    // quick reject: pole/series handling only matters near the lattice
    if (x.real() * x.real() > 1e-6 || std::abs(x.imag()) > 1.5e-3) {
        double k = std::round(x.imag() / kTwoPi);
        double di = x.imag() - kTwoPi * k;
        double d2 = x.real() * x.real() + di * di;
        if (d2 > 1e-6) {
            switch (mode) {
                case ZMode::Value: {
                    if (x.real() < -1.0) {
                        cplx ex = std::exp(x);
                        return -ex / (1.0 - ex);
                    }
                    return 1.0 / (1.0 - std::exp(-x));
                }
                case ZMode::LogDeriv: {
                    if (x.real() > 1.0) {
                        cplx emx = std::exp(-x);
                        return -emx / (1.0 - emx);
                    }
                    return -1.0 / (std::exp(x) - 1.0);
                }
                case ZMode::LogDeriv2: {
                    if (x.real() > 1.0) {
                        cplx emx = std::exp(-x);
                        cplx d = 1.0 - emx;
                        return emx / (d * d);
                    }
                    cplx d = std::exp(x) - 1.0;
                    return std::exp(x) / (d * d);
                }
            }
        }
        if (d2 < 1e-28)
            throw PoleError("zfun: argument within 1e-14 of lattice pole 2*pi*i*k");
        // near a nonzero lattice pole: shift to the principal copy and use
        // the series (z is 2*pi*i periodic; LogDeriv2 too; Value as well)
        cplx xs(x.real(), di);
        switch (mode) {
            case ZMode::Value: return z_value_series(xs);
            case ZMode::LogDeriv: return z_logderiv_series(xs);
            case ZMode::LogDeriv2: return z_logderiv2_series(xs);
        }
    }
    check_z_pole(x);
    if (std::abs(x) < 1e-3) {
        switch (mode) {
            case ZMode::Value: return z_value_series(x);
            case ZMode::LogDeriv: return z_logderiv_series(x);
            case ZMode::LogDeriv2: return z_logderiv2_series(x);
        }
    }
    switch (mode) {
        case ZMode::Value: {
            if (x.real() < -1.0) {
                // 1/(1-e^-x) = -e^x/(1-e^x), keeps exp argument bounded
                cplx ex = std::exp(x);
                return -ex / (1.0 - ex);
            }
            return 1.0 / (1.0 - std::exp(-x));
        }
        case ZMode::LogDeriv: {
            if (x.real() > 1.0) {
                cplx emx = std::exp(-x);
                return -emx / (1.0 - emx);
            }
            return -1.0 / (std::exp(x) - 1.0);
        }
        case ZMode::LogDeriv2: {
            if (x.real() > 1.0) {
                cplx emx = std::exp(-x);
                cplx d = 1.0 - emx;
                return emx / (d * d);
            }
            cplx d = std::exp(x) - 1.0;
            return std::exp(x) / (d * d);
        }
    }
    return 0.0;  // unreachable
}

LaurentExpansion zfun_laurent(ZMode mode) {
    switch (mode) {
        case ZMode::Value:
            return {1, {1.0, 0.5, 1.0 / 12.0, 0.0, -1.0 / 720.0, 0.0, 1.0 / 30240.0}};
        case ZMode::LogDeriv:
            return {1, {-1.0, 0.5, -1.0 / 12.0, 0.0, 1.0 / 720.0, 0.0, -1.0 / 30240.0}};
        case ZMode::LogDeriv2:
            return {2, {1.0, 0.0, -1.0 / 12.0, 0.0, 1.0 / 240.0, 0.0, -5.0 / 30240.0}};
    }
    return {};
}

namespace detail {

cplx zeta1p_series_path(cplx s, ZetaMode mode) {
    cplx P, P1, P2;
    p_series(s, P, P1, P2);
    switch (mode) {
        case ZetaMode::Value: return P / s;
        case ZetaMode::LogDeriv: return P1 / P - 1.0 / s;
        case ZetaMode::LogDeriv2: {
            cplx ld = P1 / P;
            return (P2 / P - ld * ld) + 1.0 / (s * s);
        }
    }
    return 0.0;
}

cplx zeta1p_em_path(cplx s, ZetaMode mode) {
    cplx z0, z1, z2;
    zeta_em(1.0 + s, z0, z1, z2);
    switch (mode) {
        case ZetaMode::Value: return z0;
        case ZetaMode::LogDeriv: return z1 / z0;
        case ZetaMode::LogDeriv2: {
            cplx ld = z1 / z0;
            return z2 / z0 - ld * ld;
        }
    }
    return 0.0;
}

}  // namespace detail

cplx zeta1p(cplx s, ZetaMode mode) {
    if (std::abs(s) < 1e-14) throw PoleError("zeta1p: argument at the pole s=0");
    if (std::abs(s.real()) > 2.0 || std::abs(s.imag()) > 1100.0)
        throw ValidationError("zeta1p: argument outside supported strip");
    if (std::abs(s) < 0.25) return detail::zeta1p_series_path(s, mode);
    return detail::zeta1p_em_path(s, mode);
}

LaurentExpansion zeta1p_laurent() {
    LaurentExpansion e;
    e.pole_order = 1;
    e.coefficients.push_back(1.0);
    double nf = 1.0, sign = 1.0;
    for (int n = 0; n < kNumStieltjes; ++n) {
        e.coefficients.push_back(sign * kStieltjes[n] / nf);
        sign = -sign;
        nf *= (n + 1.0);
    }
    return e;
}

cplx gamma_family(cplx s, GammaMode mode) {
    switch (mode) {
        case GammaMode::LogGamma: return log_gamma_impl(s);
        case GammaMode::Digamma: return digamma_impl(s);
        case GammaMode::RatioElliptic: {
            if (std::abs(s) < 1e-300) return 1.0;
            cplx num = 1.0 - s, den = 1.0 + s;
            double dn = std::abs(num - std::round(num.real())) + std::abs(num.imag());
            if (num.real() <= 0.5 && std::abs(num - std::round(num.real())) < 1e-14 &&
                std::round(num.real()) <= 0.0)
                throw PoleError("gamma ratio: numerator at Gamma pole");
            (void)dn;
            return std::exp(log_gamma_impl(num) - log_gamma_impl(den));
        }
        case GammaMode::RatioDirichlet: {
            cplx num = 0.25 - 0.5 * s, den = 0.25 + 0.5 * s;
            return std::exp(log_gamma_impl(num) - log_gamma_impl(den));
        }
    }
    return 0.0;  // unreachable
}

}  // namespace specialfn
}  // namespace nld
