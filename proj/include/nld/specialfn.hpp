#ifndef NLD_SPECIALFN_HPP
#define NLD_SPECIALFN_HPP

#include <complex>
#include <vector>

#include "nld/errors.hpp"

namespace nld {

using cplx = std::complex<double>;

// Truncated Laurent expansion about a point, coefficients listed from the
// most singular term: f(s) = sum_k coefficients[k] * s^(k - pole_order).
struct LaurentExpansion {
    int pole_order = 0;
    std::vector<cplx> coefficients;

    cplx eval(cplx s) const;
};

namespace specialfn {

enum class ZMode { Value, LogDeriv, LogDeriv2 };

// Geometric kernel z(x) = 1/(1 - e^-x) and its first two log-derivatives:
//   LogDeriv  -> z'/z(x)   = -1/(e^x - 1)
//   LogDeriv2 -> (z'/z)'(x) =  e^x/(e^x - 1)^2
// Poles on the lattice x = 2*pi*i*k; throws PoleError within 1e-14 of one.
cplx zfun(cplx x, ZMode mode);

// Laurent data of z and z'/z at 0 (for oracles and series callers).
LaurentExpansion zfun_laurent(ZMode mode);

enum class ZetaMode { Value, LogDeriv, LogDeriv2 };

// Riemann zeta family near the 1-line:
//   Value     -> zeta(1+s)
//   LogDeriv  -> zeta'/zeta(1+s)
//   LogDeriv2 -> (zeta'/zeta)'(1+s)
// Stieltjes Laurent series for |s| < 0.25, Euler-Maclaurin elsewhere.
cplx zeta1p(cplx s, ZetaMode mode);

// Laurent expansion of zeta(1+s) at s = 0 (simple pole, Stieltjes tail).
LaurentExpansion zeta1p_laurent();

namespace detail {
// both evaluation paths, callable anywhere they converge (overlap testing)
cplx zeta1p_series_path(cplx s, ZetaMode mode);
cplx zeta1p_em_path(cplx s, ZetaMode mode);
}  // namespace detail

enum class GammaMode { LogGamma, Digamma, RatioElliptic, RatioDirichlet };

// Gamma-family values:
//   LogGamma       -> log Gamma(s)             (principal branch, Lanczos)
//   Digamma        -> psi_0(s)
//   RatioElliptic  -> Gamma(1-s)/Gamma(1+s)
//   RatioDirichlet -> Gamma(1/4-s/2)/Gamma(1/4+s/2)
cplx gamma_family(cplx s, GammaMode mode);

// Direct names for the common cases.
inline cplx log_gamma(cplx s) { return gamma_family(s, GammaMode::LogGamma); }
inline cplx digamma(cplx s) { return gamma_family(s, GammaMode::Digamma); }

}  // namespace specialfn
}  // namespace nld

#endif
