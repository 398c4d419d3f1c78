#include "nld/arith.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nld {
namespace arith {

int kronecker(int64_t d, int64_t n) {
    // multiplicative extension of the Jacobi symbol via the standard
    // reciprocity loop; handles all integer arguments
    if (n == 0) return (d == 1 || d == -1) ? 1 : 0;
    if ((d % 2 == 0) && (n % 2 == 0)) return 0;
    int result = 1;
    if (n < 0) {
        n = -n;
        if (d < 0) result = -result;
    }
    // strip factors of 2 from n: (d/2) by d mod 8
    int64_t v = 0;
    while (n % 2 == 0) {
        n /= 2;
        ++v;
    }
    if (v % 2 == 1) {
        int64_t dm8 = ((d % 8) + 8) % 8;
        if (dm8 == 3 || dm8 == 5) result = -result;
        // dm8 even -> symbol 0, caught above
    }
    d %= n;
    if (d < 0) d += n;
    // Jacobi loop for odd positive n
    while (d != 0) {
        while (d % 2 == 0) {
            d /= 2;
            int64_t nm8 = n % 8;
            if (nm8 == 3 || nm8 == 5) result = -result;
        }
        std::swap(d, n);
        if (d % 4 == 3 && n % 4 == 3) result = -result;
        d %= n;
    }
    return n == 1 ? result : 0;
}

bool is_prime(int64_t n) {
    if (n < 2) return false;
    for (int64_t f : {2, 3, 5, 7, 11, 13}) {
        if (n == f) return true;
        if (n % f == 0) return false;
    }
    for (int64_t i = 17; i * i <= n; i += 2)
        if (n % i == 0) return false;
    return true;
}

std::vector<int64_t> primes_up_to(int64_t limit) {
    std::vector<int64_t> out;
    if (limit < 2) return out;
    std::vector<bool> sieve(limit + 1, true);
    for (int64_t i = 2; i <= limit; ++i) {
        if (!sieve[i]) continue;
        out.push_back(i);
        for (int64_t j = i * i; j <= limit; j += i) sieve[j] = false;
    }
    return out;
}

std::vector<int64_t> fundamental_discriminants(int64_t X) {
    if (X < 1) throw ValidationError("fundamental_discriminants: X >= 1");
    std::vector<bool> squarefree(X + 1, true);
    for (int64_t q = 2; q * q <= X; ++q)
        for (int64_t j = q * q; j <= X; j += q * q) squarefree[j] = false;
    std::vector<int64_t> out;
    for (int64_t d = 1; d <= X; ++d) {
        if (d % 4 == 1 && squarefree[d]) {
            out.push_back(d);
        } else if (d % 4 == 0) {
            int64_t m = d / 4;
            if ((m % 4 == 2 || m % 4 == 3) && squarefree[m]) out.push_back(d);
        }
    }
    return out;
}

CurveFamily::CurveFamily(int64_t A, int64_t B, int64_t M, int omega,
                         std::map<int64_t, BadReduction> bad)
    : a_coeff(A), b_coeff(B), conductor(M), root_number(omega),
      bad_reduction_types(std::move(bad)) {
    // discriminant of the model: -16(A^3 + 27 B^2)
    long double disc = -16.0L * (powl(static_cast<long double>(A), 3) +
                                 27.0L * powl(static_cast<long double>(B), 2));
    if (disc == 0.0L) throw ValidationError("CurveFamily: singular curve (A^3 + 27B^2 = 0)");
    if (M <= 0 || !is_prime(M))
        throw ValidationError("CurveFamily: conductor must be a (user-supplied) prime");
    if (omega != 1 && omega != -1) throw ValidationError("CurveFamily: omega must be +-1");
}

CurveFamily CurveFamily::parse(const std::string& text) {
    std::stringstream ss(text);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(ss, tok, ',')) parts.push_back(tok);
    if (parts.size() < 4) throw ValidationError("curve string needs A,B,M,omega");
    std::map<int64_t, BadReduction> bad;
    for (std::size_t i = 4; i < parts.size(); ++i) {
        auto colon = parts[i].find(':');
        if (colon == std::string::npos)
            throw ValidationError("bad-reduction entries look like p:type");
        int64_t p = std::stoll(parts[i].substr(0, colon));
        std::string type = parts[i].substr(colon + 1);
        BadReduction r;
        if (type == "additive")
            r = BadReduction::Additive;
        else if (type == "split")
            r = BadReduction::SplitMultiplicative;
        else if (type == "nonsplit")
            r = BadReduction::NonSplitMultiplicative;
        else
            throw ValidationError("unknown reduction type '" + type + "'");
        bad[p] = r;
    }
    return CurveFamily(std::stoll(parts[0]), std::stoll(parts[1]), std::stoll(parts[2]),
                       std::stoi(parts[3]), std::move(bad));
}

std::string CurveFamily::to_string() const {
    std::string s = std::to_string(a_coeff) + "," + std::to_string(b_coeff) + "," +
                    std::to_string(conductor) + "," + std::to_string(root_number);
    for (const auto& [p, r] : bad_reduction_types) {
        s += "," + std::to_string(p) + ":";
        s += r == BadReduction::Additive ? "additive"
             : r == BadReduction::SplitMultiplicative ? "split"
                                                      : "nonsplit";
    }
    return s;
}

int64_t ap(const CurveFamily& curve, int64_t p) {
    if (!is_prime(p)) throw ValidationError("ap: p must be prime");
    auto it = curve.bad_reduction_types.find(p);
    if (it != curve.bad_reduction_types.end()) {
        switch (it->second) {
            case BadReduction::Additive: return 0;
            case BadReduction::SplitMultiplicative: return 1;
            case BadReduction::NonSplitMultiplicative: return -1;
        }
    }
    if (curve.conductor % p == 0)
        throw UnknownReductionTypeError("ap: p divides the conductor but no type declared");
    if (p == 2) {
        // char-2 fiber of the short model: direct point enumeration
        int64_t count = 1;  // infinity
        for (int64_t x = 0; x < 2; ++x)
            for (int64_t y = 0; y < 2; ++y) {
                int64_t lhs = (y * y) % 2;
                int64_t rhs = ((x * x * x + curve.a_coeff * x + curve.b_coeff) % 2 + 2) % 2;
                if (lhs == rhs) ++count;
            }
        return p + 1 - count;
    }
    // quadratic-character table for F_p, then a_p = -sum chi(x^3 + Ax + B)
    std::vector<signed char> chi(p, -1);
    chi[0] = 0;
    for (int64_t x = 1; x <= (p - 1) / 2; ++x) chi[(x * x) % p] = 1;
    int64_t A = ((curve.a_coeff % p) + p) % p;
    int64_t B = ((curve.b_coeff % p) + p) % p;
    int64_t sum = 0;
    for (int64_t x = 0; x < p; ++x) {
        int64_t f = (x * x % p * x % p + A * x % p + B) % p;
        sum += chi[f];
    }
    return -sum;
}

bool family_selector(const CurveFamily& curve, int64_t d) {
    return kronecker(d, -curve.conductor) * curve.root_number == 1;
}

const std::vector<double>& CurveFamily::lambda_cache(int64_t p_max) const {
    if (primes_.empty() || primes_.back() < p_max) {
        primes_ = primes_up_to(p_max);
        lambda_.clear();
        lambda_.reserve(primes_.size());
        for (int64_t p : primes_) {
            int64_t a = ap(*this, p);
            if (conductor % p != 0 && static_cast<double>(a) * a > 4.0 * p)
                throw NumericalBreakdownError("Hasse bound violated at p=" + std::to_string(p));
            lambda_.push_back(a / std::sqrt(static_cast<double>(p)));
        }
    }
    return lambda_;
}

// ---- Euler products ----

namespace {

// log-derivative of log z_p(1+s): -log p / (p^{1+s} - 1)
cplx lp1(double p, double logp, cplx s) {
    return -logp / (std::exp((1.0 + s) * logp) - 1.0);
}

cplx lp2(double p, double logp, cplx s) {
    cplx e = std::exp((1.0 + s) * logp);
    cplx d = e - 1.0;
    return logp * logp * e / (d * d);
}

cplx zp(double logp, cplx s) { return 1.0 / (1.0 - std::exp(-s * logp)); }

struct PrimeEval {
    double p, logp, lambda;
    bool divides_m, elliptic;

    // x_s = p^{-1/2 - s}
    cplx xval(cplx s) const { return std::exp(-(0.5 + s) * logp); }

    // zeta-block per-prime square root (elliptic sign: /prod z_p(1+2d);
    // dirichlet: /prod z_p(1-2d))
    cplx a1(std::span<const cplx> D) const {
        cplx v = std::pow(zp(logp, 1.0), static_cast<double>(D.size()));
        for (std::size_t i = 0; i < D.size(); ++i)
            for (std::size_t j = i + 1; j < D.size(); ++j) {
                cplx dd = D[i] - D[j], ss = D[i] + D[j];
                v *= zp(logp, 1.0 - dd) * zp(logp, 1.0 + dd) /
                     (zp(logp, 1.0 - ss) * zp(logp, 1.0 + ss));
            }
        for (cplx d : D) v /= zp(logp, elliptic ? 1.0 + 2.0 * d : 1.0 - 2.0 * d);
        return v;
    }

    // elliptic U-block T(+-) = U(D)/(2 U(D-)); dirichlet V-block analogue
    void tblocks(std::span<const cplx> D, cplx& tminus, cplx& tplus) const {
        cplx um = 1.0, up = 1.0, umm = 1.0, upm = 1.0;
        for (cplx d : D) {
            cplx x = xval(d), xm = xval(-d);
            if (elliptic) {
                um *= 1.0 - lambda * x + x * x;
                up *= 1.0 + lambda * x + x * x;
                umm *= 1.0 - lambda * xm + xm * xm;
                upm *= 1.0 + lambda * xm + xm * xm;
            } else {
                um *= 1.0 - x;
                up *= 1.0 + x;
                umm *= 1.0 - xm;
                upm *= 1.0 + xm;
            }
        }
        tminus = um / (2.0 * umm);
        tplus = up / (2.0 * upm);
    }

    // d/dw log of the +- local factor at w
    cplx lfac(cplx w, int sign) const {
        cplx x = xval(w);
        if (elliptic) {
            double l = sign > 0 ? lambda : -lambda;
            return -logp * (l * x + 2.0 * x * x) / (1.0 + l * x + x * x);
        }
        double l = sign > 0 ? 1.0 : -1.0;
        return -logp * (l * x) / (1.0 + l * x);
    }

    // V-block for p | M (elliptic only): V(D)/V(D-)
    cplx a3(std::span<const cplx> D) const {
        cplx num = 1.0, den = 1.0;
        for (cplx d : D) {
            num *= 1.0 - lambda * xval(d);
            den *= 1.0 - lambda * xval(-d);
        }
        return num / den;
    }

    cplx combined_value(std::span<const cplx> D) const {
        cplx v = a1(D);
        if (elliptic && divides_m) return v * a3(D);
        cplx tm, tp;
        tblocks(D, tm, tp);
        return v * (tm + tp + 1.0 / p) / (1.0 + 1.0 / p);
    }

    cplx combined_deriv(std::span<const cplx> D, std::span<const cplx> W) const {
        if (W.size() == 1) {
            cplx w = W[0];
            // zeta-block part: the 2w term carries the symmetry sign
            cplx d1 = elliptic ? lp1(p, logp, 2.0 * w) : -lp1(p, logp, 2.0 * w);
            for (cplx d : D) d1 += lp1(p, logp, w + d) - lp1(p, logp, w - d);
            if (elliptic && divides_m) {
                cplx x = xval(w);
                return d1 - (lambda * logp * x) / (1.0 - lambda * x);
            }
            cplx tm, tp;
            tblocks(D, tm, tp);
            cplx F = tm + tp + 1.0 / p;
            return d1 - (lfac(w, -1) * tm + lfac(w, +1) * tp) / F;
        }
        // pair block
        cplx w1 = W[0], w2 = W[1];
        cplx d2 = -lp2(p, logp, w1 + w2);
        if (elliptic && divides_m) return d2;
        cplx tm, tp;
        tblocks(D, tm, tp);
        cplx F = tm + tp + 1.0 / p;
        cplx g1a = -(lfac(w1, -1) * tm + lfac(w1, +1) * tp) / F;
        cplx g1b = -(lfac(w2, -1) * tm + lfac(w2, +1) * tp) / F;
        cplx g2 = (lfac(w1, -1) * lfac(w2, -1) * tm + lfac(w1, +1) * lfac(w2, +1) * tp) / F;
        return d2 + g2 - g1a * g1b;
    }
};

PrimeEval make_eval(const EulerPrimeCtx& ctx, std::size_t i) {
    PrimeEval e;
    e.p = static_cast<double>(ctx.primes[i]);
    e.logp = ctx.logp[i];
    e.elliptic = !ctx.lambda.empty();
    e.lambda = e.elliptic ? ctx.lambda[i] : 0.0;
    e.divides_m = e.elliptic && ctx.divides_m[i];
    return e;
}

}  // namespace

EulerPrimeCtx make_prime_ctx(const CurveFamily* curve, int64_t p_max) {
    EulerPrimeCtx ctx;
    ctx.primes = primes_up_to(p_max);
    ctx.logp.reserve(ctx.primes.size());
    for (int64_t p : ctx.primes) ctx.logp.push_back(std::log(static_cast<double>(p)));
    if (curve) {
        // the cached prime list is a prefix-compatible superset
        const auto& lam = curve->lambda_cache(p_max);
        ctx.lambda.assign(lam.begin(), lam.begin() + ctx.primes.size());
        ctx.divides_m.resize(ctx.primes.size());
        for (std::size_t i = 0; i < ctx.primes.size(); ++i)
            ctx.divides_m[i] = curve->conductor % ctx.primes[i] == 0;
    }
    return ctx;
}

cplx euler_value(const EulerPrimeCtx& ctx, std::span<const cplx> D, double* tail) {
    cplx prod = 1.0;
    double last_dev = 0.0;
    for (std::size_t i = 0; i < ctx.primes.size(); ++i) {
        PrimeEval e = make_eval(ctx, i);
        cplx f = e.combined_value(D);
        prod *= f;
        if (i + 1 == ctx.primes.size()) last_dev = std::abs(f - 1.0);
    }
    if (tail) {
        // per-prime factors approach 1 + O(p^-2); integrate the observed
        // last deviation as c/p^2 beyond p_max
        double p_last = static_cast<double>(ctx.primes.empty() ? 2 : ctx.primes.back());
        *tail = last_dev * p_last / std::max(1.0, std::log(p_last));
    }
    return prod;
}

cplx euler_deriv(const EulerPrimeCtx& ctx, std::span<const cplx> D, std::span<const cplx> W) {
    cplx sum = 0.0;
    for (std::size_t i = 0; i < ctx.primes.size(); ++i) {
        PrimeEval e = make_eval(ctx, i);
        sum += e.combined_deriv(D, W);
    }
    return sum;
}

EulerResult euler_AE(const ShiftSet& D, const CurveFamily& curve, const EulerTruncation& trunc,
                     std::span<const cplx> deriv_block) {
    if (trunc.p_max < 100) throw ValidationError("euler_AE: p_max >= 100 required");
    auto dv = D.values();
    EulerPrimeCtx ctx = make_prime_ctx(&curve, trunc.p_max);
    EulerResult out;
    if (deriv_block.empty()) {
        out.value = euler_value(ctx, dv, &out.tail_estimate);
    } else {
        if (deriv_block.size() > 2)
            throw ValidationError("euler_AE: derivative blocks have 1 or 2 shifts");
        out.value = euler_deriv(ctx, dv, deriv_block);
        out.tail_estimate = 0.0;
    }
    if (trunc.tolerance > 0.0 && out.tail_estimate > trunc.tolerance)
        throw TruncationTooCoarseError("euler_AE: tail estimate exceeds requested tolerance");
    return out;
}

EulerResult euler_ADL(const ShiftSet& D, const EulerTruncation& trunc,
                      std::span<const cplx> deriv_block) {
    if (trunc.p_max < 100) throw ValidationError("euler_ADL: p_max >= 100 required");
    auto dv = D.values();
    EulerPrimeCtx ctx = make_prime_ctx(nullptr, trunc.p_max);
    EulerResult out;
    if (deriv_block.empty()) {
        out.value = euler_value(ctx, dv, &out.tail_estimate);
    } else {
        if (deriv_block.size() > 2)
            throw ValidationError("euler_ADL: derivative blocks have 1 or 2 shifts");
        out.value = euler_deriv(ctx, dv, deriv_block);
        out.tail_estimate = 0.0;
    }
    if (trunc.tolerance > 0.0 && out.tail_estimate > trunc.tolerance)
        throw TruncationTooCoarseError("euler_ADL: tail estimate exceeds requested tolerance");
    return out;
}

}  // namespace arith
}  // namespace nld
