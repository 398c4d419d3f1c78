#ifndef NLD_ARITH_HPP
#define NLD_ARITH_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nld/shiftcalc.hpp"

namespace nld {
namespace arith {

using std::int64_t;

// Kronecker symbol (d/n), extending Jacobi/Legendre to all integers.
int kronecker(int64_t d, int64_t n);

bool is_prime(int64_t n);
std::vector<int64_t> primes_up_to(int64_t limit);

// Ascending positive fundamental discriminants in (0, X], including 1:
// d = 1 mod 4 squarefree, or d = 4m with m = 2,3 mod 4 squarefree.
std::vector<int64_t> fundamental_discriminants(int64_t X);

enum class BadReduction { Additive, SplitMultiplicative, NonSplitMultiplicative };

// y^2 = x^3 + Ax + B with user-supplied conductor and root number.
struct CurveFamily {
    int64_t a_coeff = 0;
    int64_t b_coeff = 0;
    int64_t conductor = 0;
    int root_number = +1;
    std::map<int64_t, BadReduction> bad_reduction_types;

    CurveFamily() = default;
    CurveFamily(int64_t A, int64_t B, int64_t M, int omega,
                std::map<int64_t, BadReduction> bad = {});

    // "A,B,M,omega[,p:type,...]" with type in {additive, split, nonsplit}
    static CurveFamily parse(const std::string& text);
    std::string to_string() const;

    // lambda(p) = a_p / sqrt(p) for all primes p <= p_max (cached)
    const std::vector<double>& lambda_cache(int64_t p_max) const;
    const std::vector<int64_t>& cached_primes() const { return primes_; }

  private:
    mutable std::vector<int64_t> primes_;
    mutable std::vector<double> lambda_;
};

// Trace of Frobenius: naive Legendre-sum point count on the given model for
// good p, table values for declared bad p.
int64_t ap(const CurveFamily& curve, int64_t p);

// Even-functional-equation family membership: kronecker(d, -M) * omega = +1.
bool family_selector(const CurveFamily& curve, int64_t d);

struct EulerTruncation {
    int64_t p_max = 10000;
    double tolerance = 0.0;  // 0 = report only, never throw
};

struct EulerResult {
    cplx value;
    double tail_estimate = 0.0;
};

// Truncated arithmetic factor A_E(D,D,D) for the twisted elliptic family,
// or (with a derivative block W of 1 or 2 shifts from A\D) the log-derivative
// block A_D(W) summed over primes.
EulerResult euler_AE(const ShiftSet& D, const CurveFamily& curve, const EulerTruncation& trunc,
                     std::span<const cplx> deriv_block = {});

// Dirichlet analogue A_DL(D,D,D) and its derivative blocks.
EulerResult euler_ADL(const ShiftSet& D, const EulerTruncation& trunc,
                      std::span<const cplx> deriv_block = {});

// Low-level per-prime evaluators (fast path for the density quadratures).
struct EulerPrimeCtx {
    std::vector<int64_t> primes;
    std::vector<double> logp;
    std::vector<double> lambda;   // empty for the Dirichlet family
    std::vector<bool> divides_m;  // p | M flags (elliptic only)
};

EulerPrimeCtx make_prime_ctx(const CurveFamily* curve, int64_t p_max);

// combined value over p <= p_max for shifts D (elliptic if ctx has lambda)
cplx euler_value(const EulerPrimeCtx& ctx, std::span<const cplx> D, double* tail = nullptr);
// combined singleton/pair log-derivative block
cplx euler_deriv(const EulerPrimeCtx& ctx, std::span<const cplx> D, std::span<const cplx> W);

}  // namespace arith
}  // namespace nld

#endif
