#ifndef NLD_NTDENSITY_HPP
#define NLD_NTDENSITY_HPP

#include <map>
#include <optional>

#include "nld/arith.hpp"
#include "nld/rmtdensity.hpp"

namespace nld {
namespace ntdensity {

enum class Family { Elliptic, Dirichlet };

// Precomputed family data: selected discriminants with their conductor logs,
// and the truncated prime context for the arithmetic factors.
struct FamilyContext {
    Family family = Family::Dirichlet;
    std::optional<arith::CurveFamily> curve;
    std::int64_t x_max = 0;
    std::int64_t p_max = 0;
    arith::EulerPrimeCtx primes;
    std::vector<double> ell;  // log(sqrt(M) d / 2pi) or log(d / pi) per selected d
    double x_star = 0.0;      // number of selected discriminants
};

FamilyContext make_family_context(Family family, const arith::CurveFamily* curve,
                                  std::int64_t x_max, std::int64_t p_max);

// psi'/psi(1/2 + beta, chi_d) from the functional equation of the family.
cplx psi_logderiv(Family family, cplx beta, std::int64_t d,
                  const arith::CurveFamily* curve = nullptr);

// J*_family(A, B): sum over selected d of the psi-product over B times the
// subset expansion over D of A with zeta, Gamma, and arithmetic factors.
cplx jstar_family(const FamilyContext& ctx, std::span<const cplx> A, std::span<const cplx> B);

// spec-facing wrapper building the context per call
cplx jstar_family(Family family, const ShiftSet& A, const ShiftSet& B, std::int64_t X,
                  const arith::EulerTruncation& trunc,
                  const arith::CurveFamily* curve = nullptr);

struct FamilyDensityRequest {
    Family family = Family::Dirichlet;
    std::optional<arith::CurveFamily> curve;
    int n = 1;
    TestFunction f;  // strip-decay mode
    std::int64_t x_max = 10000;
    arith::EulerTruncation trunc;
    QuadratureSpec quad;
    int threads = 1;
    bool onaxis = false;  // validation path (default is the contour form)
};

// n-level density of the family's zero statistics (distinct-index tuples).
DensityResult nt_density(const FamilyDensityRequest& req);

// Direct regrouped 1-level sum over all zeros (expected to equal twice the
// positive-ordinate 1-level density).
double one_level_direct(const arith::CurveFamily& curve, const TestFunction& f, std::int64_t X,
                        const arith::EulerTruncation& trunc, const QuadratureSpec& quad,
                        int threads = 1);

struct ScaledTwoLevelReport {
    double s2_rescaled = 0.0;      // (1/X*) S*_2 with arguments scaled by L/pi
    double kernel_value = 0.0;     // (1/4) int int f det K_SO,even
    double diag_psi_pair = 0.0;    // (1/X* L^2) J*(0, {-pi i a/L, -pi i b/L}), target 4
    double diag_folded = 0.0;      // folded single-shift combination / L^2
    double diag_folded_target = 0.0;  // -4 sin(2 pi a)/(2 pi a)
    double L = 0.0;
    double x_star = 0.0;
    double error_estimate = 0.0;
};

ScaledTwoLevelReport scaled_two_level(const arith::CurveFamily& curve, const TestFunction& f,
                                      std::int64_t X, const arith::EulerTruncation& trunc,
                                      const QuadratureSpec& quad, double a, double b,
                                      int threads = 1);

// ---- zero-ordinate ingestion ----

struct ZeroDatabase {
    // ascending positive ordinates per discriminant
    std::map<std::int64_t, std::vector<double>> ordinates;
    std::string family_meta;  // free-form provenance line from the file

    void validate() const;  // ascending/positive checks
};

enum class ZeroSelector { All, EllipticEven };

struct EmpiricalResult {
    double value = 0.0;
    double truncation_bias = 0.0;  // |f| at the largest stored ordinate
    std::int64_t discriminants_used = 0;
};

EmpiricalResult empirical_from_zeros(const ZeroDatabase& db, const TestFunction& f, int n,
                                     ZeroSelector selector,
                                     const arith::CurveFamily* curve = nullptr);

}  // namespace ntdensity
}  // namespace nld

#endif
