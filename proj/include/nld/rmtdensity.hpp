#ifndef NLD_RMTDENSITY_HPP
#define NLD_RMTDENSITY_HPP

#include <string>
#include <vector>

#include "nld/quadrature.hpp"
#include "nld/shiftcalc.hpp"
#include "nld/testfn.hpp"

namespace nld {

struct TermEntry {
    std::string K, L, M;
    cplx value;
};

struct DensityResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::vector<TermEntry> terms;  // per-(K,L,M) breakdown of the top-level sum
    double imag_residual = 0.0;
    double tail_estimate = 0.0;
    double taper_error = 0.0;
    double condition_max = 0.0;
    bool cancellation_warning = false;
    std::uint64_t subsets_evaluated = 0;
    std::uint64_t subsets_skipped = 0;
    double elapsed_ms = 0.0;
    std::string caveat;
};

namespace rmtdensity {

struct EvalOptions {
    int threads = 1;
};

// n-level density of distinct eigenangle n-tuples, evaluated off axis on
// vertical contours (primary route; repeated-index tuples removed by merge
// corrections).
DensityResult density_contour(const GroupSpec& g, int n, const TestFunction& f,
                              const QuadratureSpec& quad, const EvalOptions& opt = {});

// Same quantity from the on-axis form: [0,pi]^n nodes offset from the
// diagonals by epsilon, Richardson-extrapolated in epsilon.
DensityResult density_onaxis(const GroupSpec& g, int n, const TestFunction& f,
                             const QuadratureSpec& quad, const EvalOptions& opt = {});

// Restricted-support evaluation over infinite vertical lines (truncated at
// T): scaled test function F(x) = f(Nx/2pi), subset sum limited to |D| < q.
// The q > n call evaluates every subset and serves as the full reference.
DensityResult density_restricted(const GroupSpec& g, int n, const TestFunction& f, int q,
                                 const QuadratureSpec& quad, const EvalOptions& opt = {});

// Large-N limit comparator: (1/2^n) int f det[K(x_i,x_j)] dx over R^n with
// the sine-type kernel of the symmetry class.
double kernel_density(Symmetry sym, int n, const TestFunction& f, const QuadratureSpec& quad,
                      const EvalOptions& opt = {});

// Finite-N density of f(N theta / pi), tapered to zero on the last 10% of
// [0, pi]; comparable against kernel_density for large N.
DensityResult scaled_density(const GroupSpec& g, int n, const TestFunction& f,
                             const QuadratureSpec& quad, const EvalOptions& opt = {});

// kernel values (exposed for tests)
double kernel_so_even(double x, double y);
double kernel_usp(double x, double y);

}  // namespace rmtdensity
}  // namespace nld

#endif
