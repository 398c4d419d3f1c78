#ifndef NLD_TESTFN_HPP
#define NLD_TESTFN_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nld/specialfn.hpp"

namespace nld {

// Multiplicative building blocks for test functions.  Everything here is
// even, entire, and evaluable at complex arguments (needed on contours).
struct TestFnPrim {
    enum class Kind { One, Cos, Gauss, GaussPeriodized, FejerSq };
    Kind kind = Kind::One;
    double param = 0.0;

    cplx eval(cplx x) const;
};

enum class TestFnMode { Periodic, StripDecay };

// Even, symmetric multivariate test function in product form: one factor per
// variable, each factor a product of primitives.  Merging variables (for the
// distinct-tuple corrections) concatenates factor lists.
struct TestFunction {
    std::vector<std::vector<TestFnPrim>> factors;
    bool even_per_variable = true;
    bool two_pi_periodic = false;
    bool strip_decay = false;
    std::optional<double> fourier_support_radius;  // total over all variables
    std::string spec;

    int arity() const { return static_cast<int>(factors.size()); }

    cplx eval(std::span<const cplx> xs) const;
    double eval_real(std::span<const double> xs) const;

    // f with variable groups identified: groups[v] = output slot of input v.
    TestFunction merged(const std::vector<int>& groups) const;

    // random spot checks of the declared flags (throws ValidationError)
    void verify_flags() const;

    // truncation for [0,T] integrals: |f| below tol outside, allowing complex
    // offsets up to |Im| <= imag_margin on the contour
    double truncation_T(double tol, double imag_margin) const;

    // crude bound on the mass of |f| beyond T (tail estimate for reports)
    double tail_bound(double T) const;
};

// Mini-language: `one`, `cos:k`, `gauss:sigma`, `fejer:a`, products via `*`.
// A single-factor spec broadcasts to the requested arity.  Periodic mode
// periodizes the Gaussian and rejects non-periodic primitives.
TestFunction parse_testfn(const std::string& spec, int arity, TestFnMode mode);

}  // namespace nld

#endif
