#include "nld/testfn.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace nld {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kTwoPi = 2.0 * kPi;

cplx sinc(cplx x) {
    if (std::abs(x) < 1e-4) {
        cplx x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}
}  // namespace

cplx TestFnPrim::eval(cplx x) const {
    switch (kind) {
        case Kind::One: return 1.0;
        case Kind::Cos: return std::cos(param * x);
        case Kind::Gauss: return std::exp(-x * x / (2.0 * param * param));
        case Kind::GaussPeriodized: {
            // enough images that the dropped tail is below 1e-16 for |Im x| <= 1
            int K = static_cast<int>(std::ceil((9.0 * param + kPi + 1.0) / kTwoPi)) + 1;
            cplx acc = 0.0;
            for (int k = -K; k <= K; ++k) {
                cplx u = x + kTwoPi * static_cast<double>(k);
                acc += std::exp(-u * u / (2.0 * param * param));
            }
            return acc;
        }
        case Kind::FejerSq: {
            cplx s = sinc(kPi * param * x);
            return s * s;
        }
    }
    return 0.0;
}

cplx TestFunction::eval(std::span<const cplx> xs) const {
    cplx p = 1.0;
    for (std::size_t v = 0; v < factors.size(); ++v)
        for (const auto& prim : factors[v]) p *= prim.eval(xs[v]);
    return p;
}

double TestFunction::eval_real(std::span<const double> xs) const {
    cplx p = 1.0;
    for (std::size_t v = 0; v < factors.size(); ++v)
        for (const auto& prim : factors[v]) p *= prim.eval(cplx(xs[v], 0.0));
    return p.real();
}

TestFunction TestFunction::merged(const std::vector<int>& groups) const {
    if (groups.size() != factors.size())
        throw ValidationError("TestFunction::merged: group map arity mismatch");
    int m = 0;
    for (int g : groups) m = std::max(m, g + 1);
    TestFunction out = *this;
    out.factors.assign(m, {});
    for (std::size_t v = 0; v < factors.size(); ++v)
        for (const auto& prim : factors[v]) out.factors[groups[v]].push_back(prim);
    out.spec = spec + " [merged]";
    return out;
}

void TestFunction::verify_flags() const {
    std::mt19937_64 eng(20240901);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    std::vector<cplx> xs(factors.size());
    for (int trial = 0; trial < 16; ++trial) {
        for (auto& x : xs) x = u(eng);
        cplx base = eval(xs);
        if (even_per_variable) {
            for (std::size_t v = 0; v < xs.size(); ++v) {
                auto flipped = xs;
                flipped[v] = -flipped[v];
                if (std::abs(eval(flipped) - base) > 1e-12 * std::max(1.0, std::abs(base)))
                    throw ValidationError("test function is not even in variable " +
                                          std::to_string(v));
            }
        }
        if (two_pi_periodic) {
            auto shifted = xs;
            shifted[trial % xs.size()] += kTwoPi;
            if (std::abs(eval(shifted) - base) > 1e-12 * std::max(1.0, std::abs(base)))
                throw ValidationError("test function is not 2pi-periodic");
        }
    }
}

double TestFunction::truncation_T(double tol, double imag_margin) const {
    // per-variable: find the smallest T with the factor bound below tol
    double T = 1.0;
    for (const auto& fac : factors) {
        double t = 1.0;
        auto bound = [&](double x) {
            double b = 1.0;
            for (const auto& prim : fac) {
                switch (prim.kind) {
                    case TestFnPrim::Kind::Gauss:
                        b *= std::exp((imag_margin * imag_margin - x * x) /
                                      (2.0 * prim.param * prim.param));
                        break;
                    case TestFnPrim::Kind::FejerSq: {
                        double g = kPi * prim.param * x;
                        double grow = std::exp(2.0 * kPi * prim.param * imag_margin);
                        b *= grow * std::min(1.0, 1.0 / (g * g));
                        break;
                    }
                    default:
                        break;  // bounded factors do not shrink the tail
                }
            }
            return b;
        };
        while (bound(t) > tol && t < 1e6) t *= 1.25;
        T = std::max(T, t);
    }
    return T;
}

double TestFunction::tail_bound(double T) const {
    // integral of the product bound beyond T, one variable at a time
    double worst = 0.0;
    for (const auto& fac : factors) {
        double decay2 = 0.0;  // quadratic-decay coefficient, Gaussian handled separately
        double gsigma = 0.0;
        for (const auto& prim : fac) {
            if (prim.kind == TestFnPrim::Kind::FejerSq)
                decay2 += 1.0;  // one power of x^-2 each
            if (prim.kind == TestFnPrim::Kind::Gauss) gsigma = std::max(gsigma, prim.param);
        }
        double tail;
        if (gsigma > 0.0)
            tail = gsigma * std::exp(-T * T / (2.0 * gsigma * gsigma));
        else if (decay2 > 0.0)
            tail = 1.0 / ((2.0 * decay2 - 1.0) * std::pow(T, 2.0 * decay2 - 1.0));
        else
            tail = 0.0;  // periodic factors integrate over compact ranges
        worst = std::max(worst, tail);
    }
    return worst;
}

TestFunction parse_testfn(const std::string& spec, int arity, TestFnMode mode) {
    std::vector<std::vector<TestFnPrim>> parsed;
    std::stringstream ss(spec);
    std::string tok;
    bool has_radius = true;
    while (std::getline(ss, tok, '*')) {
        std::string name = tok;
        double param = 0.0;
        auto colon = tok.find(':');
        if (colon != std::string::npos) {
            name = tok.substr(0, colon);
            param = std::stod(tok.substr(colon + 1));
        }
        TestFnPrim prim;
        if (name == "one") {
            prim.kind = TestFnPrim::Kind::One;
        } else if (name == "cos") {
            if (param <= 0.0 || param != std::floor(param))
                throw ValidationError("cos:k needs a positive integer k");
            prim.kind = TestFnPrim::Kind::Cos;
            prim.param = param;
            has_radius = false;
            if (mode == TestFnMode::StripDecay)
                throw ValidationError("cos:k has no strip decay; use periodic mode");
        } else if (name == "gauss") {
            if (param <= 0.0) throw ValidationError("gauss:sigma needs sigma > 0");
            prim.kind = mode == TestFnMode::Periodic ? TestFnPrim::Kind::GaussPeriodized
                                                     : TestFnPrim::Kind::Gauss;
            prim.param = param;
            has_radius = false;
        } else if (name == "fejer") {
            if (param <= 0.0) throw ValidationError("fejer:a needs a > 0");
            if (mode == TestFnMode::Periodic)
                throw ValidationError("fejer:a is not 2pi-periodic; use strip-decay mode");
            prim.kind = TestFnPrim::Kind::FejerSq;
            prim.param = param;
        } else {
            throw ValidationError("unknown test-function primitive '" + name + "'");
        }
        parsed.push_back({prim});
    }
    if (parsed.empty()) throw ValidationError("empty test-function spec");
    if (static_cast<int>(parsed.size()) == 1 && arity > 1)
        parsed.assign(arity, parsed.front());  // broadcast
    if (static_cast<int>(parsed.size()) != arity)
        throw ValidationError("test-function spec has " + std::to_string(parsed.size()) +
                              " factors, expected " + std::to_string(arity));

    TestFunction f;
    f.factors = std::move(parsed);
    f.two_pi_periodic = (mode == TestFnMode::Periodic);
    f.strip_decay = (mode == TestFnMode::StripDecay);
    if (has_radius) {
        double r = 0.0;
        for (const auto& fac : f.factors)
            for (const auto& p : fac)
                if (p.kind == TestFnPrim::Kind::FejerSq) r += p.param;
        f.fourier_support_radius = r;
    }
    f.spec = spec;
    f.verify_flags();
    return f;
}

}  // namespace nld
