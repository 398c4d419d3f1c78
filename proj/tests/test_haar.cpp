#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "nld/haar.hpp"

using namespace nld;
using namespace nld::haar;

namespace {

// one-sample Kolmogorov-Smirnov statistic against a CDF on [0, pi]
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double F = cdf(xs[i]);
        d = std::max(d, std::abs(F - i / n));
        d = std::max(d, std::abs(F - (i + 1) / n));
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    return d;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("sample invariants: structure residual, determinant, angle range") {
    for (Symmetry sym : {Symmetry::SOEven, Symmetry::USp}) {
        for (int N : {1, 2, 5, 16}) {
            GroupSpec g(sym, N);
            auto s = sample_eigenangles(g, RngStream{123, static_cast<std::uint64_t>(N)});
            CHECK(s.structure_residual < 1e-10);
            CHECK(s.det_check < 1e-10);
            REQUIRE(static_cast<int>(s.angles.size()) == N);
            CHECK(std::is_sorted(s.angles.begin(), s.angles.end()));
            for (double th : s.angles) {
                CHECK(th >= 0.0);
                CHECK(th <= kPi);
            }
        }
    }
}

TEST_CASE("SO(2) eigenangle is uniform on [0,pi] (KS at 1%)") {
    GroupSpec g(Symmetry::SOEven, 1);
    const int n = 10000;
    std::vector<double> xs;
    xs.reserve(n);
    for (int i = 0; i < n; ++i)
        xs.push_back(sample_eigenangles(g, RngStream{7, static_cast<std::uint64_t>(i)}).angles[0]);
    double d = ks_statistic(xs, [](double x) { return x / kPi; });
    CHECK(d * std::sqrt(static_cast<double>(n)) < 1.628);  // 1% critical value
}

TEST_CASE("USp(2): E[cos 2theta] = -1/2 within 3 standard errors") {
    GroupSpec g(Symmetry::USp, 1);
    auto r = empirical_density(
        g, [](std::span<const double> th) { return std::cos(2.0 * th[0]); }, 1, false, 100000,
        RngStream{11, 0}, {8, 100});
    CHECK(std::abs(r.mean + 0.5) < 3.0 * r.stderr_est);
}

TEST_CASE("Haar invariance under fixed right-translation (two-sample KS)") {
    // rotate-by-fixed-element invariance shows up as identical angle statistics
    // for two independent seeds; compare stream A against stream B after a
    // fixed re-seeding (proxy for the group translation, which the QR
    // construction realizes exactly)
    GroupSpec g(Symmetry::SOEven, 3);
    std::vector<double> a, b;
    for (int i = 0; i < 4000; ++i) {
        auto sa = sample_eigenangles(g, RngStream{100, static_cast<std::uint64_t>(i)});
        auto sb = sample_eigenangles(g, RngStream{200, static_cast<std::uint64_t>(i)});
        a.insert(a.end(), sa.angles.begin(), sa.angles.end());
        b.insert(b.end(), sb.angles.begin(), sb.angles.end());
    }
    double d = ks_two_sample(a, b);
    double ne = static_cast<double>(a.size());
    CHECK(d * std::sqrt(ne / 2.0) < 1.628);
}

TEST_CASE("mc_ratio per-sample identities") {
    GroupSpec g(Symmetry::SOEven, 2);
    ShiftSet A({cplx(0.3)}), B({cplx(0.3)});
    auto r = mc_ratio(g, A, B, 500, RngStream{5, 0});
    CHECK(r.mean == cplx(1.0, 0.0));
    CHECK(r.stderr_est == 0.0);

    auto e = mc_ratio(g, ShiftSet{}, ShiftSet{}, 10, RngStream{5, 0});
    CHECK(e.mean == cplx(1.0, 0.0));

    // reciprocal identity on a fixed sample
    auto s = sample_eigenangles(g, RngStream{17, 3});
    std::vector<cplx> av{cplx(0.25)}, bv{cplx(0.4)};
    cplx fwd = ratio_statistic(s.angles, av, bv);
    cplx bwd = ratio_statistic(s.angles, bv, av);
    CHECK(std::abs(fwd * bwd - 1.0) < 1e-12);
}

TEST_CASE("mc_ratio agrees with ratio_average (quick)") {
    for (Symmetry sym : {Symmetry::SOEven, Symmetry::USp}) {
        GroupSpec g(sym, 2);
        ShiftSet A({cplx(0.3)}), B({cplx(0.4)});
        auto mc = mc_ratio(g, A, B, 20000, RngStream{21, 0}, {8, 100});
        cplx exact = shiftcalc::ratio_average(A, B, g);
        CHECK(std::abs(mc.mean - exact) < 3.0 * mc.stderr_est);
    }
}

TEST_CASE("mc_logderiv agrees with jstar (quick)") {
    for (Symmetry sym : {Symmetry::SOEven, Symmetry::USp}) {
        GroupSpec g(sym, 2);
        ShiftSet A({cplx(0.3)});
        auto mc = mc_logderiv(g, A, 20000, RngStream{22, 0}, {8, 100});
        cplx exact = shiftcalc::jstar(A, g);
        CHECK(std::abs(mc.mean - exact) < 3.0 * mc.stderr_est);
    }
}

TEST_CASE("empirical_density counting checks") {
    GroupSpec g(Symmetry::USp, 4);
    auto one = [](std::span<const double>) { return 1.0; };
    auto r1 = empirical_density(g, one, 1, false, 50, RngStream{1, 0});
    CHECK(r1.mean == 4.0);
    CHECK(r1.stderr_est == 0.0);
    auto r2 = empirical_density(g, one, 2, true, 50, RngStream{1, 0});
    CHECK(r2.mean == 12.0);  // N(N-1)
}

TEST_CASE("reproducibility: thread counts 1 and 8 give bit-identical results") {
    GroupSpec g(Symmetry::USp, 3);
    ShiftSet A({cplx(0.3), cplx(0.42)});
    auto r1 = mc_logderiv(g, A, 5000, RngStream{99, 0}, {1, 100});
    auto r8 = mc_logderiv(g, A, 5000, RngStream{99, 0}, {8, 100});
    CHECK(r1.mean.real() == r8.mean.real());
    CHECK(r1.mean.imag() == r8.mean.imag());
    CHECK(r1.stderr_est == r8.stderr_est);
}
