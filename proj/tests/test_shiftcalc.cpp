#include <cmath>
#include <random>

#include "doctest.h"
#include "nld/shiftcalc.hpp"

using namespace nld;
using namespace nld::shiftcalc;
using specialfn::zfun;
using specialfn::ZMode;

namespace {

// literal subset quotient Z(D,D)Z(D-,D-)Y(D)/(Y(D-) Zdag(D-,D)^2), the
// object under the paper's square root, with the dagger omitting z(0)
cplx literal_quotient(const std::vector<cplx>& D, Symmetry sym) {
    auto Z = [](const std::vector<cplx>& X, const std::vector<cplx>& Y, bool dagger) {
        cplx p = 1.0;
        for (cplx x : X)
            for (cplx y : Y) {
                if (dagger && std::abs(x + y) < 1e-14) continue;
                p *= zfun(x + y, ZMode::Value);
            }
        return p;
    };
    auto Yp = [](const std::vector<cplx>& X) {
        cplx p = 1.0;
        for (cplx x : X) p *= zfun(2.0 * x, ZMode::Value);
        return p;
    };
    std::vector<cplx> Dm;
    for (cplx d : D) Dm.push_back(-d);
    cplx zd = Z(Dm, D, true);
    cplx q = Z(D, D, false) * Z(Dm, Dm, false) / (zd * zd);
    if (sym == Symmetry::SOEven)
        q *= Yp(D) / Yp(Dm);
    else
        q *= Yp(Dm) / Yp(D);
    return q;
}

}  // namespace

TEST_CASE("involution numbers and partition counts") {
    CHECK(involution_number(0) == 1);
    CHECK(involution_number(1) == 1);
    CHECK(involution_number(2) == 2);
    CHECK(involution_number(4) == 10);

    for (int m : {0, 1, 2, 3, 4, 5, 6, 7}) {
        std::vector<cplx> v;
        for (int i = 0; i < m; ++i) v.push_back(cplx(0.1 * (i + 1), 0.0));
        auto parts = pair_partitions(ShiftSet(v));
        CHECK(parts.size() == involution_number(m));
    }

    auto p2 = pair_partitions(ShiftSet({cplx(0.1), cplx(0.2)}));
    REQUIRE(p2.size() == 2);

    ShiftSet big;
    for (int i = 0; i < 13; ++i) big.add(cplx(0.01 * (i + 1)));
    CHECK_THROWS_AS(pair_partitions(big), TooLargeError);
}

TEST_CASE("q_prefactor examples") {
    GroupSpec so(Symmetry::SOEven, 2), usp(Symmetry::USp, 2);
    CHECK(std::abs(q_prefactor(ShiftSet{}, so) - 1.0) < 1e-15);

    ShiftSet D({cplx(0.3)});
    cplx expect_so = -std::exp(-1.2) * zfun(0.6, ZMode::Value);
    CHECK(std::abs(q_prefactor(D, so) - expect_so) < 1e-14);
    CHECK(std::abs(q_prefactor(D, so) - cplx(-0.66757)) < 1e-3);

    cplx expect_usp = -std::exp(-1.2) * zfun(-0.6, ZMode::Value);
    CHECK(std::abs(q_prefactor(D, usp) - expect_usp) < 1e-14);
    CHECK(std::abs(q_prefactor(D, usp) - cplx(0.36636)) < 1e-3);

    CHECK_THROWS_AS(q_prefactor(ShiftSet({cplx(0.3), cplx(0.3)}), so), CoincidentShiftsError);
    CHECK_THROWS_AS(q_prefactor(ShiftSet({cplx(0.3), cplx(-0.3)}), so), PoleError);
}

TEST_CASE("square-root branch identity against literal quotient") {
    std::mt19937_64 eng(42);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    for (int trial = 0; trial < 50; ++trial) {
        int sz = 1 + static_cast<int>(eng() % 3);
        std::vector<cplx> d;
        for (int i = 0; i < sz; ++i) d.push_back(cplx(0.15 + 0.3 * i + 0.05 * u(eng), u(eng)));
        for (Symmetry sym : {Symmetry::SOEven, Symmetry::USp}) {
            GroupSpec g(sym, 3);
            cplx pref = q_prefactor(ShiftSet(d), g);
            cplx esum = 0.0;
            for (cplx x : d) esum += x;
            cplx b = pref / std::exp(-2.0 * 3.0 * esum);
            if (sz & 1) b = -b;
            cplx lit = literal_quotient(d, sym);
            CHECK(std::abs(b * b - lit) < 1e-10 * std::max(1.0, std::abs(lit)));
        }
    }
}

TEST_CASE("h_term cases") {
    GroupSpec so(Symmetry::SOEven, 2), usp(Symmetry::USp, 2);
    ShiftSet empty;
    CHECK(std::abs(h_term(empty, {}, so) - 1.0) < 1e-15);

    cplx a(0.3);
    cplx w[1] = {a};
    cplx single = h_term(empty, std::span<const cplx>(w, 1), so);
    CHECK(std::abs(single - 1.0 / (std::exp(0.6) - 1.0)) < 1e-14);  // -z'/z(0.6)
    CHECK(std::abs(single - cplx(1.21636)) < 1e-4);

    cplx w2[2] = {a, a};  // alpha + alphahat = 0.6
    cplx pair = h_term(empty, std::span<const cplx>(w2, 2), so);
    CHECK(std::abs(pair - std::exp(0.6) / std::pow(std::exp(0.6) - 1.0, 2)) < 1e-14);

    // USp flips the singleton's z'/z(2a) term but not the pair block
    CHECK(std::abs(h_term(empty, std::span<const cplx>(w, 1), usp) + single) < 1e-14);
    CHECK(std::abs(h_term(empty, std::span<const cplx>(w2, 2), usp) - pair) < 1e-14);

    // D-sum part
    ShiftSet D({cplx(0.1)});
    cplx expect = zfun(a - 0.1, ZMode::LogDeriv) - zfun(a + 0.1, ZMode::LogDeriv) -
                  zfun(2.0 * a, ZMode::LogDeriv);
    CHECK(std::abs(h_term(D, std::span<const cplx>(w, 1), so) - expect) < 1e-14);
}

TEST_CASE("jstar examples") {
    GroupSpec so(Symmetry::SOEven, 2);
    CHECK(std::abs(jstar(ShiftSet{}, so) - 1.0) < 1e-15);

    ShiftSet A({cplx(0.3)});
    cplx expect = 1.0 / (std::exp(0.6) - 1.0) - std::exp(-1.2) * zfun(0.6, ZMode::Value);
    CHECK(std::abs(jstar(A, so) - expect) < 1e-14);
    CHECK(std::abs(jstar(A, so) - cplx(0.54872)) < 1e-3);

    // q = 1 keeps only D = empty
    CHECK(std::abs(jstar(A, so, 1) - 1.0 / (std::exp(0.6) - 1.0)) < 1e-14);

    // q > |A| equals the unrestricted value bit-for-bit
    ShiftSet A2({cplx(0.3), cplx(0.45, 0.1)});
    cplx full = jstar(A2, so);
    cplx restricted = jstar(A2, so, 3);
    CHECK(full == restricted);

    // SO(2): J* of a single shift vanishes identically
    GroupSpec so2(Symmetry::SOEven, 1);
    CHECK(std::abs(jstar(A, so2)) < 1e-14);

    // USp(2): J*({a}) = -e^{-2a}
    GroupSpec usp1(Symmetry::USp, 1);
    CHECK(std::abs(jstar(A, usp1) - (-std::exp(-0.6))) < 1e-14);
}

TEST_CASE("jstar permutation invariance") {
    GroupSpec g(Symmetry::USp, 4);
    ShiftSet A({cplx(0.2, 0.1), cplx(0.35, -0.2), cplx(0.15, 0.05)});
    ShiftSet P({cplx(0.15, 0.05), cplx(0.2, 0.1), cplx(0.35, -0.2)});
    CHECK(std::abs(jstar(A, g) - jstar(P, g)) < 1e-14 * std::abs(jstar(A, g)));
}

TEST_CASE("jstar term audit") {
    GroupSpec g(Symmetry::SOEven, 3);
    ShiftSet A({cplx(0.2), cplx(0.3)});
    JstarStats st;
    jstar(A, g, 1, &st);
    CHECK(st.subsets_evaluated == 1);   // only D = empty
    CHECK(st.subsets_skipped == 3);
    CHECK(st.partitions_evaluated == 2);
    CHECK(st.max_subset_size == 0);
}

TEST_CASE("ratio_average basics") {
    GroupSpec so(Symmetry::SOEven, 2);
    CHECK(std::abs(ratio_average(ShiftSet{}, ShiftSet{}, so) - 1.0) < 1e-15);

    // A = B: integrand is identically 1; the D={a} term dies on the z-pole rule
    ShiftSet A({cplx(0.3)}), B({cplx(0.3)});
    CHECK(std::abs(ratio_average(A, B, so) - 1.0) < 1e-14);
    GroupSpec usp(Symmetry::USp, 2);
    CHECK(std::abs(ratio_average(A, B, usp) - 1.0) < 1e-14);

    CHECK_THROWS_AS(ratio_average(A, ShiftSet({cplx(0.1), cplx(0.2), cplx(0.3)}),
                                  GroupSpec(Symmetry::SOEven, 2)),
                    DimensionTooSmallError);
    CHECK_THROWS_AS(ratio_average(A, ShiftSet({cplx(-0.1)}), so), ValidationError);
}

TEST_CASE("jstar equals the B=A derivative of ratio_average") {
    const double h = 1e-5;
    for (Symmetry sym : {Symmetry::SOEven, Symmetry::USp}) {
        GroupSpec g(sym, 3);
        cplx a(0.3, 0.0);
        ShiftSet B({a});
        cplx rp = ratio_average(ShiftSet({a + h}), B, g);
        cplx rm = ratio_average(ShiftSet({a - h}), B, g);
        cplx fd = (rp - rm) / (2.0 * h);
        CHECK(std::abs(jstar(ShiftSet({a}), g) - fd) < 1e-6);
    }
}

TEST_CASE("jstar against Weyl-measure quadrature, N=2") {
    // independent oracle: eigenvalue densities of SO(4) and USp(4) integrated
    // with composite Simpson
    const double pi = 3.14159265358979323846;
    auto integrate2 = [&](auto f, int n) {
        cplx acc = 0.0;
        double h = pi / n;
        auto w = [&](int i) { return (i == 0 || i == n) ? 1.0 : ((i % 2) ? 4.0 : 2.0); };
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) acc += w(i) * w(j) * f(i * h, j * h);
        return acc * (h / 3) * (h / 3);
    };
    cplx a(0.3, 0.0), b(0.45, 0.0);
    auto stat = [&](cplx alpha, double t1, double t2) {
        cplx w = std::exp(-alpha), s = 0;
        for (double th : {t1, t2}) {
            cplx e(std::cos(th), std::sin(th));
            s += w * e / (1.0 - w * e) + w * std::conj(e) / (1.0 - w * std::conj(e));
        }
        return s;
    };
    for (Symmetry sym : {Symmetry::SOEven, Symmetry::USp}) {
        auto dens = [&](double t1, double t2) {
            double d = std::cos(t1) - std::cos(t2);
            double v = d * d;
            if (sym == Symmetry::USp)
                v *= std::sin(t1) * std::sin(t1) * std::sin(t2) * std::sin(t2);
            return v;
        };
        const int n = 300;
        cplx Zc = integrate2([&](double t1, double t2) { return cplx(dens(t1, t2), 0); }, n);
        cplx J2 = integrate2(
            [&](double t1, double t2) { return dens(t1, t2) * stat(a, t1, t2) * stat(b, t1, t2); },
            n);
        GroupSpec g(sym, 2);
        cplx expect = J2 / Zc;
        CHECK(std::abs(jstar(ShiftSet({a, b}), g) - expect) < 1e-8 * std::abs(expect));
    }
}

TEST_CASE("residue recursion via circle quadrature") {
    for (Symmetry sym : {Symmetry::SOEven, Symmetry::USp}) {
        GroupSpec g(sym, 3);
        const double N = g.dim_half;
        cplx beta(0.25, 0.0), rest(0.4, 0.0);

        auto f = [&](cplx a) { return jstar(ShiftSet({a, beta, rest}), g); };
        cplx res = residue_circle(f, -beta, 0.06, 96);
        cplx expect = jstar(ShiftSet({rest, beta}), g) + jstar(ShiftSet({rest, -beta}), g) +
                      2.0 * N * jstar(ShiftSet({rest}), g);
        CHECK(std::abs(res - expect) < 1e-8 * std::max(1.0, std::abs(expect)));

        cplx res0 = residue_circle(f, 0.0, 0.06, 96);
        CHECK(std::abs(res0) < 1e-8);
    }
}
