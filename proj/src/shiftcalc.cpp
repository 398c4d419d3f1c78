#include "nld/shiftcalc.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

namespace nld {

ShiftSet::ShiftSet(std::span<const cplx> values) {
    int lbl = 0;
    for (cplx v : values) shifts.push_back({lbl++, v, Side::None});
}

std::vector<cplx> ShiftSet::values() const {
    std::vector<cplx> out;
    out.reserve(shifts.size());
    for (const auto& e : shifts) out.push_back(e.value);
    return out;
}

void ShiftSet::add(cplx v, Side side) {
    int lbl = shifts.empty() ? 0 : shifts.back().label + 1;
    shifts.push_back({lbl, v, side});
}

void ShiftSet::require_unique_labels() const {
    for (std::size_t i = 0; i < shifts.size(); ++i)
        for (std::size_t j = i + 1; j < shifts.size(); ++j)
            if (shifts[i].label == shifts[j].label)
                throw ValidationError("ShiftSet: duplicate label " +
                                      std::to_string(shifts[i].label));
}

namespace shiftcalc {
namespace {

using specialfn::zfun;
using specialfn::ZMode;

void check_guard(std::size_t m) {
    if (m > kMaxShifts)
        throw TooLargeError("shift set larger than the combinatorial guard (12)");
}

void require_distinct(std::span<const cplx> v) {
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            if (std::abs(v[i] - v[j]) < 1e-14)
                throw CoincidentShiftsError("coincident shifts in formula evaluation");
}

// recursive enumeration: first element is a singleton or pairs with a later one
void enumerate_partitions(std::vector<int>& idx, PairPartition& part,
                          const std::function<void(const PairPartition&)>& visit) {
    if (idx.empty()) {
        visit(part);
        return;
    }
    int first = idx.front();
    std::vector<int> rest(idx.begin() + 1, idx.end());

    part.blocks.push_back({first});
    enumerate_partitions(rest, part, visit);
    part.blocks.pop_back();

    for (std::size_t j = 0; j < rest.size(); ++j) {
        std::vector<int> rem;
        rem.reserve(rest.size() - 1);
        for (std::size_t t = 0; t < rest.size(); ++t)
            if (t != j) rem.push_back(rest[t]);
        part.blocks.push_back({first, rest[j]});
        enumerate_partitions(rem, part, visit);
        part.blocks.pop_back();
    }
}

// Pairing-resolved square root of the subset block.
//   SO:  B(D) = prod z(2d) * prod_{d<d'} z(d+d')z(-d-d') / (z(d-d')z(d'-d))
//   USp: same with prod z(-2d) in place of prod z(2d)
cplx subset_root(std::span<const cplx> D, Symmetry sym) {
    cplx prod = 1.0;
    for (cplx d : D)
        prod *= zfun(sym == Symmetry::SOEven ? 2.0 * d : -2.0 * d, ZMode::Value);
    for (std::size_t i = 0; i < D.size(); ++i)
        for (std::size_t j = i + 1; j < D.size(); ++j) {
            cplx s = D[i] + D[j], r = D[i] - D[j];
            prod *= zfun(s, ZMode::Value) * zfun(-s, ZMode::Value) /
                    (zfun(r, ZMode::Value) * zfun(-r, ZMode::Value));
        }
    return prod;
}

cplx prefactor_eval(std::span<const cplx> D, const GroupSpec& g) {
    cplx sum = 0.0;
    for (cplx d : D) sum += d;
    cplx res = std::exp(-2.0 * static_cast<double>(g.dim_half) * sum);
    if (D.size() & 1u) res = -res;
    return res * subset_root(D, g.symmetry);
}

cplx h_single(cplx a, std::span<const cplx> D, Symmetry sym) {
    cplx acc = 0.0;
    for (cplx d : D)
        acc += zfun(a - d, ZMode::LogDeriv) - zfun(a + d, ZMode::LogDeriv);
    cplx z2a = zfun(2.0 * a, ZMode::LogDeriv);
    return sym == Symmetry::SOEven ? acc - z2a : acc + z2a;
}

// Pair blocks carry the same sign for both symmetries; only the z'/z(2a)
// term of the singleton flips.  (Verified against Weyl-measure quadrature
// and required by the residue recursion.)
cplx h_pair(cplx a, cplx ah, Symmetry) { return zfun(a + ah, ZMode::LogDeriv2); }

// Sum over pair partitions of the rest-list of products of H blocks.
// hs[i] are the precomputed singleton values indexed by position in A,
// pairs come from the flat cache (i < j assumed by the caller layout).
struct PartitionSummer {
    const cplx* hs;
    const cplx* pair_cache;  // kMaxShifts x kMaxShifts, both triangles filled
    std::uint64_t* count;

    cplx run(const int* rest, int m) const {
        if (m == 0) {
            if (count) ++*count;
            return 1.0;
        }
        int first = rest[0];
        int buf[kMaxShifts];
        for (int i = 0; i < m - 1; ++i) buf[i] = rest[i + 1];

        cplx total = hs[first] * run(buf, m - 1);
        for (int j = 0; j < m - 1; ++j) {
            int rem[kMaxShifts];
            int c = 0;
            for (int t = 0; t < m - 1; ++t)
                if (t != j) rem[c++] = buf[t];
            total += pair_cache[first * kMaxShifts + buf[j]] * run(rem, c);
        }
        return total;
    }
};

}  // namespace

std::uint64_t involution_number(int m) {
    if (m <= 1) return 1;
    std::uint64_t a = 1, b = 1;  // I(0), I(1)
    for (int k = 2; k <= m; ++k) {
        std::uint64_t c = b + static_cast<std::uint64_t>(k - 1) * a;
        a = b;
        b = c;
    }
    return b;
}

void pair_partitions(const ShiftSet& s, const std::function<void(const PairPartition&)>& visit) {
    check_guard(s.size());
    s.require_unique_labels();
    std::vector<int> idx;
    for (const auto& e : s.shifts) idx.push_back(e.label);
    PairPartition part;
    enumerate_partitions(idx, part, visit);
}

std::vector<PairPartition> pair_partitions(const ShiftSet& s) {
    std::vector<PairPartition> out;
    pair_partitions(s, [&](const PairPartition& p) { out.push_back(p); });
    return out;
}

cplx q_prefactor(const ShiftSet& D, const GroupSpec& g) {
    auto v = D.values();
    require_distinct(v);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            if (std::abs(v[i] + v[j]) < 1e-14)
                throw PoleError("q_prefactor: d + d' = 0 hits a z pole");
    return prefactor_eval(v, g);
}

cplx h_term(const ShiftSet& D, std::span<const cplx> W, const GroupSpec& g) {
    auto dv = D.values();
    switch (W.size()) {
        case 0: return 1.0;
        case 1: return h_single(W[0], dv, g.symmetry);
        case 2: return h_pair(W[0], W[1], g.symmetry);
        default: throw ValidationError("h_term: blocks have at most 2 elements");
    }
}

cplx jstar_eval(std::span<const cplx> A, const GroupSpec& g, int q_limit, JstarStats* stats) {
    const int m = static_cast<int>(A.size());
    check_guard(A.size());
    require_distinct(A);

    // pair blocks do not depend on D
    std::array<cplx, kMaxShifts * kMaxShifts> pair_cache;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            cplx hp = h_pair(A[i], A[j], g.symmetry);
            pair_cache[i * kMaxShifts + j] = hp;
            pair_cache[j * kMaxShifts + i] = hp;
        }

    cplx total = 0.0;
    std::array<cplx, kMaxShifts> dbuf, hbuf;
    std::array<int, kMaxShifts> rest;
    PartitionSummer summer{hbuf.data(), pair_cache.data(),
                           stats ? &stats->partitions_evaluated : nullptr};
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        int dsz = std::popcount(mask);
        if (q_limit >= 0 && dsz >= q_limit) {
            if (stats) ++stats->subsets_skipped;
            continue;
        }
        int nd = 0, nr = 0;
        for (int i = 0; i < m; ++i) {
            if (mask & (1u << i))
                dbuf[nd++] = A[i];
            else
                rest[nr++] = i;
        }
        std::span<const cplx> D(dbuf.data(), nd);
        cplx pref = prefactor_eval(D, g);
        for (int r = 0; r < nr; ++r) hbuf[rest[r]] = h_single(A[rest[r]], D, g.symmetry);
        total += pref * summer.run(rest.data(), nr);
        if (stats) {
            ++stats->subsets_evaluated;
            stats->max_subset_size = std::max(stats->max_subset_size, dsz);
        }
    }
    return total;
}

cplx jstar(const ShiftSet& A, const GroupSpec& g, std::optional<int> q, JstarStats* stats) {
    auto v = A.values();
    return jstar_eval(v, g, q ? *q : -1, stats);
}

cplx ratio_average(const ShiftSet& A, const ShiftSet& B, const GroupSpec& g) {
    auto av = A.values();
    auto bv = B.values();
    if (static_cast<int>(bv.size()) > g.dim_half)
        throw DimensionTooSmallError("ratio_average: requires N >= |B|");
    for (cplx b : bv)
        if (b.real() <= 0.0)
            throw ValidationError("ratio_average: Re(beta) > 0 required");
    require_distinct(av);
    require_distinct(bv);
    check_guard(av.size());

    const double N = g.dim_half;
    const bool so = g.symmetry == Symmetry::SOEven;
    const int m = static_cast<int>(av.size());

    auto near_lattice = [](cplx x) {
        double k = std::round(x.imag() / (2.0 * 3.14159265358979323846));
        return std::abs(x - cplx(0.0, 2.0 * 3.14159265358979323846 * k)) < 1e-12;
    };

    cplx total = 0.0;
    std::vector<cplx> E;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        E.clear();
        cplx dsum = 0.0;
        for (int i = 0; i < m; ++i) {
            if (mask & (1u << i)) {
                E.push_back(-av[i]);  // D^-
                dsum += av[i];
            } else {
                E.push_back(av[i]);  // A \ D
            }
        }
        // a z pole in the Z(E,B) denominator kills the whole term
        bool vanishes = false;
        for (cplx e : E)
            for (cplx b : bv)
                if (near_lattice(e + b)) vanishes = true;
        if (vanishes) continue;

        cplx root = 1.0;
        for (std::size_t i = 0; i < E.size(); ++i)
            for (std::size_t j = i + 1; j < E.size(); ++j)
                root *= zfun(E[i] + E[j], specialfn::ZMode::Value);
        if (so) {
            for (cplx b : bv) root *= zfun(2.0 * b, specialfn::ZMode::Value);
        } else {
            for (cplx e : E) root *= zfun(2.0 * e, specialfn::ZMode::Value);
        }
        for (std::size_t i = 0; i < bv.size(); ++i)
            for (std::size_t j = i + 1; j < bv.size(); ++j)
                root *= zfun(bv[i] + bv[j], specialfn::ZMode::Value);
        for (cplx e : E)
            for (cplx b : bv) root /= zfun(e + b, specialfn::ZMode::Value);

        total += std::exp(-2.0 * N * dsum) * root;
    }
    return total;
}

}  // namespace shiftcalc

cplx residue_circle(const std::function<cplx(cplx)>& f, cplx center, double radius, int points) {
    // (1/2*pi*i) closed integral = (r/points) * sum f(c + r e^{it}) e^{it}
    cplx acc = 0.0;
    for (int k = 0; k < points; ++k) {
        double t = 2.0 * 3.14159265358979323846 * (k + 0.5) / points;
        cplx e(std::cos(t), std::sin(t));
        acc += f(center + radius * e) * e;
    }
    return acc * (radius / static_cast<double>(points));
}

}  // namespace nld
