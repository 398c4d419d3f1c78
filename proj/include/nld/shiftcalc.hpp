#ifndef NLD_SHIFTCALC_HPP
#define NLD_SHIFTCALC_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nld/errors.hpp"
#include "nld/specialfn.hpp"

namespace nld {

enum class Symmetry { SOEven, USp };

struct GroupSpec {
    Symmetry symmetry = Symmetry::SOEven;
    int dim_half = 1;  // N in SO(2N) / USp(2N)

    GroupSpec() = default;
    GroupSpec(Symmetry s, int n) : symmetry(s), dim_half(n) {
        if (n < 1) throw ValidationError("GroupSpec: N must be >= 1");
    }
};

enum class Side { None, K, L, M };

// Labeled finite list of complex shift parameters.
struct ShiftSet {
    struct Entry {
        int label;
        cplx value;
        Side side = Side::None;
    };
    std::vector<Entry> shifts;

    ShiftSet() = default;
    explicit ShiftSet(std::span<const cplx> values);
    ShiftSet(std::initializer_list<cplx> values)
        : ShiftSet(std::span<const cplx>(values.begin(), values.size())) {}

    std::size_t size() const { return shifts.size(); }
    std::vector<cplx> values() const;
    void add(cplx v, Side side = Side::None);
    void require_unique_labels() const;
};

// Partition of a label set into blocks of size 1 or 2.
struct PairPartition {
    std::vector<std::vector<int>> blocks;
};

namespace shiftcalc {

constexpr int kMaxShifts = 12;

// Involution numbers I(m): count of partitions into singletons and pairs.
std::uint64_t involution_number(int m);

// Emits every partition of `s` into singletons and pairs exactly once.
void pair_partitions(const ShiftSet& s, const std::function<void(const PairPartition&)>& visit);
std::vector<PairPartition> pair_partitions(const ShiftSet& s);

// Subset prefactor e^{-2N sum d} (-1)^|D| B(D) with the square root resolved
// by perfect-square pairing.  SO uses prod z(2d), USp uses prod z(-2d).
cplx q_prefactor(const ShiftSet& D, const GroupSpec& g);

// One H_D block: W empty -> 1; singleton/pair per group symmetry.
cplx h_term(const ShiftSet& D, std::span<const cplx> W, const GroupSpec& g);

// Counters for the restricted-support term audit.
struct JstarStats {
    std::uint64_t subsets_evaluated = 0;
    std::uint64_t subsets_skipped = 0;   // excluded by the |D| < q rule
    std::uint64_t partitions_evaluated = 0;
    int max_subset_size = 0;
};

// J*(A) for SO(2N) or USp(2N); q restricts the subset sum to |D| < q.
cplx jstar(const ShiftSet& A, const GroupSpec& g, std::optional<int> q = std::nullopt,
           JstarStats* stats = nullptr);

// Span-based fast path used by the quadrature drivers.
cplx jstar_eval(std::span<const cplx> shifts, const GroupSpec& g, int q_limit = -1,
                JstarStats* stats = nullptr);

// Ratio average R(A;B) over the group, evaluated by the subset formula with
// the pairing-resolved square root.  Requires N >= |B| and Re(beta) > 0.
cplx ratio_average(const ShiftSet& A, const ShiftSet& B, const GroupSpec& g);

}  // namespace shiftcalc

// Residue of f at `center` by trapezoidal circle quadrature (spectrally
// accurate for f analytic in a punctured neighborhood).
cplx residue_circle(const std::function<cplx(cplx)>& f, cplx center, double radius,
                    int points = 64);

}  // namespace nld

#endif
