#ifndef NLD_HAAR_HPP
#define NLD_HAAR_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "nld/shiftcalc.hpp"

namespace nld {
namespace haar {

// One independent generator per sample index: identical (seed, stream_index)
// reproduces identical samples regardless of the parallel schedule.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_index = 0;

    std::mt19937_64 engine() const;
    // standard normal via Box-Muller on engine output (portable given the
    // fixed mt19937_64 sequence)
    static double gaussian(std::mt19937_64& eng);
};

struct EigenangleSample {
    std::vector<double> angles;      // sorted, in [0, pi]
    double structure_residual = 0.0;  // max deviation from the defining identity
    double det_check = 0.0;           // |det - 1|
};

EigenangleSample sample_eigenangles(const GroupSpec& g, const RngStream& rng);

struct McResult {
    cplx mean;
    double stderr_est = 0.0;  // jackknife over 100 batches
};

struct McOptions {
    int threads = 1;
    int jackknife_batches = 100;
};

// Monte Carlo average of prod_A Lambda(e^-a) / prod_B Lambda(e^-b).
McResult mc_ratio(const GroupSpec& g, const ShiftSet& A, const ShiftSet& B, std::uint64_t samples,
                  const RngStream& rng, const McOptions& opt = {});

// Monte Carlo average of prod_A (-e^-a) Lambda'/Lambda(e^-a).
McResult mc_logderiv(const GroupSpec& g, const ShiftSet& A, std::uint64_t samples,
                     const RngStream& rng, const McOptions& opt = {});

struct McRealResult {
    double mean = 0.0;
    double stderr_est = 0.0;
};

// Empirical n-level sum: average of sum over n-tuples of f at the angles.
McRealResult empirical_density(const GroupSpec& g,
                               const std::function<double(std::span<const double>)>& f, int n,
                               bool distinct, std::uint64_t samples, const RngStream& rng,
                               const McOptions& opt = {});

// Per-sample value of the ratio statistic on a fixed sample (test hook).
cplx ratio_statistic(std::span<const double> angles, std::span<const cplx> A,
                     std::span<const cplx> B);
cplx logderiv_statistic(std::span<const double> angles, std::span<const cplx> A);

// Deterministic fixed-topology pairwise sum, independent of thread count.
cplx pairwise_sum(std::span<const cplx> v);
double pairwise_sum(std::span<const double> v);

}  // namespace haar
}  // namespace nld

#endif
