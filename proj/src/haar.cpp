#include "nld/haar.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

namespace nld {
namespace haar {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// ---- quaternion arithmetic for the USp construction ----
struct Quat {
    double a = 0, b = 0, c = 0, d = 0;  // a + bi + cj + dk

    Quat() = default;
    Quat(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

    Quat conj() const { return {a, -b, -c, -d}; }
    double norm2() const { return a * a + b * b + c * c + d * d; }

    Quat operator+(const Quat& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Quat operator-(const Quat& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Quat operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
    Quat operator*(const Quat& o) const {
        return {a * o.a - b * o.b - c * o.c - d * o.d,
                a * o.b + b * o.a + c * o.d - d * o.c,
                a * o.c - b * o.d + c * o.a + d * o.b,
                a * o.d + b * o.c - c * o.b + d * o.a};
    }
};

using QMat = std::vector<Quat>;  // row-major n x n

Quat& at(QMat& m, int n, int i, int j) { return m[i * n + j]; }
const Quat& at(const QMat& m, int n, int i, int j) { return m[i * n + j]; }

// Householder QR over the quaternions; returns Q with Q*Q = I and the
// column-phase convention that makes R's diagonal real and positive.
QMat quaternion_haar(int n, std::mt19937_64& eng) {
    QMat A(n * n);
    for (auto& q : A)
        q = Quat(RngStream::gaussian(eng), RngStream::gaussian(eng), RngStream::gaussian(eng),
                 RngStream::gaussian(eng));

    std::vector<QMat> reflectors;  // u-vectors, padded with leading zeros
    for (int k = 0; k < n; ++k) {
        // column k from row k down
        double nx2 = 0;
        for (int i = k; i < n; ++i) nx2 += at(A, n, i, k).norm2();
        double nx = std::sqrt(nx2);
        Quat alpha = at(A, n, k, k);
        double aa = std::sqrt(alpha.norm2());
        Quat phase = aa > 1e-300 ? alpha * (1.0 / aa) : Quat(1, 0, 0, 0);

        QMat u(n);
        for (int i = k; i < n; ++i) u[i] = at(A, n, i, k);
        u[k] = u[k] + phase * nx;
        double u2 = 0;
        for (int i = k; i < n; ++i) u2 += u[i].norm2();
        if (u2 < 1e-300) {
            reflectors.push_back(QMat(n));
            continue;
        }
        double beta = 2.0 / u2;
        // apply H = I - beta u u* to the remaining columns of A
        for (int j = k; j < n; ++j) {
            Quat s(0, 0, 0, 0);
            for (int i = k; i < n; ++i) s = s + u[i].conj() * at(A, n, i, j);
            s = s * beta;
            for (int i = k; i < n; ++i) at(A, n, i, j) = at(A, n, i, j) - u[i] * s;
        }
        reflectors.push_back(u);
    }

    // Q = H_1 H_2 ... H_n applied to the identity
    QMat Q(n * n);
    for (int i = 0; i < n; ++i) at(Q, n, i, i) = Quat(1, 0, 0, 0);
    for (int k = n - 1; k >= 0; --k) {
        const QMat& u = reflectors[k];
        double u2 = 0;
        for (int i = 0; i < n; ++i) u2 += u[i].norm2();
        if (u2 < 1e-300) continue;
        double beta = 2.0 / u2;
        for (int j = 0; j < n; ++j) {
            Quat s(0, 0, 0, 0);
            for (int i = k; i < n; ++i) s = s + u[i].conj() * at(Q, n, i, j);
            s = s * beta;
            for (int i = k; i < n; ++i) at(Q, n, i, j) = at(Q, n, i, j) - u[i] * s;
        }
    }

    // R diagonal after the reflections is -phase_k * nx_k; absorb the unit
    // quaternion phases into Q's columns (right-multiplication by diag(s)).
    // Recompute the phases from A (now upper triangular = R).
    for (int j = 0; j < n; ++j) {
        Quat rjj = at(A, n, j, j);
        double m = std::sqrt(rjj.norm2());
        if (m < 1e-300) continue;
        Quat s = rjj * (1.0 / m);
        for (int i = 0; i < n; ++i) at(Q, n, i, j) = at(Q, n, i, j) * s;
    }
    return Q;
}

Eigen::MatrixXcd embed_quaternion(const QMat& M, int n) {
    // q = alpha + beta j with alpha = a+bi, beta = c+di maps to
    // [[alpha, beta], [-conj beta, conj alpha]] in N x N block form.
    Eigen::MatrixXcd U(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Quat& q = at(M, n, i, j);
            cplx alpha(q.a, q.b), beta(q.c, q.d);
            U(i, j) = alpha;
            U(i, j + n) = beta;
            U(i + n, j) = -std::conj(beta);
            U(i + n, j + n) = std::conj(alpha);
        }
    return U;
}

std::vector<double> fold_angles(const Eigen::VectorXcd& ev, double* unit_dev) {
    const int dim = static_cast<int>(ev.size());
    double dev = 0.0;
    std::vector<double> folded;
    folded.reserve(dim);
    for (int i = 0; i < dim; ++i) {
        dev = std::max(dev, std::abs(std::abs(ev[i]) - 1.0));
        folded.push_back(std::abs(std::arg(ev[i])));
    }
    if (unit_dev) *unit_dev = dev;
    std::sort(folded.begin(), folded.end());
    // conjugate pairs give each angle twice; keep one of each
    std::vector<double> angles;
    angles.reserve(dim / 2);
    for (int i = 0; i + 1 < dim; i += 2) {
        if (std::abs(folded[i] - folded[i + 1]) > 1e-8)
            throw NumericalBreakdownError("eigenangle pairing tolerance exceeded");
        angles.push_back(0.5 * (folded[i] + folded[i + 1]));
    }
    return angles;
}

struct SampleScratch {
    Eigen::MatrixXd G;
};

EigenangleSample sample_so(int N, std::mt19937_64& eng) {
    const int dim = 2 * N;
    Eigen::MatrixXd G(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) G(i, j) = RngStream::gaussian(eng);

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j)
        if (R(j, j) < 0) Q.col(j) = -Q.col(j);
    if (Q.determinant() < 0) Q.col(dim - 1) = -Q.col(dim - 1);  // coset translation

    EigenangleSample out;
    out.structure_residual = (Q * Q.transpose() - Eigen::MatrixXd::Identity(dim, dim))
                                 .cwiseAbs()
                                 .maxCoeff();
    out.det_check = std::abs(Q.determinant() - 1.0);

    Eigen::EigenSolver<Eigen::MatrixXd> es(Q, /*computeEigenvectors=*/false);
    double unit_dev = 0.0;
    out.angles = fold_angles(es.eigenvalues(), &unit_dev);
    if (unit_dev > 1e-10 || out.structure_residual > 1e-10)
        throw NumericalBreakdownError("SO sample residual exceeds 1e-10");
    return out;
}

EigenangleSample sample_usp(int N, std::mt19937_64& eng) {
    QMat Q = quaternion_haar(N, eng);
    Eigen::MatrixXcd U = embed_quaternion(Q, N);
    const int dim = 2 * N;

    Eigen::MatrixXcd Z = Eigen::MatrixXcd::Zero(dim, dim);
    for (int i = 0; i < N; ++i) {
        Z(i, i + N) = 1.0;
        Z(i + N, i) = -1.0;
    }
    double unitary_res =
        (U * U.adjoint() - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    double symp_res = (U * Z * U.transpose() - Z).cwiseAbs().maxCoeff();

    EigenangleSample out;
    out.structure_residual = std::max(unitary_res, symp_res);
    out.det_check = std::abs(U.determinant() - 1.0);

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(U, /*computeEigenvectors=*/false);
    double unit_dev = 0.0;
    out.angles = fold_angles(es.eigenvalues(), &unit_dev);
    if (unit_dev > 1e-10 || out.structure_residual > 1e-10)
        throw NumericalBreakdownError("USp sample residual exceeds 1e-10");
    return out;
}

// Runs fn(sample_index) over [0, samples) on `threads` threads, storing each
// result by index; the later reduction order is schedule-independent.
template <typename T, typename Fn>
std::vector<T> map_samples(std::uint64_t samples, int threads, Fn fn) {
    std::vector<T> vals(samples);
    if (threads <= 1) {
        for (std::uint64_t i = 0; i < samples; ++i) vals[i] = fn(i);
        return vals;
    }
    std::atomic<std::uint64_t> next{0};
    const std::uint64_t grain = 64;
    auto worker = [&]() {
        for (;;) {
            std::uint64_t lo = next.fetch_add(grain);
            if (lo >= samples) break;
            std::uint64_t hi = std::min(samples, lo + grain);
            for (std::uint64_t i = lo; i < hi; ++i) vals[i] = fn(i);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return vals;
}

template <typename T>
T pairwise_sum_impl(const T* v, std::size_t n) {
    if (n <= 8) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum_impl(v, h) + pairwise_sum_impl(v + h, n - h);
}

// jackknife over batches: delete-one-batch means
double jackknife_stderr(std::span<const cplx> vals, cplx mean, int batches) {
    const std::uint64_t n = vals.size();
    if (n < 2) return 0.0;
    int B = std::min<std::uint64_t>(batches, n);
    cplx total = mean * static_cast<double>(n);
    double acc = 0.0;
    std::uint64_t lo = 0;
    std::vector<cplx> deleted(B);
    for (int b = 0; b < B; ++b) {
        std::uint64_t hi = (b + 1) * n / B;
        cplx bs = pairwise_sum_impl(vals.data() + lo, hi - lo);
        deleted[b] = (total - bs) / static_cast<double>(n - (hi - lo));
        lo = hi;
    }
    cplx dmean = pairwise_sum_impl(deleted.data(), deleted.size()) / static_cast<double>(B);
    for (int b = 0; b < B; ++b) acc += std::norm(deleted[b] - dmean);
    return std::sqrt(acc * (B - 1.0) / B);
}

}  // namespace

std::mt19937_64 RngStream::engine() const {
    std::uint64_t s = splitmix64(seed ^ splitmix64(stream_index + 0x5851f42d4c957f2dull));
    return std::mt19937_64(s);
}

double RngStream::gaussian(std::mt19937_64& eng) {
    // Box-Muller; consumes two uniforms per pair, second value discarded to
    // keep the per-call stream layout simple and portable.
    double u1 = (eng() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    double u2 = (eng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

EigenangleSample sample_eigenangles(const GroupSpec& g, const RngStream& rng) {
    auto eng = rng.engine();
    return g.symmetry == Symmetry::SOEven ? sample_so(g.dim_half, eng)
                                          : sample_usp(g.dim_half, eng);
}

cplx ratio_statistic(std::span<const double> angles, std::span<const cplx> A,
                     std::span<const cplx> B) {
    auto lambda = [&](cplx w) {
        cplx p = 1.0;
        for (double th : angles) {
            cplx e(std::cos(th), std::sin(th));
            p *= (1.0 - w * e) * (1.0 - w * std::conj(e));
        }
        return p;
    };
    cplx v = 1.0;
    for (cplx a : A) v *= lambda(std::exp(-a));
    for (cplx b : B) v /= lambda(std::exp(-b));
    return v;
}

cplx logderiv_statistic(std::span<const double> angles, std::span<const cplx> A) {
    cplx v = 1.0;
    for (cplx a : A) {
        cplx w = std::exp(-a);
        cplx s = 0.0;
        for (double th : angles) {
            cplx e(std::cos(th), std::sin(th));
            s += w * e / (1.0 - w * e) + w * std::conj(e) / (1.0 - w * std::conj(e));
        }
        v *= s;
    }
    return v;
}

McResult mc_ratio(const GroupSpec& g, const ShiftSet& A, const ShiftSet& B, std::uint64_t samples,
                  const RngStream& rng, const McOptions& opt) {
    if (samples < 1) throw ValidationError("mc_ratio: samples >= 1 required");
    auto av = A.values();
    auto bv = B.values();
    for (cplx b : bv)
        if (b.real() <= 0.0) throw ValidationError("mc_ratio: Re(beta) > 0 required");
    auto vals = map_samples<cplx>(samples, opt.threads, [&](std::uint64_t i) {
        auto s = sample_eigenangles(g, RngStream{rng.seed, rng.stream_index + i});
        return ratio_statistic(s.angles, av, bv);
    });
    cplx mean = pairwise_sum_impl(vals.data(), vals.size()) / static_cast<double>(samples);
    return {mean, jackknife_stderr(vals, mean, opt.jackknife_batches)};
}

McResult mc_logderiv(const GroupSpec& g, const ShiftSet& A, std::uint64_t samples,
                     const RngStream& rng, const McOptions& opt) {
    auto av = A.values();
    if (static_cast<int>(av.size()) > g.dim_half)
        throw DimensionTooSmallError("mc_logderiv: requires |A| <= N");
    for (cplx a : av)
        if (a.real() <= 0.0) throw ValidationError("mc_logderiv: Re(alpha) > 0 required");
    auto vals = map_samples<cplx>(samples, opt.threads, [&](std::uint64_t i) {
        auto s = sample_eigenangles(g, RngStream{rng.seed, rng.stream_index + i});
        return logderiv_statistic(s.angles, av);
    });
    cplx mean = pairwise_sum_impl(vals.data(), vals.size()) / static_cast<double>(samples);
    return {mean, jackknife_stderr(vals, mean, opt.jackknife_batches)};
}

McRealResult empirical_density(const GroupSpec& g,
                               const std::function<double(std::span<const double>)>& f, int n,
                               bool distinct, std::uint64_t samples, const RngStream& rng,
                               const McOptions& opt) {
    if (n > g.dim_half) throw ValidationError("empirical_density: n <= N required");
    if (n < 1 || n > 3) throw ValidationError("empirical_density: n in 1..3");
    auto vals = map_samples<double>(samples, opt.threads, [&](std::uint64_t i) {
        auto s = sample_eigenangles(g, RngStream{rng.seed, rng.stream_index + i});
        const auto& th = s.angles;
        const int N = static_cast<int>(th.size());
        double acc = 0.0;
        double buf[3];
        if (n == 1) {
            for (int a = 0; a < N; ++a) {
                buf[0] = th[a];
                acc += f(std::span<const double>(buf, 1));
            }
        } else if (n == 2) {
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b) {
                    if (distinct && a == b) continue;
                    buf[0] = th[a];
                    buf[1] = th[b];
                    acc += f(std::span<const double>(buf, 2));
                }
        } else {
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b)
                    for (int c = 0; c < N; ++c) {
                        if (distinct && (a == b || b == c || a == c)) continue;
                        buf[0] = th[a];
                        buf[1] = th[b];
                        buf[2] = th[c];
                        acc += f(std::span<const double>(buf, 3));
                    }
        }
        return acc;
    });
    double mean = pairwise_sum_impl(vals.data(), vals.size()) / static_cast<double>(samples);
    // real-valued jackknife
    std::vector<cplx> cv(vals.begin(), vals.end());
    double se = jackknife_stderr(cv, mean, opt.jackknife_batches);
    return {mean, se};
}

cplx pairwise_sum(std::span<const cplx> v) { return pairwise_sum_impl(v.data(), v.size()); }
double pairwise_sum(std::span<const double> v) { return pairwise_sum_impl(v.data(), v.size()); }

}  // namespace haar
}  // namespace nld
