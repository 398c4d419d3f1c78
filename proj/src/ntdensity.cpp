#include "nld/ntdensity.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace nld {
namespace ntdensity {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

using specialfn::digamma;
using specialfn::gamma_family;
using specialfn::GammaMode;
using specialfn::zeta1p;
using specialfn::ZetaMode;

// psi'/psi(1/2 + beta) = s_ell * ell_d + u(beta)
double ell_slope(Family f) { return f == Family::Elliptic ? -2.0 : -1.0; }

cplx beta_part(Family f, cplx beta) {
    if (f == Family::Elliptic) return -(digamma(1.0 - beta) + digamma(1.0 + beta));
    return 0.5 * digamma(0.25 + 0.5 * beta) + 0.5 * digamma(0.25 - 0.5 * beta);
}

// subset prefactor exponent: e^{-c sigma ell_d}
double sigma_slope(Family f) { return f == Family::Elliptic ? 2.0 : 1.0; }

// zeta-block square root resolved by pairing (elliptic: prod zeta(1+2d),
// Dirichlet: prod zeta(1-2d), cross factors shared)
cplx zeta_root(Family fam, std::span<const cplx> D) {
    cplx v = 1.0;
    for (cplx d : D)
        v *= zeta1p(fam == Family::Elliptic ? 2.0 * d : -2.0 * d, ZetaMode::Value);
    for (std::size_t i = 0; i < D.size(); ++i)
        for (std::size_t j = i + 1; j < D.size(); ++j) {
            cplx ss = D[i] + D[j], dd = D[i] - D[j];
            v *= zeta1p(ss, ZetaMode::Value) * zeta1p(-ss, ZetaMode::Value) /
                 (zeta1p(dd, ZetaMode::Value) * zeta1p(-dd, ZetaMode::Value));
        }
    return v;
}

cplx gamma_block(Family fam, std::span<const cplx> D) {
    cplx v = 1.0;
    for (cplx d : D)
        v *= gamma_family(d, fam == Family::Elliptic ? GammaMode::RatioElliptic
                                                     : GammaMode::RatioDirichlet);
    return v;
}

// H-tilde blocks: zeta part plus the per-prime arithmetic log-derivative
cplx h_single_nt(const FamilyContext& ctx, std::span<const cplx> D, cplx a) {
    cplx acc = 0.0;
    for (cplx d : D)
        acc += zeta1p(a - d, ZetaMode::LogDeriv) - zeta1p(a + d, ZetaMode::LogDeriv);
    cplx z2 = zeta1p(2.0 * a, ZetaMode::LogDeriv);
    acc += ctx.family == Family::Elliptic ? -z2 : z2;
    cplx w[1] = {a};
    return acc + arith::euler_deriv(ctx.primes, D, std::span<const cplx>(w, 1));
}

cplx h_pair_nt(const FamilyContext& ctx, std::span<const cplx> D, cplx a1, cplx a2) {
    cplx w[2] = {a1, a2};
    return zeta1p(a1 + a2, ZetaMode::LogDeriv2) +
           arith::euler_deriv(ctx.primes, D, std::span<const cplx>(w, 2));
}

cplx partition_sum_nt(const FamilyContext& ctx, std::span<const cplx> D,
                      std::span<const cplx> rest) {
    const int m = static_cast<int>(rest.size());
    if (m == 0) return 1.0;
    cplx hs[8];
    for (int i = 0; i < m; ++i) hs[i] = h_single_nt(ctx, D, rest[i]);
    cplx pc[8][8];
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) pc[i][j] = pc[j][i] = h_pair_nt(ctx, D, rest[i], rest[j]);

    struct Rec {
        const cplx* hs;
        const cplx (*pc)[8];
        cplx run(const int* idx, int k) const {
            if (k == 0) return 1.0;
            int first = idx[0];
            int buf[8];
            for (int i = 0; i < k - 1; ++i) buf[i] = idx[i + 1];
            cplx total = hs[first] * run(buf, k - 1);
            for (int j = 0; j < k - 1; ++j) {
                int rem[8];
                int c = 0;
                for (int t = 0; t < k - 1; ++t)
                    if (t != j) rem[c++] = buf[t];
                total += pc[first][buf[j]] * run(rem, c);
            }
            return total;
        }
    } rec{hs, pc};
    int idx[8];
    for (int i = 0; i < m; ++i) idx[i] = i;
    return rec.run(idx, m);
}

// sum over selected discriminants of e^{-c sigma ell} prod_B psi'/psi
cplx discriminant_sum(const FamilyContext& ctx, cplx sigma, std::span<const cplx> B) {
    const double s = ell_slope(ctx.family);
    const double c = sigma_slope(ctx.family);
    const int nb = static_cast<int>(B.size());
    cplx u[8];
    for (int i = 0; i < nb; ++i) u[i] = beta_part(ctx.family, B[i]);

    // prod_i (u_i + s ell) = sum_k s^k e_{nb-k}(u) ell^k
    cplx esym[9];
    for (int i = 0; i <= nb; ++i) esym[i] = (i == 0) ? cplx(1.0) : cplx(0.0);
    for (int i = 0; i < nb; ++i)
        for (int k = std::min(i + 1, nb); k >= 1; --k) esym[k] += esym[k - 1] * u[i];
    cplx coef[9];
    double spow = 1.0;
    for (int k = 0; k <= nb; ++k) {
        coef[k] = esym[nb - k] * spow;
        spow *= s;
    }

    cplx tau = c * sigma;
    if (nb == 0 && std::abs(tau) < 1e-15) return cplx(ctx.x_star, 0.0);
    cplx acc = 0.0;
    for (double ell : ctx.ell) {
        cplx e = std::exp(-tau * ell);
        cplx poly = coef[nb];
        for (int k = nb - 1; k >= 0; --k) poly = poly * ell + coef[k];
        acc += e * poly;
    }
    return acc;
}

}  // namespace

FamilyContext make_family_context(Family family, const arith::CurveFamily* curve,
                                  std::int64_t x_max, std::int64_t p_max) {
    FamilyContext ctx;
    ctx.family = family;
    ctx.x_max = x_max;
    ctx.p_max = p_max;
    if (family == Family::Elliptic) {
        if (!curve) throw ValidationError("elliptic family needs a curve");
        ctx.curve = *curve;
        ctx.primes = arith::make_prime_ctx(&*ctx.curve, p_max);
        double m = std::sqrt(static_cast<double>(curve->conductor));
        for (std::int64_t d : arith::fundamental_discriminants(x_max))
            if (arith::family_selector(*curve, d))
                ctx.ell.push_back(std::log(m * d / (2.0 * kPi)));
    } else {
        ctx.primes = arith::make_prime_ctx(nullptr, p_max);
        for (std::int64_t d : arith::fundamental_discriminants(x_max))
            ctx.ell.push_back(std::log(d / kPi));
    }
    ctx.x_star = static_cast<double>(ctx.ell.size());
    if (ctx.ell.empty()) throw EmptySelectionError("family selection is empty");
    return ctx;
}

cplx psi_logderiv(Family family, cplx beta, std::int64_t d, const arith::CurveFamily* curve) {
    if (std::abs(beta.real()) >= 0.5)
        throw ValidationError("psi_logderiv: |Re beta| < 1/2 required");
    if (family == Family::Elliptic) {
        if (!curve) throw ValidationError("psi_logderiv: elliptic family needs a curve");
        double ell = std::log(std::sqrt(static_cast<double>(curve->conductor)) * d / (2.0 * kPi));
        return -2.0 * ell + beta_part(family, beta);
    }
    return -std::log(static_cast<double>(d) / kPi) + beta_part(family, beta);
}

cplx jstar_family(const FamilyContext& ctx, std::span<const cplx> A, std::span<const cplx> B) {
    const int m = static_cast<int>(A.size());
    if (m > 6) throw TooLargeError("jstar_family: |A| <= 6");
    cplx total = 0.0;
    cplx dbuf[8], rest[8];
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        int nd = 0, nr = 0;
        cplx sigma = 0.0;
        for (int i = 0; i < m; ++i) {
            if (mask & (1u << i)) {
                dbuf[nd++] = A[i];
                sigma += A[i];
            } else {
                rest[nr++] = A[i];
            }
        }
        std::span<const cplx> D(dbuf, nd);
        cplx term = gamma_block(ctx.family, D) * zeta_root(ctx.family, D) *
                    arith::euler_value(ctx.primes, D, nullptr) *
                    partition_sum_nt(ctx, D, std::span<const cplx>(rest, nr));
        if (nd & 1) term = -term;
        total += term * discriminant_sum(ctx, sigma, B);
    }
    return total;
}

cplx jstar_family(Family family, const ShiftSet& A, const ShiftSet& B, std::int64_t X,
                  const arith::EulerTruncation& trunc, const arith::CurveFamily* curve) {
    FamilyContext ctx = make_family_context(family, curve, X, trunc.p_max);
    auto av = A.values();
    auto bv = B.values();
    return jstar_family(ctx, av, bv);
}

namespace {

// (K,L,M) sweep for the family densities.  The M-variables occupy the psi
// slot of J*, so nothing factors out; f is still a per-variable product with
// side-dependent values on the contour.
struct NtSweepSpec {
    int n = 1;
    std::vector<quadrature::Grid> grids;
    std::vector<std::vector<cplx>> argK, argL, argM;  // per (dim, node)
    std::vector<std::vector<cplx>> fK, fLM;           // factor values per side
    double norm = 1.0;
};

struct NtSweepOut {
    std::vector<cplx> assignment_sums;
    double abs_weighted = 0.0;
};

NtSweepOut run_nt(const FamilyContext& ctx, const NtSweepSpec& S, int threads) {
    const int n = S.n;
    int three_n = 1;
    for (int d = 0; d < n; ++d) three_n *= 3;
    std::uint64_t total = 1;
    for (int d = 0; d < n; ++d) total *= S.grids[d].x.size();

    const std::uint64_t grain = 16;
    const std::uint64_t nchunks = std::max<std::uint64_t>(1, (total + grain - 1) / grain);
    struct Chunk {
        std::vector<cplx> sums;
        double absw = 0.0;
    };
    std::vector<Chunk> chunks(nchunks);

    auto run_chunk = [&](std::uint64_t c) {
        Chunk& ch = chunks[c];
        ch.sums.assign(three_n, cplx(0.0));
        std::uint64_t idx[8];
        cplx argsA[8], argsB[8];
        for (std::uint64_t t = c * grain; t < std::min<std::uint64_t>(total, (c + 1) * grain);
             ++t) {
            std::uint64_t rem = t;
            double w = 1.0;
            for (int d = 0; d < n; ++d) {
                idx[d] = rem % S.grids[d].x.size();
                rem /= S.grids[d].x.size();
                w *= S.grids[d].w[idx[d]];
            }
            for (int a = 0; a < three_n; ++a) {
                int na = 0, nb = 0, sgn = 1;
                int r = a;
                cplx fprod = 1.0;
                for (int d = 0; d < n; ++d) {
                    int side = r % 3;
                    r /= 3;
                    if (side == 0) {
                        argsA[na++] = S.argK[d][idx[d]];
                        fprod *= S.fK[d][idx[d]];
                    } else if (side == 1) {
                        argsA[na++] = S.argL[d][idx[d]];
                        fprod *= S.fLM[d][idx[d]];
                    } else {
                        argsB[nb++] = S.argM[d][idx[d]];
                        fprod *= S.fLM[d][idx[d]];
                        sgn = -sgn;
                    }
                }
                cplx j = jstar_family(ctx, std::span<const cplx>(argsA, na),
                                      std::span<const cplx>(argsB, nb));
                cplx v = static_cast<double>(sgn) * w * j * fprod;
                ch.sums[a] += v;
                ch.absw += std::abs(v);
            }
        }
    };

    if (threads <= 1 || total < 2 * grain) {
        for (std::uint64_t c = 0; c < nchunks; ++c) run_chunk(c);
    } else {
        std::atomic<std::uint64_t> next{0};
        auto worker = [&]() {
            for (;;) {
                std::uint64_t c = next.fetch_add(1);
                if (c >= nchunks) break;
                run_chunk(c);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    NtSweepOut out;
    out.assignment_sums.assign(three_n, cplx(0.0));
    for (const auto& ch : chunks) {
        for (int a = 0; a < three_n; ++a) out.assignment_sums[a] += ch.sums[a];
        out.abs_weighted += ch.absw;
    }
    for (auto& v : out.assignment_sums) v /= S.norm;
    out.abs_weighted /= S.norm;
    return out;
}

cplx sum_all(const NtSweepOut& o) {
    cplx s = 0.0;
    for (cplx v : o.assignment_sums) s += v;
    return s;
}

cplx factor_eval(const TestFunction& f, int d, cplx x) {
    cplx p = 1.0;
    for (const auto& prim : f.factors[d]) p *= prim.eval(x);
    return p;
}

// contour form over truncated vertical lines: all-index-tuples S_m
NtSweepOut nt_all_tuples_contour(const FamilyContext& ctx, const TestFunction& f,
                                 const QuadratureSpec& quad, int nodes, double T, int threads) {
    const int m = f.arity();
    NtSweepSpec S;
    S.n = m;
    S.norm = std::pow(2.0 * kPi, m) * std::pow(2.0, m);
    S.grids.assign(m, quadrature::composite_gl(-T, T, nodes, quad.panel_order));
    S.argK.resize(m);
    S.argL.resize(m);
    S.argM.resize(m);
    S.fK.resize(m);
    S.fLM.resize(m);
    for (int d = 0; d < m; ++d) {
        double delta = quad.contour_delta * (1.0 + 0.2 * d);
        const auto& gr = S.grids[d];
        std::size_t G = gr.x.size();
        S.argK[d].resize(G);
        S.argL[d].resize(G);
        S.argM[d].resize(G);
        S.fK[d].resize(G);
        S.fLM[d].resize(G);
        for (std::size_t i = 0; i < G; ++i) {
            double t = gr.x[i];
            S.argK[d][i] = cplx(delta, t);
            S.argL[d][i] = cplx(delta, -t);   // -z_d with z_d on C-
            S.argM[d][i] = cplx(-delta, t);   // psi slot rides C-
            S.fK[d][i] = factor_eval(f, d, cplx(-t, delta));
            S.fLM[d][i] = factor_eval(f, d, cplx(-t, -delta));
        }
    }
    return run_nt(ctx, S, threads);
}

// on-axis distinct form over [0, T]^n with per-dimension epsilon offsets
NtSweepOut nt_onaxis(const FamilyContext& ctx, const TestFunction& f, const QuadratureSpec& quad,
                     int nodes, double T, double eps, int threads) {
    const int m = f.arity();
    NtSweepSpec S;
    S.n = m;
    S.norm = std::pow(2.0 * kPi, m);
    S.argK.resize(m);
    S.argL.resize(m);
    S.argM.resize(m);
    S.fK.resize(m);
    S.fLM.resize(m);
    for (int d = 0; d < m; ++d) {
        auto grid = quadrature::composite_gl(0.0, T, nodes, quad.panel_order);
        for (auto& x : grid.x) x += eps * d;
        std::size_t G = grid.x.size();
        S.argK[d].resize(G);
        S.argL[d].resize(G);
        S.argM[d].resize(G);
        S.fK[d].resize(G);
        S.fLM[d].resize(G);
        for (std::size_t i = 0; i < G; ++i) {
            double z = grid.x[i];
            S.argK[d][i] = cplx(0.0, -z);
            S.argL[d][i] = cplx(0.0, z);
            S.argM[d][i] = cplx(0.0, -z);
            cplx fv = factor_eval(f, d, cplx(z, 0.0));
            S.fK[d][i] = fv;
            S.fLM[d][i] = fv;
        }
        S.grids.push_back(std::move(grid));
    }
    return run_nt(ctx, S, threads);
}

NtSweepOut nt_onaxis_richardson(const FamilyContext& ctx, const TestFunction& f,
                                const QuadratureSpec& quad, int nodes, double T, int threads) {
    double eps = quad.onaxis_epsilon;
    NtSweepOut a = nt_onaxis(ctx, f, quad, nodes, T, eps, threads);
    if (f.arity() == 1) return a;
    NtSweepOut b = nt_onaxis(ctx, f, quad, nodes, T, 0.5 * eps, threads);
    NtSweepOut out = b;
    for (std::size_t i = 0; i < out.assignment_sums.size(); ++i)
        out.assignment_sums[i] = 2.0 * b.assignment_sums[i] - a.assignment_sums[i];
    out.abs_weighted = std::max(a.abs_weighted, b.abs_weighted);
    return out;
}

// distinct-index value from the all-tuples contour evaluations
cplx nt_distinct_contour(const FamilyContext& ctx, const TestFunction& f,
                         const QuadratureSpec& quad, int nodes, double T, int threads,
                         NtSweepOut* top_out) {
    const int n = f.arity();
    NtSweepOut top = nt_all_tuples_contour(ctx, f, quad, nodes, T, threads);
    cplx An = sum_all(top);
    if (top_out) *top_out = std::move(top);
    if (n == 1) return An;
    if (n == 2) {
        cplx d1 = sum_all(nt_all_tuples_contour(ctx, f.merged({0, 0}), quad, nodes, T, threads));
        return An - d1;
    }
    if (n == 3) {
        cplx corr = 0.0;
        for (const auto& grp :
             {std::vector<int>{0, 0, 1}, std::vector<int>{0, 1, 0}, std::vector<int>{0, 1, 1}}) {
            TestFunction fm = f.merged(grp);
            cplx a2 = sum_all(nt_all_tuples_contour(ctx, fm, quad, nodes, T, threads));
            cplx d1 =
                sum_all(nt_all_tuples_contour(ctx, fm.merged({0, 0}), quad, nodes, T, threads));
            corr += a2 - d1;
        }
        cplx d1all =
            sum_all(nt_all_tuples_contour(ctx, f.merged({0, 0, 0}), quad, nodes, T, threads));
        return An - corr - d1all;
    }
    throw ValidationError("nt_density: n <= 3 supported");
}

std::string side_string(int assignment, int n, int which) {
    std::string s = "{";
    bool first = true;
    int rem = assignment;
    for (int d = 0; d < n; ++d) {
        if (rem % 3 == which) {
            if (!first) s += " ";
            s += std::to_string(d + 1);
            first = false;
        }
        rem /= 3;
    }
    return s + "}";
}

}  // namespace

DensityResult nt_density(const FamilyDensityRequest& req) {
    auto t0 = std::chrono::steady_clock::now();
    const int n = req.n;
    if (n < 1 || n > 3) throw ValidationError("nt_density: n in 1..3");
    if (!req.f.strip_decay) throw ValidationError("nt_density: strip-decay test function required");
    if (req.f.arity() != n) throw ValidationError("nt_density: test function arity mismatch");
    req.f.verify_flags();

    FamilyContext ctx = make_family_context(req.family,
                                            req.curve ? &*req.curve : nullptr, req.x_max,
                                            req.trunc.p_max);

    double dmax = req.quad.contour_delta * (1.0 + 0.2 * (n - 1));
    double T = req.quad.truncation > 0.0 ? req.quad.truncation
                                         : req.f.truncation_T(1e-11, req.onaxis ? 0.0 : dmax);
    int nodes = req.quad.nodes_per_dim;

    DensityResult out;
    cplx v, vh;
    NtSweepOut top;
    if (req.onaxis) {
        top = nt_onaxis_richardson(ctx, req.f, req.quad, nodes, T, req.threads);
        v = sum_all(top);
        vh = sum_all(nt_onaxis_richardson(ctx, req.f, req.quad,
                                          std::max(req.quad.panel_order, nodes / 2), T,
                                          req.threads));
    } else {
        v = nt_distinct_contour(ctx, req.f, req.quad, nodes, T, req.threads, &top);
        vh = nt_distinct_contour(ctx, req.f, req.quad, std::max(req.quad.panel_order, nodes / 2),
                                 T, req.threads, nullptr);
    }

    for (std::size_t a = 0; a < top.assignment_sums.size(); ++a)
        out.terms.push_back({side_string(static_cast<int>(a), n, 0),
                             side_string(static_cast<int>(a), n, 1),
                             side_string(static_cast<int>(a), n, 2), top.assignment_sums[a]});
    out.condition_max = top.abs_weighted / std::max(1e-300, std::abs(sum_all(top)));
    out.cancellation_warning = out.condition_max > 1e12;
    out.value = v.real();
    out.imag_residual = std::abs(v.imag());
    out.error_estimate = std::abs(v - vh);
    out.tail_estimate = req.f.tail_bound(T);
    out.caveat = "conjectural ratios formula; O(X^(1/2+eps)) remainder unmodeled";
    out.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

double one_level_direct(const arith::CurveFamily& curve, const TestFunction& f, std::int64_t X,
                        const arith::EulerTruncation& trunc, const QuadratureSpec& quad,
                        int threads) {
    if (!f.strip_decay || f.arity() != 1)
        throw ValidationError("one_level_direct: one-variable strip-decay function required");
    FamilyContext ctx = make_family_context(Family::Elliptic, &curve, X, trunc.p_max);

    double T = quad.truncation > 0.0 ? quad.truncation : f.truncation_T(1e-11, 0.0);
    auto grid = quadrature::composite_gl(-T, T, quad.nodes_per_dim, quad.panel_order);

    double ell_sum = 0.0;
    for (double e : ctx.ell) ell_sum += e;
    const double xstar = ctx.x_star;

    std::vector<double> partial(grid.x.size(), 0.0);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= grid.x.size()) break;
            double t = grid.x[i];
            cplx it(0.0, t);
            cplx w[1] = {it};
            // Gamma-and-log block: sum_d -psi'/psi(1/2 + it) = 2 sum ell + X* g(it)
            cplx gpart = 2.0 * ell_sum - xstar * beta_part(Family::Elliptic, it);
            // D = empty block: 2[-zeta'/zeta(1+2it) + A_D({it})]
            cplx a = -zeta1p(2.0 * it, ZetaMode::LogDeriv) +
                     arith::euler_deriv(ctx.primes, {}, std::span<const cplx>(w, 1));
            // D = {it} block with the oscillating conductor power
            cplx b = gamma_family(it, GammaMode::RatioElliptic) *
                     zeta1p(2.0 * it, ZetaMode::Value) *
                     arith::euler_value(ctx.primes, std::span<const cplx>(w, 1), nullptr);
            cplx phase = discriminant_sum(ctx, it, {});
            cplx integrand = gpart + 2.0 * xstar * a - 2.0 * b * phase;
            double fv = factor_eval(f, 0, cplx(t, 0.0)).real();
            partial[i] = grid.w[i] * fv * integrand.real();
        }
    };
    std::vector<std::thread> pool;
    for (int th = 0; th < std::max(1, threads); ++th) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    double acc = 0.0;
    for (double p : partial) acc += p;
    return acc / (2.0 * kPi);
}

ScaledTwoLevelReport scaled_two_level(const arith::CurveFamily& curve, const TestFunction& f,
                                      std::int64_t X, const arith::EulerTruncation& trunc,
                                      const QuadratureSpec& quad, double a, double b,
                                      int threads) {
    if (!f.strip_decay || f.arity() != 2)
        throw ValidationError("scaled_two_level: two-variable strip-decay function required");
    ScaledTwoLevelReport rep;
    FamilyContext ctx = make_family_context(Family::Elliptic, &curve, X, trunc.p_max);
    double L = std::log(std::sqrt(static_cast<double>(curve.conductor)) * X / (2.0 * kPi));
    rep.L = L;
    rep.x_star = ctx.x_star;

    // asymptotic diagnostics at the rescaled shifts
    cplx sa(0.0, kPi * a / L), sb(0.0, kPi * b / L);
    {
        cplx B2[2] = {-sa, -sb};
        rep.diag_psi_pair =
            (jstar_family(ctx, {}, std::span<const cplx>(B2, 2)) / (ctx.x_star * L * L)).real();
        cplx A1p[1] = {sa}, A1m[1] = {-sa}, B1[1] = {-sb};
        cplx folded = jstar_family(ctx, std::span<const cplx>(A1p, 1),
                                   std::span<const cplx>(B1, 1)) +
                      jstar_family(ctx, std::span<const cplx>(A1m, 1),
                                   std::span<const cplx>(B1, 1));
        rep.diag_folded = (folded / (ctx.x_star * L * L)).real();
        rep.diag_folded_target = std::abs(a) < 1e-12
                                     ? -4.0
                                     : -4.0 * std::sin(2.0 * kPi * a) / (2.0 * kPi * a);
    }

    // full rescaled 2-level: evaluate the distinct density of f(gamma L / pi)
    TestFunction fs = f;
    for (auto& fac : fs.factors)
        for (auto& prim : fac)
            if (prim.kind == TestFnPrim::Kind::Gauss) prim.param *= kPi / L;
    // non-Gaussian battery members rescale by adjusting FejerSq width instead
    for (auto& fac : fs.factors)
        for (auto& prim : fac)
            if (prim.kind == TestFnPrim::Kind::FejerSq) prim.param *= L / kPi;
    fs.spec = f.spec + " [rescaled]";

    FamilyDensityRequest req;
    req.family = Family::Elliptic;
    req.curve = curve;
    req.n = 2;
    req.f = fs;
    req.x_max = X;
    req.trunc = trunc;
    req.quad = quad;
    req.threads = threads;
    DensityResult dr = nt_density(req);
    rep.s2_rescaled = dr.value / ctx.x_star;
    rep.error_estimate = dr.error_estimate / ctx.x_star;

    QuadratureSpec kq = quad;
    kq.truncation = 0.0;
    rep.kernel_value = rmtdensity::kernel_density(Symmetry::SOEven, 2, f, kq,
                                                  rmtdensity::EvalOptions{threads});
    return rep;
}

void ZeroDatabase::validate() const {
    for (const auto& [d, ords] : ordinates) {
        if (d <= 0) throw ValidationError("ZeroDatabase: discriminants must be positive");
        double prev = 0.0;
        for (double g : ords) {
            if (g <= prev)
                throw ValidationError("ZeroDatabase: ordinates must be ascending and positive");
            prev = g;
        }
    }
}

EmpiricalResult empirical_from_zeros(const ZeroDatabase& db, const TestFunction& f, int n,
                                     ZeroSelector selector, const arith::CurveFamily* curve) {
    if (db.ordinates.empty()) throw EmptySelectionError("empirical_from_zeros: empty database");
    db.validate();
    if (n < 1 || n > 3) throw ValidationError("empirical_from_zeros: n in 1..3");
    if (selector == ZeroSelector::EllipticEven && !curve)
        throw ValidationError("empirical_from_zeros: selector needs a curve");

    EmpiricalResult out;
    double max_ord = 0.0;
    for (const auto& [d, ords] : db.ordinates) {
        if (selector == ZeroSelector::EllipticEven && !arith::family_selector(*curve, d))
            continue;
        ++out.discriminants_used;
        const auto& g = ords;
        const int m = static_cast<int>(g.size());
        for (double o : g) max_ord = std::max(max_ord, o);
        double buf[3];
        if (n == 1) {
            for (int i = 0; i < m; ++i) {
                buf[0] = g[i];
                out.value += f.eval_real(std::span<const double>(buf, 1));
            }
        } else if (n == 2) {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    if (i == j) continue;
                    buf[0] = g[i];
                    buf[1] = g[j];
                    out.value += f.eval_real(std::span<const double>(buf, 2));
                }
        } else {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    for (int k = 0; k < m; ++k) {
                        if (i == j || j == k || i == k) continue;
                        buf[0] = g[i];
                        buf[1] = g[j];
                        buf[2] = g[k];
                        out.value += f.eval_real(std::span<const double>(buf, 3));
                    }
        }
    }
    if (out.discriminants_used == 0)
        throw EmptySelectionError("empirical_from_zeros: selector removed every block");
    cplx tailv = 1.0;
    for (const auto& prim : f.factors[0]) tailv *= prim.eval(cplx(max_ord, 0.0));
    out.truncation_bias = std::abs(tailv);
    return out;
}

}  // namespace ntdensity
}  // namespace nld
