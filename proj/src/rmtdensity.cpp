#include "nld/rmtdensity.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace nld {
namespace rmtdensity {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

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

struct SweepResult {
    std::vector<cplx> assignment_sums;  // 3^n entries, base-3 digit d = side of dim d
    double abs_weighted = 0.0;
    shiftcalc::JstarStats stats;
};

cplx sum_assignments(const SweepResult& r) {
    cplx s = 0.0;
    for (cplx v : r.assignment_sums) s += v;
    return s;
}

// One (K,L,M) tensor problem in factored product form.  All test functions
// here are products over variables, so M-dimensions integrate out per
// dimension and the K/L block is a tensor sweep over the subset only.
struct KlmProblem {
    int n = 1;
    std::vector<quadrature::Grid> grids;       // per dimension
    std::vector<std::vector<cplx>> argK, argL;  // J* argument per (dim, node)
    std::vector<std::vector<cplx>> fK, fL;      // factor value per (dim, node)
    std::vector<cplx> m_integral;               // per dim: sum w * f_M * 2N
    double norm = 1.0;                          // divides every assignment sum
};

SweepResult run_klm(const GroupSpec& g, const KlmProblem& P, int qlim, int threads) {
    const int n = P.n;
    int three_n = 1;
    for (int d = 0; d < n; ++d) three_n *= 3;

    SweepResult out;
    out.assignment_sums.assign(three_n, cplx(0.0));

    for (std::uint32_t S = 0; S < (1u << n); ++S) {
        int sdims[8], ns = 0;
        cplx mprod = 1.0;
        for (int d = 0; d < n; ++d) {
            if (S & (1u << d))
                sdims[ns++] = d;
            else
                mprod *= P.m_integral[d];
        }
        const int npat = 1 << ns;

        // tuple space over the S-dimensions
        std::uint64_t total = 1;
        for (int k = 0; k < ns; ++k) total *= P.grids[sdims[k]].x.size();

        struct Chunk {
            std::vector<cplx> pat;
            double absw = 0.0;
            shiftcalc::JstarStats stats;
        };
        const std::uint64_t grain = 512;
        const std::uint64_t nchunks = std::max<std::uint64_t>(1, (total + grain - 1) / grain);
        std::vector<Chunk> chunks(nchunks);

        auto run_chunk = [&](std::uint64_t c) {
            Chunk& ch = chunks[c];
            ch.pat.assign(npat, cplx(0.0));
            std::uint64_t idx[8];
            cplx args[8];
            for (std::uint64_t t = c * grain; t < std::min<std::uint64_t>(total, (c + 1) * grain);
                 ++t) {
                std::uint64_t rem = t;
                double w = 1.0;
                for (int k = 0; k < ns; ++k) {
                    const auto& gr = P.grids[sdims[k]];
                    idx[k] = rem % gr.x.size();
                    rem /= gr.x.size();
                    w *= gr.w[idx[k]];
                }
                for (int p = 0; p < npat; ++p) {
                    cplx fprod = 1.0;
                    for (int k = 0; k < ns; ++k) {
                        int d = sdims[k];
                        if (p & (1 << k)) {
                            args[k] = P.argK[d][idx[k]];
                            fprod *= P.fK[d][idx[k]];
                        } else {
                            args[k] = P.argL[d][idx[k]];
                            fprod *= P.fL[d][idx[k]];
                        }
                    }
                    cplx j = shiftcalc::jstar_eval(std::span<const cplx>(args, ns), g, qlim,
                                                   &ch.stats);
                    cplx v = w * j * fprod;
                    ch.pat[p] += v;
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

        // fold chunks in fixed order, then place into the 3^n assignment map
        std::vector<cplx> pat(npat, cplx(0.0));
        for (const auto& ch : chunks) {
            for (int p = 0; p < npat; ++p) pat[p] += ch.pat[p];
            out.abs_weighted += ch.absw * std::abs(mprod);
            out.stats.subsets_evaluated += ch.stats.subsets_evaluated;
            out.stats.subsets_skipped += ch.stats.subsets_skipped;
            out.stats.partitions_evaluated += ch.stats.partitions_evaluated;
            out.stats.max_subset_size =
                std::max(out.stats.max_subset_size, ch.stats.max_subset_size);
        }
        for (int p = 0; p < npat; ++p) {
            int a = 0;
            int mul = 1;
            int k = 0;
            for (int d = 0; d < n; ++d) {
                int side;
                if (!(S & (1u << d))) {
                    side = 2;
                } else {
                    side = (p & (1 << k)) ? 0 : 1;
                    ++k;
                }
                a += side * mul;
                mul *= 3;
            }
            out.assignment_sums[a] = pat[p] * mprod / P.norm;
        }
    }
    out.abs_weighted /= P.norm;
    return out;
}

// factor value of variable d at complex argument x
cplx factor_eval(const TestFunction& f, int d, cplx x) {
    cplx p = 1.0;
    for (const auto& prim : f.factors[d]) p *= prim.eval(x);
    return p;
}

// All-index-tuples average via the contour form (periodic f):
//   E[sum_{j_1..j_m} f] = (1/(2pi)^m 2^m) sum_KLM (2N)^{|M|} int J* f(iz)
SweepResult all_tuples_contour(const GroupSpec& g, const TestFunction& f,
                               const QuadratureSpec& quad, int nodes, const EvalOptions& opt) {
    const int m = f.arity();
    const double twoN = 2.0 * g.dim_half;

    KlmProblem P;
    P.n = m;
    P.norm = std::pow(2.0 * kPi, m) * std::pow(2.0, m);
    P.grids.assign(m, quadrature::composite_gl(-kPi, kPi, nodes, quad.panel_order));
    P.argK.resize(m);
    P.argL.resize(m);
    P.fK.resize(m);
    P.fL.resize(m);
    P.m_integral.resize(m);
    for (int d = 0; d < m; ++d) {
        double delta = quad.contour_delta * (1.0 + 0.2 * d);
        const auto& gr = P.grids[d];
        std::size_t G = gr.x.size();
        P.argK[d].resize(G);
        P.argL[d].resize(G);
        P.fK[d].resize(G);
        P.fL[d].resize(G);
        cplx mi = 0.0;
        for (std::size_t i = 0; i < G; ++i) {
            double t = gr.x[i];
            P.argK[d][i] = cplx(delta, t);    // z_d on C+
            P.argL[d][i] = cplx(delta, -t);   // -z_d, z_d on C-
            P.fK[d][i] = factor_eval(f, d, cplx(-t, delta));
            P.fL[d][i] = factor_eval(f, d, cplx(-t, -delta));
            mi += gr.w[i] * P.fL[d][i];  // M rides C-
        }
        P.m_integral[d] = mi * twoN;
    }
    return run_klm(g, P, -1, opt.threads);
}

// on-axis sweep at epsilon offset; fr gives the per-dimension factor at a
// real node (identity for plain test functions, windowed for scaled mode)
SweepResult onaxis_sweep(const GroupSpec& g, int n, const QuadratureSpec& quad, int nodes,
                         double eps, const EvalOptions& opt,
                         const std::function<cplx(int, double)>& fr) {
    const double twoN = 2.0 * g.dim_half;
    KlmProblem P;
    P.n = n;
    P.norm = std::pow(2.0 * kPi, n);
    P.argK.resize(n);
    P.argL.resize(n);
    P.fK.resize(n);
    P.fL.resize(n);
    P.m_integral.resize(n);
    for (int d = 0; d < n; ++d) {
        auto grid = quadrature::composite_gl(0.0, kPi, nodes, quad.panel_order);
        for (auto& x : grid.x) x += eps * d;
        std::size_t G = grid.x.size();
        P.argK[d].resize(G);
        P.argL[d].resize(G);
        P.fK[d].resize(G);
        P.fL[d].resize(G);
        cplx mi = 0.0;
        for (std::size_t i = 0; i < G; ++i) {
            double z = grid.x[i];
            P.argK[d][i] = cplx(0.0, -z);  // -i z_d
            P.argL[d][i] = cplx(0.0, z);   // +i z_d
            cplx fv = fr(d, z);
            P.fK[d][i] = fv;
            P.fL[d][i] = fv;
            mi += grid.w[i] * fv;
        }
        P.m_integral[d] = mi * twoN;
        P.grids.push_back(std::move(grid));
    }
    return run_klm(g, P, -1, opt.threads);
}

SweepResult onaxis_richardson(const GroupSpec& g, int n, const QuadratureSpec& quad, int nodes,
                              const EvalOptions& opt,
                              const std::function<cplx(int, double)>& fr) {
    double eps = quad.onaxis_epsilon;
    SweepResult a = onaxis_sweep(g, n, quad, nodes, eps, opt, fr);
    if (n == 1) return a;  // no diagonals to dodge
    SweepResult b = onaxis_sweep(g, n, quad, nodes, 0.5 * eps, opt, fr);
    SweepResult out = b;
    for (std::size_t i = 0; i < out.assignment_sums.size(); ++i)
        out.assignment_sums[i] = 2.0 * b.assignment_sums[i] - a.assignment_sums[i];
    out.abs_weighted = std::max(a.abs_weighted, b.abs_weighted);
    return out;
}

// distinct-tuple value from all-tuples values by merge corrections
cplx distinct_from_all_tuples(const GroupSpec& g, const TestFunction& f,
                              const QuadratureSpec& quad, int nodes, const EvalOptions& opt,
                              SweepResult* top_level) {
    const int n = f.arity();
    SweepResult top = all_tuples_contour(g, f, quad, nodes, opt);
    cplx An = sum_assignments(top);
    if (top_level) *top_level = std::move(top);
    if (n == 1) return An;
    if (n == 2) {
        cplx d1 = sum_assignments(all_tuples_contour(g, f.merged({0, 0}), quad, nodes, opt));
        return An - d1;
    }
    if (n == 3) {
        cplx corr = 0.0;
        for (const auto& grp :
             {std::vector<int>{0, 0, 1}, std::vector<int>{0, 1, 0}, std::vector<int>{0, 1, 1}}) {
            TestFunction fm = f.merged(grp);
            cplx a2 = sum_assignments(all_tuples_contour(g, fm, quad, nodes, opt));
            cplx d1 = sum_assignments(all_tuples_contour(g, fm.merged({0, 0}), quad, nodes, opt));
            corr += a2 - d1;  // distinct 2-tuple sum of the merged function
        }
        cplx d1all = sum_assignments(all_tuples_contour(g, f.merged({0, 0, 0}), quad, nodes, opt));
        return An - corr - d1all;
    }
    throw ValidationError("density: n <= 3 supported");
}

void fill_terms(DensityResult& out, const SweepResult& top, int n) {
    for (std::size_t a = 0; a < top.assignment_sums.size(); ++a)
        out.terms.push_back({side_string(static_cast<int>(a), n, 0),
                             side_string(static_cast<int>(a), n, 1),
                             side_string(static_cast<int>(a), n, 2), top.assignment_sums[a]});
    cplx total = sum_assignments(top);
    out.condition_max = top.abs_weighted / std::max(1e-300, std::abs(total));
    out.cancellation_warning = out.condition_max > 1e12;
}

void finalize(DensityResult& out, cplx value, cplx half_value,
              std::chrono::steady_clock::time_point t0) {
    out.value = value.real();
    out.imag_residual = std::abs(value.imag());
    out.error_estimate = std::abs(value - half_value);
    out.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (out.imag_residual > 1e-8 * std::max(1.0, std::abs(out.value)))
        out.cancellation_warning = true;
}

}  // namespace

DensityResult density_contour(const GroupSpec& g, int n, const TestFunction& f,
                              const QuadratureSpec& quad, const EvalOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    if (n > g.dim_half) throw ValidationError("density_contour: n <= N required");
    if (!f.two_pi_periodic)
        throw ValidationError("density_contour: periodic test function required");
    if (f.arity() != n) throw ValidationError("density_contour: test function arity mismatch");
    f.verify_flags();

    DensityResult out;
    SweepResult top;
    cplx v = distinct_from_all_tuples(g, f, quad, quad.nodes_per_dim, opt, &top);
    fill_terms(out, top, n);
    int half = std::max(quad.panel_order, quad.nodes_per_dim / 2);
    cplx vh = distinct_from_all_tuples(g, f, quad, half, opt, nullptr);
    finalize(out, v, vh, t0);
    return out;
}

DensityResult density_onaxis(const GroupSpec& g, int n, const TestFunction& f,
                             const QuadratureSpec& quad, const EvalOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    if (n > g.dim_half) throw ValidationError("density_onaxis: n <= N required");
    if (!f.two_pi_periodic) throw ValidationError("density_onaxis: periodic test function required");
    if (f.arity() != n) throw ValidationError("density_onaxis: test function arity mismatch");
    f.verify_flags();

    auto fr = [&](int d, double z) { return factor_eval(f, d, cplx(z, 0.0)); };

    DensityResult out;
    SweepResult top = onaxis_richardson(g, n, quad, quad.nodes_per_dim, opt, fr);
    cplx v = sum_assignments(top);
    fill_terms(out, top, n);
    int half = std::max(quad.panel_order, quad.nodes_per_dim / 2);
    cplx vh = sum_assignments(onaxis_richardson(g, n, quad, half, opt, fr));
    finalize(out, v, vh, t0);
    return out;
}

DensityResult density_restricted(const GroupSpec& g, int n, const TestFunction& f, int q,
                                 const QuadratureSpec& quad, const EvalOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    if (!f.strip_decay)
        throw ValidationError("density_restricted: strip-decay test function required");
    if (f.arity() != n) throw ValidationError("density_restricted: arity mismatch");
    if (q < 1) throw ValidationError("density_restricted: q >= 1");
    if (!f.fourier_support_radius)
        throw SupportViolationError("density_restricted: test function with unbounded support");
    if (*f.fourier_support_radius >= 2.0 * q)
        throw SupportViolationError("density_restricted: support radius must be < 2q");
    f.verify_flags();

    const int N = g.dim_half;
    const double twoN = 2.0 * N;
    const double scale = N / (2.0 * kPi);  // F(x) = f(N x / 2pi)
    const double radius = *f.fourier_support_radius;

    // truncation tuned so the |D| >= q blocks (exactly zero analytically)
    // integrate to below ~1e-7; tails of the shared |D| < q blocks cancel
    // identically in restricted-vs-full comparisons
    double T = quad.truncation > 0.0 ? quad.truncation : (n == 1 ? 300.0 : 100.0 / (n - 1));
    int panels = static_cast<int>(std::ceil(2.0 * T * N * (radius / n) / 6.0)) + 1;
    int nodes = std::max(quad.nodes_per_dim, panels * quad.panel_order);

    auto build = [&](int node_count) {
        KlmProblem P;
        P.n = n;
        P.norm = std::pow(2.0 * kPi, n);
        P.grids.assign(n, quadrature::composite_gl(-T, T, node_count, quad.panel_order));
        P.argK.resize(n);
        P.argL.resize(n);
        P.fK.resize(n);
        P.fL.resize(n);
        P.m_integral.resize(n);
        for (int d = 0; d < n; ++d) {
            double delta = quad.contour_delta * (1.0 + 0.2 * d);
            const auto& gr = P.grids[d];
            std::size_t G = gr.x.size();
            P.argK[d].resize(G);
            P.argL[d].resize(G);
            P.fK[d].resize(G);
            P.fL[d].resize(G);
            cplx mi = 0.0;
            for (std::size_t i = 0; i < G; ++i) {
                double t = gr.x[i];
                P.argK[d][i] = cplx(delta, t);
                P.argL[d][i] = cplx(delta, -t);
                P.fK[d][i] = factor_eval(f, d, scale * cplx(-t, delta));
                P.fL[d][i] = factor_eval(f, d, scale * cplx(-t, -delta));
                mi += gr.w[i] * factor_eval(f, d, scale * cplx(-t, 0.0));  // M on (0)
            }
            P.m_integral[d] = mi * twoN;
        }
        return P;
    };

    DensityResult out;
    KlmProblem P = build(nodes);
    SweepResult top = run_klm(g, P, q, opt.threads);
    cplx v = sum_assignments(top);
    fill_terms(out, top, n);
    out.subsets_evaluated = top.stats.subsets_evaluated;
    out.subsets_skipped = top.stats.subsets_skipped;
    out.tail_estimate = f.tail_bound(scale * T);

    KlmProblem Ph = build(std::max(quad.panel_order, nodes / 2));
    cplx vh = sum_assignments(run_klm(g, Ph, q, opt.threads));
    finalize(out, v, vh, t0);
    return out;
}

double kernel_so_even(double x, double y) {
    auto sinc = [](double u) { return std::abs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u; };
    return sinc(kPi * (y - x)) + sinc(kPi * (y + x));
}

double kernel_usp(double x, double y) {
    auto sinc = [](double u) { return std::abs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u; };
    return sinc(kPi * (y - x)) - sinc(kPi * (y + x));
}

double kernel_density(Symmetry sym, int n, const TestFunction& f, const QuadratureSpec& quad,
                      const EvalOptions& opt) {
    if (!f.strip_decay) throw ValidationError("kernel_density: strip-decay test function required");
    if (f.arity() != n) throw ValidationError("kernel_density: arity mismatch");
    if (n > 3) throw ValidationError("kernel_density: n <= 3");
    auto K = sym == Symmetry::SOEven ? kernel_so_even : kernel_usp;

    double T = quad.truncation > 0.0 ? quad.truncation : f.truncation_T(1e-12, 0.0);
    int nodes = std::max(quad.nodes_per_dim,
                         (static_cast<int>(8 * T) / quad.panel_order + 1) * quad.panel_order);
    auto grid = quadrature::composite_gl(-T, T, nodes, quad.panel_order);
    const std::size_t G = grid.x.size();

    // direct tensor loop with the determinant kernel (n <= 3)
    double acc = 0.0;
    if (n == 1) {
        for (std::size_t i = 0; i < G; ++i) {
            double x[1] = {grid.x[i]};
            acc += grid.w[i] * f.eval_real(std::span<const double>(x, 1)) * K(x[0], x[0]);
        }
    } else if (n == 2) {
        std::atomic<std::uint64_t> next{0};
        std::vector<double> partial(G, 0.0);
        auto worker = [&]() {
            for (;;) {
                std::uint64_t i = next.fetch_add(1);
                if (i >= G) break;
                double s = 0.0;
                for (std::size_t j = 0; j < G; ++j) {
                    double x[2] = {grid.x[i], grid.x[j]};
                    double det = K(x[0], x[0]) * K(x[1], x[1]) - K(x[0], x[1]) * K(x[1], x[0]);
                    s += grid.w[j] * f.eval_real(std::span<const double>(x, 2)) * det;
                }
                partial[i] = grid.w[i] * s;
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < std::max(1, opt.threads); ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        for (double p : partial) acc += p;
    } else {
        for (std::size_t i = 0; i < G; ++i)
            for (std::size_t j = 0; j < G; ++j)
                for (std::size_t l = 0; l < G; ++l) {
                    double x[3] = {grid.x[i], grid.x[j], grid.x[l]};
                    double k[3][3];
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b) k[a][b] = K(x[a], x[b]);
                    double det = k[0][0] * (k[1][1] * k[2][2] - k[1][2] * k[2][1]) -
                                 k[0][1] * (k[1][0] * k[2][2] - k[1][2] * k[2][0]) +
                                 k[0][2] * (k[1][0] * k[2][1] - k[1][1] * k[2][0]);
                    acc += grid.w[i] * grid.w[j] * grid.w[l] *
                           f.eval_real(std::span<const double>(x, 3)) * det;
                }
    }
    return acc / std::pow(2.0, n);
}

DensityResult scaled_density(const GroupSpec& g, int n, const TestFunction& f,
                             const QuadratureSpec& quad, const EvalOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    if (!f.strip_decay) throw ValidationError("scaled_density: strip-decay test function required");
    if (n > g.dim_half) throw ValidationError("scaled_density: n <= N required");
    f.verify_flags();

    const double N = g.dim_half;
    const double edge = 0.9 * kPi;
    auto window = [&](double th) {
        if (th <= edge) return 1.0;
        if (th >= kPi) return 0.0;
        double u = (th - edge) / (kPi - edge);
        return 0.5 * (1.0 + std::cos(kPi * u));
    };
    auto fr = [&](int d, double z) {
        return window(z) * factor_eval(f, d, cplx(N * z / kPi, 0.0));
    };

    DensityResult out;
    SweepResult top = onaxis_richardson(g, n, quad, quad.nodes_per_dim, opt, fr);
    cplx v = sum_assignments(top);
    fill_terms(out, top, n);
    int half = std::max(quad.panel_order, quad.nodes_per_dim / 2);
    cplx vh = sum_assignments(onaxis_richardson(g, n, quad, half, opt, fr));

    // tapered-mass bound: scaled density stays below ~2 per unit length
    double taper = 0.0;
    auto gtap = quadrature::composite_gl(0.9 * N, N, 64, 16);
    for (int d = 0; d < n; ++d) {
        double mass = 0.0;
        for (std::size_t i = 0; i < gtap.x.size(); ++i)
            mass += gtap.w[i] * std::abs(factor_eval(f, d, cplx(gtap.x[i], 0.0)));
        taper += 2.0 * mass;
    }
    out.taper_error = taper;
    finalize(out, v, vh, t0);
    return out;
}

}  // namespace rmtdensity
}  // namespace nld
