#pragma once

// Finite-blocklength benchmarks: the saddlepoint form of the random-coding
// union bound and the normal approximation, both over the noncoherent
// orthogonal-signalling channel.
//
// Every channel integral is estimated by importance sampling with draws from
// W(.|1), so one stored batch of log densities serves all rho (common random
// numbers keep the bisection for the saddlepoint monotone and the bound
// smooth across operating points).

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qfsk/channel.hpp"
#include "qfsk/gf4.hpp"
#include "qfsk/rng.hpp"

namespace qfsk {

// exp(x^2) * erfc(x) without the underflow/overflow of the two factors.
// Long-double evaluation of the product is exact enough below 20; past that
// the continued asymptotic series in 1/x^2 is already at double precision.
inline double erfcx(double x) {
    if (x < 0) throw std::invalid_argument("erfcx: negative argument");
    if (x <= 20.0) {
        long double lx = x;
        return static_cast<double>(expl(lx * lx) * erfcl(lx));
    }
    double inv2x2 = 1.0 / (2.0 * x * x);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 8; ++k) {
        term *= -(2 * k - 1) * inv2x2;
        sum += term;
    }
    return sum / (x * std::sqrt(M_PI));
}

// Half-Gaussian correction factor of the saddlepoint expansion.
inline double saddle_psi(double z) {
    double s = z < 0 ? -0.5 : 0.5;
    return s * erfcx(std::abs(z) / std::sqrt(2.0));
}

// Log densities of N i.i.d. observations drawn conditioned on `cond`,
// evaluated against every candidate symbol.  Row i holds
// log W(y_i | 0..q-1).
struct SampleBatch {
    ChannelParams params;
    std::size_t n = 0;
    unsigned cond = 1;       // symbol the observations were drawn under
    std::vector<double> lw;  // n x q, row-major

    double at(std::size_t i, unsigned j) const {
        return lw[i * static_cast<std::size_t>(params.q) + j];
    }

    // Contiguous per-worker slices, each from its own substream, filled in
    // worker order: the batch depends only on (seed, lane, workers).
    static SampleBatch draw(const ChannelParams& params, std::size_t n,
                            std::uint64_t seed, std::uint64_t lane = 0, int workers = 1,
                            Gf4 cond = Gf4(1)) {
        params.validate();
        if (workers < 1) throw std::invalid_argument("SampleBatch: workers must be >= 1");
        SampleBatch b;
        b.params = params;
        b.n = n;
        b.cond = cond.v;
        b.lw.resize(n * static_cast<std::size_t>(params.q));
        auto w_count = static_cast<std::size_t>(workers);
        auto fill = [&](std::size_t w) {
            std::size_t lo = n * w / w_count, hi = n * (w + 1) / w_count;
            auto rng = make_engine(seed, (lane << 16) | w, 0x626e6473u);  // "bnds"
            for (std::size_t i = lo; i < hi; ++i) {
                ObservationVector y = sample_observation(params, cond.v, rng);
                for (int j = 0; j < params.q; ++j) {
                    double v = log_density(params, y, static_cast<unsigned>(j));
                    if (!std::isfinite(v))
                        throw std::runtime_error(
                            "SampleBatch: non-finite log density at sample " +
                            std::to_string(i));
                    b.lw[i * static_cast<std::size_t>(params.q) +
                         static_cast<std::size_t>(j)] = v;
                }
            }
        };
        if (w_count == 1) {
            fill(0);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t w = 1; w < w_count; ++w) pool.emplace_back(fill, w);
            fill(0);
            for (auto& th : pool) th.join();
        }
        return b;
    }
};

struct E0Stats {
    double e0 = 0, e0p = 0, e0pp = 0;     // value and first two rho derivatives
    double se_e0 = 0, se_e0p = 0, se_e0pp = 0;
};

// Gallager E0 for the uniform input ensemble, with derivatives in rho.  Per
// sample, with t_j = lw_j/(1+rho) and p = softmax(t):
//   A = f^(1+rho)/W(y|cond),         f = sum_j exp(t_j)
//   B = A * u,                       u = log f - <lw>_p / (1+rho)
//   C = A * (u^2 + Var_p(lw)/(1+rho)^3)
// and E0 = (1+rho)logQ - log(mean A), E0' = logQ - B/A (means),
// E0'' = (B/A)^2 - C/A.  Standard errors follow from the sample covariance
// of (A, B, C) by the delta method.
inline E0Stats e0_and_derivatives(const SampleBatch& batch, double rho) {
    if (!(rho >= 0.0) || !std::isfinite(rho))
        throw std::invalid_argument("e0_and_derivatives: rho must be finite and >= 0");
    const int q = batch.params.q;
    const double r1 = 1.0 + rho;
    const std::size_t n = batch.n;
    if (n < 2) throw std::invalid_argument("e0_and_derivatives: need at least 2 samples");

    double ma = 0, mb = 0, mc = 0;                      // running means
    double saa = 0, sbb = 0, scc = 0, sab = 0, sac = 0, sbc = 0;  // co-moments
    for (std::size_t i = 0; i < n; ++i) {
        double tmax = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < q; ++j)
            tmax = std::max(tmax, batch.at(i, static_cast<unsigned>(j)) / r1);
        double se = 0, sl = 0, sl2 = 0;
        for (int j = 0; j < q; ++j) {
            double lwj = batch.at(i, static_cast<unsigned>(j));
            double e = std::exp(lwj / r1 - tmax);
            se += e;
            sl += e * lwj;
            sl2 += e * lwj * lwj;
        }
        double lf = tmax + std::log(se);
        double mean_lw = sl / se;
        double var_lw = std::max(0.0, sl2 / se - mean_lw * mean_lw);
        double u = lf - mean_lw / r1;
        double a = std::exp(r1 * lf - batch.at(i, batch.cond));
        double b = a * u;
        double c = a * (u * u + var_lw / (r1 * r1 * r1));
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
            throw std::runtime_error("e0_and_derivatives: non-finite statistic at rho=" +
                                     std::to_string(rho) + ", sample " + std::to_string(i));
        // Welford-style single pass over the (A, B, C) triple.
        double k = 1.0 / static_cast<double>(i + 1);
        double da = a - ma, db = b - mb, dc = c - mc;
        ma += da * k;
        mb += db * k;
        mc += dc * k;
        saa += da * (a - ma);
        sbb += db * (b - mb);
        scc += dc * (c - mc);
        sab += da * (b - mb);
        sac += da * (c - mc);
        sbc += db * (c - mc);
    }
    double nn = static_cast<double>(n);
    saa /= nn - 1;
    sbb /= nn - 1;
    scc /= nn - 1;
    sab /= nn - 1;
    sac /= nn - 1;
    sbc /= nn - 1;

    E0Stats out;
    double lq = std::log(static_cast<double>(q));
    out.e0 = r1 * lq - std::log(ma);
    out.e0p = lq - mb / ma;
    out.e0pp = (mb / ma) * (mb / ma) - mc / ma;

    // Delta method: gradients of the three estimators in (ma, mb, mc).
    double ga_e0 = -1.0 / ma;
    out.se_e0 = std::sqrt(std::max(0.0, ga_e0 * ga_e0 * saa) / nn);
    double ga = mb / (ma * ma), gb = -1.0 / ma;
    out.se_e0p = std::sqrt(
        std::max(0.0, ga * ga * saa + gb * gb * sbb + 2 * ga * gb * sab) / nn);
    double ha = -2 * mb * mb / (ma * ma * ma) + mc / (ma * ma);
    double hb = 2 * mb / (ma * ma);
    double hc = -1.0 / ma;
    out.se_e0pp = std::sqrt(std::max(0.0, ha * ha * saa + hb * hb * sbb + hc * hc * scc +
                                              2 * ha * hb * sab + 2 * ha * hc * sac +
                                              2 * hb * hc * sbc) /
                            nn);
    return out;
}

enum class RhoRegion { Below, Interior, Above };

struct RhoHat {
    double rho = 0;
    RhoRegion region = RhoRegion::Interior;
};

// Solve E0'(rho) = R (nats) on [0, 1].  E0' is nonincreasing in rho, and the
// shared batch makes the estimate a fixed deterministic function, so plain
// bisection converges; the endpoints flag operation outside the interior.
inline RhoHat solve_rho_hat(const SampleBatch& batch, double rate_nats,
                            double tol_nats = 1e-4) {
    RhoHat out;
    if (e0_and_derivatives(batch, 0.0).e0p <= rate_nats) {
        out.rho = 0.0;
        out.region = RhoRegion::Below;
        return out;
    }
    if (e0_and_derivatives(batch, 1.0).e0p >= rate_nats) {
        out.rho = 1.0;
        out.region = RhoRegion::Above;
        return out;
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        double d = e0_and_derivatives(batch, mid).e0p - rate_nats;
        if (std::abs(d) < tol_nats) {
            out.rho = mid;
            return out;
        }
        (d > 0 ? lo : hi) = mid;
        if (hi - lo < 1e-12) break;
    }
    out.rho = 0.5 * (lo + hi);
    return out;
}

struct OmegaPP {
    double value = 0;
    double se = 0;
    double ess = 0;  // effective sample size of the importance weights
};

// Second derivative of the tilted cumulant at the saddlepoint: the
// importance-weighted mean (weights A = f^(1+rho)/W(y|cond)) of the per-sample
// variance of lw under the softmax(lw/(1+rho)) distribution.
inline OmegaPP omega_pp(const SampleBatch& batch, double rho) {
    const int q = batch.params.q;
    const double r1 = 1.0 + rho;
    const std::size_t n = batch.n;
    double ma = 0, md = 0, saa = 0, sdd = 0, sad = 0, sum_a2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double tmax = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < q; ++j)
            tmax = std::max(tmax, batch.at(i, static_cast<unsigned>(j)) / r1);
        double se = 0, sl = 0, sl2 = 0;
        for (int j = 0; j < q; ++j) {
            double lwj = batch.at(i, static_cast<unsigned>(j));
            double e = std::exp(lwj / r1 - tmax);
            se += e;
            sl += e * lwj;
            sl2 += e * lwj * lwj;
        }
        double lf = tmax + std::log(se);
        double mean_lw = sl / se;
        double v = std::max(0.0, sl2 / se - mean_lw * mean_lw);
        double a = std::exp(r1 * lf - batch.at(i, batch.cond));
        double d = a * v;
        if (!std::isfinite(a) || !std::isfinite(d))
            throw std::runtime_error("omega_pp: non-finite statistic at rho=" +
                                     std::to_string(rho) + ", sample " + std::to_string(i));
        double k = 1.0 / static_cast<double>(i + 1);
        double da = a - ma, dd = d - md;
        ma += da * k;
        md += dd * k;
        saa += da * (a - ma);
        sdd += dd * (d - md);
        sad += da * (d - md);
        sum_a2 += a * a;
    }
    double nn = static_cast<double>(n);
    double ess = (ma * nn) * (ma * nn) / sum_a2;
    if (ess < 0.01 * nn)
        throw std::runtime_error("omega_pp: effective sample size " + std::to_string(ess) +
                                 " below 1% of " + std::to_string(n) +
                                 "; importance weights too skewed");
    saa /= nn - 1;
    sdd /= nn - 1;
    sad /= nn - 1;
    OmegaPP out;
    out.value = md / ma;
    double ga = md / (ma * ma), gd = -1.0 / ma;
    out.se = std::sqrt(std::max(0.0, ga * ga * saa + gd * gd * sdd + 2 * ga * gd * sad) / nn);
    out.ess = ess;
    return out;
}

struct RcuResult {
    double fer = 0;
    double rho_hat = 0;
    RhoRegion region = RhoRegion::Interior;
    double e0 = 0, e0p = 0, e0pp = 0;
    double omega2 = 0;   // omega''(rho_hat)
    double theta_n = 0;
    double psi_n = 0;
};

// Saddlepoint evaluation of the random-coding union bound at blocklength n
// and rate R (nats per channel use).  The three regimes of the root
// E0'(rho) = R give: certain-failure clamp (rho < 0), the interior
// expansion, and the rho = 1 form whose exponent stays linear in R.
// The curvature weight omega'' may come from a smaller batch than the E0
// family; passing the same batch twice is fine.
inline RcuResult rcu_saddlepoint(const SampleBatch& batch, const SampleBatch& omega_batch,
                                 int n, double rate_nats) {
    if (n < 1) throw std::invalid_argument("rcu_saddlepoint: n must be >= 1");
    RcuResult out;
    RhoHat rh = solve_rho_hat(batch, rate_nats);
    out.rho_hat = rh.rho;
    out.region = rh.region;

    E0Stats st = e0_and_derivatives(batch, rh.rho);
    out.e0 = st.e0;
    out.e0p = st.e0p;
    out.e0pp = st.e0pp;

    if (rh.region == RhoRegion::Below) {
        out.fer = 1.0;
        return out;
    }

    double v = -st.e0pp;
    if (!(v > 0))
        throw std::runtime_error("rcu_saddlepoint: nonpositive curvature -E0''=" +
                                 std::to_string(v) + " at rho=" + std::to_string(rh.rho));
    OmegaPP om = omega_pp(omega_batch, rh.rho);
    out.omega2 = om.value;
    if (!(om.value > 0))
        throw std::runtime_error("rcu_saddlepoint: nonpositive omega'' at rho=" +
                                 std::to_string(rh.rho));

    double nn = static_cast<double>(n);
    double theta = std::pow(1.0 + rh.rho, rh.rho - 0.5) *
                   std::pow(2.0 * M_PI * nn * om.value, -0.5 * rh.rho);
    out.theta_n = theta;
    double snv = std::sqrt(nn * v);
    double psi = theta * (saddle_psi(rh.rho * snv) + saddle_psi((1.0 - rh.rho) * snv));
    out.psi_n = psi;

    double fer;
    if (rh.region == RhoRegion::Above) {
        fer = std::exp(-nn * (st.e0 - rate_nats)) * (theta + psi);
    } else {
        fer = psi * std::exp(-nn * (st.e0 - rh.rho * rate_nats));
    }
    if (!std::isfinite(fer))
        throw std::runtime_error("rcu_saddlepoint: non-finite bound at rho=" +
                                 std::to_string(rh.rho));
    out.fer = std::min(1.0, std::max(0.0, fer));
    return out;
}

struct CapacityDispersion {
    double c_bits = 0;    // symmetric capacity, bits per channel use
    double v_bits2 = 0;   // dispersion, bits^2 per channel use
    double se_c = 0;
    double se_v = 0;
};

// Information density moments from the stored batch.  Common factors of the
// log densities cancel in the likelihood ratio, so only differences enter:
// i(y) = log2 Q - (LSE_j lw_j - lw_1) / ln 2.
inline CapacityDispersion capacity_dispersion(const SampleBatch& batch) {
    const int q = batch.params.q;
    const std::size_t n = batch.n;
    if (n < 2) throw std::invalid_argument("capacity_dispersion: need at least 2 samples");
    double mean = 0, m2 = 0, m4_sum = 0;
    std::vector<double> dens(n);
    for (std::size_t i = 0; i < n; ++i) {
        double tmax = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < q; ++j) tmax = std::max(tmax, batch.at(i, static_cast<unsigned>(j)));
        double se = 0;
        for (int j = 0; j < q; ++j)
            se += std::exp(batch.at(i, static_cast<unsigned>(j)) - tmax);
        double lse = tmax + std::log(se);
        double ibits = std::log2(static_cast<double>(q)) - (lse - batch.at(i, batch.cond)) / M_LN2;
        dens[i] = ibits;
        double k = 1.0 / static_cast<double>(i + 1);
        double d = ibits - mean;
        mean += d * k;
        m2 += d * (ibits - mean);
    }
    double nn = static_cast<double>(n);
    double var = m2 / (nn - 1);
    for (std::size_t i = 0; i < n; ++i) {
        double d2 = (dens[i] - mean) * (dens[i] - mean);
        m4_sum += (d2 - var) * (d2 - var);
    }
    CapacityDispersion out;
    out.c_bits = mean;
    out.v_bits2 = var;
    out.se_c = std::sqrt(var / nn);
    out.se_v = std::sqrt(m4_sum / (nn - 1) / nn);
    return out;
}

// Gaussian upper tail in the q-function convention.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Normal approximation to the smallest achievable FER at blocklength n and
// rate rate_bits (bits per channel use), with the 1/2 log n correction.
inline double normal_approx_fer(const CapacityDispersion& cd, int n, double rate_bits) {
    if (n < 1) throw std::invalid_argument("normal_approx_fer: n must be >= 1");
    double nn = static_cast<double>(n);
    double arg = (nn * (cd.c_bits - rate_bits) + 0.5 * std::log2(nn)) /
                 std::sqrt(nn * cd.v_bits2);
    return q_function(arg);
}

}  // namespace qfsk
