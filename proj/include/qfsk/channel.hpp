#pragma once

// Noncoherent Q-ary FSK channel with per-branch envelope detection.
//
// Each channel use carries one of Q orthogonal tones.  The detector output is
// the vector of branch envelopes: the transmitted branch is Rice distributed
// (root-sum-square of N(mu, sigma^2) and N(0, sigma^2)), every other branch is
// Rayleigh (RSS of two zero-mean normals), with mu = sigma^2 = 2 Es/N0.  With
// that parameterization the Bessel argument in the transmitted-branch density
// is the raw envelope itself, so log-density differences reduce to
// log I0(y_i) - log I0(y_j).

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "qfsk/gf4.hpp"

namespace qfsk {

// log of the modified Bessel function I0.  Power series below the crossover
// (all terms positive, no cancellation), asymptotic expansion above; the
// crossover keeps relative error under 1e-12 everywhere.
inline double log_i0(double z) {
    if (z < 0) throw std::domain_error("log_i0: negative argument");
    if (z < 30.0) {
        double q = 0.25 * z * z;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < sum * 1e-18) break;
        }
        return std::log(sum);
    }
    // I0(z) ~ e^z / sqrt(2 pi z) * sum c_k z^-k, c_0 = 1,
    // c_{k+1} = c_k (2k+1)^2 / (8(k+1)).
    double c = 1.0, s = 1.0, zp = 1.0;
    for (int k = 0; k < 16; ++k) {
        c *= static_cast<double>(2 * k + 1) * (2 * k + 1) / (8.0 * (k + 1));
        zp /= z;
        s += c * zp;
    }
    return z - 0.5 * std::log(2.0 * M_PI * z) + std::log(s);
}

struct ChannelParams {
    int q = 4;                 // alphabet size
    double es_over_n0 = 1.0;   // linear Es/N0

    double mu() const { return 2.0 * es_over_n0; }
    double sigma_sq() const { return 2.0 * es_over_n0; }

    void validate() const {
        if (q < 2) throw std::invalid_argument("channel: q must be >= 2");
        if (!(es_over_n0 > 0) || !std::isfinite(es_over_n0))
            throw std::invalid_argument("channel: Es/N0 must be positive and finite");
    }
};

inline double esno_db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// One channel use: the Q branch envelopes.
struct ObservationVector {
    std::vector<double> y;
};

// Envelopes are drawn branch by branch in index order so a fixed RNG stream
// maps to a fixed observation regardless of which symbol was sent.
template <typename Rng>
ObservationVector sample_observation(const ChannelParams& p, unsigned sent, Rng& rng) {
    p.validate();
    if (sent >= static_cast<unsigned>(p.q))
        throw std::invalid_argument("sample_observation: symbol index out of range");
    std::normal_distribution<double> noise(0.0, std::sqrt(p.sigma_sq()));
    ObservationVector obs;
    obs.y.resize(static_cast<std::size_t>(p.q));
    for (int i = 0; i < p.q; ++i) {
        double a = noise(rng) + (static_cast<unsigned>(i) == sent ? p.mu() : 0.0);
        double b = noise(rng);
        obs.y[static_cast<std::size_t>(i)] = std::sqrt(a * a + b * b);
    }
    return obs;
}

// log W(y | sent).  Support is the open positive orthant; any nonpositive
// component gets -inf so impossible observations never win a comparison.
inline double log_density(const ChannelParams& p, const ObservationVector& obs,
                          unsigned sent) {
    p.validate();
    if (obs.y.size() != static_cast<std::size_t>(p.q))
        throw std::invalid_argument("log_density: observation size != q");
    if (sent >= static_cast<unsigned>(p.q))
        throw std::invalid_argument("log_density: symbol index out of range");
    double ssq = p.sigma_sq();
    double sum_logs = 0.0, sum_sq = 0.0;
    for (double v : obs.y) {
        if (!(v > 0)) return -std::numeric_limits<double>::infinity();
        sum_logs += std::log(v);
        sum_sq += v * v;
    }
    return sum_logs - p.q * std::log(ssq) + log_i0(obs.y[sent]) -
           (p.mu() * p.mu() + sum_sq) / (2.0 * ssq);
}

// Decoder branch metric for one code symbol: the raw envelope of the branch
// the symbol selects (not its square).
enum class BranchMetric { Envelope, SquareLaw };

inline double branch_metric(const ObservationVector& obs, Gf4 symbol,
                            BranchMetric kind = BranchMetric::Envelope) {
    double v = obs.y[symbol.v];
    return kind == BranchMetric::Envelope ? v : v * v;
}

}  // namespace qfsk
