#pragma once

// Monte-Carlo FER campaigns: frame generation, channel, adaptive list
// decoding, stopping rules, and the curve utilities built on the results.
//
// Reproducibility contract: a sweep is a pure function of (seed, workers).
// Each worker owns a substream derived from the master seed and its index,
// rounds are synchronous, and every aggregate is an integer merged in worker
// order, so repeated runs agree bit for bit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qfsk/channel.hpp"
#include "qfsk/codes.hpp"
#include "qfsk/decoder.hpp"
#include "qfsk/rng.hpp"

namespace qfsk {

struct StopRule {
    std::uint64_t min_frame_errors = 100;
    std::uint64_t max_frames = 2'000'000;
};

struct SweepConfig {
    CodeConfig code;
    DecoderConfig decoder;
    std::vector<double> ebno_grid_db;
    StopRule stop;
    std::uint64_t seed = 0;
    int workers = 1;
    std::uint64_t round_frames = 512;  // per worker between stop checks
};

struct SweepPoint {
    double ebno_db = 0;
    double esno_db = 0;
    std::uint64_t frames = 0;
    std::uint64_t frame_errors = 0;      // undetected + list_exhausted
    std::uint64_t undetected = 0;
    std::uint64_t list_exhausted = 0;
    double fer = 0;
    double ci_lo = 0, ci_hi = 0;         // 95% interval on the FER
    double mean_list_rank = 0;           // rank that first passed the CRC
    double mean_final_list = 0;          // list size the decoder settled at
    std::uint64_t min_undetected_distance = 0;  // 0 when no undetected errors
    double wall_seconds = 0;             // excluded from CSV output
};

struct SweepResult {
    std::vector<SweepPoint> points;
};

// Es/N0 (linear) from Eb/N0 (dB): the code maps 2K information bits onto n
// channel symbols of unit energy.
inline double ebno_to_esno(double ebno_db, const CodeConfig& code) {
    return esno_db_to_linear(ebno_db) * code.rate_bits();
}

// 95% interval on a binomial proportion: normal approximation, switching to
// Wilson when fewer than 10 errors make the normal one degenerate.
inline std::pair<double, double> fer_confidence(std::uint64_t frames,
                                                std::uint64_t errors) {
    if (frames == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    double n = static_cast<double>(frames);
    double p = static_cast<double>(errors) / n;
    if (errors >= 10) {
        double half = z * std::sqrt(p * (1.0 - p) / n);
        return {std::max(0.0, p - half), std::min(1.0, p + half)};
    }
    double denom = 1.0 + z * z / n;
    double center = (p + z * z / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace detail {

struct WorkerTally {
    std::uint64_t frames = 0;
    std::uint64_t undetected = 0;
    std::uint64_t exhausted = 0;
    std::uint64_t sum_rank = 0;
    std::uint64_t sum_final = 0;
    std::uint64_t min_undet_dist = 0;  // 0 = none seen
};

struct WorkerState {
    std::mt19937_64 rng;
    WorkerTally tally;
};

inline void run_frames(const SweepConfig& cfg, const ConvTrellis& tr,
                       const ChannelParams& params, std::uint64_t n_frames,
                       WorkerState& ws) {
    const CodeConfig& code = cfg.code;
    const int K = code.K;
    std::vector<Gf4> msg(static_cast<std::size_t>(K));
    std::vector<ObservationVector> obs;
    obs.reserve(static_cast<std::size_t>(code.n()));
    for (std::uint64_t f = 0; f < n_frames; ++f) {
        // 2 bits per symbol straight from the engine keeps the draw portable.
        std::uint64_t bits = 0;
        int have = 0;
        for (int k = 0; k < K; ++k) {
            if (have == 0) {
                bits = ws.rng();
                have = 32;
            }
            msg[static_cast<std::size_t>(k)] = Gf4(static_cast<unsigned>(bits & 3));
            bits >>= 2;
            --have;
        }
        std::vector<Gf4> word = encode_message(code, msg);
        obs.clear();
        for (Gf4 s : word) obs.push_back(sample_observation(params, s.v, ws.rng));

        DecodeOutcome out = decode_adaptive(code, tr, obs, cfg.decoder);
        ws.tally.frames++;
        ws.tally.sum_rank += out.list_rank_used;
        ws.tally.sum_final += out.final_list_size;
        if (out.status == DecodeStatus::CrcPass) {
            if (*out.decision != msg) {
                ws.tally.undetected++;
                std::vector<Gf4> other = encode_message(code, *out.decision);
                std::uint64_t dist = 0;
                for (std::size_t i = 0; i < word.size(); ++i)
                    dist += word[i] != other[i];
                if (ws.tally.min_undet_dist == 0 || dist < ws.tally.min_undet_dist)
                    ws.tally.min_undet_dist = dist;
            }
        } else {
            ws.tally.exhausted++;
        }
    }
}

}  // namespace detail

// One grid point per entry, sequentially; frames split across workers in
// synchronous rounds with the stopping rule applied on round boundaries.
inline SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.code.validate();
    if (cfg.ebno_grid_db.empty())
        throw std::invalid_argument("run_sweep: empty Eb/N0 grid");
    if (cfg.stop.min_frame_errors < 1)
        throw std::invalid_argument("run_sweep: min_frame_errors must be >= 1");
    if (cfg.workers < 1) throw std::invalid_argument("run_sweep: workers must be >= 1");
    const auto w_count = static_cast<std::uint64_t>(cfg.workers);
    const ConvTrellis trellis(cfg.code.conv);

    SweepResult result;
    for (std::size_t pt = 0; pt < cfg.ebno_grid_db.size(); ++pt) {
        auto t0 = std::chrono::steady_clock::now();
        double ebno_db = cfg.ebno_grid_db[pt];
        ChannelParams params;
        params.es_over_n0 = ebno_to_esno(ebno_db, cfg.code);
        params.validate();

        std::vector<detail::WorkerState> ws(w_count);
        for (std::uint64_t w = 0; w < w_count; ++w)
            ws[w].rng = make_engine(cfg.seed, (static_cast<std::uint64_t>(pt) << 16) | w,
                                    0x73696d00u);

        std::uint64_t frames_done = 0, errors = 0;
        while (frames_done < cfg.stop.max_frames && errors < cfg.stop.min_frame_errors) {
            std::uint64_t remaining = cfg.stop.max_frames - frames_done;
            std::uint64_t full = cfg.round_frames * w_count;
            std::vector<std::uint64_t> quota(w_count, cfg.round_frames);
            if (remaining < full) {
                std::uint64_t base = remaining / w_count, extra = remaining % w_count;
                for (std::uint64_t w = 0; w < w_count; ++w)
                    quota[w] = base + (w < extra ? 1 : 0);
            }
            std::vector<std::thread> pool;
            for (std::uint64_t w = 1; w < w_count; ++w)
                if (quota[w] > 0)
                    pool.emplace_back(detail::run_frames, std::cref(cfg),
                                      std::cref(trellis), std::cref(params), quota[w],
                                      std::ref(ws[w]));
            if (quota[0] > 0) detail::run_frames(cfg, trellis, params, quota[0], ws[0]);
            for (auto& th : pool) th.join();

            frames_done = 0;
            errors = 0;
            for (const auto& w : ws) {
                frames_done += w.tally.frames;
                errors += w.tally.undetected + w.tally.exhausted;
            }
        }

        SweepPoint p;
        p.ebno_db = ebno_db;
        p.esno_db = linear_to_db(params.es_over_n0);
        for (const auto& w : ws) {
            p.frames += w.tally.frames;
            p.undetected += w.tally.undetected;
            p.list_exhausted += w.tally.exhausted;
            if (w.tally.min_undet_dist > 0 &&
                (p.min_undetected_distance == 0 ||
                 w.tally.min_undet_dist < p.min_undetected_distance))
                p.min_undetected_distance = w.tally.min_undet_dist;
        }
        p.frame_errors = p.undetected + p.list_exhausted;
        p.fer = p.frames ? static_cast<double>(p.frame_errors) /
                               static_cast<double>(p.frames)
                         : 0.0;
        auto ci = fer_confidence(p.frames, p.frame_errors);
        p.ci_lo = ci.first;
        p.ci_hi = ci.second;
        std::uint64_t sum_rank = 0, sum_final = 0;
        for (const auto& w : ws) {
            sum_rank += w.tally.sum_rank;
            sum_final += w.tally.sum_final;
        }
        p.mean_list_rank =
            p.frames ? static_cast<double>(sum_rank) / static_cast<double>(p.frames) : 0.0;
        p.mean_final_list =
            p.frames ? static_cast<double>(sum_final) / static_cast<double>(p.frames) : 0.0;
        p.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.points.push_back(p);
    }
    return result;
}

// Pairwise error probability at symbol distance d under the envelope metric:
// the competitor's d disagreeing symbols ride pure noise (Rayleigh) while the
// transmitted ones carry the signal (Rice); ties count as errors.
inline double estimate_p2(int d, const ChannelParams& params, std::uint64_t samples,
                          std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("estimate_p2: d must be >= 1");
    if (samples < 1) throw std::invalid_argument("estimate_p2: samples must be >= 1");
    params.validate();
    auto rng = make_engine(seed, static_cast<std::uint64_t>(d), 0x70320000u);
    std::normal_distribution<double> gauss(0.0, std::sqrt(params.sigma_sq()));
    const double mu = params.mu();
    std::uint64_t errs = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        double sent = 0, other = 0;
        for (int k = 0; k < d; ++k) {
            double a = mu + gauss(rng), b = gauss(rng);
            sent += std::sqrt(a * a + b * b);
            double c = gauss(rng), e = gauss(rng);
            other += std::sqrt(c * c + e * e);
        }
        if (other >= sent) ++errs;
    }
    return static_cast<double>(errs) / static_cast<double>(samples);
}

struct GapPoint {
    double fer = 0;
    double gap_db = 0;
    bool ok = false;
    std::string warning;
};

namespace detail {

// SNR at which a (snr_db, fer) curve crosses the target, by interpolating
// log FER linearly in dB.  Zero-FER rows carry no usable height and are
// skipped; the first bracketing segment wins if the curve is not monotone.
inline std::optional<double> snr_at_fer(const std::vector<std::pair<double, double>>& curve,
                                        double target, std::string& warning) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : curve)
        if (p.second > 0) pts.push_back(p);
    if (pts.size() < curve.size())
        warning += "zero-FER rows skipped; ";
    if (pts.size() < 2) {
        warning += "fewer than 2 usable points; ";
        return std::nullopt;
    }
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].second > pts[i - 1].second) {
            warning += "curve not monotone decreasing; ";
            break;
        }
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double f0 = pts[i - 1].second, f1 = pts[i].second;
        if ((f0 - target) * (f1 - target) > 0) continue;
        if (f0 == f1) return pts[i - 1].first;
        double t = (std::log(target) - std::log(f0)) / (std::log(f1) - std::log(f0));
        return pts[i - 1].first + t * (pts[i].first - pts[i - 1].first);
    }
    warning += "target FER outside curve range; ";
    return std::nullopt;
}

}  // namespace detail

// Horizontal dB distance between two FER curves at each queried FER; points
// whose FER lies outside either curve come back with ok = false and a
// warning instead of a number.
inline std::vector<GapPoint> gap_to_bound(
    const std::vector<std::pair<double, double>>& sim_curve,
    const std::vector<std::pair<double, double>>& bound_curve,
    const std::vector<double>& query_fers) {
    std::vector<GapPoint> out;
    for (double q : query_fers) {
        GapPoint g;
        g.fer = q;
        if (!(q > 0)) {
            g.warning = "query FER must be positive; ";
            out.push_back(g);
            continue;
        }
        auto s = detail::snr_at_fer(sim_curve, q, g.warning);
        auto b = detail::snr_at_fer(bound_curve, q, g.warning);
        if (s && b) {
            g.gap_db = *s - *b;
            g.ok = true;
        }
        out.push_back(g);
    }
    return out;
}

}  // namespace qfsk
