#pragma once

// Maximum-metric trellis decoding: plain Viterbi, a parallel list decoder
// keeping the top L paths per state, and the adaptive wrapper that doubles L
// until some list entry passes the CRC.
//
// Path order is a strict total order: higher metric first, ties broken toward
// the smaller dropped predecessor symbol and then the smaller predecessor
// rank.  That makes every list deterministic and makes the size-L list a
// prefix of the size-2L list over the same observations.

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qfsk/channel.hpp"
#include "qfsk/codes.hpp"

namespace qfsk {

struct DecoderConfig {
    int initial_list_size = 1;
    int max_list_size = 2048;
    BranchMetric metric = BranchMetric::Envelope;

    void validate() const {
        if (initial_list_size < 1 || max_list_size < initial_list_size)
            throw std::invalid_argument("decoder: bad list size bounds");
    }
};

enum class DecodeStatus { CrcPass, ListExhausted };

struct DecodeOutcome {
    DecodeStatus status = DecodeStatus::ListExhausted;
    std::optional<std::vector<Gf4>> decision;  // K message symbols when CrcPass
    int list_rank_used = 0;                    // 1-based rank of the accepted path
    int final_list_size = 0;                   // list size of the pass that stopped
    double metric = 0.0;                       // path metric of the accepted path
};

struct ListPath {
    double metric;
    std::vector<Gf4> input;  // K+m information-bearing symbols (termination dropped)
};

namespace detail {

// Branch metrics for step t, laid out per (state, input).
inline void step_branch_metrics(const ConvTrellis& tr, const ObservationVector& o1,
                                const ObservationVector& o2, BranchMetric kind,
                                std::vector<double>& bm) {
    const std::uint32_t ns = tr.n_states();
    bm.resize(static_cast<std::size_t>(ns) * 4);
    for (std::uint32_t s = 0; s < ns; ++s)
        for (unsigned a = 0; a < 4; ++a)
            bm[s * 4 + a] = branch_metric(o1, Gf4(tr.out1(s, a)), kind) +
                            branch_metric(o2, Gf4(tr.out2(s, a)), kind);
}

}  // namespace detail

// Single best zero-terminated path.  Returns the K+m input symbols.
inline ListPath viterbi_best_path(const ConvTrellis& tr, int input_len,
                                  const std::vector<ObservationVector>& obs,
                                  BranchMetric kind = BranchMetric::Envelope) {
    if (tr.nu() < 1) throw std::invalid_argument("viterbi: nu must be >= 1");
    const int T = input_len + tr.nu();
    if (static_cast<int>(obs.size()) != 2 * T)
        throw std::invalid_argument("viterbi: observation count != 2*(K+m+nu)");
    const std::uint32_t ns = tr.n_states();
    constexpr double kNeg = -std::numeric_limits<double>::infinity();

    std::vector<double> cur(ns, kNeg), nxt(ns, kNeg);
    cur[0] = 0.0;
    std::vector<std::uint8_t> back(static_cast<std::size_t>(T) * ns);
    std::vector<double> bm;
    for (int t = 0; t < T; ++t) {
        detail::step_branch_metrics(tr, obs[2 * t], obs[2 * t + 1], kind, bm);
        std::fill(nxt.begin(), nxt.end(), kNeg);
        for (std::uint32_t sn = 0; sn < ns; ++sn) {
            unsigned a = tr.input_of(sn);
            if (t >= input_len && a != 0) continue;
            double best = kNeg;
            unsigned best_c = 0;
            for (unsigned c = 0; c < 4; ++c) {
                std::uint32_t sp = tr.pred(sn, c);
                if (cur[sp] == kNeg) continue;
                double m = cur[sp] + bm[sp * 4 + a];
                if (m > best) {
                    best = m;
                    best_c = c;
                }
            }
            nxt[sn] = best;
            back[static_cast<std::size_t>(t) * ns + sn] = static_cast<std::uint8_t>(best_c);
        }
        std::swap(cur, nxt);
    }

    ListPath out;
    out.metric = cur[0];
    out.input.resize(static_cast<std::size_t>(T));
    std::uint32_t s = 0;
    for (int t = T - 1; t >= 0; --t) {
        out.input[static_cast<std::size_t>(t)] = Gf4(tr.input_of(s));
        s = tr.pred(s, back[static_cast<std::size_t>(t) * ns + s]);
    }
    out.input.resize(static_cast<std::size_t>(input_len));
    return out;
}

// Top-L zero-terminated paths in metric order (strongest first).  May return
// fewer than L entries when the trellis holds fewer terminated paths.
inline std::vector<ListPath> list_viterbi(const ConvTrellis& tr, int input_len,
                                          const std::vector<ObservationVector>& obs,
                                          int list_size,
                                          BranchMetric kind = BranchMetric::Envelope) {
    if (tr.nu() < 1) throw std::invalid_argument("list_viterbi: nu must be >= 1");
    if (list_size < 1) throw std::invalid_argument("list_viterbi: list size < 1");
    const int T = input_len + tr.nu();
    if (static_cast<int>(obs.size()) != 2 * T)
        throw std::invalid_argument("list_viterbi: observation count != 2*(K+m+nu)");
    const std::uint32_t ns = tr.n_states();
    const int L = list_size;
    constexpr double kNeg = -std::numeric_limits<double>::infinity();

    // Per-state rank-ordered metric lists plus per-(step,state,rank) history.
    // History packs the dropped predecessor symbol in the low 2 bits and the
    // predecessor rank above it.
    std::vector<double> cur(static_cast<std::size_t>(ns) * L, kNeg);
    std::vector<double> nxt(static_cast<std::size_t>(ns) * L, kNeg);
    std::vector<std::uint16_t> cur_len(ns, 0), nxt_len(ns, 0);
    cur[0] = 0.0;
    cur_len[0] = 1;
    if (L > (1 << 14))
        throw std::invalid_argument("list_viterbi: list size exceeds 16384");
    std::vector<std::uint16_t> hist(static_cast<std::size_t>(T) * ns * L);

    std::vector<double> bm;
    for (int t = 0; t < T; ++t) {
        detail::step_branch_metrics(tr, obs[2 * t], obs[2 * t + 1], kind, bm);
        std::uint16_t* hrow = hist.data() + static_cast<std::size_t>(t) * ns * L;
        for (std::uint32_t sn = 0; sn < ns; ++sn) {
            unsigned a = tr.input_of(sn);
            if (t >= input_len && a != 0) {
                nxt_len[sn] = 0;
                continue;
            }
            // 4-way merge of the predecessor lists, each offset by its branch
            // metric.  Streams are scanned with one cursor each; candidate
            // order within a stream is already final.
            std::uint32_t sp[4];
            double off[4];
            int pos[4], len[4];
            for (unsigned c = 0; c < 4; ++c) {
                sp[c] = tr.pred(sn, c);
                off[c] = bm[sp[c] * 4 + a];
                pos[c] = 0;
                len[c] = cur_len[sp[c]];
            }
            double* out_m = &nxt[static_cast<std::size_t>(sn) * L];
            std::uint16_t* out_h = hrow + static_cast<std::size_t>(sn) * L;
            int filled = 0;
            while (filled < L) {
                double best = kNeg;
                int best_c = -1;
                for (unsigned c = 0; c < 4; ++c) {
                    if (pos[c] >= len[c]) continue;
                    double m = cur[static_cast<std::size_t>(sp[c]) * L + pos[c]] + off[c];
                    if (m > best) {
                        best = m;
                        best_c = static_cast<int>(c);
                    }
                }
                if (best_c < 0) break;
                out_m[filled] = best;
                out_h[filled] =
                    static_cast<std::uint16_t>((pos[best_c] << 2) | best_c);
                ++pos[best_c];
                ++filled;
            }
            nxt_len[sn] = static_cast<std::uint16_t>(filled);
        }
        std::swap(cur, nxt);
        std::swap(cur_len, nxt_len);
    }

    std::vector<ListPath> out;
    out.reserve(cur_len[0]);
    for (int r = 0; r < cur_len[0]; ++r) {
        ListPath p;
        p.metric = cur[static_cast<std::size_t>(r)];
        p.input.resize(static_cast<std::size_t>(T));
        std::uint32_t s = 0;
        int rank = r;
        for (int t = T - 1; t >= 0; --t) {
            p.input[static_cast<std::size_t>(t)] = Gf4(tr.input_of(s));
            std::uint16_t h =
                hist[(static_cast<std::size_t>(t) * ns + s) * L + rank];
            rank = h >> 2;
            s = tr.pred(s, h & 3u);
        }
        p.input.resize(static_cast<std::size_t>(input_len));
        out.push_back(std::move(p));
    }
    return out;
}

// Adaptive decode: rebuild the list from scratch at 1, 2, 4, ... max_list_size
// and stop at the first rank whose K+m input symbols pass the CRC.  With no
// CRC (m = 0) this is a single plain Viterbi pass.
inline DecodeOutcome decode_adaptive(const CodeConfig& cfg, const ConvTrellis& tr,
                                     const std::vector<ObservationVector>& obs,
                                     const DecoderConfig& dec = {}) {
    cfg.validate();
    dec.validate();
    DecodeOutcome out;

    auto accept = [&](std::vector<Gf4>&& word, double metric, int rank, int lsize) {
        word.resize(static_cast<std::size_t>(cfg.K));
        out.status = DecodeStatus::CrcPass;
        out.decision = std::move(word);
        out.list_rank_used = rank;
        out.final_list_size = lsize;
        out.metric = metric;
    };

    if (!cfg.crc) {
        ListPath best = viterbi_best_path(tr, cfg.input_len(), obs, dec.metric);
        accept(std::move(best.input), best.metric, 1, 1);
        return out;
    }

    int lsize = dec.initial_list_size;
    for (;;) {
        auto list = list_viterbi(tr, cfg.input_len(), obs, lsize, dec.metric);
        for (std::size_t r = 0; r < list.size(); ++r) {
            if (crc_check(*cfg.crc, list[r].input)) {
                accept(std::move(list[r].input), list[r].metric,
                       static_cast<int>(r) + 1, lsize);
                return out;
            }
        }
        bool trellis_drained = static_cast<int>(list.size()) < lsize;
        if (lsize >= dec.max_list_size || trellis_drained) {
            out.status = DecodeStatus::ListExhausted;
            out.list_rank_used = lsize;
            out.final_list_size = lsize;
            return out;
        }
        lsize = std::min(2 * lsize, dec.max_list_size);
    }
}

}  // namespace qfsk
