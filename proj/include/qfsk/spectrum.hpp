#pragma once

// Distance spectra and the distance-spectrum-optimal CRC search.
//
// Error events of the inner code are enumerated once, bounded by output
// weight, on the 4^nu-state trellis.  Everything CRC-specific is then pure
// polynomial arithmetic: a block codeword is a placement of one or more
// events (separated by at least nu zero inputs) whose combined input
// polynomial is divisible by the CRC generator, and a concatenated-trellis
// error event is such a combination with no divisible proper prefix.  Since
// x is a unit modulo any generator with nonzero constant term, shifting a
// word never changes divisibility, so single-event counts scale by the
// number of in-window placements and multi-event counts reduce to remainder
// class lookups.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qfsk/codes.hpp"
#include "qfsk/gf4.hpp"

namespace qfsk {

struct DTildeTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One error event: inputs packed 2 bits per symbol (first input in the low
// bits of word 0), nonzero span, and total output weight including the nu
// flush steps.
struct WeightedEvent {
    std::array<std::uint64_t, 2> sym{0, 0};
    std::uint16_t span = 0;
    std::uint16_t weight = 0;

    unsigned symbol_at(int i) const {
        return static_cast<unsigned>((sym[static_cast<std::size_t>(i >> 5)] >>
                                      (2 * (i & 31))) & 3u);
    }

    Gf4Poly input_poly() const {
        std::vector<Gf4> c;
        c.reserve(span);
        for (int i = 0; i < span; ++i) c.push_back(Gf4(symbol_at(i)));
        return Gf4Poly(std::move(c));
    }
};

inline constexpr int kMaxEventSpan = 64;  // packing limit, checked at enumeration

struct EventSet {
    int nu = 0;
    int L = 0;        // input window the events were enumerated for
    int d_tilde = 0;  // weight bound
    int min_weight = 0;
    std::vector<std::vector<WeightedEvent>> by_weight;  // index = output weight

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& v : by_weight) n += v.size();
        return n;
    }
};

// All error events of output weight <= d_tilde whose nonzero span fits in L
// input symbols.  DFS over input prefixes; a prefix dies once its weight
// exceeds the bound (zero-weight cycles cannot exist for noncatastrophic
// generators, so the walk terminates).
inline EventSet enumerate_bounded_weight_codewords(const ConvCodeSpec& conv, int L,
                                                   int d_tilde,
                                                   std::size_t max_events = 80'000'000) {
    conv.validate();
    if (conv.nu < 1) throw std::invalid_argument("event enumeration: nu must be >= 1");
    if (L < 1 || d_tilde < 1)
        throw std::invalid_argument("event enumeration: L and d_tilde must be >= 1");

    ConvTrellis tr(conv);
    const std::uint32_t ns = tr.n_states();

    // Output weight of the nu-step flush from each state.
    std::vector<std::uint16_t> flush_w(ns, 0);
    for (std::uint32_t s = 0; s < ns; ++s) {
        std::uint32_t st = s;
        std::uint16_t w = 0;
        for (int k = 0; k < conv.nu; ++k) {
            w += (tr.out1(st, 0) != 0) + (tr.out2(st, 0) != 0);
            st = tr.next(st, 0);
        }
        flush_w[s] = w;
    }

    EventSet out;
    out.nu = conv.nu;
    out.L = L;
    out.d_tilde = d_tilde;
    out.by_weight.resize(static_cast<std::size_t>(d_tilde) + 1);

    const int span_cap = std::min(L, kMaxEventSpan);
    std::size_t count = 0;

    WeightedEvent cur;
    // Depth-first over (state, consumed span, weight, trailing zero run).
    std::function<void(std::uint32_t, int, int, int)> walk =
        [&](std::uint32_t state, int span, int weight, int zero_run) {
            if (zero_run == 0) {
                int total = weight + flush_w[state];
                if (total <= d_tilde) {
                    if (++count > max_events)
                        throw std::runtime_error(
                            "event enumeration: cap of " + std::to_string(max_events) +
                            " events exceeded; lower d_tilde");
                    cur.span = static_cast<std::uint16_t>(span);
                    cur.weight = static_cast<std::uint16_t>(total);
                    out.by_weight[static_cast<std::size_t>(total)].push_back(cur);
                }
            }
            if (span >= span_cap) {
                if (span >= kMaxEventSpan && span < L)
                    throw std::runtime_error(
                        "event enumeration: span cap of 64 symbols exceeded");
                return;
            }
            for (unsigned a = 0; a < 4; ++a) {
                int zr = a == 0 ? zero_run + 1 : 0;
                if (zr >= conv.nu) continue;  // zero state reached: separate event
                int w = weight + (tr.out1(state, a) != 0) + (tr.out2(state, a) != 0);
                if (w > d_tilde) continue;
                auto widx = static_cast<std::size_t>(span >> 5);
                auto shift = 2 * (span & 31);
                cur.sym[widx] |= static_cast<std::uint64_t>(a) << shift;
                walk(tr.next(state, a), span + 1, w, zr);
                cur.sym[widx] &= ~(3ULL << shift);
            }
        };

    for (unsigned a = 1; a < 4; ++a) {
        int w = (tr.out1(0, a) != 0) + (tr.out2(0, a) != 0);
        if (w > d_tilde) continue;
        cur.sym[0] = a;
        walk(tr.next(0, a), 1, w, 0);
        cur.sym[0] = 0;
    }

    out.min_weight = d_tilde + 1;
    for (int w = 1; w <= d_tilde; ++w)
        if (!out.by_weight[static_cast<std::size_t>(w)].empty()) {
            out.min_weight = w;
            break;
        }
    return out;
}

struct DistanceSpectrum {
    int d_max_searched = 0;
    std::vector<std::uint64_t> n_t;  // trellis error events per weight
    std::vector<std::uint64_t> n_c;  // block codewords per weight

    int d_min() const {
        for (int w = 1; w <= d_max_searched; ++w)
            if (n_c[static_cast<std::size_t>(w)] > 0) return w;
        return -1;
    }
};

namespace detail {

// Remainder arithmetic modulo the monic associate of a CRC generator, on
// polynomials packed 2 bits per coefficient.
struct CrcModCtx {
    int m = 0;
    std::uint32_t red[4] = {0, 0, 0, 0};  // red[t] = packed t*ghat, degrees 0..m

    static CrcModCtx from_packed(std::uint32_t packed_g, int m) {
        CrcModCtx ctx;
        ctx.m = m;
        unsigned lead = (packed_g >> (2 * m)) & 3u;
        Gf4 inv_lead = gf4_inv(Gf4(lead));
        std::uint32_t monic = 0;
        for (int k = 0; k <= m; ++k) {
            Gf4 c = Gf4((packed_g >> (2 * k)) & 3u) * inv_lead;
            monic |= static_cast<std::uint32_t>(c.v) << (2 * k);
        }
        for (unsigned t = 1; t < 4; ++t) {
            std::uint32_t r = 0;
            for (int k = 0; k <= m; ++k) {
                Gf4 c = Gf4(t) * Gf4((monic >> (2 * k)) & 3u);
                r |= static_cast<std::uint32_t>(c.v) << (2 * k);
            }
            ctx.red[t] = r;
        }
        return ctx;
    }

    static std::uint32_t pack(const Gf4Poly& g) {
        std::uint32_t p = 0;
        for (int k = 0; k <= g.degree(); ++k)
            p |= static_cast<std::uint32_t>(g.coeff(k).v) << (2 * k);
        return p;
    }

    std::uint32_t mulx(std::uint32_t r) const {
        if (m == 0) return 0;  // everything is divisible by a unit
        r <<= 2;
        unsigned top = (r >> (2 * m)) & 3u;
        return r ^ red[top];
    }

    std::uint32_t rem_of(const WeightedEvent& e) const {
        if (m == 0) return 0;
        std::uint32_t r = 0;
        for (int i = e.span - 1; i >= 0; --i) r = mulx(r) ^ e.symbol_at(i);
        return r;
    }
};

// Per-worker scratch: class-indexed linked lists of materialized
// combinations, reset cheaply between candidates via the dirty list.
struct SpectrumWork {
    struct Node {
        std::uint32_t cls;
        std::uint16_t span;
        std::uint8_t w;
        bool nt_ok;  // usable as the nondivisible prefix of a longer event
        std::int32_t next;
    };
    std::vector<std::int32_t> heads;
    std::vector<Node> pool;
    std::vector<std::uint32_t> dirty;
    std::uint64_t owner = 0;  // CandidateEval::id_, not an address: evaluators
                              // get moved around and stack slots get reused

    void ensure(std::size_t classes) {
        if (heads.size() < classes) heads.assign(classes, -1);
    }
    void reset() {
        for (std::uint32_t c : dirty) heads[c] = -1;
        dirty.clear();
        pool.clear();
        owner = 0;
    }
    void insert(std::uint32_t cls, std::uint16_t span, std::uint8_t w, bool nt_ok) {
        if (heads[cls] < 0) dirty.push_back(cls);
        pool.push_back({cls, span, w, nt_ok, heads[cls]});
        heads[cls] = static_cast<std::int32_t>(pool.size()) - 1;
    }
};

// Lazily extended spectrum of one CRC candidate: levels are computed in
// weight order, only as deep as comparisons require.
class CandidateEval {
  public:
    CandidateEval(const EventSet* ev, CrcModCtx ctx, int L, int depth)
        : ev_(ev), ctx_(ctx), L_(L), depth_(depth) {
        static std::atomic<std::uint64_t> serial{0};
        id_ = ++serial;
        next_ = 1;
        nc_.assign(static_cast<std::size_t>(depth) + 1, 0);
        nt_.assign(static_cast<std::size_t>(depth) + 1, 0);
        ext_cap_ = depth - ev->min_weight;
        combos_by_w_.resize(static_cast<std::size_t>(std::max(ext_cap_, 0)) + 1);
        rights_by_w_.resize(combos_by_w_.size());
    }

    std::uint64_t nc_at(int w, SpectrumWork& work) {
        while (next_ <= w) step(work);
        return nc_[static_cast<std::size_t>(w)];
    }
    std::uint64_t nt_at(int w, SpectrumWork& work) {
        while (next_ <= w) step(work);
        return nt_[static_cast<std::size_t>(w)];
    }
    int levels_done() const { return next_ - 1; }

    DistanceSpectrum spectrum(SpectrumWork& work) {
        while (next_ <= depth_) step(work);
        DistanceSpectrum s;
        s.d_max_searched = depth_;
        s.n_t = nt_;
        s.n_c = nc_;
        return s;
    }

  private:
    struct Combo {
        std::uint32_t cls;
        std::uint16_t span;
        bool nt_ok;
    };

    void rebind(SpectrumWork& work) {
        work.ensure(std::size_t{1} << (2 * ctx_.m));
        if (work.owner == id_) return;
        work.reset();
        work.owner = id_;
        for (int w = 0; w <= std::min(levels_done(), ext_cap_); ++w)
            for (const Combo& c : combos_by_w_[static_cast<std::size_t>(w)])
                work.insert(c.cls, c.span, static_cast<std::uint8_t>(w), c.nt_ok);
    }

    void step(SpectrumWork& work) {
        rebind(work);
        const int w = next_++;
        const int nu = ev_->nu;
        const int min_w = ev_->min_weight;
        std::uint64_t nc = 0, nt = 0;

        // Single events of this weight; materialize the ones light enough to
        // be a proper part of a heavier combination.  Events wider than the
        // window contribute nothing (and no placement of them fits).
        for (const WeightedEvent& e : ev_->by_weight[static_cast<std::size_t>(w)]) {
            if (e.span > L_) continue;
            std::uint32_t r = ctx_.rem_of(e);
            if (r == 0) {
                nc += static_cast<std::uint64_t>(L_ - e.span + 1);
                nt += 1;
            }
            if (w <= ext_cap_) {
                combos_by_w_[static_cast<std::size_t>(w)].push_back({r, e.span, r != 0});
                rights_by_w_[static_cast<std::size_t>(w)].push_back({r, e.span});
                work.insert(r, e.span, static_cast<std::uint8_t>(w), r != 0);
            }
        }

        if (w <= ext_cap_) {
            // Build the multi-event combinations of this total weight; count
            // the divisible ones as they appear.
            for (int wr = min_w; wr <= w - min_w; ++wr) {
                int wl = w - wr;
                const auto& lefts = combos_by_w_[static_cast<std::size_t>(wl)];
                const auto& rights = rights_by_w_[static_cast<std::size_t>(wr)];
                for (const auto& rt : rights) {
                    for (const Combo& lc : lefts) {
                        int d_lo = lc.span + nu;
                        int d_hi = L_ - rt.second;
                        if (d_lo > d_hi) continue;
                        std::uint32_t rs = rt.first;
                        for (int k = 0; k < d_lo; ++k) rs = ctx_.mulx(rs);
                        for (int d = d_lo; d <= d_hi; ++d) {
                            std::uint32_t cls = lc.cls ^ rs;
                            auto span = static_cast<std::uint16_t>(d + rt.second);
                            bool ok = lc.nt_ok && cls != 0;
                            if (cls == 0) {
                                nc += static_cast<std::uint64_t>(L_ - span + 1);
                                nt += lc.nt_ok ? 1 : 0;
                            }
                            combos_by_w_[static_cast<std::size_t>(w)].push_back(
                                {cls, span, ok});
                            work.insert(cls, span, static_cast<std::uint8_t>(w), ok);
                            rs = ctx_.mulx(rs);
                        }
                    }
                }
            }
        } else {
            // Too heavy to extend further: count combinations directly by
            // matching the needed left remainder class.
            for (int wr = min_w; wr <= w - min_w; ++wr) {
                int wl = w - wr;
                for (const auto& rt : rights_by_w_[static_cast<std::size_t>(wr)]) {
                    int d_lo = 1 + nu;
                    int d_hi = L_ - rt.second;
                    if (d_lo > d_hi) continue;
                    std::uint32_t rs = rt.first;
                    for (int k = 0; k < d_lo; ++k) rs = ctx_.mulx(rs);
                    for (int d = d_lo; d <= d_hi; ++d) {
                        for (std::int32_t ni = work.heads[rs]; ni >= 0;
                             ni = work.pool[static_cast<std::size_t>(ni)].next) {
                            const auto& node = work.pool[static_cast<std::size_t>(ni)];
                            if (node.w != wl || node.span > d - nu) continue;
                            nc += static_cast<std::uint64_t>(L_ - d - rt.second + 1);
                            nt += node.nt_ok ? 1 : 0;
                        }
                        rs = ctx_.mulx(rs);
                    }
                }
            }
        }

        nc_[static_cast<std::size_t>(w)] = nc;
        nt_[static_cast<std::size_t>(w)] = nt;
    }

    const EventSet* ev_;
    CrcModCtx ctx_;
    std::uint64_t id_;
    int L_;
    int depth_;
    int next_;
    int ext_cap_;
    std::vector<std::uint64_t> nc_, nt_;
    std::vector<std::vector<Combo>> combos_by_w_;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint16_t>>> rights_by_w_;
};

}  // namespace detail

// Exact spectrum of one configuration (no CRC means the bare inner code).
// The event set must cover the evaluation window: its enumeration L must be
// at least K + m (a larger set is fine, oversize events just never fit).
inline DistanceSpectrum spectrum_for_crc(const EventSet& events,
                                         const std::optional<CrcSpec>& crc, int K) {
    int m = crc ? crc->m() : 0;
    if (crc) crc->validate();
    if (events.L < K + m)
        throw std::invalid_argument("spectrum_for_crc: event set enumerated for L=" +
                                    std::to_string(events.L) + ", need at least K+m=" +
                                    std::to_string(K + m));
    detail::CrcModCtx ctx;
    if (crc)
        ctx = detail::CrcModCtx::from_packed(detail::CrcModCtx::pack(crc->g), m);
    else
        ctx = detail::CrcModCtx::from_packed(detail::CrcModCtx::pack(Gf4Poly::one()), 0);
    detail::CandidateEval eval(&events, ctx, K + m, events.d_tilde);
    detail::SpectrumWork work;
    return eval.spectrum(work);
}

struct SearchReport {
    CrcSpec best;
    DistanceSpectrum spectrum;
    std::vector<CrcSpec> co_optimal;  // other candidates tied through d_tilde
    std::uint64_t candidates_searched = 0;
    int d_tilde = 0;
};

namespace detail {

inline Gf4Poly candidate_poly(std::uint64_t idx, int m) {
    // Constant term 1; (g_1..g_{m-1}) are the base-4 digits of idx/3, most
    // significant first; the leading coefficient cycles fastest.  Ascending
    // idx is lexicographic order on (g_1, ..., g_m).
    std::vector<Gf4> c(static_cast<std::size_t>(m) + 1);
    c[0] = Gf4(1);
    c[static_cast<std::size_t>(m)] = Gf4(1 + static_cast<unsigned>(idx % 3));
    std::uint64_t mid = idx / 3;
    for (int k = m - 1; k >= 1; --k) {
        c[static_cast<std::size_t>(k)] = Gf4(static_cast<unsigned>(mid % 4));
        mid /= 4;
    }
    return Gf4Poly(std::move(c));
}

struct SearchLane {
    std::vector<std::uint64_t> leader_idx;
    std::vector<CandidateEval> leader_eval;
};

// Lexicographic tournament over the n_c vectors (smaller is better: a zero
// where the incumbent is positive means a larger d_min, equal prefixes fall
// through to the lighter multiplicity).
inline void run_lane(const EventSet& ev, int K, int m, int d_tilde, std::uint64_t lo,
                     std::uint64_t hi, SearchLane& lane) {
    SpectrumWork work;
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
        auto ctx = CrcModCtx::from_packed(CrcModCtx::pack(candidate_poly(idx, m)), m);
        CandidateEval eval(&ev, ctx, K + m, d_tilde);
        if (lane.leader_idx.empty()) {
            lane.leader_idx.push_back(idx);
            lane.leader_eval.push_back(std::move(eval));
            continue;
        }
        int verdict = 0;  // -1 challenger worse, +1 better, 0 tied through d_tilde
        for (int w = ev.min_weight; w <= d_tilde; ++w) {
            std::uint64_t mine = eval.nc_at(w, work);
            std::uint64_t theirs = lane.leader_eval.front().nc_at(w, work);
            if (mine != theirs) {
                verdict = mine < theirs ? 1 : -1;
                break;
            }
        }
        if (verdict > 0) {
            lane.leader_idx.assign(1, idx);
            lane.leader_eval.clear();
            lane.leader_eval.push_back(std::move(eval));
        } else if (verdict == 0) {
            lane.leader_idx.push_back(idx);
            lane.leader_eval.push_back(std::move(eval));
        }
    }
}

}  // namespace detail

// Distance-spectrum-optimal CRC search over all 3*4^(m-1) degree-m candidates
// with unit constant term.  Candidates are compared by (d_min descending,
// then n_c per weight ascending); exact ties through d_tilde are reported as
// co-optimal, with the lexicographically smallest polynomial as the winner.
// This overload reuses a pre-enumerated event set (several searches on the
// same inner code share the expensive enumeration).
inline SearchReport dso_search(const EventSet& ev, int K, int m, int d_tilde,
                               int workers = 1) {
    if (K < 1) throw std::invalid_argument("dso_search: K must be >= 1");
    if (m < 1 || m > 10) throw std::invalid_argument("dso_search: m out of range [1,10]");
    if (d_tilde < 1 || d_tilde > ev.d_tilde)
        throw std::invalid_argument("dso_search: d_tilde outside the enumerated range");
    if (ev.L < K + m)
        throw std::invalid_argument("dso_search: event set window smaller than K+m");
    if (workers < 1) throw std::invalid_argument("dso_search: workers must be >= 1");

    if (ev.min_weight > d_tilde)
        throw DTildeTooSmall("dso_search: no error events at or below d_tilde=" +
                             std::to_string(d_tilde) + "; increase d_tilde");

    const std::uint64_t n_cand = 3ULL << (2 * (m - 1));
    int lanes = static_cast<int>(std::min<std::uint64_t>(
        static_cast<std::uint64_t>(workers), n_cand));
    std::vector<detail::SearchLane> lane(static_cast<std::size_t>(lanes));
    {
        std::vector<std::thread> pool;
        for (int t = 1; t < lanes; ++t) {
            std::uint64_t lo = n_cand * t / lanes, hi = n_cand * (t + 1) / lanes;
            pool.emplace_back([&, t, lo, hi] {
                detail::run_lane(ev, K, m, d_tilde, lo, hi,
                                 lane[static_cast<std::size_t>(t)]);
            });
        }
        detail::run_lane(ev, K, m, d_tilde, 0, n_cand / lanes, lane[0]);
        for (auto& th : pool) th.join();
    }

    // Deterministic merge in candidate-index order (lanes are contiguous and
    // already sorted within themselves).
    detail::SpectrumWork work;
    std::vector<std::uint64_t> best_idx;
    std::vector<detail::CandidateEval> best_eval;
    for (auto& ln : lane) {
        for (std::size_t i = 0; i < ln.leader_idx.size(); ++i) {
            if (best_idx.empty()) {
                best_idx.push_back(ln.leader_idx[i]);
                best_eval.push_back(std::move(ln.leader_eval[i]));
                continue;
            }
            int verdict = 0;
            for (int w = ev.min_weight; w <= d_tilde; ++w) {
                std::uint64_t mine = ln.leader_eval[i].nc_at(w, work);
                std::uint64_t theirs = best_eval.front().nc_at(w, work);
                if (mine != theirs) {
                    verdict = mine < theirs ? 1 : -1;
                    break;
                }
            }
            if (verdict > 0) {
                best_idx.assign(1, ln.leader_idx[i]);
                best_eval.clear();
                best_eval.push_back(std::move(ln.leader_eval[i]));
            } else if (verdict == 0) {
                best_idx.push_back(ln.leader_idx[i]);
                best_eval.push_back(std::move(ln.leader_eval[i]));
            }
        }
    }

    SearchReport rep;
    rep.d_tilde = d_tilde;
    rep.candidates_searched = n_cand;
    rep.best.g = detail::candidate_poly(best_idx.front(), m);
    rep.spectrum = best_eval.front().spectrum(work);
    if (rep.spectrum.d_min() < 0)
        throw DTildeTooSmall(
            "dso_search: best candidates have empty spectra up to d_tilde=" +
            std::to_string(d_tilde) + "; increase d_tilde");
    for (std::size_t i = 1; i < best_idx.size(); ++i)
        rep.co_optimal.push_back(CrcSpec{detail::candidate_poly(best_idx[i], m)});
    return rep;
}

inline SearchReport dso_search(const ConvCodeSpec& conv, int K, int m, int d_tilde,
                               int workers = 1) {
    conv.validate();
    if (K < 1 || m < 1) throw std::invalid_argument("dso_search: K and m must be >= 1");
    if (d_tilde < 1) throw std::invalid_argument("dso_search: d_tilde must be >= 1");
    EventSet ev = enumerate_bounded_weight_codewords(conv, K + m, d_tilde);
    return dso_search(ev, K, m, d_tilde, workers);
}

// Truncated union bound over the block spectrum; p2_by_weight[w] is the
// pairwise error probability at symbol distance w (index 0 unused).
inline double union_bound_fer(const DistanceSpectrum& spec,
                              const std::vector<double>& p2_by_weight) {
    if (static_cast<int>(p2_by_weight.size()) <= spec.d_max_searched)
        throw std::invalid_argument("union_bound_fer: p2 table shorter than spectrum");
    double sum = 0.0;
    for (int w = 1; w <= spec.d_max_searched; ++w)
        sum += static_cast<double>(spec.n_c[static_cast<std::size_t>(w)]) *
               p2_by_weight[static_cast<std::size_t>(w)];
    return std::min(sum, 1.0);
}

// Smallest event weight of the inner code within the window; the usual
// d_tilde default is this plus a tie-breaking margin.
inline int find_d_free(const ConvCodeSpec& conv, int L) {
    for (int d = 1; d <= 4 * (conv.nu + 1); ++d) {
        EventSet ev = enumerate_bounded_weight_codewords(conv, L, d);
        if (ev.min_weight <= d) return ev.min_weight;
    }
    throw std::runtime_error("find_d_free: no event found at plausible weights");
}

}  // namespace qfsk
