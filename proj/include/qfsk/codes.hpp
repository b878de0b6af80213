#pragma once

// Rate-1/2 zero-terminated convolutional codes over GF(4) and the systematic
// CRC outer code that selects a divisible subset of encoder inputs.
//
// Time order equals degree order: the symbol fed at step t is the x^t
// coefficient, so encoder outputs are polynomial products v_j = u * g_j and a
// CRC word is valid iff its polynomial is divisible by the CRC generator.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qfsk/gf4.hpp"

namespace qfsk {

// Feedforward generator pair (g1, g2), both of degree nu with nonzero leading
// and constant coefficients.
struct ConvCodeSpec {
    int nu = 0;
    Gf4Poly g1;
    Gf4Poly g2;

    void validate() const {
        if (nu < 0 || nu > 10)
            throw std::invalid_argument("conv code: nu out of range [0,10]");
        if (g1.degree() != nu || g2.degree() != nu)
            throw std::invalid_argument("conv code: generator degree != nu");
        if (nu > 0 && (g1.coeff(0).is_zero() || g2.coeff(0).is_zero()))
            throw std::invalid_argument("conv code: generator constant term is zero");
    }
};

// Degree-m CRC generator, constant term 1 by convention.
struct CrcSpec {
    Gf4Poly g;

    int m() const { return g.degree(); }

    void validate() const {
        if (g.degree() < 1)
            throw std::invalid_argument("crc: generator degree must be >= 1");
        if (g.coeff(0).is_zero())
            throw std::invalid_argument("crc: constant term must be nonzero");
        if (g.coeff(g.degree()).is_zero())
            throw std::invalid_argument("crc: leading coefficient must be nonzero");
    }
};

// One concatenated design: K message symbols, optional CRC, inner ZTCC.
struct CodeConfig {
    int K = 0;
    ConvCodeSpec conv;
    std::optional<CrcSpec> crc;

    int m() const { return crc ? crc->m() : 0; }
    int input_len() const { return K + m(); }                 // symbols entering the ZTCC
    int trellis_len() const { return input_len() + conv.nu; } // steps incl. termination
    int n() const { return 2 * trellis_len(); }               // channel symbols
    double rate_bits() const { return 2.0 * K / n(); }        // bits per channel use

    void validate() const {
        if (K < 1) throw std::invalid_argument("code config: K must be >= 1");
        conv.validate();
        if (crc) crc->validate();
    }
};

// Transition tables for the 4^nu-state trellis.  State = last nu inputs,
// newest in the low 2 bits.
class ConvTrellis {
  public:
    explicit ConvTrellis(const ConvCodeSpec& spec) : nu_(spec.nu) {
        spec.validate();
        n_states_ = 1u << (2 * nu_);
        out1_.resize(static_cast<std::size_t>(n_states_) * 4);
        out2_.resize(static_cast<std::size_t>(n_states_) * 4);
        next_.resize(static_cast<std::size_t>(n_states_) * 4);
        for (std::uint32_t s = 0; s < n_states_; ++s) {
            Gf4 acc1, acc2;
            for (int k = 1; k <= nu_; ++k) {
                Gf4 u(static_cast<unsigned>((s >> (2 * (k - 1))) & 3u));
                acc1 = acc1 + spec.g1.coeff(k) * u;
                acc2 = acc2 + spec.g2.coeff(k) * u;
            }
            for (unsigned a = 0; a < 4; ++a) {
                Gf4 in(a);
                out1_[s * 4 + a] = (acc1 + spec.g1.coeff(0) * in).v;
                out2_[s * 4 + a] = (acc2 + spec.g2.coeff(0) * in).v;
                next_[s * 4 + a] =
                    nu_ == 0 ? 0u : ((s << 2) | a) & (n_states_ - 1u);
            }
        }
    }

    int nu() const { return nu_; }
    std::uint32_t n_states() const { return n_states_; }
    std::uint8_t out1(std::uint32_t s, unsigned a) const { return out1_[s * 4 + a]; }
    std::uint8_t out2(std::uint32_t s, unsigned a) const { return out2_[s * 4 + a]; }
    std::uint32_t next(std::uint32_t s, unsigned a) const { return next_[s * 4 + a]; }

    // Predecessors of s' share (s' >> 2) and differ in the dropped oldest
    // symbol c; the consumed input is the low symbol of s'.
    std::uint32_t pred(std::uint32_t s_next, unsigned dropped) const {
        if (nu_ == 0) return 0;
        return (s_next >> 2) | (static_cast<std::uint32_t>(dropped) << (2 * (nu_ - 1)));
    }
    unsigned input_of(std::uint32_t s_next) const { return nu_ == 0 ? 0u : (s_next & 3u); }

  private:
    int nu_;
    std::uint32_t n_states_;
    std::vector<std::uint8_t> out1_, out2_, next_;
    friend class ConvTrellisInputTable;
};

// Zero-terminated encoding: appends nu zero symbols, emits the g1 output then
// the g2 output per step, 2*(len+nu) symbols total.
inline std::vector<Gf4> conv_encode_zt(const ConvCodeSpec& spec,
                                       const std::vector<Gf4>& input) {
    spec.validate();
    std::vector<Gf4> out;
    out.reserve(2 * (input.size() + static_cast<std::size_t>(spec.nu)));
    auto in_at = [&](int t) -> Gf4 {
        return (t >= 0 && t < static_cast<int>(input.size()))
                   ? input[static_cast<std::size_t>(t)]
                   : Gf4(0);
    };
    int total = static_cast<int>(input.size()) + spec.nu;
    for (int t = 0; t < total; ++t) {
        Gf4 v1, v2;
        for (int k = 0; k <= spec.nu; ++k) {
            Gf4 u = in_at(t - k);
            v1 = v1 + spec.g1.coeff(k) * u;
            v2 = v2 + spec.g2.coeff(k) * u;
        }
        out.push_back(v1);
        out.push_back(v2);
    }
    return out;
}

// Systematic CRC encode: returns msg followed by the m parity symbols, the
// unique completion making the word polynomial divisible by g.  Parity p
// solves msg(x) + x^K p(x) = 0 (mod g), i.e. p = x^(-K) msg mod g.
inline std::vector<Gf4> crc_encode(const CrcSpec& crc, const std::vector<Gf4>& msg) {
    crc.validate();
    if (msg.empty()) throw std::invalid_argument("crc_encode: empty message");
    const Gf4Poly& g = crc.g;
    Gf4Poly r = poly_divmod(Gf4Poly(msg), g).rem;
    // Divide by x once per message position: r must first be made to have a
    // zero constant term by adding the right multiple of g (g(0) != 0).
    Gf4 g0_inv = gf4_inv(g.coeff(0));
    for (int step = 0; step < static_cast<int>(msg.size()); ++step) {
        Gf4 r0 = r.coeff(0);
        if (!r0.is_zero()) {
            std::vector<Gf4> adj(static_cast<std::size_t>(g.degree()) + 1);
            Gf4 s = r0 * g0_inv;
            for (int j = 0; j <= g.degree(); ++j) adj[static_cast<std::size_t>(j)] = s * g.coeff(j);
            r = r + Gf4Poly(std::move(adj));
        }
        std::vector<Gf4> shifted;
        for (int j = 1; j <= r.degree(); ++j) shifted.push_back(r.coeff(j));
        r = Gf4Poly(std::move(shifted));
    }
    std::vector<Gf4> word = msg;
    for (int j = 0; j < crc.m(); ++j) word.push_back(r.coeff(j));
    return word;
}

inline bool crc_check(const CrcSpec& crc, const std::vector<Gf4>& word) {
    return poly_divmod(Gf4Poly(word), crc.g).rem.is_zero();
}

// Generators of the equivalent single convolutional code acting on the
// message stream: (g*g1, g*g2), memory m+nu.
inline ConvCodeSpec concat_generators(const ConvCodeSpec& inner, const CrcSpec& crc) {
    inner.validate();
    crc.validate();
    ConvCodeSpec out;
    out.nu = inner.nu + crc.m();
    out.g1 = crc.g * inner.g1;
    out.g2 = crc.g * inner.g2;
    return out;
}

// Full encode chain for one message.
inline std::vector<Gf4> encode_message(const CodeConfig& cfg, const std::vector<Gf4>& msg) {
    if (static_cast<int>(msg.size()) != cfg.K)
        throw std::invalid_argument("encode_message: message length != K");
    std::vector<Gf4> word = cfg.crc ? crc_encode(*cfg.crc, msg) : msg;
    return conv_encode_zt(cfg.conv, word);
}

}  // namespace qfsk
