#pragma once

// GF(4) scalar and polynomial arithmetic.
//
// Elements are encoded 0->0, 1->1, alpha->2, beta->3 where beta = alpha^2 and
// alpha^3 = 1.  Addition is carry-less (bitwise XOR of the 2-bit encodings);
// multiplication follows the cyclic group on {1, alpha, beta}.  Text form uses
// the symbols {0,1,a,b}, comma separated, constant term first.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfsk {

struct Gf4 {
    std::uint8_t v = 0;

    constexpr Gf4() = default;
    constexpr explicit Gf4(unsigned x) : v(static_cast<std::uint8_t>(x)) {
        // callers must pass 0..3; checked in debug paths only
    }

    constexpr bool operator==(const Gf4&) const = default;
    constexpr bool is_zero() const { return v == 0; }
};

namespace detail {
// mul[a][b]: 0 annihilates; {1,2,3} form the cyclic group of order 3
// (2*2=3, 2*3=1, 3*3=2).
inline constexpr std::array<std::array<std::uint8_t, 4>, 4> gf4_mul_table = {{
    {{0, 0, 0, 0}},
    {{0, 1, 2, 3}},
    {{0, 2, 3, 1}},
    {{0, 3, 1, 2}},
}};
inline constexpr std::array<std::uint8_t, 4> gf4_inv_table = {0, 1, 3, 2};
}  // namespace detail

constexpr Gf4 operator+(Gf4 a, Gf4 b) { return Gf4(a.v ^ b.v); }
constexpr Gf4 operator-(Gf4 a, Gf4 b) { return a + b; }  // characteristic 2
constexpr Gf4 operator*(Gf4 a, Gf4 b) {
    return Gf4(detail::gf4_mul_table[a.v][b.v]);
}

constexpr Gf4 gf4_inv(Gf4 a) {
    if (a.is_zero()) throw std::domain_error("gf4_inv: zero has no inverse");
    return Gf4(detail::gf4_inv_table[a.v]);
}

constexpr Gf4 operator/(Gf4 a, Gf4 b) { return a * gf4_inv(b); }

inline char gf4_to_char(Gf4 a) {
    static constexpr char rep[4] = {'0', '1', 'a', 'b'};
    return rep[a.v];
}

inline Gf4 gf4_from_char(char c) {
    switch (c) {
        case '0': return Gf4(0);
        case '1': return Gf4(1);
        case 'a': case 'A': return Gf4(2);
        case 'b': case 'B': return Gf4(3);
        default:
            throw std::invalid_argument(std::string("gf4: bad symbol '") + c +
                                        "' (expected one of 0,1,a,b)");
    }
}

// Dense polynomial over GF(4), coefficient of x^k at index k.  Canonical form
// never stores trailing zero coefficients; the zero polynomial has no
// coefficients and degree -1.
class Gf4Poly {
  public:
    Gf4Poly() = default;
    explicit Gf4Poly(std::vector<Gf4> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Gf4Poly zero() { return Gf4Poly(); }
    static Gf4Poly one() { return Gf4Poly({Gf4(1)}); }
    static Gf4Poly x_power(int k, Gf4 scale = Gf4(1)) {
        if (k < 0) throw std::invalid_argument("x_power: negative exponent");
        std::vector<Gf4> c(static_cast<std::size_t>(k) + 1);
        c.back() = scale;
        return Gf4Poly(std::move(c));
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }

    Gf4 coeff(int k) const {
        if (k < 0 || k >= static_cast<int>(c_.size())) return Gf4(0);
        return c_[static_cast<std::size_t>(k)];
    }

    const std::vector<Gf4>& coeffs() const { return c_; }

    int weight() const {
        int w = 0;
        for (Gf4 a : c_) w += !a.is_zero();
        return w;
    }

    friend Gf4Poly operator+(const Gf4Poly& a, const Gf4Poly& b) {
        std::vector<Gf4> c(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
        return Gf4Poly(std::move(c));
    }

    friend Gf4Poly operator*(const Gf4Poly& a, const Gf4Poly& b) {
        if (a.is_zero() || b.is_zero()) return Gf4Poly();
        std::vector<Gf4> c(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i].is_zero()) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j)
                c[i + j] = c[i + j] + a.c_[i] * b.c_[j];
        }
        return Gf4Poly(std::move(c));
    }

    bool operator==(const Gf4Poly&) const = default;

    // Scales so the constant term becomes 1.  Requires a unit constant term.
    Gf4Poly normalized_constant_term() const {
        if (is_zero() || c_[0].is_zero())
            throw std::domain_error("normalize: constant term is zero");
        Gf4 s = gf4_inv(c_[0]);
        std::vector<Gf4> c(c_.size());
        for (std::size_t i = 0; i < c_.size(); ++i) c[i] = c_[i] * s;
        return Gf4Poly(std::move(c));
    }

    std::string to_string() const {
        if (is_zero()) return "0";
        std::string s;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (i) s += ',';
            s += gf4_to_char(c_[i]);
        }
        return s;
    }

    static Gf4Poly from_string(const std::string& text) {
        std::vector<Gf4> c;
        std::string tok;
        auto flush = [&] {
            if (tok.size() != 1)
                throw std::invalid_argument("gf4 poly: bad token '" + tok + "' in '" +
                                            text + "'");
            c.push_back(gf4_from_char(tok[0]));
            tok.clear();
        };
        for (char ch : text) {
            if (ch == ',') {
                flush();
            } else if (ch != ' ' && ch != '\t') {
                tok += ch;
            }
        }
        if (tok.empty())
            throw std::invalid_argument("gf4 poly: empty/trailing token in '" + text + "'");
        flush();
        return Gf4Poly(std::move(c));
    }

  private:
    void trim() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }

    std::vector<Gf4> c_;
};

// Quotient and remainder of a/b; b must be nonzero.  deg(r) < deg(b).
struct Gf4DivMod {
    Gf4Poly quot;
    Gf4Poly rem;
};

inline Gf4DivMod poly_divmod(const Gf4Poly& a, const Gf4Poly& b) {
    if (b.is_zero()) throw std::domain_error("poly_divmod: division by zero poly");
    if (a.degree() < b.degree()) return {Gf4Poly(), a};
    std::vector<Gf4> rem(a.coeffs().begin(), a.coeffs().end());
    std::vector<Gf4> quot(static_cast<std::size_t>(a.degree() - b.degree()) + 1);
    Gf4 lead_inv = gf4_inv(b.coeff(b.degree()));
    for (int k = a.degree(); k >= b.degree(); --k) {
        Gf4 top = rem[static_cast<std::size_t>(k)];
        if (top.is_zero()) continue;
        Gf4 q = top * lead_inv;
        quot[static_cast<std::size_t>(k - b.degree())] = q;
        for (int j = 0; j <= b.degree(); ++j) {
            auto idx = static_cast<std::size_t>(k - b.degree() + j);
            rem[idx] = rem[idx] + q * b.coeff(j);
        }
    }
    return {Gf4Poly(std::move(quot)), Gf4Poly(std::move(rem))};
}

inline bool poly_divides(const Gf4Poly& g, const Gf4Poly& a) {
    return poly_divmod(a, g).rem.is_zero();
}

}  // namespace qfsk
