#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qfsk/gf4.hpp"

using namespace qfsk;

namespace {

Gf4Poly random_poly(std::mt19937_64& rng, int max_deg, bool nonzero = false) {
    std::uniform_int_distribution<int> deg(0, max_deg);
    std::uniform_int_distribution<unsigned> sym(0, 3);
    for (;;) {
        std::vector<Gf4> c(static_cast<std::size_t>(deg(rng)) + 1);
        for (auto& s : c) s = Gf4(sym(rng));
        Gf4Poly p(std::move(c));
        if (!nonzero || p.degree() >= 0) return p;
    }
}

}  // namespace

TEST_CASE("field axioms hold over all element pairs and triples") {
    for (unsigned a = 0; a < 4; ++a) {
        Gf4 x(a);
        CHECK((x + Gf4(0)).v == a);
        CHECK((x * Gf4(1)).v == a);
        CHECK((x + x).v == 0);  // characteristic 2
        if (a != 0) CHECK((x * gf4_inv(x)).v == 1);
        for (unsigned b = 0; b < 4; ++b) {
            Gf4 y(b);
            CHECK((x + y).v == (y + x).v);
            CHECK((x * y).v == (y * x).v);
            for (unsigned c = 0; c < 4; ++c) {
                Gf4 z(c);
                CHECK(((x + y) + z).v == (x + (y + z)).v);
                CHECK(((x * y) * z).v == (x * (y * z)).v);
                CHECK((x * (y + z)).v == (x * y + x * z).v);
            }
        }
    }
}

TEST_CASE("alpha and beta multiply per the standard representation") {
    Gf4 alpha(2), beta(3);
    CHECK((alpha * alpha).v == beta.v);
    CHECK((alpha * beta).v == 1);
    CHECK((beta * beta).v == alpha.v);
    CHECK(gf4_inv(alpha).v == beta.v);
}

TEST_CASE("polynomials canonicalize away trailing zeros") {
    Gf4Poly p({Gf4(1), Gf4(2), Gf4(0), Gf4(0)});
    CHECK(p.degree() == 1);
    CHECK(Gf4Poly({Gf4(0), Gf4(0)}).degree() == -1);
    CHECK(Gf4Poly::zero().degree() == -1);
    CHECK(Gf4Poly::one().degree() == 0);
    CHECK(Gf4Poly::x_power(3).degree() == 3);
}

TEST_CASE("divmod reconstructs the dividend") {
    std::mt19937_64 rng(7);
    for (int it = 0; it < 500; ++it) {
        Gf4Poly a = random_poly(rng, 12);
        Gf4Poly b = random_poly(rng, 6, true);
        auto dm = poly_divmod(a, b);
        CHECK((dm.quot * b + dm.rem).to_string() == a.to_string());
        CHECK(dm.rem.degree() < b.degree());
    }
}

TEST_CASE("multiplication is commutative and associative") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 200; ++it) {
        Gf4Poly a = random_poly(rng, 8);
        Gf4Poly b = random_poly(rng, 8);
        Gf4Poly c = random_poly(rng, 8);
        CHECK((a * b).to_string() == (b * a).to_string());
        CHECK(((a * b) * c).to_string() == (a * (b * c)).to_string());
        CHECK((a * (b + c)).to_string() == (a * b + a * c).to_string());
    }
}

TEST_CASE("divisibility agrees with explicit remainders") {
    std::mt19937_64 rng(13);
    for (int it = 0; it < 200; ++it) {
        Gf4Poly g = random_poly(rng, 4, true);
        Gf4Poly q = random_poly(rng, 6);
        CHECK(poly_divides(g, g * q));
        Gf4Poly a = random_poly(rng, 8);
        CHECK(poly_divides(g, a) == (poly_divmod(a, g).rem.degree() < 0));
    }
}

TEST_CASE("text form round trips") {
    CHECK(Gf4Poly::from_string("1,b,1,a").to_string() == "1,b,1,a");
    CHECK(Gf4Poly::from_string("1,0,0,a,b,1").to_string() == "1,0,0,a,b,1");
    CHECK(Gf4Poly::from_string("0").to_string() == "0");
    CHECK(Gf4Poly::from_string("1,b,1,a").coeff(1).v == 3);
    CHECK(Gf4Poly::zero().to_string() == "0");

    std::mt19937_64 rng(17);
    for (int it = 0; it < 100; ++it) {
        Gf4Poly p = random_poly(rng, 9);
        CHECK(Gf4Poly::from_string(p.to_string()).to_string() == p.to_string());
    }
}

TEST_CASE("malformed polynomial text is rejected") {
    CHECK_THROWS_AS(Gf4Poly::from_string(""), std::invalid_argument);
    CHECK_THROWS_AS(Gf4Poly::from_string("1,c"), std::invalid_argument);
    CHECK_THROWS_AS(Gf4Poly::from_string("1,,a"), std::invalid_argument);
    CHECK_THROWS_AS(Gf4Poly::from_string("2x"), std::invalid_argument);
    CHECK_THROWS_AS(Gf4Poly::from_string("1,a b"), std::invalid_argument);
    CHECK(Gf4Poly::from_string("1, a").to_string() == "1,a");  // spaces are fine
}

TEST_CASE("division by zero polynomial throws") {
    CHECK_THROWS_AS(poly_divmod(Gf4Poly::one(), Gf4Poly::zero()), std::domain_error);
}
