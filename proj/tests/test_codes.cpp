#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "qfsk/codes.hpp"

using namespace qfsk;

namespace {

const ConvCodeSpec kNu2{2, Gf4Poly::from_string("1,1,1"), Gf4Poly::from_string("1,a,1")};
const ConvCodeSpec kNu4{4, Gf4Poly::from_string("1,1,1,b,a"),
                        Gf4Poly::from_string("1,a,1,a,b")};

std::vector<Gf4> random_syms(std::mt19937_64& rng, int len) {
    std::uniform_int_distribution<unsigned> sym(0, 3);
    std::vector<Gf4> v(static_cast<std::size_t>(len));
    for (auto& s : v) s = Gf4(sym(rng));
    return v;
}

std::vector<unsigned> raw(const std::vector<Gf4>& v) {
    std::vector<unsigned> r;
    for (Gf4 s : v) r.push_back(s.v);
    return r;
}

}  // namespace

TEST_CASE("convolutional encoder matches the schoolbook products") {
    std::mt19937_64 rng(3);
    for (const auto& conv : {kNu2, kNu4})
        for (int it = 0; it < 100; ++it) {
            auto msg = random_syms(rng, 1 + static_cast<int>(rng() % 20));
            auto got = conv_encode_zt(conv, msg);
            auto want = oracle::conv_encode_reference(conv, raw(msg));
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].v == want[i]);
        }
}

TEST_CASE("every encoding ends in the zero state") {
    std::mt19937_64 rng(5);
    for (const auto& conv : {kNu2, kNu4}) {
        ConvTrellis tr(conv);
        for (int it = 0; it < 50; ++it) {
            auto msg = random_syms(rng, 12);
            std::uint32_t s = 0;
            for (Gf4 a : msg) s = tr.next(s, a.v);
            for (int k = 0; k < conv.nu; ++k) s = tr.next(s, 0);
            CHECK(s == 0);
        }
    }
}

TEST_CASE("output length is 2(K + m + nu)") {
    CodeConfig cfg;
    cfg.K = 64;
    cfg.conv = kNu2;
    cfg.crc = CrcSpec{Gf4Poly::from_string("1,0,0,a,b,1")};
    CHECK(cfg.m() == 5);
    CHECK(cfg.input_len() == 69);
    CHECK(cfg.n() == 142);
    std::mt19937_64 rng(9);
    auto word = encode_message(cfg, random_syms(rng, cfg.K));
    CHECK(static_cast<int>(word.size()) == cfg.n());
    CHECK(Catch::Approx(cfg.rate_bits()).epsilon(1e-12) == 128.0 / 142.0);
}

TEST_CASE("crc parity matches the exhaustive search and divides") {
    std::mt19937_64 rng(7);
    for (const char* gs : {"1,a", "1,b,1", "1,0,a", "1,b,1,a"}) {
        CrcSpec crc{Gf4Poly::from_string(gs)};
        for (int it = 0; it < 40; ++it) {
            auto msg = random_syms(rng, 8);
            auto word = crc_encode(crc, msg);
            REQUIRE(static_cast<int>(word.size()) == 8 + crc.m());
            CHECK(crc_check(crc, word));
            auto want = oracle::crc_parity_reference(crc, raw(msg));
            for (int k = 0; k < crc.m(); ++k)
                CHECK(word[static_cast<std::size_t>(8 + k)].v == want[static_cast<std::size_t>(k)]);
        }
    }
}

TEST_CASE("single symbol corruption never passes the crc") {
    std::mt19937_64 rng(11);
    CrcSpec crc{Gf4Poly::from_string("1,b,1,a")};
    for (int it = 0; it < 50; ++it) {
        auto word = crc_encode(crc, random_syms(rng, 10));
        std::size_t pos = rng() % word.size();
        unsigned delta = 1 + static_cast<unsigned>(rng() % 3);
        word[pos] = word[pos] + Gf4(delta);
        CHECK_FALSE(crc_check(crc, word));
    }
}

TEST_CASE("the code is linear") {
    CodeConfig cfg;
    cfg.K = 8;
    cfg.conv = kNu2;
    cfg.crc = CrcSpec{Gf4Poly::from_string("1,b,1")};
    std::mt19937_64 rng(13);
    for (int it = 0; it < 50; ++it) {
        auto m1 = random_syms(rng, cfg.K), m2 = random_syms(rng, cfg.K);
        std::vector<Gf4> ms(m1.size());
        for (std::size_t i = 0; i < m1.size(); ++i) ms[i] = m1[i] + m2[i];
        auto c1 = encode_message(cfg, m1), c2 = encode_message(cfg, m2);
        auto cs = encode_message(cfg, ms);
        for (std::size_t i = 0; i < cs.size(); ++i) CHECK(cs[i].v == (c1[i] + c2[i]).v);
    }
}

TEST_CASE("concatenated generators encode the quotient message") {
    CrcSpec crc{Gf4Poly::from_string("1,b,1,a")};
    ConvCodeSpec concat = concat_generators(kNu2, crc);
    CHECK(concat.nu == 2 + 3);
    std::mt19937_64 rng(17);
    for (int it = 0; it < 30; ++it) {
        auto msg = random_syms(rng, 9);
        auto word = crc_encode(crc, msg);  // divisible by g
        auto dm = poly_divmod(Gf4Poly(word), crc.g);
        REQUIRE(dm.rem.degree() < 0);
        std::vector<Gf4> v;
        for (int k = 0; k <= dm.quot.degree(); ++k) v.push_back(dm.quot.coeff(k));
        // same trellis length: pad the quotient with zeros to |word| - m
        v.resize(word.size() - static_cast<std::size_t>(crc.m()), Gf4(0));
        auto through_inner = conv_encode_zt(kNu2, word);
        auto through_concat = conv_encode_zt(concat, v);
        REQUIRE(through_inner.size() == through_concat.size());
        for (std::size_t i = 0; i < through_inner.size(); ++i)
            CHECK(through_inner[i].v == through_concat[i].v);
    }
}

TEST_CASE("trellis tables agree with direct encoding") {
    for (const auto& conv : {kNu2, kNu4}) {
        ConvTrellis tr(conv);
        std::mt19937_64 rng(19);
        for (int it = 0; it < 40; ++it) {
            auto msg = random_syms(rng, 10);
            auto word = conv_encode_zt(conv, msg);
            std::uint32_t s = 0;
            for (int t = 0; t < static_cast<int>(msg.size()) + conv.nu; ++t) {
                unsigned a = t < static_cast<int>(msg.size())
                                 ? msg[static_cast<std::size_t>(t)].v
                                 : 0u;
                CHECK(tr.out1(s, a) == word[2 * static_cast<std::size_t>(t)].v);
                CHECK(tr.out2(s, a) == word[2 * static_cast<std::size_t>(t) + 1].v);
                std::uint32_t ns = tr.next(s, a);
                unsigned dropped = (s >> (2 * (conv.nu - 1))) & 3u;
                CHECK(tr.pred(ns, dropped) == s);
                CHECK(tr.input_of(ns) == a);
                s = ns;
            }
        }
    }
}

TEST_CASE("bad code specs are rejected") {
    ConvCodeSpec bad = kNu2;
    bad.nu = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = kNu2;
    bad.g1 = Gf4Poly::from_string("1,1");  // degree != nu
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    CrcSpec crc{Gf4Poly::from_string("0")};
    CHECK_THROWS_AS(crc.validate(), std::invalid_argument);
    crc.g = Gf4Poly::from_string("0,1");  // zero constant term
    CHECK_THROWS_AS(crc.validate(), std::invalid_argument);

    CodeConfig cfg;
    cfg.K = 0;
    cfg.conv = kNu2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
