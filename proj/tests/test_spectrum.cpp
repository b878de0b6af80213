#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qfsk/spectrum.hpp"

using namespace qfsk;

namespace {

const ConvCodeSpec kNu2{2, Gf4Poly::from_string("1,1,1"), Gf4Poly::from_string("1,a,1")};
const ConvCodeSpec kNu4{4, Gf4Poly::from_string("1,1,1,b,a"),
                        Gf4Poly::from_string("1,a,1,a,b")};

}  // namespace

TEST_CASE("free distances of the two inner codes") {
    CHECK(find_d_free(kNu2, 64) == 6);
    CHECK(find_d_free(kNu4, 64) == 9);
}

TEST_CASE("enumerated events re-encode to their recorded weight") {
    EventSet ev = enumerate_bounded_weight_codewords(kNu2, 16, 10);
    REQUIRE(ev.min_weight == 6);
    std::size_t checked = 0;
    for (int w = ev.min_weight; w <= ev.d_tilde; ++w)
        for (const auto& e : ev.by_weight[static_cast<std::size_t>(w)]) {
            auto p = e.input_poly();
            REQUIRE(p.degree() + 1 == e.span);
            REQUIRE_FALSE(p.coeff(0).is_zero());  // events start with a nonzero input
            std::vector<unsigned> u;
            for (int k = 0; k <= p.degree(); ++k) u.push_back(p.coeff(k).v);
            auto out = oracle::conv_encode_reference(kNu2, u);
            int wt = 0;
            for (unsigned s : out) wt += s != 0;
            CHECK(wt == w);
            if (++checked >= 500) return;  // plenty of shapes exercised by then
        }
    CHECK(checked > 0);
}

TEST_CASE("spectra match brute force over every message") {
    struct Case {
        int K;
        const char* g;  // empty = no crc
    };
    for (const Case& c : {Case{6, ""}, Case{6, "1,a"}, Case{5, "1,b,1"}}) {
        CodeConfig cfg;
        cfg.K = c.K;
        cfg.conv = kNu2;
        if (*c.g) cfg.crc = CrcSpec{Gf4Poly::from_string(c.g)};
        const int d_tilde = 10;

        EventSet ev = enumerate_bounded_weight_codewords(kNu2, cfg.input_len(), d_tilde);
        DistanceSpectrum got = spectrum_for_crc(ev, cfg.crc, cfg.K);
        auto want_nc = oracle::brute_force_nc(cfg, d_tilde);
        auto want_nt = oracle::concat_trellis_nt(cfg, d_tilde);

        REQUIRE(got.d_max_searched == d_tilde);
        for (int w = 1; w <= d_tilde; ++w) {
            INFO("K=" << c.K << " g=" << c.g << " w=" << w);
            CHECK(got.n_c[static_cast<std::size_t>(w)] ==
                  want_nc[static_cast<std::size_t>(w)]);
            CHECK(got.n_t[static_cast<std::size_t>(w)] ==
                  want_nt[static_cast<std::size_t>(w)]);
        }
    }
}

TEST_CASE("a crc can only thin the same-length spectrum") {
    const int K = 10, m = 3, d_tilde = 12;
    EventSet ev = enumerate_bounded_weight_codewords(kNu2, K + m, d_tilde);
    DistanceSpectrum bare = spectrum_for_crc(ev, std::nullopt, K + m);
    for (const char* gs : {"1,b,1,a", "1,0,0,1", "1,a,a,b"}) {
        std::optional<CrcSpec> crc{CrcSpec{Gf4Poly::from_string(gs)}};
        DistanceSpectrum thinned = spectrum_for_crc(ev, crc, K);
        for (int w = 1; w <= d_tilde; ++w)
            CHECK(thinned.n_c[static_cast<std::size_t>(w)] <=
                  bare.n_c[static_cast<std::size_t>(w)]);
    }
}

TEST_CASE("search winners respect the free distance floor") {
    auto rep = dso_search(kNu2, 12, 2, 10);
    CHECK(rep.spectrum.d_min() >= 6);
    CHECK(rep.candidates_searched == 12);  // 3 * 4^(m-1)
    CHECK(rep.best.g.degree() == 2);
    CHECK(rep.best.g.coeff(0).v == 1);
}

TEST_CASE("a too-small weight bound is reported as such") {
    CHECK_THROWS_AS(dso_search(kNu2, 12, 2, 3), DTildeTooSmall);
}

TEST_CASE("worker count does not change the search result") {
    EventSet ev = enumerate_bounded_weight_codewords(kNu2, 14, 11);
    auto a = dso_search(ev, 12, 2, 11, 1);
    auto b = dso_search(ev, 12, 2, 11, 3);
    CHECK(a.best.g.to_string() == b.best.g.to_string());
    CHECK(a.spectrum.n_c == b.spectrum.n_c);
    CHECK(a.spectrum.n_t == b.spectrum.n_t);
    REQUIRE(a.co_optimal.size() == b.co_optimal.size());
    for (std::size_t i = 0; i < a.co_optimal.size(); ++i)
        CHECK(a.co_optimal[i].g.to_string() == b.co_optimal[i].g.to_string());
}

TEST_CASE("an oversized event window reproduces the tight one") {
    // the same event set serves any K+m up to its window
    EventSet wide = enumerate_bounded_weight_codewords(kNu2, 20, 8);
    EventSet tight = enumerate_bounded_weight_codewords(kNu2, 12, 8);
    std::optional<CrcSpec> crc{CrcSpec{Gf4Poly::from_string("1,b,1")}};
    DistanceSpectrum a = spectrum_for_crc(wide, crc, 10);
    DistanceSpectrum b = spectrum_for_crc(tight, crc, 10);
    CHECK(a.n_c == b.n_c);
    CHECK(a.n_t == b.n_t);
}

TEST_CASE("a window smaller than the code is rejected") {
    EventSet ev = enumerate_bounded_weight_codewords(kNu2, 6, 8);
    std::optional<CrcSpec> crc{CrcSpec{Gf4Poly::from_string("1,b,1")}};
    CHECK_THROWS_AS(spectrum_for_crc(ev, crc, 10), std::invalid_argument);
    CHECK_THROWS_AS(dso_search(ev, 10, 2, 8), std::invalid_argument);
}

TEST_CASE("union bound is a clamped dot product") {
    DistanceSpectrum spec;
    spec.d_max_searched = 2;
    spec.n_t = {0, 0, 0};
    spec.n_c = {0, 2, 3};
    CHECK(union_bound_fer(spec, {0.0, 0.1, 0.01}) == Catch::Approx(0.23));
    CHECK(union_bound_fer(spec, {0.0, 0.9, 0.2}) == 1.0);
    CHECK_THROWS_AS(union_bound_fer(spec, {0.0, 0.1}), std::invalid_argument);
}
