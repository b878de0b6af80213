// qfsk_lab: command-line front end for the CRC-aided ZTCC toolkit.
//
// Subcommands: search (distance-spectrum-optimal CRC), spectrum (one code),
// fer (Monte-Carlo sweeps), rcu / normal (finite-blocklength bounds), gap
// (horizontal distance between two result curves).  Stochastic commands
// require an explicit --seed; results are reproducible from (seed, workers).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfsk/bounds.hpp"
#include "qfsk/codes.hpp"
#include "qfsk/gf4.hpp"
#include "qfsk/io.hpp"
#include "qfsk/sim.hpp"
#include "qfsk/spectrum.hpp"

namespace {

std::string join_invocation(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const qfsk::DTildeTooSmall& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::string w = e.what();
        std::cerr << "error: " << w << "\n";
        if (w.find("cannot write") != std::string::npos ||
            w.find("write failed") != std::string::npos)
            return 4;
        return 1;
    }
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

void print_spectrum_rows(const qfsk::DistanceSpectrum& spec) {
    std::printf("%8s %12s %16s\n", "weight", "N_t", "N_c");
    for (int w = 1; w <= spec.d_max_searched; ++w) {
        auto wi = static_cast<std::size_t>(w);
        if (spec.n_c[wi] == 0 && spec.n_t[wi] == 0) continue;
        std::printf("%8d %12llu %16llu\n", w,
                    static_cast<unsigned long long>(spec.n_t[wi]),
                    static_cast<unsigned long long>(spec.n_c[wi]));
    }
}

nlohmann::json spectrum_to_json(const qfsk::DistanceSpectrum& s) {
    nlohmann::json j;
    j["d_max_searched"] = s.d_max_searched;
    j["n_t"] = s.n_t;
    j["n_c"] = s.n_c;
    j["d_min"] = s.d_min();
    return j;
}

struct SnrRef {
    std::string ref = "ebno";  // or "esno"

    double to_esno_linear(double snr_db, double rate_bits) const {
        double lin = qfsk::esno_db_to_linear(snr_db);
        return ref == "esno" ? lin : lin * rate_bits;
    }
};

}  // namespace

int main(int argc, char** argv) {
    const std::string invocation = join_invocation(argc, argv);

    CLI::App app{
        "CRC-aided zero-terminated convolutional codes over GF(4): CRC search, "
        "distance spectra, FER campaigns, and finite-blocklength benchmarks"};
    app.require_subcommand(1);

    // ---- search ----------------------------------------------------------
    auto* search = app.add_subcommand(
        "search", "Distance-spectrum-optimal CRC search (m=0 prints the bare code)");
    int s_nu = 2, s_K = 64, s_m = 0, s_dtilde = 0, s_workers = 1;
    std::string s_g1, s_g2, s_out;
    search->add_option("--nu", s_nu, "Inner code memory")->required();
    search->add_option("--g1", s_g1, "First generator, e.g. 1,1,1")->required();
    search->add_option("--g2", s_g2, "Second generator")->required();
    search->add_option("--K", s_K, "Message length in symbols")->required();
    search->add_option("--m", s_m, "CRC degree (0 = inner code only)")->required();
    search->add_option("--dtilde", s_dtilde, "Spectrum depth (0 = d_free + 12)");
    search->add_option("--out", s_out, "Write the report as JSON");
    search->add_option("--workers", s_workers, "Worker threads")
        ->envname("QFSK_LAB_WORKERS");

    // ---- spectrum --------------------------------------------------------
    auto* spectrum =
        app.add_subcommand("spectrum", "Distance spectrum of one (inner, CRC) pair");
    int p_nu = 2, p_K = 64, p_dtilde = 0;
    std::string p_g1, p_g2, p_g, p_out;
    double p_esno_db = std::nan("");
    std::uint64_t p_p2_samples = 1'000'000, p_seed = 0;
    bool p_seed_set = false;
    spectrum->add_option("--nu", p_nu)->required();
    spectrum->add_option("--g1", p_g1)->required();
    spectrum->add_option("--g2", p_g2)->required();
    spectrum->add_option("--K", p_K)->required();
    spectrum->add_option("--g", p_g, "CRC generator (omit for the bare code)");
    spectrum->add_option("--dtilde", p_dtilde, "Spectrum depth (0 = d_free + 12)");
    spectrum->add_option("--out", p_out, "Write weight,n_t,n_c[,p2] CSV");
    spectrum->add_option("--esno-db", p_esno_db,
                         "Also estimate P2 per weight and the union-bound FER");
    spectrum->add_option("--p2-samples", p_p2_samples, "Monte-Carlo samples per weight");
    spectrum->add_option("--seed", p_seed, "Seed for the P2 estimates")
        ->each([&](const std::string&) { p_seed_set = true; });

    // ---- fer ---------------------------------------------------------------
    auto* fer = app.add_subcommand("fer", "Monte-Carlo FER sweep over an SNR grid");
    std::string f_campaign, f_g1, f_g2, f_g, f_metric = "envelope", f_out, f_manifest;
    std::string f_snr_ref = "ebno";
    int f_nu = 0, f_K = 0, f_workers = 0, f_init_list = 0, f_max_list = 0;
    std::vector<double> f_snr;
    std::uint64_t f_seed = 0, f_min_errors = 0, f_max_frames = 0;
    bool f_seed_set = false;
    fer->add_option("--campaign", f_campaign, "JSON campaign file");
    fer->add_option("--nu", f_nu);
    fer->add_option("--g1", f_g1);
    fer->add_option("--g2", f_g2);
    fer->add_option("--g", f_g, "CRC generator (omit for no CRC)");
    fer->add_option("--K", f_K);
    fer->add_option("--snr", f_snr, "Grid points in dB")->delimiter(',');
    fer->add_option("--snr-ref", f_snr_ref, "Grid reference: ebno or esno")
        ->check(CLI::IsMember({"ebno", "esno"}));
    fer->add_option("--seed", f_seed, "Master seed (required)")
        ->each([&](const std::string&) { f_seed_set = true; });
    fer->add_option("--workers", f_workers, "Worker threads")
        ->envname("QFSK_LAB_WORKERS");
    fer->add_option("--min-errors", f_min_errors, "Stop after this many frame errors");
    fer->add_option("--max-frames", f_max_frames, "Frame cap per grid point");
    fer->add_option("--initial-list", f_init_list, "Starting list size");
    fer->add_option("--max-list", f_max_list, "List size ceiling");
    fer->add_option("--metric", f_metric, "Branch metric")
        ->check(CLI::IsMember({"envelope", "square-law"}));
    fer->add_option("--out", f_out, "CSV output path");
    fer->add_option("--manifest", f_manifest, "Manifest path (default <out>.manifest.json)");

    // ---- rcu / normal ------------------------------------------------------
    auto* rcu = app.add_subcommand("rcu", "Saddlepoint random-coding union bound");
    auto* normal = app.add_subcommand("normal", "Normal-approximation benchmark");
    struct BoundArgs {
        std::string campaign, out, manifest, snr_ref = "ebno";
        int n = 0, K = 0, workers = 0;
        std::vector<double> snr;
        std::uint64_t seed = 0, e0_samples = 0, omega_samples = 0, cap_samples = 0;
        bool seed_set = false;
    };
    BoundArgs ra, na;
    for (auto [sub, args] : {std::pair{rcu, &ra}, std::pair{normal, &na}}) {
        sub->add_option("--campaign", args->campaign, "JSON campaign file");
        sub->add_option("--n", args->n, "Blocklength in channel symbols");
        sub->add_option("--K", args->K, "Message length in symbols (M = 4^K)");
        sub->add_option("--snr", args->snr, "Grid points in dB")
            ->delimiter(',')
            ->required();
        sub->add_option("--snr-ref", args->snr_ref, "Grid reference: ebno or esno")
            ->check(CLI::IsMember({"ebno", "esno"}));
        sub->add_option("--seed", args->seed, "Master seed (required)")
            ->each([args](const std::string&) { args->seed_set = true; });
        sub->add_option("--workers", args->workers, "Worker threads")
            ->envname("QFSK_LAB_WORKERS");
        sub->add_option("--out", args->out, "CSV output path")->required();
        sub->add_option("--manifest", args->manifest,
                        "Manifest path (default <out>.manifest.json)");
    }
    rcu->add_option("--e0-samples", ra.e0_samples, "Samples for the E0 family");
    rcu->add_option("--omega-samples", ra.omega_samples, "Samples for omega''");
    normal->add_option("--samples", na.cap_samples, "Samples for capacity/dispersion");

    // ---- gap ---------------------------------------------------------------
    auto* gap = app.add_subcommand("gap", "Horizontal dB gap between two FER curves");
    std::string g_sim, g_bound, g_out;
    std::string g_sim_snr = "ebno_db", g_sim_fer = "fer", g_bound_snr = "snr_db",
                g_bound_fer = "rcu";
    std::vector<double> g_fers{1e-2, 1e-3, 1e-4};
    gap->add_option("--sim", g_sim, "Sweep CSV")->required();
    gap->add_option("--bound", g_bound, "Bound CSV")->required();
    gap->add_option("--fer", g_fers, "FER levels to query")->delimiter(',');
    gap->add_option("--sim-snr-col", g_sim_snr);
    gap->add_option("--sim-fer-col", g_sim_fer);
    gap->add_option("--bound-snr-col", g_bound_snr);
    gap->add_option("--bound-fer-col", g_bound_fer);
    gap->add_option("--out", g_out, "Write fer,gap_db,ok,warning CSV");

    CLI11_PARSE(app, argc, argv);

    if (search->parsed()) {
        return run_guarded([&]() -> int {
            qfsk::ConvCodeSpec conv{s_nu, qfsk::Gf4Poly::from_string(s_g1),
                                    qfsk::Gf4Poly::from_string(s_g2)};
            conv.validate();
            int L = s_K + s_m;
            int dtilde = s_dtilde > 0 ? s_dtilde : qfsk::find_d_free(conv, L) + 12;
            nlohmann::json rep;
            rep["K"] = s_K;
            rep["nu"] = s_nu;
            rep["g1"] = conv.g1.to_string();
            rep["g2"] = conv.g2.to_string();
            rep["m"] = s_m;
            rep["d_tilde"] = dtilde;
            std::printf("%4s %4s %-20s %6s %8s %12s\n", "nu", "m", "g", "d_min", "N_t",
                        "N_c");
            if (s_m == 0) {
                auto ev = qfsk::enumerate_bounded_weight_codewords(conv, L, dtilde);
                auto spec = qfsk::spectrum_for_crc(ev, std::nullopt, s_K);
                int dmin = spec.d_min();
                if (dmin < 0)
                    throw qfsk::DTildeTooSmall(
                        "search: empty spectrum up to d_tilde; increase dtilde");
                auto di = static_cast<std::size_t>(dmin);
                std::printf("%4d %4d %-20s %6d %8llu %12llu\n", s_nu, 0, "-", dmin,
                            static_cast<unsigned long long>(spec.n_t[di]),
                            static_cast<unsigned long long>(spec.n_c[di]));
                rep["best_g"] = nullptr;
                rep["d_min"] = dmin;
                rep["spectrum"] = spectrum_to_json(spec);
            } else {
                auto report = qfsk::dso_search(conv, s_K, s_m, dtilde, std::max(1, s_workers));
                int dmin = report.spectrum.d_min();
                auto di = static_cast<std::size_t>(dmin);
                std::printf("%4d %4d %-20s %6d %8llu %12llu\n", s_nu, s_m,
                            report.best.g.to_string().c_str(), dmin,
                            static_cast<unsigned long long>(report.spectrum.n_t[di]),
                            static_cast<unsigned long long>(report.spectrum.n_c[di]));
                for (const auto& co : report.co_optimal)
                    std::printf("     co-optimal: %s\n", co.g.to_string().c_str());
                std::printf("candidates searched: %llu\n",
                            static_cast<unsigned long long>(report.candidates_searched));
                rep["best_g"] = report.best.g.to_string();
                rep["d_min"] = dmin;
                rep["spectrum"] = spectrum_to_json(report.spectrum);
                auto co = nlohmann::json::array();
                for (const auto& c : report.co_optimal) co.push_back(c.g.to_string());
                rep["co_optimal"] = co;
                rep["candidates_searched"] = report.candidates_searched;
            }
            if (!s_out.empty()) {
                auto out = qfsk::detail::open_out(s_out);
                out << rep.dump(2) << "\n";
                if (!out) throw std::runtime_error("write failed: " + s_out);
            }
            return 0;
        });
    }

    if (spectrum->parsed()) {
        return run_guarded([&]() -> int {
            qfsk::ConvCodeSpec conv{p_nu, qfsk::Gf4Poly::from_string(p_g1),
                                    qfsk::Gf4Poly::from_string(p_g2)};
            conv.validate();
            std::optional<qfsk::CrcSpec> crc;
            if (!p_g.empty()) crc = qfsk::CrcSpec{qfsk::Gf4Poly::from_string(p_g)};
            int m = crc ? crc->m() : 0;
            int L = p_K + m;
            int dtilde = p_dtilde > 0 ? p_dtilde : qfsk::find_d_free(conv, L) + 12;
            auto ev = qfsk::enumerate_bounded_weight_codewords(conv, L, dtilde);
            auto spec = qfsk::spectrum_for_crc(ev, crc, p_K);
            print_spectrum_rows(spec);

            std::vector<double> p2;
            if (!std::isnan(p_esno_db)) {
                if (!p_seed_set)
                    throw std::invalid_argument(
                        "spectrum: --seed is required with --esno-db");
                qfsk::ChannelParams params;
                params.es_over_n0 = qfsk::esno_db_to_linear(p_esno_db);
                p2.assign(static_cast<std::size_t>(dtilde) + 1, 0.0);
                for (int w = 1; w <= dtilde; ++w)
                    p2[static_cast<std::size_t>(w)] =
                        qfsk::estimate_p2(w, params, p_p2_samples, p_seed);
                double ub = qfsk::union_bound_fer(spec, p2);
                std::printf("union bound FER at Es/N0 = %s dB: %s\n",
                            fmt(p_esno_db).c_str(), fmt(ub, "%.6e").c_str());
            }
            if (!p_out.empty()) {
                auto out = qfsk::detail::open_out(p_out);
                out << "# invocation: " << invocation << "\n";
                out << (p2.empty() ? "weight,n_t,n_c\n" : "weight,n_t,n_c,p2\n");
                for (int w = 1; w <= spec.d_max_searched; ++w) {
                    auto wi = static_cast<std::size_t>(w);
                    out << w << ',' << spec.n_t[wi] << ',' << spec.n_c[wi];
                    if (!p2.empty()) out << ',' << qfsk::fmt_double(p2[wi]);
                    out << "\n";
                }
                if (!out) throw std::runtime_error("write failed: " + p_out);
            }
            return 0;
        });
    }

    if (fer->parsed()) {
        return run_guarded([&]() -> int {
            qfsk::CampaignFile camp;
            if (!f_campaign.empty()) camp = qfsk::load_campaign(f_campaign);

            qfsk::SweepConfig cfg;
            if (f_nu > 0 || !f_g1.empty() || f_K > 0) {
                qfsk::CodeConfig code;
                code.K = f_K;
                code.conv = {f_nu, qfsk::Gf4Poly::from_string(f_g1),
                             qfsk::Gf4Poly::from_string(f_g2)};
                if (!f_g.empty())
                    code.crc = qfsk::CrcSpec{qfsk::Gf4Poly::from_string(f_g)};
                cfg.code = code;
            } else if (camp.code) {
                cfg.code = *camp.code;
            } else {
                throw std::invalid_argument("fer: no code given (flags or campaign)");
            }
            cfg.code.validate();
            if (camp.decoder) cfg.decoder = *camp.decoder;
            if (f_init_list > 0) cfg.decoder.initial_list_size = f_init_list;
            if (f_max_list > 0) cfg.decoder.max_list_size = f_max_list;
            if (fer->count("--metric")) cfg.decoder.metric = qfsk::metric_from_name(f_metric);
            if (camp.stop) cfg.stop = *camp.stop;
            if (f_min_errors > 0) cfg.stop.min_frame_errors = f_min_errors;
            if (f_max_frames > 0) cfg.stop.max_frames = f_max_frames;

            std::vector<double> grid = f_snr;
            if (grid.empty() && camp.ebno_grid_db) grid = *camp.ebno_grid_db;
            if (grid.empty()) throw std::invalid_argument("fer: no SNR grid given");
            if (f_snr_ref == "esno" && !f_snr.empty()) {
                double shift = qfsk::linear_to_db(cfg.code.rate_bits());
                for (double& v : grid) v -= shift;  // store the grid as Eb/N0
            }
            cfg.ebno_grid_db = grid;

            if (f_seed_set)
                cfg.seed = f_seed;
            else if (camp.seed)
                cfg.seed = *camp.seed;
            else
                throw std::invalid_argument(
                    "fer: a seed is required for reproducibility (--seed or campaign)");
            cfg.workers = f_workers > 0 ? f_workers : 1;

            std::string out_path = !f_out.empty()
                                       ? f_out
                                       : (camp.output ? camp.output->csv : std::string{});
            if (out_path.empty()) throw std::invalid_argument("fer: no --out path given");
            std::string manifest_path =
                !f_manifest.empty()
                    ? f_manifest
                    : (camp.output && !camp.output->manifest.empty()
                           ? camp.output->manifest
                           : out_path + ".manifest.json");

            qfsk::SweepResult res = qfsk::run_sweep(cfg);
            for (const auto& p : res.points)
                std::printf(
                    "ebno=%s dB fer=%s (%llu/%llu, undet=%llu exh=%llu) mean_rank=%s "
                    "mean_final=%s wall=%ss\n",
                    fmt(p.ebno_db, "%.3f").c_str(), fmt(p.fer, "%.4e").c_str(),
                    static_cast<unsigned long long>(p.frame_errors),
                    static_cast<unsigned long long>(p.frames),
                    static_cast<unsigned long long>(p.undetected),
                    static_cast<unsigned long long>(p.list_exhausted),
                    fmt(p.mean_list_rank, "%.3f").c_str(),
                    fmt(p.mean_final_list, "%.3f").c_str(),
                    fmt(p.wall_seconds, "%.1f").c_str());

            qfsk::write_fer_csv(out_path, invocation, cfg.seed, res);
            nlohmann::json config;
            config["code"] = qfsk::code_to_json(cfg.code);
            config["decoder"] = {{"initial_list_size", cfg.decoder.initial_list_size},
                                 {"max_list_size", cfg.decoder.max_list_size},
                                 {"metric", qfsk::metric_name(cfg.decoder.metric)}};
            config["sweep"] = {{"ebno_grid_db", cfg.ebno_grid_db},
                               {"min_frame_errors", cfg.stop.min_frame_errors},
                               {"max_frames", cfg.stop.max_frames}};
            nlohmann::json extras;
            extras["outputs"] = {{"csv", out_path}};
            std::vector<double> walls;
            for (const auto& p : res.points) walls.push_back(p.wall_seconds);
            extras["wall_seconds_per_point"] = walls;
            extras["snr_ref"] = f_snr_ref;
            qfsk::write_manifest(manifest_path, invocation, cfg.seed, cfg.workers, config,
                                 extras);
            return 0;
        });
    }

    auto run_bounds = [&](BoundArgs& args, bool is_rcu) -> int {
        qfsk::CampaignFile camp;
        if (!args.campaign.empty()) camp = qfsk::load_campaign(args.campaign);
        qfsk::BoundsSettings bs;
        if (camp.bounds) bs = *camp.bounds;
        if (args.e0_samples > 0) bs.e0_samples = args.e0_samples;
        if (args.omega_samples > 0) bs.omega_samples = args.omega_samples;
        if (args.cap_samples > 0) bs.capacity_samples = args.cap_samples;

        int K = args.K;
        int n = args.n;
        if (camp.code) {
            if (K == 0) K = camp.code->K;
            if (n == 0) n = camp.code->n();
        }
        if (K <= 0 || n <= 0)
            throw std::invalid_argument("--n and --K are required (flags or campaign code)");
        if (!args.seed_set) {
            if (camp.seed)
                args.seed = *camp.seed;
            else
                throw std::invalid_argument(
                    "a seed is required for reproducibility (--seed or campaign)");
        }
        int workers = args.workers > 0 ? args.workers : 1;
        double rate_bits = 2.0 * K / n;
        double rate_nats = rate_bits * M_LN2;
        SnrRef ref{args.snr_ref};

        std::vector<qfsk::BoundRow> rows;
        nlohmann::json flags = nlohmann::json::array();
        for (std::size_t i = 0; i < args.snr.size(); ++i) {
            qfsk::ChannelParams params;
            params.es_over_n0 = ref.to_esno_linear(args.snr[i], rate_bits);
            qfsk::BoundRow row;
            row.snr_db = args.snr[i];
            if (is_rcu) {
                auto batch = qfsk::SampleBatch::draw(params, bs.e0_samples, args.seed,
                                                     2 * i, workers);
                auto obatch = qfsk::SampleBatch::draw(params, bs.omega_samples, args.seed,
                                                      2 * i + 1, workers);
                try {
                    auto rr = qfsk::rcu_saddlepoint(batch, obatch, n, rate_nats);
                    row.rho_hat = rr.rho_hat;
                    row.e0 = rr.e0;
                    row.v = -rr.e0pp;
                    row.rcu = rr.fer;
                    row.std_err = qfsk::e0_and_derivatives(batch, rr.rho_hat).se_e0;
                    const char* regname = rr.region == qfsk::RhoRegion::Below
                                              ? "rate>=E0'(0)"
                                              : (rr.region == qfsk::RhoRegion::Above
                                                     ? "rho_hat=1"
                                                     : "interior");
                    // The bound is exp(-n*(E0 - rho*R)) up to prefactors, so
                    // E0 noise is worth exp(n*se) multiplicatively on the row.
                    double exp_se = static_cast<double>(n) * row.std_err;
                    std::string flag = regname;
                    if (rr.region != qfsk::RhoRegion::Below && exp_se > 1.0) {
                        flag += "; n*se(E0)=" + fmt(exp_se, "%.2g") + " nats";
                        std::fprintf(stderr,
                                     "warning: snr=%s dB: rcu uncertain by a factor "
                                     "exp(%s); raise --e0-samples\n",
                                     fmt(row.snr_db, "%.3f").c_str(),
                                     fmt(exp_se, "%.2g").c_str());
                    }
                    flags.push_back(flag);
                    std::printf("snr=%s dB rho_hat=%s (%s) E0=%s rcu=%s\n",
                                fmt(row.snr_db, "%.3f").c_str(), fmt(row.rho_hat).c_str(),
                                regname, fmt(row.e0).c_str(), fmt(row.rcu, "%.4e").c_str());
                } catch (const std::runtime_error& e) {
                    // A single degenerate point (for instance, importance
                    // weights too skewed deep in the high-SNR tail) should
                    // not cost the rest of the grid; the row stays NaN.
                    flags.push_back(e.what());
                    std::fprintf(stderr, "warning: snr=%s dB skipped: %s\n",
                                 fmt(row.snr_db, "%.3f").c_str(), e.what());
                }
            } else {
                auto batch = qfsk::SampleBatch::draw(params, bs.capacity_samples,
                                                     args.seed, i, workers);
                auto cd = qfsk::capacity_dispersion(batch);
                row.v = cd.v_bits2;
                row.fer_normal = qfsk::normal_approx_fer(cd, n, rate_bits);
                row.std_err = cd.se_c;
                std::printf("snr=%s dB C=%s bits V=%s fer_normal=%s\n",
                            fmt(row.snr_db, "%.3f").c_str(), fmt(cd.c_bits).c_str(),
                            fmt(cd.v_bits2).c_str(), fmt(row.fer_normal, "%.4e").c_str());
            }
            rows.push_back(row);
        }

        std::string manifest_path = !args.manifest.empty()
                                        ? args.manifest
                                        : args.out + ".manifest.json";
        qfsk::write_bound_csv(args.out, invocation, args.seed, rows);
        nlohmann::json config;
        config["n"] = n;
        config["K"] = K;
        config["snr_db"] = args.snr;
        config["snr_ref"] = args.snr_ref;
        config["samples"] = {{"e0", bs.e0_samples},
                             {"omega", bs.omega_samples},
                             {"capacity", bs.capacity_samples}};
        nlohmann::json extras;
        extras["outputs"] = {{"csv", args.out}};
        if (is_rcu) extras["rho_regions"] = flags;
        qfsk::write_manifest(manifest_path, invocation, args.seed, workers, config, extras);
        return 0;
    };

    if (rcu->parsed()) return run_guarded([&] { return run_bounds(ra, true); });
    if (normal->parsed()) return run_guarded([&] { return run_bounds(na, false); });

    if (gap->parsed()) {
        return run_guarded([&]() -> int {
            auto sim = qfsk::read_curve_csv(g_sim, g_sim_snr, g_sim_fer);
            auto bound = qfsk::read_curve_csv(g_bound, g_bound_snr, g_bound_fer);
            auto pts = qfsk::gap_to_bound(sim, bound, g_fers);
            for (const auto& p : pts) {
                if (p.ok)
                    std::printf("fer=%s gap=%s dB%s%s\n", fmt(p.fer, "%.3e").c_str(),
                                fmt(p.gap_db, "%.3f").c_str(),
                                p.warning.empty() ? "" : "  warning: ",
                                p.warning.c_str());
                else
                    std::printf("fer=%s omitted: %s\n", fmt(p.fer, "%.3e").c_str(),
                                p.warning.c_str());
            }
            if (!g_out.empty()) qfsk::write_gap_csv(g_out, invocation, pts);
            return 0;
        });
    }

    return 0;
}
