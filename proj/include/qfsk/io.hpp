#pragma once

// Persistence: JSON configs (strictly validated), CSV result files, and the
// run manifest.  Numbers are printed with shortest-round-trip formatting so
// a repeated run with the same seed and worker count writes identical bytes;
// anything volatile (wall time, build id) lives in the manifest only.

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qfsk/channel.hpp"
#include "qfsk/codes.hpp"
#include "qfsk/decoder.hpp"
#include "qfsk/sim.hpp"

namespace qfsk {

inline const char* build_id() {
#ifdef QFSK_BUILD_ID
    return QFSK_BUILD_ID;
#else
    return "unknown";
#endif
}

inline std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string metric_name(BranchMetric m) {
    return m == BranchMetric::Envelope ? "envelope" : "square-law";
}

inline BranchMetric metric_from_name(const std::string& s) {
    if (s == "envelope") return BranchMetric::Envelope;
    if (s == "square-law") return BranchMetric::SquareLaw;
    throw std::invalid_argument("metric must be 'envelope' or 'square-law', got '" + s +
                                "'");
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const char* what,
                                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw std::invalid_argument(std::string(what) + ": not an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument(std::string(what) + ": unknown key '" + it.key() +
                                        "'");
    }
}

}  // namespace detail

inline nlohmann::json code_to_json(const CodeConfig& c) {
    nlohmann::json j;
    j["K"] = c.K;
    j["nu"] = c.conv.nu;
    j["g1"] = c.conv.g1.to_string();
    j["g2"] = c.conv.g2.to_string();
    if (c.crc) {
        j["m"] = c.crc->m();
        j["g"] = c.crc->g.to_string();
    }
    return j;
}

inline CodeConfig code_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(j, "code", {"K", "nu", "g1", "g2", "m", "g"});
    for (const char* k : {"K", "nu", "g1", "g2"})
        if (!j.contains(k))
            throw std::invalid_argument(std::string("code: missing key '") + k + "'");
    CodeConfig c;
    c.K = j.at("K").get<int>();
    c.conv.nu = j.at("nu").get<int>();
    c.conv.g1 = Gf4Poly::from_string(j.at("g1").get<std::string>());
    c.conv.g2 = Gf4Poly::from_string(j.at("g2").get<std::string>());
    if (j.contains("g") != j.contains("m"))
        throw std::invalid_argument("code: keys 'm' and 'g' must appear together");
    if (j.contains("g")) {
        CrcSpec crc{Gf4Poly::from_string(j.at("g").get<std::string>())};
        if (crc.m() != j.at("m").get<int>())
            throw std::invalid_argument("code: 'm' does not match the degree of 'g'");
        c.crc = crc;
    }
    c.validate();
    return c;
}

// The saddlepoint bound exponentiates n * E0, so its output noise is roughly
// exp(n * se(E0)); the e0 default is sized to keep that factor near e^1 for
// n ~ 150 over the SNR range where the bound is informative.
struct BoundsSettings {
    std::size_t e0_samples = 1'000'000;
    std::size_t omega_samples = 500'000;
    std::size_t capacity_samples = 200'000;
};

struct OutputPaths {
    std::string csv;
    std::string manifest;
};

// Config-file form of a run; any CLI flag overrides its campaign field.
struct CampaignFile {
    std::optional<CodeConfig> code;
    std::optional<DecoderConfig> decoder;
    std::optional<std::vector<double>> ebno_grid_db;
    std::optional<StopRule> stop;
    std::optional<BoundsSettings> bounds;
    std::optional<OutputPaths> output;
    std::optional<std::uint64_t> seed;
};

inline CampaignFile campaign_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(j, "campaign",
                                {"code", "decoder", "sweep", "bounds", "output", "seed"});
    CampaignFile c;
    if (j.contains("code")) c.code = code_from_json(j.at("code"));
    if (j.contains("decoder")) {
        const auto& d = j.at("decoder");
        detail::reject_unknown_keys(d, "decoder",
                                    {"initial_list_size", "max_list_size", "metric"});
        DecoderConfig dc;
        if (d.contains("initial_list_size"))
            dc.initial_list_size = d.at("initial_list_size").get<int>();
        if (d.contains("max_list_size")) dc.max_list_size = d.at("max_list_size").get<int>();
        if (d.contains("metric"))
            dc.metric = metric_from_name(d.at("metric").get<std::string>());
        dc.validate();
        c.decoder = dc;
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        detail::reject_unknown_keys(s, "sweep",
                                    {"ebno_grid_db", "min_frame_errors", "max_frames"});
        if (s.contains("ebno_grid_db"))
            c.ebno_grid_db = s.at("ebno_grid_db").get<std::vector<double>>();
        StopRule r;
        if (s.contains("min_frame_errors"))
            r.min_frame_errors = s.at("min_frame_errors").get<std::uint64_t>();
        if (s.contains("max_frames")) r.max_frames = s.at("max_frames").get<std::uint64_t>();
        c.stop = r;
    }
    if (j.contains("bounds")) {
        const auto& b = j.at("bounds");
        detail::reject_unknown_keys(b, "bounds",
                                    {"e0_samples", "omega_samples", "capacity_samples"});
        BoundsSettings bs;
        if (b.contains("e0_samples")) bs.e0_samples = b.at("e0_samples").get<std::size_t>();
        if (b.contains("omega_samples"))
            bs.omega_samples = b.at("omega_samples").get<std::size_t>();
        if (b.contains("capacity_samples"))
            bs.capacity_samples = b.at("capacity_samples").get<std::size_t>();
        c.bounds = bs;
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::reject_unknown_keys(o, "output", {"csv", "manifest"});
        OutputPaths p;
        if (o.contains("csv")) p.csv = o.at("csv").get<std::string>();
        if (o.contains("manifest")) p.manifest = o.at("manifest").get<std::string>();
        c.output = p;
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline CampaignFile load_campaign(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open campaign file: " + path);
    nlohmann::json j;
    in >> j;
    return campaign_from_json(j);
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    return out;
}

}  // namespace detail

// FER sweep CSV: one row per grid point.  Wall time stays out so two runs
// with the same seed and workers differ in nothing.
inline void write_fer_csv(const std::string& path, const std::string& invocation,
                          std::uint64_t seed, const SweepResult& res) {
    auto out = detail::open_out(path);
    out << "# invocation: " << invocation << "\n";
    out << "# seed: " << seed << "\n";
    out << "ebno_db,esno_db,frames,frame_errors,undetected,list_exhausted,fer,ci_lo,"
           "ci_hi,mean_list_rank,mean_final_list,min_undetected_distance\n";
    for (const auto& p : res.points) {
        out << fmt_double(p.ebno_db) << ',' << fmt_double(p.esno_db) << ',' << p.frames
            << ',' << p.frame_errors << ',' << p.undetected << ',' << p.list_exhausted
            << ',' << fmt_double(p.fer) << ',' << fmt_double(p.ci_lo) << ','
            << fmt_double(p.ci_hi) << ',' << fmt_double(p.mean_list_rank) << ','
            << fmt_double(p.mean_final_list) << ',' << p.min_undetected_distance << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Shared row shape for the two bound subcommands; fields that do not apply
// to one method are NaN.
struct BoundRow {
    double snr_db = 0;
    double rho_hat = std::numeric_limits<double>::quiet_NaN();
    double e0 = std::numeric_limits<double>::quiet_NaN();
    double v = std::numeric_limits<double>::quiet_NaN();
    double rcu = std::numeric_limits<double>::quiet_NaN();
    double fer_normal = std::numeric_limits<double>::quiet_NaN();
    double std_err = std::numeric_limits<double>::quiet_NaN();
};

inline void write_bound_csv(const std::string& path, const std::string& invocation,
                            std::uint64_t seed, const std::vector<BoundRow>& rows) {
    auto out = detail::open_out(path);
    out << "# invocation: " << invocation << "\n";
    out << "# seed: " << seed << "\n";
    out << "snr_db,rho_hat,e0,v,rcu,fer_normal,std_err\n";
    for (const auto& r : rows) {
        out << fmt_double(r.snr_db) << ',' << fmt_double(r.rho_hat) << ','
            << fmt_double(r.e0) << ',' << fmt_double(r.v) << ',' << fmt_double(r.rcu)
            << ',' << fmt_double(r.fer_normal) << ',' << fmt_double(r.std_err) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_gap_csv(const std::string& path, const std::string& invocation,
                          const std::vector<GapPoint>& pts) {
    auto out = detail::open_out(path);
    out << "# invocation: " << invocation << "\n";
    out << "fer,gap_db,ok,warning\n";
    for (const auto& g : pts) {
        std::string w = g.warning;
        for (char& ch : w)
            if (ch == ',') ch = ';';
        out << fmt_double(g.fer) << ',' << (g.ok ? fmt_double(g.gap_db) : "nan") << ','
            << (g.ok ? 1 : 0) << ',' << w << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

// (snr_db, fer) pairs from a result CSV; column names pick the curve out of
// either a sweep file or a bounds file.
inline std::vector<std::pair<double, double>> read_curve_csv(const std::string& path,
                                                             const std::string& snr_col,
                                                             const std::string& fer_col) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open curve file: " + path);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t c = line.find(',', pos);
            if (c == std::string::npos) c = line.size();
            header.push_back(line.substr(pos, c - pos));
            pos = c + 1;
        }
        break;
    }
    auto col = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::runtime_error("column '" + name + "' not found in " + path);
    };
    std::size_t si = col(snr_col), fi = col(fer_col);
    std::vector<std::pair<double, double>> curve;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t c = line.find(',', pos);
            if (c == std::string::npos) c = line.size();
            cells.push_back(line.substr(pos, c - pos));
            pos = c + 1;
        }
        if (cells.size() <= std::max(si, fi)) continue;
        curve.emplace_back(std::stod(cells[si]), std::stod(cells[fi]));
    }
    return curve;
}

// Everything needed to regenerate the CSV, plus the volatile details that
// must not live in it.
inline void write_manifest(const std::string& path, const std::string& invocation,
                           std::uint64_t seed, int workers,
                           const nlohmann::json& effective_config,
                           const nlohmann::json& extras) {
    auto out = detail::open_out(path);
    nlohmann::json j;
    j["invocation"] = invocation;
    j["seed"] = seed;
    j["workers"] = workers;
    j["build_id"] = build_id();
    j["config"] = effective_config;
    for (auto it = extras.begin(); it != extras.end(); ++it) j[it.key()] = it.value();
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace qfsk
