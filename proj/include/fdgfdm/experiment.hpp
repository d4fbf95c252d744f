// SPDX-License-Identifier: Apache-2.0
//
// fdgfdm: full-duplex GFDM link laboratory
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Scenario files, sweep execution, CSV / plot-data output, filter files and
// calibration against published anchor points.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "fdgfdm/filter_optimizer.hpp"

namespace fdgfdm {

using Json = nlohmann::json;

enum class Receiver { MF, ZF, Optimal, OfdmBaseline };
enum class Engine { Analytic, MonteCarlo };
enum class Metric { SirDb, ResidualSiDb, DesiredPowerDb };

inline std::string to_string(Receiver r) {
    switch (r) {
    case Receiver::MF: return "MF";
    case Receiver::ZF: return "ZF";
    case Receiver::Optimal: return "OPTIMAL";
    case Receiver::OfdmBaseline: return "OFDM_BASELINE";
    }
    return "?";
}

inline std::string to_string(Engine e) { return e == Engine::Analytic ? "ANALYTIC" : "MONTE_CARLO"; }

inline std::string to_string(Metric m) {
    switch (m) {
    case Metric::SirDb: return "sir_db";
    case Metric::ResidualSiDb: return "residual_si_db";
    case Metric::DesiredPowerDb: return "desired_power_db";
    }
    return "?";
}

inline Receiver receiver_from_string(const std::string& s) {
    if (s == "MF") return Receiver::MF;
    if (s == "ZF") return Receiver::ZF;
    if (s == "OPTIMAL") return Receiver::Optimal;
    if (s == "OFDM_BASELINE" || s == "OFDM") return Receiver::OfdmBaseline;
    throw ConfigError("unknown receiver '" + s + "'");
}

inline Engine engine_from_string(const std::string& s) {
    if (s == "ANALYTIC" || s == "analytic") return Engine::Analytic;
    if (s == "MONTE_CARLO" || s == "mc") return Engine::MonteCarlo;
    throw ConfigError("unknown engine '" + s + "'");
}

inline Metric metric_from_string(const std::string& s) {
    if (s == "sir_db") return Metric::SirDb;
    if (s == "residual_si_db") return Metric::ResidualSiDb;
    if (s == "desired_power_db") return Metric::DesiredPowerDb;
    throw ConfigError("unknown metric '" + s + "'");
}

// ---------------------------------------------------------------------------
// Scenario schema

/// Default link description. Every field here is a valid sweep path.
inline Json default_base() {
    return Json::parse(R"({
      "grid": {"K": 32, "M": 5, "cp_len": 4},
      "pulse": {"kind": "rrc", "rolloff": 0.1},
      "impairments": {
        "beta_hz": 10.0,
        "ts_s": 6.510416666666667e-08,
        "epsilon": 0.2,
        "irr_db": -37.5,
        "tx_irr_db": null,
        "rx_irr_db": null,
        "image_phase_rad": 0.0,
        "noise_power": 0.0
      },
      "channels": {
        "si": {"delays": [0, 1, 2, 4], "power_db": [-30.0, -65.0, -70.0, -75.0]},
        "desired": {"delays": [0, 1, 2, 3, 4], "power_db": [-50.0, -75.0, -80.0, -85.0, -90.0]}
      },
      "p_d": 1.0,
      "exclusion": "self_pair",
      "ofdm": {"K": 32, "M": 1, "symbols": 5}
    })");
}

struct Sweep {
    std::string path;
    RVector values;
};

struct Scenario {
    std::string name;
    Json base = default_base();
    std::optional<Sweep> sweep;
    std::vector<Cancellation> modes{Cancellation::CDlc};
    std::vector<Receiver> receivers{Receiver::ZF};
    std::vector<Engine> engines{Engine::Analytic};
    std::vector<Metric> metrics{Metric::SirDb};
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string seg;
    while (std::getline(ss, seg, '.')) {
        if (seg.empty()) throw ConfigError("sweep.path '" + path + "': empty segment");
        parts.push_back(seg);
    }
    if (parts.empty()) throw ConfigError("sweep.path is empty");
    return parts;
}

/// Node at a dotted path; numeric segments index arrays.
inline Json& resolve(Json& root, const std::string& path) {
    Json* node = &root;
    std::string walked = "base";
    for (const auto& seg : split_path(path)) {
        if (node->is_object()) {
            if (!node->contains(seg))
                throw ConfigError("sweep.path '" + path + "': no field '" + seg + "' under '" + walked + "'");
            node = &(*node)[seg];
        } else if (node->is_array()) {
            std::size_t idx = 0;
            try {
                std::size_t used = 0;
                idx = std::stoul(seg, &used);
                if (used != seg.size()) throw std::invalid_argument(seg);
            } catch (const std::exception&) {
                throw ConfigError("sweep.path '" + path + "': '" + seg + "' is not an index into '" + walked + "'");
            }
            if (idx >= node->size())
                throw ConfigError("sweep.path '" + path + "': index " + seg + " out of range in '" + walked + "'");
            node = &(*node)[idx];
        } else {
            throw ConfigError("sweep.path '" + path + "': '" + walked + "' is not a container");
        }
        walked += "." + seg;
    }
    if (!(node->is_number() || node->is_null()))
        throw ConfigError("sweep.path '" + path + "' does not name a numeric field");
    return *node;
}

/// Overlays user onto defaults, rejecting unknown fields and type changes.
inline void overlay(Json& dst, const Json& src, const std::string& where) {
    if (!src.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = src.begin(); it != src.end(); ++it) {
        const std::string at = where + "." + it.key();
        if (!dst.contains(it.key())) throw ConfigError(at + ": unknown field");
        Json& d = dst[it.key()];
        const Json& s = it.value();
        if (d.is_object()) {
            overlay(d, s, at);
        } else if (d.is_array()) {
            if (!s.is_array()) throw ConfigError(at + ": expected an array");
            for (const auto& e : s)
                if (!e.is_number()) throw ConfigError(at + ": array entries must be numbers");
            d = s;
        } else if (d.is_string()) {
            if (!s.is_string()) throw ConfigError(at + ": expected a string");
            d = s;
        } else {
            if (!(s.is_number() || s.is_null())) throw ConfigError(at + ": expected a number");
            // Only IRR fields accept null (ideal mixer).
            if (s.is_null() && it.key().find("irr_db") == std::string::npos)
                throw ConfigError(at + ": may not be null");
            d = s;
        }
    }
}

template <class T, class F>
std::vector<T> enum_list(const Json& j, const char* field, F parse) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(field) + ": expected a non-empty array of strings");
    std::vector<T> out;
    for (const auto& e : j) {
        if (!e.is_string()) throw ConfigError(std::string(field) + ": entries must be strings");
        const T v = parse(e.template get<std::string>());
        if (std::find(out.begin(), out.end(), v) != out.end())
            throw ConfigError(std::string(field) + ": duplicate entry '" + e.template get<std::string>() + "'");
        out.push_back(v);
    }
    return out;
}

inline double number(const Json& j, const std::string& at) {
    if (!j.is_number()) throw ConfigError(at + ": expected a number");
    return j.get<double>();
}

inline std::size_t count(const Json& j, const std::string& at) {
    const double v = number(j, at);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) throw ConfigError(at + ": expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

inline ChannelPdp pdp_from(const Json& j, const std::string& at) {
    const auto& d = j.at("delays");
    const auto& p = j.at("power_db");
    if (d.size() != p.size()) throw ConfigError(at + ": delays and power_db differ in length");
    std::vector<ChannelTap> taps;
    for (std::size_t i = 0; i < d.size(); ++i)
        taps.push_back({count(d[i], at + ".delays"), number(p[i], at + ".power_db")});
    return ChannelPdp(std::move(taps));
}

} // namespace detail

/// Parses and validates scenario JSON, filling defaults.
inline Scenario parse_scenario(const Json& j) {
    if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");
    static const char* known[] = {"name", "base", "sweep", "modes", "receivers", "engines", "metrics", "trials", "seed"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known))
            throw ConfigError(it.key() + ": unknown field");

    Scenario s;
    if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty())
        throw ConfigError("name: required non-empty string");
    s.name = j["name"].get<std::string>();
    if (j.contains("base")) detail::overlay(s.base, j["base"], "base");
    if (j.contains("sweep")) {
        const auto& sw = j["sweep"];
        if (!sw.is_object() || !sw.contains("path") || !sw["path"].is_string())
            throw ConfigError("sweep.path: required string");
        for (auto it = sw.begin(); it != sw.end(); ++it)
            if (it.key() != "path" && it.key() != "values") throw ConfigError("sweep." + it.key() + ": unknown field");
        Sweep sweep;
        sweep.path = sw["path"].get<std::string>();
        if (!sw.contains("values") || !sw["values"].is_array() || sw["values"].empty())
            throw ConfigError("sweep.values: required non-empty array");
        for (const auto& v : sw["values"]) sweep.values.push_back(detail::number(v, "sweep.values"));
        Json probe = s.base;
        detail::resolve(probe, sweep.path);
        s.sweep = std::move(sweep);
    }
    if (j.contains("modes")) s.modes = detail::enum_list<Cancellation>(j["modes"], "modes", cancellation_from_string);
    if (j.contains("receivers"))
        s.receivers = detail::enum_list<Receiver>(j["receivers"], "receivers", receiver_from_string);
    if (j.contains("engines")) s.engines = detail::enum_list<Engine>(j["engines"], "engines", engine_from_string);
    if (j.contains("metrics")) s.metrics = detail::enum_list<Metric>(j["metrics"], "metrics", metric_from_string);
    if (j.contains("trials")) s.trials = detail::count(j["trials"], "trials");
    if (s.trials == 0) throw ConfigError("trials: must be >= 1");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_scenario(j);
}

/// Canonical JSON form: every field present, enums spelled out.
inline Json serialize(const Scenario& s) {
    Json j;
    j["name"] = s.name;
    j["base"] = s.base;
    if (s.sweep) j["sweep"] = {{"path", s.sweep->path}, {"values", s.sweep->values}};
    auto names = [](const auto& v) {
        Json a = Json::array();
        for (const auto& e : v) a.push_back(to_string(e));
        return a;
    };
    j["modes"] = names(s.modes);
    j["receivers"] = names(s.receivers);
    j["engines"] = names(s.engines);
    j["metrics"] = names(s.metrics);
    j["trials"] = s.trials;
    j["seed"] = s.seed;
    return j;
}

// ---------------------------------------------------------------------------
// Link construction

/// Cache of ZF filters keyed by grid and pulse; ZF needs an SVD and inverse.
class ReceiverCache {
  public:
    const ReceiverFilter& zf(const PrototypeFilter& g, const GfdmGrid& grid) {
        std::ostringstream key;
        key << grid.K() << ':' << grid.M() << ':' << static_cast<int>(g.kind) << ':' << g.rolloff;
        auto it = zf_.find(key.str());
        if (it == zf_.end()) it = zf_.emplace(key.str(), zf_receiver(g, grid)).first;
        return it->second;
    }

  private:
    std::map<std::string, ReceiverFilter> zf_;
};

/// Link for the given receiver. OPTIMAL gets an MF placeholder here; the
/// optimizer replaces it.
inline LinkConfig build_link(const Json& base, Receiver rx, ReceiverCache& cache) {
    using detail::count;
    using detail::number;
    const auto& imp = base.at("impairments");
    const std::size_t cp = count(base.at("grid").at("cp_len"), "base.grid.cp_len");

    LinkConfig cfg;
    if (rx == Receiver::OfdmBaseline) {
        const auto& o = base.at("ofdm");
        cfg.grid = GfdmGrid(count(o.at("K"), "base.ofdm.K"), count(o.at("M"), "base.ofdm.M"), cp);
        cfg.g_tx = build_prototype(cfg.grid, PulseKind::Rectangular);
        cfg.f_rx = mf_receiver(cfg.g_tx);
    } else {
        const auto& gr = base.at("grid");
        cfg.grid = GfdmGrid(count(gr.at("K"), "base.grid.K"), count(gr.at("M"), "base.grid.M"), cp);
        const auto kind = base.at("pulse").at("kind").get<std::string>();
        const double rolloff = number(base.at("pulse").at("rolloff"), "base.pulse.rolloff");
        if (kind == "rrc") {
            if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw ConfigError("base.pulse.rolloff: must lie in [0, 1]");
            cfg.g_tx = build_prototype(cfg.grid, PulseKind::Rrc, rolloff);
        } else if (kind == "rectangular") {
            cfg.g_tx = build_prototype(cfg.grid, PulseKind::Rectangular);
        } else {
            throw ConfigError("base.pulse.kind: expected 'rrc' or 'rectangular'");
        }
        cfg.f_rx = rx == Receiver::ZF ? cache.zf(cfg.g_tx, cfg.grid) : mf_receiver(cfg.g_tx);
    }

    auto irr = [&](const char* side) {
        const Json& v = imp.at(side).is_null() ? imp.at("irr_db") : imp.at(side);
        return v.is_null() ? -kInf : number(v, std::string("base.impairments.") + side);
    };
    const double phase = number(imp.at("image_phase_rad"), "base.impairments.image_phase_rad");
    cfg.impairments.beta_hz = number(imp.at("beta_hz"), "base.impairments.beta_hz");
    cfg.impairments.ts_s = number(imp.at("ts_s"), "base.impairments.ts_s");
    cfg.impairments.cfo.epsilon = number(imp.at("epsilon"), "base.impairments.epsilon");
    cfg.impairments.tx = coeffs_from_irr(irr("tx_irr_db"), phase);
    cfg.impairments.rx = coeffs_from_irr(irr("rx_irr_db"), phase);
    cfg.impairments.noise_power = number(imp.at("noise_power"), "base.impairments.noise_power");
    cfg.pdp_rsi = detail::pdp_from(base.at("channels").at("si"), "base.channels.si");
    cfg.pdp_s = detail::pdp_from(base.at("channels").at("desired"), "base.channels.desired");
    cfg.p_d = number(base.at("p_d"), "base.p_d");
    cfg.validate();
    return cfg;
}

inline ExclusionRule exclusion_of(const Json& base) {
    return exclusion_from_string(base.at("exclusion").get<std::string>());
}

inline AnalyticsConfig analytics_of(const LinkConfig& link, const Json& base) {
    auto a = AnalyticsConfig::from_link(link);
    a.exclusion = exclusion_of(base);
    return a;
}

// ---------------------------------------------------------------------------
// Execution

struct ResultRow {
    std::string scenario;
    std::string sweep_param;           ///< empty for a single point
    double sweep_value = 0.0;
    std::string receiver;
    std::string mode;
    std::string engine;
    std::string metric;
    double value_db = 0.0;
    std::optional<double> std_error_db; ///< Monte-Carlo only
    std::size_t trials = 0;
    std::optional<std::uint64_t> seed;
};

namespace detail {

struct PointResult {
    std::optional<SirBreakdown> analytic;
    std::optional<PowerEstimates> mc;
    std::size_t trials = 0;
};

inline double db_error(const Estimate& e) {
    if (!(e.value > 0.0) || !std::isfinite(e.value)) return 0.0;
    return 10.0 / std::log(10.0) * e.std_error / e.value;
}

} // namespace detail

/// Every sweep point x receiver x mode x engine x metric, in declared order.
inline std::vector<ResultRow> run_scenario(const Scenario& s, unsigned threads = 0) {
    if (s.engines.end() != std::find(s.engines.begin(), s.engines.end(), Engine::MonteCarlo) &&
        exclusion_of(s.base) != ExclusionRule::SelfPair)
        throw ConfigError("base.exclusion: the Monte-Carlo engine cancels the self pair only");

    const RVector points = s.sweep ? s.sweep->values : RVector{0.0};
    ReceiverCache cache;
    std::vector<ResultRow> rows;
    for (double x : points) {
        Json base = s.base;
        if (s.sweep) detail::resolve(base, s.sweep->path) = x;
        std::ostringstream tag;
        if (s.sweep) tag << "sweep point " << s.sweep->path << "=" << x << ": ";

        std::vector<detail::PointResult> results(s.receivers.size());
        try {
            for (std::size_t r = 0; r < s.receivers.size(); ++r) {
                const Receiver rx = s.receivers[r];
                LinkConfig link = build_link(base, rx, cache);
                if (rx == Receiver::Optimal) link.f_rx = optimal_receiver(analytics_of(link, base)).f;
                auto& out = results[r];
                for (Engine e : s.engines) {
                    if (e == Engine::Analytic) {
                        out.analytic = ClosedForm(analytics_of(link, base)).breakdown();
                    } else {
                        // OFDM runs its symbols as independent M = 1 frames.
                        out.trials = s.trials;
                        if (rx == Receiver::OfdmBaseline)
                            out.trials *= detail::count(base.at("ofdm").at("symbols"), "base.ofdm.symbols");
                        if (out.trials == 0) throw ConfigError("base.ofdm.symbols: must be >= 1");
                        out.mc = monte_carlo_powers(link, out.trials, s.seed, threads);
                    }
                }
            }
        } catch (const NumericalError& e) {
            throw NumericalError(tag.str() + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError(tag.str() + e.what());
        }

        for (std::size_t r = 0; r < s.receivers.size(); ++r)
            for (Cancellation mode : s.modes)
                for (Engine e : s.engines)
                    for (Metric m : s.metrics) {
                        ResultRow row;
                        row.scenario = s.name;
                        row.sweep_param = s.sweep ? s.sweep->path : "";
                        row.sweep_value = x;
                        row.receiver = to_string(s.receivers[r]);
                        row.mode = to_string(mode);
                        row.engine = to_string(e);
                        row.metric = to_string(m);
                        const auto& res = results[r];
                        if (e == Engine::Analytic) {
                            const auto& b = *res.analytic;
                            const double lin = m == Metric::SirDb          ? b.gamma_aggregate(mode)
                                               : m == Metric::ResidualSiDb ? b.mean_residual_si(mode)
                                                                           : b.mean_desired();
                            row.value_db = to_db(lin);
                        } else {
                            const auto& est = *res.mc;
                            const Estimate v = m == Metric::SirDb          ? est.sir(mode)
                                               : m == Metric::ResidualSiDb ? est.residual_si(mode)
                                                                           : est.desired_power();
                            row.value_db = to_db(v.value);
                            row.std_error_db = detail::db_error(v);
                            row.trials = res.trials;
                            row.seed = s.seed;
                        }
                        rows.push_back(std::move(row));
                    }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Output

inline constexpr const char* kCsvHeader =
    "scenario,sweep_param,sweep_value,receiver,mode,engine,metric,value_db,std_error_db,trials,seed";

/// 6 significant digits; infinities spelled inf / -inf.
inline std::string format_value(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
    if (rows.empty()) throw ConfigError("emit_csv: no rows");
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.scenario << ',' << r.sweep_param << ',' << (r.sweep_param.empty() ? "" : format_value(r.sweep_value))
            << ',' << r.receiver << ',' << r.mode << ',' << r.engine << ',' << r.metric << ','
            << format_value(r.value_db) << ',' << (r.std_error_db ? format_value(*r.std_error_db) : "") << ','
            << r.trials << ',' << (r.seed ? std::to_string(*r.seed) : "") << '\n';
    }
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    write_csv(rows, out);
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

/// One whitespace-separated file per (receiver, mode, engine, metric) series,
/// named <scenario>_<receiver>_<mode>_<engine>_<metric>.dat inside dir.
/// Returns the files written, in first-appearance order.
inline std::vector<std::filesystem::path> emit_plotdata(const std::vector<ResultRow>& rows,
                                                        const std::filesystem::path& dir) {
    if (rows.empty()) throw ConfigError("emit_plotdata: no rows");
    std::filesystem::create_directories(dir);
    std::vector<std::string> order;
    std::map<std::string, std::vector<const ResultRow*>> series;
    for (const auto& r : rows) {
        const auto key = r.scenario + "_" + r.receiver + "_" + r.mode + "_" + r.engine + "_" + r.metric;
        if (!series.count(key)) order.push_back(key);
        series[key].push_back(&r);
    }
    std::vector<std::filesystem::path> files;
    for (const auto& key : order) {
        const auto path = dir / (key + ".dat");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        const auto& first = *series[key].front();
        out << "# " << (first.sweep_param.empty() ? "point" : first.sweep_param) << " " << first.metric
            << " std_error_db\n";
        for (const auto* r : series[key])
            out << format_value(r->sweep_value) << ' ' << format_value(r->value_db) << ' '
                << (r->std_error_db ? format_value(*r->std_error_db) : "0") << '\n';
        files.push_back(path);
    }
    return files;
}

// ---------------------------------------------------------------------------
// Filter files

inline Json filter_to_json(const ReceiverFilter& f) {
    Json taps = Json::array();
    for (const auto& t : f.taps) taps.push_back({t.real(), t.imag()});
    return {{"n", f.taps.size()}, {"taps", taps}, {"origin", to_string(f.origin)}, {"norm", std::sqrt(energy(f.taps))}};
}

inline ReceiverFilter filter_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("taps") || !j.contains("origin"))
        throw ConfigError("filter file: requires n, taps and origin");
    const auto n = detail::count(j["n"], "n");
    const auto& taps = j["taps"];
    if (!taps.is_array() || taps.size() != n) throw ConfigError("filter file: taps length differs from n");
    ReceiverFilter f;
    f.origin = receiver_origin_from_string(j["origin"].get<std::string>());
    for (const auto& t : taps) {
        if (!t.is_array() || t.size() != 2) throw ConfigError("filter file: each tap is [re, im]");
        f.taps.emplace_back(detail::number(t[0], "taps"), detail::number(t[1], "taps"));
    }
    if (j.contains("norm")) {
        const double stated = detail::number(j["norm"], "norm");
        if (std::abs(std::sqrt(energy(f.taps)) - stated) > 1e-6 * std::max(1.0, stated))
            throw ConfigError("filter file: norm does not match taps");
    }
    return f;
}

inline void write_filter(const ReceiverFilter& f, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << filter_to_json(f).dump(1) << '\n';
}

inline ReceiverFilter read_filter(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open filter file '" + path.string() + "'");
    try {
        return filter_from_json(Json::parse(in));
    } catch (const Json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Calibration

/// Published curve: value_db at each sweep value.
struct AnchorSeries {
    std::string receiver;
    std::string mode;
    std::string metric;
    std::vector<std::pair<double, double>> points;
};

struct AnchorFigure {
    std::string id;
    Scenario scenario;
    std::vector<AnchorSeries> series;
};

inline std::vector<AnchorFigure> parse_anchors(const Json& j) {
    if (!j.is_object() || !j.contains("figures") || !j["figures"].is_array())
        throw ConfigError("anchors: expected {\"figures\": [...]}");
    std::vector<AnchorFigure> out;
    for (const auto& f : j["figures"]) {
        AnchorFigure fig;
        fig.id = f.at("id").get<std::string>();
        fig.scenario = parse_scenario(f.at("scenario"));
        for (const auto& s : f.at("series")) {
            AnchorSeries a{to_string(receiver_from_string(s.at("receiver").get<std::string>())),
                           to_string(cancellation_from_string(s.at("mode").get<std::string>())),
                           to_string(metric_from_string(s.at("metric").get<std::string>())),
                           {}};
            for (const auto& p : s.at("points")) a.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            fig.series.push_back(std::move(a));
        }
        out.push_back(std::move(fig));
    }
    return out;
}

inline std::vector<AnchorFigure> load_anchors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("anchor fixture '" + path.string() + "' not found");
    try {
        return parse_anchors(Json::parse(in));
    } catch (const Json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

struct CalibrationPoint {
    std::string figure;
    std::string series; ///< receiver/mode/metric
    double sweep_value = 0.0;
    double reference_db = 0.0;
    double ours_db = 0.0;
};

struct CalibrationReport {
    std::vector<CalibrationPoint> points;
    std::map<std::string, double> figure_offset_db; ///< median(ours - reference) per figure
    double offset_db = 0.0;                         ///< median over all points
    /// Per figure and sweep value: does the ordering of series agree?
    std::map<std::string, std::vector<std::pair<double, bool>>> rank_order;

    bool rank_order_matches(const std::string& figure) const {
        const auto it = rank_order.find(figure);
        if (it == rank_order.end()) return false;
        return std::all_of(it->second.begin(), it->second.end(), [](const auto& p) { return p.second; });
    }
};

namespace detail {

inline double median(RVector v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline bool same_x(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

inline std::vector<std::size_t> ranking(const RVector& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    return idx;
}

} // namespace detail

/// Compares rows of one engine against each figure's anchor series.
inline CalibrationReport calibrate(const std::vector<AnchorFigure>& figures, const std::vector<ResultRow>& rows,
                                   Engine engine = Engine::Analytic) {
    CalibrationReport rep;
    RVector all;
    const auto eng = to_string(engine);
    for (const auto& fig : figures) {
        RVector diffs;
        std::map<double, std::pair<RVector, RVector>> by_x; // x -> (reference, ours) in series order
        for (const auto& s : fig.series)
            for (const auto& [x, ref] : s.points) {
                const auto it = std::find_if(rows.begin(), rows.end(), [&](const ResultRow& r) {
                    return r.scenario == fig.scenario.name && r.engine == eng && r.receiver == s.receiver &&
                           r.mode == s.mode && r.metric == s.metric && detail::same_x(r.sweep_value, x);
                });
                if (it == rows.end())
                    throw ConfigError("calibrate: no " + eng + " row for " + fig.id + " " + s.receiver + "/" +
                                      s.mode + "/" + s.metric + " at " + format_value(x));
                rep.points.push_back({fig.id, s.receiver + "/" + s.mode + "/" + s.metric, x, ref, it->value_db});
                diffs.push_back(it->value_db - ref);
                by_x[x].first.push_back(ref);
                by_x[x].second.push_back(it->value_db);
            }
        rep.figure_offset_db[fig.id] = detail::median(diffs);
        all.insert(all.end(), diffs.begin(), diffs.end());
        auto& ranks = rep.rank_order[fig.id];
        for (const auto& [x, vals] : by_x)
            ranks.emplace_back(x, detail::ranking(vals.first) == detail::ranking(vals.second));
    }
    rep.offset_db = detail::median(all);
    return rep;
}

/// Runs every anchor scenario with one engine and calibrates.
inline CalibrationReport calibrate(const std::vector<AnchorFigure>& figures, Engine engine = Engine::Analytic) {
    std::vector<ResultRow> rows;
    for (const auto& fig : figures) {
        Scenario s = fig.scenario;
        s.engines = {engine};
        const auto r = run_scenario(s);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return calibrate(figures, rows, engine);
}

inline Json report_to_json(const CalibrationReport& rep) {
    Json j;
    j["offset_db"] = rep.offset_db;
    j["figure_offset_db"] = rep.figure_offset_db;
    Json pts = Json::array();
    for (const auto& p : rep.points)
        pts.push_back({{"figure", p.figure},
                       {"series", p.series},
                       {"sweep_value", p.sweep_value},
                       {"reference_db", p.reference_db},
                       {"ours_db", p.ours_db},
                       {"offset_free_error_db", p.ours_db - p.reference_db - rep.figure_offset_db.at(p.figure)}});
    j["points"] = pts;
    Json ranks;
    for (const auto& [fig, v] : rep.rank_order) {
        Json a = Json::array();
        for (const auto& [x, ok] : v) a.push_back({{"sweep_value", x}, {"rank_order_matches", ok}});
        ranks[fig] = a;
    }
    j["rank_order"] = ranks;
    return j;
}

} // namespace fdgfdm
