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

// Command-line front end: analyze, simulate, optimize, sweep, calibrate.
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure.

#include <iostream>

#include <CLI11.hpp>

#include "fdgfdm.hpp"

namespace {

using namespace fdgfdm;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string engine;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, Options& o, bool with_engine) {
    cmd->add_option("--config", o.config, "scenario JSON file")->required();
    cmd->add_option("--out", o.out, "output file (csv, default stdout) or directory (plotdata)");
    cmd->add_option("--seed", o.seed, "Monte-Carlo master seed");
    cmd->add_option("--trials", o.trials, "Monte-Carlo trials per point");
    if (with_engine)
        cmd->add_option("--engine", o.engine, "analytic, mc or both")->check(CLI::IsMember({"analytic", "mc", "both"}));
    cmd->add_option("--format", o.format, "csv or plotdata")->check(CLI::IsMember({"csv", "plotdata"}));
}

Scenario prepared(const Options& o) {
    Scenario s = load_scenario(o.config);
    if (o.seed) s.seed = *o.seed;
    if (o.trials) {
        if (*o.trials == 0) throw ConfigError("--trials must be >= 1");
        s.trials = *o.trials;
    }
    if (o.engine == "analytic") s.engines = {Engine::Analytic};
    if (o.engine == "mc") s.engines = {Engine::MonteCarlo};
    if (o.engine == "both") s.engines = {Engine::Analytic, Engine::MonteCarlo};
    return s;
}

void emit(const std::vector<ResultRow>& rows, const Options& o) {
    if (o.format == "plotdata") {
        if (o.out.empty()) throw ConfigError("--format plotdata needs --out <directory>");
        for (const auto& f : emit_plotdata(rows, o.out)) std::cerr << "wrote " << f.string() << '\n';
    } else if (o.out.empty()) {
        write_csv(rows, std::cout);
    } else {
        emit_csv(rows, o.out);
    }
}

int run_rows(Options o, std::optional<Engine> forced) {
    Scenario s = prepared(o);
    if (forced) s.engines = {*forced};
    emit(run_scenario(s), o);
    return 0;
}

int run_optimize(const Options& o) {
    const Scenario s = prepared(o);
    ReceiverCache cache;
    const LinkConfig link = build_link(s.base, Receiver::Optimal, cache);
    auto problem = assemble_problem(analytics_of(link, s.base));
    const auto opt = solve(problem);
    if (o.out.empty())
        std::cout << filter_to_json(opt.f).dump(1) << '\n';
    else
        write_filter(opt.f, o.out);
    std::cerr << "achieved SIR " << format_value(to_db(opt.achieved_sir)) << " dB, eigen residual "
              << format_value(opt.eigen_residual) << ", loading " << format_value(opt.regularization)
              << ", top multiplicity " << opt.multiplicity << '\n';
    if (s.sweep) std::cerr << "note: sweep ignored; filter designed for the base configuration\n";
    return 0;
}

int run_calibrate(const Options& o) {
    const auto figures = load_anchors(o.config);
    const Engine engine = o.engine == "mc" ? Engine::MonteCarlo : Engine::Analytic;
    std::vector<ResultRow> rows;
    for (const auto& fig : figures) {
        Scenario s = fig.scenario;
        if (o.seed) s.seed = *o.seed;
        if (o.trials) s.trials = *o.trials;
        s.engines = {engine};
        const auto r = run_scenario(s);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    const auto rep = calibrate(figures, rows, engine);
    const auto j = report_to_json(rep);
    if (o.out.empty()) {
        std::cout << j.dump(1) << '\n';
    } else {
        std::ofstream out(o.out);
        if (!out) throw Error("cannot write '" + o.out + "'");
        out << j.dump(1) << '\n';
    }
    std::cerr << "global offset " << format_value(rep.offset_db) << " dB\n";
    for (const auto& [fig, off] : rep.figure_offset_db)
        std::cerr << "  " << fig << ": offset " << format_value(off) << " dB, rank order "
                  << (rep.rank_order_matches(fig) ? "matches" : "differs") << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Full-duplex GFDM link lab"};
    app.require_subcommand(1);
    Options o;
    auto* analyze = app.add_subcommand("analyze", "closed-form metrics for a scenario");
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo metrics for a scenario");
    auto* optimize = app.add_subcommand("optimize", "design and export the SIR-optimal receiver filter");
    auto* sweep = app.add_subcommand("sweep", "run a scenario sweep");
    auto* calib = app.add_subcommand("calibrate", "compare against a published anchor fixture");
    add_common(analyze, o, false);
    add_common(simulate, o, false);
    add_common(optimize, o, false);
    add_common(sweep, o, true);
    add_common(calib, o, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*analyze) return run_rows(o, Engine::Analytic);
        if (*simulate) return run_rows(o, Engine::MonteCarlo);
        if (*optimize) return run_optimize(o);
        if (*sweep) {
            if (!load_scenario(o.config).sweep) throw ConfigError("sweep: scenario has no sweep section");
            return run_rows(o, std::nullopt);
        }
        if (*calib) return run_calibrate(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
