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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Randomized checks use fixed seeds.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>

#include "fdgfdm.hpp"

using namespace fdgfdm;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = FDGFDM_SOURCE_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// ---------------------------------------------------------------------------
// Random small configurations

LinkConfig random_link(std::mt19937_64& rng, std::size_t K, std::size_t M, bool allow_mf = true) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    LinkConfig c;
    c.grid = GfdmGrid(K, M, 4);
    c.g_tx = build_prototype(c.grid, PulseKind::Rrc, 0.1 + 0.8 * u(rng));
    c.f_rx = allow_mf && u(rng) < 0.5 ? mf_receiver(c.g_tx) : zf_receiver(c.g_tx, c.grid);
    c.impairments.beta_hz = std::pow(10.0, 1.0 + 4.0 * u(rng));
    c.impairments.cfo.epsilon = 0.5 * u(rng);
    c.impairments.tx = coeffs_from_irr(-30.0 + 30.0 * u(rng), kPi * (2 * u(rng) - 1));
    c.impairments.rx = coeffs_from_irr(-30.0 + 30.0 * u(rng), kPi * (2 * u(rng) - 1));
    auto pdp = [&] {
        const std::size_t L = 1 + static_cast<std::size_t>(3 * u(rng)) % 3;
        std::vector<ChannelTap> taps;
        std::size_t delay = 0;
        for (std::size_t l = 0; l < L; ++l) {
            taps.push_back({delay, -20.0 * u(rng) - 5.0 * static_cast<double>(l)});
            delay += 1;
        }
        return ChannelPdp(std::move(taps));
    };
    c.pdp_rsi = pdp();
    c.pdp_s = pdp();
    c.p_d = 0.5 + u(rng);
    return c;
}

CVector random_unit_filter(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    CVector f(n);
    for (auto& v : f) v = {nd(rng), nd(rng)};
    const double s = std::sqrt(energy(f));
    for (auto& v : f) v /= s;
    return f;
}

// ---------------------------------------------------------------------------
// Criteria

Outcome analytics_vs_simulation() {
    std::mt19937_64 rng(20240601);
    std::size_t total = 0, within = 0;
    double worst = 0.0;
    std::string worst_what;
    for (int cfg_i = 0; cfg_i < 20; ++cfg_i) {
        const auto link = random_link(rng, 8, 3);
        const auto est = monte_carlo_powers(link, 10000, 1000 + static_cast<std::uint64_t>(cfg_i));
        const auto mc = est.mean();
        const auto se = est.std_error();
        const auto b = ClosedForm(AnalyticsConfig::from_link(link)).breakdown();
        ComponentPowers an;
        for (const auto& v : b.per_symbol) {
            an.si_alc += v.sigma_si_alc;
            an.si_dlc += v.sigma_si_dlc;
            an.si_im_alc += v.sigma_si_im_alc;
            an.si_im_dlc += v.sigma_si_im_dlc;
            an.desired += v.sigma_s;
            an.interference += v.sigma_interf_total();
        }
        const double n = static_cast<double>(b.per_symbol.size());
        const std::pair<const char*, double ComponentPowers::*> fields[] = {
            {"si_alc", &ComponentPowers::si_alc},       {"si_dlc", &ComponentPowers::si_dlc},
            {"si_im_alc", &ComponentPowers::si_im_alc}, {"si_im_dlc", &ComponentPowers::si_im_dlc},
            {"desired", &ComponentPowers::desired},     {"interference", &ComponentPowers::interference}};
        for (const auto& [name, f] : fields) {
            const double a = an.*f / n;
            const double z = se.*f > 0 ? std::abs(mc.*f - a) / se.*f : (mc.*f == a ? 0.0 : kInf);
            ++total;
            if (z <= 3.0) ++within;
            if (z > worst) {
                worst = z;
                worst_what = "config " + std::to_string(cfg_i) + " " + name;
            }
        }
    }
    return {within == total, std::to_string(within) + "/" + std::to_string(total) + " within 3 SE at 10^4 trials, " +
                                 fmt("worst %.2f SE", worst) + " (" + worst_what + ")"};
}

Outcome reconstruction_invariants() {
    std::mt19937_64 rng(11);
    double worst_pr = 0, worst_ofdm = 0;
    const std::pair<std::size_t, std::size_t> grids[] = {{8, 3}, {32, 5}, {16, 7}, {4, 5}, {64, 3}};
    for (const auto& [K, M] : grids)
        for (auto kind : {PulseKind::Rrc, PulseKind::Rectangular}) {
            const GfdmGrid grid(K, M, 4);
            const auto g = build_prototype(grid, kind, 0.35);
            const auto f = zf_receiver(g, grid);
            const auto d = random_qam16_frame(grid, 1.0, rng);
            const auto r = demodulate_all(modulate(d, g, grid), f, grid);
            for (std::size_t i = 0; i < r.size(); ++i) worst_pr = std::max(worst_pr, std::abs(r[i] - d.data[i]));
        }
    for (std::size_t K : {8u, 32u, 64u}) {
        const GfdmGrid grid(K, 1, 4);
        const auto g = build_prototype(grid, PulseKind::Rectangular);
        const auto mf = mf_receiver(g);
        const auto zf = zf_receiver(g, grid);
        const auto d = random_qam16_frame(grid, 1.0, rng);
        const auto x = modulate(d, g, grid);
        for (std::size_t n = 0; n < K; ++n) {
            Complex idft{};
            for (std::size_t k = 0; k < K; ++k)
                idft += d.data[k] * cis(2.0 * kPi * static_cast<double>(k * n) / static_cast<double>(K));
            worst_ofdm = std::max(worst_ofdm, std::abs(x[n] - idft / std::sqrt(static_cast<double>(K))));
        }
        const auto r = demodulate_all(x, mf, grid);
        for (std::size_t i = 0; i < K; ++i) {
            worst_ofdm = std::max(worst_ofdm, std::abs(r[i] - d.data[i]));
            worst_ofdm = std::max(worst_ofdm, std::abs(mf.taps[i] - zf.taps[i]));
        }
    }
    const bool ok = worst_pr <= 1e-9 && worst_ofdm <= 1e-9;
    return {ok, fmt("max ZF reconstruction error %.2e over 10 grids; OFDM IDFT/MF=ZF deviation %.2e", worst_pr,
                    worst_ofdm)};
}

Outcome scalar_matrix_equality() {
    std::mt19937_64 rng(12);
    double worst = 0;
    std::size_t checks = 0;
    for (int c = 0; c < 5; ++c) {
        const auto link = random_link(rng, 8, 3);
        for (auto rule : {ExclusionRule::SelfPair, ExclusionRule::RowAndColumn}) {
            auto cfg = AnalyticsConfig::from_link(link);
            cfg.exclusion = rule;
            const QuadraticForms qf(cfg);
            const CMatrix vr = qf.V_r();
            std::vector<CMatrix> u, vsi;
            for (std::size_t k = 0; k < 8; ++k)
                for (std::size_t m = 0; m < 3; ++m) {
                    u.push_back(qf.U(k, m));
                    vsi.push_back(qf.V_si(k, m));
                }
            for (int i = 0; i < 5; ++i) {
                auto fc = cfg;
                fc.f = random_unit_filter(cfg.grid.N(), rng);
                const ClosedForm cf(fc);
                for (std::size_t k = 0; k < 8; ++k)
                    for (std::size_t m = 0; m < 3; ++m) {
                        const auto v = cf.evaluate(k, m);
                        const auto a = QuadraticForms::demod_vector(fc.f, k, m, cfg.grid);
                        const std::size_t idx = cfg.grid.index(k, m);
                        const double pairs[][2] = {
                            {quadratic_form(u[idx], a), v.sigma_s},
                            {quadratic_form(vsi[idx], a), v.sigma_si_total(Cancellation::CDlc)},
                            {quadratic_form(vr, a), v.sigma_rs + v.sigma_rs_im}};
                        for (const auto& p : pairs) {
                            worst = std::max(worst, std::abs(p[0] - p[1]) / std::abs(p[1]));
                            ++checks;
                        }
                    }
            }
        }
    }
    return {worst <= 1e-9, fmt("max relative deviation %.2e", worst) + " over " + std::to_string(checks) +
                               " sigma values (50 random filters)"};
}

Outcome optimizer_dominance() {
    std::mt19937_64 rng(13);
    bool ok = true;
    double worst_residual = 0, worst_norm = 0, min_margin = kInf;
    for (int c = 0; c < 10; ++c) {
        const std::size_t K = c % 2 ? 16 : 8;
        const auto link = random_link(rng, K, 3, false);
        auto problem = assemble_problem(AnalyticsConfig::from_link(link));
        const auto opt = solve(problem);
        const double best = sir_of_filter(opt.f, problem);
        double rival = std::max(sir_of_filter(link.f_rx, problem), sir_of_filter(mf_receiver(link.g_tx).taps, problem));
        for (int i = 0; i < 100; ++i)
            rival = std::max(rival, sir_of_filter(random_unit_filter(link.grid.N(), rng), problem));
        min_margin = std::min(min_margin, to_db(best) - to_db(rival));
        ok = ok && best >= rival;
        worst_residual = std::max(worst_residual, opt.eigen_residual);
        worst_norm = std::max(worst_norm, std::abs(std::sqrt(energy(opt.f.taps)) - 1.0));
    }
    ok = ok && worst_residual < 1e-8 && worst_norm <= 1e-10;
    return {ok, fmt("min margin over best rival %.3f dB, max eigen residual %.2e, max | ||f|| - 1 | %.2e", min_margin,
                    worst_residual, worst_norm)};
}

Outcome phase_noise_law() {
    const double ts = 6.510416666666667e-08;
    double worst = 0;
    for (double beta : {10.0, 1000.0}) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(beta));
        const std::size_t trials = 20000, lags = 50;
        CVector acc(lags + 1, Complex{});
        for (std::size_t t = 0; t < trials; ++t) {
            const auto p = gen_phase_noise(lags + 1, beta, ts, rng);
            for (std::size_t d = 0; d <= lags; ++d) acc[d] += cis(p.at(static_cast<long long>(d)) - p.at(0));
        }
        for (std::size_t d = 0; d <= lags; ++d) {
            const double want = std::exp(-2.0 * kPi * beta * ts * static_cast<double>(d));
            worst = std::max(worst, std::abs(acc[d] / static_cast<double>(trials) - want) / want);
        }
    }
    return {worst <= 0.02, fmt("max relative deviation %.2e over lags 0..50, beta 10 and 1000 Hz", worst)};
}

// Rows of a shipped scenario, optionally restricted to the analytic engine.
std::vector<ResultRow> run_shipped(const std::string& file, bool analytic_only, double* seconds) {
    auto s = load_scenario(kSource / "scenarios" / file);
    if (analytic_only) s.engines = {Engine::Analytic};
    const auto t0 = std::chrono::steady_clock::now();
    auto rows = run_scenario(s);
    *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rows;
}

double value(const std::vector<ResultRow>& rows, double x, const std::string& rx, const std::string& mode,
             const std::string& engine = "ANALYTIC") {
    for (const auto& r : rows)
        if (r.receiver == rx && r.mode == mode && r.engine == engine && std::abs(r.sweep_value - x) < 1e-9)
            return r.value_db;
    throw Error("missing row " + rx + "/" + mode + "/" + engine);
}

Outcome cancellation_ordering(const std::vector<ResultRow>& rows, double seconds) {
    std::size_t points = 0, ordered = 0;
    std::set<double> xs;
    for (const auto& r : rows) xs.insert(r.sweep_value);
    for (double x : xs)
        for (const char* rx : {"ZF", "OFDM_BASELINE"})
            for (const char* eng : {"ANALYTIC", "MONTE_CARLO"}) {
                const double alc = value(rows, x, rx, "ALC", eng), dlc = value(rows, x, rx, "DLC", eng),
                             cdlc = value(rows, x, rx, "C_DLC", eng);
                ++points;
                if (cdlc <= dlc && dlc <= alc) ++ordered;
            }
    return {ordered == points, std::to_string(ordered) + "/" + std::to_string(points) +
                                   " (point, receiver, engine) triples ordered C-DLC <= DLC <= ALC; " +
                                   fmt("%.0f s incl. 10^3-trial Monte-Carlo", seconds)};
}

Outcome irr_gaps(const std::vector<ResultRow>& rows) {
    const double alc = value(rows, 0, "ZF", "ALC"), dlc = value(rows, 0, "ZF", "DLC"),
                 cdlc = value(rows, 0, "ZF", "C_DLC"), ofdm = value(rows, 0, "OFDM_BASELINE", "C_DLC");
    const double g1 = alc - dlc, g2 = dlc - cdlc, g3 = cdlc - ofdm;
    const bool ok = std::abs(g1 - 2.1) <= 0.4 && std::abs(g2 - 0.17) <= 0.15 && std::abs(g3 - 0.9) <= 0.4;
    const double mc1 = value(rows, 0, "ZF", "ALC", "MONTE_CARLO") - value(rows, 0, "ZF", "DLC", "MONTE_CARLO");
    const double mc2 = value(rows, 0, "ZF", "DLC", "MONTE_CARLO") - value(rows, 0, "ZF", "C_DLC", "MONTE_CARLO");
    return {ok, fmt("ALC->DLC %.3f dB, DLC->C-DLC %.3f dB, GFDM-OFDM C-DLC %.3f dB", g1, g2, g3) +
                    fmt(" (Monte-Carlo: %.3f, %.3f dB)", mc1, mc2)};
}

Outcome gap_check(const std::vector<ResultRow>& rows, double x, double want, double tol, const std::string& label) {
    const double gap = value(rows, x, "OPTIMAL", "C_DLC") - value(rows, x, "OFDM_BASELINE", "C_DLC");
    return {std::abs(gap - want) <= tol, label + fmt(" OPTIMAL - OFDM = %.2f dB (target %.0f +- %.0f)", gap, want, tol)};
}

Outcome monotonicity(const std::vector<ResultRow>& beta_rows, const std::vector<ResultRow>& irr_rows,
                     const std::vector<ResultRow>& si_rows) {
    std::vector<std::string> broken;
    // Series in sweep order must move one way only; compared at full precision.
    auto check = [&](const std::vector<ResultRow>& rows, const std::string& rx, const std::string& mode, int sign,
                     const std::string& label) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : rows)
            if (r.receiver == rx && r.mode == mode && r.engine == "ANALYTIC") pts.emplace_back(r.sweep_value, r.value_db);
        std::sort(pts.begin(), pts.end());
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (sign * (pts[i].second - pts[i - 1].second) < 0)
                broken.push_back(label + " " + rx + fmt(" %g->%g", pts[i - 1].first, pts[i].first));
    };
    for (const char* rx : {"ZF", "MF", "OPTIMAL", "OFDM_BASELINE"}) check(beta_rows, rx, "C_DLC", -1, "SIR(beta)");
    for (const char* rx : {"ZF", "MF", "OFDM_BASELINE"}) check(irr_rows, rx, "C_DLC", -1, "SIR(IRR)");
    for (const char* rx : {"ZF", "OFDM_BASELINE"})
        for (const char* mode : {"ALC", "DLC", "C_DLC"}) check(si_rows, rx, mode, +1, std::string("SI(IRR) ") + mode);
    std::string detail = broken.empty() ? "all 13 series monotone" : "violations:";
    for (const auto& b : broken) detail += " [" + b + "]";
    return {broken.empty(), detail};
}

} // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail
                  << fmt(" [%.1f s]", s) << std::endl;
    };

    report(1, "analytics-simulation agreement", analytics_vs_simulation);
    report(2, "reconstruction and OFDM invariants", reconstruction_invariants);
    report(3, "scalar-matrix equality", scalar_matrix_equality);
    report(4, "optimizer dominance", optimizer_dominance);
    report(5, "phase-noise law", phase_noise_law);

    std::vector<ResultRow> si_rows, beta_rows, cfo_rows, irr_rows;
    double si_s = 0, beta_s = 0, cfo_s = 0, irr_s = 0;
    std::string load_error;
    try {
        si_rows = run_shipped("fig2c_irr.json", false, &si_s);
        beta_rows = run_shipped("fig3a_beta.json", true, &beta_s);
        cfo_rows = run_shipped("fig3b_cfo.json", true, &cfo_s);
        irr_rows = run_shipped("fig3c_irr.json", true, &irr_s);
    } catch (const std::exception& e) {
        load_error = e.what();
    }
    auto guarded = [&](std::function<Outcome()> fn) {
        return [fn, &load_error]() -> Outcome {
            if (!load_error.empty()) return {false, "full-scale sweep failed: " + load_error};
            return fn();
        };
    };

    report(6, "cancellation ordering over the IRR sweep", guarded([&] { return cancellation_ordering(si_rows, si_s); }));
    report(7, "cancellation gaps at 0 dB IRR", guarded([&] { return irr_gaps(si_rows); }));
    report(8, "phase-noise sweep gaps", guarded([&] {
               auto a = gap_check(beta_rows, 10, 24, 2, "beta=10 Hz:");
               const double g = value(beta_rows, 1, "OFDM_BASELINE", "C_DLC") - value(beta_rows, 1, "ZF", "C_DLC");
               const bool b = std::abs(g - 5.8) <= 1.0;
               return Outcome{a.pass && b, a.detail + fmt("; beta=1 Hz: OFDM - ZF = %.2f dB (target 5.8 +- 1)", g) +
                                               fmt("; sweep %.1f s analytic", beta_s)};
           }));
    report(9, "CFO sweep gap", guarded([&] { return gap_check(cfo_rows, 0.2, 20, 2, "eps=0.2:"); }));
    report(10, "IRR sweep gap", guarded([&] { return gap_check(irr_rows, -30, 17, 2, "IRR=-30 dB:"); }));
    report(11, "monotonicity", guarded([&] { return monotonicity(beta_rows, irr_rows, si_rows); }));

    try {
        const auto figures = load_anchors(kSource / "data" / "published_anchors.json");
        std::vector<ResultRow> rows;
        for (const auto* r : {&si_rows, &beta_rows, &cfo_rows, &irr_rows}) rows.insert(rows.end(), r->begin(), r->end());
        const auto rep = calibrate(figures, rows);
        std::cout << "INFO calibration offsets (analytic minus published):";
        for (const auto& [fig, off] : rep.figure_offset_db)
            std::cout << " " << fig << fmt(" %+.3f dB", off) << (rep.rank_order_matches(fig) ? "" : " (rank order differs)");
        std::cout << std::endl;
    } catch (const std::exception& e) {
        std::cout << "INFO calibration unavailable: " << e.what() << std::endl;
    }

    std::cout << (failures ? "FAILED " : "ALL PASSED ") << 11 - failures << "/11 criteria" << std::endl;
    return failures ? 1 : 0;
}
