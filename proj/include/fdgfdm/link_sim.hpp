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

// Monte-Carlo simulation of the full-duplex link.
//
// Each trial draws SI and desired frames, both channels and both oscillator
// trajectories, then pushes every signal component separately through the
// linear receive chain so the demodulated output splits exactly into
// SI / SI-image / desired / desired-image / noise parts.

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <cstdint>
#include <random>
#include <thread>

#include "fdgfdm/impairments.hpp"
#include "fdgfdm/waveform.hpp"

namespace fdgfdm {

enum class Cancellation { AlcOnly, Dlc, CDlc };

inline std::string to_string(Cancellation c) {
    switch (c) {
    case Cancellation::AlcOnly: return "ALC";
    case Cancellation::Dlc: return "DLC";
    case Cancellation::CDlc: return "C_DLC";
    }
    return "C_DLC";
}

inline Cancellation cancellation_from_string(const std::string& s) {
    if (s == "ALC" || s == "ALC_ONLY") return Cancellation::AlcOnly;
    if (s == "DLC") return Cancellation::Dlc;
    if (s == "C_DLC" || s == "C-DLC") return Cancellation::CDlc;
    throw ConfigError("unknown cancellation mode '" + s + "'");
}

struct ImpairmentConfig {
    double beta_hz = 0.0;
    double ts_s = 1.0 / 15.36e6;
    CfoParam cfo{};
    IqMixerCoeffs tx{};
    IqMixerCoeffs rx{};
    /// Thermal noise power (linear); 0 disables noise. Never enters SIR.
    double noise_power = 0.0;
};

struct LinkConfig {
    GfdmGrid grid{1, 1, 0};
    PrototypeFilter g_tx;
    ReceiverFilter f_rx;
    ImpairmentConfig impairments;
    ChannelPdp pdp_rsi;
    ChannelPdp pdp_s;
    double p_d = 1.0;
    Cancellation cancellation = Cancellation::CDlc;

    /// Longest channel span L over both paths.
    std::size_t channel_span() const { return std::max<std::size_t>({pdp_rsi.span(), pdp_s.span(), 1}); }

    void validate() const {
        if (g_tx.size() != grid.N()) throw ConfigError("LinkConfig: prototype length != N");
        if (f_rx.size() != grid.N()) throw ConfigError("LinkConfig: receiver filter length != N");
        if (grid.cp_len() + 1 < channel_span())
            throw ConfigError("LinkConfig: cp_len " + std::to_string(grid.cp_len()) + " shorter than channel span - 1 (" +
                              std::to_string(channel_span() - 1) + ")");
        if (!(p_d > 0.0)) throw ConfigError("LinkConfig: symbol energy must be positive");
        if (!(impairments.beta_hz >= 0.0)) throw ConfigError("LinkConfig: beta must be non-negative");
        if (!(impairments.ts_s > 0.0)) throw ConfigError("LinkConfig: sample interval must be positive");
    }
};

/// Demodulator output at (k', m') split by origin.
struct DecomposedSymbol {
    Complex r_si;     ///< linear residual SI
    Complex r_si_im;  ///< conjugate (image) residual SI
    Complex r_s;      ///< desired path, all desired symbols
    Complex r_s_im;   ///< desired image path
    Complex w_eq;     ///< direct noise branch
    Complex w_eq_im;  ///< image noise branch
    Complex d_ss;     ///< desired symbol's own contribution inside r_s
    std::size_t k = 0;
    std::size_t m = 0;

    Complex total() const { return r_si + r_si_im + r_s + r_s_im + w_eq + w_eq_im; }
};

struct DlcTerms {
    Complex r_dlc;   ///< replica of d_{k',m'} through the linear SI channel
    Complex r_dlc_i; ///< replica of d*_{k',m'} through the image SI channel
};

/// Every per-(n, l) equivalent channel coefficient of one trial, n = 0..N-1.
struct EquivalentTables {
    std::size_t N = 0;
    std::size_t L = 0;
    CVector h1_rsi, h2_rsi, h1_s, h2_s; // index n * L + l

    std::size_t at(std::size_t n, std::size_t l) const { return n * L + l; }
};

inline EquivalentTables build_equivalent_tables(std::size_t N, std::size_t L, const IqMixerCoeffs& tx,
                                                const IqMixerCoeffs& rx, const PhaseNoiseProcess& phi_tx,
                                                const PhaseNoiseProcess& phi_rx, CfoParam cfo,
                                                const ChannelRealization& h_rsi, const ChannelRealization& h_s,
                                                std::size_t K) {
    EquivalentTables t;
    t.N = N;
    t.L = L;
    t.h1_rsi.resize(N * L);
    t.h2_rsi.resize(N * L);
    t.h1_s.resize(N * L);
    t.h2_s.resize(N * L);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t l = 0; l < L; ++l) {
            const auto e =
                equivalent_channels(static_cast<long long>(n), l, tx, rx, phi_tx, phi_rx, cfo, h_rsi, h_s, K);
            const auto i = t.at(n, l);
            t.h1_rsi[i] = e.h1_rsi;
            t.h2_rsi[i] = e.h2_rsi;
            t.h1_s[i] = e.h1_s;
            t.h2_s[i] = e.h2_s;
        }
    return t;
}

/// Everything drawn for one frame plus its decomposed demodulator output.
struct FrameSimulation {
    SymbolFrame d_si;
    SymbolFrame d_s;
    ChannelRealization h_rsi;
    ChannelRealization h_s;
    PhaseNoiseProcess phi_tx;
    PhaseNoiseProcess phi_rx;
    CVector noise;
    EquivalentTables tables;
    std::vector<DecomposedSymbol> symbols; // SymbolFrame layout
};

namespace detail {

inline CVector twiddles(std::size_t K, double sign) {
    CVector w(K);
    for (std::size_t r = 0; r < K; ++r)
        w[r] = cis(sign * 2.0 * kPi * static_cast<double>(r) / static_cast<double>(K));
    return w;
}

/// out[n] = sum_l h[n, l] * src[(n - l) mod N] (conjugating src when asked).
inline CVector time_varying_filter(const CVector& h, std::size_t L, const CVector& src, bool conj_src) {
    const std::size_t N = src.size();
    CVector out(N, Complex{});
    for (std::size_t n = 0; n < N; ++n) {
        Complex acc{};
        for (std::size_t l = 0; l < L; ++l) {
            const Complex v = src[wrap(static_cast<long long>(n) - static_cast<long long>(l), N)];
            acc += h[n * L + l] * (conj_src ? std::conj(v) : v);
        }
        out[n] = acc;
    }
    return out;
}

} // namespace detail

/// DLC replicas with perfect knowledge of the equivalent SI channels.
inline DlcTerms dlc_terms(const SymbolFrame& d_si, const EquivalentTables& t, const PrototypeFilter& g,
                          const ReceiverFilter& f, std::size_t kp, std::size_t mp, const GfdmGrid& grid) {
    const std::size_t N = grid.N(), K = grid.K();
    if (kp >= K || mp >= grid.M()) throw ConfigError("dlc_terms: symbol index out of range");
    const long long shift = static_cast<long long>(mp * K);
    const auto tw = detail::twiddles(K, -1.0);
    Complex lin{}, img{};
    for (std::size_t n = 0; n < N; ++n) {
        const Complex fn = f.taps[wrap(static_cast<long long>(n) - shift, N)];
        for (std::size_t l = 0; l < t.L; ++l) {
            const Complex gv = g.taps[wrap(static_cast<long long>(n) - static_cast<long long>(l) - shift, N)];
            const auto i = t.at(n, l);
            lin += t.h1_rsi[i] * fn * gv * tw[(kp * l) % K];
            const long long ph = static_cast<long long>(kp) * (2 * static_cast<long long>(n) - static_cast<long long>(l));
            img += t.h2_rsi[i] * fn * std::conj(gv) * tw[wrap(ph, K)];
        }
    }
    const Complex d = d_si.at(kp, mp);
    return {d * lin, std::conj(d) * img};
}

/// Overload computing the equivalent channels from the raw realization.
inline DlcTerms dlc_terms(const SymbolFrame& d_si, const ChannelRealization& h_rsi, const PhaseNoiseProcess& phi_tx,
                          const PhaseNoiseProcess& phi_rx, const IqMixerCoeffs& tx, const IqMixerCoeffs& rx,
                          CfoParam cfo, const PrototypeFilter& g, const ReceiverFilter& f, std::size_t kp,
                          std::size_t mp, const GfdmGrid& grid) {
    const std::size_t L = std::max<std::size_t>(h_rsi.size(), 1);
    const auto t = build_equivalent_tables(grid.N(), L, tx, rx, phi_tx, phi_rx, cfo, h_rsi, ChannelRealization{}, grid.K());
    return dlc_terms(d_si, t, g, f, kp, mp, grid);
}

/// Cancelled demodulator output per symbol.
inline CVector apply_cancellation(std::span<const DecomposedSymbol> symbols, std::span<const DlcTerms> terms,
                                  Cancellation mode) {
    if (mode != Cancellation::AlcOnly && terms.size() != symbols.size())
        throw ConfigError("apply_cancellation: terms/symbols size mismatch");
    CVector out(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        Complex v = symbols[i].total();
        if (mode != Cancellation::AlcOnly) v -= terms[i].r_dlc;
        if (mode == Cancellation::CDlc) v -= terms[i].r_dlc_i;
        out[i] = v;
    }
    return out;
}

/// Draws one frame and returns its decomposed demodulator outputs.
template <class Urbg>
FrameSimulation simulate_frame(const LinkConfig& cfg, Urbg& rng) {
    cfg.validate();
    const auto& grid = cfg.grid;
    const std::size_t N = grid.N(), K = grid.K(), M = grid.M();
    const std::size_t L = cfg.channel_span();
    const auto& imp = cfg.impairments;

    FrameSimulation sim;
    sim.d_si = random_qam16_frame(grid, cfg.p_d, rng);
    sim.d_s = random_qam16_frame(grid, cfg.p_d, rng);
    sim.h_rsi = draw_channel(cfg.pdp_rsi, rng);
    sim.h_s = draw_channel(cfg.pdp_s, rng);
    const auto pre = static_cast<long long>(grid.cp_len());
    sim.phi_tx = gen_phase_noise(N + grid.cp_len(), imp.beta_hz, imp.ts_s, rng, -pre);
    sim.phi_rx = gen_phase_noise(N, imp.beta_hz, imp.ts_s, rng, 0);
    sim.noise = complex_noise(N, imp.noise_power, rng);

    const CVector x = modulate(sim.d_si, cfg.g_tx, grid);
    const CVector s = modulate(sim.d_s, cfg.g_tx, grid);
    sim.tables = build_equivalent_tables(N, L, imp.tx, imp.rx, sim.phi_tx, sim.phi_rx, imp.cfo, sim.h_rsi, sim.h_s, K);
    const auto& t = sim.tables;

    const auto si = detail::time_varying_filter(t.h1_rsi, L, x, false);
    const auto si_im = detail::time_varying_filter(t.h2_rsi, L, x, true);
    const auto sd = detail::time_varying_filter(t.h1_s, L, s, false);
    const auto sd_im = detail::time_varying_filter(t.h2_s, L, s, true);
    CVector wd(N), wi(N);
    for (std::size_t n = 0; n < N; ++n) {
        const double ramp = 2.0 * kPi * imp.cfo.epsilon * static_cast<double>(n) / static_cast<double>(K);
        const double phi = sim.phi_rx.at(static_cast<long long>(n));
        wd[n] = imp.rx.direct * cis(ramp - phi) * sim.noise[n];
        wi[n] = imp.rx.image * cis(phi - ramp) * std::conj(sim.noise[n]);
    }

    const auto& f = cfg.f_rx;
    const auto r_si = demodulate_all(si, f, grid);
    const auto r_si_im = demodulate_all(si_im, f, grid);
    const auto r_s = demodulate_all(sd, f, grid);
    const auto r_s_im = demodulate_all(sd_im, f, grid);
    const auto w_eq = demodulate_all(wd, f, grid);
    const auto w_eq_im = demodulate_all(wi, f, grid);

    const auto tw = detail::twiddles(K, -1.0);
    sim.symbols.resize(N);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t m = 0; m < M; ++m) {
            const auto i = grid.index(k, m);
            auto& d = sim.symbols[i];
            d.k = k;
            d.m = m;
            d.r_si = r_si[i];
            d.r_si_im = r_si_im[i];
            d.r_s = r_s[i];
            d.r_s_im = r_s_im[i];
            d.w_eq = w_eq[i];
            d.w_eq_im = w_eq_im[i];
            const long long shift = static_cast<long long>(m * K);
            Complex acc{};
            for (std::size_t n = 0; n < N; ++n) {
                const Complex fn = f.taps[wrap(static_cast<long long>(n) - shift, N)];
                for (std::size_t l = 0; l < L; ++l)
                    acc += t.h1_s[t.at(n, l)] * fn *
                           cfg.g_tx.taps[wrap(static_cast<long long>(n) - static_cast<long long>(l) - shift, N)] *
                           tw[(k * l) % K];
            }
            d.d_ss = sim.d_s.at(k, m) * acc;
        }
    return sim;
}

/// The composite received frame built the physical way: CP insertion, TX
/// mixer, linear convolution with both channels, noise, RX mixer, CP removal.
inline CVector receive_composite(const LinkConfig& cfg, const FrameSimulation& sim) {
    const auto& grid = cfg.grid;
    const auto& imp = cfg.impairments;
    const std::size_t N = grid.N(), cp = grid.cp_len();
    const auto x_cp = add_cp(modulate(sim.d_si, cfg.g_tx, grid), cp);
    const auto s_cp = add_cp(modulate(sim.d_s, cfg.g_tx, grid), cp);
    const auto x_iq = apply_tx_iq(x_cp, imp.tx, sim.phi_tx, -static_cast<long long>(cp));

    CVector y(N + cp, Complex{});
    for (std::size_t i = 0; i < N + cp; ++i) {
        for (std::size_t l = 0; l <= i; ++l) {
            if (l < sim.h_rsi.size()) y[i] += sim.h_rsi.h[l] * x_iq[i - l];
            if (l < sim.h_s.size()) y[i] += sim.h_s.h[l] * s_cp[i - l];
        }
    }
    CVector body = remove_cp(y, cp);
    for (std::size_t n = 0; n < N; ++n) body[n] += sim.noise[n];
    return apply_rx_iq(body, imp.rx, sim.phi_rx, imp.cfo, grid.K());
}

// ---------------------------------------------------------------------------
// Monte-Carlo power estimation

/// Average powers of each demodulator component.
struct ComponentPowers {
    double si_alc = 0, si_dlc = 0, si_im_alc = 0, si_im_dlc = 0;
    double desired = 0, rs = 0, rs_im = 0, interference = 0, noise = 0;

    static constexpr std::size_t kCount = 9;

    std::array<double*, kCount> fields() {
        return {&si_alc, &si_dlc, &si_im_alc, &si_im_dlc, &desired, &rs, &rs_im, &interference, &noise};
    }
    std::array<double, kCount> values() const {
        return {si_alc, si_dlc, si_im_alc, si_im_dlc, desired, rs, rs_im, interference, noise};
    }

    /// Residual SI power after the given cancellation stage.
    double si_total(Cancellation mode) const {
        switch (mode) {
        case Cancellation::AlcOnly: return si_alc + si_im_alc;
        case Cancellation::Dlc: return si_dlc + si_im_alc;
        case Cancellation::CDlc: return si_dlc + si_im_dlc;
        }
        return si_dlc + si_im_dlc;
    }
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct PowerEstimates {
    std::size_t trials = 0;
    std::vector<ComponentPowers> per_symbol;     ///< mean over trials, SymbolFrame layout
    std::vector<ComponentPowers> per_trial_grid; ///< grid mean of each trial

    ComponentPowers mean() const {
        ComponentPowers out;
        auto dst = out.fields();
        for (const auto& t : per_trial_grid) {
            const auto v = t.values();
            for (std::size_t i = 0; i < v.size(); ++i) *dst[i] += v[i];
        }
        for (auto* p : dst) *p /= static_cast<double>(per_trial_grid.size());
        return out;
    }

    ComponentPowers std_error() const {
        const auto mu = mean().values();
        ComponentPowers out;
        auto dst = out.fields();
        const double n = static_cast<double>(per_trial_grid.size());
        if (n < 2) return out;
        for (const auto& t : per_trial_grid) {
            const auto v = t.values();
            for (std::size_t i = 0; i < v.size(); ++i) *dst[i] += (v[i] - mu[i]) * (v[i] - mu[i]);
        }
        for (auto* p : dst) *p = std::sqrt(*p / (n - 1.0) / n);
        return out;
    }

    /// Grid-mean residual SI power per cancellation stage.
    Estimate residual_si(Cancellation mode) const {
        RVector v;
        v.reserve(per_trial_grid.size());
        for (const auto& t : per_trial_grid) v.push_back(t.si_total(mode));
        return mean_and_error(v);
    }

    Estimate desired_power() const {
        RVector v;
        v.reserve(per_trial_grid.size());
        for (const auto& t : per_trial_grid) v.push_back(t.desired);
        return mean_and_error(v);
    }

    /// Ratio-of-sums SIR over the grid; standard error by the delta method.
    Estimate sir(Cancellation mode) const {
        const double n = static_cast<double>(per_trial_grid.size());
        double a = 0, b = 0;
        for (const auto& t : per_trial_grid) {
            a += t.desired;
            b += t.si_total(mode) + t.interference;
        }
        a /= n;
        b /= n;
        if (b <= 0.0) return {kInf, 0.0};
        const double r = a / b;
        double var = 0.0;
        for (const auto& t : per_trial_grid) {
            const double z = t.desired - r * (t.si_total(mode) + t.interference);
            var += z * z;
        }
        const double se = n > 1 ? std::sqrt(var / (n - 1.0) / n) / b : 0.0;
        return {r, se};
    }

  private:
    static Estimate mean_and_error(const RVector& v) {
        const double n = static_cast<double>(v.size());
        double mu = 0.0;
        for (double x : v) mu += x;
        mu /= n;
        double var = 0.0;
        for (double x : v) var += (x - mu) * (x - mu);
        return {mu, n > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0};
    }
};

/// Per-trial RNG stream: independent of thread count and scheduling.
inline std::mt19937_64 trial_rng(std::uint64_t master_seed, std::uint64_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32), 0x6764666du};
    return std::mt19937_64(seq);
}

/// Powers of every component of one simulated frame, SymbolFrame layout.
inline std::vector<ComponentPowers> frame_powers(const LinkConfig& cfg, const FrameSimulation& sim) {
    const auto& grid = cfg.grid;
    std::vector<ComponentPowers> out(grid.N());
    for (std::size_t k = 0; k < grid.K(); ++k)
        for (std::size_t m = 0; m < grid.M(); ++m) {
            const auto i = grid.index(k, m);
            const auto& d = sim.symbols[i];
            const auto dlc = dlc_terms(sim.d_si, sim.tables, cfg.g_tx, cfg.f_rx, k, m, grid);
            auto& p = out[i];
            p.si_alc = std::norm(d.r_si);
            p.si_dlc = std::norm(d.r_si - dlc.r_dlc);
            p.si_im_alc = std::norm(d.r_si_im);
            p.si_im_dlc = std::norm(d.r_si_im - dlc.r_dlc_i);
            p.desired = std::norm(d.d_ss);
            p.rs = std::norm(d.r_s);
            p.rs_im = std::norm(d.r_s_im);
            p.interference = std::norm(d.r_s - d.d_ss) + std::norm(d.r_s_im);
            p.noise = std::norm(d.w_eq) + std::norm(d.w_eq_im);
        }
    return out;
}

/// Averages component powers over independent trials. Trial t always uses
/// trial_rng(seed, t); chunks are reduced in a fixed order, so the result
/// does not depend on the thread count.
inline PowerEstimates monte_carlo_powers(const LinkConfig& cfg, std::size_t trials, std::uint64_t seed,
                                         unsigned threads = 0) {
    if (trials == 0) throw ConfigError("monte_carlo_powers: trials must be >= 1");
    cfg.validate();
    const std::size_t N = cfg.grid.N();
    constexpr std::size_t kChunk = 64;
    const std::size_t chunks = (trials + kChunk - 1) / kChunk;

    PowerEstimates est;
    est.trials = trials;
    est.per_trial_grid.resize(trials);
    std::vector<std::vector<ComponentPowers>> chunk_sums(chunks, std::vector<ComponentPowers>(N));

    auto run_chunk = [&](std::size_t c) {
        auto& sums = chunk_sums[c];
        const std::size_t end = std::min(trials, (c + 1) * kChunk);
        for (std::size_t t = c * kChunk; t < end; ++t) {
            auto rng = trial_rng(seed, t);
            const auto sim = simulate_frame(cfg, rng);
            const auto powers = frame_powers(cfg, sim);
            ComponentPowers grid_mean;
            auto gm = grid_mean.fields();
            for (std::size_t i = 0; i < N; ++i) {
                const auto v = powers[i].values();
                auto dst = sums[i].fields();
                for (std::size_t q = 0; q < v.size(); ++q) {
                    *dst[q] += v[q];
                    *gm[q] += v[q];
                }
            }
            for (auto* p : gm) *p /= static_cast<double>(N);
            est.per_trial_grid[t] = grid_mean;
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
    if (threads <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(threads);
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    est.per_symbol.assign(N, ComponentPowers{});
    for (const auto& sums : chunk_sums)
        for (std::size_t i = 0; i < N; ++i) {
            const auto v = sums[i].values();
            auto dst = est.per_symbol[i].fields();
            for (std::size_t q = 0; q < v.size(); ++q) *dst[q] += v[q];
        }
    for (auto& p : est.per_symbol)
        for (auto* f : p.fields()) *f /= static_cast<double>(trials);
    return est;
}

} // namespace fdgfdm
