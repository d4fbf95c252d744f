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

// Phase noise, CFO, IQ imbalance and WSSUS multipath models.

#include <cmath>
#include <random>
#include <span>
#include <utility>

#include "fdgfdm/types.hpp"

namespace fdgfdm {

/// Free-running oscillator phase: a discrete Brownian motion.
///
/// Samples are stored for indices first_index .. first_index + size - 1 so
/// that a trajectory can reach back before the frame start (CP samples).
struct PhaseNoiseProcess {
    double beta_hz = 0.0;
    double ts_s = 1.0;
    long long first_index = 0;
    RVector trajectory;

    /// Variance of one increment, 4 pi beta Ts.
    double increment_variance() const { return 4.0 * kPi * beta_hz * ts_s; }

    double at(long long n) const {
        const long long i = n - first_index;
        if (i < 0 || i >= static_cast<long long>(trajectory.size()))
            throw ConfigError("PhaseNoiseProcess: sample index out of range");
        return trajectory[static_cast<std::size_t>(i)];
    }

    std::size_t size() const { return trajectory.size(); }
};

/// phi[first] = 0; phi[n+1] = phi[n] + w_n with w_n ~ N(0, 4 pi beta Ts).
template <class Urbg>
PhaseNoiseProcess gen_phase_noise(std::size_t n, double beta_hz, double ts_s, Urbg& rng, long long first_index = 0) {
    if (n == 0) throw ConfigError("gen_phase_noise: sample count must be >= 1");
    if (!(beta_hz >= 0.0)) throw ConfigError("gen_phase_noise: beta must be non-negative");
    if (!(ts_s > 0.0)) throw ConfigError("gen_phase_noise: sample interval must be positive");
    PhaseNoiseProcess p{beta_hz, ts_s, first_index, RVector(n, 0.0)};
    if (beta_hz == 0.0) return p;
    std::normal_distribution<double> step(0.0, std::sqrt(p.increment_variance()));
    for (std::size_t i = 1; i < n; ++i) p.trajectory[i] = p.trajectory[i - 1] + step(rng);
    return p;
}

/// Constant-zero phase over the given index range.
inline PhaseNoiseProcess zero_phase(std::size_t n, long long first_index = 0) {
    return {0.0, 1.0, first_index, RVector(n, 0.0)};
}

struct IqMixerCoeffs {
    Complex direct{1.0, 0.0};
    Complex image{0.0, 0.0};

    /// Image rejection ratio |g_i|^2 / |g_d|^2 in dB.
    double irr_db() const { return to_db(std::norm(image) / std::norm(direct)); }
};

/// g_d = 1, g_i = 10^{irr_db/20} exp(j image_phase). -inf gives an ideal mixer.
inline IqMixerCoeffs coeffs_from_irr(double irr_db, double image_phase = 0.0) {
    if (irr_db == -kInf) return {};
    return {Complex{1.0, 0.0}, std::pow(10.0, irr_db / 20.0) * cis(image_phase)};
}

/// Normalized CFO: fraction of the subcarrier spacing.
struct CfoParam {
    double epsilon = 0.0;
};

struct ChannelTap {
    std::size_t delay = 0;
    double power_db = 0.0;
};

/// Power delay profile. Delays strictly increase; unlisted delays carry no power.
class ChannelPdp {
  public:
    ChannelPdp() = default;
    explicit ChannelPdp(std::vector<ChannelTap> taps) : taps_(std::move(taps)) {
        for (std::size_t i = 1; i < taps_.size(); ++i)
            if (taps_[i].delay <= taps_[i - 1].delay)
                throw ConfigError("ChannelPdp: delays must be strictly increasing");
    }

    const std::vector<ChannelTap>& taps() const { return taps_; }
    bool empty() const { return taps_.empty(); }

    /// Tap span L = max delay + 1 (0 for an empty profile).
    std::size_t span() const { return taps_.empty() ? 0 : taps_.back().delay + 1; }

    /// Linear per-delay powers sigma^2_l, l = 0 .. L-1.
    RVector linear_profile() const {
        RVector p(span(), 0.0);
        for (const auto& t : taps_) p[t.delay] = from_db(t.power_db);
        return p;
    }

    double total_power() const {
        double s = 0.0;
        for (const auto& t : taps_) s += from_db(t.power_db);
        return s;
    }

  private:
    std::vector<ChannelTap> taps_;
};

struct ChannelRealization {
    CVector h;
    std::size_t size() const { return h.size(); }
};

/// Circularly-symmetric complex Gaussian tap per listed delay.
template <class Urbg>
ChannelRealization draw_channel(const ChannelPdp& pdp, Urbg& rng) {
    ChannelRealization c{CVector(pdp.span(), Complex{})};
    std::normal_distribution<double> unit(0.0, 1.0);
    for (const auto& t : pdp.taps()) {
        const double s = std::sqrt(from_db(t.power_db) / 2.0);
        const double re = unit(rng);
        const double im = unit(rng);
        c.h[t.delay] = Complex{re, im} * s;
    }
    return c;
}

/// Circularly-symmetric complex Gaussian noise of the given total power.
template <class Urbg>
CVector complex_noise(std::size_t n, double power, Urbg& rng) {
    CVector w(n, Complex{});
    if (power <= 0.0) return w;
    std::normal_distribution<double> unit(0.0, std::sqrt(power / 2.0));
    for (auto& v : w) {
        const double re = unit(rng);
        const double im = unit(rng);
        v = {re, im};
    }
    return w;
}

/// out[n] = (g_d x[n] + g_i x*[n]) exp(j phi[n0 + n]) where n0 = phase.first_index
/// unless an explicit start index is given.
inline CVector apply_tx_iq(std::span<const Complex> x, const IqMixerCoeffs& mixer, const PhaseNoiseProcess& phase,
                           long long start_index) {
    CVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long long n = start_index + static_cast<long long>(i);
        out[i] = (mixer.direct * x[i] + mixer.image * std::conj(x[i])) * cis(phase.at(n));
    }
    return out;
}

inline CVector apply_tx_iq(std::span<const Complex> x, const IqMixerCoeffs& mixer, const PhaseNoiseProcess& phase) {
    if (x.size() != phase.size()) throw ConfigError("apply_tx_iq: length mismatch");
    return apply_tx_iq(x, mixer, phase, phase.first_index);
}

/// out[n] = g_d y[n] e^{-j phi[n]} e^{j 2 pi eps n / K} + g_i y*[n] e^{j phi[n]} e^{-j 2 pi eps n / K}.
/// Sample i of y is time index start_index + i.
inline CVector apply_rx_iq(std::span<const Complex> y, const IqMixerCoeffs& mixer, const PhaseNoiseProcess& phase,
                           CfoParam cfo, std::size_t K, long long start_index) {
    CVector out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const long long n = start_index + static_cast<long long>(i);
        const double ramp = 2.0 * kPi * cfo.epsilon * static_cast<double>(n) / static_cast<double>(K);
        const double phi = phase.at(n);
        out[i] = mixer.direct * y[i] * cis(ramp - phi) + mixer.image * std::conj(y[i]) * cis(phi - ramp);
    }
    return out;
}

inline CVector apply_rx_iq(std::span<const Complex> y, const IqMixerCoeffs& mixer, const PhaseNoiseProcess& phase,
                           CfoParam cfo, std::size_t K) {
    if (y.size() != phase.size()) throw ConfigError("apply_rx_iq: length mismatch");
    return apply_rx_iq(y, mixer, phase, cfo, K, phase.first_index);
}

/// Per-(n, l) equivalent channel coefficients seen after the receive mixer.
struct EquivalentChannels {
    Complex h1_rsi; ///< multiplies x[n-l]
    Complex h2_rsi; ///< multiplies x*[n-l]
    Complex h1_s;   ///< multiplies s[n-l]
    Complex h2_s;   ///< multiplies s*[n-l]
};

inline EquivalentChannels equivalent_channels(long long n, std::size_t l, const IqMixerCoeffs& tx,
                                              const IqMixerCoeffs& rx, const PhaseNoiseProcess& phi_tx,
                                              const PhaseNoiseProcess& phi_rx, CfoParam cfo,
                                              const ChannelRealization& h_rsi, const ChannelRealization& h_s,
                                              std::size_t K) {
    const Complex hr = l < h_rsi.size() ? h_rsi.h[l] : Complex{};
    const Complex hs = l < h_s.size() ? h_s.h[l] : Complex{};
    const double ramp = 2.0 * kPi * cfo.epsilon * static_cast<double>(n) / static_cast<double>(K);
    const double psi = phi_tx.at(n - static_cast<long long>(l)) - phi_rx.at(n);
    const Complex fwd = cis(psi + ramp);
    const Complex bwd = cis(-psi - ramp);
    const double prx = phi_rx.at(n);

    EquivalentChannels e;
    e.h1_rsi = tx.direct * rx.direct * hr * fwd + std::conj(tx.image) * rx.image * std::conj(hr) * bwd;
    e.h2_rsi = tx.image * rx.direct * hr * fwd + std::conj(tx.direct) * rx.image * std::conj(hr) * bwd;
    e.h1_s = rx.direct * hs * cis(ramp - prx);
    e.h2_s = rx.image * std::conj(hs) * cis(prx - ramp);
    return e;
}

} // namespace fdgfdm
