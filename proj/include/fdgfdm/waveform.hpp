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

// GFDM frame geometry, prototype/receiver pulses, modulation and demodulation.
//
// Sample layout: a frame holds N = M*K samples. Symbol d_{k,m} rides on the
// pulse g circularly shifted by m*K samples and modulated onto subcarrier k:
//
//   x[n] = sum_k sum_m d_{k,m} g[(n - mK) mod N] exp(j 2 pi k n / K)
//
// The demodulator applies the receiver filter f WITHOUT conjugation:
//
//   dhat_{k',m'} = sum_n y[n] f[(n - m'K) mod N] exp(-j 2 pi k' n / K)
//
// so the matched filter is f = conj(g).

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>

#include "fdgfdm/types.hpp"

namespace fdgfdm {

class GfdmGrid {
  public:
    GfdmGrid(std::size_t subcarriers, std::size_t subsymbols, std::size_t cp_len = 0)
        : k_(subcarriers), m_(subsymbols), cp_(cp_len) {
        if (k_ == 0 || m_ == 0) throw ConfigError("GfdmGrid: K and M must be positive");
        if (cp_ > k_ * m_) throw ConfigError("GfdmGrid: cp_len exceeds frame length N");
    }

    std::size_t K() const { return k_; }
    std::size_t M() const { return m_; }
    std::size_t N() const { return k_ * m_; }
    std::size_t cp_len() const { return cp_; }

    /// Flat index of symbol (k, m) in a SymbolFrame.
    std::size_t index(std::size_t k, std::size_t m) const { return k * m_ + m; }

    bool operator==(const GfdmGrid&) const = default;

  private:
    std::size_t k_;
    std::size_t m_;
    std::size_t cp_;
};

enum class PulseKind { Rrc, Rectangular, Custom };
enum class ReceiverOrigin { MF, ZF, Optimal, Custom };

inline std::string to_string(ReceiverOrigin o) {
    switch (o) {
    case ReceiverOrigin::MF: return "MF";
    case ReceiverOrigin::ZF: return "ZF";
    case ReceiverOrigin::Optimal: return "OPTIMAL";
    case ReceiverOrigin::Custom: return "CUSTOM";
    }
    return "CUSTOM";
}

inline ReceiverOrigin receiver_origin_from_string(const std::string& s) {
    if (s == "MF") return ReceiverOrigin::MF;
    if (s == "ZF") return ReceiverOrigin::ZF;
    if (s == "OPTIMAL" || s == "Optimal") return ReceiverOrigin::Optimal;
    if (s == "CUSTOM" || s == "Custom") return ReceiverOrigin::Custom;
    throw ConfigError("unknown receiver origin '" + s + "'");
}

/// Unit-energy transmit pulse of length N.
struct PrototypeFilter {
    CVector taps;
    PulseKind kind = PulseKind::Custom;
    double rolloff = 0.0;

    std::size_t size() const { return taps.size(); }

    /// Wraps arbitrary taps, normalizing them to unit energy.
    static PrototypeFilter custom(CVector taps) {
        const double e = energy(taps);
        if (!(e > 0.0)) throw ConfigError("PrototypeFilter: zero-energy taps");
        const double s = 1.0 / std::sqrt(e);
        for (auto& t : taps) t *= s;
        return {std::move(taps), PulseKind::Custom, 0.0};
    }
};

struct ReceiverFilter {
    CVector taps;
    ReceiverOrigin origin = ReceiverOrigin::Custom;
    /// 2-norm condition number of the modulation matrix (ZF only, else 0).
    double condition_number = 0.0;

    std::size_t size() const { return taps.size(); }
};

/// K x M grid of data symbols; data[k*M + m] = d_{k,m}.
struct SymbolFrame {
    std::size_t K = 0;
    std::size_t M = 0;
    CVector data;
    double symbol_energy = 1.0;

    SymbolFrame() = default;
    SymbolFrame(const GfdmGrid& grid, double p_d = 1.0)
        : K(grid.K()), M(grid.M()), data(grid.N(), Complex{}), symbol_energy(p_d) {}

    Complex& at(std::size_t k, std::size_t m) { return data[k * M + m]; }
    const Complex& at(std::size_t k, std::size_t m) const { return data[k * M + m]; }
};

// ---------------------------------------------------------------------------
// Pulses

/// Root-raised-cosine impulse response at time t (in samples) for symbol
/// period T samples. Peak value 1 - a + 4a/pi at t = 0.
inline double rrc_impulse(double t, double period, double rolloff) {
    const double a = rolloff;
    const double x = t / period;
    if (std::abs(x) < 1e-12) return 1.0 - a + 4.0 * a / kPi;
    if (a > 0.0 && std::abs(std::abs(4.0 * a * x) - 1.0) < 1e-9) {
        return a / std::sqrt(2.0) *
               ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * a)) +
                (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * a)));
    }
    const double num = std::sin(kPi * x * (1.0 - a)) + 4.0 * a * x * std::cos(kPi * x * (1.0 + a));
    const double den = kPi * x * (1.0 - (4.0 * a * x) * (4.0 * a * x));
    return num / den;
}

/// RRC at K samples per subsymbol, one period centered on n = 0 and wrapped
/// modulo N; Rectangular is 1/sqrt(K) on the first K samples.
inline PrototypeFilter build_prototype(const GfdmGrid& grid, PulseKind kind, double rolloff = 0.0) {
    const std::size_t N = grid.N();
    if (N == 0) throw ConfigError("build_prototype: empty grid");
    PrototypeFilter g;
    g.kind = kind;
    g.taps.assign(N, Complex{});
    switch (kind) {
    case PulseKind::Rrc: {
        if (!(rolloff >= 0.0 && rolloff <= 1.0))
            throw ConfigError("build_prototype: rolloff must lie in [0, 1]");
        g.rolloff = rolloff;
        const auto half = static_cast<long long>(N / 2);
        for (std::size_t n = 0; n < N; ++n) {
            const long long t = static_cast<long long>(wrap(static_cast<long long>(n) + half, N)) - half;
            g.taps[n] = rrc_impulse(static_cast<double>(t), static_cast<double>(grid.K()), rolloff);
        }
        const double s = 1.0 / std::sqrt(energy(g.taps));
        for (auto& t : g.taps) t *= s;
        break;
    }
    case PulseKind::Rectangular: {
        const double v = 1.0 / std::sqrt(static_cast<double>(grid.K()));
        for (std::size_t n = 0; n < grid.K(); ++n) g.taps[n] = v;
        break;
    }
    case PulseKind::Custom:
        throw ConfigError("build_prototype: use PrototypeFilter::custom for custom pulses");
    }
    return g;
}

/// output[n] = pulse[(n - mK) mod N]
inline CVector circular_shift(std::span<const Complex> pulse, std::size_t m, const GfdmGrid& grid) {
    if (m >= grid.M()) throw ConfigError("circular_shift: subsymbol index out of range");
    if (pulse.size() != grid.N()) throw ConfigError("circular_shift: pulse length != N");
    const std::size_t N = grid.N();
    CVector out(N);
    for (std::size_t n = 0; n < N; ++n)
        out[n] = pulse[wrap(static_cast<long long>(n) - static_cast<long long>(m * grid.K()), N)];
    return out;
}

// ---------------------------------------------------------------------------
// Mapping matrices

/// Diagonal of S_k: exp(-j 2 pi k n / K).
inline CVector subcarrier_mapping_diagonal(const GfdmGrid& grid, std::size_t k) {
    CVector d(grid.N());
    for (std::size_t n = 0; n < grid.N(); ++n)
        d[n] = cis(-2.0 * kPi * static_cast<double>((k * n) % grid.K()) / static_cast<double>(grid.K()));
    return d;
}

inline CMatrix subcarrier_mapping(const GfdmGrid& grid, std::size_t k) {
    const auto d = subcarrier_mapping_diagonal(grid, k);
    CMatrix s = CMatrix::Zero(grid.N(), grid.N());
    for (std::size_t n = 0; n < grid.N(); ++n) s(n, n) = d[n];
    return s;
}

/// Permutation matrix with (P f)[n] = f[(n - mK) mod N].
inline CMatrix shift_matrix(const GfdmGrid& grid, std::size_t m) {
    const std::size_t N = grid.N();
    CMatrix p = CMatrix::Zero(N, N);
    for (std::size_t n = 0; n < N; ++n)
        p(n, wrap(static_cast<long long>(n) - static_cast<long long>(m * grid.K()), N)) = 1.0;
    return p;
}

// ---------------------------------------------------------------------------
// Modulation

inline void check_frame(const SymbolFrame& frame, const GfdmGrid& grid) {
    if (frame.K != grid.K() || frame.M != grid.M() || frame.data.size() != grid.N())
        throw ConfigError("frame dimensions do not match grid");
}

/// N x N matrix A with x = A * vec(d), column index k*M + m.
inline CMatrix modulation_matrix(const PrototypeFilter& g, const GfdmGrid& grid) {
    if (g.size() != grid.N()) throw ConfigError("modulation_matrix: pulse length != N");
    const std::size_t N = grid.N();
    CMatrix a(N, N);
    for (std::size_t k = 0; k < grid.K(); ++k) {
        for (std::size_t m = 0; m < grid.M(); ++m) {
            const auto gm = circular_shift(g.taps, m, grid);
            for (std::size_t n = 0; n < N; ++n)
                a(n, grid.index(k, m)) =
                    gm[n] * cis(2.0 * kPi * static_cast<double>((k * n) % grid.K()) / static_cast<double>(grid.K()));
        }
    }
    return a;
}

inline CVector modulate(const SymbolFrame& frame, const PrototypeFilter& g, const GfdmGrid& grid) {
    check_frame(frame, grid);
    if (g.size() != grid.N()) throw ConfigError("modulate: pulse length != N");
    const std::size_t K = grid.K(), M = grid.M(), N = grid.N();
    // Subcarrier sum depends on n only through n mod K.
    std::vector<CVector> tone(M, CVector(K));
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t r = 0; r < K; ++r) {
            Complex acc{};
            for (std::size_t k = 0; k < K; ++k)
                acc += frame.at(k, m) * cis(2.0 * kPi * static_cast<double>((k * r) % K) / static_cast<double>(K));
            tone[m][r] = acc;
        }
    CVector x(N, Complex{});
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t n = 0; n < N; ++n)
            x[n] += g.taps[wrap(static_cast<long long>(n) - static_cast<long long>(m * K), N)] * tone[m][n % K];
    return x;
}

inline CVector add_cp(std::span<const Complex> signal, std::size_t cp_len) {
    if (cp_len > signal.size()) throw ConfigError("add_cp: cp_len exceeds signal length");
    CVector out;
    out.reserve(signal.size() + cp_len);
    out.insert(out.end(), signal.end() - static_cast<std::ptrdiff_t>(cp_len), signal.end());
    out.insert(out.end(), signal.begin(), signal.end());
    return out;
}

inline CVector remove_cp(std::span<const Complex> signal, std::size_t cp_len) {
    if (cp_len > signal.size()) throw ConfigError("remove_cp: cp_len exceeds signal length");
    return CVector(signal.begin() + static_cast<std::ptrdiff_t>(cp_len), signal.end());
}

inline Complex demodulate(std::span<const Complex> signal, const ReceiverFilter& f, std::size_t k, std::size_t m,
                          const GfdmGrid& grid) {
    if (signal.size() != grid.N() || f.size() != grid.N())
        throw ConfigError("demodulate: signal/filter length != N");
    if (k >= grid.K() || m >= grid.M()) throw ConfigError("demodulate: symbol index out of range");
    const std::size_t N = grid.N(), K = grid.K();
    Complex acc{};
    for (std::size_t n = 0; n < N; ++n)
        acc += signal[n] * f.taps[wrap(static_cast<long long>(n) - static_cast<long long>(m * K), N)] *
               cis(-2.0 * kPi * static_cast<double>((k * n) % K) / static_cast<double>(K));
    return acc;
}

/// Demodulates every (k', m') at once; result laid out like SymbolFrame::data.
inline CVector demodulate_all(std::span<const Complex> signal, const ReceiverFilter& f, const GfdmGrid& grid) {
    if (signal.size() != grid.N() || f.size() != grid.N())
        throw ConfigError("demodulate_all: signal/filter length != N");
    const std::size_t K = grid.K(), M = grid.M(), N = grid.N();
    CVector out(N);
    CVector folded(K);
    for (std::size_t m = 0; m < M; ++m) {
        std::fill(folded.begin(), folded.end(), Complex{});
        for (std::size_t n = 0; n < N; ++n)
            folded[n % K] += signal[n] * f.taps[wrap(static_cast<long long>(n) - static_cast<long long>(m * K), N)];
        for (std::size_t k = 0; k < K; ++k) {
            Complex acc{};
            for (std::size_t r = 0; r < K; ++r)
                acc += folded[r] * cis(-2.0 * kPi * static_cast<double>((k * r) % K) / static_cast<double>(K));
            out[grid.index(k, m)] = acc;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Receivers

inline ReceiverFilter mf_receiver(const PrototypeFilter& g) {
    ReceiverFilter f;
    f.origin = ReceiverOrigin::MF;
    f.taps.resize(g.size());
    std::transform(g.taps.begin(), g.taps.end(), f.taps.begin(), [](Complex c) { return std::conj(c); });
    return f;
}

/// Row (0,0) of A^{-1}. Its shifted/modulated copies reproduce the whole
/// inverse, which is checked before returning.
inline ReceiverFilter zf_receiver(const PrototypeFilter& g, const GfdmGrid& grid) {
    const CMatrix a = modulation_matrix(g, grid);
    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    const double cond = smin > 0.0 ? smax / smin : kInf;
    if (!(cond < 1e10))
        throw NumericalError("zf_receiver: modulation matrix is singular (condition number " + std::to_string(cond) +
                             ")");
    const CMatrix inv = a.partialPivLu().inverse();

    ReceiverFilter f;
    f.origin = ReceiverOrigin::ZF;
    f.condition_number = cond;
    f.taps.resize(grid.N());
    for (std::size_t n = 0; n < grid.N(); ++n) f.taps[n] = inv(0, static_cast<Eigen::Index>(n));

    double worst = 0.0;
    for (std::size_t k = 0; k < grid.K(); ++k)
        for (std::size_t m = 0; m < grid.M(); ++m)
            for (std::size_t n = 0; n < grid.N(); ++n) {
                const Complex expected =
                    f.taps[wrap(static_cast<long long>(n) - static_cast<long long>(m * grid.K()), grid.N())] *
                    cis(-2.0 * kPi * static_cast<double>((k * n) % grid.K()) / static_cast<double>(grid.K()));
                worst = std::max(worst, std::abs(inv(grid.index(k, m), n) - expected));
            }
    if (worst > 1e-8 * inv.cwiseAbs().maxCoeff())
        throw NumericalError("zf_receiver: inverse is not shift/modulation structured");
    return f;
}

// ---------------------------------------------------------------------------
// Symbols

/// Unit-average-energy 16-QAM scaled by sqrt(p_d).
template <class Urbg>
SymbolFrame random_qam16_frame(const GfdmGrid& grid, double p_d, Urbg& rng) {
    static constexpr double levels[4] = {-3.0, -1.0, 1.0, 3.0};
    const double scale = std::sqrt(p_d / 10.0);
    std::uniform_int_distribution<int> pick(0, 3);
    SymbolFrame frame(grid, p_d);
    for (auto& d : frame.data) {
        const double re = levels[pick(rng)];
        const double im = levels[pick(rng)];
        d = Complex{re, im} * scale;
    }
    return frame;
}

} // namespace fdgfdm
