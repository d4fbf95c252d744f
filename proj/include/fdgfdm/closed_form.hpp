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

// Closed-form variances of every demodulator component and the SIR.
//
// All variances share the shape
//
//   sigma = sum_{n1,n2} f_{m'}[n1] conj(f_{m'}[n2]) D(n1-n2) W(n1-n2) P[n1,n2]
//
// where D is the phase-noise damping exp(-c |n1-n2| pi beta Ts) (c = 4 for
// the SI path with two independent oscillators, c = 2 for the desired path),
// W carries mixer weights and the CFO rotation exp(+-j 2 pi eps (n1-n2)/K),
// and P sums pulse products over taps and the contributing (k, m) symbols.
//
// Two routes are provided and are kept independent on purpose:
//  * ClosedForm evaluates the scalar sums, using the fact that
//    sum_k exp(j 2 pi k d / K) = K [d = 0 mod K] for the full-grid terms;
//  * QuadraticForms builds U, V^SI and V^R entry by entry with explicit
//    (l, k, m) loops so that sigma = a^H U a with a = S_{k'} M_{m'} f.

#include <algorithm>
#include <cmath>

#include "fdgfdm/link_sim.hpp"

namespace fdgfdm {

/// Which (k, m) terms digital cancellation removes from the SI sums.
enum class ExclusionRule {
    SelfPair,     ///< only (k', m')
    RowAndColumn, ///< every term with k = k' or m = m'
};

inline std::string to_string(ExclusionRule r) {
    return r == ExclusionRule::SelfPair ? "self_pair" : "row_and_column";
}

inline ExclusionRule exclusion_from_string(const std::string& s) {
    if (s == "self_pair") return ExclusionRule::SelfPair;
    if (s == "row_and_column") return ExclusionRule::RowAndColumn;
    throw ConfigError("unknown exclusion rule '" + s + "'");
}

struct AnalyticsConfig {
    GfdmGrid grid{1, 1, 0};
    CVector g;
    CVector f;
    double beta_hz = 0.0;
    double ts_s = 1.0 / 15.36e6;
    double epsilon = 0.0;
    double tx_direct2 = 1.0; ///< |g_{Tx,d}|^2
    double tx_image2 = 0.0;  ///< |g_{Tx,I}|^2
    double rx_direct2 = 1.0; ///< |g_{Rx,d}|^2
    double rx_image2 = 0.0;  ///< |g_{Rx,I}|^2
    RVector pdp_rsi;         ///< linear sigma^2_{RSI,l}
    RVector pdp_s;           ///< linear sigma^2_{s,l}
    double p_d = 1.0;
    ExclusionRule exclusion = ExclusionRule::SelfPair;

    static AnalyticsConfig from_link(const LinkConfig& link) {
        AnalyticsConfig a;
        a.grid = link.grid;
        a.g = link.g_tx.taps;
        a.f = link.f_rx.taps;
        a.beta_hz = link.impairments.beta_hz;
        a.ts_s = link.impairments.ts_s;
        a.epsilon = link.impairments.cfo.epsilon;
        a.tx_direct2 = std::norm(link.impairments.tx.direct);
        a.tx_image2 = std::norm(link.impairments.tx.image);
        a.rx_direct2 = std::norm(link.impairments.rx.direct);
        a.rx_image2 = std::norm(link.impairments.rx.image);
        a.pdp_rsi = link.pdp_rsi.linear_profile();
        a.pdp_s = link.pdp_s.linear_profile();
        a.p_d = link.p_d;
        return a;
    }

    void validate() const {
        if (g.size() != grid.N() || f.size() != grid.N()) throw ConfigError("AnalyticsConfig: pulse length != N");
        const double mags[] = {tx_direct2, tx_image2, rx_direct2, rx_image2, p_d, beta_hz};
        for (double v : mags)
            if (!(v >= 0.0)) throw ConfigError("AnalyticsConfig: powers must be non-negative");
        for (double v : pdp_rsi)
            if (!(v >= 0.0)) throw ConfigError("AnalyticsConfig: negative SI tap power");
        for (double v : pdp_s)
            if (!(v >= 0.0)) throw ConfigError("AnalyticsConfig: negative desired tap power");
        if (!(ts_s > 0.0)) throw ConfigError("AnalyticsConfig: sample interval must be positive");
    }
};

/// Closed-form variances at one (k', m').
struct SymbolVariances {
    double sigma_si_alc = 0, sigma_si_dlc = 0, sigma_si_im_alc = 0, sigma_si_im_dlc = 0;
    double sigma_s = 0, sigma_rs = 0, sigma_rs_im = 0;

    double sigma_si_total() const { return sigma_si_dlc + sigma_si_im_dlc; }
    double sigma_si_total(Cancellation mode) const {
        switch (mode) {
        case Cancellation::AlcOnly: return sigma_si_alc + sigma_si_im_alc;
        case Cancellation::Dlc: return sigma_si_dlc + sigma_si_im_alc;
        case Cancellation::CDlc: return sigma_si_dlc + sigma_si_im_dlc;
        }
        return sigma_si_total();
    }

    /// sigma_rs + sigma_rs_im - sigma_s, with round-off negatives clamped.
    double sigma_interf_total() const {
        const double v = sigma_rs + sigma_rs_im - sigma_s;
        if (v >= 0.0) return v;
        if (v >= -1e-9 * std::max({sigma_s, sigma_rs, 1e-300})) return 0.0;
        throw NumericalError("sigma_interf_total: negative interference power " + std::to_string(v));
    }

    double gamma(Cancellation mode = Cancellation::CDlc) const {
        const double den = sigma_si_total(mode) + sigma_interf_total();
        return den > 0.0 ? sigma_s / den : kInf;
    }
};

struct SirBreakdown {
    GfdmGrid grid{1, 1, 0};
    std::vector<SymbolVariances> per_symbol; // SymbolFrame layout

    const SymbolVariances& at(std::size_t k, std::size_t m) const { return per_symbol[grid.index(k, m)]; }

    /// Ratio of grid sums: sum sigma_s / sum (sigma_si_total + sigma_interf_total).
    double gamma_aggregate(Cancellation mode = Cancellation::CDlc) const {
        double num = 0, den = 0;
        for (const auto& v : per_symbol) {
            num += v.sigma_s;
            den += v.sigma_si_total(mode) + v.sigma_interf_total();
        }
        return den > 0.0 ? num / den : kInf;
    }

    double mean_residual_si(Cancellation mode) const {
        double s = 0;
        for (const auto& v : per_symbol) s += v.sigma_si_total(mode);
        return s / static_cast<double>(per_symbol.size());
    }

    double mean_desired() const {
        double s = 0;
        for (const auto& v : per_symbol) s += v.sigma_s;
        return s / static_cast<double>(per_symbol.size());
    }
};

namespace detail {

/// Lag-indexed kernels for d = n1 - n2 in [-(N-1), N-1], stored at d + N - 1.
struct LagKernels {
    std::size_t N = 0;
    RVector damp_si;  ///< exp(-4 |d| pi beta Ts)
    RVector damp_s;   ///< exp(-2 |d| pi beta Ts)
    CVector rotation; ///< exp(j 2 pi eps d / K)

    LagKernels(std::size_t n, std::size_t K, double beta, double ts, double eps) : N(n) {
        const std::size_t len = 2 * N - 1;
        damp_si.resize(len);
        damp_s.resize(len);
        rotation.resize(len);
        for (std::size_t i = 0; i < len; ++i) {
            const double d = static_cast<double>(static_cast<long long>(i) - static_cast<long long>(N) + 1);
            damp_si[i] = std::exp(-4.0 * std::abs(d) * kPi * beta * ts);
            damp_s[i] = std::exp(-2.0 * std::abs(d) * kPi * beta * ts);
            rotation[i] = cis(2.0 * kPi * eps * d / static_cast<double>(K));
        }
    }

    std::size_t idx(std::size_t n1, std::size_t n2) const { return n1 + N - 1 - n2; }
};

/// P[n1, n2] = sum_l pdp[l] sum_{m in ms} g_m[n1 - l] conj(g_m[n2 - l]).
inline CMatrix pulse_products(const CVector& g, const RVector& pdp, const GfdmGrid& grid,
                              std::span<const std::size_t> ms) {
    const std::size_t N = grid.N();
    CMatrix p = CMatrix::Zero(N, N);
    for (std::size_t l = 0; l < pdp.size(); ++l) {
        if (pdp[l] == 0.0) continue;
        for (std::size_t m : ms) {
            const long long shift = static_cast<long long>(m * grid.K() + l);
            CVector v(N);
            for (std::size_t n = 0; n < N; ++n) v[n] = g[wrap(static_cast<long long>(n) - shift, N)];
            for (std::size_t n2 = 0; n2 < N; ++n2) {
                const Complex c = pdp[l] * std::conj(v[n2]);
                for (std::size_t n1 = 0; n1 < N; ++n1) p(n1, n2) += v[n1] * c;
            }
        }
    }
    return p;
}

} // namespace detail

/// Scalar closed-form evaluator; precomputes lag kernels and pulse tables
/// once per configuration.
class ClosedForm {
  public:
    explicit ClosedForm(AnalyticsConfig cfg)
        : cfg_(std::move(cfg)), lags_(cfg_.grid.N(), cfg_.grid.K(), cfg_.beta_hz, cfg_.ts_s, cfg_.epsilon) {
        cfg_.validate();
        const auto& grid = cfg_.grid;
        std::vector<std::size_t> all(grid.M());
        for (std::size_t m = 0; m < grid.M(); ++m) all[m] = m;
        full_rsi_ = detail::pulse_products(cfg_.g, cfg_.pdp_rsi, grid, all);
        full_s_ = detail::pulse_products(cfg_.g, cfg_.pdp_s, grid, all);
        self_rsi_.reserve(grid.M());
        self_s_.reserve(grid.M());
        for (std::size_t m = 0; m < grid.M(); ++m) {
            const std::size_t one[] = {m};
            self_rsi_.push_back(detail::pulse_products(cfg_.g, cfg_.pdp_rsi, grid, one));
            self_s_.push_back(detail::pulse_products(cfg_.g, cfg_.pdp_s, grid, one));
        }
    }

    const AnalyticsConfig& config() const { return cfg_; }

    /// All variances at (k', m').
    SymbolVariances evaluate(std::size_t kp, std::size_t mp) const {
        const auto& grid = cfg_.grid;
        if (kp >= grid.K() || mp >= grid.M()) throw ConfigError("closed form: symbol index out of range");
        const std::size_t N = grid.N(), K = grid.K();
        const double Kd = static_cast<double>(K);
        const auto& c = cfg_;
        const double w_lin_fwd = c.tx_direct2 * c.rx_direct2, w_lin_bwd = c.tx_image2 * c.rx_image2;
        const double w_im_fwd = c.tx_image2 * c.rx_direct2, w_im_bwd = c.tx_direct2 * c.rx_image2;
        const bool row_col = c.exclusion == ExclusionRule::RowAndColumn;
        const auto tw_neg = detail::twiddles(K, -1.0);

        CVector fm(N);
        for (std::size_t n = 0; n < N; ++n)
            fm[n] = c.f[wrap(static_cast<long long>(n) - static_cast<long long>(mp * K), N)];

        Accum alc, dlc_cut, im_alc, im_dlc_cut, s, rs, rs_im;
        const auto& self_rsi = self_rsi_[mp];
        const auto& self_s = self_s_[mp];
        for (std::size_t n1 = 0; n1 < N; ++n1) {
            for (std::size_t n2 = 0; n2 < N; ++n2) {
                const auto li = lags_.idx(n1, n2);
                const long long d = static_cast<long long>(n1) - static_cast<long long>(n2);
                const bool on_grid = wrap(d, K) == 0;
                const Complex F = fm[n1] * std::conj(fm[n2]);
                const Complex rot = lags_.rotation[li];
                const Complex Fsi = F * lags_.damp_si[li];
                const Complex Fs = F * lags_.damp_s[li];
                const Complex w_lin = w_lin_fwd * rot + w_lin_bwd * std::conj(rot);
                const Complex w_im = w_im_fwd * rot + w_im_bwd * std::conj(rot);
                const Complex self_lin = self_rsi(n1, n2);
                // exp(-j 2 pi 2k' d / K) for the image self term
                const Complex twice = tw_neg[wrap(2 * static_cast<long long>(kp) * d, K)];

                if (on_grid) {
                    alc.add(Fsi * w_lin * Kd * full_rsi_(n1, n2));
                    im_alc.add(Fsi * w_im * Kd * std::conj(full_rsi_(n1, n2)));
                    rs.add(Fs * rot * Kd * full_s_(n1, n2));
                    rs_im.add(Fs * std::conj(rot) * Kd * std::conj(full_s_(n1, n2)));
                }
                // Terms digital cancellation removes.
                Complex cut_lin = self_lin;
                Complex cut_im = std::conj(self_lin) * twice;
                if (row_col) {
                    // row k = k' over all m, column m = m' over all k, self pair counted once
                    const Complex full = full_rsi_(n1, n2);
                    cut_lin = full + (on_grid ? Kd * self_lin : 0.0) - self_lin;
                    cut_im = std::conj(full) * twice + (on_grid ? Kd * std::conj(self_lin) : 0.0) -
                             std::conj(self_lin) * twice;
                }
                dlc_cut.add(Fsi * w_lin * cut_lin);
                im_dlc_cut.add(Fsi * w_im * cut_im);
                s.add(Fs * rot * self_s(n1, n2));
            }
        }
        const double p = c.p_d;
        SymbolVariances v;
        v.sigma_si_alc = p * alc.real("sigma_si_alc");
        v.sigma_si_dlc = v.sigma_si_alc - p * dlc_cut.real("sigma_si_dlc");
        v.sigma_si_im_alc = p * im_alc.real("sigma_si_im_alc");
        v.sigma_si_im_dlc = v.sigma_si_im_alc - p * im_dlc_cut.real("sigma_si_im_dlc");
        v.sigma_s = c.rx_direct2 * p * s.real("sigma_s");
        v.sigma_rs = c.rx_direct2 * p * rs.real("sigma_rs");
        v.sigma_rs_im = c.rx_image2 * p * rs_im.real("sigma_rs_im");
        // Cancellation differences can land a few ulps below zero.
        v.sigma_si_dlc = clamp_small(v.sigma_si_dlc, v.sigma_si_alc);
        v.sigma_si_im_dlc = clamp_small(v.sigma_si_im_dlc, v.sigma_si_im_alc);
        return v;
    }

    double sigma_si_alc(std::size_t k, std::size_t m) const { return evaluate(k, m).sigma_si_alc; }
    double sigma_si_dlc(std::size_t k, std::size_t m) const { return evaluate(k, m).sigma_si_dlc; }
    double sigma_si_im_alc(std::size_t k, std::size_t m) const { return evaluate(k, m).sigma_si_im_alc; }
    double sigma_si_im_dlc(std::size_t k, std::size_t m) const { return evaluate(k, m).sigma_si_im_dlc; }
    double sigma_si_total(std::size_t k, std::size_t m) const { return evaluate(k, m).sigma_si_total(); }
    double sigma_desired(std::size_t k, std::size_t m) const { return evaluate(k, m).sigma_s; }
    double sigma_rs(std::size_t k, std::size_t m) const { return evaluate(k, m).sigma_rs; }
    double sigma_rs_im(std::size_t k, std::size_t m) const { return evaluate(k, m).sigma_rs_im; }
    double sigma_interf_total(std::size_t k, std::size_t m) const { return evaluate(k, m).sigma_interf_total(); }
    double sir(std::size_t k, std::size_t m) const { return evaluate(k, m).gamma(); }

    SirBreakdown breakdown() const {
        SirBreakdown b;
        b.grid = cfg_.grid;
        b.per_symbol.resize(cfg_.grid.N());
        for (std::size_t k = 0; k < cfg_.grid.K(); ++k)
            for (std::size_t m = 0; m < cfg_.grid.M(); ++m) b.per_symbol[cfg_.grid.index(k, m)] = evaluate(k, m);
        return b;
    }

    double sir_aggregate(Cancellation mode = Cancellation::CDlc) const { return breakdown().gamma_aggregate(mode); }

  private:
    struct Accum {
        Complex sum{};
        double magnitude = 0.0;
        void add(Complex v) {
            sum += v;
            magnitude += std::abs(v);
        }
        double real(const char* what) const {
            if (std::abs(sum.imag()) > 1e-9 * std::max(magnitude, 1e-300))
                throw NumericalError(std::string(what) + ": closed form has a non-negligible imaginary part");
            return sum.real();
        }
    };

    static double clamp_small(double v, double scale) {
        if (v >= 0.0) return v;
        if (v >= -1e-9 * std::max(scale, 1e-300)) return 0.0;
        throw NumericalError("closed form: negative post-cancellation power");
    }

    AnalyticsConfig cfg_;
    detail::LagKernels lags_;
    CMatrix full_rsi_;
    CMatrix full_s_;
    std::vector<CMatrix> self_rsi_;
    std::vector<CMatrix> self_s_;
};

/// U, V^SI and V^R for one (k', m'), indexed [n2, n1] so that
/// sigma = a^H X a with a = S_{k'} M_{m'} f.
struct QuadraticFormSet {
    std::size_t k = 0;
    std::size_t m = 0;
    CMatrix U;
    CMatrix V_si;
    CMatrix V_r;
};

/// Matrix-form builder. Full-grid (l, k, m) sums are done by brute force
/// once; per-(k', m') matrices subtract the cancelled terms.
class QuadraticForms {
  public:
    explicit QuadraticForms(AnalyticsConfig cfg)
        : cfg_(std::move(cfg)), lags_(cfg_.grid.N(), cfg_.grid.K(), cfg_.beta_hz, cfg_.ts_s, cfg_.epsilon),
          tw_(detail::twiddles(cfg_.grid.K(), 1.0)) {
        cfg_.validate();
        const std::size_t N = cfg_.grid.N();
        si_full_ = CMatrix::Zero(N, N);
        vr_ = CMatrix::Zero(N, N);
        for (std::size_t k = 0; k < cfg_.grid.K(); ++k)
            for (std::size_t m = 0; m < cfg_.grid.M(); ++m) {
                add_si_term(si_full_, k, m, 1.0);
                add_desired_term(vr_, k, m);
            }
        if (cfg_.exclusion == ExclusionRule::RowAndColumn) {
            row_.assign(cfg_.grid.K(), CMatrix::Zero(N, N));
            col_.assign(cfg_.grid.M(), CMatrix::Zero(N, N));
            for (std::size_t k = 0; k < cfg_.grid.K(); ++k)
                for (std::size_t m = 0; m < cfg_.grid.M(); ++m) {
                    add_si_term(row_[k], k, m, 1.0);
                    add_si_term(col_[m], k, m, 1.0);
                }
        }
    }

    const AnalyticsConfig& config() const { return cfg_; }

    /// Desired-symbol matrix; carries exp(j 2 pi (eps + k')(n1 - n2) / K).
    CMatrix U(std::size_t kp, std::size_t mp) const {
        check(kp, mp);
        const std::size_t N = cfg_.grid.N();
        CMatrix q = CMatrix::Zero(N, N);
        for (std::size_t l = 0; l < cfg_.pdp_s.size(); ++l) {
            if (cfg_.pdp_s[l] == 0.0) continue;
            const auto gv = shifted(mp, l);
            for (std::size_t n1 = 0; n1 < N; ++n1)
                for (std::size_t n2 = 0; n2 < N; ++n2) {
                    const long long d = static_cast<long long>(n1) - static_cast<long long>(n2);
                    const auto li = lags_.idx(n1, n2);
                    q(n1, n2) += cfg_.rx_direct2 * cfg_.p_d * cfg_.pdp_s[l] * lags_.damp_s[li] * gv[n1] *
                                 std::conj(gv[n2]) * lags_.rotation[li] * phase(kp, d);
                }
        }
        return q.transpose();
    }

    /// Residual SI after C-DLC, all four mixer-weight kernels.
    CMatrix V_si(std::size_t kp, std::size_t mp) const {
        check(kp, mp);
        CMatrix q = si_full_;
        if (cfg_.exclusion == ExclusionRule::SelfPair) {
            add_si_term(q, kp, mp, -1.0);
        } else {
            q -= row_[kp];
            q -= col_[mp];
            add_si_term(q, kp, mp, 1.0);
        }
        return q.transpose();
    }

    /// Full desired-path matrix (direct and image kernels).
    CMatrix V_r() const { return vr_.transpose(); }

    QuadraticFormSet at(std::size_t kp, std::size_t mp) const { return {kp, mp, U(kp, mp), V_si(kp, mp), V_r()}; }

    /// Receiver filter shifted/modulated into the (k', m') demodulation vector.
    static CColumn demod_vector(const CVector& f, std::size_t kp, std::size_t mp, const GfdmGrid& grid) {
        const std::size_t N = grid.N();
        CColumn a(N);
        for (std::size_t n = 0; n < N; ++n)
            a(n) = f[wrap(static_cast<long long>(n) - static_cast<long long>(mp * grid.K()), N)] *
                   cis(-2.0 * kPi * static_cast<double>((kp * n) % grid.K()) / static_cast<double>(grid.K()));
        return a;
    }

  private:
    void check(std::size_t kp, std::size_t mp) const {
        if (kp >= cfg_.grid.K() || mp >= cfg_.grid.M()) throw ConfigError("quadratic forms: index out of range");
    }

    /// exp(j 2 pi k d / K)
    Complex phase(std::size_t k, long long d) const {
        return tw_[wrap(static_cast<long long>(k) * d, cfg_.grid.K())];
    }

    CVector shifted(std::size_t m, std::size_t l) const {
        const std::size_t N = cfg_.grid.N();
        CVector v(N);
        const long long s = static_cast<long long>(m * cfg_.grid.K() + l);
        for (std::size_t n = 0; n < N; ++n) v[n] = cfg_.g[wrap(static_cast<long long>(n) - s, N)];
        return v;
    }

    /// q[n1,n2] += scale * (SI contribution of symbol (k, m)), k-only kernels.
    void add_si_term(CMatrix& q, std::size_t k, std::size_t m, double scale) const {
        const std::size_t N = cfg_.grid.N();
        const auto& c = cfg_;
        for (std::size_t l = 0; l < c.pdp_rsi.size(); ++l) {
            if (c.pdp_rsi[l] == 0.0) continue;
            const auto gv = shifted(m, l);
            for (std::size_t n1 = 0; n1 < N; ++n1)
                for (std::size_t n2 = 0; n2 < N; ++n2) {
                    const long long d = static_cast<long long>(n1) - static_cast<long long>(n2);
                    const auto li = lags_.idx(n1, n2);
                    const Complex rot = lags_.rotation[li];
                    const Complex ek = phase(k, d);
                    const Complex pp = gv[n1] * std::conj(gv[n2]);
                    const Complex lin = pp * ek * (c.tx_direct2 * c.rx_direct2 * rot +
                                                   c.tx_image2 * c.rx_image2 * std::conj(rot));
                    const Complex img = std::conj(pp) * std::conj(ek) *
                                        (c.tx_image2 * c.rx_direct2 * rot + c.tx_direct2 * c.rx_image2 * std::conj(rot));
                    q(n1, n2) += scale * c.p_d * c.pdp_rsi[l] * lags_.damp_si[li] * (lin + img);
                }
        }
    }

    void add_desired_term(CMatrix& q, std::size_t k, std::size_t m) const {
        const std::size_t N = cfg_.grid.N();
        const auto& c = cfg_;
        for (std::size_t l = 0; l < c.pdp_s.size(); ++l) {
            if (c.pdp_s[l] == 0.0) continue;
            const auto gv = shifted(m, l);
            for (std::size_t n1 = 0; n1 < N; ++n1)
                for (std::size_t n2 = 0; n2 < N; ++n2) {
                    const long long d = static_cast<long long>(n1) - static_cast<long long>(n2);
                    const auto li = lags_.idx(n1, n2);
                    const Complex kern = lags_.rotation[li] * phase(k, d);
                    const Complex pp = gv[n1] * std::conj(gv[n2]);
                    q(n1, n2) += c.p_d * c.pdp_s[l] * lags_.damp_s[li] *
                                 (c.rx_direct2 * pp * kern + c.rx_image2 * std::conj(pp) * std::conj(kern));
                }
        }
    }

    AnalyticsConfig cfg_;
    detail::LagKernels lags_;
    CVector tw_;
    CMatrix si_full_;
    CMatrix vr_;
    std::vector<CMatrix> row_;
    std::vector<CMatrix> col_;
};

/// a^H X a for a column a.
inline double quadratic_form(const CMatrix& x, const CColumn& a) { return (a.adjoint() * x * a)(0, 0).real(); }

} // namespace fdgfdm
