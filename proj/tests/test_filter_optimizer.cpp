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

#include <gtest/gtest.h>

#include <random>

#include "fdgfdm/filter_optimizer.hpp"

using namespace fdgfdm;

namespace {

LinkConfig base_link() {
    LinkConfig c;
    c.grid = GfdmGrid(8, 3, 4);
    c.g_tx = build_prototype(c.grid, PulseKind::Rrc, 0.3);
    c.f_rx = zf_receiver(c.g_tx, c.grid);
    c.impairments.beta_hz = 2000;
    c.impairments.cfo.epsilon = 0.2;
    c.impairments.tx = coeffs_from_irr(-25, 0.2);
    c.impairments.rx = coeffs_from_irr(-25, -0.4);
    c.pdp_rsi = ChannelPdp({{0, -30}, {1, -45}, {2, -50}});
    c.pdp_s = ChannelPdp({{0, -50}, {2, -60}});
    return c;
}

OptimizationProblem diagonal_problem() {
    OptimizationProblem p;
    p.grid = GfdmGrid(2, 1, 0);
    p.t1 = CMatrix::Zero(2, 2);
    p.t1(0, 0) = 2.0;
    p.t1(1, 1) = 1.0;
    p.t2 = p.t1 + CMatrix::Identity(2, 2);
    return p;
}

double aggregate_sir(const LinkConfig& link, const CVector& f) {
    auto cfg = AnalyticsConfig::from_link(link);
    cfg.f = f;
    return ClosedForm(cfg).breakdown().gamma_aggregate(Cancellation::CDlc);
}

CVector random_filter(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    CVector f(n);
    for (auto& v : f) v = {nd(rng), nd(rng)};
    return f;
}

} // namespace

TEST(FilterOptimizer, DiagonalPencil) {
    auto p = diagonal_problem();
    const auto r = solve(p);
    EXPECT_NEAR(r.achieved_sir, 2.0, 1e-14);
    EXPECT_NEAR(std::abs(r.f.taps[0]), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(r.f.taps[1]), 0.0, 1e-14);
    EXPECT_EQ(r.multiplicity, 1u);
    EXPECT_EQ(r.regularization, 0.0);
    EXPECT_EQ(r.f.origin, ReceiverOrigin::Optimal);
}

TEST(FilterOptimizer, DegenerateTopEigenvalueFlagged) {
    auto p = diagonal_problem();
    p.t1(1, 1) = 2.0;
    p.t2 = p.t1 + CMatrix::Identity(2, 2);
    EXPECT_EQ(solve(p).multiplicity, 2u);
}

TEST(FilterOptimizer, IndefiniteDenominatorThrows) {
    auto p = diagonal_problem();
    p.t2 = p.t1;
    p.t2(1, 1) = 0.0; // T2 - T1 = diag(0, -1)
    EXPECT_THROW(solve(p), NumericalError);
}

TEST(FilterOptimizer, SingleSymbolGridReducesToU) {
    LinkConfig c;
    c.grid = GfdmGrid(1, 1, 0);
    c.g_tx = build_prototype(c.grid, PulseKind::Rectangular);
    c.f_rx = mf_receiver(c.g_tx);
    c.pdp_s = ChannelPdp({{0, 0}});
    c.pdp_rsi = ChannelPdp({{0, -10}});
    const auto cfg = AnalyticsConfig::from_link(c);
    const auto p = assemble_problem(cfg);
    const QuadraticForms qf(cfg);
    EXPECT_LT((p.t1 - qf.U(0, 0)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((p.t2 - qf.V_si(0, 0) - qf.V_r()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FilterOptimizer, AssembledMatricesAreHermitian) {
    const auto p = assemble_problem(AnalyticsConfig::from_link(base_link()));
    EXPECT_LT(p.hermitian_residue, 1e-10);
    EXPECT_LT(detail::hermitian_residue(p.t2), 1e-10);
}

TEST(FilterOptimizer, RayleighQuotientIsAggregateSir) {
    const auto link = base_link();
    const auto p = assemble_problem(AnalyticsConfig::from_link(link));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 5; ++i) {
        const auto f = random_filter(link.grid.N(), rng);
        const double a = sir_of_filter(f, p);
        const double b = aggregate_sir(link, f);
        EXPECT_NEAR(a, b, 1e-8 * b);
    }
    EXPECT_NEAR(sir_of_filter(link.f_rx, p), aggregate_sir(link, link.f_rx.taps), 1e-8 * sir_of_filter(link.f_rx, p));
}

TEST(FilterOptimizer, DominatesStandardAndRandomFilters) {
    const auto link = base_link();
    auto p = assemble_problem(AnalyticsConfig::from_link(link));
    const auto opt = solve(p);
    EXPECT_LT(opt.eigen_residual, 1e-8);
    const double best = aggregate_sir(link, opt.f.taps);
    EXPECT_NEAR(best, opt.achieved_sir, 1e-8 * best);

    EXPECT_GE(best, aggregate_sir(link, link.f_rx.taps));
    EXPECT_GE(best, aggregate_sir(link, mf_receiver(link.g_tx).taps));
    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) EXPECT_GE(opt.achieved_sir, sir_of_filter(random_filter(link.grid.N(), rng), p));
}

TEST(FilterOptimizer, UnitNormCanonicalPhaseAndScaleInvariance) {
    const auto link = base_link();
    auto p = assemble_problem(AnalyticsConfig::from_link(link));
    const auto opt = solve(p);
    EXPECT_NEAR(energy(opt.f.taps), 1.0, 1e-12);

    std::size_t imax = 0;
    for (std::size_t i = 1; i < opt.f.taps.size(); ++i)
        if (std::abs(opt.f.taps[i]) > std::abs(opt.f.taps[imax])) imax = i;
    EXPECT_GT(opt.f.taps[imax].real(), 0.0);
    EXPECT_EQ(opt.f.taps[imax].imag(), 0.0);

    CVector scaled = opt.f.taps;
    for (auto& v : scaled) v *= Complex(-3.0, 4.0);
    EXPECT_NEAR(sir_of_filter(scaled, p), opt.achieved_sir, 1e-9 * opt.achieved_sir);
}

TEST(FilterOptimizer, RejectsBadFilters) {
    const auto p = diagonal_problem();
    EXPECT_THROW(sir_of_filter(CVector(2, Complex{}), p), ConfigError);
    EXPECT_THROW(sir_of_filter(CVector(3, Complex{1.0}), p), ConfigError);
    auto q = p;
    q.t2 = q.t1;
    EXPECT_EQ(sir_of_filter(CVector{{1.0}, {0.0}}, q), kInf);
}
