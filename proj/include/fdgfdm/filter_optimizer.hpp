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

// SIR-optimal receiver filter.
//
// The grid-aggregate SIR of a receiver filter f is the Rayleigh quotient
//
//   Gamma(f) = f^H T1 f / f^H (T2 - T1) f,
//
// T1 = sum_{k',m'} (S_k' M_m')^H U_{k',m'} (S_k' M_m'),
// T2 = sum_{k',m'} (S_k' M_m')^H (V^SI_{k',m'} + V^R) (S_k' M_m').
//
// Its maximizer under ||f|| = 1 is the top eigenvector of the Hermitian-
// definite pencil T1 x = lambda (T2 - T1) x.

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "fdgfdm/closed_form.hpp"

namespace fdgfdm {

struct OptimizationProblem {
    GfdmGrid grid{1, 1, 0};
    CMatrix t1;
    CMatrix t2;
    /// Diagonal loading applied to T2 - T1 by solve(); filled in on return.
    double regularization = 0.0;
    /// max |T - T^H| / max |T| of the raw T1 before symmetrization.
    double hermitian_residue = 0.0;
};

struct OptimalFilter {
    ReceiverFilter f;
    double achieved_sir = 0.0;   ///< lambda_max (linear)
    double eigen_residual = 0.0; ///< ||B^{-1} T1 f - lambda f|| / (lambda ||f||)
    double regularization = 0.0; ///< loading that made T2 - T1 definite
    std::size_t multiplicity = 1;
};

namespace detail {

/// (S_k' M_m')^H X (S_k' M_m') accumulated into acc in O(N^2).
inline void add_mapped(CMatrix& acc, const CMatrix& x, const CVector& s_diag, std::size_t shift) {
    const auto N = static_cast<std::size_t>(x.rows());
    for (std::size_t b = 0; b < N; ++b) {
        const std::size_t nb = (b + shift) % N;
        const Complex sb = s_diag[nb];
        for (std::size_t a = 0; a < N; ++a) {
            const std::size_t na = (a + shift) % N;
            acc(a, b) += std::conj(s_diag[na]) * x(na, nb) * sb;
        }
    }
}

inline double hermitian_residue(const CMatrix& t) {
    const double scale = t.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (t - t.adjoint()).cwiseAbs().maxCoeff() / scale;
}

inline CMatrix symmetrize(const CMatrix& t) { return (t + t.adjoint()) / 2.0; }

} // namespace detail

inline OptimizationProblem assemble_problem(const AnalyticsConfig& cfg) {
    const QuadraticForms forms(cfg);
    const auto& grid = cfg.grid;
    const std::size_t N = grid.N();
    CMatrix t1 = CMatrix::Zero(N, N);
    CMatrix t2 = CMatrix::Zero(N, N);
    const CMatrix vr = forms.V_r();
    for (std::size_t kp = 0; kp < grid.K(); ++kp) {
        const auto s = subcarrier_mapping_diagonal(grid, kp);
        for (std::size_t mp = 0; mp < grid.M(); ++mp) {
            const std::size_t shift = mp * grid.K();
            detail::add_mapped(t1, forms.U(kp, mp), s, shift);
            detail::add_mapped(t2, forms.V_si(kp, mp) + vr, s, shift);
        }
    }
    OptimizationProblem p;
    p.grid = grid;
    p.hermitian_residue = detail::hermitian_residue(t1);
    p.t1 = detail::symmetrize(t1);
    p.t2 = detail::symmetrize(t2);
    return p;
}

/// f^H T1 f / f^H (T2 - T1) f; +inf when the denominator vanishes.
inline double sir_of_filter(const CVector& f, const OptimizationProblem& problem) {
    const auto N = static_cast<Eigen::Index>(problem.t1.rows());
    if (static_cast<Eigen::Index>(f.size()) != N) throw ConfigError("sir_of_filter: filter length != N");
    const CColumn x = Eigen::Map<const CColumn>(f.data(), N);
    if (x.squaredNorm() == 0.0) throw ConfigError("sir_of_filter: zero filter");
    const double num = (x.adjoint() * problem.t1 * x)(0, 0).real();
    const double den = (x.adjoint() * (problem.t2 - problem.t1) * x)(0, 0).real();
    if (!(den > 0.0)) return kInf;
    return num / den;
}

inline double sir_of_filter(const ReceiverFilter& f, const OptimizationProblem& problem) {
    return sir_of_filter(f.taps, problem);
}

/// Rotates x so that its largest-magnitude entry is real and positive.
inline void canonicalize_phase(CColumn& x) {
    Eigen::Index imax = 0;
    x.cwiseAbs().maxCoeff(&imax);
    const double mag = std::abs(x(imax));
    if (mag > 0.0) x *= std::conj(x(imax)) / mag;
}

/// Top generalized eigenpair of (T1, T2 - T1) by Cholesky reduction to a
/// standard Hermitian eigenproblem.
inline OptimalFilter solve(OptimizationProblem& problem) {
    const auto N = problem.t1.rows();
    const CMatrix b = detail::symmetrize(problem.t2 - problem.t1);
    const double base = std::abs(b.trace().real()) / static_cast<double>(N);
    static constexpr double kLoading[] = {0.0, 1e-12, 1e-10, 1e-8};

    Eigen::LLT<CMatrix> llt;
    double reg = 0.0;
    bool ok = false;
    for (double level : kLoading) {
        reg = level * base;
        llt.compute(b + reg * CMatrix::Identity(N, N));
        if (llt.info() == Eigen::Success) {
            ok = true;
            break;
        }
    }
    if (!ok) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(b, Eigen::EigenvaluesOnly);
        throw NumericalError("filter optimizer: T2 - T1 is not positive definite (smallest eigenvalue " +
                             std::to_string(es.eigenvalues()(0)) + ")");
    }
    problem.regularization = reg;

    // C = L^{-1} T1 L^{-H}
    const auto lower = llt.matrixL();
    CMatrix c = lower.solve(problem.t1);
    c = lower.solve(c.adjoint()).adjoint();
    c = detail::symmetrize(c);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(c);
    if (es.info() != Eigen::Success) throw NumericalError("filter optimizer: eigen decomposition failed");

    const auto& evals = es.eigenvalues();
    const double lambda = evals(N - 1);
    CColumn x = llt.matrixU().solve(es.eigenvectors().col(N - 1));
    x.normalize();
    canonicalize_phase(x);

    OptimalFilter out;
    out.achieved_sir = lambda;
    out.regularization = reg;
    const double tol = 1e-9 * std::max(std::abs(lambda), 1e-300);
    out.multiplicity = 0;
    for (Eigen::Index i = N - 1; i >= 0 && evals(i) >= lambda - tol; --i) ++out.multiplicity;

    const CColumn lhs = llt.solve(problem.t1 * x);
    out.eigen_residual = (lhs - lambda * x).norm() / (std::abs(lambda) * x.norm());

    out.f.origin = ReceiverOrigin::Optimal;
    out.f.taps.assign(x.data(), x.data() + N);
    return out;
}

/// assemble_problem + solve.
inline OptimalFilter optimal_receiver(const AnalyticsConfig& cfg) {
    auto problem = assemble_problem(cfg);
    return solve(problem);
}

} // namespace fdgfdm
