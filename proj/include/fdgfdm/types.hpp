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

#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fdgfdm {

using Real = double;
using Complex = std::complex<double>;
using CVector = std::vector<Complex>;
using RVector = std::vector<double>;
using CMatrix = Eigen::MatrixXcd;
using CColumn = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kJ{0.0, 1.0};
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration (CLI exit code 2).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Singular or indefinite matrices, failed factorizations (CLI exit code 3).
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// e^{j*theta}
inline Complex cis(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Non-negative modulo for signed sample indices.
inline std::size_t wrap(long long n, std::size_t len) {
    const auto l = static_cast<long long>(len);
    long long r = n % l;
    return static_cast<std::size_t>(r < 0 ? r + l : r);
}

inline double to_db(double linear) {
    if (linear <= 0.0) return -kInf;
    return 10.0 * std::log10(linear);
}

inline double from_db(double db) {
    if (db == -kInf) return 0.0;
    return std::pow(10.0, db / 10.0);
}

inline double energy(const CVector& v) {
    double e = 0.0;
    for (const auto& x : v) e += std::norm(x);
    return e;
}

} // namespace fdgfdm
