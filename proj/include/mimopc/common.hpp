// SPDX-License-Identifier: Apache-2.0
//
// mimopc: uplink massive MIMO power control under nonorthogonal pilots
// Copyright (C) 2026 The mimopc authors
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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mimopc {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Transmit powers in watts, one entry per user in cell-major order.
using PowerVector = Eigen::VectorXd;

inline constexpr double kLn2 = std::numbers::ln2;

// A numerical invariant was violated at runtime (e.g. a monotone objective
// decreased). Distinct from std::invalid_argument, which flags bad inputs.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

// Maps between the flat user index u and the (cell, user-in-cell) pair.
class UserLayout {
  public:
    UserLayout() = default;
    explicit UserLayout(std::vector<int> users_per_cell) : k_(std::move(users_per_cell))
    {
        offset_.resize(k_.size() + 1, 0);
        for (std::size_t i = 0; i < k_.size(); ++i) {
            if (k_[i] < 1)
                throw std::invalid_argument("users_per_cell entries must be >= 1");
            offset_[i + 1] = offset_[i] + k_[i];
        }
        cell_.resize(static_cast<std::size_t>(offset_.back()));
        for (std::size_t i = 0; i < k_.size(); ++i)
            for (int k = 0; k < k_[i]; ++k)
                cell_[static_cast<std::size_t>(offset_[i] + k)] = static_cast<int>(i);
    }

    int num_cells() const { return static_cast<int>(k_.size()); }
    int num_users() const { return offset_.empty() ? 0 : offset_.back(); }
    int users_in(int cell) const { return k_[static_cast<std::size_t>(cell)]; }
    int max_users_per_cell() const
    {
        int m = 0;
        for (int k : k_)
            m = std::max(m, k);
        return m;
    }
    int offset(int cell) const { return offset_[static_cast<std::size_t>(cell)]; }
    int index(int cell, int k) const { return offset(cell) + k; }
    int cell_of(int u) const { return cell_[static_cast<std::size_t>(u)]; }
    int slot_of(int u) const { return u - offset(cell_of(u)); }
    const std::vector<int>& users_per_cell() const { return k_; }

  private:
    std::vector<int> k_;
    std::vector<int> offset_;
    std::vector<int> cell_;
};

// ---- random streams ------------------------------------------------------

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream tags keep independent consumers of one master seed apart.
enum class StreamTag : std::uint64_t {
    Scenario = 1,
    Pilots = 2,
    Channel = 3,
    Benchmark = 4,
    Stochastic = 5,
};

// Counter-derived engine: the state is a pure function of (seed, tag, index),
// so draw t can be produced on any thread in any order.
inline Rng stream_rng(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0)
{
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ (static_cast<std::uint64_t>(tag) * 0xD1B54A32D192ED03ULL));
    s = splitmix64(s ^ index);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(tag)};
    return Rng(seq);
}

inline std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0)
{
    return splitmix64(splitmix64(seed ^ static_cast<std::uint64_t>(tag)) + index);
}

// Standard circularly-symmetric complex Gaussian CN(0, 1).
inline cplx complex_normal(Rng& rng)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline void fill_complex_normal(CMat& m, Rng& rng, double stddev = 1.0)
{
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            m(r, c) = stddev * complex_normal(rng);
}

// FNV-1a, used for config hashes and channel stream fingerprints.
class Fnv1a {
  public:
    void update(const void* data, std::size_t n)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001B3ULL;
        }
    }
    void update(const std::string& s) { update(s.data(), s.size()); }
    void update(double x) { update(&x, sizeof x); }
    std::uint64_t value() const { return h_; }

  private:
    std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

inline std::string hex64(std::uint64_t x)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, x >>= 4)
        s[static_cast<std::size_t>(i)] = digits[x & 0xF];
    return s;
}

} // namespace mimopc
