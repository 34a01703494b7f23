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

#include "mimopc/network.hpp"

#include <Eigen/Eigenvalues>

#include <fstream>
#include <sstream>

namespace mimopc {

enum class PilotKind { Orthogonal, RandomGaussian, NonorthogonalFrame, External };

inline std::string to_string(PilotKind k)
{
    switch (k) {
    case PilotKind::Orthogonal: return "orthogonal";
    case PilotKind::RandomGaussian: return "random";
    case PilotKind::NonorthogonalFrame: return "frame";
    case PilotKind::External: return "external";
    }
    return "?";
}

inline PilotKind pilot_kind_from_string(const std::string& s)
{
    if (s == "orthogonal" || s == "O")
        return PilotKind::Orthogonal;
    if (s == "random" || s == "R")
        return PilotKind::RandomGaussian;
    if (s == "frame" || s == "nonorthogonal" || s == "N")
        return PilotKind::NonorthogonalFrame;
    if (s == "external")
        return PilotKind::External;
    throw std::invalid_argument("unknown pilot kind '" + s + "'");
}

// One-letter tag used in method labels such as "D-N".
inline char pilot_letter(PilotKind k)
{
    switch (k) {
    case PilotKind::Orthogonal: return 'O';
    case PilotKind::RandomGaussian: return 'R';
    case PilotKind::NonorthogonalFrame: return 'N';
    case PilotKind::External: return 'X';
    }
    return '?';
}

struct PilotBook {
    int length = 0;
    PilotKind kind = PilotKind::Orthogonal;
    double energy_per_symbol = 0.0; // every column has squared norm length * energy_per_symbol
    UserLayout users;
    CMat sequences; // L x (sum K_i), cell-major columns

    auto cell(int i) const { return sequences.middleCols(users.offset(i), users.users_in(i)); }
    auto column(int u) const { return sequences.col(u); }
    double column_energy() const { return length * energy_per_symbol; }
};

struct PilotOptions {
    // Defaults to the scenario's pmax when unset (<= 0).
    double energy_per_symbol = 0.0;
    int frame_rounds = 500;
    std::string external_path;
};

// Largest normalized cross-correlation |phi_u^* phi_v| / (|phi_u| |phi_v|), u != v.
inline double max_coherence(const CMat& f)
{
    double best = 0.0;
    const RVec norms = f.colwise().norm();
    for (Eigen::Index u = 0; u < f.cols(); ++u)
        for (Eigen::Index v = u + 1; v < f.cols(); ++v)
            best = std::max(best, std::abs(f.col(u).dot(f.col(v))) / (norms(u) * norms(v)));
    return best;
}

// Lower bound on the coherence of n unit vectors in C^l (0 when n <= l).
inline double welch_bound(int n, int l)
{
    if (n <= l)
        return 0.0;
    return std::sqrt(static_cast<double>(n - l) / (static_cast<double>(l) * (n - 1)));
}

inline void normalize_columns(CMat& f, double target_norm)
{
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
        const double n = f.col(c).norm();
        if (n > 0.0)
            f.col(c) *= target_norm / n;
    }
}

namespace detail {

inline CMat random_unit_frame(int l, int n, std::uint64_t seed)
{
    Rng rng = stream_rng(seed, StreamTag::Pilots);
    CMat f(l, n);
    fill_complex_normal(f, rng);
    normalize_columns(f, 1.0);
    return f;
}

// Alternating projection between the Gram matrices with off-diagonal
// magnitude capped at `cap` and the rank-l positive semidefinite cone.
// Returns the lowest-coherence iterate seen, including the start point.
inline CMat grassmannian_frame(CMat start, int rounds)
{
    const int l = static_cast<int>(start.rows());
    const int n = static_cast<int>(start.cols());
    const double cap = welch_bound(n, l);

    CMat best = start;
    double best_mu = max_coherence(start);
    if (n <= l)
        return best;

    CMat f = std::move(start);
    Eigen::SelfAdjointEigenSolver<CMat> eig;
    for (int round = 0; round < rounds; ++round) {
        CMat g = f.adjoint() * f;
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                if (r == c) {
                    g(r, c) = 1.0;
                    continue;
                }
                const double m = std::abs(g(r, c));
                if (m > cap)
                    g(r, c) *= cap / m;
            }
        }
        eig.compute(g);
        // Eigenvalues ascend; keep the top l.
        const RVec lam = eig.eigenvalues().tail(l).cwiseMax(0.0).cwiseSqrt();
        f = lam.asDiagonal() * eig.eigenvectors().rightCols(l).adjoint();
        normalize_columns(f, 1.0);
        const double mu = max_coherence(f);
        if (mu < best_mu) {
            best_mu = mu;
            best = f;
        }
    }
    return best;
}

} // namespace detail

// External pilot file: a '#' header line followed by 2L rows of
// comma-separated values, Re/Im interleaved per symbol, one column per user
// in cell-major order.
inline CMat read_pilot_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open pilot file '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.size() % 2 != 0)
        throw std::invalid_argument("pilot file '" + path + "' must have an even, nonzero row count");
    const std::size_t cols = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != cols)
            throw std::invalid_argument("pilot file '" + path + "' has ragged rows");
    CMat f(static_cast<Eigen::Index>(rows.size() / 2), static_cast<Eigen::Index>(cols));
    for (Eigen::Index l = 0; l < f.rows(); ++l)
        for (Eigen::Index c = 0; c < f.cols(); ++c)
            f(l, c) = cplx(rows[static_cast<std::size_t>(2 * l)][static_cast<std::size_t>(c)],
                           rows[static_cast<std::size_t>(2 * l + 1)][static_cast<std::size_t>(c)]);
    return f;
}

inline void write_pilot_file(const std::string& path, const PilotBook& book)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write pilot file '" + path + "'");
    out << "# mimopc pilots L=" << book.length << " users=" << book.sequences.cols()
        << " rows=re/im interleaved per symbol, columns=users cell-major\n";
    out.precision(17);
    for (Eigen::Index l = 0; l < book.sequences.rows(); ++l) {
        for (int part = 0; part < 2; ++part) {
            for (Eigen::Index c = 0; c < book.sequences.cols(); ++c) {
                const cplx z = book.sequences(l, c);
                out << (c ? "," : "") << (part == 0 ? z.real() : z.imag());
            }
            out << '\n';
        }
    }
}

inline PilotBook make_pilots(PilotKind kind, int length, const NetworkScenario& sc, std::uint64_t seed,
                             const PilotOptions& opt = {})
{
    if (length < 1)
        throw std::invalid_argument("pilots.length must be >= 1");

    PilotBook book;
    book.length = length;
    book.kind = kind;
    book.users = sc.users;
    book.energy_per_symbol = opt.energy_per_symbol > 0.0 ? opt.energy_per_symbol : sc.pmax;
    const int n = sc.num_users();

    switch (kind) {
    case PilotKind::Orthogonal: {
        if (length < sc.users.max_users_per_cell())
            throw std::invalid_argument("pilots.length: orthogonal pilots need L >= max K_i (L=" +
                                        std::to_string(length) + ", K=" +
                                        std::to_string(sc.users.max_users_per_cell()) + ")");
        // Column k of the DFT basis goes to user k of every cell.
        book.sequences.resize(length, n);
        for (int u = 0; u < n; ++u) {
            const int k = sc.users.slot_of(u);
            for (int l = 0; l < length; ++l)
                book.sequences(l, u) = std::polar(1.0, -2.0 * std::numbers::pi * l * k / length);
        }
        break;
    }
    case PilotKind::RandomGaussian:
        book.sequences = detail::random_unit_frame(length, n, seed);
        break;
    case PilotKind::NonorthogonalFrame:
        book.sequences = detail::grassmannian_frame(detail::random_unit_frame(length, n, seed), opt.frame_rounds);
        break;
    case PilotKind::External: {
        book.sequences = read_pilot_file(opt.external_path);
        if (book.sequences.rows() != length || book.sequences.cols() != n)
            throw std::invalid_argument("pilot file '" + opt.external_path + "' is " +
                                        std::to_string(book.sequences.rows()) + "x" +
                                        std::to_string(book.sequences.cols()) + ", expected " +
                                        std::to_string(length) + "x" + std::to_string(n));
        for (Eigen::Index c = 0; c < book.sequences.cols(); ++c)
            if (book.sequences.col(c).norm() == 0.0)
                throw std::invalid_argument("pilot file '" + opt.external_path + "' has an all-zero column");
        break;
    }
    }
    normalize_columns(book.sequences, std::sqrt(book.column_energy()));
    return book;
}

// Per-BS pilot correlation U_i = sigma^2 I + sum_j Phi_j V_ij Phi_j^*, kept
// together with its Cholesky factor.
class PilotGram {
  public:
    PilotGram(const PilotBook& book, const NetworkScenario& sc)
    {
        if (book.sequences.cols() != sc.num_users())
            throw std::invalid_argument("pilot book does not match scenario user count");
        u_.reserve(static_cast<std::size_t>(sc.num_cells()));
        llt_.reserve(static_cast<std::size_t>(sc.num_cells()));
        for (int i = 0; i < sc.num_cells(); ++i) {
            const RVec v = sc.large_scale.row(i).transpose();
            CMat u = book.sequences * v.asDiagonal() * book.sequences.adjoint();
            u.diagonal().array() += sc.noise_power;
            u = 0.5 * (u + u.adjoint()).eval();
            llt_.emplace_back(u);
            if (llt_.back().info() != Eigen::Success)
                throw NumericalError("pilot Gram matrix of BS " + std::to_string(i) + " is not positive definite");
            u_.push_back(std::move(u));
        }
    }

    int num_cells() const { return static_cast<int>(u_.size()); }
    const CMat& matrix(int bs) const { return u_[static_cast<std::size_t>(bs)]; }

    template <typename Rhs>
    CMat solve(int bs, const Eigen::MatrixBase<Rhs>& rhs) const
    {
        return llt_[static_cast<std::size_t>(bs)].solve(rhs);
    }

  private:
    std::vector<CMat> u_;
    std::vector<Eigen::LLT<CMat>> llt_;
};

inline PilotGram pilot_gram(const PilotBook& book, const NetworkScenario& sc) { return PilotGram(book, sc); }

} // namespace mimopc
