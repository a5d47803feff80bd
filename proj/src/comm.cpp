// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfisac/comm.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace cfisac
{

    PrecoderSet compute_precoders(const ChannelEnsemble &e, int n_ues,
                                  PrecoderKind kind, double mmse_delta)
    {
        if (e.realizations.empty())
            throw InvalidConfig("empty channel ensemble");
        if (kind != PrecoderKind::MaximumRatio && kind != PrecoderKind::LocalMmse)
            throw InvalidConfig("unknown precoder kind");
        if (n_ues < 1 || e.realizations.front().cols() % n_ues != 0)
            throw InvalidConfig("ensemble width is not a multiple of the UE count");

        const int K = n_ues;
        const auto N = e.realizations.front().rows();
        const int L = static_cast<int>(e.realizations.front().cols()) / K;

        PrecoderSet w;
        w.n_ues = n_ues;
        w.realizations.reserve(e.realizations.size());
        for (const auto &h : e.realizations)
        {
            Eigen::MatrixXcd wr(h.rows(), h.cols());
            for (Eigen::Index c = 0; c < h.cols(); ++c)
                if (h.col(c).norm() == 0.0)
                    throw ZeroChannel("zero channel realization at column " +
                                      std::to_string(c));
            if (kind == PrecoderKind::MaximumRatio)
            {
                for (Eigen::Index c = 0; c < h.cols(); ++c)
                    wr.col(c) = h.col(c).conjugate() / h.col(c).norm();
            }
            else
            {
                for (int l = 0; l < L; ++l)
                {
                    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(N, N);
                    double energy = 0.0;
                    for (int i = 0; i < K; ++i)
                    {
                        const Eigen::VectorXcd hc = h.col(l * K + i).conjugate();
                        b.noalias() += hc * hc.adjoint();
                        energy += hc.squaredNorm();
                    }
                    const double delta = mmse_delta > 0.0
                                             ? mmse_delta
                                             : 1e-9 * energy / (K * N);
                    b.diagonal().array() += delta;
                    const Eigen::LLT<Eigen::MatrixXcd> llt(b);
                    for (int k = 0; k < K; ++k)
                    {
                        const Eigen::VectorXcd v =
                            llt.solve(h.col(l * K + k).conjugate());
                        wr.col(l * K + k) = v / v.norm();
                    }
                }
            }
            w.realizations.push_back(std::move(wr));
        }
        return w;
    }

    namespace
    {
        /// Hermitian-symmetrize and clip negative eigenvalues at zero.
        Eigen::MatrixXcd psd_project(const Eigen::MatrixXcd &c)
        {
            const Eigen::MatrixXcd sym = 0.5 * (c + c.adjoint());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
            Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
            return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
        }
    } // namespace

    CommStats estimate_stats(const ChannelEnsemble &e, const PrecoderSet &w, double sigma2)
    {
        if (e.realizations.empty() || w.realizations.size() != e.realizations.size())
            throw InvalidConfig("ensemble and precoder set do not match");
        if (sigma2 <= 0.0)
            throw InvalidConfig("noise power must be positive");

        const int K = w.n_ues;
        const int L = static_cast<int>(e.realizations.front().cols()) / K;
        const int T = static_cast<int>(e.realizations.size());

        CommStats stats;
        stats.sigma2 = sigma2;
        stats.d = Eigen::MatrixXd::Zero(K, L);
        Eigen::MatrixXcd d_cplx = Eigen::MatrixXcd::Zero(K, L);
        stats.c_mats.assign(K, std::vector<Eigen::MatrixXcd>(
                                   K, Eigen::MatrixXcd::Zero(L, L)));

        Eigen::VectorXcd v(L);
        for (int t = 0; t < T; ++t)
        {
            const auto &h = e.realizations[static_cast<std::size_t>(t)];
            const auto &wt = w.realizations[static_cast<std::size_t>(t)];
            for (int k = 0; k < K; ++k)
            {
                for (int i = 0; i < K; ++i)
                {
                    // v_l = h_{kl}^T w_{il}
                    for (int l = 0; l < L; ++l)
                        v(l) = h.col(l * K + k).transpose() * wt.col(l * K + i);
                    stats.c_mats[k][i].noalias() += v * v.adjoint();
                    if (i == k)
                        d_cplx.row(k) += v.transpose();
                }
            }
        }
        d_cplx /= static_cast<double>(T);
        stats.d = d_cplx.real();

        for (int k = 0; k < K; ++k)
            for (int i = 0; i < K; ++i)
            {
                stats.c_mats[k][i] /= static_cast<double>(T);
                if (i == k)
                    stats.c_mats[k][k] -= d_cplx.row(k).transpose() *
                                          d_cplx.row(k).conjugate();
                stats.c_mats[k][i] = psd_project(stats.c_mats[k][i]);
            }
        return stats;
    }

    double sinr(const CommStats &stats, const PowerVector &p, int k)
    {
        const int K = stats.n_ues();
        if (k < 0 || k >= K)
            throw InvalidConfig("UE index out of range");
        if (p.rho.rows() != K || p.rho.cols() != stats.n_aps())
            throw InvalidConfig("power vector shape does not match stats");

        const double sig = stats.d.row(k).dot(p.rho.row(k));
        double interference = 0.0;
        for (int i = 0; i < K; ++i)
        {
            const Eigen::VectorXd rho_i = p.rho.row(i).transpose();
            interference +=
                (rho_i.transpose() * stats.c_mats[k][i].real() * rho_i).value();
        }
        return sig * sig / (interference + stats.sigma2);
    }

    double spectral_efficiency(double sinr_k, int tau_d, int tau_c)
    {
        if (sinr_k < 0.0)
            throw InvalidConfig("SINR must be nonnegative");
        if (tau_c < 1 || tau_d < 1 || tau_d > tau_c)
            throw InvalidConfig("coherence block sizes must satisfy 1 <= tau_d <= tau_c");
        return static_cast<double>(tau_d) / tau_c * std::log2(1.0 + sinr_k);
    }

    ConeConstraint soc_constraint(const CommStats &stats, double gamma_c, int k)
    {
        if (gamma_c <= 0.0)
            throw InvalidConfig("SINR threshold must be positive");
        const int K = stats.n_ues();
        const int L = stats.n_aps();
        if (k < 0 || k >= K)
            throw InvalidConfig("UE index out of range");

        const double sq = std::sqrt(gamma_c);
        ConeConstraint cone;
        cone.f_mat = Eigen::MatrixXd::Zero(K * L + 1, K * L);
        cone.g_vec = Eigen::VectorXd::Zero(K * L + 1);
        cone.f_lin = Eigen::VectorXd::Zero(K * L);

        for (int i = 0; i < K; ++i)
        {
            // For real rho, rho^T C rho = rho^T Re(C) rho; the real part of a
            // Hermitian PSD matrix is symmetric PSD, so a real square root works.
            const Eigen::MatrixXd c_re = stats.c_mats[k][i].real();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c_re);
            const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
            if (es.eigenvalues().minCoeff() < -1e-6 * scale)
                throw NotPSD("interference matrix C_" + std::to_string(k) + "," +
                             std::to_string(i) + " is not PSD");
            const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            const Eigen::MatrixXd root =
                es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
            cone.f_mat.block(i * L, i * L, L, L) = sq * root;
        }
        cone.g_vec(K * L) = sq * std::sqrt(stats.sigma2);
        cone.f_lin.segment(k * L, L) = stats.d.row(k).transpose();
        return cone;
    }

    // ---------------------------------------------------------------------
    // Serialization

    std::string comm_stats_to_json(const CommStats &stats)
    {
        using nlohmann::json;
        json j;
        j["format"] = "cfisac-commstats/1";
        j["sigma2"] = stats.sigma2;
        json d = json::array();
        for (int k = 0; k < stats.n_ues(); ++k)
        {
            json row = json::array();
            for (int l = 0; l < stats.n_aps(); ++l)
                row.push_back(stats.d(k, l));
            d.push_back(row);
        }
        j["d"] = d;
        json cm = json::array();
        for (int k = 0; k < stats.n_ues(); ++k)
        {
            json per_k = json::array();
            for (int i = 0; i < stats.n_ues(); ++i)
            {
                json mat = json::array();
                for (int l = 0; l < stats.n_aps(); ++l)
                {
                    json row = json::array();
                    for (int r = 0; r < stats.n_aps(); ++r)
                        row.push_back({stats.c_mats[k][i](l, r).real(),
                                       stats.c_mats[k][i](l, r).imag()});
                    mat.push_back(row);
                }
                per_k.push_back(mat);
            }
            cm.push_back(per_k);
        }
        j["c_mats"] = cm;
        return j.dump();
    }

    CommStats comm_stats_from_json(const std::string &text)
    {
        using nlohmann::json;
        const json j = json::parse(text);
        if (j.value("format", "") != std::string("cfisac-commstats/1"))
            throw InvalidConfig("unsupported comm-stats snapshot format");
        CommStats stats;
        stats.sigma2 = j.at("sigma2").get<double>();
        const auto &d = j.at("d");
        const int K = static_cast<int>(d.size());
        const int L = static_cast<int>(d.at(0).size());
        stats.d.resize(K, L);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < L; ++l)
                stats.d(k, l) = d.at(k).at(l).get<double>();
        stats.c_mats.assign(K, std::vector<Eigen::MatrixXcd>(
                                   K, Eigen::MatrixXcd::Zero(L, L)));
        const auto &cm = j.at("c_mats");
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < K; ++i)
                for (int l = 0; l < L; ++l)
                    for (int r = 0; r < L; ++r)
                        stats.c_mats[k][i](l, r) =
                            cdouble(cm.at(k).at(i).at(l).at(r).at(0).get<double>(),
                                    cm.at(k).at(i).at(l).at(r).at(1).get<double>());
        return stats;
    }

} // namespace cfisac
