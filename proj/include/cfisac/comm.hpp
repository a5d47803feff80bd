// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cfisac/scenario.hpp"

namespace cfisac
{

    enum class PrecoderKind
    {
        MaximumRatio, ///< w_{kl} = conj(h_{kl}) / ||h_{kl}||
        /// Per-AP regularized MMSE: w_{kl} proportional to
        /// (sum_i conj(h_{il}) h_{il}^T + delta I)^{-1} conj(h_{kl}),
        /// normalized.  Suppresses inter-UE interference using only the AP's
        /// own channels.
        LocalMmse
    };

    /// Per-realization, per-link unit-norm precoding vectors, same layout as
    /// the ensemble (column l*K + k of realization t).
    struct PrecoderSet
    {
        std::vector<Eigen::MatrixXcd> realizations;
        int n_ues = 0;
    };

    /// Statistical description of the effective downlink channel: the
    /// expected effective-channel vectors d_k and interference matrices C_ki.
    struct CommStats
    {
        Eigen::MatrixXd d;                        ///< K x L, [d](k,l) = E{h^T w}
        std::vector<std::vector<Eigen::MatrixXcd>> c_mats; ///< c_mats[k][i], L x L Hermitian PSD
        double sigma2 = 0.0;

        int n_ues() const { return static_cast<int>(d.rows()); }
        int n_aps() const { return static_cast<int>(d.cols()); }
    };

    /// Nonnegative per-UE power vectors, [rho](k,l) = sqrt(p_{kl}) x_{k,l}.
    struct PowerVector
    {
        Eigen::MatrixXd rho; ///< K x L
    };

    /// `mmse_delta` is the ridge term of the LocalMmse kind (noise power over
    /// per-UE power budget); when <= 0 a small multiple of the mean channel
    /// energy is used.  Ignored by MaximumRatio.
    PrecoderSet compute_precoders(const ChannelEnsemble &e, int n_ues,
                                  PrecoderKind kind = PrecoderKind::MaximumRatio,
                                  double mmse_delta = 0.0);

    /// Sample-mean estimates of d_k and C_ki over the ensemble, with the
    /// self-term subtraction for i = k, Hermitian symmetrization and PSD
    /// eigenvalue clipping.
    CommStats estimate_stats(const ChannelEnsemble &e, const PrecoderSet &w,
                             double sigma2);

    /// Effective downlink SINR of UE k for the given powers.
    double sinr(const CommStats &stats, const PowerVector &p, int k);

    /// (tau_d / tau_c) * log2(1 + SINR).
    double spectral_efficiency(double sinr_k, int tau_d, int tau_c);

    /// One second-order cone constraint over the stacked variable
    /// x = [rho_1; ...; rho_K] (length K*L):  ||F x + g|| <= f^T x + h0.
    struct ConeConstraint
    {
        Eigen::MatrixXd f_mat;
        Eigen::VectorXd g_vec;
        Eigen::VectorXd f_lin;
        double h0 = 0.0;

        bool satisfied(const Eigen::VectorXd &x, double tol = 0.0) const
        {
            return (f_mat * x + g_vec).norm() <= f_lin.dot(x) + h0 + tol;
        }
    };

    /// SOC form of the SINR-threshold constraint of UE k.  Throws NotPSD when
    /// an interference matrix is too indefinite to floor.
    ConeConstraint soc_constraint(const CommStats &stats, double gamma_c, int k);

    /// Structured-text snapshot of CommStats, and its inverse (used to run
    /// solver tests without channel generation).
    std::string comm_stats_to_json(const CommStats &stats);
    CommStats comm_stats_from_json(const std::string &text);

} // namespace cfisac
