// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfisac/sensing.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace cfisac
{

    namespace
    {
        constexpr double kSpeedOfLight = 299'792'458.0;

        void check_mode_vectors(const GMatrices &g, const Eigen::VectorXi &a,
                                const Eigen::VectorXi &b)
        {
            const auto L = g.g_a.rows();
            if (a.size() != L || b.size() != L)
                throw InvalidConfig("mode vector length does not match G matrices");
            for (Eigen::Index l = 0; l < L; ++l)
            {
                if ((a(l) != 0 && a(l) != 1) || (b(l) != 0 && b(l) != 1))
                    throw InvalidConfig("mode vectors must be binary");
                if (a(l) == 1 && b(l) == 1)
                    throw InvalidConfig("AP " + std::to_string(l) +
                                        " assigned as both TX and RX");
            }
        }
    } // namespace

    double propagation_delay(double range_m_tx, double range_m_rx)
    {
        if (range_m_tx <= 0.0 || range_m_rx <= 0.0)
            throw DegenerateGeometry("bistatic ranges must be positive");
        return (range_m_tx + range_m_rx) / kSpeedOfLight;
    }

    GMatrices geometry_matrices(const Scenario &s, int xi_l_override)
    {
        const int L = s.n_aps();
        const std::vector<double> ranges = ap_target_ranges(s);

        const double l_for_xi = xi_l_override > 0 ? xi_l_override : L;
        const double bs = s.sensing_bandwidth_hz;
        const double xi = 8.0 * M_PI * M_PI * bs * bs /
                          (l_for_xi * l_for_xi * kSpeedOfLight * kSpeedOfLight *
                           s.noise_power_sensing);

        // Direction cosines from the target towards each AP, planar.
        Eigen::VectorXd cx(L), cy(L);
        for (int l = 0; l < L; ++l)
        {
            cx(l) = (s.ap_positions[l].x() - s.target_position.x()) / ranges[l];
            cy(l) = (s.ap_positions[l].y() - s.target_position.y()) / ranges[l];
        }

        GMatrices g;
        g.xi = xi;
        g.g_a.resize(L, L);
        g.g_b.resize(L, L);
        g.g_c.resize(L, L);
        g.alpha.resize(L, L);
        const double n2 = static_cast<double>(s.n_antennas) * s.n_antennas;
        for (int m = 0; m < L; ++m)
            for (int n = 0; n < L; ++n)
            {
                const double alpha = 1.0 / (ranges[m] * ranges[m] * ranges[n] * ranges[n]);
                const double w = xi * alpha * std::norm(s.rcs(m, n)) * n2;
                const double sx = cx(m) + cx(n);
                const double sy = cy(m) + cy(n);
                g.alpha(m, n) = alpha;
                g.g_a(m, n) = w * sx * sx;
                g.g_b(m, n) = w * sy * sy;
                g.g_c(m, n) = w * sx * sy;
            }
        return g;
    }

    double crlb_trace(const GMatrices &g, const Eigen::VectorXi &a,
                      const Eigen::VectorXi &b, double p_s)
    {
        check_mode_vectors(g, a, b);
        if (p_s <= 0.0)
            throw InvalidConfig("sensing power must be positive");

        const Eigen::VectorXd ad = a.cast<double>();
        const Eigen::VectorXd bd = b.cast<double>();
        const Eigen::MatrixXd A = ad * ad.transpose();
        const Eigen::MatrixXd B = bd * bd.transpose();

        const double num = ad.dot((g.g_a + g.g_b) * bd);
        const double den = (((A * g.g_b).transpose() * g.g_a -
                             (A * g.g_c).transpose() * g.g_c) *
                            B)
                               .trace();
        if (den <= kSingularFimEps)
            return std::numeric_limits<double>::infinity();
        return num / (p_s * den);
    }

    double FisherInfo::inverse_trace() const
    {
        const double d = det();
        if (d <= kSingularFimEps)
            return std::numeric_limits<double>::infinity();
        return (f_xx + f_yy) / d;
    }

    FisherInfo fim_oracle(const GMatrices &g, const Eigen::VectorXi &a,
                          const Eigen::VectorXi &b, double p_s)
    {
        check_mode_vectors(g, a, b);
        if (p_s <= 0.0)
            throw InvalidConfig("sensing power must be positive");

        const Eigen::VectorXd ad = a.cast<double>();
        const Eigen::VectorXd bd = b.cast<double>();
        FisherInfo f;
        f.f_xx = p_s * ad.dot(g.g_a * bd);
        f.f_yy = p_s * ad.dot(g.g_b * bd);
        f.f_xy = p_s * ad.dot(g.g_c * bd);
        return f;
    }

    SensingRows linear_sensing_constraint(const GMatrices &g, FixedSide side,
                                          const Eigen::VectorXi &fixed, double eta,
                                          double p_s)
    {
        if (eta <= 0.0)
            throw InvalidConfig("CRLB threshold must be positive");
        if (p_s <= 0.0)
            throw InvalidConfig("sensing power must be positive");
        const auto L = g.g_a.rows();
        if (fixed.size() != L)
            throw InvalidConfig("fixed mode vector length does not match G matrices");
        for (Eigen::Index l = 0; l < L; ++l)
            if (fixed(l) != 0 && fixed(l) != 1)
                throw InvalidConfig("fixed mode vector must be binary");

        const Eigen::VectorXd f = fixed.cast<double>();
        SensingRows rows;
        if (side == FixedSide::RxFixed)
        {
            // Free matrix is A; B = b b^T is known.
            const Eigen::MatrixXd B = f * f.transpose();
            const Eigen::MatrixXd den = g.g_a * B * g.g_b.transpose() -
                                        g.g_c * B * g.g_c.transpose();
            rows.denom_coeff = den;
            rows.main_coeff = -eta * p_s * den;
            rows.main_coeff.diagonal() += (g.g_a + g.g_b) * f;
        }
        else
        {
            // Free matrix is B; A = a a^T is known.
            const Eigen::MatrixXd A = f * f.transpose();
            const Eigen::MatrixXd m = (A * g.g_b).transpose() * g.g_a -
                                      (A * g.g_c).transpose() * g.g_c;
            rows.denom_coeff = m.transpose();
            rows.main_coeff = -eta * p_s * m.transpose();
            rows.main_coeff.diagonal() += (g.g_a + g.g_b).transpose() * f;
        }
        // Floor relative to the row's own magnitude so the nonsingularity side
        // condition survives row equilibration in the conic conversion.
        if (rows.denom_coeff.size() > 0)
            rows.denom_floor =
                kSingularFimEps + 1e-12 * rows.denom_coeff.cwiseAbs().maxCoeff();
        return rows;
    }

    std::string gmatrices_to_json(const GMatrices &g)
    {
        using nlohmann::json;
        auto mat = [](const Eigen::MatrixXd &m) {
            json rows = json::array();
            for (Eigen::Index i = 0; i < m.rows(); ++i)
            {
                json row = json::array();
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                    row.push_back(m(i, j));
                rows.push_back(row);
            }
            return rows;
        };
        json j;
        j["format"] = "cfisac-gmatrices/1";
        j["xi"] = g.xi;
        j["g_a"] = mat(g.g_a);
        j["g_b"] = mat(g.g_b);
        j["g_c"] = mat(g.g_c);
        j["alpha"] = mat(g.alpha);
        return j.dump(2);
    }

    GMatrices gmatrices_from_json(const std::string &text)
    {
        using nlohmann::json;
        const json j = json::parse(text);
        if (j.value("format", "") != std::string("cfisac-gmatrices/1"))
            throw InvalidConfig("unsupported G-matrices fixture format");
        auto mat = [](const json &rows) {
            const auto r = rows.size();
            const auto c = rows.at(0).size();
            Eigen::MatrixXd m(r, c);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j2 = 0; j2 < c; ++j2)
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j2)) =
                        rows.at(i).at(j2).get<double>();
            return m;
        };
        GMatrices g;
        g.xi = j.at("xi").get<double>();
        g.g_a = mat(j.at("g_a"));
        g.g_b = mat(j.at("g_b"));
        g.g_c = mat(j.at("g_c"));
        g.alpha = mat(j.at("alpha"));
        return g;
    }

} // namespace cfisac
