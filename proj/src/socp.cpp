// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Homogeneous self-dual interior-point method for second-order cone programs
// in the standard form  min c'x  s.t.  Ax = b, Gx + s = h, s in K, with
// K = R+^l x SOC(q_1) x ... x SOC(q_N).  Mehrotra predictor-corrector steps
// with Nesterov-Todd scaling; the scaled KKT system is reduced to the
// positive definite normal equations G' W^-2 G.

#include "cfisac/socp.hpp"

#include <chrono>
#include <cmath>

namespace cfisac
{

    namespace
    {

        struct ConeLayout
        {
            int n_lin = 0;
            std::vector<int> soc_dims;
            std::vector<int> soc_starts;
            int m = 0;
            int degree = 0; ///< l + number of SOC blocks
        };

        ConeLayout make_layout(const StandardConic &sc)
        {
            ConeLayout lay;
            lay.n_lin = sc.n_lin;
            lay.soc_dims = sc.soc_dims;
            int at = sc.n_lin;
            for (int q : sc.soc_dims)
            {
                lay.soc_starts.push_back(at);
                at += q;
            }
            lay.m = at;
            lay.degree = sc.n_lin + static_cast<int>(sc.soc_dims.size());
            return lay;
        }

        /// Nesterov-Todd scaling point for the current (s, z) pair.
        struct Scaling
        {
            Eigen::VectorXd w_lin; ///< sqrt(s_i / z_i)
            std::vector<Eigen::VectorXd> wbar;
            std::vector<double> eta;
            Eigen::VectorXd lambda; ///< scaled point, lambda = W z = W^-1 s
            bool ok = false;
        };

        double soc_det(const Eigen::VectorXd &u)
        {
            return u(0) * u(0) - u.tail(u.size() - 1).squaredNorm();
        }

        // v = Wbar u for Wbar = [w0 w1'; w1 I + w1 w1'/(1+w0)] with w'Jw = 1.
        Eigen::VectorXd wbar_apply(const Eigen::VectorXd &w, const Eigen::VectorXd &u)
        {
            const auto d = u.size();
            const double w0 = w(0);
            const auto w1 = w.tail(d - 1);
            const auto u1 = u.tail(d - 1);
            const double dot = w1.dot(u1);
            Eigen::VectorXd v(d);
            v(0) = w0 * u(0) + dot;
            v.tail(d - 1) = u1 + w1 * (u(0) + dot / (1.0 + w0));
            return v;
        }

        Scaling identity_scaling(const ConeLayout &lay)
        {
            Scaling w;
            w.w_lin = Eigen::VectorXd::Ones(lay.n_lin);
            for (int q : lay.soc_dims)
            {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(q);
                e(0) = 1.0;
                w.wbar.push_back(e);
                w.eta.push_back(1.0);
            }
            w.lambda = Eigen::VectorXd::Zero(lay.m);
            w.ok = true;
            return w;
        }

        Scaling compute_scaling(const ConeLayout &lay, const Eigen::VectorXd &s,
                                const Eigen::VectorXd &z)
        {
            Scaling w;
            w.w_lin.resize(lay.n_lin);
            w.lambda.resize(lay.m);
            for (int i = 0; i < lay.n_lin; ++i)
            {
                if (s(i) <= 0.0 || z(i) <= 0.0)
                    return w;
                w.w_lin(i) = std::sqrt(s(i) / z(i));
                w.lambda(i) = std::sqrt(s(i) * z(i));
            }
            for (std::size_t k = 0; k < lay.soc_dims.size(); ++k)
            {
                const int q = lay.soc_dims[k];
                const int at = lay.soc_starts[k];
                const Eigen::VectorXd sb = s.segment(at, q);
                const Eigen::VectorXd zb = z.segment(at, q);
                const double js = soc_det(sb), jz = soc_det(zb);
                if (sb(0) <= 0.0 || zb(0) <= 0.0 || js <= 0.0 || jz <= 0.0)
                    return w;
                const Eigen::VectorXd sbar = sb / std::sqrt(js);
                Eigen::VectorXd jzbar = zb / std::sqrt(jz);
                const double zs = sbar.dot(jzbar);
                jzbar.tail(q - 1) = -jzbar.tail(q - 1); // J zbar
                const double gamma = std::sqrt((1.0 + zs) / 2.0);
                Eigen::VectorXd wb = (sbar + jzbar) / (2.0 * gamma);
                const double eta = std::pow(js / jz, 0.25);
                w.lambda.segment(at, q) = eta * wbar_apply(wb, zb);
                w.wbar.push_back(std::move(wb));
                w.eta.push_back(eta);
            }
            w.ok = true;
            return w;
        }

        Eigen::VectorXd apply_W(const ConeLayout &lay, const Scaling &w,
                                const Eigen::VectorXd &u)
        {
            Eigen::VectorXd v(lay.m);
            v.head(lay.n_lin) = w.w_lin.cwiseProduct(u.head(lay.n_lin));
            for (std::size_t k = 0; k < lay.soc_dims.size(); ++k)
            {
                const int q = lay.soc_dims[k], at = lay.soc_starts[k];
                v.segment(at, q) = w.eta[k] * wbar_apply(w.wbar[k], u.segment(at, q));
            }
            return v;
        }

        Eigen::VectorXd apply_Winv(const ConeLayout &lay, const Scaling &w,
                                   const Eigen::VectorXd &u)
        {
            Eigen::VectorXd v(lay.m);
            v.head(lay.n_lin) = u.head(lay.n_lin).cwiseQuotient(w.w_lin);
            for (std::size_t k = 0; k < lay.soc_dims.size(); ++k)
            {
                const int q = lay.soc_dims[k], at = lay.soc_starts[k];
                Eigen::VectorXd jw = w.wbar[k];
                jw.tail(q - 1) = -jw.tail(q - 1);
                v.segment(at, q) = wbar_apply(jw, u.segment(at, q)) / w.eta[k];
            }
            return v;
        }

        Eigen::VectorXd apply_Wsq(const ConeLayout &lay, const Scaling &w,
                                  const Eigen::VectorXd &u)
        {
            // W^2 u = eta^2 (2 wbar (wbar'u) - J u) per SOC block.
            Eigen::VectorXd v(lay.m);
            v.head(lay.n_lin) =
                w.w_lin.cwiseProduct(w.w_lin).cwiseProduct(u.head(lay.n_lin));
            for (std::size_t k = 0; k < lay.soc_dims.size(); ++k)
            {
                const int q = lay.soc_dims[k], at = lay.soc_starts[k];
                const auto ub = u.segment(at, q);
                const auto &wb = w.wbar[k];
                Eigen::VectorXd ju = ub;
                ju.tail(q - 1) = -ju.tail(q - 1);
                v.segment(at, q) = w.eta[k] * w.eta[k] * (2.0 * wb * wb.dot(ub) - ju);
            }
            return v;
        }

        Eigen::VectorXd apply_Wsq_inv(const ConeLayout &lay, const Scaling &w,
                                      const Eigen::VectorXd &u)
        {
            Eigen::VectorXd v(lay.m);
            v.head(lay.n_lin) =
                u.head(lay.n_lin).cwiseQuotient(w.w_lin.cwiseProduct(w.w_lin));
            for (std::size_t k = 0; k < lay.soc_dims.size(); ++k)
            {
                const int q = lay.soc_dims[k], at = lay.soc_starts[k];
                const auto ub = u.segment(at, q);
                Eigen::VectorXd jw = w.wbar[k];
                jw.tail(q - 1) = -jw.tail(q - 1);
                Eigen::VectorXd ju = ub;
                ju.tail(q - 1) = -ju.tail(q - 1);
                v.segment(at, q) = (2.0 * jw * jw.dot(ub) - ju) / (w.eta[k] * w.eta[k]);
            }
            return v;
        }

        Eigen::VectorXd cone_identity(const ConeLayout &lay)
        {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(lay.m);
            e.head(lay.n_lin).setOnes();
            for (std::size_t k = 0; k < lay.soc_dims.size(); ++k)
                e(lay.soc_starts[k]) = 1.0;
            return e;
        }

        Eigen::VectorXd jordan_mul(const ConeLayout &lay, const Eigen::VectorXd &u,
                                   const Eigen::VectorXd &v)
        {
            Eigen::VectorXd r(lay.m);
            r.head(lay.n_lin) = u.head(lay.n_lin).cwiseProduct(v.head(lay.n_lin));
            for (std::size_t k = 0; k < lay.soc_dims.size(); ++k)
            {
                const int q = lay.soc_dims[k], at = lay.soc_starts[k];
                const auto ub = u.segment(at, q);
                const auto vb = v.segment(at, q);
                r(at) = ub.dot(vb);
                r.segment(at + 1, q - 1) =
                    ub(0) * vb.tail(q - 1) + vb(0) * ub.tail(q - 1);
            }
            return r;
        }

        /// Solves lambda o x = u for x.
        Eigen::VectorXd jordan_div(const ConeLayout &lay, const Eigen::VectorXd &lambda,
                                   const Eigen::VectorXd &u)
        {
            Eigen::VectorXd x(lay.m);
            x.head(lay.n_lin) = u.head(lay.n_lin).cwiseQuotient(lambda.head(lay.n_lin));
            for (std::size_t k = 0; k < lay.soc_dims.size(); ++k)
            {
                const int q = lay.soc_dims[k], at = lay.soc_starts[k];
                const auto lb = lambda.segment(at, q);
                const auto ub = u.segment(at, q);
                const double det = soc_det(lb);
                const double x0 = (lb(0) * ub(0) - lb.tail(q - 1).dot(ub.tail(q - 1))) / det;
                x(at) = x0;
                x.segment(at + 1, q - 1) = (ub.tail(q - 1) - x0 * lb.tail(q - 1)) / lb(0);
            }
            return x;
        }

        /// Largest step to the cone boundary from s along ds (may be +inf).
        double max_step(const ConeLayout &lay, const Eigen::VectorXd &s,
                        const Eigen::VectorXd &ds)
        {
            double alpha = kInf;
            for (int i = 0; i < lay.n_lin; ++i)
                if (ds(i) < 0.0)
                    alpha = std::min(alpha, -s(i) / ds(i));
            for (std::size_t k = 0; k < lay.soc_dims.size(); ++k)
            {
                const int q = lay.soc_dims[k], at = lay.soc_starts[k];
                const auto sb = s.segment(at, q);
                const auto db = ds.segment(at, q);
                if (db(0) < 0.0)
                    alpha = std::min(alpha, -sb(0) / db(0));
                // J(s + a*d) = c2 a^2 + c1 a + c0 with c0 = J(s) > 0.
                const double c2 = soc_det(db);
                const double c1 = 2.0 * (sb(0) * db(0) - sb.tail(q - 1).dot(db.tail(q - 1)));
                const double c0 = soc_det(sb);
                const double disc = c1 * c1 - 4.0 * c2 * c0;
                if (std::abs(c2) < 1e-300)
                {
                    if (c1 < 0.0)
                        alpha = std::min(alpha, -c0 / c1);
                    continue;
                }
                if (disc < 0.0)
                    continue; // no real root; stays inside along this direction
                const double sq = std::sqrt(disc);
                // Numerically stable smallest positive root.
                const double r1 = (-c1 - sq) / (2.0 * c2);
                const double r2 = (-c1 + sq) / (2.0 * c2);
                double root = kInf;
                if (r1 > 0.0)
                    root = std::min(root, r1);
                if (r2 > 0.0)
                    root = std::min(root, r2);
                alpha = std::min(alpha, root);
            }
            return alpha;
        }

        /// Shifts r into the interior of the cone along the identity.
        Eigen::VectorXd bring_to_cone(const ConeLayout &lay, const Eigen::VectorXd &r)
        {
            double t = kInf;
            for (int i = 0; i < lay.n_lin; ++i)
                t = std::min(t, r(i));
            for (std::size_t k = 0; k < lay.soc_dims.size(); ++k)
            {
                const int q = lay.soc_dims[k], at = lay.soc_starts[k];
                t = std::min(t, r(at) - r.segment(at + 1, q - 1).norm());
            }
            if (t > 1e-8)
                return r;
            return r + (1.0 - t) * cone_identity(lay);
        }

        /// Reduced KKT solver: factors G' W^-2 G (+ Schur complement for the
        /// equality block) and solves
        ///   A'y + G'z = r1,  A x = r2,  G x - W^2 z = r3.
        class KktSolver
        {
          public:
            KktSolver(const StandardConic &sc, const ConeLayout &lay, double reg)
                : sc_(sc), lay_(lay), reg_(reg)
            {
                const int n = sc.n;
                // Linear rows kept as index/value lists for cheap rank-1 updates.
                lin_rows_.resize(static_cast<std::size_t>(lay.n_lin));
                Eigen::SparseMatrix<double, Eigen::RowMajor> gr(sc.G);
                for (int r = 0; r < lay.n_lin; ++r)
                    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gr, r);
                         it; ++it)
                        lin_rows_[static_cast<std::size_t>(r)].emplace_back(
                            static_cast<int>(it.col()), it.value());

                // Per SOC block: row lists, plus the iteration-invariant part
                // Gb'Gb - 2 g0 g0' of Gb' (-J) Gb.
                for (std::size_t k = 0; k < lay.soc_dims.size(); ++k)
                {
                    const int q = lay.soc_dims[k], at = lay.soc_starts[k];
                    std::vector<std::vector<std::pair<int, double>>> rows(
                        static_cast<std::size_t>(q));
                    for (int r = 0; r < q; ++r)
                        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator
                                 it(gr, at + r);
                             it; ++it)
                            rows[static_cast<std::size_t>(r)].emplace_back(
                                static_cast<int>(it.col()), it.value());

                    Eigen::MatrixXd stat = Eigen::MatrixXd::Zero(n, n);
                    Eigen::VectorXd g0 = Eigen::VectorXd::Zero(n);
                    for (const auto &[i, v] : rows[0])
                        g0(i) = v;
                    for (int r = 0; r < q; ++r)
                        for (const auto &[i, vi] : rows[static_cast<std::size_t>(r)])
                            for (const auto &[j, vj] : rows[static_cast<std::size_t>(r)])
                                stat(i, j) += vi * vj;
                    stat.noalias() -= 2.0 * g0 * g0.transpose();
                    soc_rows_.push_back(std::move(rows));
                    soc_static_.push_back(std::move(stat));
                }
                if (sc.p > 0)
                    a_dense_ = Eigen::MatrixXd(sc.A);
            }

            bool factor(const Scaling &w)
            {
                scaling_ = &w;
                const int n = sc_.n;
                Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
                for (int r = 0; r < lay_.n_lin; ++r)
                {
                    const double coef = 1.0 / (w.w_lin(r) * w.w_lin(r));
                    for (const auto &[i, vi] : lin_rows_[static_cast<std::size_t>(r)])
                        for (const auto &[j, vj] : lin_rows_[static_cast<std::size_t>(r)])
                            h(i, j) += coef * vi * vj;
                }
                for (std::size_t k = 0; k < lay_.soc_dims.size(); ++k)
                {
                    const double inv_eta2 = 1.0 / (w.eta[k] * w.eta[k]);
                    h.noalias() += inv_eta2 * soc_static_[k];
                    // u = Gb' (J wbar)
                    Eigen::VectorXd jw = w.wbar[k];
                    jw.tail(jw.size() - 1) = -jw.tail(jw.size() - 1);
                    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
                    const auto &rows = soc_rows_[k];
                    for (int r = 0; r < lay_.soc_dims[k]; ++r)
                        for (const auto &[i, v] : rows[static_cast<std::size_t>(r)])
                            u(i) += v * jw(r);
                    h.noalias() += (2.0 * inv_eta2) * u * u.transpose();
                }
                const double diag_scale = h.diagonal().cwiseAbs().maxCoeff();
                h.diagonal().array() += reg_ * (1.0 + diag_scale);

                hfac_.compute(h);
                if (hfac_.info() != Eigen::Success)
                    return false;
                if (sc_.p > 0)
                {
                    hinv_at_ = hfac_.solve(a_dense_.transpose());
                    Eigen::MatrixXd schur = a_dense_ * hinv_at_;
                    schur_.compute(schur);
                    if (schur_.info() != Eigen::Success)
                        return false;
                }
                return true;
            }

            void solve(const Eigen::VectorXd &r1, const Eigen::VectorXd &r2,
                       const Eigen::VectorXd &r3, Eigen::VectorXd &x,
                       Eigen::VectorXd &y, Eigen::VectorXd &z, int refine = 1) const
            {
                solve_once(r1, r2, r3, x, y, z);
                for (int it = 0; it < refine; ++it)
                {
                    Eigen::VectorXd e1 = r1 - sc_.G.transpose() * z;
                    if (sc_.p > 0)
                        e1 -= a_dense_.transpose() * y;
                    Eigen::VectorXd e2 =
                        sc_.p > 0 ? Eigen::VectorXd(r2 - a_dense_ * x) : r2;
                    Eigen::VectorXd e3 =
                        r3 - sc_.G * x + apply_Wsq(lay_, *scaling_, z);
                    Eigen::VectorXd cx, cy, cz;
                    solve_once(e1, e2, e3, cx, cy, cz);
                    x += cx;
                    if (sc_.p > 0)
                        y += cy;
                    z += cz;
                }
            }

          private:
            void solve_once(const Eigen::VectorXd &r1, const Eigen::VectorXd &r2,
                            const Eigen::VectorXd &r3, Eigen::VectorXd &x,
                            Eigen::VectorXd &y, Eigen::VectorXd &z) const
            {
                const Eigen::VectorXd t =
                    r1 + sc_.G.transpose() * apply_Wsq_inv(lay_, *scaling_, r3);
                if (sc_.p > 0)
                {
                    const Eigen::VectorXd hit = hfac_.solve(t);
                    y = schur_.solve(a_dense_ * hit - r2);
                    x = hfac_.solve(t - a_dense_.transpose() * y);
                }
                else
                {
                    y.resize(0);
                    x = hfac_.solve(t);
                }
                z = apply_Wsq_inv(lay_, *scaling_, sc_.G * x - r3);
            }

            const StandardConic &sc_;
            const ConeLayout &lay_;
            double reg_;
            std::vector<std::vector<std::pair<int, double>>> lin_rows_;
            std::vector<std::vector<std::vector<std::pair<int, double>>>> soc_rows_;
            std::vector<Eigen::MatrixXd> soc_static_;
            Eigen::MatrixXd a_dense_;
            Eigen::LDLT<Eigen::MatrixXd> hfac_;
            Eigen::MatrixXd hinv_at_;
            Eigen::LDLT<Eigen::MatrixXd> schur_;
            const Scaling *scaling_ = nullptr;
        };

    } // namespace

    SolveOutcome solve_standard(const StandardConic &sc, const SolveOptions &opts)
    {
        const auto t_start = std::chrono::steady_clock::now();
        auto elapsed = [&] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                 t_start)
                .count();
        };

        SolveOutcome out;
        if (sc.trivially_infeasible)
        {
            out.status = SolveStatus::Infeasible;
            out.message = sc.note;
            out.seconds = elapsed();
            return out;
        }
        if (sc.trivially_solved || sc.n == 0)
        {
            out.status = SolveStatus::Optimal;
            out.x = sc.recover(Eigen::VectorXd::Zero(0));
            out.objective = sc.obj_offset;
            out.seconds = elapsed();
            return out;
        }
        if (sc.m == 0)
        {
            out.status = SolveStatus::NumericalFailure;
            out.message = "no inequality constraints; problem is not in IPM form";
            out.seconds = elapsed();
            return out;
        }

        const ConeLayout lay = make_layout(sc);
        KktSolver kkt(sc, lay, opts.static_reg);

        const double resx0 = std::max(1.0, sc.c.norm());
        const double resy0 = std::max(1.0, sc.b.norm());
        const double resz0 = std::max(1.0, sc.h.norm());

        // Initialization from two identity-scaled KKT solves.
        Eigen::VectorXd x, y, z, s;
        {
            const Scaling wi = identity_scaling(lay);
            if (!kkt.factor(wi))
            {
                out.status = SolveStatus::NumericalFailure;
                out.message = "initial KKT factorization failed";
                out.seconds = elapsed();
                return out;
            }
            Eigen::VectorXd z0;
            kkt.solve(Eigen::VectorXd::Zero(sc.n), sc.b, sc.h, x, y, z0);
            s = bring_to_cone(lay, -z0);
            Eigen::VectorXd xd, yd, zd;
            kkt.solve(-sc.c, Eigen::VectorXd::Zero(sc.p), Eigen::VectorXd::Zero(lay.m),
                      xd, yd, zd);
            z = bring_to_cone(lay, zd);
            y = yd;
        }
        double tau = 1.0, kappa = 1.0;

        // Fallback candidates for when full accuracy cannot be reached.
        struct BestIterate
        {
            double merit = kInf;
            Eigen::VectorXd x;
            double pcost = 0.0;
            double pres = 0.0, dres = 0.0, relgap = 0.0, cgap = 0.0;
            int iter = 0;
        } best_opt;
        struct BestCertificate
        {
            double quality = kInf;
            Eigen::VectorXd y, z;
            double scale = 1.0;
        } best_inf;

        auto finish_inaccurate = [&](const std::string &why) {
            if (best_opt.merit < kInf && best_opt.pres <= opts.feastol_inacc &&
                best_opt.dres <= opts.feastol_inacc &&
                (best_opt.cgap <= opts.abstol_inacc ||
                 best_opt.relgap <= opts.reltol_inacc))
            {
                out.status = SolveStatus::Optimal;
                out.x = best_opt.x;
                out.objective = best_opt.pcost + sc.obj_offset;
                out.primal_residual = best_opt.pres;
                out.dual_residual = best_opt.dres;
                out.rel_gap = best_opt.relgap;
                out.message = "reduced-accuracy solution (" + why + ")";
                out.seconds = elapsed();
                return true;
            }
            if (best_inf.quality <= opts.feastol_inacc)
            {
                out.status = SolveStatus::Infeasible;
                out.certificate.resize(sc.p + lay.m);
                if (sc.p > 0)
                    out.certificate.head(sc.p) = best_inf.y / best_inf.scale;
                out.certificate.tail(lay.m) = best_inf.z / best_inf.scale;
                out.certificate_residual = best_inf.quality;
                out.message = "reduced-accuracy certificate (" + why + ")";
                out.seconds = elapsed();
                return true;
            }
            return false;
        };

        for (int iter = 0; iter <= opts.max_iterations; ++iter)
        {
            const double cx = sc.c.dot(x);
            const double by = sc.p > 0 ? sc.b.dot(y) : 0.0;
            const double hz = sc.h.dot(z);

            Eigen::VectorXd rx = sc.G.transpose() * z + sc.c * tau;
            if (sc.p > 0)
                rx += sc.A.transpose() * y;
            const Eigen::VectorXd ry =
                sc.p > 0 ? Eigen::VectorXd(sc.A * x - sc.b * tau) : Eigen::VectorXd();
            const Eigen::VectorXd rz = sc.G * x + s - sc.h * tau;
            const double rt = kappa + cx + by + hz;

            const double gap = s.dot(z);
            const double mu = (gap + tau * kappa) / (lay.degree + 1);

            const double pres =
                std::max(sc.p > 0 ? ry.norm() / resy0 : 0.0, rz.norm() / resz0) / tau;
            const double dres = rx.norm() / resx0 / tau;
            const double pcost = cx / tau;
            const double cgap = gap / (tau * tau);
            const double relgap = cgap / std::max(1.0, std::abs(pcost));

            out.iterations = iter;
            out.primal_residual = pres;
            out.dual_residual = dres;
            out.rel_gap = relgap;

            const double merit = std::max({pres, dres, relgap});
            if (merit < best_opt.merit)
            {
                best_opt.merit = merit;
                best_opt.x = sc.recover(x / tau);
                best_opt.pcost = pcost;
                best_opt.pres = pres;
                best_opt.dres = dres;
                best_opt.relgap = relgap;
                best_opt.cgap = cgap;
                best_opt.iter = iter;
            }

            if (pres <= opts.feastol && dres <= opts.feastol &&
                (cgap <= opts.abstol || relgap <= opts.reltol))
            {
                out.status = SolveStatus::Optimal;
                out.x = sc.recover(x / tau);
                out.objective = pcost + sc.obj_offset;
                out.seconds = elapsed();
                return out;
            }
            // Primal infeasibility certificate: A'y + G'z = 0, h'z + b'y < 0.
            if (hz + by < 0.0)
            {
                const double hres = (rx - sc.c * tau).norm();
                const double quality = hres / resx0 / (-(hz + by));
                if (quality < best_inf.quality)
                {
                    best_inf.quality = quality;
                    best_inf.y = y;
                    best_inf.z = z;
                    best_inf.scale = -(hz + by);
                }
                if (quality <= opts.feastol)
                {
                    out.status = SolveStatus::Infeasible;
                    out.certificate.resize(sc.p + lay.m);
                    if (sc.p > 0)
                        out.certificate.head(sc.p) = y / (-(hz + by));
                    out.certificate.tail(lay.m) = z / (-(hz + by));
                    out.certificate_residual = hres / (-(hz + by));
                    out.seconds = elapsed();
                    return out;
                }
            }
            // Dual infeasibility (primal unbounded): Ax = 0, Gx + s = 0, c'x < 0.
            if (cx < 0.0)
            {
                const double hres =
                    std::max(sc.p > 0 ? (ry + sc.b * tau).norm() / resy0 : 0.0,
                             (rz + sc.h * tau - s).norm() / resz0);
                if ((sc.G * x + s).norm() / resz0 / (-cx) <= opts.feastol &&
                    (sc.p > 0 ? (sc.A * x).norm() / resy0 / (-cx) : 0.0) <= opts.feastol)
                {
                    (void)hres;
                    out.status = SolveStatus::NumericalFailure;
                    out.message = "dual infeasible: objective unbounded below";
                    out.seconds = elapsed();
                    return out;
                }
            }
            if (iter == opts.max_iterations)
                break;

            const Scaling w = compute_scaling(lay, s, z);
            if (!w.ok || !kkt.factor(w))
            {
                if (finish_inaccurate("factorization breakdown"))
                    return out;
                out.status = SolveStatus::NumericalFailure;
                out.message = "scaling/factorization breakdown at iteration " +
                              std::to_string(iter);
                out.seconds = elapsed();
                return out;
            }

            Eigen::VectorXd x1, y1, z1;
            kkt.solve(-sc.c, sc.b, sc.h, x1, y1, z1);
            const double dtau_denom =
                sc.c.dot(x1) + (sc.p > 0 ? sc.b.dot(y1) : 0.0) + sc.h.dot(z1) -
                kappa / tau;

            auto direction = [&](double one_minus_sigma, const Eigen::VectorXd &bs,
                                 double bkap, Eigen::VectorXd &dx, Eigen::VectorXd &dy,
                                 Eigen::VectorXd &dz, Eigen::VectorXd &ds, double &dtau,
                                 double &dkap) {
                const Eigen::VectorXd ds_tilde = jordan_div(lay, w.lambda, bs);
                const Eigen::VectorXd bz_tilde =
                    -one_minus_sigma * rz - apply_W(lay, w, ds_tilde);
                Eigen::VectorXd u, v, wz;
                kkt.solve(-one_minus_sigma * rx,
                          sc.p > 0 ? Eigen::VectorXd(-one_minus_sigma * ry)
                                   : Eigen::VectorXd(),
                          bz_tilde, u, v, wz);
                const double num = -one_minus_sigma * rt - bkap / tau -
                                   (sc.c.dot(u) + (sc.p > 0 ? sc.b.dot(v) : 0.0) +
                                    sc.h.dot(wz));
                dtau = num / dtau_denom;
                dx = u + dtau * x1;
                if (sc.p > 0)
                    dy = v + dtau * y1;
                dz = wz + dtau * z1;
                ds = apply_W(lay, w, ds_tilde - apply_W(lay, w, dz));
                dkap = (bkap - kappa * dtau) / tau;
            };

            // Affine (predictor) direction.
            Eigen::VectorXd dxa, dya, dza, dsa;
            double dtaua = 0.0, dkapa = 0.0;
            const Eigen::VectorXd lam_sq = jordan_mul(lay, w.lambda, w.lambda);
            direction(1.0, -lam_sq, -tau * kappa, dxa, dya, dza, dsa, dtaua, dkapa);

            double alpha = max_step(lay, s, dsa);
            alpha = std::min(alpha, max_step(lay, z, dza));
            if (dtaua < 0.0)
                alpha = std::min(alpha, -tau / dtaua);
            if (dkapa < 0.0)
                alpha = std::min(alpha, -kappa / dkapa);
            alpha = std::min(alpha, 1.0);
            const double sigma =
                std::pow(std::clamp(1.0 - alpha, 0.0, 1.0), 3.0);

            // Combined (corrector) direction.
            const Eigen::VectorXd corr = jordan_mul(
                lay, apply_Winv(lay, w, dsa), apply_W(lay, w, dza));
            Eigen::VectorXd bs = -lam_sq - corr + sigma * mu * cone_identity(lay);
            const double bkap = -(tau * kappa + dtaua * dkapa - sigma * mu);
            Eigen::VectorXd dx, dy, dz, ds;
            double dtau = 0.0, dkap = 0.0;
            direction(1.0 - sigma, bs, bkap, dx, dy, dz, ds, dtau, dkap);

            double step = max_step(lay, s, ds);
            step = std::min(step, max_step(lay, z, dz));
            if (dtau < 0.0)
                step = std::min(step, -tau / dtau);
            if (dkap < 0.0)
                step = std::min(step, -kappa / dkap);
            step = std::min(opts.step_scale * step, 1.0);

            x += step * dx;
            if (sc.p > 0)
                y += step * dy;
            z += step * dz;
            s += step * ds;
            tau += step * dtau;
            kappa += step * dkap;
        }

        if (finish_inaccurate("iteration limit"))
            return out;
        out.status = SolveStatus::NumericalFailure;
        out.message = "iteration limit reached without convergence";
        out.seconds = elapsed();
        return out;
    }

    SolveOutcome solve_conic(const ConicProblem &p, const SolveOptions &opts)
    {
        return solve_standard(to_standard_form(p), opts);
    }

} // namespace cfisac
