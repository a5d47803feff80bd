// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "cfisac/conic.hpp"

namespace cfisac
{

    struct SolveOptions
    {
        double feastol = 1e-8;
        double reltol = 1e-8;
        double abstol = 1e-9;
        // Relaxed thresholds used as a fallback: when the iteration limit or a
        // factorization breakdown is hit, the best iterate seen so far is
        // still accepted if it meets these.
        double feastol_inacc = 1e-5;
        double reltol_inacc = 5e-6;
        double abstol_inacc = 5e-7;
        int max_iterations = 200;
        double step_scale = 0.99;
        double static_reg = 1e-10;
    };

    /// Primal-dual interior-point solve of a continuous conic problem
    /// (homogeneous self-dual embedding, Nesterov-Todd scaling).
    SolveOutcome solve_conic(const ConicProblem &p, const SolveOptions &opts = {});

    /// Same engine on an already-converted standard form.
    SolveOutcome solve_standard(const StandardConic &sc, const SolveOptions &opts = {});

} // namespace cfisac
