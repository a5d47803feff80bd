// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "cfisac/socp.hpp"

namespace cfisac
{

    struct BnbOptions
    {
        long max_nodes = 100'000;
        double int_tol = 1e-6;
        double feas_tol = 1e-7;
        SolveOptions conic;
    };

    /// Best-first branch and bound over the binary variables of a MipProblem.
    /// Branching picks the most fractional binary; with integral_objective set,
    /// nodes are pruned as soon as their bound cannot improve the incumbent by
    /// a whole unit.
    SolveOutcome branch_and_bound(const MipProblem &m, const BnbOptions &opts = {});

} // namespace cfisac
