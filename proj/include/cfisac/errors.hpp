// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace cfisac
{

    /// Configuration rejected by an invariant check (bad sizes, non-positive powers, ...).
    class InvalidConfig : public std::invalid_argument
    {
      public:
        explicit InvalidConfig(const std::string &msg) : std::invalid_argument(msg) {}
    };

    /// An AP coincides with the target (zero range) or similar degenerate layout.
    class DegenerateGeometry : public std::domain_error
    {
      public:
        explicit DegenerateGeometry(const std::string &msg) : std::domain_error(msg) {}
    };

    /// A channel realization has exactly zero norm; maximum-ratio direction undefined.
    class ZeroChannel : public std::domain_error
    {
      public:
        explicit ZeroChannel(const std::string &msg) : std::domain_error(msg) {}
    };

    /// An interference matrix is too indefinite to be a noisy PSD sample mean.
    class NotPSD : public std::domain_error
    {
      public:
        explicit NotPSD(const std::string &msg) : std::domain_error(msg) {}
    };

    /// Fisher information is singular for the requested TX/RX split.
    class SingularFIM : public std::domain_error
    {
      public:
        explicit SingularFIM(const std::string &msg) : std::domain_error(msg) {}
    };

    /// Alternating optimization exhausted its random-restart budget.
    class ExhaustedRestarts : public std::runtime_error
    {
      public:
        explicit ExhaustedRestarts(const std::string &msg) : std::runtime_error(msg) {}
    };

    /// Exhaustive enumeration refused: instance above the configured cap.
    class TooLarge : public std::invalid_argument
    {
      public:
        explicit TooLarge(const std::string &msg) : std::invalid_argument(msg) {}
    };

    /// Aggregation called on an empty record set.
    class EmptyInput : public std::invalid_argument
    {
      public:
        explicit EmptyInput(const std::string &msg) : std::invalid_argument(msg) {}
    };

} // namespace cfisac
