// SPDX-License-Identifier: Apache-2.0
//
// doatd - joint DOA and time-delay estimation for frequency-domain array data
// Copyright (C) 2026 The doatd authors
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

#ifndef DOATD_ERROR_HPP
#define DOATD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace doatd
{
    // Invalid configuration or inputs that violate a type invariant.
    class config_error : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Numerically degenerate problem: singular Gram/information matrix,
    // rank-deficient steering matrix, zero input vector.
    class degenerate_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // File could not be read, written or parsed.
    class io_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}

#endif
