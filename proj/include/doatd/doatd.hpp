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

#ifndef DOATD_DOATD_HPP
#define DOATD_DOATD_HPP

#include "doatd/aml.hpp"
#include "doatd/crb.hpp"
#include "doatd/csi_io.hpp"
#include "doatd/doa_only.hpp"
#include "doatd/monte_carlo.hpp"
#include "doatd/signal_model.hpp"

#endif
