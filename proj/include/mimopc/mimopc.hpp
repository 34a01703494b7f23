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

#include "mimopc/common.hpp"
#include "mimopc/network.hpp"
#include "mimopc/pilots.hpp"
#include "mimopc/channel.hpp"
#include "mimopc/rates.hpp"
#include "mimopc/power_control.hpp"
#include "mimopc/evaluation.hpp"
#include "mimopc/io.hpp"
