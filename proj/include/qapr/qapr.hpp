// SPDX-License-Identifier: MIT
// Everything: circuits, devices, the routing environment, routers, the encoder and the benchmark harness.

#pragma once

#include "qapr/bench.hpp"
#include "qapr/circuit.hpp"
#include "qapr/device.hpp"
#include "qapr/env.hpp"
#include "qapr/errors.hpp"
#include "qapr/generate.hpp"
#include "qapr/nn.hpp"
#include "qapr/parse.hpp"
#include "qapr/qap.hpp"
#include "qapr/replay.hpp"
#include "qapr/routers.hpp"
