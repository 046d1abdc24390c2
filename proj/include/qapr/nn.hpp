// SPDX-License-Identifier: MIT

/**
 * @file nn.hpp
 * @brief Toy-scale solution-aware encoder: forward pass, gradients, checkpoints and policy routing.
 */

#pragma once

#include "qapr/generate.hpp"
#include "qapr/nn/checkpoint.hpp"
#include "qapr/nn/encoder.hpp"
#include "qapr/nn/gradcheck.hpp"
#include "qapr/nn/policy.hpp"
#include "qapr/nn/tape.hpp"
#include "qapr/nn/tensor.hpp"
