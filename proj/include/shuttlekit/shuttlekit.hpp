// Copyright (C) 2026 shuttlekit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "shuttlekit/assembly.hpp"
#include "shuttlekit/events.hpp"
#include "shuttlekit/image.hpp"
#include "shuttlekit/optical_flow.hpp"
#include "shuttlekit/prng.hpp"
#include "shuttlekit/rally.hpp"
#include "shuttlekit/scoring.hpp"
#include "shuttlekit/synth.hpp"
#include "shuttlekit/util.hpp"
