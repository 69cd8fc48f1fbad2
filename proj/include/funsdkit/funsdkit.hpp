// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "funsdkit/annotation.hpp"
#include "funsdkit/dataset.hpp"
#include "funsdkit/error.hpp"
#include "funsdkit/graph.hpp"
#include "funsdkit/image.hpp"
#include "funsdkit/lint.hpp"
#include "funsdkit/metrics.hpp"
#include "funsdkit/pairing.hpp"
#include "funsdkit/raster.hpp"
#include "funsdkit/render.hpp"
#include "funsdkit/revise.hpp"
#include "funsdkit/split.hpp"
