// Copyright 2026 The ucmtrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "ucmtrack/binary_program.hpp"
#include "ucmtrack/config.hpp"
#include "ucmtrack/hierarchy.hpp"
#include "ucmtrack/io.hpp"
#include "ucmtrack/lineage.hpp"
#include "ucmtrack/linking.hpp"
#include "ucmtrack/lp_format.hpp"
#include "ucmtrack/metrics.hpp"
#include "ucmtrack/parallel.hpp"
#include "ucmtrack/pipeline.hpp"
#include "ucmtrack/preprocess.hpp"
#include "ucmtrack/solver.hpp"
#include "ucmtrack/synth.hpp"
#include "ucmtrack/tensor.hpp"
#include "ucmtrack/tracking_model.hpp"
#include "ucmtrack/windowed.hpp"
