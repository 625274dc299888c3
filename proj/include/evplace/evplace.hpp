// Copyright 2026 The evplace Authors.
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

// Convenience header pulling in the whole library.

#ifndef EVPLACE_EVPLACE_HPP_
#define EVPLACE_EVPLACE_HPP_

#include "evplace/costs.hpp"
#include "evplace/error.hpp"
#include "evplace/evaluation.hpp"
#include "evplace/forecast.hpp"
#include "evplace/grid_model.hpp"
#include "evplace/heatmap.hpp"
#include "evplace/optimizer.hpp"
#include "evplace/synth.hpp"

#endif  // EVPLACE_EVPLACE_HPP_
