// Copyright 2026 The mpsgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "mpsgan/errors.hpp"
#include "mpsgan/rng.hpp"
#include "mpsgan/numerics.hpp"
#include "mpsgan/embedding.hpp"
#include "mpsgan/mps.hpp"
#include "mpsgan/model_io.hpp"
#include "mpsgan/sampling.hpp"
#include "mpsgan/optimizer.hpp"
#include "mpsgan/data.hpp"
#include "mpsgan/training.hpp"
#include "mpsgan/discriminator.hpp"
#include "mpsgan/metrics.hpp"
#include "mpsgan/gan.hpp"
#include "mpsgan/experiments.hpp"
