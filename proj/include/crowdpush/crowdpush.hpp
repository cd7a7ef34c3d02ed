// Copyright 2026 The crowdpush Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "crowdpush/annotate.hpp"
#include "crowdpush/classifier.hpp"
#include "crowdpush/dataset.hpp"
#include "crowdpush/error.hpp"
#include "crowdpush/evaluation.hpp"
#include "crowdpush/geometry.hpp"
#include "crowdpush/image.hpp"
#include "crowdpush/pipeline.hpp"
#include "crowdpush/region.hpp"
#include "crowdpush/trajectory.hpp"
