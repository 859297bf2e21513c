// Copyright 2026 The Gestural Chart Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Everything except the WebSocket transport (gce/server.hpp, needs Boost).

#include "gce/chart.hpp"
#include "gce/engine.hpp"
#include "gce/events.hpp"
#include "gce/geometry.hpp"
#include "gce/hand.hpp"
#include "gce/service.hpp"
#include "gce/session_io.hpp"
#include "gce/splitmix.hpp"
#include "gce/tracker.hpp"
