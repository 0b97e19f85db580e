// Copyright 2026 The fairscan Authors.
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

#include "fairscan/agreement.hpp"
#include "fairscan/common.hpp"
#include "fairscan/decomposition.hpp"
#include "fairscan/effectiveness.hpp"
#include "fairscan/fairness.hpp"
#include "fairscan/fixtures.hpp"
#include "fairscan/grouping.hpp"
#include "fairscan/matcher.hpp"
#include "fairscan/prep.hpp"
#include "fairscan/report.hpp"
