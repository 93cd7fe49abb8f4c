/*
 * Copyright 2026 The dfpregel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dfp/api.hpp"

namespace dfp::runtime {

std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view text);

/// The durable GS record lives at `<workdir>/gs.json`; every version is also kept as
/// `<workdir>/gs/gs-<superstep>.json` so recovery can restore the GS of a checkpoint.
void write_gs(const std::filesystem::path& work_dir, const GlobalState& gs);
GlobalState read_gs(const std::filesystem::path& file);
std::filesystem::path gs_history_path(const std::filesystem::path& work_dir, std::uint64_t superstep);

/// True when every vertex voted to halt and no message is in flight.
inline bool evaluate_termination(bool halt_and, std::uint64_t msg_count) { return halt_and && msg_count == 0; }

/// Folds each partition's contributions, then the partials. nullopt when nobody
/// contributed.
std::optional<Blob> two_stage_aggregate(const std::vector<std::vector<Blob>>& per_partition, const AggregateFn& fn);

}  // namespace dfp::runtime
