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
#include <string>

#include "dfp/ft/failure.hpp"
#include "dfp/runtime/state.hpp"

namespace dfp::ft {

struct CheckpointInfo {
  std::uint64_t superstep = 0;
  std::filesystem::path dir;
  int partitions = 0;
  bool has_vid = false;
};

std::filesystem::path checkpoint_dir(const std::filesystem::path& root, std::uint64_t superstep);

/// Writes `<root>/sp-<s>/` from the state after superstep s: the Vertex relation, Msg_{s+1}
/// and, for left outer plans, Vid_{s+1}. The COMMITTED marker is written last.
CheckpointInfo write_checkpoint(runtime::EngineState& state, const std::filesystem::path& root,
                                std::uint64_t superstep, FailureInjector* injector = nullptr);

/// True when the marker exists and every file matches its manifest hash.
bool verify_checkpoint(const std::filesystem::path& dir, std::string* why = nullptr);

/// The newest checkpoint that is sealed and intact.
std::optional<CheckpointInfo> latest_sealed_checkpoint(const std::filesystem::path& root);

/// Deletes all but the newest `keep` sealed checkpoints and every unsealed one.
void prune_checkpoints(const std::filesystem::path& root, std::size_t keep);

/// Rebuilds the state from `ckpt` onto `pmap`, which may have a different partition count:
/// every relation is rescanned, repartitioned, merged into vid order and bulk loaded.
/// Afterwards the state is at superstep ckpt.superstep + 1.
void recover(runtime::EngineState& state, const CheckpointInfo& ckpt, const runtime::PartitionMap& pmap);

std::string sha256_file(const std::filesystem::path& file);
std::string sha256_hex(std::string_view data);

}  // namespace dfp::ft
