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

#include "dfp/ft/failure.hpp"

#include <algorithm>
#include <string>

#include "dfp/common.hpp"

namespace dfp::ft {

void FailureInjector::fail_worker_at(int worker, std::uint64_t superstep) {
  std::lock_guard lock(mu_);
  workers_.push_back({worker, superstep});
}

void FailureInjector::fail_checkpoint_at(std::uint64_t superstep) {
  std::lock_guard lock(mu_);
  checkpoints_.push_back(superstep);
}

void FailureInjector::on_superstep_start(int worker, std::uint64_t superstep) {
  std::lock_guard lock(mu_);
  for (auto& e : workers_) {
    if (!e.fired && e.worker == worker && e.superstep == superstep) {
      e.fired = true;
      ++fired_;
      throw InterruptionError("injected failure of worker " + std::to_string(worker) + " at superstep " +
                                  std::to_string(superstep),
                              worker);
    }
  }
}

bool FailureInjector::take_checkpoint_failure(std::uint64_t superstep) {
  std::lock_guard lock(mu_);
  auto it = std::find(checkpoints_.begin(), checkpoints_.end(), superstep);
  if (it == checkpoints_.end()) return false;
  checkpoints_.erase(it);
  ++fired_;
  return true;
}

std::size_t FailureInjector::fired() const {
  std::lock_guard lock(mu_);
  return fired_;
}

}  // namespace dfp::ft
