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

#include "dfp/runtime/global_state.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <json.hpp>

namespace dfp::runtime {

std::string base64_encode(std::string_view data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(data.data()), static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.empty()) return {};
  if (text.size() % 4 != 0) throw IoError("malformed base64 text");
  std::string out(3 * text.size() / 4, '\0');
  int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw IoError("malformed base64 text");
  std::size_t pad = 0;
  if (text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::filesystem::path gs_history_path(const std::filesystem::path& work_dir, std::uint64_t superstep) {
  return work_dir / "gs" / ("gs-" + std::to_string(superstep) + ".json");
}

namespace {

void write_json_atomically(const std::filesystem::path& file, const nlohmann::json& j) {
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    os << j.dump() << "\n";
    if (!os) throw IoError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

}  // namespace

void write_gs(const std::filesystem::path& work_dir, const GlobalState& gs) {
  nlohmann::json j{{"halt", gs.halt}, {"aggregate", base64_encode(gs.aggregate)}, {"superstep", gs.superstep}};
  std::filesystem::create_directories(work_dir / "gs");
  write_json_atomically(gs_history_path(work_dir, gs.superstep), j);
  write_json_atomically(work_dir / "gs.json", j);
}

GlobalState read_gs(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw IoError("cannot read global state " + file.string());
  try {
    auto j = nlohmann::json::parse(is);
    GlobalState gs;
    gs.halt = j.at("halt").get<bool>();
    gs.aggregate = base64_decode(j.at("aggregate").get<std::string>());
    gs.superstep = j.at("superstep").get<std::uint64_t>();
    return gs;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed global state " + file.string() + ": " + e.what());
  }
}

std::optional<Blob> two_stage_aggregate(const std::vector<std::vector<Blob>>& per_partition, const AggregateFn& fn) {
  std::vector<Blob> partials;
  for (const auto& contributions : per_partition) {
    if (!contributions.empty()) partials.push_back(fn(contributions));
  }
  if (partials.empty()) return std::nullopt;
  return fn(partials);
}

}  // namespace dfp::runtime
