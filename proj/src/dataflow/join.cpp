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

#include "dfp/dataflow/join.hpp"

namespace dfp::dataflow {

FullOuterJoin::FullOuterJoin(Source<MsgTuple>& msgs, storage::VertexIndex& idx) : msgs_(msgs), scan_(idx.scan()) {
  advance_msg();
  advance_vertex();
}

void FullOuterJoin::advance_msg() {
  MsgTuple t;
  if (msgs_.next(t)) {
    check_(t.vid);
    msg_ = std::move(t);
  } else {
    msg_.reset();
  }
}

void FullOuterJoin::advance_vertex() {
  VertexTuple v;
  if (scan_.next(v)) {
    vertex_ = std::move(v);
  } else {
    vertex_.reset();
  }
}

// The scan is already past the returned vid, so callers may write it back before the next
// call.
bool FullOuterJoin::next(JoinedTuple& out) {
  if (!msg_ && !vertex_) return false;
  if (msg_ && (!vertex_ || msg_->vid < vertex_->vid)) {
    out.vid = msg_->vid;
    out.payload = std::move(msg_->payload);
    out.vertex.reset();
    advance_msg();
  } else if (!msg_ || vertex_->vid < msg_->vid) {
    out.vid = vertex_->vid;
    out.payload.reset();
    out.vertex = std::move(vertex_);
    advance_vertex();
  } else {
    out.vid = msg_->vid;
    out.payload = std::move(msg_->payload);
    out.vertex = std::move(vertex_);
    advance_msg();
    advance_vertex();
  }
  return true;
}

LeftOuterJoin::LeftOuterJoin(Source<MsgTuple>& in, storage::VertexIndex& idx) : in_(in), probe_(idx.prober()) {}

bool LeftOuterJoin::next(JoinedTuple& out) {
  MsgTuple t;
  if (!in_.next(t)) return false;
  check_(t.vid);
  out.vid = t.vid;
  out.payload = std::move(t.payload);
  out.vertex = probe_.find(t.vid);
  return true;
}

void MergeMsgVid::pull_msg() {
  MsgTuple t;
  if (msgs_.next(t)) {
    msg_check_(t.vid);
    msg_ = std::move(t);
  } else {
    msg_.reset();
  }
}

void MergeMsgVid::pull_vid() {
  MsgTuple t;
  if (vids_.next(t)) {
    vid_check_(t.vid);
    vid_ = std::move(t);
  } else {
    vid_.reset();
  }
}

bool MergeMsgVid::next(MsgTuple& out) {
  if (!started_) {
    started_ = true;
    pull_msg();
    pull_vid();
  }
  if (!msg_ && !vid_) return false;
  if (msg_ && (!vid_ || msg_->vid <= vid_->vid)) {
    if (vid_ && vid_->vid == msg_->vid) pull_vid();
    out = std::move(*msg_);
    pull_msg();
  } else {
    out = std::move(*vid_);
    pull_vid();
  }
  return true;
}

}  // namespace dfp::dataflow
