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

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

#include "dfp/dataflow/stream.hpp"

namespace dfp::dataflow {

/// Byte encoding of tuples crossing a materializing channel.
template <class T>
struct TupleCodec;

template <>
struct TupleCodec<MsgTuple> {
  static void encode(std::string& out, const MsgTuple& t);
  /// Decodes one tuple starting at `p`; false (and `p` untouched) when incomplete.
  static bool decode(const char*& p, const char* end, MsgTuple& out);
  static std::size_t size(const MsgTuple& t) { return 13 + (t.payload ? t.payload->size() : 0); }
};

template <>
struct TupleCodec<Mutation> {
  static void encode(std::string& out, const Mutation& m);
  static bool decode(const char*& p, const char* end, Mutation& out);
  static std::size_t size(const Mutation& m);
};

struct ChannelOptions {
  std::size_t capacity_batches = 64;
  std::size_t batch_bytes = 32 << 10;
  /// Where sender-side materialized files go.
  std::filesystem::path tmp_dir;
};

/// Bounded FIFO of tuple batches with any number of producers and one consumer.
template <class T>
class Channel {
 public:
  Channel(std::size_t capacity_batches, int producers)
      : capacity_(std::max<std::size_t>(capacity_batches, 1)), open_producers_(producers) {}

  /// Blocks while full.
  void push(std::vector<T>&& batch) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return aborted_ || queue_.size() < capacity_; });
    if (aborted_) throw ChannelClosed("channel closed by the consumer side");
    queue_.push_back(std::move(batch));
    not_empty_.notify_one();
  }

  void producer_done() {
    std::lock_guard lock(mu_);
    if (--open_producers_ <= 0) not_empty_.notify_all();
  }

  /// False once every producer is done and the queue is drained.
  bool pop(std::vector<T>& out) {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return aborted_ || !queue_.empty() || open_producers_ <= 0; });
    if (aborted_) throw ChannelClosed("channel closed by the producer side");
    if (queue_.empty()) return false;
    out = std::move(queue_.front());
    queue_.pop_front();
    not_full_.notify_one();
    return true;
  }

  void abort() {
    std::lock_guard lock(mu_);
    aborted_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

 private:
  std::size_t capacity_;
  int open_producers_;
  bool aborted_ = false;
  std::deque<std::vector<T>> queue_;
  std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
};

template <class T>
class ChannelSource final : public Source<T> {
 public:
  explicit ChannelSource(Channel<T>& ch) : ch_(ch) {}
  bool next(T& out) override {
    while (pos_ == batch_.size()) {
      batch_.clear();
      pos_ = 0;
      if (!ch_.pop(batch_)) return false;
    }
    out = std::move(batch_[pos_++]);
    return true;
  }

 private:
  Channel<T>& ch_;
  std::vector<T> batch_;
  std::size_t pos_ = 0;
};

/// Producer endpoint of one channel.
template <class T>
class ChannelWriter {
 public:
  virtual ~ChannelWriter() = default;
  virtual void write(const T& t) = 0;
  virtual void close() = 0;
};

/// Fully pipelined policy: batches go straight into the channel and block when it is full.
template <class T>
class PipelinedWriter final : public ChannelWriter<T> {
 public:
  PipelinedWriter(Channel<T>& ch, std::size_t batch_bytes, DataflowCounters* counters)
      : ch_(ch), batch_bytes_(batch_bytes), counters_(counters) {}

  void write(const T& t) override {
    batch_.push_back(t);
    auto sz = TupleCodec<T>::size(t);
    bytes_ += sz;
    if (counters_) {
      counters_->channel_tuples.fetch_add(1, std::memory_order_relaxed);
      counters_->channel_bytes.fetch_add(sz, std::memory_order_relaxed);
    }
    if (bytes_ >= batch_bytes_) flush();
  }

  void close() override {
    if (closed_) return;
    flush();
    closed_ = true;
    ch_.producer_done();
  }

 private:
  void flush() {
    if (batch_.empty()) return;
    ch_.push(std::move(batch_));
    batch_ = {};
    bytes_ = 0;
  }

  Channel<T>& ch_;
  std::size_t batch_bytes_;
  DataflowCounters* counters_;
  std::vector<T> batch_;
  std::size_t bytes_ = 0;
  bool closed_ = false;
};

/// Append-only spool file shared between a writer and a tailing reader.
class Spool {
 public:
  explicit Spool(const std::filesystem::path& path);
  ~Spool();
  Spool(const Spool&) = delete;
  Spool& operator=(const Spool&) = delete;

  /// Appends complete records and publishes them to the reader.
  void append(const std::string& bytes);
  void finish();
  void abort();
  /// Blocks until bytes past `offset` are published or the spool ends. Returns the
  /// number of bytes copied into `out` (0 at the end).
  std::size_t read(std::uint64_t offset, std::size_t max_bytes, std::string& out);

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t committed_ = 0;
  bool finished_ = false;
  bool aborted_ = false;
};

/// Sender-side materializing policy: the producer appends to a local spool file and never
/// blocks; a drain thread tails the file into the bounded channel.
template <class T>
class MaterializingWriter final : public ChannelWriter<T> {
 public:
  MaterializingWriter(Channel<T>& ch, const std::filesystem::path& spool_path, std::size_t batch_bytes,
                      DataflowCounters* counters)
      : ch_(ch), spool_(spool_path), batch_bytes_(batch_bytes), counters_(counters) {
    drain_ = std::thread([this] { drain_loop(); });
  }

  ~MaterializingWriter() override {
    spool_.abort();
    if (drain_.joinable()) drain_.join();
  }

  void write(const T& t) override {
    auto before = buf_.size();
    TupleCodec<T>::encode(buf_, t);
    if (counters_) {
      counters_->channel_tuples.fetch_add(1, std::memory_order_relaxed);
      counters_->channel_bytes.fetch_add(buf_.size() - before, std::memory_order_relaxed);
    }
    if (buf_.size() >= batch_bytes_) flush();
  }

  void close() override {
    if (closed_) return;
    flush();
    closed_ = true;
    spool_.finish();
  }

  /// Waits for the drain thread; rethrows its failure, if any.
  void join() {
    if (drain_.joinable()) drain_.join();
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void flush() {
    if (buf_.empty()) return;
    if (counters_) counters_->materialized_bytes.fetch_add(buf_.size(), std::memory_order_relaxed);
    spool_.append(buf_);
    buf_.clear();
  }

  void drain_loop() {
    try {
      std::uint64_t offset = 0;
      std::string chunk, carry;
      std::vector<T> batch;
      std::size_t batch_bytes = 0;
      for (;;) {
        std::size_t n = spool_.read(offset, std::max<std::size_t>(batch_bytes_, 64 << 10), chunk);
        if (n == 0) break;
        offset += n;
        carry.append(chunk);
        const char* p = carry.data();
        const char* end = p + carry.size();
        T t;
        while (TupleCodec<T>::decode(p, end, t)) {
          batch_bytes += TupleCodec<T>::size(t);
          batch.push_back(std::move(t));
          if (batch_bytes >= batch_bytes_) {
            ch_.push(std::move(batch));
            batch = {};
            batch_bytes = 0;
          }
        }
        carry.erase(0, static_cast<std::size_t>(p - carry.data()));
      }
      if (!carry.empty()) throw IoError("materialized channel ended inside a record");
      if (!batch.empty()) ch_.push(std::move(batch));
      ch_.producer_done();
    } catch (const ChannelClosed&) {
      // The consumer went away; nothing left to deliver.
    } catch (...) {
      error_ = std::current_exception();
      ch_.abort();
    }
  }

  Channel<T>& ch_;
  Spool spool_;
  std::size_t batch_bytes_;
  DataflowCounters* counters_;
  std::string buf_;
  bool closed_ = false;
  std::exception_ptr error_;
  std::thread drain_;
};

/// An m-to-n partitioning connector. The pipelined kind sends every tuple through one
/// shared FIFO per consumer; the merging kind keeps one materialized channel per
/// (producer, consumer) pair and merges them at the consumer by vid.
template <class T>
class Exchange {
 public:
  Exchange(int producers, int consumers, ConnectorKind kind, ChannelOptions opts,
           DataflowCounters* counters = nullptr)
      : m_(producers), n_(consumers), kind_(kind), opts_(std::move(opts)) {
    if (m_ < 1 || n_ < 1) throw ContractViolation("exchange needs at least one producer and one consumer");
    if (kind_ == ConnectorKind::PartitionPipelined) {
      for (int c = 0; c < n_; ++c) channels_.push_back(std::make_unique<Channel<T>>(opts_.capacity_batches, m_));
      for (int p = 0; p < m_; ++p) {
        std::vector<std::unique_ptr<ChannelWriter<T>>> ws;
        for (int c = 0; c < n_; ++c) {
          ws.push_back(std::make_unique<PipelinedWriter<T>>(*channels_[c], opts_.batch_bytes, counters));
        }
        senders_.push_back(std::make_unique<Sender>(std::move(ws), false, n_));
      }
      for (int c = 0; c < n_; ++c) {
        auto src = std::make_unique<ChannelSource<T>>(*channels_[c]);
        receivers_.push_back(src.get());
        owned_sources_.push_back(std::move(src));
      }
    } else {
      if (opts_.tmp_dir.empty()) throw ContractViolation("materializing connector needs a temp directory");
      std::filesystem::create_directories(opts_.tmp_dir);
      // channels_[p * n + c]
      for (int i = 0; i < m_ * n_; ++i) channels_.push_back(std::make_unique<Channel<T>>(opts_.capacity_batches, 1));
      for (int p = 0; p < m_; ++p) {
        std::vector<std::unique_ptr<ChannelWriter<T>>> ws;
        for (int c = 0; c < n_; ++c) {
          auto path = opts_.tmp_dir / ("xchg-" + std::to_string(serial()) + "-p" + std::to_string(p) + "-c" +
                                       std::to_string(c) + ".spool");
          auto w = std::make_unique<MaterializingWriter<T>>(*channels_[p * n_ + c], path, opts_.batch_bytes,
                                                           counters);
          materializers_.push_back(w.get());
          ws.push_back(std::move(w));
        }
        senders_.push_back(std::make_unique<Sender>(std::move(ws), true, n_));
      }
      for (int c = 0; c < n_; ++c) {
        std::vector<Source<T>*> ins;
        for (int p = 0; p < m_; ++p) {
          auto src = std::make_unique<ChannelSource<T>>(*channels_[p * n_ + c]);
          ins.push_back(src.get());
          owned_sources_.push_back(std::move(src));
        }
        auto merged = std::make_unique<MergeSource<T>>(std::move(ins), "merging connector input");
        receivers_.push_back(merged.get());
        owned_sources_.push_back(std::move(merged));
      }
    }
  }

  ~Exchange() { abort(); }

  class Sender {
   public:
    Sender(std::vector<std::unique_ptr<ChannelWriter<T>>> ws, bool sorted, int n)
        : writers_(std::move(ws)), sorted_(sorted), n_(n), check_("merging connector producer", false) {}

    void send(const T& t) {
      auto k = key_of(t);
      if (sorted_) check_(k);
      writers_[static_cast<std::size_t>(partition_fn(k, n_))]->write(t);
    }
    void finish() {
      for (auto& w : writers_) w->close();
    }

   private:
    std::vector<std::unique_ptr<ChannelWriter<T>>> writers_;
    bool sorted_;
    int n_;
    OrderCheck check_;
  };

  int producers() const { return m_; }
  int consumers() const { return n_; }
  ConnectorKind kind() const { return kind_; }

  Sender& sender(int p) { return *senders_.at(static_cast<std::size_t>(p)); }
  /// The consumer's stream. Single-threaded per consumer.
  Source<T>& receiver(int c) { return *receivers_.at(static_cast<std::size_t>(c)); }

  /// Unblocks every producer and consumer with ChannelClosed.
  void abort() {
    for (auto& ch : channels_) ch->abort();
  }

  /// Waits for the drain activities and surfaces their errors. Call after consumers finish.
  void join() {
    for (auto* m : materializers_) m->join();
  }

 private:
  static std::uint64_t serial() {
    static std::atomic<std::uint64_t> s{0};
    return s++;
  }

  int m_;
  int n_;
  ConnectorKind kind_;
  ChannelOptions opts_;
  std::vector<std::unique_ptr<Channel<T>>> channels_;
  std::vector<MaterializingWriter<T>*> materializers_;
  std::vector<std::unique_ptr<Sender>> senders_;
  std::vector<std::unique_ptr<Source<T>>> owned_sources_;
  std::vector<Source<T>*> receivers_;
};

}  // namespace dfp::dataflow
