/*
 * Copyright 2026 The steglab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef STEGLAB_PARAMS_HPP
#define STEGLAB_PARAMS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "steglab/tensor.hpp"

namespace steglab {

/// One named tensor with its gradient accumulator.
struct Param {
  Tensor4 value;
  Tensor4 grad;
  bool trainable = true;  // false for frozen weights such as the fixed filter
  bool is_state = false;  // running statistics: saved, never optimized
};

/// Named, shaped parameter tensors for one network. Iteration order is the
/// lexicographic name order, which keeps optimizer sweeps deterministic.
class ParamStore {
public:
  Param& add(const std::string& name, Tensor4 value, bool trainable = true,
             bool is_state = false);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  bool has(const std::string& name) const { return entries_.count(name) != 0; }

  void zero_grads();

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  size_t size() const { return entries_.size(); }

  /// Values and state compared bit for bit; gradients are scratch and
  /// deliberately excluded.
  bool bitwise_equal(const ParamStore& o) const;

  /// FNV-1a over the raw bytes of every value tensor.
  uint64_t values_hash() const;

private:
  std::map<std::string, Param> entries_;
};

enum class OptimMode { rmsprop_momentum, adam };

struct OptimConfig {
  OptimMode mode = OptimMode::rmsprop_momentum;
  double lr = 2e-4;
  double beta1 = 0.5;   // momentum decay
  double beta2 = 0.99;  // squared-gradient decay
  double eps = 1e-8;
};

/// Per-parameter squared-gradient average and momentum buffer.
class OptimState {
public:
  OptimState() = default;
  explicit OptimState(OptimConfig cfg) : cfg_(cfg) {}

  OptimConfig& config() { return cfg_; }
  const OptimConfig& config() const { return cfg_; }
  uint64_t step_count() const { return step_count_; }

  struct Buffers {
    Tensor4 sq;
    Tensor4 mom;
  };
  std::map<std::string, Buffers>& buffers() { return bufs_; }
  const std::map<std::string, Buffers>& buffers() const { return bufs_; }
  void set_step_count(uint64_t n) { step_count_ = n; }
  void bump() { ++step_count_; }

private:
  OptimConfig cfg_;
  std::map<std::string, Buffers> bufs_;
  uint64_t step_count_ = 0;
};

/// One optimizer step over every trainable parameter, consuming the
/// gradients currently held in the store. Default mode is RMSProp with a
/// momentum buffer:
///   s <- b2*s + (1-b2)*g^2;  m <- b1*m + lr*g/sqrt(s + eps);  theta -= m
/// Adam is available behind OptimMode::adam. Ascent steps are expressed by
/// negating gradients before calling.
void optim_step(ParamStore& params, OptimState& state);

/// Checkpoint container: versioned header, named tensors with shapes,
/// optimizer state and the master seed. Little-endian throughout.
struct CheckpointSection {
  std::string name;
  ParamStore params;
  std::optional<OptimState> optim;
};

struct Checkpoint {
  uint64_t master_seed = 0;
  std::string meta_json;  // architecture and run configuration
  std::vector<CheckpointSection> sections;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

uint64_t fnv1a64(const void* data, size_t len);

}  // namespace steglab

#endif
