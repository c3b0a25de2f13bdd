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

#include "steglab/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "steglab/errors.hpp"

namespace steglab {

Param& ParamStore::add(const std::string& name, Tensor4 value, bool trainable,
                       bool is_state) {
  if (entries_.count(name))
    throw usage_error("duplicate parameter name: " + name);
  Param p;
  p.grad = Tensor4(value.n, value.c, value.h, value.w);
  p.value = std::move(value);
  p.trainable = trainable;
  p.is_state = is_state;
  return entries_.emplace(name, std::move(p)).first->second;
}

Param& ParamStore::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw usage_error("no such parameter: " + name);
  return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw usage_error("no such parameter: " + name);
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& [name, p] : entries_) p.grad.zero();
}

bool ParamStore::bitwise_equal(const ParamStore& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  auto a = entries_.begin();
  auto b = o.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    if (a->first != b->first) return false;
    const Tensor4& x = a->second.value;
    const Tensor4& y = b->second.value;
    if (!x.same_shape(y)) return false;
    if (std::memcmp(x.v.data(), y.v.data(), x.size() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

uint64_t fnv1a64(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t ParamStore::values_hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [name, p] : entries_) {
    const uint64_t hn = fnv1a64(name.data(), name.size());
    const uint64_t hv =
        fnv1a64(p.value.v.data(), p.value.size() * sizeof(double));
    h ^= hn;
    h *= 0x100000001b3ull;
    h ^= hv;
    h *= 0x100000001b3ull;
  }
  return h;
}

void optim_step(ParamStore& params, OptimState& state) {
  const OptimConfig& c = state.config();
  state.bump();
  for (auto& [name, p] : params) {
    if (!p.trainable || p.is_state) continue;
    if (!p.grad.all_finite())
      throw numeric_error("non-finite gradient for " + name);
    auto it = state.buffers().find(name);
    if (it == state.buffers().end()) {
      OptimState::Buffers b;
      b.sq = Tensor4(p.value.n, p.value.c, p.value.h, p.value.w);
      b.mom = Tensor4(p.value.n, p.value.c, p.value.h, p.value.w);
      it = state.buffers().emplace(name, std::move(b)).first;
    }
    Tensor4& sq = it->second.sq;
    Tensor4& mom = it->second.mom;
    const size_t n = p.value.size();
    if (c.mode == OptimMode::rmsprop_momentum) {
      for (size_t i = 0; i < n; ++i) {
        const double g = p.grad.v[i];
        sq.v[i] = c.beta2 * sq.v[i] + (1.0 - c.beta2) * g * g;
        mom.v[i] = c.beta1 * mom.v[i] + c.lr * g / std::sqrt(sq.v[i] + c.eps);
        p.value.v[i] -= mom.v[i];
      }
    } else {
      const double t = static_cast<double>(state.step_count());
      const double bc1 = 1.0 - std::pow(c.beta1, t);
      const double bc2 = 1.0 - std::pow(c.beta2, t);
      for (size_t i = 0; i < n; ++i) {
        const double g = p.grad.v[i];
        mom.v[i] = c.beta1 * mom.v[i] + (1.0 - c.beta1) * g;
        sq.v[i] = c.beta2 * sq.v[i] + (1.0 - c.beta2) * g * g;
        p.value.v[i] -=
            c.lr * (mom.v[i] / bc1) / (std::sqrt(sq.v[i] / bc2) + c.eps);
      }
    }
    if (!p.value.all_finite())
      throw numeric_error("non-finite parameter after step: " + name);
  }
}

namespace {

constexpr char kMagic[4] = {'S', 'L', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<char*>(b), 4);
}

void put_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<char*>(b), 8);
}

void put_f64(std::ostream& os, double d) {
  uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_tensor(std::ostream& os, const Tensor4& t) {
  put_u32(os, static_cast<uint32_t>(t.n));
  put_u32(os, static_cast<uint32_t>(t.c));
  put_u32(os, static_cast<uint32_t>(t.h));
  put_u32(os, static_cast<uint32_t>(t.w));
  for (double d : t.v) put_f64(os, d);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw data_error("checkpoint truncated");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw data_error("checkpoint truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  const uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

std::string get_str(std::istream& is) {
  const uint32_t len = get_u32(is);
  if (len > (1u << 28)) throw data_error("checkpoint string too large");
  std::string s(len, '\0');
  is.read(s.data(), len);
  if (!is) throw data_error("checkpoint truncated");
  return s;
}

Tensor4 get_tensor(std::istream& is) {
  const int n = static_cast<int>(get_u32(is));
  const int c = static_cast<int>(get_u32(is));
  const int h = static_cast<int>(get_u32(is));
  const int w = static_cast<int>(get_u32(is));
  if (n < 0 || c < 0 || h < 0 || w < 0 ||
      static_cast<int64_t>(n) * c * h * w > (1ll << 31))
    throw data_error("checkpoint tensor has absurd shape");
  Tensor4 t(n, c, h, w);
  for (double& d : t.v) d = get_f64(is);
  return t;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw data_error("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u64(os, ck.master_seed);
  put_str(os, ck.meta_json);
  put_u32(os, static_cast<uint32_t>(ck.sections.size()));
  for (const auto& sec : ck.sections) {
    put_str(os, sec.name);
    put_u32(os, static_cast<uint32_t>(sec.params.size()));
    for (const auto& [name, p] : sec.params) {
      put_str(os, name);
      const uint8_t flags = static_cast<uint8_t>((p.trainable ? 1 : 0) |
                                                 (p.is_state ? 2 : 0));
      os.put(static_cast<char>(flags));
      put_tensor(os, p.value);
    }
    put_u32(os, sec.optim ? 1u : 0u);
    if (sec.optim) {
      const OptimState& st = *sec.optim;
      os.put(st.config().mode == OptimMode::adam ? 1 : 0);
      put_f64(os, st.config().lr);
      put_f64(os, st.config().beta1);
      put_f64(os, st.config().beta2);
      put_f64(os, st.config().eps);
      put_u64(os, st.step_count());
      put_u32(os, static_cast<uint32_t>(st.buffers().size()));
      for (const auto& [name, b] : st.buffers()) {
        put_str(os, name);
        put_tensor(os, b.sq);
        put_tensor(os, b.mom);
      }
    }
  }
  os.flush();
  if (!os) throw data_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw data_error("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw data_error("not a checkpoint file: " + path);
  const uint32_t version = get_u32(is);
  if (version != kVersion)
    throw data_error("unsupported checkpoint version " +
                     std::to_string(version));
  Checkpoint ck;
  ck.master_seed = get_u64(is);
  ck.meta_json = get_str(is);
  const uint32_t n_sections = get_u32(is);
  for (uint32_t si = 0; si < n_sections; ++si) {
    CheckpointSection sec;
    sec.name = get_str(is);
    const uint32_t n_params = get_u32(is);
    for (uint32_t pi = 0; pi < n_params; ++pi) {
      const std::string name = get_str(is);
      const int flags = is.get();
      if (flags < 0) throw data_error("checkpoint truncated");
      Tensor4 value = get_tensor(is);
      sec.params.add(name, std::move(value), (flags & 1) != 0,
                     (flags & 2) != 0);
    }
    if (get_u32(is) == 1u) {
      OptimState st;
      st.config().mode =
          is.get() == 1 ? OptimMode::adam : OptimMode::rmsprop_momentum;
      st.config().lr = get_f64(is);
      st.config().beta1 = get_f64(is);
      st.config().beta2 = get_f64(is);
      st.config().eps = get_f64(is);
      st.set_step_count(get_u64(is));
      const uint32_t n_bufs = get_u32(is);
      for (uint32_t bi = 0; bi < n_bufs; ++bi) {
        const std::string name = get_str(is);
        OptimState::Buffers b;
        b.sq = get_tensor(is);
        b.mom = get_tensor(is);
        st.buffers().emplace(name, std::move(b));
      }
      sec.optim = std::move(st);
    }
    ck.sections.push_back(std::move(sec));
  }
  return ck;
}

}  // namespace steglab
