// Copyright 2026 The Histoseg Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "histoseg/trainer/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace histoseg::trainer {

namespace {

constexpr char kMagic[8] = {'H', 'S', 'E', 'G', 'C', 'K', 'P', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T* v, const std::string& path) {
  in.read(reinterpret_cast<char*>(v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint '" + path + "' is truncated");
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in, const std::string& path) {
  std::uint32_t len = 0;
  read_pod(in, &len, path);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw std::runtime_error("checkpoint '" + path + "' is truncated");
  return s;
}

CheckpointMeta read_header(std::istream& in, const std::string& path) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("'" + path + "' is not a checkpoint file");
  CheckpointMeta meta;
  read_pod(in, &meta.epoch, path);
  read_pod(in, &meta.config_hash, path);
  read_pod(in, &meta.master_seed, path);
  meta.metrics_json = read_string(in, path);
  return meta;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const netgraph::ParameterStore& params,
                     const Nadam* optimizer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, meta.epoch);
  write_pod(out, meta.config_hash);
  write_pod(out, meta.master_seed);
  write_string(out, meta.metrics_json);

  write_pod(out, static_cast<std::uint32_t>(params.all().size()));
  for (const netgraph::Param& p : params.all()) {
    write_string(out, p.name);
    write_pod(out, static_cast<std::uint64_t>(p.value.size()));
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  }

  write_pod(out, static_cast<std::uint8_t>(optimizer ? 1 : 0));
  if (optimizer) optimizer->serialize(out);
  if (!out)
    throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

CheckpointMeta load_checkpoint(const std::string& path,
                               netgraph::ParameterStore* params,
                               Nadam* optimizer,
                               std::uint64_t expected_config_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
  CheckpointMeta meta = read_header(in, path);
  if (expected_config_hash != 0 && meta.config_hash != expected_config_hash)
    throw std::runtime_error(
        "checkpoint '" + path +
        "' was written under a different configuration (hash mismatch)");

  std::uint32_t n_params = 0;
  read_pod(in, &n_params, path);
  if (params) {
    if (n_params != params->all().size())
      throw std::runtime_error("checkpoint '" + path +
                               "': parameter count mismatch");
    for (netgraph::Param& p : params->all()) {
      const std::string name = read_string(in, path);
      if (name != p.name)
        throw std::runtime_error("checkpoint '" + path + "': expected '" +
                                 p.name + "', found '" + name + "'");
      std::uint64_t count = 0;
      read_pod(in, &count, path);
      if (count != p.value.size())
        throw std::runtime_error("checkpoint '" + path + "': parameter '" +
                                 p.name + "' size mismatch");
      in.read(reinterpret_cast<char*>(p.value.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
      if (!in)
        throw std::runtime_error("checkpoint '" + path + "' is truncated");
    }
  } else {
    for (std::uint32_t i = 0; i < n_params; ++i) {
      read_string(in, path);
      std::uint64_t count = 0;
      read_pod(in, &count, path);
      in.seekg(static_cast<std::streamoff>(count * sizeof(double)),
               std::ios::cur);
    }
  }

  std::uint8_t has_optimizer = 0;
  read_pod(in, &has_optimizer, path);
  if (optimizer) {
    if (!has_optimizer)
      throw std::runtime_error("checkpoint '" + path +
                               "' holds no optimizer state");
    optimizer->deserialize(in);
  }
  return meta;
}

CheckpointMeta read_checkpoint_meta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
  return read_header(in, path);
}

}  // namespace histoseg::trainer
