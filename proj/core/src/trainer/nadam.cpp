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

#include "histoseg/trainer/nadam.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace histoseg::trainer {

namespace {

double mu_at(double beta1, std::int64_t t) {
  return beta1 * (1.0 - 0.5 * std::pow(0.96, static_cast<double>(t) * 0.004));
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T* v) {
  in.read(reinterpret_cast<char*>(v), sizeof(T));
  if (!in) throw std::runtime_error("optimizer state: truncated stream");
}

}  // namespace

Nadam::Nadam(netgraph::ParameterStore& store, NadamConfig config)
    : store_(&store), config_(config) {
  for (const netgraph::Param& p : store.all()) {
    if (!p.learnable) continue;
    m_.emplace_back(p.value.size(), 0.0);
    v_.emplace_back(p.value.size(), 0.0);
  }
}

void Nadam::step(double lr) {
  // Refuse the step before touching any state.
  for (const netgraph::Param& p : store_->all()) {
    if (!p.learnable) continue;
    for (double g : p.grad)
      if (!std::isfinite(g))
        throw std::runtime_error("non-finite gradient in parameter '" +
                                 p.name + "'; step refused");
  }
  const std::int64_t t = t_ + 1;
  const double mu_t = mu_at(config_.beta1, t);
  const double mu_next = mu_at(config_.beta1, t + 1);
  const double mu_product = mu_product_ * mu_t;
  const double v_correction =
      1.0 - std::pow(config_.beta2, static_cast<double>(t));

  std::size_t slot = 0;
  for (netgraph::Param& p : store_->all()) {
    if (!p.learnable) continue;
    std::vector<double>& m = m_[slot];
    std::vector<double>& v = v_[slot];
    ++slot;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = mu_next * m[i] / (1.0 - mu_product * mu_next) +
                           (1.0 - mu_t) * g / (1.0 - mu_product);
      const double v_hat = v[i] / v_correction;
      p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
  t_ = t;
  mu_product_ = mu_product;
}

void Nadam::serialize(std::ostream& out) const {
  write_pod(out, t_);
  write_pod(out, mu_product_);
  write_pod(out, static_cast<std::uint32_t>(m_.size()));
  for (std::size_t s = 0; s < m_.size(); ++s) {
    write_pod(out, static_cast<std::uint64_t>(m_[s].size()));
    out.write(reinterpret_cast<const char*>(m_[s].data()),
              static_cast<std::streamsize>(m_[s].size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(v_[s].data()),
              static_cast<std::streamsize>(v_[s].size() * sizeof(double)));
  }
}

void Nadam::deserialize(std::istream& in) {
  read_pod(in, &t_);
  read_pod(in, &mu_product_);
  std::uint32_t slots = 0;
  read_pod(in, &slots);
  if (slots != m_.size())
    throw std::runtime_error("optimizer state: slot count mismatch");
  for (std::size_t s = 0; s < m_.size(); ++s) {
    std::uint64_t count = 0;
    read_pod(in, &count);
    if (count != m_[s].size())
      throw std::runtime_error("optimizer state: parameter size mismatch");
    in.read(reinterpret_cast<char*>(m_[s].data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    in.read(reinterpret_cast<char*>(v_[s].data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw std::runtime_error("optimizer state: truncated stream");
  }
}

}  // namespace histoseg::trainer
