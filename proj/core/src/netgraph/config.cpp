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

#include "histoseg/netgraph/config.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace histoseg::netgraph {

using nlohmann::json;

const char* to_string(Head h) {
  return h == Head::binary_2class ? "binary_2class" : "multiclass_4";
}

const char* to_string(Variant v) {
  return v == Variant::one_bn_denseunet ? "one_bn_denseunet"
                                        : "tiramisu_baseline";
}

Head head_from_string(const std::string& s) {
  if (s == "binary_2class") return Head::binary_2class;
  if (s == "multiclass_4") return Head::multiclass_4;
  throw std::invalid_argument("head: unknown value '" + s +
                              "' (expected binary_2class or multiclass_4)");
}

Variant variant_from_string(const std::string& s) {
  if (s == "one_bn_denseunet") return Variant::one_bn_denseunet;
  if (s == "tiramisu_baseline") return Variant::tiramisu_baseline;
  throw std::invalid_argument(
      "variant: unknown value '" + s +
      "' (expected one_bn_denseunet or tiramisu_baseline)");
}

int round_half_up(double x) {
  return static_cast<int>(std::floor(x + 0.5));
}

std::vector<int> NetworkConfig::resolved_decoder_blocks() const {
  if (!decoder_blocks.empty()) return decoder_blocks;
  std::vector<int> mirror;
  for (int i = static_cast<int>(encoder_blocks.size()) - 2; i >= 0; --i)
    mirror.push_back(encoder_blocks[i]);
  return mirror;
}

void NetworkConfig::validate() const {
  if (growth_rate < 1)
    throw std::invalid_argument("growth_rate: must be >= 1");
  if (encoder_blocks.size() < 2)
    throw std::invalid_argument("encoder_blocks: need at least 2 dense blocks");
  for (int b : encoder_blocks)
    if (b < 1)
      throw std::invalid_argument("encoder_blocks: entries must be positive");
  if (!decoder_blocks.empty()) {
    if (decoder_blocks.size() != encoder_blocks.size() - 1)
      throw std::invalid_argument(
          "decoder_blocks: length must be len(encoder_blocks) - 1");
    for (int b : decoder_blocks)
      if (b < 1)
        throw std::invalid_argument("decoder_blocks: entries must be positive");
  }
  if (!(compression > 0.0 && compression <= 1.0))
    throw std::invalid_argument("compression: must lie in (0, 1]");
  if (reduction_width_multiplier < 1)
    throw std::invalid_argument("reduction_width_multiplier: must be >= 1");
  if (input_channels < 1)
    throw std::invalid_argument("input_channels: must be >= 1");
  if (patch_side < 1)
    throw std::invalid_argument("patch_side: must be positive");
  if (patch_side % downsample_factor() != 0)
    throw std::invalid_argument(
        "patch_side: " + std::to_string(patch_side) +
        " is not divisible by the total downsampling factor " +
        std::to_string(downsample_factor()));
}

std::string NetworkConfig::to_document() const {
  json j;
  j["growth_rate"] = growth_rate;
  j["encoder_blocks"] = encoder_blocks;
  j["decoder_blocks"] = resolved_decoder_blocks();
  j["compression"] = compression;
  j["reduction_width_multiplier"] = reduction_width_multiplier;
  j["input_channels"] = input_channels;
  j["head"] = to_string(head);
  j["variant"] = to_string(variant);
  j["patch_side"] = patch_side;
  return j.dump(2);
}

NetworkConfig NetworkConfig::from_document(const std::string& text) {
  json j = json::parse(text);
  NetworkConfig c;
  c.growth_rate = j.at("growth_rate").get<int>();
  c.encoder_blocks = j.at("encoder_blocks").get<std::vector<int>>();
  if (j.contains("decoder_blocks"))
    c.decoder_blocks = j.at("decoder_blocks").get<std::vector<int>>();
  if (j.contains("compression")) c.compression = j.at("compression").get<double>();
  if (j.contains("reduction_width_multiplier"))
    c.reduction_width_multiplier = j.at("reduction_width_multiplier").get<int>();
  if (j.contains("input_channels"))
    c.input_channels = j.at("input_channels").get<int>();
  if (j.contains("head")) c.head = head_from_string(j.at("head").get<std::string>());
  if (j.contains("variant"))
    c.variant = variant_from_string(j.at("variant").get<std::string>());
  if (j.contains("patch_side")) c.patch_side = j.at("patch_side").get<int>();
  c.validate();
  return c;
}

}  // namespace histoseg::netgraph
