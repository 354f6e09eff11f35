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

#ifndef HISTOSEG_NETGRAPH_CONFIG_HPP_
#define HISTOSEG_NETGRAPH_CONFIG_HPP_

#include <string>
#include <vector>

namespace histoseg::netgraph {

enum class Head { binary_2class, multiclass_4 };
enum class Variant { one_bn_denseunet, tiramisu_baseline };

const char* to_string(Head h);
const char* to_string(Variant v);
Head head_from_string(const std::string& s);
Variant variant_from_string(const std::string& s);

/// Declarative description of one network variant. Everything the builder
/// needs is here; two builds of the same config produce identical graphs
/// and identical parameter counts.
struct NetworkConfig {
  int growth_rate = 6;                     // feature maps per 3x3 convolution
  std::vector<int> encoder_blocks = {3, 6, 9, 12, 15};
  std::vector<int> decoder_blocks;         // empty = mirror of encoder interior
  double compression = 0.5;                // transition output = round(C*GR*n)
  int reduction_width_multiplier = 4;      // 1x1 reduction outputs mult*GR
  int input_channels = 6;                  // RGB+HSV
  Head head = Head::binary_2class;
  Variant variant = Variant::one_bn_denseunet;
  int patch_side = 768;

  int head_channels() const { return head == Head::binary_2class ? 2 : 4; }
  int levels() const { return static_cast<int>(encoder_blocks.size()); }
  int downsample_factor() const { return 1 << (levels() - 1); }

  /// Decoder block sizes, defaulting to the mirrored encoder interior
  /// (e.g. [3,6,9,12,15] -> [12,9,6,3]).
  std::vector<int> resolved_decoder_blocks() const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Plain-text configuration document (JSON object, keys equal the field
  /// names above).
  std::string to_document() const;
  static NetworkConfig from_document(const std::string& text);
};

/// Round-half-up; fixes the compression law round(C * GR * n).
int round_half_up(double x);

}  // namespace histoseg::netgraph

#endif  // HISTOSEG_NETGRAPH_CONFIG_HPP_
