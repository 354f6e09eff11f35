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

#include "histoseg/io/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace histoseg::io {

namespace {

cv::Mat read_or_throw(const std::string& path, int flags) {
  cv::Mat m = cv::imread(path, flags);
  if (m.empty())
    throw std::runtime_error("failed to read image '" + path + "'");
  return m;
}

void write_or_throw(const std::string& path, const cv::Mat& m) {
  if (!cv::imwrite(path, m))
    throw std::runtime_error("failed to write image '" + path + "'");
}

std::uint8_t to_byte(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

}  // namespace

RgbImage load_rgb(const std::string& path) {
  const cv::Mat m = read_or_throw(path, cv::IMREAD_COLOR);  // BGR, 8-bit
  RgbImage img(m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y) {
    const cv::Vec3b* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < m.cols; ++x) {
      img.at(y, x, 0) = row[x][2] / 255.0;
      img.at(y, x, 1) = row[x][1] / 255.0;
      img.at(y, x, 2) = row[x][0] / 255.0;
    }
  }
  return img;
}

void save_rgb(const std::string& path, const RgbImage& img) {
  cv::Mat m(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    cv::Vec3b* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width; ++x) {
      row[x][2] = to_byte(img.at(y, x, 0));
      row[x][1] = to_byte(img.at(y, x, 1));
      row[x][0] = to_byte(img.at(y, x, 2));
    }
  }
  write_or_throw(path, m);
}

labels::GradeMap load_grade_map(const std::string& path,
                                labels::ClassSpace space) {
  const cv::Mat m = read_or_throw(path, cv::IMREAD_GRAYSCALE);
  labels::GradeMap map(m.rows, m.cols, space);
  for (int y = 0; y < m.rows; ++y) {
    const std::uint8_t* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) map.set(y, x, row[x]);
  }
  try {
    map.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("'" + path + "': " + e.what());
  }
  return map;
}

void save_grade_map(const std::string& path, const labels::GradeMap& map) {
  cv::Mat m(map.height, map.width, CV_8UC1);
  for (int y = 0; y < map.height; ++y) {
    std::uint8_t* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < map.width; ++x) row[x] = map.at(y, x);
  }
  write_or_throw(path, m);
}

TissueMask load_mask(const std::string& path) {
  const cv::Mat m = read_or_throw(path, cv::IMREAD_GRAYSCALE);
  TissueMask mask(m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y) {
    const std::uint8_t* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) mask.set(y, x, row[x] != 0);
  }
  return mask;
}

void save_mask(const std::string& path, const TissueMask& mask) {
  cv::Mat m(mask.height, mask.width, CV_8UC1);
  for (int y = 0; y < mask.height; ++y) {
    std::uint8_t* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width; ++x) row[x] = mask.at(y, x) ? 255 : 0;
  }
  write_or_throw(path, m);
}

void save_gray(const std::string& path, const std::uint8_t* data, int height,
               int width) {
  const cv::Mat m(height, width, CV_8UC1, const_cast<std::uint8_t*>(data));
  write_or_throw(path, m);
}

}  // namespace histoseg::io
