/*
 * Copyright 2026 The cmerc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cmerc::metrics {

// Rows are gold labels, columns are predictions.
struct ConfusionMatrix {
  std::size_t num_classes = 0;
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::string> class_names;

  std::uint64_t total() const;
  std::uint64_t support(std::size_t c) const;    // row sum
  std::uint64_t predicted(std::size_t c) const;  // column sum
};

// `class_names` defaults to "0".."C-1".
ConfusionMatrix confusion(std::span<const std::size_t> golds, std::span<const std::size_t> preds,
                          std::size_t num_classes, std::vector<std::string> class_names = {});

// F1 of every class; precision or recall of 0/0 counts as 0, as does F1 when
// both are 0.
std::vector<double> per_class_f1(const ConfusionMatrix& cm);

// Support-weighted mean of per-class F1. With `subset`, only the listed
// classes enter the mean; their F1 values still come from the full matrix.
double weighted_f1(const ConfusionMatrix& cm,
                   std::optional<std::span<const std::size_t>> subset = std::nullopt);

double accuracy(const ConfusionMatrix& cm);

struct MetricsReport {
  std::vector<double> per_class_f1;
  double weighted_f1 = 0.0;
  std::vector<std::size_t> subset;
  std::optional<double> subset_weighted_f1;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
};

MetricsReport make_report(const ConfusionMatrix& cm, std::span<const std::size_t> subset = {});

// Stable JSON rendering: fixed key order, shortest round-trip doubles.
std::string report_json(const MetricsReport& report, int indent = 2);

}  // namespace cmerc::metrics
