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


#include "cmerc/metrics.hpp"

#include <set>

#include "cmerc/errors.hpp"
#include "json.hpp"

namespace cmerc::metrics {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts)
    for (auto v : row) n += v;
  return n;
}

std::uint64_t ConfusionMatrix::support(std::size_t c) const {
  std::uint64_t n = 0;
  for (auto v : counts.at(c)) n += v;
  return n;
}

std::uint64_t ConfusionMatrix::predicted(std::size_t c) const {
  std::uint64_t n = 0;
  for (const auto& row : counts) n += row.at(c);
  return n;
}

ConfusionMatrix confusion(std::span<const std::size_t> golds, std::span<const std::size_t> preds,
                          std::size_t num_classes, std::vector<std::string> class_names) {
  if (num_classes == 0) throw ContractError("confusion: num_classes must be positive");
  if (golds.size() != preds.size()) {
    throw ContractError("confusion: " + std::to_string(golds.size()) + " golds but " +
                        std::to_string(preds.size()) + " predictions");
  }
  if (class_names.empty()) {
    for (std::size_t c = 0; c < num_classes; ++c) class_names.push_back(std::to_string(c));
  }
  if (class_names.size() != num_classes) throw ContractError("confusion: one name per class is required");
  ConfusionMatrix cm;
  cm.num_classes = num_classes;
  cm.class_names = std::move(class_names);
  cm.counts.assign(num_classes, std::vector<std::uint64_t>(num_classes, 0));
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (golds[i] >= num_classes || preds[i] >= num_classes) {
      throw ContractError("confusion: label out of range at position " + std::to_string(i));
    }
    ++cm.counts[golds[i]][preds[i]];
  }
  return cm;
}

std::vector<double> per_class_f1(const ConfusionMatrix& cm) {
  std::vector<double> out(cm.num_classes, 0.0);
  for (std::size_t c = 0; c < cm.num_classes; ++c) {
    const double tp = static_cast<double>(cm.counts[c][c]);
    const double support = static_cast<double>(cm.support(c));
    const double predicted = static_cast<double>(cm.predicted(c));
    const double precision = predicted > 0 ? tp / predicted : 0.0;
    const double recall = support > 0 ? tp / support : 0.0;
    out[c] = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  return out;
}

double weighted_f1(const ConfusionMatrix& cm, std::optional<std::span<const std::size_t>> subset) {
  std::vector<std::size_t> classes;
  if (subset) {
    if (subset->empty()) throw ContractError("weighted_f1: empty class subset");
    std::set<std::size_t> seen;
    for (std::size_t c : *subset) {
      if (c >= cm.num_classes) throw ContractError("weighted_f1: subset class out of range");
      if (seen.insert(c).second) classes.push_back(c);
    }
  } else {
    for (std::size_t c = 0; c < cm.num_classes; ++c) classes.push_back(c);
  }
  const auto f1 = per_class_f1(cm);
  double num = 0.0, den = 0.0;
  for (std::size_t c : classes) {
    const double s = static_cast<double>(cm.support(c));
    num += s * f1[c];
    den += s;
  }
  if (den == 0.0) throw ContractError("weighted_f1: no support over the selected classes");
  return num / den;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw ContractError("accuracy of an empty confusion matrix");
  std::uint64_t trace = 0;
  for (std::size_t c = 0; c < cm.num_classes; ++c) trace += cm.counts[c][c];
  return static_cast<double>(trace) / static_cast<double>(total);
}

MetricsReport make_report(const ConfusionMatrix& cm, std::span<const std::size_t> subset) {
  MetricsReport r;
  r.per_class_f1 = per_class_f1(cm);
  r.weighted_f1 = weighted_f1(cm);
  r.accuracy = accuracy(cm);
  if (!subset.empty()) {
    r.subset.assign(subset.begin(), subset.end());
    r.subset_weighted_f1 = weighted_f1(cm, subset);
  }
  r.confusion = cm;
  return r;
}

std::string report_json(const MetricsReport& report, int indent) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["weighted_f1"] = report.weighted_f1;
  if (report.subset_weighted_f1) {
    j["subset"] = report.subset;
    j["subset_weighted_f1"] = *report.subset_weighted_f1;
  }
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < report.per_class_f1.size(); ++c) {
    per_class[report.confusion.class_names.at(c)] = report.per_class_f1[c];
  }
  j["per_class_f1"] = std::move(per_class);
  j["class_names"] = report.confusion.class_names;
  j["confusion"] = report.confusion.counts;
  j["total"] = report.confusion.total();
  return j.dump(indent);
}

}  // namespace cmerc::metrics
