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


#include "cmerc/explain.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "cmerc/errors.hpp"
#include "cmerc/rng.hpp"
#include "json.hpp"

namespace cmerc::explain {

namespace {

using Json = nlohmann::ordered_json;

std::string file_stem(const std::string& id) {
  std::string out = id.empty() ? "utterance" : id;
  for (char& c : out) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    if (!ok) c = '_';
  }
  if (out.front() == '.') out.front() = '_';
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::vector<FeatureGroup> mode_groups(std::size_t mode_width, std::size_t sub_width) {
  if (mode_width == 0) throw ContractError("mode_groups: mode width must be positive");
  std::vector<FeatureGroup> out;
  for (Mode m : kModes) {
    const std::size_t base = index_of(m) * mode_width;
    if (sub_width == 0 || sub_width >= mode_width) {
      out.push_back({std::string(mode_name(m)), m, base, mode_width});
      continue;
    }
    for (std::size_t b = 0, k = 0; b < mode_width; b += sub_width, ++k) {
      out.push_back({std::string(mode_name(m)) + "." + std::to_string(k), m, base + b,
                     std::min(sub_width, mode_width - b)});
    }
  }
  return out;
}

double PerturbationConfig::kernel_for(std::size_t groups) const {
  return kernel_width > 0.0 ? kernel_width : 0.75 * std::sqrt(static_cast<double>(groups));
}

void PerturbationConfig::validate(std::size_t groups) const {
  if (groups == 0) throw ContractError("explain: no feature groups");
  if (num_samples < groups + 1) {
    throw ContractError("explain: need at least " + std::to_string(groups + 1) +
                        " samples for " + std::to_string(groups) + " groups");
  }
  if (!(mask_prob > 0.0 && mask_prob < 1.0)) throw ContractError("explain: mask_prob must lie in (0, 1)");
  if (!(kernel_width >= 0.0)) throw ContractError("explain: kernel width must be >= 0");
  if (!(ridge_lambda >= 0.0)) throw ContractError("explain: ridge lambda must be >= 0");
}

PerturbationSet perturb_and_score(std::span<const double> instance,
                                  std::span<const FeatureGroup> groups, const Scorer& scorer,
                                  const PerturbationConfig& config) {
  config.validate(groups.size());
  for (const auto& g : groups) {
    if (g.begin + g.width > instance.size()) {
      throw ShapeError("explain: group '" + g.name + "' exceeds the instance width");
    }
  }
  PerturbationSet set;
  set.kernel_width = config.kernel_for(groups.size());
  set.original_probs = scorer(instance);
  if (set.original_probs.empty()) throw ContractError("explain: scorer returned no probabilities");
  set.target_class = static_cast<std::size_t>(
      std::max_element(set.original_probs.begin(), set.original_probs.end()) -
      set.original_probs.begin());

  Rng rng(config.seed);
  std::vector<double> masked(instance.begin(), instance.end());
  const double k2 = set.kernel_width * set.kernel_width;
  for (std::size_t i = 0; i < config.num_samples; ++i) {
    std::vector<std::uint8_t> mask(groups.size(), 1);
    if (i > 0) {
      for (auto& m : mask) m = rng.bernoulli(config.mask_prob) ? 0 : 1;
    }
    std::copy(instance.begin(), instance.end(), masked.begin());
    std::size_t hamming = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (mask[g]) continue;
      ++hamming;
      std::fill_n(masked.begin() + static_cast<std::ptrdiff_t>(groups[g].begin), groups[g].width, 0.0);
    }
    const double score = i == 0 ? set.original_probs[set.target_class] : scorer(masked).at(set.target_class);
    set.masks.push_back(std::move(mask));
    set.scores.push_back(score);
    set.weights.push_back(std::exp(-static_cast<double>(hamming * hamming) / k2));
  }
  return set;
}

Explanation fit_surrogate(const PerturbationSet& set, std::span<const FeatureGroup> groups,
                          double ridge_lambda) {
  const std::size_t n = set.masks.size();
  const std::size_t g = groups.size();
  if (n < g + 1) {
    throw ContractError("fit_surrogate: " + std::to_string(n) + " samples for " +
                        std::to_string(g) + " groups");
  }
  if (set.scores.size() != n || set.weights.size() != n) {
    throw ContractError("fit_surrogate: masks, scores and weights differ in length");
  }
  if (!(ridge_lambda >= 0.0)) throw ContractError("fit_surrogate: lambda must be >= 0");

  Eigen::MatrixXd x(n, g);
  Eigen::VectorXd y(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (set.masks[i].size() != g) throw ShapeError("fit_surrogate: mask width differs from group count");
    for (std::size_t k = 0; k < g; ++k) x(i, k) = set.masks[i][k];
    y(i) = set.scores[i];
    w(i) = set.weights[i];
  }
  const double wsum = w.sum();
  if (!(wsum > 0.0)) throw NumericError("fit_surrogate: locality weights sum to zero");
  const Eigen::RowVectorXd x_mean = (w.asDiagonal() * x).colwise().sum() / wsum;
  const double y_mean = w.dot(y) / wsum;
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  const Eigen::MatrixXd gram = xc.transpose() * w.asDiagonal() * xc;
  const Eigen::VectorXd rhs = xc.transpose() * w.asDiagonal() * yc;

  Explanation e;
  e.predicted_label = set.target_class;
  e.num_samples = n;
  e.kernel_width = set.kernel_width;
  double lambda = ridge_lambda;
  const double scale = std::max(gram.diagonal().maxCoeff(), 1e-300);
  Eigen::VectorXd beta;
  for (int attempt = 0;; ++attempt) {
    const Eigen::MatrixXd a = gram + lambda * Eigen::MatrixXd::Identity(g, g);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const auto d = ldlt.vectorD();
    const bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive() && d.minCoeff() > 1e-12 * scale;
    if (ok) {
      beta = ldlt.solve(rhs);
      break;
    }
    if (attempt > 40) throw NumericError("fit_surrogate: design stays singular after raising lambda");
    const double next = lambda > 0.0 ? lambda * 10.0 : 1e-8 * scale;
    e.warnings.push_back("rank-deficient design; ridge lambda raised to " + std::to_string(next));
    std::cerr << "warning: explain: " << e.warnings.back() << "\n";
    lambda = next;
  }
  e.ridge_lambda = lambda;
  e.intercept = y_mean - x_mean.dot(beta);
  for (std::size_t k = 0; k < g; ++k) {
    e.group_names.push_back(groups[k].name);
    e.attributions.push_back(beta(static_cast<Eigen::Index>(k)));
  }
  const Eigen::VectorXd resid = yc - xc * beta;
  const double ss_res = w.dot(resid.cwiseProduct(resid));
  const double ss_tot = w.dot(yc.cwiseProduct(yc));
  e.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return e;
}

std::string explanation_json(const Explanation& e) {
  Json j;
  j["utterance_id"] = e.utterance_id;
  j["predicted_label"] = e.predicted_label;
  Json groups = Json::array();
  for (std::size_t k = 0; k < e.attributions.size(); ++k) {
    groups.push_back({{"group", e.group_names.at(k)}, {"weight", e.attributions[k]}});
  }
  j["attributions"] = std::move(groups);
  j["intercept"] = e.intercept;
  j["r2"] = e.r2;
  j["num_samples"] = e.num_samples;
  j["kernel_width"] = e.kernel_width;
  j["ridge_lambda"] = e.ridge_lambda;
  j["warnings"] = e.warnings;
  return j.dump(2);
}

Explanation explanation_from_json(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    Explanation e;
    e.utterance_id = j.at("utterance_id").get<std::string>();
    e.predicted_label = j.at("predicted_label").get<std::size_t>();
    for (const auto& g : j.at("attributions")) {
      e.group_names.push_back(g.at("group").get<std::string>());
      e.attributions.push_back(g.at("weight").get<double>());
    }
    e.intercept = j.at("intercept").get<double>();
    e.r2 = j.at("r2").get<double>();
    e.num_samples = j.at("num_samples").get<std::size_t>();
    e.kernel_width = j.at("kernel_width").get<double>();
    e.ridge_lambda = j.at("ridge_lambda").get<double>();
    e.warnings = j.at("warnings").get<std::vector<std::string>>();
    return e;
  } catch (const Json::exception& ex) {
    throw DataError(std::string("malformed explanation JSON: ") + ex.what());
  }
}

std::string explanation_svg(const Explanation& e) {
  constexpr double kBar = 28.0, kGap = 8.0, kLeft = 110.0, kHalf = 160.0, kTop = 30.0;
  const std::size_t g = e.attributions.size();
  double peak = 0.0;
  for (double a : e.attributions) peak = std::max(peak, std::abs(a));
  const double width = kLeft + 2 * kHalf + 20.0;
  const double height = kTop + static_cast<double>(g) * (kBar + kGap) + 10.0;
  const double axis = kLeft + kHalf;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) +
                    "\" height=\"" + fmt(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<text x=\"8\" y=\"18\">" + xml_escape(e.utterance_id) + " (label " + std::to_string(e.predicted_label) +
         ")</text>\n";
  for (std::size_t k = 0; k < g; ++k) {
    const double a = e.attributions[k];
    const double len = peak > 0.0 ? kHalf * std::abs(a) / peak : 0.0;
    const double y = kTop + static_cast<double>(k) * (kBar + kGap);
    const double x = a >= 0.0 ? axis : axis - len;
    svg += "<text x=\"8\" y=\"" + fmt(y + kBar * 0.65) + "\">" + xml_escape(e.group_names.at(k)) + "</text>\n";
    svg += "<rect class=\"bar\" x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(len) +
           "\" height=\"" + fmt(kBar) + "\" fill=\"" + (a >= 0.0 ? "#2e7d32" : "#c62828") + "\"/>\n";
  }
  svg += "<line x1=\"" + fmt(axis) + "\" y1=\"" + fmt(kTop - 4) + "\" x2=\"" + fmt(axis) + "\" y2=\"" +
         fmt(height - 6) + "\" stroke=\"#333\"/>\n";
  svg += "</svg>\n";
  return svg;
}

void render_report(std::span<const Explanation> explanations, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  Json index = Json::array();
  for (const auto& e : explanations) {
    const std::string stem = file_stem(e.utterance_id);
    write_file(out_dir / (stem + ".json"), explanation_json(e) + "\n");
    write_file(out_dir / (stem + ".svg"), explanation_svg(e));
    index.push_back({{"utterance_id", e.utterance_id},
                     {"predicted_label", e.predicted_label},
                     {"json", stem + ".json"},
                     {"svg", stem + ".svg"}});
  }
  write_file(out_dir / "index.json", index.dump(2) + "\n");
}

}  // namespace cmerc::explain
